"""Finite-scale checks of a witness family: unit norms, bounded supports, small variation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from core.errors import ConfigError
from .construction import WitnessFamily, close_pairs

logger = logging.getLogger(__name__)


@dataclass
class WitnessReport:
    """Outcome of ``verify_witness``; failed conditions are listed in ``errors``."""
    n: int
    radius: int
    epsilon: Fraction
    max_norm_deviation: Fraction = Fraction(0)
    max_support_radius: int = 0
    declared_support: Optional[int] = None
    sup_variation: Fraction = Fraction(0)
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "R": self.radius,
            "epsilon": str(self.epsilon),
            "max_norm_deviation": str(self.max_norm_deviation),
            "max_support_radius": self.max_support_radius,
            "declared_support": self.declared_support,
            "sup_variation": str(self.sup_variation),
            "passed": self.passed,
            "errors": self.errors,
        }


def sup_variation(family: WitnessFamily, radius: int) -> Fraction:
    """max ||f_x - f_y|| over pairs with d(x, y) <= radius."""
    worst = Fraction(0)
    for x, y in close_pairs(family.space, radius):
        worst = max(worst, family.vectors[x].distance(family.vectors[y]))
    return worst


def verify_witness(
    family: WitnessFamily,
    radius: int,
    epsilon,
    declared_support: Optional[int] = None,
) -> WitnessReport:
    """Check norms (exactly 1), supports within the declared radius and variation <= epsilon."""
    epsilon = Fraction(epsilon)
    if radius < 0 or epsilon < 0:
        raise ConfigError(f"verify_witness needs R >= 0 and epsilon >= 0, got {radius}, {epsilon}")
    declared = family.support_radius if declared_support is None else int(declared_support)
    report = WitnessReport(n=family.n, radius=radius, epsilon=epsilon, declared_support=declared)

    deviations = [abs(v.norm() - 1) for v in family.vectors.values()]
    report.max_norm_deviation = max(deviations, default=Fraction(0))
    if report.max_norm_deviation != 0:
        bad = sum(1 for d in deviations if d)
        report.errors.append(f"condition 1: {bad} vectors are not unit (max deviation {report.max_norm_deviation})")

    report.max_support_radius = family.measured_support_radius()
    if report.max_support_radius > declared:
        report.errors.append(
            f"condition 2: support radius {report.max_support_radius} > declared {declared}"
        )

    report.sup_variation = sup_variation(family, radius)
    if report.sup_variation > epsilon:
        report.errors.append(
            f"condition 3: sup variation {report.sup_variation} over d <= {radius} exceeds {epsilon}"
        )
    logger.info(
        "witness n=%d on %s: support %d, variation(R=%d) %s -> %s",
        family.n, family.space.name, report.max_support_radius, radius,
        report.sup_variation, "pass" if report.passed else "FAIL",
    )
    return report


@dataclass
class VariationRow:
    n: int
    sup_variation: Fraction
    bound: Fraction
    support_radius: int

    def csv_values(self) -> list:
        return [self.n, str(self.sup_variation), f"{float(self.sup_variation):.6f}", str(self.bound), self.support_radius]


@dataclass
class VariationTable:
    """sup ||f^n_x - f^n_y|| over d(x, y) <= R, one row per scale n."""
    radius: int
    rows: List[VariationRow] = field(default_factory=list)

    columns = ["n", "sup_variation", "sup_variation_float", "bound", "support_radius"]

    @property
    def decreasing(self) -> bool:
        """Nonincreasing in n, the finite-scale reading of a vanishing limit."""
        values = [r.sup_variation for r in sorted(self.rows, key=lambda r: r.n)]
        return all(b <= a for a, b in zip(values, values[1:]))

    def to_dict(self) -> dict:
        return {
            "R": self.radius,
            "decreasing": self.decreasing,
            "rows": [dict(zip(self.columns, row.csv_values())) for row in self.rows],
        }


def variation_table(families: Sequence[WitnessFamily], radius: int = 1) -> VariationTable:
    table = VariationTable(radius=radius)
    for family in families:
        table.rows.append(VariationRow(
            n=family.n,
            sup_variation=sup_variation(family, radius),
            bound=Fraction(1, family.n),
            support_radius=family.support_radius,
        ))
    return table
