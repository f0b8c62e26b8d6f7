"""Experiment configuration with JSON persistence, validation and a checksum."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import List


@dataclass
class BallSettings:
    """Group-ball enumeration limits."""
    element_budget: int = 200_000
    check_stable: bool = True        # compare Grigorchuk balls against a deeper tree model


@dataclass
class DecompositionSettings:
    """How (R, n)-decompositions are produced."""
    strategy: str = "greedy"         # greedy | grid | exact
    mesh_rule: str = "3R"            # kR or a fixed integer D
    exact_limit: int = 12            # largest |X| handed to the exact oracle


@dataclass
class ProfileSettings:
    """Dimension-growth profile: one row per (ball radius N, R)."""
    spaces: List[str] = field(default_factory=lambda: ["z^1"])
    ball_radii: List[int] = field(default_factory=lambda: [20])
    radii: List[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])


@dataclass
class WitnessSettings:
    """Witness families f^n on one space."""
    space: str = "z^1@30"
    scales: List[int] = field(default_factory=lambda: [1, 2, 3])
    stages: int = 2
    variation_radius: int = 1
    projection_samples: int = 200


@dataclass
class DemoSettings:
    """The (Z wr F_2) x Grigorchuk demonstration."""
    wreath_group: str = "wreath(z^1,free:2)"
    wreath_radius: int = 2
    grigorchuk_radius: int = 3
    radii: List[int] = field(default_factory=lambda: [1, 2])   # thickening radii; chains use 3R
    witness_scales: List[int] = field(default_factory=lambda: [1, 2, 3])
    max_wreath_radius: int = 4
    max_grigorchuk_radius: int = 8


@dataclass
class CacheSettings:
    """Ball cache; DGLAB_CACHE_DIR overrides ``directory``."""
    enabled: bool = True
    directory: str = ""


# Fields that never change numeric report content.
_UNHASHED = ("output_base_dir", "workers")


@dataclass
class ExperimentConfig:
    """Top-level experiment configuration with JSON load/save/validate."""
    experiment: str = "default"
    seed: int = 0
    workers: int = 1
    record_timings: bool = False
    output_base_dir: str = ""
    ball: BallSettings = field(default_factory=BallSettings)
    decomposition: DecompositionSettings = field(default_factory=DecompositionSettings)
    profile: ProfileSettings = field(default_factory=ProfileSettings)
    witness: WitnessSettings = field(default_factory=WitnessSettings)
    demo: DemoSettings = field(default_factory=DemoSettings)
    cache: CacheSettings = field(default_factory=CacheSettings)

    def __post_init__(self):
        if not self.output_base_dir:
            self.output_base_dir = str(Path.home() / "dglab_output")

    def validate(self) -> List[str]:
        """Return list of validation error strings (empty = valid)."""
        errors = []
        if not self.experiment or any(c in self.experiment for c in "/\\ "):
            errors.append("Experiment name must be nonempty without spaces or slashes.")
        if self.workers < 1:
            errors.append("Workers must be >= 1.")
        if self.ball.element_budget < 1:
            errors.append("Element budget must be >= 1.")
        if self.decomposition.strategy.lower() not in ("greedy", "greedy-carve", "grid", "exact"):
            errors.append(f"Unknown strategy {self.decomposition.strategy!r}.")
        if self.decomposition.exact_limit < 1:
            errors.append("Exact oracle limit must be >= 1.")
        if not self.profile.spaces:
            errors.append("At least one profile space must be given.")
        if not self.profile.ball_radii or any(n < 0 for n in self.profile.ball_radii):
            errors.append("Profile ball radii must be a nonempty list of nonnegative integers.")
        errors.extend(_radii_errors("Profile", self.profile.radii))
        if not self.witness.scales or any(n < 1 for n in self.witness.scales):
            errors.append("Witness scales must be a nonempty list of positive integers.")
        if self.witness.stages < 1:
            errors.append("Witness stages must be >= 1.")
        if self.witness.variation_radius < 0:
            errors.append("Witness variation radius must be >= 0.")
        errors.extend(_radii_errors("Demo", self.demo.radii))
        if self.demo.wreath_radius < 0 or self.demo.grigorchuk_radius < 0:
            errors.append("Demo ball radii must be >= 0.")
        if not self.demo.witness_scales or any(n < 1 for n in self.demo.witness_scales):
            errors.append("Demo witness scales must be a nonempty list of positive integers.")
        return errors

    def to_dict(self) -> dict:
        return asdict(self)

    def checksum(self) -> str:
        """SHA-256 of the canonical JSON of every field that shapes the results."""
        data = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def save(self, path: Path) -> None:
        """Save config to JSON file."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path: Path) -> "ExperimentConfig":
        """Load config from JSON, falling back to defaults for missing keys."""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return cls._from_dict(data)

    @classmethod
    def _from_dict(cls, data: dict) -> "ExperimentConfig":
        sections = {}
        for name, section_cls in (
            ("ball", BallSettings),
            ("decomposition", DecompositionSettings),
            ("profile", ProfileSettings),
            ("witness", WitnessSettings),
            ("demo", DemoSettings),
            ("cache", CacheSettings),
        ):
            section_data = data.get(name, {})
            sections[name] = section_cls(**{
                k: v for k, v in section_data.items()
                if k in section_cls.__dataclass_fields__
            })

        return cls(
            experiment=data.get("experiment", "default"),
            seed=data.get("seed", 0),
            workers=data.get("workers", 1),
            record_timings=data.get("record_timings", False),
            output_base_dir=data.get("output_base_dir", ""),
            **sections,
        )


def _radii_errors(label: str, radii: List[int]) -> List[str]:
    if not radii:
        return [f"{label} radii must not be empty."]
    if any(r < 0 for r in radii) or any(b < a for a, b in zip(radii, radii[1:])):
        return [f"{label} radii must be nonnegative and nondecreasing."]
    return []
