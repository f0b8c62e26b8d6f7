"""Decomposition chains: the general builder and the width-2 (sFDC) search."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

from core.errors import ConfigError, DomainError, IntegrityError
from spaces.decomposition import Decomposition, DecompositionChain, verify_chain
from spaces.families import SubsetRef
from spaces.space import FiniteMetricSpace
from .strategies import DecompositionStrategy

logger = logging.getLogger(__name__)

StrategySpec = Union[DecompositionStrategy, Sequence[DecompositionStrategy]]


def _check_radii(radii: Sequence[int]) -> List[int]:
    radii = [int(r) for r in radii]
    if not radii:
        raise ConfigError("a chain needs at least one radius")
    if any(r < 0 for r in radii):
        raise ConfigError(f"radii must be nonnegative: {radii}")
    if any(b < a for a, b in zip(radii, radii[1:])):
        raise ConfigError(f"radii must be nondecreasing: {radii}")
    return radii


def _per_stage(strategy: StrategySpec, count: int) -> List[DecompositionStrategy]:
    if isinstance(strategy, DecompositionStrategy):
        return [strategy] * count
    strategies = list(strategy)
    if len(strategies) != count:
        raise ConfigError(f"{len(strategies)} strategies for {count} radii")
    return strategies


def _certify(chain: DecompositionChain) -> DecompositionChain:
    report = verify_chain(chain, list(chain.widths))
    if not report.passed:
        raise IntegrityError(f"constructed chain fails verification: {report.errors[:3]}")
    return chain


def build_chain(
    space: FiniteMetricSpace,
    radii: Sequence[int],
    strategy: StrategySpec = DecompositionStrategy(),
    stop_mesh: Optional[int] = 0,
    root: Optional[SubsetRef] = None,
) -> DecompositionChain:
    """Decompose X at R_1, then every piece of stage i at R_{i+1}.

    Pieces are decomposed in place, with the distances of X.  The chain
    stops early once the current mesh is <= *stop_mesh* (None disables
    the early stop).  The result is verified before it is returned.
    """
    radii = _check_radii(radii)
    strategies = _per_stage(strategy, len(radii))
    start = root if root is not None else space.whole()
    if stop_mesh is not None and start.diameter() <= stop_mesh:
        return DecompositionChain.empty(space, root=root)
    inputs = [start]
    steps: List[List[Decomposition]] = []
    for i, (radius, strat) in enumerate(zip(radii, strategies)):
        step = [strat.apply(space, radius, source=piece) for piece in inputs]
        steps.append(step)
        inputs = [p for dec in step for p in dec.pieces]
        stage_mesh = max(p.diameter() for p in inputs)
        logger.debug(
            "chain %s stage %d: R=%d %s width=%d pieces=%d mesh=%d",
            space.name, i + 1, radius, strat.describe(),
            max(dec.n for dec in step), len(inputs), stage_mesh,
        )
        if stop_mesh is not None and stage_mesh <= stop_mesh:
            break
    chain = DecompositionChain.from_steps(space, radii[: len(steps)], steps, root=root)
    return _certify(chain)


@dataclass
class SFDCResult:
    """Outcome of the width-2 search; ``found=False`` is a search failure, not a proof."""
    chain: Optional[DecompositionChain]
    found: bool
    stage: Optional[int] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "stage": self.stage,
            "detail": self.detail,
            "widths": list(self.chain.widths) if self.chain is not None else None,
        }


def sfdc_chain(
    space: FiniteMetricSpace,
    radii: Sequence[int],
    strategies: Sequence[DecompositionStrategy] = (DecompositionStrategy(),),
    stop_mesh: Optional[int] = 0,
) -> SFDCResult:
    """Like ``build_chain`` but every step must use at most two families.

    Each piece tries *strategies* in order and keeps the first
    decomposition of width <= 2.  Mesh bounds are never escalated.
    """
    radii = _check_radii(radii)
    start = space.whole()
    if stop_mesh is not None and start.diameter() <= stop_mesh:
        return SFDCResult(DecompositionChain.empty(space), True, detail="already bounded")
    inputs = [start]
    steps: List[List[Decomposition]] = []
    for i, radius in enumerate(radii):
        step = []
        for piece in inputs:
            dec = _width_two(space, radius, piece, strategies)
            if dec is None:
                detail = (
                    f"no width-2 decomposition of a {len(piece)}-point piece at R={radius} "
                    f"with {', '.join(s.describe() for s in strategies)}"
                )
                logger.info("sfdc %s: %s", space.name, detail)
                return SFDCResult(None, False, stage=i + 1, detail=detail)
            step.append(dec)
        steps.append(step)
        inputs = [p for dec in step for p in dec.pieces]
        if stop_mesh is not None and max(p.diameter() for p in inputs) <= stop_mesh:
            break
    chain = DecompositionChain.from_steps(space, radii[: len(steps)], steps)
    return SFDCResult(_certify(chain), True)


def _width_two(
    space: FiniteMetricSpace,
    radius: int,
    piece: SubsetRef,
    strategies: Sequence[DecompositionStrategy],
) -> Optional[Decomposition]:
    for strat in strategies:
        try:
            dec = strat.apply(space, radius, source=piece)
        except DomainError as exc:
            logger.debug("sfdc: %s not applicable: %s", strat.describe(), exc)
            continue
        if dec.n <= 2:
            return dec
    return None


def sfdc_growth(result: SFDCResult):
    """A width-2 chain certifies the constant growth function 2 on the tested radii."""
    from coarse.growth import GrowthFunction
    if not result.found:
        raise DomainError(f"no width-2 chain to certify: {result.detail}")
    return GrowthFunction.constant(2)


def single_stage_chain(
    space: FiniteMetricSpace,
    radius: int,
    strategy: DecompositionStrategy = DecompositionStrategy(),
) -> DecompositionChain:
    """The one-stage chain whose width bounds the dimension growth at *radius*."""
    return build_chain(space, [radius], strategy, stop_mesh=None)
