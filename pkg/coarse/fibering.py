"""Chains on a group ball fibered over an isometric group action.

G acts on X transitively by isometries with basepoint x0; the orbit map
pi(g) = g x0 is L-Lipschitz with L = max d(x0, s x0) over generators s.
A chain on X pulls back along pi.  Every terminal piece U is moved into
the stabilizer stab_D(x0) = {g : d(g x0, x0) <= D} by g_U^-1, and a
width-2 chain W on the stabilizer is pushed forward again: the new
pieces are g_U W intersected with U.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import ConfigError, IntegrityError, StructuralError
from groups.ball import GroupBall, ball
from groups.basic import cyclic, free_abelian
from groups.model import Element
from groups.wreath import wreath
from spaces.decomposition import ChainReport, Decomposition, DecompositionChain, verify_chain
from spaces.families import MetricFamily, SubsetRef
from spaces.space import FiniteMetricSpace, path_space
from utils.threading_utils import ordered_map
from .embedding import pull_chain_along
from .growth import GrowthFunction, compose_affine

logger = logging.getLogger(__name__)

ActFn = Callable[[Element, int], Optional[int]]


@dataclass
class GroupAction:
    """G (through its ball) acting on a finite target by isometries.

    ``act(g, x)`` returns the target index of g x, or None when g x falls
    outside the enumerated target.
    """
    ball: GroupBall
    target: FiniteMetricSpace
    act: ActFn
    basepoint: int = 0
    name: str = "action"
    _orbit: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def orbit_map(self) -> np.ndarray:
        """pi as target indices, one per ball element."""
        if self._orbit is None:
            images = [self.act(g, self.basepoint) for g in self.ball.elements]
            missing = [self.ball.label(i) for i, x in enumerate(images) if x is None]
            if missing:
                raise StructuralError(
                    f"{self.name}: g x0 outside {self.target.name} for g in {missing[:5]}"
                )
            orbit = np.asarray(images, dtype=np.intp)
            orbit.setflags(write=False)
            self._orbit = orbit
        return self._orbit

    @property
    def lipschitz_constant(self) -> int:
        moved = []
        for label, s in self.ball.group.generators:
            x = self.act(s, self.basepoint)
            if x is None:
                raise StructuralError(f"{self.name}: generator {label} moves x0 off the target")
            moved.append(self.target.dist(self.basepoint, x))
        return max(moved, default=0)

    def check_isometric(self, samples: int = 2000, rng: Optional[np.random.Generator] = None) -> List[str]:
        """d(gx, gy) = d(x, y) on sampled (g, x, y) with both images enumerated."""
        rng = rng if rng is not None else np.random.default_rng(0)
        n_g, n_x = len(self.ball), len(self.target)
        errors: List[str] = []
        for gi, x, y in zip(
            rng.integers(0, n_g, samples), rng.integers(0, n_x, samples), rng.integers(0, n_x, samples)
        ):
            g = self.ball.elements[gi]
            gx, gy = self.act(g, int(x)), self.act(g, int(y))
            if gx is None or gy is None:
                continue
            if self.target.dist(gx, gy) != self.target.dist(int(x), int(y)):
                errors.append(
                    f"{self.name}: d(gx, gy) != d(x, y) for g={self.ball.label(gi)}, "
                    f"x={self.target.label(int(x))}, y={self.target.label(int(y))}"
                )
                break
        return errors

    def check_transitive(self) -> List[str]:
        """Every target point is reached from x0 through generator moves inside the target."""
        seen = {self.basepoint}
        queue = deque([self.basepoint])
        gens = [s for _, s in self.ball.group.generators]
        while queue:
            x = queue.popleft()
            for s in gens:
                y = self.act(s, x)
                if y is not None and y not in seen:
                    seen.add(y)
                    queue.append(y)
        unreached = sorted(set(range(len(self.target))) - seen)
        if not unreached:
            return []
        labels = ", ".join(self.target.label(i) for i in unreached[:5])
        return [f"{self.name}: {len(unreached)} target points not in the orbit of x0 ({labels})"]


def stabilizer(action: GroupAction, radius: int, within: Optional[GroupBall] = None) -> SubsetRef:
    """stab_R(x0) intersected with the action ball, or with another ball *within* of the group."""
    if within is not None:
        members = []
        for i, h in enumerate(within.elements):
            x = action.act(h, action.basepoint)
            if x is not None and action.target.dist(action.basepoint, x) <= radius:
                members.append(i)
        return SubsetRef(within, tuple(members), tag=f"stab{radius}")
    pi = action.orbit_map()
    reach = action.target.matrix[action.basepoint, pi]
    members = np.flatnonzero(reach <= radius)
    return SubsetRef(action.ball, tuple(members.tolist()), tag=f"stab{radius}")


# --- standard actions ---

def _lookup_act(target: GroupBall, phi: Callable[[Element], Element]) -> ActFn:
    group = target.group

    def act(g: Element, x: int) -> Optional[int]:
        return target.index_of_element(group.multiply(phi(g), target.element(x)))

    return act


def extension_action(g_ball: GroupBall, quotient: GroupBall, phi: Callable[[Element], Element], name: str = "") -> GroupAction:
    """G acting on a ball of the quotient Q through a homomorphism phi: G -> Q.

    With x0 = e the R-stabilizer is the preimage of B_Q(e, R), which
    contains the kernel ball B_R(K).
    """
    return GroupAction(
        g_ball, quotient, _lookup_act(quotient, phi), basepoint=0,
        name=name or f"{g_ball.group.name}->{quotient.group.name}",
    )


def lamplighter_head_action(ball_radius: int, target_radius: Optional[int] = None) -> GroupAction:
    """Z2 wr Z acting on a Z-ball through the head projection (lamp kernel sum of Z2)."""
    target_radius = 2 * ball_radius if target_radius is None else target_radius
    lamplighter = wreath(cyclic(2), free_abelian(1))
    g_ball = ball(lamplighter, ball_radius)
    line = ball(free_abelian(1), target_radius)
    return extension_action(g_ball, line, lamplighter.head, name="head")


def self_action(g_ball: GroupBall, target: Optional[GroupBall] = None) -> GroupAction:
    """Left multiplication; stab_R(e) = B(e, R).  *target* defaults to the ball itself."""
    target = g_ball if target is None else target
    return GroupAction(g_ball, target, _lookup_act(target, lambda g: g), name="left")


def point_action(g_ball: GroupBall) -> GroupAction:
    """The trivial action on a one-point space; every stabilizer is the whole ball."""
    return GroupAction(g_ball, path_space(1), lambda g, x: 0, name="point")


# --- stabilizer chains ---

Classifier = Callable[[Element], Tuple[int, Hashable]]

STAB_WIDTH = 2


@dataclass(frozen=True)
class StabilizerChain:
    """A chain on stab_D(x0) read stage by stage off group elements.

    ``stages[j](h)`` places h in (family, piece key) at radius ``radii[j]``;
    stage j pieces are read inside the stage j-1 pieces, so every stage
    refines the one before.  ``terminal_mesh`` bounds the terminal mesh of
    the chain on the whole stabilizer.  ``chain`` is set when the stages
    come from a concrete chain on a ball of the group.
    """
    D: int
    radii: Tuple[int, ...]
    stages: Tuple[Classifier, ...]
    widths: Tuple[int, ...]
    terminal_mesh: int
    name: str = "stab"
    chain: Optional[DecompositionChain] = None

    @classmethod
    def from_chain(cls, chain: DecompositionChain, D: int) -> "StabilizerChain":
        """Wrap a chain on (a part of) a group ball; its widths must be at most 2."""
        space = chain.space
        if not isinstance(space, GroupBall):
            raise StructuralError(f"stabilizer chain lives on {space.name}, not on a group ball")
        if max(chain.widths, default=0) > STAB_WIDTH:
            raise StructuralError(
                f"stabilizer chain for D={D} has widths {list(chain.widths)}; at most {STAB_WIDTH} allowed"
            )
        report = verify_chain(chain, [STAB_WIDTH] * len(chain.radii))
        if not report.passed:
            raise IntegrityError(f"stabilizer chain for D={D} fails verification: {report.errors[:3]}")

        def classifier(j: int) -> Classifier:
            position = {id(p): k for k, p in enumerate(chain.stages[j].pieces)}
            table: Dict[int, Tuple[int, Hashable]] = {}
            for dec in chain.steps[j]:
                for f, fam in enumerate(dec.subfamilies):
                    for piece in fam.pieces:
                        for i in piece.members:
                            table[i] = (f, position[id(piece)])

            def classify(h: Element) -> Tuple[int, Hashable]:
                i = space.index_of_element(h)
                if i is None or i not in table:
                    raise StructuralError(
                        f"translate {space.group.canonical_key(h)!r} is not in the stabilizer chain on {space.name}"
                    )
                return table[i]

            return classify

        return cls(
            D=D,
            radii=tuple(chain.radii),
            stages=tuple(classifier(j) for j in range(chain.length)),
            widths=tuple(chain.widths),
            terminal_mesh=chain.terminal_mesh,
            name=f"chain on {space.name}",
            chain=chain,
        )


StabChainSpec = Union[StabilizerChain, DecompositionChain]


def lamp_window_chain(D: int, radii: Sequence[int]) -> StabilizerChain:
    """Width-1 chain on stab_D(x0) of Z2 wr Z over the head projection.

    At radius R an element is classified by its lamps outside the window
    [-m, m], m = D + R//2 + 1.  Heads of stabilizer elements lie in
    [-D, D], so two elements whose lamps differ at some |p| > m are at
    distance at least 2(m + 1 - D) > R.
    """
    radii = tuple(int(r) for r in radii)
    if D < 0 or not radii or any(r < 0 for r in radii):
        raise ConfigError(f"lamp window chain needs D >= 0 and radii >= 0, got D={D} radii={radii}")

    def classifier(radius: int) -> Classifier:
        m = D + radius // 2 + 1

        def classify(h: Element) -> Tuple[int, Hashable]:
            lamps, _ = h
            return 0, tuple((pos, lamp) for pos, lamp in lamps if abs(pos[0]) > m)

        return classify

    m = D + radii[-1] // 2 + 1
    return StabilizerChain(
        D=D,
        radii=radii,
        stages=tuple(classifier(r) for r in radii),
        widths=(1,) * len(radii),
        terminal_mesh=6 * m + 2 * D + 1,
        name=f"lamp window D={D}",
    )


def _select(stab_chains: Optional[Mapping[int, StabChainSpec]], needed: int) -> StabilizerChain:
    if not stab_chains:
        raise StructuralError("no stabilizer chain supplied")
    keys = sorted(D for D in stab_chains if D >= needed)
    if not keys:
        raise StructuralError(
            f"stabilizer chains supplied for D in {sorted(stab_chains)}, needed D >= {needed}"
        )
    D = keys[0]
    given = stab_chains[D]
    stab = given if isinstance(given, StabilizerChain) else StabilizerChain.from_chain(given, D)
    if stab.D != D:
        raise StructuralError(f"stabilizer chain for D={stab.D} filed under D={D}")
    if max(stab.widths, default=0) > STAB_WIDTH:
        raise StructuralError(
            f"stabilizer chain for D={D} has widths {list(stab.widths)}; at most {STAB_WIDTH} allowed"
        )
    if any(b < a for a, b in zip(stab.radii, stab.radii[1:])):
        raise ConfigError(f"stabilizer radii {stab.radii} not nondecreasing")
    return stab


def _check_chain_support(action: GroupAction, stab: StabilizerChain) -> None:
    """A concrete stabilizer chain must be on the same group and inside stab_D(x0)."""
    if stab.chain is None:
        return
    space = stab.chain.space
    if space.group.cache_key() != action.ball.group.cache_key():
        raise StructuralError(
            f"stabilizer chain is on {space.group.name}, the action is of {action.ball.group.name}"
        )
    inside = set(stabilizer(action, stab.D, within=space).members)
    outside = [i for i in stab.chain.root_piece.members if i not in inside]
    if outside:
        labels = ", ".join(space.label(i) for i in outside[:5])
        raise IntegrityError(f"stabilizer chain root leaves stab_{stab.D}(x0): {labels}")


# --- fibered chains ---

@dataclass
class FiberChain:
    """The glued chain and its provenance."""
    chain: DecompositionChain
    growth: GrowthFunction
    lipschitz: int
    stabilizer_radius: int
    pulled_stages: int
    stab_name: str
    stab_widths: List[int]
    stab_terminal_mesh: int
    report: ChainReport
    note: str = "stabilizer stages pushed forward by g_U and intersected with U"

    def to_dict(self) -> dict:
        return {
            "space": self.chain.space.name,
            "radii": list(self.chain.radii),
            "widths": list(self.chain.widths),
            "pulled_stages": self.pulled_stages,
            "lipschitz": self.lipschitz,
            "stabilizer_radius": self.stabilizer_radius,
            "stabilizer_chain": self.stab_name,
            "stab_widths": self.stab_widths,
            "stab_terminal_mesh": self.stab_terminal_mesh,
            "terminal_mesh": self.chain.terminal_mesh,
            "growth": self.growth.format(),
            "note": self.note,
            "report": self.report.to_dict(),
        }


def piece_base(action: GroupAction, piece: SubsetRef) -> int:
    """g_U: the member of *piece* with the lowest canonical key."""
    keys = action.ball.spec.keys
    return min(piece.members, key=lambda i: keys[i])


def _glue(action: GroupAction, piece: SubsetRef, stab: StabilizerChain) -> List[List[Decomposition]]:
    """g_U W intersected with U for every stage W of *stab*, as per-stage witnesses."""
    g_ball, group = action.ball, action.ball.group
    base = piece_base(action, piece)
    base_inv = group.invert(g_ball.element(base))
    translates = {i: group.multiply(base_inv, g_ball.element(i)) for i in piece.members}
    for i, t in translates.items():
        x = action.act(t, action.basepoint)
        if x is None or action.target.dist(action.basepoint, x) > stab.D:
            raise IntegrityError(
                f"{piece.tag}: g_U^-1 {g_ball.label(i)} is not in stab_{stab.D}(x0)"
            )

    steps: List[List[Decomposition]] = []
    parents = [piece]
    for j, (radius, classify) in enumerate(zip(stab.radii, stab.stages)):
        step: List[Decomposition] = []
        for parent in parents:
            groups: Dict[Tuple[int, Hashable], List[int]] = {}
            for i in parent.members:
                color, key = classify(translates[i])
                if color not in range(STAB_WIDTH):
                    raise StructuralError(
                        f"{stab.name}: family {color} at stage {j + 1}; at most {STAB_WIDTH} families allowed"
                    )
                groups.setdefault((color, key), []).append(i)
            families = []
            for color in sorted({c for c, _ in groups}):
                members = sorted((m for (c, _), m in groups.items() if c == color), key=lambda m: m[0])
                pieces = tuple(
                    SubsetRef(g_ball, tuple(m), tag=f"{parent.tag}|w{j + 1}.{color}.{n}")
                    for n, m in enumerate(members)
                )
                families.append(MetricFamily(pieces, tag=f"{parent.tag}|w{j + 1}.{color}"))
            step.append(Decomposition(parent, radius, tuple(families)))
        steps.append(step)
        parents = [p for dec in step for p in dec.pieces]
    return steps


def fiber_chain(
    action: GroupAction,
    cx: DecompositionChain,
    stab_chains: Optional[Mapping[int, StabChainSpec]],
    s: GrowthFunction,
    workers: int = 1,
) -> FiberChain:
    """Pull *cx* back along pi, then split each terminal piece U along a stabilizer chain.

    *cx* must use radii L R_1 <= L R_2 <= ...; the pulled stages sit at
    R_i and are bounded by t(R) = s(L R).  *stab_chains* maps D to a
    width-2 chain on stab_D(x0); the one with the smallest D at least the
    terminal mesh of *cx* is used, and its stages are bounded by 2.
    """
    errors = action.check_transitive()
    if errors:
        raise StructuralError(errors[0])
    if cx.space is not action.target:
        raise StructuralError(f"chain does not live on {action.target.name}")
    given = verify_chain(cx, s)
    if not given.passed:
        raise IntegrityError(f"target chain fails verification against {s}: {given.errors[:3]}")

    L = action.lipschitz_constant
    if L and any(r % L for r in cx.radii):
        raise ConfigError(f"target radii {list(cx.radii)} must be multiples of L={L}")
    stab = _select(stab_chains, cx.terminal_mesh)
    _check_chain_support(action, stab)

    pi = action.orbit_map()
    pulled_radii = [r // L if L else r for r in cx.radii]
    pulled = pull_chain_along(action.ball, pi, cx, pulled_radii)
    stab_radii = list(stab.radii)
    if pulled_radii and stab_radii and stab_radii[0] < pulled_radii[-1]:
        raise ConfigError(
            f"stabilizer radii {stab_radii} must start at >= {pulled_radii[-1]}"
        )

    terminal = list(pulled.terminal_family.pieces)
    glued = ordered_map(lambda piece: _glue(action, piece, stab), terminal, workers)
    steps = [list(step) for step in pulled.steps]
    for j in range(len(stab_radii)):
        steps.append([dec for piece_steps in glued for dec in piece_steps[j]])
    radii = pulled_radii + stab_radii
    chain = DecompositionChain.from_steps(action.ball, radii, steps, root=pulled.root)

    growth = compose_affine(s, L, 0) if L > 0 else GrowthFunction.constant(s(0))
    bounds = [growth(r) for r in pulled_radii] + [STAB_WIDTH] * len(stab_radii)
    report = verify_chain(chain, bounds)
    if not report.passed:
        raise IntegrityError(f"fibered chain fails verification: {report.errors[:3]}")
    covered = chain.terminal_family.union()
    if not np.array_equal(covered, np.arange(len(action.ball))):
        raise IntegrityError(f"fibered chain covers {covered.size} of {len(action.ball)} ball points")
    if chain.terminal_mesh > stab.terminal_mesh:
        raise IntegrityError(
            f"terminal mesh {chain.terminal_mesh} > mesh {stab.terminal_mesh} of {stab.name}"
        )

    logger.info(
        "fiber %s over %s: L=%d D=%d (%s) radii %s widths %s terminal mesh %d",
        action.ball.name, action.target.name, L, stab.D, stab.name, radii,
        list(chain.widths), chain.terminal_mesh,
    )
    return FiberChain(
        chain=chain,
        growth=growth,
        lipschitz=L,
        stabilizer_radius=stab.D,
        pulled_stages=len(pulled_radii),
        stab_name=stab.name,
        stab_widths=list(stab.widths),
        stab_terminal_mesh=stab.terminal_mesh,
        report=report,
    )
