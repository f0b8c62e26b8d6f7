"""Descriptor strings for groups and spaces.

Groups: ``z^d``, ``free:k``, ``cyclic:m``, ``grigorchuk`` (or
``grigorchuk:k`` for a fixed tree depth), ``wreath(A,B)``,
``product(A,B)``.  Spaces: ``<group>@N`` (the ball of radius N),
``path:n`` and ``grid:n``.
"""

from __future__ import annotations

import re
from typing import Callable, List, Optional, Tuple

from core.errors import ConfigError
from spaces.space import FiniteMetricSpace, grid_space, path_space
from .ball import DEFAULT_ELEMENT_BUDGET, GroupBall, ball
from .basic import cyclic, direct_product, free, free_abelian
from .grigorchuk import grigorchuk
from .model import GroupModel
from .wreath import wreath

BallProvider = Callable[[GroupModel, int, int], GroupBall]

_ATOM = re.compile(r"^(z\^(\d+)|free:(\d+)|cyclic:(\d+)|grigorchuk(?::(\d+))?)$")
_BINARY = re.compile(r"^(wreath|product)\((.*)\)$")


def _split_pair(body: str, desc: str) -> Tuple[str, str]:
    depth = 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return body[:i].strip(), body[i + 1:].strip()
    raise ConfigError(f"expected two arguments in group descriptor {desc!r}")


def parse_group(desc: str) -> GroupModel:
    """Build a GroupModel from its descriptor; ConfigError names the offending string."""
    text = desc.strip().lower()
    m = _ATOM.match(text)
    if m:
        try:
            if m.group(2) is not None:
                return free_abelian(int(m.group(2)))
            if m.group(3) is not None:
                return free(int(m.group(3)))
            if m.group(4) is not None:
                return cyclic(int(m.group(4)))
            depth = m.group(5)
            return grigorchuk(int(depth) if depth is not None else None)
        except ConfigError as exc:
            raise ConfigError(f"invalid group descriptor {desc!r}: {exc}") from None
    m = _BINARY.match(text)
    if m:
        left, right = _split_pair(m.group(2), desc)
        a, b = parse_group(left), parse_group(right)
        return wreath(a, b) if m.group(1) == "wreath" else direct_product(a, b)
    raise ConfigError(f"unknown group descriptor {desc!r}")


def parse_space(
    desc: str,
    budget: int = DEFAULT_ELEMENT_BUDGET,
    provider: Optional[BallProvider] = None,
) -> FiniteMetricSpace:
    """Build the finite metric space named by *desc*.

    *provider* supplies group balls (the ball cache plugs in here);
    the default enumerates them directly.
    """
    text = desc.strip()
    for prefix, build in (("path:", path_space), ("grid:", grid_space)):
        if text.lower().startswith(prefix):
            size = text[len(prefix):]
            if not size.isdigit():
                raise ConfigError(f"invalid space descriptor {desc!r}")
            return build(int(size))
    if "@" not in text:
        raise ConfigError(f"space descriptor {desc!r} needs '<group>@N', 'path:n' or 'grid:n'")
    group_desc, _, radius = text.rpartition("@")
    if not radius.isdigit():
        raise ConfigError(f"invalid ball radius in space descriptor {desc!r}")
    group = parse_group(group_desc)
    if provider is not None:
        return provider(group, int(radius), budget)
    return ball(group, int(radius), budget)


def lattice_coordinates(space: FiniteMetricSpace) -> Optional[List[Tuple[int, ...]]]:
    """Integer coordinates when the space is a piece of Z^d with the l1 metric."""
    name = space.name
    points = space.points
    if name.startswith("path:") and all(isinstance(p, int) for p in points):
        return [(p,) for p in points]
    if name.startswith("grid:") and all(isinstance(p, tuple) for p in points):
        return [tuple(p) for p in points]
    if isinstance(space, GroupBall) and space.group.name.startswith("z^"):
        return [tuple(g) for g in space.elements]
    return None
