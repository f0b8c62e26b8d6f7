"""Growth functions and their algebra.

Closed forms (constant, polynomial, exponential) are compared by class
rules: s ~ t iff s(ax) >= t(x) - c and t(ax) >= s(x) - c for some a, c.
That relation identifies all constants, polynomials of equal degree and
all exponentials, and nothing else.  Tabulated samples only ever get a
``HeuristicResult``.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from mpmath import mp

from core.enums import GrowthClass
from core.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

PRECISION_DPS = 50

Number = Union[int, Fraction]


@dataclass(frozen=True)
class HeuristicResult:
    """A verdict drawn from finite samples; never a proof."""
    value: bool
    heuristic: bool = True
    note: str = ""

    def __bool__(self) -> bool:
        return self.value


@dataclass(frozen=True)
class GrowthFunction:
    """A nondecreasing function N -> N with class metadata.

    ``degree``/``coefficient`` describe polynomials, ``base`` the
    exponential class.  Evaluation is exact for rational inputs except for
    exponentials with a non-integer exponent, which go through ``mpmath``
    before the ceiling is taken.
    """
    kind: GrowthClass
    expr: str
    degree: int = 0
    coefficient: Fraction = Fraction(1)
    base: Fraction = Fraction(1)
    samples: Tuple[Tuple[int, int], ...] = ()
    _fn: Callable = field(default=None, compare=False, repr=False)

    def __call__(self, x: Number) -> int:
        return _ceil(self._fn(Fraction(x)))

    def __str__(self) -> str:
        return self.expr

    @property
    def is_closed_form(self) -> bool:
        return self.kind is not GrowthClass.TABULATED

    # --- constructors ---

    @classmethod
    def constant(cls, c: Number) -> "GrowthFunction":
        c = Fraction(c)
        if c < 0:
            raise ConfigError(f"constant growth must be nonnegative, got {c}")
        return cls(GrowthClass.CONSTANT, f"const:{_num(c)}", coefficient=c, _fn=lambda x: c)

    @classmethod
    def polynomial(cls, degree: int, coefficient: Number = 1) -> "GrowthFunction":
        coefficient = Fraction(coefficient)
        if degree < 0 or coefficient <= 0:
            raise ConfigError(f"invalid polynomial growth degree={degree} coefficient={coefficient}")
        if degree == 0:
            return cls.constant(coefficient)
        expr = f"poly:{degree}" if coefficient == 1 else f"poly:{degree}:{_num(coefficient)}"
        return cls(
            GrowthClass.POLYNOMIAL, expr, degree=degree, coefficient=coefficient,
            _fn=lambda x: coefficient * max(x, Fraction(0)) ** degree,
        )

    @classmethod
    def exponential(cls, base: Number) -> "GrowthFunction":
        base = Fraction(base)
        if base <= 1:
            raise ConfigError(f"exponential growth needs base > 1, got {base}")
        return cls(GrowthClass.EXPONENTIAL, f"exp:{_num(base)}", base=base, _fn=_power(base))

    @classmethod
    def tabulated(cls, samples: Sequence[Tuple[int, int]]) -> "GrowthFunction":
        """Step function through sampled points: s(x) = value at the first sample >= x."""
        pts = tuple(sorted((int(x), int(v)) for x, v in samples))
        if not pts:
            raise ConfigError("tabulated growth needs at least one sample")
        if any(b[1] < a[1] for a, b in zip(pts, pts[1:])):
            raise ConfigError("tabulated growth samples must be nondecreasing")

        def fn(x):
            for px, v in pts:
                if px >= x:
                    return Fraction(v)
            raise DomainError(f"x={x} beyond the last tabulated sample {pts[-1][0]}")

        return cls(GrowthClass.TABULATED, f"table[{len(pts)}]", samples=pts, _fn=fn)

    @classmethod
    def parse(cls, text: str) -> "GrowthFunction":
        """``const:c``, ``poly:d``, ``poly:d:coef`` or ``exp:b``."""
        m = re.fullmatch(r"\s*(const|poly|exp):([0-9/]+)(?::([0-9/]+))?\s*", str(text))
        if not m:
            raise ConfigError(f"invalid growth function {text!r}")
        kind, a, b = m.groups()
        try:
            if kind == "const" and b is None:
                return cls.constant(Fraction(a))
            if kind == "poly":
                return cls.polynomial(int(a), Fraction(b) if b else 1)
            if kind == "exp" and b is None:
                return cls.exponential(Fraction(a))
        except (ValueError, ZeroDivisionError):
            pass
        raise ConfigError(f"invalid growth function {text!r}")

    def format(self) -> str:
        return self.expr


def _num(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _power(base: Fraction) -> Callable:
    def fn(x: Fraction):
        if x.denominator == 1:
            return base ** int(x) if x >= 0 else Fraction(1)
        with mp.workdps(PRECISION_DPS):
            return mp.power(mp.mpf(base.numerator) / base.denominator, mp.mpf(x.numerator) / x.denominator)
    return fn


def _affine(L: Fraction, C: Fraction) -> str:
    inner = "x" if L == 1 else f"{_num(L)}x"
    return inner if C == 0 else f"{inner}+{_num(C)}"


def compose_affine(s: GrowthFunction, L: Number, C: Number) -> GrowthFunction:
    """t(x) = s(Lx + C); class preserved, exponential base b becomes b^L."""
    L, C = Fraction(L), Fraction(C)
    if L <= 0 or C < 0:
        raise ConfigError(f"affine composition needs L > 0 and C >= 0, got L={L} C={C}")
    fn = (lambda x: s._fn(L * x + C))
    expr = s.expr if (L, C) == (1, 0) else f"{s.expr}({_affine(L, C)})"
    if s.kind is GrowthClass.EXPONENTIAL:
        base = s.base ** L.numerator if L.denominator == 1 else s.base
        return GrowthFunction(GrowthClass.EXPONENTIAL, expr, base=base, _fn=fn)
    if s.kind is GrowthClass.POLYNOMIAL:
        return GrowthFunction(
            GrowthClass.POLYNOMIAL, expr, degree=s.degree,
            coefficient=s.coefficient * L ** s.degree, _fn=fn,
        )
    return GrowthFunction(
        s.kind, expr, coefficient=s.coefficient, samples=s.samples, _fn=fn,
    )


def product_growth(s: GrowthFunction, t: GrowthFunction) -> GrowthFunction:
    """(s * t)(x) = s(x) t(x), evaluated on the integer-valued factors."""
    def fn(x):
        return Fraction(_ceil(s._fn(x)) * _ceil(t._fn(x)))

    expr = f"{s.expr}*{t.expr}"
    kinds = {s.kind, t.kind}
    if GrowthClass.TABULATED in kinds:
        return GrowthFunction(GrowthClass.TABULATED, expr, _fn=fn)
    if GrowthClass.EXPONENTIAL in kinds:
        base = (s.base if s.kind is GrowthClass.EXPONENTIAL else 1) * (
            t.base if t.kind is GrowthClass.EXPONENTIAL else 1)
        return GrowthFunction(GrowthClass.EXPONENTIAL, expr, base=Fraction(base), _fn=fn)
    degree = s.degree + t.degree
    coef = s.coefficient * t.coefficient
    if degree == 0:
        return GrowthFunction(GrowthClass.CONSTANT, expr, coefficient=coef, _fn=fn)
    return GrowthFunction(GrowthClass.POLYNOMIAL, expr, degree=degree, coefficient=coef, _fn=fn)


def _ceil(value) -> int:
    if isinstance(value, Fraction):
        return math.ceil(value)
    return int(mp.ceil(value))


def classify_samples(samples: Sequence[Tuple[int, int]]) -> Tuple[GrowthClass, float]:
    """Best of a log-log (polynomial) and a log-linear (exponential) least-squares fit.

    Returns the class and its fitted parameter (degree or base).
    """
    pts = [(x, v) for x, v in samples if x > 0 and v > 0]
    if len(pts) < 3:
        return GrowthClass.TABULATED, 0.0
    xs = np.array([p[0] for p in pts], dtype=float)
    vs = np.log(np.array([p[1] for p in pts], dtype=float))
    if np.ptp(vs) == 0:
        return GrowthClass.CONSTANT, float(np.exp(vs[0]))
    poly, poly_res = np.polyfit(np.log(xs), vs, 1, full=True)[:2]
    expo, expo_res = np.polyfit(xs, vs, 1, full=True)[:2]
    poly_err = float(poly_res[0]) if len(poly_res) else 0.0
    expo_err = float(expo_res[0]) if len(expo_res) else 0.0
    if expo_err < poly_err and expo[0] > 0:
        return GrowthClass.EXPONENTIAL, float(np.exp(expo[0]))
    return GrowthClass.POLYNOMIAL, float(poly[0])


def _class_key(s: GrowthFunction) -> Tuple[GrowthClass, int]:
    if s.kind is GrowthClass.TABULATED:
        kind, param = classify_samples(s.samples)
        if kind is GrowthClass.POLYNOMIAL:
            degree = int(round(param))
            return (GrowthClass.CONSTANT, 0) if degree == 0 else (kind, degree)
        return kind, 0
    return s.kind, s.degree


def growth_equivalent(s: GrowthFunction, t: GrowthFunction) -> Union[bool, HeuristicResult]:
    """Decide s ~ t by class; tabulated inputs yield a HeuristicResult."""
    ks, kt = _class_key(s), _class_key(t)
    if GrowthClass.TABULATED in (ks[0], kt[0]):
        return HeuristicResult(False, note="too few samples to classify")
    verdict = ks == kt if ks[0] is GrowthClass.POLYNOMIAL else ks[0] is kt[0]
    if s.is_closed_form and t.is_closed_form:
        return verdict
    return HeuristicResult(verdict, note=f"fitted classes {ks[0].value}/{kt[0].value}")


def is_subexponential(s: GrowthFunction) -> Union[bool, HeuristicResult]:
    """True for constants and polynomials (x-th root -> 1), False for exponentials."""
    if s.is_closed_form:
        return s.kind is not GrowthClass.EXPONENTIAL
    kind, param = classify_samples(s.samples)
    note = f"fitted {kind.value}" + (f" base {param:.3f}" if kind is GrowthClass.EXPONENTIAL else "")
    return HeuristicResult(kind is not GrowthClass.EXPONENTIAL, note=note)
