"""Exact arithmetic in the real quadratic field Q(sqrt(d)).

Every coordinate on a surface lives in a single fixed field Q(sqrt(d))
(d = 0 means plain rationals, with the sqrt-part pinned to zero).  All
geometric predicates downstream (sector membership, segment intersection,
angular-gap tests) reduce to signs of field elements, so comparisons here
are exact, never tolerance-based.

Word lengths are sums of square roots of field elements and generally
leave the field; ``RadicalSum`` compares such sums against rational
cutoffs soundly: exact fast paths where the radicals resolve in the
field, interval arithmetic with precision escalation otherwise, and a
hard error rather than a guess if a comparison cannot be decided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import ComparisonUndecided

_ZERO = Fraction(0)


def _fraction_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    if rn * rn != q.numerator:
        return None
    rd = math.isqrt(q.denominator)
    if rd * rd != q.denominator:
        return None
    return Fraction(rn, rd)


@dataclass(frozen=True, slots=True)
class Quad:
    """Element a + b*sqrt(d) of Q(sqrt(d)), d a fixed square-free integer >= 0."""

    a: Fraction
    b: Fraction
    d: int

    @staticmethod
    def of(value, d: int) -> "Quad":
        return Quad(Fraction(value), _ZERO, d)

    def __add__(self, other: "Quad") -> "Quad":
        return Quad(self.a + other.a, self.b + other.b, self.d)

    def __sub__(self, other: "Quad") -> "Quad":
        return Quad(self.a - other.a, self.b - other.b, self.d)

    def __neg__(self) -> "Quad":
        return Quad(-self.a, -self.b, self.d)

    def __mul__(self, other: "Quad") -> "Quad":
        return Quad(
            self.a * other.a + self.b * other.b * self.d,
            self.a * other.b + self.b * other.a,
            self.d,
        )

    def scale(self, r) -> "Quad":
        r = Fraction(r)
        return Quad(self.a * r, self.b * r, self.d)

    def inverse(self) -> "Quad":
        n = self.a * self.a - self.b * self.b * self.d
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return Quad(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other: "Quad") -> "Quad":
        return self * other.inverse()

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d)."""
        a, b = self.a, self.b
        if b == 0 or self.d == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # Mixed signs: compare a^2 with d*b^2; the larger magnitude wins.
        t = a * a - b * b * self.d
        if t == 0:
            return 0
        mag = 1 if t > 0 else -1
        return mag * ((a > 0) - (a < 0))

    def is_zero(self) -> bool:
        return self.a == 0 and (self.b == 0 or self.d == 0)

    def __lt__(self, other: "Quad") -> bool:
        return (self - other).sign() < 0

    def __le__(self, other: "Quad") -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other: "Quad") -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other: "Quad") -> bool:
        return (self - other).sign() >= 0

    def to_float(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def to_mpf(self) -> mpmath.mpf:
        return mpmath.mpf(self.a.numerator) / self.a.denominator + (
            mpmath.mpf(self.b.numerator) / self.b.denominator
        ) * mpmath.sqrt(self.d)

    def sqrt_in_field(self) -> "Quad | None":
        """Return x in Q(sqrt d) with x*x == self and x >= 0, or None."""
        if self.sign() < 0:
            return None
        if self.is_zero():
            return Quad(_ZERO, _ZERO, self.d)
        a, b, d = self.a, self.b, self.d
        if b == 0 or d == 0:
            r = _fraction_sqrt(a)
            if r is not None:
                return Quad(r, _ZERO, d)
            if d > 0:
                # a = v^2 d  =>  sqrt = v sqrt(d)
                v2 = a / d
                v = _fraction_sqrt(v2)
                if v is not None:
                    return Quad(_ZERO, v, d)
            return None
        # (u + v sqrt d)^2 = a + b sqrt d  =>  u^2 + v^2 d = a, 2uv = b.
        disc = a * a - b * b * d
        s = _fraction_sqrt(disc)
        if s is None:
            return None
        for u2 in ((a + s) / 2, (a - s) / 2):
            u = _fraction_sqrt(u2)
            if u is None or u == 0:
                continue
            v = b / (2 * u)
            cand = Quad(u, v, d)
            if cand.sign() < 0:
                cand = -cand
            if (cand * cand - self).is_zero():
                return cand
        return None

    def __repr__(self) -> str:
        if self.b == 0 or self.d == 0:
            return str(self.a)
        return f"{self.a}+{self.b}*sqrt({self.d})"


# --- exact planar vectors -------------------------------------------------

Vec = tuple  # (Quad, Quad); bare tuples keep the hot paths cheap


def v_add(u: Vec, v: Vec) -> Vec:
    return (u[0] + v[0], u[1] + v[1])


def v_sub(u: Vec, v: Vec) -> Vec:
    return (u[0] - v[0], u[1] - v[1])


def v_neg(u: Vec) -> Vec:
    return (-u[0], -u[1])


def cross(u: Vec, v: Vec) -> int:
    """Exact sign of the 2D cross product u x v."""
    return (u[0] * v[1] - u[1] * v[0]).sign()


def cross_val(u: Vec, v: Vec) -> Quad:
    return u[0] * v[1] - u[1] * v[0]


def dot_sign(u: Vec, v: Vec) -> int:
    return (u[0] * v[0] + u[1] * v[1]).sign()


def norm_sq(u: Vec) -> Quad:
    return u[0] * u[0] + u[1] * u[1]


def same_ray(u: Vec, v: Vec) -> bool:
    """True if u and v are positive multiples of each other (both nonzero)."""
    return cross(u, v) == 0 and dot_sign(u, v) > 0


def v_float(u: Vec) -> tuple:
    return (u[0].to_float(), u[1].to_float())


# --- sums of radicals -----------------------------------------------------


class RadicalSum:
    """A length value sum_i k_i * sqrt(q_i) with q_i in Q(sqrt d), k_i >= 1.

    Radicands whose square root lies in the field are folded into an exact
    field part at insertion, so the irrational tail only holds genuinely
    irrational radicals.
    """

    __slots__ = ("exact", "terms", "_float")

    def __init__(self, d: int):
        self.exact = Quad(_ZERO, _ZERO, d)
        self.terms: dict[Quad, int] = {}
        self._float: float | None = None

    def copy(self) -> "RadicalSum":
        out = RadicalSum(self.exact.d)
        out.exact = self.exact
        out.terms = dict(self.terms)
        out._float = self._float
        return out

    def add_sqrt_of(self, q: Quad, count: int = 1) -> None:
        """Add count * sqrt(q) to the sum (q the squared length)."""
        root = q.sqrt_in_field()
        if root is not None:
            self.exact = self.exact + root.scale(count)
        else:
            self.terms[q] = self.terms.get(q, 0) + count
        self._float = None

    def to_float(self) -> float:
        if self._float is None:
            total = self.exact.to_float()
            for q, k in self.terms.items():
                total += k * math.sqrt(q.to_float())
            self._float = total
        return self._float

    def _interval_cmp(self, target: Quad) -> int | None:
        """Sign of (self - target) by escalating-precision evaluation."""
        for digits in (30, 60, 120, 300):
            with mpmath.workdps(digits):
                val = self.exact.to_mpf() - target.to_mpf()
                for q, k in self.terms.items():
                    val += k * mpmath.sqrt(q.to_mpf())
                bound = mpmath.mpf(10) ** (-(digits - 6))
                if val > bound:
                    return 1
                if val < -bound:
                    return -1
        return None

    def cmp(self, target) -> int:
        """Exact sign of (self - target) for target rational or Quad."""
        if not isinstance(target, Quad):
            target = Quad.of(target, self.exact.d)
        if not self.terms:
            return (self.exact - target).sign()
        rest = target - self.exact
        if rest.sign() <= 0:
            return 1  # irrational tail is strictly positive
        sign = self._interval_cmp(target)
        if sign is not None:
            return sign
        # Potential exact equality: decide algebraically for small tails.
        items = sorted(self.terms.items(), key=lambda kv: kv[0].to_float())
        if len(items) == 1:
            (q, k), = items
            return (Quad.of(k * k, q.d) * q - rest * rest).sign()
        if len(items) == 2:
            (q1, k1), (q2, k2) = items
            # k1 sqrt(q1) + k2 sqrt(q2) = rest; isolate and square twice.
            lhs = rest * rest + q1.scale(k1 * k1) - q2.scale(k2 * k2)
            # lhs must equal 2 k1 rest sqrt(q1)
            diff = lhs * lhs - q1.scale(4 * k1 * k1) * rest * rest
            if diff.is_zero():
                return 0
            # Nonzero but numerically tiny: keep the interval verdict open.
        raise ComparisonUndecided(
            f"could not decide sign of radical sum against {target!r}"
        )

    def le(self, target) -> bool:
        return self.cmp(target) <= 0
