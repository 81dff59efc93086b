"""Threshold values and local-lemma certificates with rigorous rounding.

Every quantity involving the constant e or a square root is evaluated
through an interval enclosure that is refined until the decision at hand
(a floor, or a >= 1 certificate) is unambiguous.  Certificates use
one-sided rounding only: a True answer means the exact inequality holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, isqrt
from typing import Optional

from .errors import CertificateNotFoundError


@dataclass(frozen=True)
class RigorousReal:
    """Interval enclosure lower <= true value <= upper."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("empty enclosure")

    def width(self) -> Fraction:
        return self.upper - self.lower


def e_enclosure(terms: int) -> RigorousReal:
    """Enclose e by the partial sum of 1/i! with tail bound 2/(terms+1)!."""
    s = Fraction(0)
    for i in range(terms + 1):
        s += Fraction(1, factorial(i))
    return RigorousReal(s, s + Fraction(2, factorial(terms + 1)))


def sqrt_enclosure(n: int, bits: int) -> RigorousReal:
    """Enclose sqrt(n) to within 2^-bits; exact for perfect squares."""
    if n < 0:
        raise ValueError("negative radicand")
    r = isqrt(n)
    if r * r == n:
        return RigorousReal(Fraction(r), Fraction(r))
    scaled = isqrt(n << (2 * bits))
    return RigorousReal(Fraction(scaled, 1 << bits), Fraction(scaled + 1, 1 << bits))


def floor_quotient_by_e(q: Fraction) -> int:
    """Exact floor(q / e) for non-negative rational q.

    Refines the e enclosure until both interval ends of q/e share a floor.
    q/e is irrational for q != 0, so the loop always terminates.
    """
    if q < 0:
        raise ValueError("negative numerator")
    if q == 0:
        return 0
    terms = 24
    while True:
        e = e_enclosure(terms)
        lo, hi = q / e.upper, q / e.lower
        flo, fhi = lo.numerator // lo.denominator, hi.numerator // hi.denominator
        if flo == fhi:
            return flo
        terms *= 2


def floor_div_e(n: int) -> int:
    """Exact floor(n / e) for a non-negative integer n."""
    return floor_quotient_by_e(Fraction(n))


def lll_neighborhood_bound(k: int) -> int:
    """floor(2^k / e) - 1: neighborhood size under which every k-CNF is satisfiable."""
    return floor_div_e(1 << k) - 1


def kst_occurrence_bound(k: int) -> int:
    """floor(2^k / (e k)): occurrence bound implied by the neighborhood bound."""
    return floor_quotient_by_e(Fraction(1 << k, k))


def bks_occurrence_bound(k: int) -> int:
    """floor(2^(k+1) / (e k)) - 1: occurrence bound from the lopsided local lemma."""
    return floor_quotient_by_e(Fraction(1 << (k + 1), k)) - 1


def construction_d(k: int) -> int:
    """floor(2^(k+1)/(e k) + 100 * 2^(k+1) / k^(3/2)), exactly.

    The occurrence cap at which the doubling/splice construction is run by
    default.  Both addends are enclosed and refined together until the
    floor of the sum is pinned down.
    """
    if k < 1:
        raise ValueError("k must be positive")
    pow2 = Fraction(1 << (k + 1))
    terms, bits = 24, 32
    while True:
        e = e_enclosure(terms)
        k32 = sqrt_enclosure(k**3, bits)
        lo = pow2 / (e.upper * k) + 100 * pow2 / k32.upper
        hi = pow2 / (e.lower * k) + 100 * pow2 / k32.lower
        flo, fhi = lo.numerator // lo.denominator, hi.numerator // hi.denominator
        if flo == fhi:
            return flo
        terms *= 2
        bits *= 2


@dataclass(frozen=True)
class BoundsReport:
    """All desk-computable threshold values for one clause width."""

    k: int
    lll_l: int
    kst_f: int
    bks_f: int
    construction_d: int
    f2_exact: Optional[int] = None

    def as_dict(self) -> dict:
        out = {
            "k": self.k,
            "lll_l": self.lll_l,
            "kst_f": self.kst_f,
            "bks_f": self.bks_f,
            "construction_d": self.construction_d,
        }
        if self.f2_exact is not None:
            out["f2_exact"] = self.f2_exact
        return out


def bounds_report(k: int, f2_exact: Optional[int] = None) -> BoundsReport:
    if k < 3:
        raise ValueError("bounds are reported for k >= 3")
    return BoundsReport(
        k=k,
        lll_l=lll_neighborhood_bound(k),
        kst_f=kst_occurrence_bound(k),
        bks_f=bks_occurrence_bound(k),
        construction_d=construction_d(k),
        f2_exact=f2_exact,
    )


def _int_kth_root(n: int, k: int) -> int:
    """Largest integer r with r^k <= n."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0
    if k == 1:
        return n
    r = 1 << ((n.bit_length() - 1) // k + 1)  # r^k > n
    while True:
        nxt = ((k - 1) * r + n // r ** (k - 1)) // k
        if nxt >= r:
            break
        r = nxt
    while r**k > n:
        r -= 1
    return r


def kth_root_enclosure(x: Fraction, k: int, bits: int) -> RigorousReal:
    """Enclose x^(1/k) for rational x >= 0 to within 2^-bits."""
    if x < 0:
        raise ValueError("negative radicand")
    scaled = (x.numerator << (bits * k)) // x.denominator
    a = _int_kth_root(scaled, k)
    return RigorousReal(Fraction(a, 1 << bits), Fraction(a + 1, 1 << bits))


def _pow_mantissa(base: int, exponent: int, bits: int, round_up: bool) -> int:
    """base^exponent on 2^-bits mantissas of values in [0,1], directed rounding.

    With round_up=False every multiplication floors, so the result is a
    lower bound of the true power; with round_up=True it ceils, giving an
    upper bound.  Mantissas never exceed 2^bits, so this stays cheap even
    for exponents in the millions.
    """
    one = 1 << bits
    bump = one - 1 if round_up else 0
    result = one
    b = base
    e = exponent
    while e:
        if e & 1:
            result = (result * b + bump) >> bits
        e >>= 1
        if e:
            b = (b * b + bump) >> bits
    return result


def bks_certificate_check(k: int, d: int, x: Fraction, max_bits: int = 4096) -> bool:
    """Certify x^(1/k) * ((1-x)^ceil(d/2) + (1-x)^floor(d/2)) >= 1.

    True only when a rigorous lower bound of the left-hand side reaches 1:
    the k-th root and both powers are evaluated with one-sided rounding
    (floors on the certifying path, ceilings on the refuting path).
    False means "not certified at this precision", never "disproved" --
    though when the rigorous upper bound drops below 1 the inequality
    genuinely fails.
    """
    if not 0 < x < 1:
        raise ValueError("certificate point must lie in (0,1)")
    if d < 0 or k < 1:
        raise ValueError("need d >= 0 and k >= 1")
    num, den = x.numerator, x.denominator
    e_hi, e_lo = (d + 1) // 2, d // 2
    bits = 64
    while bits <= max_bits:
        one = 1 << bits
        base_lo = ((den - num) << bits) // den
        base_hi = -((-(den - num) << bits) // den)
        scaled = (num << (bits * k)) // den
        root_lo = _int_kth_root(scaled, k)
        root_hi = root_lo + 1
        sum_lo = _pow_mantissa(base_lo, e_hi, bits, False) + _pow_mantissa(
            base_lo, e_lo, bits, False
        )
        sum_hi = _pow_mantissa(base_hi, e_hi, bits, True) + _pow_mantissa(
            base_hi, e_lo, bits, True
        )
        if (root_lo * sum_lo) >> bits >= one:
            return True
        if -((-root_hi * sum_hi) >> bits) < one:  # ceil of the upper product
            return False
        bits *= 2
    return False


@dataclass(frozen=True)
class CertifiedLowerBound:
    k: int
    d: int
    x: Fraction


def certify_f_lower(k: int) -> CertifiedLowerBound:
    """Certify the lopsided-lemma occurrence bound at width k.

    Tries rational approximations of e/2^k of increasing accuracy, then a
    grid of 2^10 points, and returns the first certified point.
    """
    if k < 5:
        raise ValueError("certificate is vacuous below k = 5 (bound would be <= 0)")
    d = bks_occurrence_bound(k)
    candidates = []
    for terms in (30, 60, 120):
        e = e_enclosure(terms)
        mid = (e.lower + e.upper) / 2
        candidates.append(mid / (1 << k))
    grid = 1 << 10
    candidates.extend(Fraction(i, grid + 1) for i in range(1, grid + 1))
    for x in candidates:
        if 0 < x < 1 and bks_certificate_check(k, d, x):
            return CertifiedLowerBound(k, d, x)
    raise CertificateNotFoundError(f"no certificate found for k={k}, d={d}")
