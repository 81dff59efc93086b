"""Exact arithmetic on leaf-count cap vectors.

A cap vector for clause width k and occurrence cap d is a (k+1)-tuple of
non-negative integers whose entry j bounds the number of tree leaves at
distance exactly j from the root.  Weights are dyadic sums sum(x_j / 2^j)
and are handled exclusively as big integers scaled by 2^k, so every
comparison in the package is exact regardless of how large k gets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import WeightDeficientError

# Scaled weight: weight(x) * 2^k as an exact big integer.
ScaledWeight = int


@dataclass(frozen=True)
class KdVector:
    """Immutable leaf-count cap vector: entries[j] caps leaves at distance j."""

    k: int
    d: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise ValueError(f"k and d must be positive, got k={self.k}, d={self.d}")
        if len(self.entries) != self.k + 1:
            raise ValueError(
                f"need {self.k + 1} entries for k={self.k}, got {len(self.entries)}"
            )
        if any(e < 0 for e in self.entries):
            raise ValueError("entries must be non-negative")
        if sum(self.entries) > self.d:
            raise ValueError(
                f"entry sum {sum(self.entries)} exceeds occurrence cap d={self.d}"
            )

    @staticmethod
    def zero(k: int, d: int) -> "KdVector":
        return KdVector(k, d, (0,) * (k + 1))

    def total(self) -> int:
        """|x|: the number of capped leaf slots."""
        return sum(self.entries)

    def replace_entries(self, entries) -> "KdVector":
        return KdVector(self.k, self.d, tuple(entries))

    def dominates(self, other: "KdVector") -> bool:
        return all(a >= b for a, b in zip(self.entries, other.entries))


@dataclass(frozen=True)
class OpParams:
    """Splice-depth parameters shared by the E / C_r / C*_r operators.

    d_damped is d(1 - 1/(2^l - 1)): the reduced cap fed back into freshly
    created deep entries so that a spliced root never exceeds d leaves in
    its window.  gain is 1 + 1/(2^l - 1), the factor an entry picks up when
    a splice shifts it l places for the price of dividing by 2^l - 1.
    """

    k: int
    d: int
    l: int

    def __post_init__(self):
        if self.l < 2:
            raise ValueError(f"splice depth l must be >= 2, got {self.l}")
        if self.l > self.k:
            raise ValueError(f"splice depth l={self.l} exceeds k={self.k}")
        # d_damped = num/den, precomputed: the operators floor-divide by it
        # in every step, so keep it as plain integers
        object.__setattr__(self, "_damped_num", self.d * (2**self.l - 2))
        object.__setattr__(self, "_damped_den", 2**self.l - 1)

    @property
    def s(self) -> int:
        """Dead-prefix length: entries 0..s stay zero through the recursion."""
        return 2 * self.l

    @property
    def d_damped(self) -> Fraction:
        return Fraction(self._damped_num, self._damped_den)

    @property
    def gain(self) -> Fraction:
        return 1 + Fraction(1, 2**self.l - 1)

    def damped_floor(self, i: int) -> int:
        """floor(d_damped / 2^i), exactly."""
        return self._damped_num // (self._damped_den << i)


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


def weight_scaled(x: KdVector) -> ScaledWeight:
    """weight(x) * 2^k = sum(x_j * 2^(k-j)), exactly."""
    w = 0
    for e in x.entries:
        w = (w << 1) + e
    return w


def prefix_weight_scaled(x: KdVector, r: int) -> ScaledWeight:
    """Scaled weight of the prefix x_0..x_r."""
    if not 0 <= r <= x.k:
        raise IndexError(f"prefix end {r} out of range 0..{x.k}")
    w = 0
    for e in x.entries[: r + 1]:
        w = (w << 1) + e
    return w << (x.k - r)


def op_E(x: KdVector, p: OpParams) -> KdVector:
    """Halving left shift: (floor(x_1/2), ..., floor(x_k/2), floor(d_damped/2)).

    Inverts one doubling step: a tree realizing E(x) yields a tree
    realizing x by joining two copies under a fresh root.
    """
    assert x.k == p.k and x.d == p.d
    out = [e >> 1 for e in x.entries[1:]]
    out.append(p.damped_floor(1))
    return x.replace_entries(out)


def op_E_iter(x: KdVector, m: int, p: OpParams) -> KdVector:
    """m-fold application of op_E, computed in one pass.

    Floor division collapses (floor(floor(a/2)/2) = floor(a/4)), so
    E^m(x)_j = floor(x_(j+m) / 2^m) with the tail refilled from d_damped.
    """
    assert x.k == p.k and x.d == p.d
    if m == 0:
        return x
    if m > x.k:
        # nothing of x survives k+1 shifts; the refill pattern is a fixed point
        out = [p.damped_floor(x.k + 1 - j) for j in range(x.k + 1)]
    else:
        out = [e >> m for e in x.entries[m:]]
        out.extend(p.damped_floor(i) for i in range(m, 0, -1))
    return x.replace_entries(out)


def op_C(x: KdVector, r: int, p: OpParams) -> KdVector:
    """Splice quotient: the cap vector handed to the 2^l - 1 main copies."""
    assert x.k == p.k and x.d == p.d
    if not p.l <= r <= x.k:
        raise IndexError(f"splice index {r} out of range {p.l}..{x.k}")
    div = 2**p.l - 1
    out = [0] * (r + 1 - p.l)
    out.extend(x.entries[j] // div for j in range(r + 1, x.k + 1))
    out.extend(p.damped_floor(i) for i in range(p.l, 0, -1))
    return x.replace_entries(out)


def op_C_star(x: KdVector, r: int, p: OpParams) -> KdVector:
    """Splice remainder: entries l..r shifted to the front, zero-padded."""
    assert x.k == p.k and x.d == p.d
    if not p.l <= r <= x.k:
        raise IndexError(f"splice index {r} out of range {p.l}..{x.k}")
    out = x.entries[p.l : r + 1] + (0,) * (x.k - r + p.l)
    return x.replace_entries(out)


def trim_to_weight_one(x: KdVector) -> KdVector:
    """Largest-denominations-first trim to weight exactly one.

    Scans j = 0..k taking min(x_j, remaining // 2^(k-j)) units at depth j.
    Whenever fewer than x_j units are taken the remainder is a multiple of
    2^(k-j) below 2^(k-j), hence zero, so the scan always lands on weight
    exactly one when weight(x) >= 1.
    """
    target = 1 << x.k
    if weight_scaled(x) < target:
        raise WeightDeficientError(
            f"weight below one: scaled {weight_scaled(x)} < 2^{x.k}"
        )
    remaining = target
    out = []
    for j, e in enumerate(x.entries):
        unit = 1 << (x.k - j)
        take = min(e, remaining // unit)
        out.append(take)
        remaining -= take * unit
    assert remaining == 0
    return x.replace_entries(out)


def closed_form_entry(j: int, c: int, p: OpParams) -> int:
    """floor((d_damped / 2^(k+1-j)) * gain^c), exactly.

    Entry j of any vector in the doubling/splice recursion, where c counts
    the splice gain factors the entry has accumulated since entering at
    the deep end.
    """
    if not p.s < j <= p.k:
        raise IndexError(f"entry index {j} out of range {p.s + 1}..{p.k}")
    if c < 0:
        raise ValueError("accumulated gain count must be non-negative")
    return _floor(p.d_damped * p.gain**c / 2 ** (p.k + 1 - j))
