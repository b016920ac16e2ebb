"""Exact lattice counting in Cygan-Koranyi balls and shells.

A point (a, b, c) lies in the dilated unit ball of radius x exactly when
(a^2 + b^2)^2 + c^2 <= x^4.  Radii are rationals k/Q so every comparison
clears denominators and stays in integer arithmetic; the fast counter
reduces the third coordinate to an exact floor square root per slice
m = a^2 + b^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import R2Table, isqrt

__all__ = [
    "BALL_VOLUME",
    "RadiusPoint",
    "ShellSample",
    "ball_volume",
    "count_ball_brute",
    "count_ball_fast",
    "sawtooth_ball_sum",
    "sawtooth_shell_sum",
    "shell_sample",
    "snap_outer_radius",
]

# Euclidean volume of the unit Cygan-Koranyi ball: 4*pi*int_0^1 r*sqrt(1-r^4) dr.
BALL_VOLUME = math.pi * math.pi / 2.0

# x + omega(x) is re-snapped on a denominator refined by this power of two.
OUTER_REFINE_SHIFT = 6

# k*k must stay <= 2^52 so the float-assisted floor sqrt is provably exact
# outside the fixup band.
_MAX_K = 1 << 26

_BRUTE_RADIUS_CAP = 60.0

_KERNEL_CHUNK = 1 << 21

# Half-width of the near-integer band that gets re-checked in exact integer
# arithmetic.  Float error of the scaled sqrt is < 2^-46 * x^2, several orders
# below this for any admissible radius.
_BAND = 1e-6


def ball_volume() -> float:
    """Volume of the unit ball, pi^2/2 = 4.9348..."""
    return BALL_VOLUME


@dataclass(frozen=True)
class RadiusPoint:
    """A radius k/Q held exactly as a pair of integers."""

    k: int
    Q: int

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError("denominator must be >= 1")
        if self.k < 1:
            raise ValueError("radius must be positive")
        if self.k > _MAX_K:
            raise OverflowError(
                f"radius numerator {self.k} exceeds the exactness cap {_MAX_K}")

    @classmethod
    def from_value(cls, x: float, Q: int) -> "RadiusPoint":
        """Snap x to the nearest multiple of 1/Q."""
        return cls(k=round(x * Q), Q=Q)

    @property
    def value(self) -> float:
        return self.k / self.Q

    @property
    def floor_sq(self) -> int:
        """floor(x^2), exactly."""
        return (self.k * self.k) // (self.Q * self.Q)

    def refined(self, shift: int = OUTER_REFINE_SHIFT) -> "RadiusPoint":
        """The same radius on the denominator Q * 2**shift."""
        return RadiusPoint(k=self.k << shift, Q=self.Q << shift)


def count_ball_brute(x: RadiusPoint) -> int:
    """Count lattice points by direct enumeration over (a, b) with an exact
    integer comparison for the third coordinate.

    Independent of the r2 sieve; cost O(x^4), capped at x <= 60.
    """
    if x.value > _BRUTE_RADIUS_CAP:
        raise ValueError(f"brute-force counting is capped at x <= {_BRUTE_RADIUS_CAP}")
    k, Q = x.k, x.Q
    k2 = k * k
    k4 = k2 * k2
    Q2 = Q * Q
    Q4 = Q2 * Q2
    total = 0
    amax = isqrt(k2) // Q
    for a in range(amax + 1):
        rem = k2 - a * a * Q2
        if rem < 0:
            break
        wa = 2 if a > 0 else 1
        bmax = isqrt(rem) // Q
        for b in range(bmax + 1):
            m = a * a + b * b
            v = k4 - m * m * Q4
            if v < 0:
                continue
            c_count = 2 * (isqrt(v) // Q2) + 1
            total += wa * (2 if b > 0 else 1) * c_count
    return total


def _check_table(x: RadiusPoint, r2: R2Table) -> int:
    mmax = x.floor_sq
    if mmax > r2.limit:
        raise ValueError(f"r2 table limit {r2.limit} < floor(x^2) = {mmax}")
    return mmax


def count_ball_fast(x: RadiusPoint, r2: R2Table) -> int:
    """Exact ball count N(x) = sum_{m <= x^2} r2(m) * (2*floor(sqrt(x^4 - m^2)) + 1).

    The inner floor is computed as isqrt(k^4 - m^2 Q^4) // Q^2 via a float
    sqrt of the exact int64 factorisation (k^2 - mQ^2)(k^2 + mQ^2); entries
    landing in the near-integer band are re-done in exact big-int arithmetic.
    Agrees with count_ball_brute everywhere both run.
    """
    mmax = _check_table(x, r2)
    k2 = x.k * x.k
    Q2 = x.Q * x.Q
    k4 = k2 * k2
    Q4 = Q2 * Q2
    inv_q2 = 1.0 / Q2
    n = r2.nonzero_count_upto(mmax)
    mnz = r2.nonzero_m
    vnz = r2.nonzero_values
    total = int(r2.nonzero_prefix[n])  # the "+1" of every slice
    for lo in range(0, n, _KERNEL_CHUNK):
        hi = min(n, lo + _KERNEL_CHUNK)
        w = mnz[lo:hi] * Q2
        a = (k2 - w).astype(np.float64)
        b = (k2 + w).astype(np.float64)
        s = np.sqrt(a * b) * inv_q2
        t = np.floor(s).astype(np.int64)
        band = np.abs(s - np.rint(s)) < _BAND
        if band.any():
            for i in np.nonzero(band)[0]:
                m = int(mnz[lo + i])
                t[i] = isqrt(k4 - m * m * Q4) // Q2
        total += 2 * int(np.dot(vnz[lo:hi], t))
    return total


def sawtooth_ball_sum(x: RadiusPoint, r2: R2Table) -> float:
    """sum_{1 <= m <= x^2} r2(m) * psi(sqrt(x^4 - m^2)) with psi(t) = t - [t] - 1/2.

    psi evaluates to -1/2 at exact integer arguments (the literal formula).
    The m = 0 slice is excluded: the series convention starts at m = 1.
    """
    mmax = _check_table(x, r2)
    k2 = x.k * x.k
    Q2 = x.Q * x.Q
    k4 = k2 * k2
    Q4 = Q2 * Q2
    inv_q2 = 1.0 / Q2
    n = r2.nonzero_count_upto(mmax)
    mnz = r2.nonzero_m
    vnz = r2.nonzero_values
    total = 0.0
    for lo in range(0, n, _KERNEL_CHUNK):
        hi = min(n, lo + _KERNEL_CHUNK)
        w = mnz[lo:hi] * Q2
        a = (k2 - w).astype(np.float64)
        b = (k2 + w).astype(np.float64)
        s = np.sqrt(a * b) * inv_q2
        frac = s - np.floor(s)
        psi = frac - 0.5
        vals = vnz[lo:hi].astype(np.float64)
        if lo == 0 and mnz[0] == 0:
            psi[0] = 0.0  # mask the m = 0 slice out of the series
        total += math.fsum(vals * psi)
        band = np.minimum(frac, 1.0 - frac) < _BAND
        if lo == 0 and mnz[0] == 0:
            band[0] = False
        if band.any():
            for i in np.nonzero(band)[0]:
                m = int(mnz[lo + i])
                exact = _psi_exact(k4 - m * m * Q4, Q2)
                total += float(vnz[lo + i]) * (exact - psi[i])
    return total


def _psi_exact(v: int, q2: int) -> float:
    """psi(sqrt(v)/q2) decided with exact integer parts (v, q2 big ints)."""
    tb = isqrt(v)
    if tb * tb == v and tb % q2 == 0:
        return -0.5
    # Two Newton refinements of sqrt(v) seeded at tb; the integer part tb//q2
    # is exact, only the residual fraction is approximated.
    s1 = tb + (v - tb * tb) / (2.0 * tb)
    s1 = 0.5 * (s1 + v / s1)
    frac = ((tb % q2) + (s1 - tb)) / q2
    return frac - 0.5


def snap_outer_radius(x: RadiusPoint, gap: float) -> RadiusPoint:
    """Round x + gap to the nearest multiple of 1/(Q * 2**OUTER_REFINE_SHIFT).

    gap = 0 is allowed (degenerate empty shell, used by cancellation tests);
    negative gaps are a domain error.
    """
    if gap < 0:
        raise ValueError("gap width must be nonnegative")
    inner = x.refined()
    if gap == 0:
        return inner
    ko = round((x.value + gap) * inner.Q)
    if ko <= inner.k:
        raise ValueError(f"gap {gap} rounds to an empty shell at x = {x.value}")
    return RadiusPoint(k=ko, Q=inner.Q)


@dataclass(frozen=True)
class ShellSample:
    """One exact shell measurement at inner radius x and snapped gap omega_x."""

    x: float
    omega_x: float
    n_inner: int
    n_outer: int
    shell_count: int
    error: float
    normalized: float


def _shell_volume(x: float, gap: float) -> float:
    return BALL_VOLUME * sum(math.comb(4, j) * x ** (4 - j) * gap ** j
                             for j in (1, 2, 3, 4))


def shell_sample(x: RadiusPoint, omega, r2: R2Table) -> ShellSample:
    """Exact shell count and error term at inner radius x.

    The outer radius x + omega(x) is snapped onto the refined grid; the same
    snapped gap is used in the volume subtraction, so the reported error is
    an exact algebraic identity in the realised radii.
    """
    gap = float(omega.value(x.value))
    if not gap > 0:
        raise ValueError(f"omega(x) = {gap} must be positive at x = {x.value}")
    outer = snap_outer_radius(x, gap)
    snapped_gap = (outer.k - (x.k << OUTER_REFINE_SHIFT)) / outer.Q
    n_inner = count_ball_fast(x, r2)
    n_outer = count_ball_fast(outer, r2)
    shell = n_outer - n_inner
    err = shell - _shell_volume(x.value, snapped_gap)
    return ShellSample(
        x=x.value,
        omega_x=snapped_gap,
        n_inner=n_inner,
        n_outer=n_outer,
        shell_count=shell,
        error=err,
        normalized=err / (x.value * x.value),
    )


def sawtooth_shell_sum(x: RadiusPoint, omega, r2: R2Table) -> float:
    """The exact sawtooth correction of the shell at inner radius x,

    sum_{m <= (x+w)^2} r2(m) psi(sqrt((x+w)^4 - m^2))
      - sum_{m <= x^2} r2(m) psi(sqrt(x^4 - m^2)),

    with the outer radius snapped exactly as in shell_sample.
    """
    gap = float(omega.value(x.value))
    outer = snap_outer_radius(x, gap)
    return sawtooth_ball_sum(outer, r2) - sawtooth_ball_sum(x, r2)
