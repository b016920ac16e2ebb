"""The trigonometric expansion of the normalized shell error and its
diagonal structure.

The main series runs over r2(m)/m with the paired sine factors; the exact
sawtooth correction comes from counting.  Zero relations among square roots
are decided exactly through square-free core grouping, and the diagonal sums
enumerate only zero-relation tuples via per-core generating polynomials.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .arith import R2Table, spf_sieve, squarefree_core
from .counting import (OUTER_REFINE_SHIFT, RadiusPoint, sawtooth_shell_sum,
                       snap_outer_radius)
from .gapwidth import GapWidth

__all__ = [
    "main_series",
    "series_with_gap",
    "expansion_rhs",
    "sum_sqrt_is_zero",
    "diagonal_sum",
    "diagonal_sum_direct_j2",
    "grouped_pair_sum_j2",
    "r2_squared_partial_sum_check",
]

SERIES_PREFACTOR = 2.0 ** 1.5 / math.pi


def series_with_gap(x: float, gap: float, r2: R2Table, cutoff: int,
                    phase_gap: float | None = None) -> float:
    """sum over 1 <= m <= cutoff of (2^{3/2}/pi) r2(m)/m sin(pi sqrt(m) gap)
    sin(pi sqrt(m) (2x + phase_gap)), compensated summation.

    phase_gap defaults to gap; the two roles are separate because the first
    factor is odd in the gap while the second only shifts phases.
    """
    if cutoff > r2.limit:
        raise ValueError(f"cutoff {cutoff} exceeds the r2 table limit {r2.limit}")
    if phase_gap is None:
        phase_gap = gap
    n = r2.nonzero_count_upto(cutoff)
    lo = 1 if n > 0 and r2.nonzero_m[0] == 0 else 0
    if n <= lo:
        return 0.0
    m = r2.nonzero_m[lo:n]
    amp = r2.nonzero_values[lo:n] / m.astype(np.float64)
    s = r2.nonzero_sqrt[lo:n]
    terms = amp * np.sin(math.pi * s * gap) * np.sin(math.pi * s * (2.0 * x + phase_gap))
    return SERIES_PREFACTOR * math.fsum(terms)


def main_series(x: float, X: float, omega: GapWidth, r2: R2Table, cutoff: int) -> float:
    """The truncated main series at gap width omega(x)."""
    if not X < x < 2 * X:
        raise ValueError(f"x = {x} outside the dyadic window ({X}, {2 * X})")
    return series_with_gap(x, float(omega.value(x)), r2, cutoff)


def expansion_rhs(x: RadiusPoint, X: float, omega: GapWidth, r2: R2Table) -> float:
    """Main series at cutoff floor(X^2) minus the exact sawtooth correction.

    The gap width is the same snapped value the exact shell count realises,
    so the residual against shell_sample(...).normalized probes only the
    expansion remainder.
    """
    if not X < x.value < 2 * X:
        raise ValueError(f"x = {x.value} outside the dyadic window ({X}, {2 * X})")
    gap = float(omega.value(x.value))
    outer = snap_outer_radius(x, gap)
    snapped_gap = (outer.k - (x.k << OUTER_REFINE_SHIFT)) / outer.Q
    series = series_with_gap(x.value, snapped_gap, r2, int(X * X))
    xi = sawtooth_shell_sum(x, omega, r2)
    return series - 2.0 / (x.value * x.value) * xi


def sum_sqrt_is_zero(signs: Sequence[int], ms: Sequence[int],
                     spf: np.ndarray | None = None) -> bool:
    """Exact decision of sum_i e_i sqrt(m_i) = 0.

    Write m_i = core_i * k_i^2; square roots of distinct square-free cores are
    linearly independent over Q, so the relation holds exactly when every
    core's signed k-sum vanishes.
    """
    if len(signs) != len(ms):
        raise ValueError("signs and ms must have equal length")
    groups: dict[int, int] = {}
    for e, m in zip(signs, ms):
        if m < 1:
            raise ValueError("ms must be positive")
        if e not in (-1, 1):
            raise ValueError("signs must be +-1")
        dec = squarefree_core(m, spf)
        groups[dec.core] = groups.get(dec.core, 0) + e * dec.k
    return all(v == 0 for v in groups.values())


def r2_squared_partial_sum_check(y: int, r2: R2Table) -> float:
    """sum_{n <= y} r2(n)^2 / (4 y log y), a trend diagnostic toward 1."""
    if y < 2:
        raise ValueError("y must be >= 2")
    if y > r2.limit:
        raise ValueError(f"y = {y} exceeds the r2 table limit {r2.limit}")
    n = r2.nonzero_count_upto(y)
    lo = 1 if n > 0 and r2.nonzero_m[0] == 0 else 0
    v = r2.nonzero_values[lo:n]
    total = int(np.dot(v, v))
    return total / (4.0 * y * math.log(y))


# ---------------------------------------------------------------------------
# Diagonal sums over exact zero relations
# ---------------------------------------------------------------------------

def _midpoint_grid(X: float, samples: int) -> np.ndarray:
    return X * (1.0 + (np.arange(samples) + 0.5) / samples)


def _cores_upto(Y: int, r2: R2Table):
    """Group m <= Y by square-free core: core -> (k array, weight rows r2(c k^2)/(c k^2))."""
    spf = spf_sieve(Y)
    cores: dict[int, list[tuple[int, float]]] = {}
    n = r2.nonzero_count_upto(Y)
    start = 1 if n > 0 and r2.nonzero_m[0] == 0 else 0
    for i in range(start, n):
        m = int(r2.nonzero_m[i])
        dec = squarefree_core(m, spf)
        cores.setdefault(dec.core, []).append((dec.k, float(r2.nonzero_values[i]) / m))
    return cores


def diagonal_sum_direct_j2(omega: GapWidth, X: float, Y: int, r2: R2Table,
                           samples: int = 1024) -> float:
    """Grid average of -2 sum_{n <= Y} (r2(n)/n)^2 sin^2(pi sqrt(n) omega(x)),

    the plain-sum form of the j = 2 diagonal (before the sign-weighted
    prefactor)."""
    xs = _midpoint_grid(X, samples)
    om = np.asarray(omega.value(xs), dtype=np.float64)
    n = r2.nonzero_count_upto(Y)
    lo = 1 if n > 0 and r2.nonzero_m[0] == 0 else 0
    acc = np.zeros(samples)
    for i in range(lo, n):
        m = int(r2.nonzero_m[i])
        w = float(r2.nonzero_values[i]) / m
        acc += (w * np.sin(math.pi * math.sqrt(m) * om)) ** 2
    return float(np.mean(-2.0 * acc))


def grouped_pair_sum_j2(omega: GapWidth, X: float, Y: int, r2: R2Table,
                        samples: int = 1024) -> float:
    """The same j = 2 diagonal computed through the square-free regrouping:
    for each square-free core enumerate signed pairs (e1 k1, e2 k2) with
    e1 k1 + e2 k2 = 0, literally."""
    xs = _midpoint_grid(X, samples)
    om = np.asarray(omega.value(xs), dtype=np.float64)
    cores = _cores_upto(Y, r2)
    acc = np.zeros(samples)
    for core, rows in cores.items():
        sq = math.sqrt(core)
        for k1, w1 in rows:
            s1 = w1 * np.sin(math.pi * sq * k1 * om)
            for k2, w2 in rows:
                s2 = w2 * np.sin(math.pi * sq * k2 * om)
                for e1 in (1, -1):
                    for e2 in (1, -1):
                        if e1 * k1 + e2 * k2 == 0:
                            acc += (e1 * e2) * s1 * s2
    return float(np.mean(acc))


def diagonal_sum(omega: GapWidth, X: float, j: int, Y: int, r2: R2Table,
                 samples: int = 1024) -> float:
    """(-1)^{j/2} (sqrt(2)/pi)^j times the sign-weighted grid average of the
    zero-relation tuple sums at truncation Y, for j in {2, 4}.

    Per core c the signed single-position weights form the Laurent polynomial
    g_c(z) = sum_k w_{c,k}(x) (z^k - z^{-k}); a j-tuple satisfies the relation
    exactly when every core's exponent sum is zero, so the total is assembled
    from constant terms of powers of the g_c via the multinomial split
    j = sum_c j_c (odd j_c drop out by antisymmetry).
    """
    if j not in (2, 4):
        raise ValueError("diagonal sums implemented for j in {2, 4}")
    if Y > 400:
        raise ValueError("Y capped at 400 (tuple enumeration feasibility)")
    if Y > r2.limit:
        raise ValueError(f"Y = {Y} exceeds the r2 table limit {r2.limit}")
    xs = _midpoint_grid(X, samples)
    om = np.asarray(omega.value(xs), dtype=np.float64)
    cores = _cores_upto(Y, r2)

    p2 = np.zeros(samples)   # sum_c [z^0] g_c^2
    p4 = np.zeros(samples)   # sum_c [z^0] g_c^4
    s22 = np.zeros(samples)  # sum_c ([z^0] g_c^2)^2
    for core, rows in cores.items():
        sq = math.sqrt(core)
        ks = np.array([k for k, _ in rows])
        ws = np.array([w for _, w in rows])
        # w_{c,k}(x) for all samples at once: rows index k, columns samples
        sins = np.sin(math.pi * sq * np.multiply.outer(ks.astype(float), om))
        wk = ws[:, None] * sins
        c2 = -2.0 * np.sum(wk * wk, axis=0)
        p2 += c2
        s22 += c2 * c2
        if j == 4:
            kmax = int(ks.max())
            # [z^0] g^4 via the full coefficient array of g (exponents -K..K)
            coeff = np.zeros((2 * kmax + 1, samples))
            for k, w_row in zip(ks, wk):
                coeff[kmax + k] += w_row
                coeff[kmax - k] -= w_row
            sq2 = _self_convolve_mid(coeff)
            p4 += sq2
    if j == 2:
        tuple_sum = p2
    else:
        # multinomial split: one core takes all four, or two cores take 2 + 2
        tuple_sum = p4 + 3.0 * (p2 * p2 - s22)
    sign = -1.0 if (j // 2) % 2 else 1.0
    return sign * (math.sqrt(2.0) / math.pi) ** j * float(np.mean(tuple_sum))


def _self_convolve_mid(coeff: np.ndarray) -> np.ndarray:
    """[z^0] of (sum_e coeff[e] z^(e-K))^4 for every sample column.

    Convolves the exponent axis with itself twice and reads the central
    coefficient; the array is small (K <= 20) so the direct loop is fine.
    """
    n, samples = coeff.shape
    sq = np.zeros((2 * n - 1, samples))
    for i in range(n):
        row = coeff[i]
        if not row.any():
            continue
        sq[i:i + n] += row * coeff
    centre = np.zeros(samples)
    # [z^0] of the square of the squared polynomial: pair exponents e, -e
    for i in range(2 * n - 1):
        centre += sq[i] * sq[2 * n - 2 - i]
    return centre
