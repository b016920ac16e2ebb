"""Exact Fourier algebra for squared trigonometric polynomials.

phi(t) = |p(e^{2 pi i t})|^2 expands as a Laurent polynomial in e^{2 pi i t}
whose coefficients are the autocorrelation of p's coefficients.  Everything
here (moments, constrained frequency sums, limit ratios) is computed in exact
rational arithmetic; floats only appear when evaluating densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "TrigPolyModulus",
    "DensitySpec",
    "phi_from_poly",
    "phi_moment",
    "construction_moment",
    "constrained_frequency_sum",
    "l_j",
    "gauss_moment",
    "predicted_moment",
    "density_eval",
    "density_moment",
    "mixture_components",
]

_COEFF_SPAN_CAP = 10_000
_SURROGATE_GRID = 4096
_NONNEG_FLOOR = -1e-9

# Exact complex numbers as (re, im) Fraction pairs.
_Cx = tuple[Fraction, Fraction]


def _cx(value) -> _Cx:
    """Coerce an int/float/complex/pair into an exact (re, im) pair.

    Floats convert exactly (binary fractions), so integer and dyadic inputs
    stay exact end to end.
    """
    if isinstance(value, tuple):
        return Fraction(value[0]), Fraction(value[1])
    if isinstance(value, complex):
        return Fraction(value.real), Fraction(value.imag)
    return Fraction(value), Fraction(0)


def _cmul(a: _Cx, b: _Cx) -> _Cx:
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _cadd(a: _Cx, b: _Cx) -> _Cx:
    return a[0] + b[0], a[1] + b[1]


def _conj(a: _Cx) -> _Cx:
    return a[0], -a[1]


_CZERO: _Cx = (Fraction(0), Fraction(0))


@dataclass(frozen=True)
class TrigPolyModulus:
    """phi(t) = sum_{|m| <= degree} coeffs[m] e^{2 pi i m t}, a real nonnegative
    trigonometric polynomial arising as |p|^2 on the unit circle.

    `coeffs` maps m in [-degree, degree] to exact complex pairs via the offset
    `degree` (index m + degree).
    """

    degree: int
    coeffs: tuple  # tuple[_Cx, ...], length 2*degree + 1

    def coeff(self, m: int) -> _Cx:
        if abs(m) > self.degree:
            return _CZERO
        return self.coeffs[m + self.degree]

    @property
    def mean(self) -> Fraction:
        """a_0 = integral of phi over one period."""
        return self.coeff(0)[0]

    def values(self, t: np.ndarray) -> np.ndarray:
        """Evaluate phi on a float grid (real part; imaginary is zero by symmetry)."""
        acc = np.zeros_like(t, dtype=np.complex128)
        for m in range(-self.degree, self.degree + 1):
            c = self.coeff(m)
            acc += complex(float(c[0]), float(c[1])) * np.exp(2j * math.pi * m * t)
        return acc.real


def phi_from_poly(coeffs: Sequence) -> TrigPolyModulus:
    """Autocorrelation a_m = sum_k c_{k+m} conj(c_k) of the polynomial coefficients."""
    cs = [_cx(c) for c in coeffs]
    if all(c == _CZERO for c in cs):
        raise ValueError("polynomial must have a nonzero coefficient")
    d = len(cs) - 1
    out = []
    for m in range(-d, d + 1):
        acc = _CZERO
        for k in range(len(cs)):
            if 0 <= k + m < len(cs):
                acc = _cadd(acc, _cmul(cs[k + m], _conj(cs[k])))
        out.append(acc)
    phi = TrigPolyModulus(degree=d, coeffs=tuple(out))
    _validate_phi(phi)
    return phi


def _validate_phi(phi: TrigPolyModulus) -> None:
    for m in range(0, phi.degree + 1):
        if phi.coeff(-m) != _conj(phi.coeff(m)):
            raise ValueError("coefficients break the reality symmetry")
    if not phi.mean > 0:
        raise ValueError("phi must have positive mean")
    t = (np.arange(_SURROGATE_GRID) + 0.5) / _SURROGATE_GRID
    if float(phi.values(t).min()) < _NONNEG_FLOOR:
        raise ValueError("phi is negative on the reference grid")


def _convolve(a: list, b: list) -> list:
    out = [_CZERO] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == _CZERO:
            continue
        for j, bj in enumerate(b):
            if bj == _CZERO:
                continue
            out[i + j] = _cadd(out[i + j], _cmul(ai, bj))
    return out


def phi_moment(phi: TrigPolyModulus, j: int) -> Fraction:
    """Exact integral of phi(t)^j over one period: the constant coefficient of
    the j-fold self-convolution of the coefficient array."""
    if j < 0:
        raise ValueError("moment order must be >= 0")
    if j == 0:
        return Fraction(1)
    if j * phi.degree > _COEFF_SPAN_CAP:
        raise ValueError("coefficient span too large")
    base = list(phi.coeffs)
    acc = base
    for _ in range(j - 1):
        acc = _convolve(acc, base)
    centre = acc[(len(acc) - 1) // 2]
    if centre[1] != 0:
        raise AssertionError("moment has a nonzero imaginary part")
    return centre[0]


@dataclass(frozen=True)
class DensitySpec:
    """A product or sum construction over independent torus coordinates, with
    the quadrature controls for its limiting Gaussian-mixture density."""

    mode: str                         # "product" | "sum"
    phis: tuple                       # tuple[TrigPolyModulus, ...]
    quad_points: int = 64
    independent: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("product", "sum"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 1 <= len(self.phis) <= 4:
            raise ValueError("1 to 4 factors supported (tensor quadrature)")
        if self.quad_points < 16:
            raise ValueError("quad_points must be >= 16")


def construction_moment(spec: DensitySpec, j: int) -> Fraction:
    """Exact j-th moment of the construction over the torus.

    Product mode: prod_l int phi_l^j.  Sum mode: the multinomial expansion of
    E[(X_1 + ... + X_n)^j] with independent coordinates.
    """
    if j < 0:
        raise ValueError("moment order must be >= 0")
    if spec.mode == "product":
        out = Fraction(1)
        for phi in spec.phis:
            out *= phi_moment(phi, j)
        return out
    moments = [[phi_moment(phi, k) for k in range(j + 1)] for phi in spec.phis]
    total = Fraction(0)
    for comp in _compositions(j, len(spec.phis)):
        term = Fraction(math.factorial(j))
        for jl, phi_moms in zip(comp, moments):
            term = term / math.factorial(jl) * phi_moms[jl]
        total += term
    return total


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def constrained_frequency_sum(spec: DensitySpec, j: int) -> Fraction:
    """Sum of prod_i a_{f_i} over j-tuples of frequency vectors summing to zero.

    Frequencies are integer vectors (one exponent per coordinate), so the
    zero test is exact; the tuple sum is accumulated as a j-fold tensor
    convolution over the integer lattice.  Requires the independence flag:
    with dependent lambdas the vector-sum test no longer models f-sums.
    """
    if spec.mode != "product":
        raise ValueError("constrained frequency sums are defined for product specs")
    if not spec.independent:
        raise ValueError("dependent frequencies are unsupported")
    if j < 0:
        raise ValueError("j must be >= 0")
    if j == 0:
        return Fraction(1)
    base = {}
    dims = tuple(phi.degree for phi in spec.phis)
    for mvec in _lattice(dims):
        # coefficient of the product construction at this frequency vector
        parts = [phi.coeff(m) for phi, m in zip(spec.phis, mvec)]
        c = parts[0]
        for p in parts[1:]:
            c = _cmul(c, p)
        if c != _CZERO:
            base[mvec] = c
    acc = base
    for _ in range(j - 1):
        acc = _dict_convolve(acc, base)
    zero = tuple(0 for _ in dims)
    val = acc.get(zero, _CZERO)
    if val[1] != 0:
        raise AssertionError("constrained sum has a nonzero imaginary part")
    return val[0]


def _lattice(dims):
    if len(dims) == 1:
        for m in range(-dims[0], dims[0] + 1):
            yield (m,)
        return
    for m in range(-dims[0], dims[0] + 1):
        for rest in _lattice(dims[1:]):
            yield (m,) + rest


def _dict_convolve(a: dict, b: dict) -> dict:
    out = {}
    for va, ca in a.items():
        for vb, cb in b.items():
            key = tuple(x + y for x, y in zip(va, vb))
            prev = out.get(key, _CZERO)
            out[key] = _cadd(prev, _cmul(ca, cb))
    return {k: v for k, v in out.items() if v != _CZERO}


def l_j(spec: DensitySpec, j: int) -> Fraction:
    """The limiting moment ratio (||.||_j / ||.||_2)^j = m_j / m_2^(j/2), exact."""
    if j < 2 or j % 2:
        raise ValueError("l_j is defined for even j >= 2")
    mj = construction_moment(spec, j)
    m2 = construction_moment(spec, 2)
    return mj / m2 ** (j // 2)


def gauss_moment(j: int) -> int:
    """Standard Gaussian moments: (j-1)!! for even j, 0 for odd j."""
    if j < 0:
        raise ValueError("moment order must be >= 0")
    if j % 2:
        return 0
    h = j // 2
    return math.factorial(j) // (2 ** h * math.factorial(h))


def predicted_moment(spec: DensitySpec | None, j: int) -> float:
    """j-th moment of the limiting distribution: gauss_moment(j) * L_j.

    Pass spec=None for the slowly varying case (L_j = 1, standard Gaussian).
    """
    if j % 2:
        return 0.0
    g = gauss_moment(j)
    if spec is None or j == 0:
        return float(g)
    return float(g * l_j(spec, j))


# ---------------------------------------------------------------------------
# Gaussian-mixture density machinery
# ---------------------------------------------------------------------------

_SINGULAR_NODE_FLOOR = 1e-9


@lru_cache(maxsize=32)
def _gl_nodes(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _torus_nodes(n: int):
    # Gauss-Legendre at moderate sizes; the integrands are smooth and
    # periodic, so beyond that the equal-weight midpoint rule converges
    # superalgebraically and avoids the O(n^2) node solve.
    if n <= 1024:
        return _gl_nodes(n, 0.0, 1.0)
    t = (np.arange(n) + 0.5) / n
    return t, np.full(n, 1.0 / n)


def mixture_components(spec: DensitySpec):
    """Quadrature weights and mixture standard deviations sigma(t) = F(t)/||F||_2.

    The construction F is evaluated on the tensor quadrature grid over
    [0,1)^n; results are cached on the spec.
    """
    cached = spec._cache.get("components")
    if cached is not None:
        return cached
    t, w = _torus_nodes(spec.quad_points)
    vals_1d = [phi.values(t) for phi in spec.phis]
    field_vals = None
    weights = None
    for v in vals_1d:
        if field_vals is None:
            field_vals = v.copy()
            weights = w.copy()
        else:
            if spec.mode == "product":
                field_vals = np.multiply.outer(field_vals, v).ravel()
            else:
                field_vals = np.add.outer(field_vals, v).ravel()
            weights = np.multiply.outer(weights, w).ravel()
    if float(field_vals.min()) < _SINGULAR_NODE_FLOOR:
        raise ValueError("construction vanishes at a quadrature node (singular mixture)")
    norm2 = math.sqrt(float(construction_moment(spec, 2)))
    sigmas = field_vals / norm2
    spec._cache["components"] = (weights, sigmas, norm2)
    return weights, sigmas, norm2


def density_eval(spec: DensitySpec, alpha: float) -> float:
    """The limiting density: a weight-averaged mixture of centred normals with
    standard deviations sigma(t)."""
    weights, sigmas, _ = mixture_components(spec)
    z = alpha / sigmas
    vals = np.exp(-0.5 * z * z) / (sigmas * math.sqrt(2 * math.pi))
    return float(np.dot(weights, vals))


def _alpha_cutoff(spec: DensitySpec) -> float:
    _, sigmas, _ = mixture_components(spec)
    return 12.0 * float(sigmas.max())


def density_moment(spec: DensitySpec, j: int, alpha_nodes: int = 768) -> float:
    """Numerical integral of alpha^j against the density.

    Even j (and the mass j = 0) integrate over [0, A] with the substitution
    alpha = beta^2, which absorbs the |alpha|^(-1/2)-type peak a unit-circle
    root of p would create, then double.  Odd j integrate two-sided on the
    symmetric node set, so the report is the honest numerical cancellation.
    """
    if j < 0:
        raise ValueError("moment order must be >= 0")
    a_max = _alpha_cutoff(spec)
    if j % 2 == 0:
        beta, wb = _gl_nodes(alpha_nodes, 0.0, math.sqrt(a_max))
        dens = np.array([density_eval(spec, float(b * b)) for b in beta])
        return float(2.0 * np.dot(wb, beta ** (2 * j) * dens * 2.0 * beta))
    nodes, wn = _gl_nodes(alpha_nodes, 0.0, a_max)
    dens = np.array([density_eval(spec, float(a)) for a in nodes])
    plus = np.dot(wn, nodes ** j * dens)
    dens_m = np.array([density_eval(spec, float(-a)) for a in nodes])
    minus = np.dot(wn, (-nodes) ** j * dens_m)
    return float(plus + minus)
