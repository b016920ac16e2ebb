"""Gap-width functions with first and second derivatives.

Built-in slowly varying families plus the almost-periodic product/sum
constructions phi_l(lambda_l (log x)^A) (log x)^(-A), whose derivatives come
from term-wise differentiation of the exact Fourier representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import spectra
from .spectra import DensitySpec, TrigPolyModulus, phi_from_poly

__all__ = [
    "GapWidth",
    "AlmostPeriodicGap",
    "OmegaDiagnostics",
    "make_slowly_varying",
    "make_almost_periodic",
    "omega_diagnostics",
    "gap_from_json",
    "gap_to_json",
    "density_spec_from_json",
    "SLOWLY_VARYING_KINDS",
]

DEFAULT_X_MIN = 3.0
_ROOT_FLOOR = 1e-9
_SURROGATE_GRID = 4096
_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class GapWidth:
    """A positive gap width omega with closed-form derivatives.

    The callables accept scalars or numpy arrays.
    """

    name: str
    _value: Callable = field(repr=False)
    _d1: Callable = field(repr=False)
    _d2: Callable = field(repr=False)
    x_min: float = DEFAULT_X_MIN
    spec: "AlmostPeriodicGap | None" = None

    def value(self, x):
        return self._value(x)

    def d1(self, x):
        return self._d1(x)

    def d2(self, x):
        return self._d2(x)


SLOWLY_VARYING_KINDS = ("inv_loglog", "inv_log", "exp_neg_sqrt_log")


def make_slowly_varying(kind: str) -> GapWidth:
    """One of the built-in slowly varying families: 1/log log x, 1/log x,
    exp(-sqrt(log x))."""
    if kind == "inv_log":
        return GapWidth(
            name="inv_log",
            _value=lambda x: 1.0 / np.log(x),
            _d1=lambda x: -1.0 / (x * np.log(x) ** 2),
            _d2=lambda x: (np.log(x) + 2.0) / (x * x * np.log(x) ** 3),
        )
    if kind == "inv_loglog":
        def _val(x):
            return 1.0 / np.log(np.log(x))

        def _d1(x):
            L = np.log(x)
            return -1.0 / (x * L * np.log(L) ** 2)

        def _d2(x):
            L = np.log(x)
            u = np.log(L)
            return (1.0 + 1.0 / L + 2.0 / (L * u)) / (x * x * L * u * u)

        return GapWidth(name="inv_loglog", _value=_val, _d1=_d1, _d2=_d2)
    if kind == "exp_neg_sqrt_log":
        def _val(x):
            return np.exp(-np.sqrt(np.log(x)))

        def _d1(x):
            L = np.log(x)
            return -np.exp(-np.sqrt(L)) / (2.0 * x * np.sqrt(L))

        def _d2(x):
            L = np.log(x)
            w = np.exp(-np.sqrt(L))
            return w / (4.0 * x * x * L) + w * (2.0 * L + 1.0) / (4.0 * x * x * L ** 1.5)

        return GapWidth(name="exp_neg_sqrt_log", _value=_val, _d1=_d1, _d2=_d2)
    raise ValueError(f"unknown slowly varying kind {kind!r}")


@dataclass(frozen=True)
class AlmostPeriodicGap:
    """Construction data for omega_x / omega_+: squared-modulus factors phi_l,
    frequencies lambda_l, exponent A > 1 and the combination mode."""

    polys: tuple            # tuple of coefficient tuples (exact complex input)
    lambdas: tuple          # tuple[float, ...]
    exponent: int
    mode: str               # "product" | "sum"
    independent: bool = True

    def __post_init__(self):
        if self.mode not in ("product", "sum"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.exponent < 2:
            raise ValueError("the exponent A must be an integer >= 2")
        if len(self.polys) != len(self.lambdas) or not self.polys:
            raise ValueError("need one lambda per polynomial")

    def to_phis(self) -> tuple:
        return tuple(phi_from_poly(c) for c in self.polys)


def _no_roots_surrogate(phis: Sequence[TrigPolyModulus]) -> None:
    # Grid minimum of |p|^2 as a stand-in for "no roots on the unit circle";
    # a midpoint grid so exact roots at rational t do not mask near-root decay.
    t = (np.arange(_SURROGATE_GRID) + 0.5) / _SURROGATE_GRID
    for phi in phis:
        if float(phi.values(t).min()) <= _ROOT_FLOOR:
            raise ValueError("a factor polynomial is (numerically) zero on the unit circle")


def _fourier_terms(spec: AlmostPeriodicGap):
    """Flatten the construction into [(frequency, complex coefficient)] terms
    of t -> construction(lambda * t)."""
    phis = spec.to_phis()
    terms: dict[float, complex] = {}

    def add(freq: float, coeff: complex):
        terms[freq] = terms.get(freq, 0j) + coeff

    if spec.mode == "product":
        stack = [(0.0, 1 + 0j)]
        for phi, lam in zip(phis, spec.lambdas):
            new = []
            for freq, coeff in stack:
                for m in range(-phi.degree, phi.degree + 1):
                    c = phi.coeff(m)
                    cc = complex(float(c[0]), float(c[1]))
                    if cc != 0:
                        new.append((freq + m * lam, coeff * cc))
            stack = new
        for freq, coeff in stack:
            add(freq, coeff)
    else:
        for phi, lam in zip(phis, spec.lambdas):
            for m in range(-phi.degree, phi.degree + 1):
                c = phi.coeff(m)
                cc = complex(float(c[0]), float(c[1]))
                if cc != 0:
                    add(m * lam, cc)
    return sorted(terms.items())


def make_almost_periodic(spec: AlmostPeriodicGap) -> GapWidth:
    """omega(x) = construction(lambda_l (log x)^A) * (log x)^(-A).

    Evaluation multiplies/adds the phi_l values directly; d1 and d2 come from
    term-wise analytic differentiation of the Fourier representation.  Every
    evaluation is checked to be real to within 1e-10 of its magnitude.
    """
    phis = spec.to_phis()
    _no_roots_surrogate(phis)
    A = spec.exponent
    terms = _fourier_terms(spec)
    freqs = np.array([f for f, _ in terms])
    coeffs = np.array([c for _, c in terms])
    lambdas = spec.lambdas

    def _construction(u):
        parts = [phi.values(np.asarray(lam * u, dtype=np.float64))
                 for phi, lam in zip(phis, lambdas)]
        out = parts[0]
        for p in parts[1:]:
            out = out * p if spec.mode == "product" else out + p
        return out

    def _val(x):
        x = np.asarray(x, dtype=np.float64)
        L = np.log(x)
        return _construction(L ** A) * L ** (-A)

    def _check_real(z, scale):
        if np.max(np.abs(z.imag)) > _IMAG_TOL * (1.0 + np.max(np.abs(z.real)) + scale):
            raise AssertionError("Fourier evaluation lost reality symmetry")
        return z.real

    def _d1(x):
        x = np.asarray(x, dtype=np.float64)
        L = np.log(x)
        u = L ** A
        phase = np.exp(2j * math.pi * np.multiply.outer(u, freqs))
        two_pi_f = 2j * math.pi * freqs
        inner = phase * coeffs * (np.multiply.outer(u, two_pi_f) - 1.0)
        z = inner.sum(axis=-1) * (A / (x * L ** (A + 1)))
        return _check_real(z, float(np.max(np.abs(coeffs))))

    def _d2(x):
        x = np.asarray(x, dtype=np.float64)
        L = np.log(x)
        u = L ** A
        phase = np.exp(2j * math.pi * np.multiply.outer(u, freqs))
        two_pi_f = 2j * math.pi * freqs
        bracket = (
            (A + 1.0 + L)[..., None] * (np.multiply.outer(u, two_pi_f) - 1.0)
            + A * np.multiply.outer(u * u, (2 * math.pi * freqs) ** 2)
        )
        z = (phase * coeffs * bracket).sum(axis=-1) * (-A / (x * x * L ** (A + 2)))
        return _check_real(z, float(np.max(np.abs(coeffs))))

    mark = "x" if spec.mode == "product" else "+"
    return GapWidth(name=f"almost_periodic_{mark}_n{len(phis)}_A{A}",
                    _value=_val, _d1=_d1, _d2=_d2, spec=spec)


def fourier_value(gap: GapWidth, x) -> np.ndarray:
    """Evaluate an almost-periodic gap through its Fourier representation
    (cross-check against the direct product/sum evaluation)."""
    if gap.spec is None:
        raise ValueError("not an almost-periodic gap")
    terms = _fourier_terms(gap.spec)
    x = np.asarray(x, dtype=np.float64)
    L = np.log(x)
    u = L ** gap.spec.exponent
    acc = np.zeros_like(u, dtype=np.complex128)
    for f, c in terms:
        acc += c * np.exp(2j * math.pi * f * u)
    if np.max(np.abs(acc.imag)) > _IMAG_TOL * (1.0 + np.max(np.abs(acc.real))):
        raise AssertionError("Fourier evaluation lost reality symmetry")
    return acc.real * L ** (-gap.spec.exponent)


@dataclass(frozen=True)
class OmegaDiagnostics:
    """Numerical membership diagnostics for the regularity class, sampled on
    an equispaced scan of [X, 2X]."""

    X: float
    u_count: int                 # sign changes of omega' (zero-count estimate)
    v_count: int                 # sign changes of omega''
    cond3a_ratio: float          # u_count * max omega / sqrt(X)
    m2: float
    tau_estimate: float          # least-squares slope of log M2 vs log X (dyadic)
    lj_estimates: dict           # j -> M_j / M_2^(j/2), even j in {2,4,6,8}
    carleman_partial: tuple      # partial sums of m_j^(-1/j) over even j <= 40


def _mj_scan(omega: GapWidth, X: float, scan_points: int, j: int) -> float:
    xs = X * (1.0 + (np.arange(scan_points) + 0.5) / scan_points)
    w = omega.value(xs)
    if not np.all(np.isfinite(w)):
        bad = xs[~np.isfinite(w)][0]
        raise FloatingPointError(f"omega evaluation not finite at x = {bad}")
    return float(np.mean((w * np.log(w)) ** j))


def _sign_changes(vals: np.ndarray) -> int:
    s = np.sign(vals)
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))


def omega_diagnostics(omega: GapWidth, X: float, scan_points: int = 10_000) -> OmegaDiagnostics:
    """Sampled zero counts of omega', omega'' and the moment-ratio diagnostics."""
    if X < omega.x_min:
        raise ValueError(f"X = {X} below the domain bound {omega.x_min}")
    if scan_points < 1000:
        raise ValueError("scan_points must be >= 1000")
    xs = X * (1.0 + (np.arange(scan_points) + 0.5) / scan_points)
    w = omega.value(xs)
    if not np.all(np.isfinite(w)):
        bad = xs[~np.isfinite(w)][0]
        raise FloatingPointError(f"omega evaluation not finite at x = {bad}")
    u_count = _sign_changes(np.asarray(omega.d1(xs)))
    v_count = _sign_changes(np.asarray(omega.d2(xs)))
    wlw = w * np.log(w)
    m2 = float(np.mean(wlw ** 2))
    lj = {j: float(np.mean(wlw ** j)) / m2 ** (j / 2) for j in (2, 4, 6, 8)}
    logm2 = []
    logx = []
    for mult in (1, 2, 4, 8):
        logx.append(math.log(mult * X))
        logm2.append(math.log(_mj_scan(omega, mult * X, scan_points, 2)))
    slope = np.polyfit(logx, logm2, 1)[0]
    partials = []
    running = 0.0
    for j in range(2, 41, 2):
        ljr = float(np.mean(wlw ** j)) / m2 ** (j / 2)
        moment_j = spectra.gauss_moment(j) * ljr
        running += moment_j ** (-1.0 / j)
        partials.append(running)
    return OmegaDiagnostics(
        X=X,
        u_count=u_count,
        v_count=v_count,
        cond3a_ratio=u_count * float(w.max()) / math.sqrt(X),
        m2=m2,
        tau_estimate=float(slope),
        lj_estimates=lj,
        carleman_partial=tuple(partials),
    )


# ---------------------------------------------------------------------------
# JSON schema shared by gap widths and density specs
# ---------------------------------------------------------------------------

def _parse_polys(obj) -> tuple:
    polys = []
    for coeffs in obj:
        polys.append(tuple(complex(re, im) for re, im in coeffs))
    return tuple(polys)


def gap_from_json(obj: dict) -> GapWidth:
    """Build a gap width from the JSON spec: slowly varying kinds need only
    "kind"; product/sum kinds carry polys, lambdas, independent and A."""
    kind = obj["kind"]
    if kind in SLOWLY_VARYING_KINDS:
        return make_slowly_varying(kind)
    if kind in ("product", "sum"):
        spec = AlmostPeriodicGap(
            polys=_parse_polys(obj["polys"]),
            lambdas=tuple(float(v) for v in obj["lambdas"]),
            exponent=int(obj["A"]),
            mode=kind,
            independent=bool(obj.get("independent", True)),
        )
        return make_almost_periodic(spec)
    raise ValueError(f"unknown gap-width kind {kind!r}")


def gap_to_json(gap: GapWidth) -> dict:
    if gap.spec is None:
        return {"kind": gap.name}
    spec = gap.spec
    return {
        "kind": spec.mode,
        "polys": [[[c.real, c.imag] for c in poly] for poly in spec.polys],
        "lambdas": list(spec.lambdas),
        "independent": spec.independent,
        "A": spec.exponent,
    }


def density_spec_from_json(obj: dict, quad_points: int = 64) -> DensitySpec:
    """The density-side reading of the same schema (lambdas and A do not enter
    the limiting density)."""
    kind = obj["kind"]
    if kind not in ("product", "sum"):
        raise ValueError("density specs require a product or sum kind")
    phis = tuple(phi_from_poly(c) for c in _parse_polys(obj["polys"]))
    return DensitySpec(
        mode=kind,
        phis=phis,
        quad_points=int(obj.get("quad_points", quad_points)),
        independent=bool(obj.get("independent", True)),
    )
