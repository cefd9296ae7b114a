"""Thermodynamic-limit volume-law coefficients for the complex SYK2 model.

Eigenvalues ``u`` of the restricted one-body correlation matrix follow the
beta = 2 Jacobi density ``G_f`` supported on ``[1/2 - r, 1/2 + r]`` with
``r = sqrt(f (1 - f))``. The capacity coefficient ``<C_A>/V_A`` is
computed three independent ways (power series, quadrature, hypergeometric
closed form) and the entropy coefficients by quadrature.

For ``f > 1/2`` every coefficient refers to the named subsystem:
``s(f) = (1 - f)/f * s(1 - f)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .errors import DomainError, RegionOfConvergenceError
from .quadrature import integrate_1d
from .specfun import EULER_GAMMA, KdfParams, SeriesEvaluation, hyp_pfq, kdf, script_h

__all__ = [
    "HALF_FILLING_COE",
    "HALF_FILLING_EE",
    "HALF_FILLING_RENYI2",
    "CoefficientCurve",
    "ConvergenceReport",
    "jacobi_density",
    "series_terms",
    "coefficient_series",
    "SeriesTable",
    "series_table",
    "coefficient_quadrature",
    "coefficient_closed_form",
    "coe_coefficient",
    "entropy_coefficients",
    "coefficient_curve",
    "replica_integral",
    "replica_coefficient_half",
    "replica_coefficient_fd",
    "convergence_report",
    "chaotic_coe",
    "CLOSED_FORM_KDF",
]

HALF_FILLING_COE = math.pi ** 2 / 8 - 1
HALF_FILLING_EE = 2 * math.log(2) - 1
HALF_FILLING_RENYI2 = 2 * math.log(2) + 2 * math.log(2 - math.sqrt(2))

CLOSED_FORM_KDF = KdfParams(
    a_top=(2, 2.5), b_row=(1, 0.5), c_row=(1,), alpha_bot=(3, 4), beta_bot=(1.5,), gamma_bot=()
)

_SERIES_CHUNK = 4096


@dataclass
class CoefficientCurve:
    """Coefficients sampled on a grid of subsystem fractions."""

    f_grid: np.ndarray
    coe: np.ndarray
    ee: Optional[np.ndarray] = None
    renyi2: Optional[np.ndarray] = None
    errors: Optional[np.ndarray] = None

    def __post_init__(self):
        self.f_grid = np.asarray(self.f_grid, dtype=float)
        n = self.f_grid.shape[0]
        for name in ("coe", "ee", "renyi2", "errors"):
            val = getattr(self, name)
            if val is None:
                continue
            val = np.asarray(val, dtype=float)
            if val.shape != (n,):
                raise DomainError(f"{name} has shape {val.shape}, expected ({n},)")
            if not np.all(np.isfinite(val)) or np.any(val < 0):
                raise DomainError(f"{name} must be finite and non-negative")
            setattr(self, name, val)

    def columns(self) -> dict:
        cols = {"f": self.f_grid, "coe": self.coe}
        for name in ("ee", "renyi2", "errors"):
            if getattr(self, name) is not None:
                cols[name] = getattr(self, name)
        return cols


@dataclass
class ConvergenceReport:
    f: float
    terms: np.ndarray
    ratio_limit: float
    raabe_statistic: float
    suppression_ratio: float


def _check_open_unit(f: float) -> float:
    f = float(f)
    if not 0.0 < f < 1.0:
        raise DomainError(f"subsystem fraction must lie in (0, 1), got {f}")
    return f


def _reflect(f: float) -> tuple[float, float]:
    """(fraction at or below 1/2, factor mapping its coefficient back to f)."""
    f = _check_open_unit(f)
    if f <= 0.5:
        return f, 1.0
    return 1.0 - f, (1.0 - f) / f


def jacobi_density(u, f: float):
    """Jacobi-ensemble eigenvalue density ``G_f(u)`` (zero off the support)."""
    f = float(f)
    if not 0.0 < f <= 0.5:
        raise DomainError("jacobi_density requires 0 < f <= 1/2")
    u = np.asarray(u, dtype=float)
    r2 = f * (1.0 - f)
    d = r2 - (u - 0.5) ** 2
    inside = d >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sqrt(np.where(inside, d, 0.0)) / (u * (1.0 - u)) / (2 * math.pi * f)
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def _log_terms(f: float, start: int, stop: int) -> np.ndarray:
    k = np.arange(start, stop, dtype=float)
    with np.errstate(divide="ignore"):
        lz = math.log(4.0 * f * (1.0 - f))
    return (
        k * lz
        + special.gammaln(k + 1.5)
        - np.log(k + 1.0)
        - special.gammaln(k + 3.0)
        + np.log(script_h(np.arange(start, stop)))
    )


def series_terms(f: float, n: int) -> np.ndarray:
    r"""Terms ``a_0 .. a_{n-1}`` of the volume-law series (without the
    ``4/sqrt(pi) f (1-f)^2`` prefactor), for ``0 < f <= 1/2``."""
    if not 0.0 < f <= 0.5:
        raise DomainError("series_terms requires 0 < f <= 1/2")
    return np.exp(_log_terms(f, 0, n))


def _prefactor(f: float) -> float:
    return 4.0 / math.sqrt(math.pi) * f * (1.0 - f) ** 2


def _tails(f: float, k: np.ndarray, a_k: np.ndarray) -> np.ndarray:
    """Estimated sum of the terms from index ``k`` on, given ``a_k``."""
    L = 4.0 * f * (1.0 - f)
    if L < 1.0:
        return a_k / (1.0 - L)
    # algebraic decay a_k ~ k^{-5/2} (log(k)/2 + const) at half filling
    h = script_h(k)
    return a_k * (k * (2.0 / 3.0 + 2.0 / (9.0 * h)) + 0.5)


def coefficient_series(f: float, tol: float = 1e-10, max_terms: int = 100_000) -> SeriesEvaluation:
    """Capacity coefficient ``<C_A>/V_A`` by summing the power series in
    ``4 f (1 - f)``.

    The truncation error after ``n`` terms is bounded by
    ``a_n / (1 - 4 f (1 - f))`` for ``f < 1/2``. At ``f = 1/2`` the terms
    decay only algebraically; the reported tail is an asymptotic estimate
    and ``converged`` is typically false.
    """
    g, factor = _reflect(f)
    scale = _prefactor(g) * factor
    parts = []
    used = 0
    bound = math.inf
    while used < max_terms:
        stop = min(used + _SERIES_CHUNK, max_terms)
        a = np.exp(_log_terms(g, used, stop + 1))
        kept = np.arange(used + 1, stop + 1)
        # tails[i]: error when the first kept[i] terms are summed
        tails = scale * _tails(g, kept, a[1:])
        hit = np.flatnonzero(tails <= tol)
        if hit.size:
            parts.append(a[: kept[hit[0]] - used])
            used = int(kept[hit[0]])
            bound = float(tails[hit[0]])
            break
        parts.append(a[: stop - used])
        used = stop
        bound = float(tails[-1])
    value = math.fsum(np.concatenate(parts)) * scale
    return SeriesEvaluation(value, used, bound, bound <= tol)


@dataclass(frozen=True)
class SeriesTable:
    """Scaled terms, running partial sums and tail estimates after each term."""

    k: np.ndarray
    term: np.ndarray
    partial_sum: np.ndarray
    tail_bound: np.ndarray


def series_table(f: float, n: int) -> SeriesTable:
    """The first ``n`` terms of the capacity series for any ``0 < f < 1``,
    including the prefactor (and the reflection factor for ``f > 1/2``)."""
    if n < 1:
        raise DomainError("series_table needs n >= 1")
    g, factor = _reflect(f)
    scale = _prefactor(g) * factor
    a = np.exp(_log_terms(g, 0, n + 1))
    k = np.arange(n)
    return SeriesTable(
        k=k,
        term=scale * a[:n],
        partial_sum=scale * np.cumsum(a[:n]),
        tail_bound=scale * _tails(g, k + 1, a[1:]),
    )


def _edge_grid(f: float, t):
    """``u`` and ``1 - u`` on the support, parametrized as
    ``u = 1/2 + r sin(t)`` without cancellation near the edges."""
    r = math.sqrt(f * (1.0 - f))
    gap = (math.sqrt(1.0 - f) - math.sqrt(f)) ** 2  # 1 - 2r
    u = 0.5 * (gap + 4.0 * r * np.sin(0.25 * math.pi + 0.5 * t) ** 2)
    v = 0.5 * (gap + 4.0 * r * np.sin(0.25 * math.pi - 0.5 * t) ** 2)
    return r, u, v


def _jacobi_average(f: float, per_mode, tol: float) -> float:
    """``int G_f(u) h(u) du`` with ``per_mode(u, v) = h(u) / (u v)``."""

    def integrand(t):
        r, u, v = _edge_grid(f, t)
        return (r * np.cos(t)) ** 2 / (2.0 * math.pi * f) * per_mode(u, v)

    return integrate_1d(integrand, -0.5 * math.pi, 0.5 * math.pi, tol).value


def _logs(u, v):
    lu = np.where(u < 0.5, np.log(u), np.log1p(-v))
    lv = np.where(v < 0.5, np.log(v), np.log1p(-u))
    return lu, lv


def _coe_per_mode(u, v):
    lu, lv = _logs(u, v)
    return (lv - lu) ** 2


def _ee_per_mode(u, v):
    lu, lv = _logs(u, v)
    return -lu / v - lv / u


def _renyi2_per_mode(u, v):
    uv = u * v
    return -np.log1p(-2.0 * uv) / uv


def coefficient_quadrature(f: float, tol: float = 1e-12) -> float:
    """Capacity coefficient by integrating the capacity against ``G_f``."""
    g, factor = _reflect(f)
    return factor * _jacobi_average(g, _coe_per_mode, tol)


def coefficient_closed_form(f: float, tol: float = 1e-12) -> float:
    """Capacity coefficient from two 3F2 values, a rational term and a
    Kampe de Feriet function of ``(4f(1-f), 4f(1-f))``.

    Valid for ``f != 1/2``: at half filling both arguments reach the
    boundary of the region of convergence.
    """
    g, factor = _reflect(f)
    z = 4.0 * g * (1.0 - g)
    try:
        F = kdf(CLOSED_FORM_KDF, z, z, tol / 10)
    except RegionOfConvergenceError as exc:
        raise RegionOfConvergenceError(f"closed form undefined at f = {f}: {exc}") from exc
    F32a = hyp_pfq([1, 1, 1.5], [2, 3], z, tol / 10).value
    F32b = hyp_pfq([1, 1, 0.5], [2, 3], z, tol / 10).value
    gam = EULER_GAMMA
    bracket = (
        -gam / 8 * F32a
        + (2 - gam) / 8 * F32b
        + gam * (3 - 4 * g) / (12 * (1 - g) ** 2)
        + 0.25 * g * (1 - g) * F.value
    )
    return factor * 4 * g * (1 - g) ** 2 * bracket


def coe_coefficient(f: float, tol: float = 1e-12) -> float:
    """Best available capacity coefficient: the exact value at ``f = 1/2``,
    the power series when it converges quickly, quadrature otherwise."""
    g, factor = _reflect(f)
    if g == 0.5:
        return HALF_FILLING_COE
    if 4.0 * g * (1.0 - g) <= 0.999:
        return factor * coefficient_series(g, tol).value
    return factor * coefficient_quadrature(g, tol)


def entropy_coefficients(f: float, tol: float = 1e-11) -> tuple[float, float]:
    """Entanglement-entropy and second-Renyi coefficients ``(ee, renyi2)``."""
    g, factor = _reflect(f)
    return (
        factor * _jacobi_average(g, _ee_per_mode, tol),
        factor * _jacobi_average(g, _renyi2_per_mode, tol),
    )


def coefficient_curve(f_grid, entropies: bool = True, tol: float = 1e-11) -> CoefficientCurve:
    f_grid = np.asarray(f_grid, dtype=float)
    coe = np.array([coe_coefficient(f, tol) for f in f_grid])
    if not entropies:
        return CoefficientCurve(f_grid, coe)
    ent = np.array([entropy_coefficients(f, tol) for f in f_grid]).reshape(-1, 2)
    return CoefficientCurve(f_grid, coe, ee=ent[:, 0], renyi2=ent[:, 1])


def replica_integral(n: float, tol: float = 1e-14) -> float:
    """``int_0^1 ln(1 + k^{2n}) / (1 + k^2) dk``."""
    return integrate_1d(lambda k: np.log1p(k ** (2 * n)) / (1 + k * k), 0.0, 1.0, tol).value


def replica_coefficient_half(tol: float = 1e-13) -> float:
    """Half-filling capacity coefficient from the replica integral.

    The second ``n``-derivative of ``ln(1 + k^{2n})`` at ``n = 1`` is
    ``4 ln^2(k) k^2 / (1 + k^2)^2``, taken under the integral sign.
    """
    val = integrate_1d(lambda k: 4 * np.log(k) ** 2 * k * k / (1 + k * k) ** 3, 0.0, 1.0, tol).value
    return 4 / math.pi * val


def replica_coefficient_fd(step: float = 1e-3) -> float:
    """Same quantity with the ``n``-derivative taken by central differences."""
    h = float(step)
    second = (replica_integral(1 + h) - 2 * replica_integral(1.0) + replica_integral(1 - h)) / (h * h)
    return 4 / math.pi * second


def convergence_report(f: float, n: int) -> ConvergenceReport:
    """Ratio- and Raabe-test statistics of the series at term ``n``."""
    f = float(f)
    if not 0.0 < f <= 0.5:
        raise DomainError("convergence_report requires 0 < f <= 1/2")
    if n < 10:
        raise DomainError("convergence_report requires n >= 10")
    a = series_terms(f, n + 2)
    half = series_terms(0.5, n + 1)
    return ConvergenceReport(
        f=f,
        terms=a[: n + 1],
        ratio_limit=float(a[n + 1] / a[n]),
        raabe_statistic=float(n * (a[n] / a[n + 1] - 1.0)),
        suppression_ratio=float(a[n] / half[n]),
    )


def chaotic_coe(V: int, f: float, beta: float) -> float:
    """Average capacity ``V f (1 - f) beta^2`` for a chaotic Hamiltonian with
    Gaussian density of states at inverse temperature ``beta``."""
    return V * f * (1.0 - f) * beta ** 2
