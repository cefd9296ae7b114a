"""Special functions: log-gamma, digamma/trigamma, harmonic numbers, Jacobi
polynomials, generalized hypergeometric series and the Kampe de Feriet
double series.

Everything here is real-valued. Series evaluators return a
:class:`SeriesEvaluation` carrying an estimate of the truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError, PoleError, RegionOfConvergenceError

__all__ = [
    "EULER_GAMMA",
    "SeriesEvaluation",
    "KdfParams",
    "log_gamma",
    "polygamma",
    "harmonic",
    "script_h",
    "jacobi_p",
    "jacobi_table",
    "hyp_pfq",
    "kdf",
    "check_kdf_region",
]

EULER_GAMMA = 0.57721566490153286060651209008240243
DEFAULT_TOL = 1e-10
MAX_TERMS = 100_000

# Bernoulli-number coefficients of the large-x expansions.
_PSI_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_TRIGAMMA_ASYMPTOTIC = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)
_ASYMPTOTIC_THRESHOLD = 10.0

_SMALL_HARMONIC = 64
_HARMONIC_TABLE = np.array(
    [float(sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0))) for n in range(_SMALL_HARMONIC + 1)]
)


@dataclass(frozen=True)
class SeriesEvaluation:
    """Value of a truncated infinite series.

    Attributes
    ----------
    value : float
        Partial sum.
    terms_used : int
        Number of terms added.
    tail_bound : float
        Estimated absolute truncation error (non-negative, may be ``inf``).
    converged : bool
        Whether ``tail_bound`` fell below the requested tolerance.
    """

    value: float
    terms_used: int
    tail_bound: float
    converged: bool

    def __post_init__(self):
        if not self.tail_bound >= 0:
            raise ValueError("tail_bound must be non-negative")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class KdfParams:
    r"""Parameter rows of :math:`F^{p:q:k}_{l:m:n}`.

    ``a_top`` are Pochhammer symbols in ``r + s``, ``b_row`` in ``r``,
    ``c_row`` in ``s``; ``alpha_bot``, ``beta_bot``, ``gamma_bot`` are their
    denominator counterparts.
    """

    a_top: tuple = ()
    b_row: tuple = ()
    c_row: tuple = ()
    alpha_bot: tuple = ()
    beta_bot: tuple = ()
    gamma_bot: tuple = ()

    def __post_init__(self):
        for name in ("a_top", "b_row", "c_row", "alpha_bot", "beta_bot", "gamma_bot"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        for v in self.alpha_bot + self.beta_bot + self.gamma_bot:
            if _is_nonpositive_integer(v):
                raise PoleError(f"denominator parameter {v} is a non-positive integer")

    @property
    def orders(self) -> tuple[int, int, int, int, int, int]:
        """``(p, q, k, l, m, n)``."""
        return (
            len(self.a_top),
            len(self.b_row),
            len(self.c_row),
            len(self.alpha_bot),
            len(self.beta_bot),
            len(self.gamma_bot),
        )


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def log_gamma(x):
    """Natural log of the gamma function for positive arguments.

    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("log_gamma requires x > 0")
    out = special.gammaln(x)
    return float(out) if out.ndim == 0 else out


def polygamma(order: int, x):
    """Digamma (``order=0``) or trigamma (``order=1``) of positive ``x``.

    Upward recurrence until ``x >= 10`` followed by the asymptotic series.
    """
    if order not in (0, 1):
        raise DomainError(f"polygamma order {order} not supported (only 0 and 1)")
    x = np.array(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(~(x > 0)):
        raise DomainError("polygamma requires x > 0")

    shift = np.zeros_like(x)
    y = x.copy()
    low = y < _ASYMPTOTIC_THRESHOLD
    while np.any(low):
        if order == 0:
            shift[low] -= 1.0 / y[low]
        else:
            shift[low] += 1.0 / (y[low] * y[low])
        y[low] += 1.0
        low = y < _ASYMPTOTIC_THRESHOLD

    inv2 = 1.0 / (y * y)
    if order == 0:
        acc = np.zeros_like(y)
        for coef in reversed(_PSI_ASYMPTOTIC):
            acc = (acc + coef) * inv2
        out = np.log(y) - 0.5 / y - acc + shift
    else:
        acc = np.zeros_like(y)
        for coef in reversed(_TRIGAMMA_ASYMPTOTIC):
            acc = (acc + coef) * inv2
        out = 1.0 / y + 0.5 * inv2 + acc / y + shift
    return float(out[0]) if scalar else out


def harmonic(n):
    """Harmonic number ``H_n``; ``H_0 = 0``. Scalar or integer array."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise DomainError("harmonic requires n >= 0")
    n = n.astype(np.int64)
    small = n <= _SMALL_HARMONIC
    out = np.empty(n.shape, dtype=float)
    out[small] = _HARMONIC_TABLE[n[small]]
    if np.any(~small):
        out[~small] = polygamma(0, n[~small] + 1.0) + EULER_GAMMA
    return float(out) if out.ndim == 0 else out


def script_h(k):
    r"""``H_{2k+2} - H_{k+1}/2``, the harmonic combination in the
    volume-law series."""
    k = np.asarray(k)
    return harmonic(2 * k + 2) - 0.5 * harmonic(k + 1)


def _check_jacobi_params(alpha: float, beta: float) -> None:
    if alpha <= -1 or beta <= -1:
        raise DomainError("Jacobi parameters must exceed -1")


def jacobi_table(nmax: int, alpha: float, beta: float, x):
    """All Jacobi polynomials ``P_0 .. P_nmax`` at ``x``.

    Returns an array of shape ``(nmax + 1,) + np.shape(x)``.
    """
    _check_jacobi_params(alpha, beta)
    if nmax < 0:
        raise DomainError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    ab = alpha + beta
    out[1] = (alpha + 1.0) + 0.5 * (ab + 2.0) * (x - 1.0)
    for n in range(2, nmax + 1):
        s = 2.0 * n + ab
        a1 = 2.0 * n * (n + ab) * (s - 2.0)
        a2 = (s - 1.0) * (alpha * alpha - beta * beta)
        a3 = (s - 1.0) * s * (s - 2.0)
        a4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * s
        out[n] = ((a2 + a3 * x) * out[n - 1] - a4 * out[n - 2]) / a1
    return out


def jacobi_p(n: int, alpha: float, beta: float, x):
    """Jacobi polynomial ``P_n^{(alpha, beta)}(x)`` by three-term recurrence."""
    out = jacobi_table(n, alpha, beta, x)[n]
    return float(out) if out.ndim == 0 else out


def _check_bottom(b: Sequence[float]) -> None:
    for v in b:
        if _is_nonpositive_integer(v):
            raise PoleError(f"denominator parameter {v} is a non-positive integer")


def hyp_pfq(a: Sequence[float], b: Sequence[float], z: float, tol: float = DEFAULT_TOL,
            max_terms: int = MAX_TERMS, raise_on_budget: bool = True) -> SeriesEvaluation:
    """Generalized hypergeometric series ``pFq(a; b; z)`` for real ``z``.

    Terms are added until the geometric tail estimate falls below ``tol``.
    On the unit circle the series is accepted only when
    ``sum(b) - sum(a) > 0``, in which case terms decay algebraically and the
    tail is estimated from that power law.

    Raises
    ------
    RegionOfConvergenceError
        ``|z| > 1`` (or ``|z| == 1`` without parameter excess), or
        ``p > q + 1`` with ``z != 0``.
    PoleError
        A bottom parameter is a non-positive integer.
    ConvergenceError
        ``max_terms`` exhausted (only if ``raise_on_budget``).
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    z = float(z)
    _check_bottom(b)
    excess = sum(b) - sum(a)
    if z != 0.0:
        if len(a) > len(b) + 1 and not any(_is_nonpositive_integer(v) for v in a):
            raise RegionOfConvergenceError("pFq with p > q + 1 diverges for z != 0")
        if len(a) == len(b) + 1:
            if abs(z) > 1.0:
                raise RegionOfConvergenceError(f"|z| = {abs(z)} > 1: series diverges")
            if abs(z) == 1.0 and not excess > 0:
                raise RegionOfConvergenceError("|z| = 1 requires sum(b) - sum(a) > 0")

    terms = [1.0]
    term = 1.0
    bound = math.inf
    on_circle = abs(z) == 1.0 and len(a) == len(b) + 1
    for m in range(max_terms):
        ratio = z / (m + 1.0)
        for v in a:
            ratio *= v + m
        for v in b:
            ratio /= v + m
        nxt = term * ratio
        if nxt == 0.0:
            bound = 0.0
            break
        local = abs(_term_ratio(a, b, z, m + 1))
        if on_circle:
            bound = abs(nxt) * (m + 1.0) / excess if local < 1.0 else math.inf
        else:
            rho = max(local, abs(z)) if len(a) == len(b) + 1 else local
            bound = abs(nxt) / (1.0 - rho) if rho < 1.0 else math.inf
        terms.append(nxt)
        if bound <= tol:
            break
        term = nxt
    converged = bound <= tol
    if not converged and raise_on_budget:
        raise ConvergenceError(f"hyp_pfq: {max_terms} terms exhausted, tail estimate {bound:.3e}")
    return SeriesEvaluation(math.fsum(terms), len(terms), float(bound), converged)


def _term_ratio(a, b, z, m):
    ratio = z / (m + 1.0)
    for v in a:
        ratio *= v + m
    for v in b:
        ratio /= v + m
    return ratio


def check_kdf_region(params: KdfParams, x: float, y: float) -> None:
    """Raise :class:`RegionOfConvergenceError` unless ``(x, y)`` lies strictly
    inside the region of convergence given by the Horn conditions.

    Boundary points are refused.
    """
    p, q, k, l, m, n = params.orders
    ax, ay = abs(x), abs(y)
    if p + q < l + m + 1 and p + k < l + n + 1:
        return
    if p + q == l + m + 1 and p + k == l + n + 1:
        if p <= l:
            if max(ax, ay) < 1.0:
                return
            raise RegionOfConvergenceError(
                f"max(|x|, |y|) = {max(ax, ay)} must be < 1 (p + q = l + m + 1, p + k = l + n + 1, p <= l)"
            )
        e = 1.0 / (p - l)
        if ax ** e + ay ** e < 1.0:
            return
        raise RegionOfConvergenceError(
            f"|x|^(1/{p - l}) + |y|^(1/{p - l}) = {ax ** e + ay ** e} must be < 1 (p > l)"
        )
    if x == 0.0 and y == 0.0:
        return
    raise RegionOfConvergenceError(
        f"orders (p,q,k,l,m,n) = {(p, q, k, l, m, n)} are not covered by the convergence conditions"
    )


def _log_pochhammer_run(tops, bots, z, count, factorial=True):
    """log|v_j| and sign(v_j) for v_j = prod(tops)_j / prod(bots)_j * z^j [/ j!],
    j = 0 .. count - 1."""
    j = np.arange(count - 1, dtype=float)
    ratio = np.full(count - 1, float(z))
    for t in tops:
        ratio *= t + j
    for s in bots:
        ratio /= s + j
    if factorial:
        ratio /= j + 1.0
    with np.errstate(divide="ignore"):
        logs = np.concatenate(([0.0], np.cumsum(np.log(np.abs(ratio)))))
    signs = np.concatenate(([1.0], np.cumprod(np.sign(ratio))))
    return logs, signs


def kdf(params: KdfParams, x: float, y: float, tol: float = DEFAULT_TOL,
        max_shells: int = MAX_TERMS, raise_on_budget: bool = True) -> SeriesEvaluation:
    r"""Kampe de Feriet function :math:`F^{p:q:k}_{l:m:n}[\ldots | x, y]`.

    The double sum over ``(r, s)`` is accumulated in square shells
    ``max(r, s) = N``. The tail is estimated geometrically from the ratio of
    consecutive shell magnitudes.
    """
    x = float(x)
    y = float(y)
    check_kdf_region(params, x, y)
    p, q, k, l, m, n = params.orders
    asymptotic = max(abs(x), abs(y)) if (p + q == l + m + 1 and p + k == l + n + 1 and p <= l) else 0.0

    shell_sums: list[float] = []
    prev_mag = None
    bound = math.inf
    size = 64
    shell = 0
    while True:
        la, sa = _log_pochhammer_run(params.a_top, params.alpha_bot, 1.0, 2 * size + 1, factorial=False)
        lb, sb = _log_pochhammer_run(params.b_row, params.beta_bot, x, size + 1)
        lc, sc = _log_pochhammer_run(params.c_row, params.gamma_bot, y, size + 1)
        while shell <= size:
            N = shell
            with np.errstate(under="ignore", over="ignore"):
                row = sa[N:2 * N + 1] * sb[N] * sc[: N + 1] * np.exp(la[N:2 * N + 1] + lb[N] + lc[: N + 1])
                col = sa[N:2 * N] * sb[:N] * sc[N] * np.exp(la[N:2 * N] + lb[:N] + lc[N])
            total = float(row.sum() + col.sum())
            mag = float(np.abs(row).sum() + np.abs(col).sum())
            if not math.isfinite(mag):
                raise ConvergenceError("kdf: shell magnitude overflowed")
            shell_sums.append(total)
            shell += 1
            if N >= 1:
                if mag == 0.0:
                    bound = 0.0
                elif prev_mag:
                    L = max(mag / prev_mag, asymptotic)
                    bound = mag * L / (1.0 - L) if L < 1.0 else math.inf
                if N >= 3 and bound <= tol:
                    return SeriesEvaluation(math.fsum(shell_sums), shell * shell, float(bound), True)
            prev_mag = mag
            if shell > max_shells:
                if raise_on_budget:
                    raise ConvergenceError(f"kdf: {max_shells} shells exhausted, tail estimate {bound:.3e}")
                return SeriesEvaluation(math.fsum(shell_sums), shell * shell, float(bound), False)
        size *= 2
