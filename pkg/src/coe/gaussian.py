"""Average eigenstate capacity over fermionic Gaussian states.

The restricted complex structure of a Haar-random Gaussian state on ``V``
modes has ``V_A`` eigenvalue pairs ``+-i x``; the ``x`` form a determinantal
process on ``[0, 1]`` with the weighted Jacobi kernel built here. The
average capacity is available as an exact finite sum (multi-precision), as
a quadrature of the density, and by Monte Carlo over Haar samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from .errors import DomainError, PrecisionError
from .measures import capacity
from .quadrature import integrate_1d
from .specfun import jacobi_table
from .syk2_analytic import CoefficientCurve

__all__ = [
    "Bipartition",
    "SpectrumSample",
    "theta_basis",
    "density_rho",
    "kernel",
    "avg_coe_exact",
    "avg_coe_oracle",
    "variance_coe",
    "haar_sample_spectrum",
    "haar_sample_spectra",
    "page_curve",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class Bipartition:
    """``V`` modes split into a subsystem of ``V_A`` modes and its complement."""

    V: int
    V_A: int

    def __post_init__(self):
        if int(self.V) != self.V or int(self.V_A) != self.V_A:
            raise DomainError("V and V_A must be integers")
        object.__setattr__(self, "V", int(self.V))
        object.__setattr__(self, "V_A", int(self.V_A))
        if self.V < 1 or not 1 <= self.V_A <= self.V:
            raise DomainError(f"need 1 <= V_A <= V, got V={self.V}, V_A={self.V_A}")

    @property
    def f(self) -> float:
        return self.V_A / self.V

    @property
    def Delta(self) -> int:
        return self.V - 2 * self.V_A

    def complement(self) -> "Bipartition":
        if self.V_A == self.V:
            raise DomainError("the complement of the full system is empty")
        return Bipartition(self.V, self.V - self.V_A)

    def reduced(self) -> "Bipartition":
        """The smaller of the two sides (``Delta >= 0``).

        Pure-state spectra of complementary subsystems agree apart from
        trivially pure modes, which carry no capacity.
        """
        return self if self.Delta >= 0 else self.complement()


@dataclass(frozen=True)
class SpectrumSample:
    """The ``V_A`` non-negative eigenvalue magnitudes of one restricted state."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.abs(ev) > 1.0):
            raise DomainError("spectrum entries must lie in [-1, 1]")
        object.__setattr__(self, "eigenvalues", ev)

    def capacity(self) -> float:
        return float(np.sum(capacity(self.eigenvalues)))


def _require_delta(bp: Bipartition) -> None:
    if bp.Delta < 0:
        raise DomainError(f"Delta = V - 2 V_A = {bp.Delta} < 0; use bp.reduced()")


def _log_norms(bp: Bipartition) -> np.ndarray:
    """log c_k for k = 0 .. V_A - 1."""
    D = bp.Delta
    n = 2.0 * np.arange(bp.V_A)
    return (
        2 * D * LN2
        + 2 * special.gammaln(n + D + 1)
        - special.gammaln(n + 1)
        - special.gammaln(n + 2 * D + 1)
        - np.log(2 * n + 2 * D + 1)
    )


def theta_basis(x, bp: Bipartition) -> np.ndarray:
    r"""Orthonormal functions ``theta_j(x) = (1-x^2)^{Delta/2} P_{2j}(x) / sqrt(c_j)``
    on ``[0, 1]`` for ``j < V_A``; shape ``(V_A,) + x.shape``."""
    _require_delta(bp)
    x = np.asarray(x, dtype=float)
    D = bp.Delta
    P = jacobi_table(2 * (bp.V_A - 1), D, D, x)[::2]
    scale = np.exp(-0.5 * _log_norms(bp)).reshape((-1,) + (1,) * x.ndim)
    weight = np.clip(1.0 - x * x, 0.0, None) ** (0.5 * D) if D else np.ones_like(x)
    return P * scale * weight


def _check_unit_interval(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("argument must lie in [0, 1]")
    return x


def density_rho(x, bp: Bipartition):
    """One-point density of the restricted spectrum on ``[0, 1]`` (unit mass)."""
    x = _check_unit_interval(x)
    out = np.sum(theta_basis(x, bp) ** 2, axis=0) / bp.V_A
    return out if out.ndim else float(out)


def kernel(x1, x2, bp: Bipartition):
    """Projection kernel ``sum_j theta_j(x1) theta_j(x2)``; its diagonal is
    ``V_A * density_rho``."""
    x1, x2 = np.broadcast_arrays(_check_unit_interval(x1), _check_unit_interval(x2))
    out = np.sum(theta_basis(x1, bp) * theta_basis(x2, bp), axis=0)
    return out if out.ndim else float(out)


def default_precision(V_A: int) -> int:
    # cancellation grows by about 10 bits per mode at half filling
    return 64 + 10 * V_A


def _exact_sum(bp: Bipartition, bits: int) -> tuple[float, float]:
    """(value, bits lost to cancellation) of the finite triple sum."""
    D, VA = bp.Delta, bp.V_A
    ctx = mpmath.MPContext()
    ctx.prec = bits

    qmax = 4 * (VA - 1)
    # psi(q + D + 2) - psi(D + 2) and trigamma(q + D + 2), q = 0 .. qmax
    dpsi = [ctx.zero]
    for q in range(1, qmax + 1):
        dpsi.append(dpsi[-1] + ctx.one / (q + D + 1))
    tri = [ctx.pi ** 2 / 6 - ctx.fsum(ctx.one / ctx.mpf(i * i) for i in range(1, D + 2))]
    for q in range(1, qmax + 1):
        tri.append(tri[-1] - ctx.one / ctx.mpf((q + D + 1) ** 2))
    g2 = [
        ctx.mpf(math.factorial(q + D + 1)) / math.factorial(q + 2 * D + 3)
        * (dpsi[q] ** 2 + tri[q] + tri[0])
        for q in range(qmax + 1)
    ]

    total = ctx.zero
    magnitude = ctx.zero
    for j in range(VA):
        n = 2 * j
        g1 = [
            (-1) ** p * math.comb(n, p) * (math.factorial(n + p + 2 * D) // math.factorial(p + D))
            for p in range(n + 1)
        ]
        # the double sum over (k, m) only depends on k + m: exact integer convolution
        conv = [0] * (2 * n + 1)
        for k, gk in enumerate(g1):
            for m, gm in enumerate(g1):
                conv[k + m] += gk * gm
        pref = ctx.mpf(2 * D + 4 * j + 1) * math.factorial(D + 1) / (
            ctx.mpf(math.factorial(n)) * math.factorial(n + 2 * D)
        )
        terms = [pref * c * g2[q] for q, c in enumerate(conv)]
        total += ctx.fsum(terms)
        magnitude += ctx.fsum(abs(t) for t in terms)
    if total <= 0:
        return float(total), math.inf
    return float(total), float(ctx.log(magnitude / total, 2))


def avg_coe_exact(bp: Bipartition, precision_bits: int | None = None) -> float:
    """Average capacity ``<C_A>`` from the exact finite triple sum.

    The alternating inner sums are combined exactly in integers; the
    digamma/trigamma weights are accumulated with ``precision_bits`` of
    mantissa (default :func:`default_precision`). Subsystems larger than
    half the system are mapped to their complement.

    Raises
    ------
    PrecisionError
        If the estimated cancellation exceeds ``precision_bits - 40`` bits.
    """
    bp = bp.reduced()
    bits = default_precision(bp.V_A) if precision_bits is None else int(precision_bits)
    if bits < 1:
        raise DomainError("precision_bits must be positive")
    value, loss = _exact_sum(bp, bits)
    if loss > bits - 40:
        raise PrecisionError(
            f"cancellation of {loss:.1f} bits exceeds budget {bits - 40} (precision_bits={bits})"
        )
    return value


def avg_coe_oracle(bp: Bipartition, tol: float = 1e-12) -> float:
    """``V_A * int_0^1 c(x) rho(x) dx`` by adaptive quadrature."""
    bp = bp.reduced()
    res = integrate_1d(lambda x: capacity(x) * density_rho(x, bp), 0.0, 1.0, tol / bp.V_A)
    return bp.V_A * res.value


def variance_coe(bp: Bipartition, tol: float = 1e-12) -> float:
    r"""Variance of ``C_A`` over Haar-random Gaussian states.

    Uses the determinantal two-point function:
    ``int c^2 K(x,x) - iint c(x) c(y) K(x,y)^2``. The double integral is
    the squared Frobenius norm of ``M_ij = int c theta_i theta_j``, so a
    single vector-valued 1D quadrature suffices.
    """
    bp = bp.reduced()
    VA = bp.V_A
    iu, ju = np.triu_indices(VA)

    def integrand(x):
        th = theta_basis(x, bp)
        c = capacity(x)
        diag = c * c * np.sum(th * th, axis=0)
        pairs = c * th[iu] * th[ju]
        return np.concatenate([diag[:, None], pairs.T], axis=1)

    res = integrate_1d(integrand, 0.0, 1.0, tol)
    first = res.value[0]
    M = np.zeros((VA, VA))
    M[iu, ju] = res.value[1:]
    M[ju, iu] = res.value[1:]
    return float(first - np.sum(M * M))


def _haar_rng(rng_seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(rng_seed))))


def haar_sample_spectra(bp: Bipartition, n_samples: int, rng_seed: int, batch_size: int = 500) -> np.ndarray:
    """``n_samples`` restricted spectra, shape ``(n_samples, V_A)``, ascending rows.

    Each sample conjugates the reference complex structure by a Haar
    orthogonal matrix of size ``2V`` (QR of a Gaussian matrix with the sign
    of ``diag(R)`` fixed) and diagonalizes the ``2V_A`` block.
    """
    rng = _haar_rng(rng_seed)
    V, VA = bp.V, bp.V_A
    J0 = np.kron(np.eye(V), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    out = np.empty((n_samples, VA))
    done = 0
    while done < n_samples:
        b = min(batch_size, n_samples - done)
        G = rng.standard_normal((b, 2 * V, 2 * V))
        Q, R = np.linalg.qr(G)
        Q = Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]
        QA = Q[:, : 2 * VA, :]
        JA = QA @ J0 @ QA.transpose(0, 2, 1)
        ev = np.linalg.eigvalsh(1j * JA)[:, VA:]
        out[done:done + b] = np.clip(ev, 0.0, 1.0)
        done += b
    return out


def haar_sample_spectrum(bp: Bipartition, rng_seed: int) -> SpectrumSample:
    """One Haar-random restricted spectrum."""
    return SpectrumSample(haar_sample_spectra(bp, 1, rng_seed)[0])


def page_curve(V: int, precision_bits: int | None = None) -> CoefficientCurve:
    """``<C_A> / (V ln 2)`` for ``V_A = 1 .. V - 1``."""
    if V < 2:
        raise DomainError("page curve needs V >= 2")
    half = {VA: avg_coe_exact(Bipartition(V, VA), precision_bits) for VA in range(1, V // 2 + 1)}
    VAs = np.arange(1, V)
    values = np.array([half[min(VA, V - VA)] for VA in VAs]) / (V * LN2)
    return CoefficientCurve(f_grid=VAs / V, coe=values)
