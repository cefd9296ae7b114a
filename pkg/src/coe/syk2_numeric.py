"""Monte Carlo estimate of eigenstate capacity in the quadratic complex SYK model.

A realization draws a GUE hopping matrix ``M`` on ``V`` sites and
diagonalizes it once. Many-body eigenstates are Slater determinants labelled
by an occupation pattern of the single-particle eigenmodes; for each sampled
pattern the restricted one-body correlation matrix on the first ``V_A`` sites
gives the capacity, entanglement entropy and second Renyi entropy.

Random streams are keyed by ``(seed, realization)`` so results do not depend
on how realizations are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericalError
from .measures import ModeMeasures, capacity, entropy, renyi2
from .syk2_analytic import coe_coefficient

__all__ = [
    "HermitianMatrix",
    "EigenSystem",
    "Occupation",
    "EnsembleStats",
    "FitError",
    "CLAMP_TOL",
    "sample_gue",
    "eigh",
    "sample_occupation",
    "correlation_matrix",
    "eigenstate_measures",
    "ensemble_average",
    "fit_inverse_square",
    "deficit_and_fit",
]

CLAMP_TOL = 1e-10
HERMITIAN_TOL = 1e-14

# stream labels within one realization
_HAMILTONIAN_STREAM = 0
_OCCUPATION_STREAM = 1


class FitError(DomainError):
    """Too few, or degenerate, points for a least-squares fit."""


@dataclass(frozen=True)
class HermitianMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DomainError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("matrix entries must be finite")
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
            raise DomainError("matrix is not Hermitian")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Ascending single-particle energies and eigenvectors (columns of ``modes``)."""

    energies: np.ndarray
    modes: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.shape[0]


@dataclass(frozen=True)
class Occupation:
    """``+1`` for a filled eigenmode, ``-1`` for an empty one."""

    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs)
        if s.ndim != 1 or s.size < 1 or not np.all((s == 1) | (s == -1)):
            raise DomainError("occupation signs must be a non-empty vector of +-1")
        object.__setattr__(self, "signs", s.astype(np.int8))

    @property
    def filling(self) -> float:
        return float(np.mean(self.signs == 1))


@dataclass(frozen=True)
class EnsembleStats:
    """Sample mean and variance of a per-eigenstate quantity.

    ``std_error`` treats all ``n_realizations * n_states`` draws as
    independent.
    """

    mean: float
    variance: float
    std_error: float
    n_realizations: int
    n_states: int
    seed: int

    def __post_init__(self):
        if self.variance < 0:
            raise DomainError("variance must be non-negative")
        if self.n_realizations < 1 or self.n_states < 1:
            raise DomainError("counts must be positive")

    @classmethod
    def from_samples(cls, samples: np.ndarray, n_realizations: int, n_states: int, seed: int) -> "EnsembleStats":
        samples = np.asarray(samples, dtype=float).ravel()
        n = samples.size
        mean = float(np.mean(samples))
        variance = float(np.var(samples, ddof=1)) if n > 1 else 0.0
        return cls(mean, variance, math.sqrt(variance / n), n_realizations, n_states, seed)


def _stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2 ** 64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _gue(V: int, rng: np.random.Generator) -> np.ndarray:
    sd = math.sqrt(1.0 / V)
    re = rng.normal(0.0, sd, (V, V))
    im = rng.normal(0.0, sd, (V, V))
    upper = np.triu(re + 1j * im, 1)
    diag = rng.normal(0.0, math.sqrt(2.0 / V), V)
    return upper + upper.conj().T + np.diag(diag)


def sample_gue(V: int, rng_seed: int) -> HermitianMatrix:
    """GUE matrix: off-diagonal real and imaginary parts have variance
    ``1/V``, diagonal entries variance ``2/V``; the spectrum fills
    ``[-2 sqrt(2), 2 sqrt(2)]`` for large ``V``."""
    if V < 1:
        raise DomainError("V must be positive")
    return HermitianMatrix(_gue(V, _stream(rng_seed)))


def eigh(M: HermitianMatrix) -> EigenSystem:
    try:
        w, U = np.linalg.eigh(M.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    return EigenSystem(w, U)


def _occupations(V: int, n: int, half_filled: bool, rng: np.random.Generator) -> np.ndarray:
    if half_filled:
        if V % 2:
            raise DomainError(f"half filling needs an even number of sites, got V={V}")
        # ranks of iid uniforms give a uniformly random subset of size V/2
        ranks = np.argsort(rng.random((n, V)), axis=1)
        return np.where(ranks < V // 2, 1, -1).astype(np.int8)
    return np.where(rng.random((n, V)) < 0.5, 1, -1).astype(np.int8)


def sample_occupation(V: int, half_filled: bool, rng_seed: int) -> Occupation:
    if V < 1:
        raise DomainError("V must be positive")
    return Occupation(_occupations(V, 1, half_filled, _stream(rng_seed))[0])


def _check_block(es: EigenSystem, V_A: int) -> None:
    if not 1 <= V_A <= es.dim:
        raise DomainError(f"need 1 <= V_A <= {es.dim}, got {V_A}")


def _batched_correlations(modes: np.ndarray, signs: np.ndarray, V_A: int) -> np.ndarray:
    # J_ij = sum_p N_p conj(U_ip) U_jp = (W diag(N) W^H)_ij with W = conj(U[:V_A])
    # as one product: rows of signs times K[p, (i, j)] = W_ip conj(W_jp)
    W = modes[:V_A].conj()
    K = (W.T[:, :, None] * W.T.conj()[:, None, :]).reshape(modes.shape[0], V_A * V_A)
    J = (signs.astype(float) @ K).reshape(-1, V_A, V_A)
    return 0.5 * (J + J.conj().transpose(0, 2, 1))


def correlation_matrix(es: EigenSystem, occ: Occupation, V_A: int) -> HermitianMatrix:
    """Restricted correlation matrix ``2<c_i^dag c_j> - delta_ij`` on the first
    ``V_A`` sites; its eigenvalues lie in ``[-1, 1]``."""
    _check_block(es, V_A)
    if occ.signs.size != es.dim:
        raise DomainError("occupation length does not match the number of modes")
    return HermitianMatrix(_batched_correlations(es.modes, occ.signs[None, :], V_A)[0])


def _spectrum_measures(lam: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Summed (coe, ee, renyi2) over the last axis of a batch of spectra."""
    if np.any(np.abs(lam) > 1.0 + CLAMP_TOL):
        raise DomainError(f"correlation spectrum leaves [-1, 1] by more than {CLAMP_TOL}")
    lam = np.clip(lam, -1.0, 1.0)
    return (
        np.sum(capacity(lam), axis=-1),
        np.sum(entropy(lam), axis=-1),
        np.sum(renyi2(lam), axis=-1),
    )


def eigenstate_measures(J: HermitianMatrix) -> ModeMeasures:
    """Capacity, entanglement entropy and second Renyi entropy of the
    Gaussian state with restricted correlation matrix ``J``."""
    lam = np.linalg.eigvalsh(J.entries)
    c, e, r = _spectrum_measures(lam)
    return ModeMeasures(float(c), float(e), float(r))


def _realization(V: int, V_A: int, n_states: int, half_filled: bool, seed: int, index: int) -> np.ndarray:
    """Per-state measures for one Hamiltonian realization, shape ``(3, n_states)``."""
    M = _gue(V, _stream(seed, index, _HAMILTONIAN_STREAM))
    es = eigh(HermitianMatrix(M))
    occ = _occupations(V, n_states, half_filled, _stream(seed, index, _OCCUPATION_STREAM))
    lam = np.linalg.eigvalsh(_batched_correlations(es.modes, occ, V_A))
    return np.stack(_spectrum_measures(lam))


def ensemble_average(V: int, V_A: int, n_realizations: int, n_states: int, half_filled: bool = True,
                     rng_seed: int = 0, n_jobs: int = 1) -> tuple[EnsembleStats, EnsembleStats, EnsembleStats]:
    """Eigenstate-averaged ``(coe, ee, renyi2)`` over GUE realizations.

    Each realization is diagonalized once and reused for ``n_states``
    sampled occupation patterns. ``half_filled`` restricts sampling to
    eigenstates with ``V/2`` particles, the sector the thermodynamic-limit
    coefficients describe. Results are identical for any ``n_jobs``.
    """
    if V < 1 or not 1 <= V_A <= V:
        raise DomainError(f"need 1 <= V_A <= V, got V={V}, V_A={V_A}")
    if n_realizations < 1 or n_states < 1:
        raise DomainError("n_realizations and n_states must be positive")
    if half_filled and V % 2:
        raise DomainError(f"half filling needs an even number of sites, got V={V}")
    if n_jobs < 1:
        raise DomainError("n_jobs must be positive")

    def work(r):
        return _realization(V, V_A, n_states, half_filled, rng_seed, r)

    if n_jobs == 1:
        blocks = [work(r) for r in range(n_realizations)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            blocks = list(pool.map(work, range(n_realizations)))
    data = np.concatenate(blocks, axis=1)
    return tuple(
        EnsembleStats.from_samples(row, n_realizations, n_states, rng_seed) for row in data
    )


def fit_inverse_square(V: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``values ~ a0 / V^2 + a1``; returns ``(a0, a1)``."""
    V = np.asarray(V, dtype=float)
    values = np.asarray(values, dtype=float)
    if V.shape != values.shape or V.ndim != 1:
        raise FitError("V and values must be one-dimensional and of equal length")
    if np.unique(V).size < 3:
        raise FitError("need at least 3 distinct system sizes")
    if np.any(V <= 0):
        raise FitError("system sizes must be positive")
    a0, a1 = np.polyfit(1.0 / V ** 2, values, 1)
    return float(a0), float(a1)


def deficit_and_fit(points: Sequence[tuple[int, EnsembleStats]], f: float) -> tuple[list[float], float, float]:
    """Deficits ``|s(f) - mean / V_A|`` with ``V_A = round(f V)`` and their
    ``a0 / V^2 + a1`` fit."""
    if len(points) < 3:
        raise FitError("need at least 3 points")
    s = coe_coefficient(f)
    Vs, deficits = [], []
    for V, stats in points:
        V_A = int(round(f * V))
        if V_A < 1:
            raise DomainError(f"f * V rounds to zero for V={V}")
        Vs.append(V)
        deficits.append(abs(s - stats.mean / V_A))
    a0, a1 = fit_inverse_square(Vs, deficits)
    return deficits, a0, a1
