"""Per-mode entanglement measures of a single fermionic mode.

A mode is parametrized by ``x`` in ``[-1, 1]`` (eigenvalue of the restricted
complex structure or of ``2<c^dag c> - 1``); the occupation probability is
``u = (1 + x) / 2``. All functions are even in ``x`` and vanish at
``|x| = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import DomainError

__all__ = [
    "ModeMeasures",
    "capacity",
    "entropy",
    "renyi2",
    "capacity_u",
    "mode_measures",
]


@dataclass(frozen=True)
class ModeMeasures:
    """Capacity, von Neumann entropy and second Renyi entropy."""

    coe: float
    ee: float
    renyi2: float


def _check_range(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0) or np.any(np.isnan(x)):
        raise DomainError("mode parameter must lie in [-1, 1]")
    return x


def capacity(x):
    """``(1 - x^2)/4 * ln^2((1 + x)/(1 - x))``, written as ``(1 - x^2) artanh^2 x``."""
    x = _check_range(x)
    inside = np.abs(x) < 1.0
    xi = np.where(inside, x, 0.0)
    out = np.where(inside, (1.0 - xi * xi) * np.arctanh(xi) ** 2, 0.0)
    return out if out.ndim else float(out)


def entropy(x):
    x = _check_range(x)
    p = 0.5 * (1.0 + x)
    q = 0.5 * (1.0 - x)
    out = -(xlogy(p, p) + xlogy(q, q))
    return out if out.ndim else float(out)


def renyi2(x):
    x = _check_range(x)
    # p^2 + q^2 = (1 + x^2)/2
    out = -np.log1p(x * x) + np.log(2.0)
    return out if out.ndim else float(out)


def capacity_u(u):
    """Capacity in occupation form ``u (1 - u) ln^2((1 - u)/u)``."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise DomainError("occupation must lie in [0, 1]")
    inside = (u > 0.0) & (u < 1.0)
    ui = np.where(inside, u, 0.5)
    out = np.where(inside, ui * (1.0 - ui) * (np.log1p(-ui) - np.log(ui)) ** 2, 0.0)
    return out if out.ndim else float(out)


def mode_measures(x: float) -> ModeMeasures:
    """All three measures for a single mode."""
    if np.ndim(x) != 0:
        raise DomainError("mode_measures takes a scalar; use capacity/entropy/renyi2 for arrays")
    return ModeMeasures(capacity(x), entropy(x), renyi2(x))
