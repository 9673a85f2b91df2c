"""Infinite-range (complete graph) Ising model on binary choices X(i) in {0,1}.

Spins are sigma(i) = 2 X(i) - 1. The energy is

    E = -h sum_i sigma_i - J/(N-1) sum_{i != j} sigma_i sigma_j

and is evaluated through the spin sum s = sum_i sigma_i, using
sum_{i != j} sigma_i sigma_j = s**2 - N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError


@dataclass(frozen=True)
class IsingParams:
    n_spins: int
    coupling: float
    field: float

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise ConfigurationError(f"n_spins must be an integer >= 2, got {self.n_spins!r}")
        if not (math.isfinite(self.coupling) and math.isfinite(self.field)):
            raise ConfigurationError("coupling and field must be finite")


def _as_config(params: IsingParams, config) -> np.ndarray:
    x = np.asarray(config)
    if x.ndim != 1 or x.shape[0] != params.n_spins:
        raise ConfigurationError(
            f"configuration has shape {x.shape}, expected ({params.n_spins},)"
        )
    if not np.all((x == 0) | (x == 1)):
        raise ConfigurationError("choices must be 0 or 1")
    return x.astype(np.int64)


@njit(cache=True)
def energy_from_spin_sum(s, n, coupling, field):
    """Energy of any configuration whose spin sum is ``s``."""
    return -field * s - coupling * (s * s - n) / (n - 1)


def energy(params: IsingParams, config) -> float:
    """Energy of a binary configuration, O(N)."""
    x = _as_config(params, config)
    s = int(2 * x.sum() - x.shape[0])
    return float(energy_from_spin_sum(s, params.n_spins, params.coupling, params.field))


def magnetization(config) -> float:
    x = np.asarray(config)
    return float((2 * x.sum() - x.shape[0]) / x.shape[0])


def energy_of_magnetization(params: IsingParams, m: float) -> float:
    """Mean-field energy -N (h m + J m^2); drops the O(1) self-pair term."""
    if abs(m) > 1:
        raise ValueError(f"magnetization must lie in [-1, 1], got {m}")
    return -params.n_spins * (params.field * m + params.coupling * m * m)


def effective_field(params: IsingParams, config, k: int) -> float:
    """Local field on spin ``k``: h + 2J/(N-1) sum_{l != k} sigma_l.

    Equals minus one half of the energy change when X(k) goes from 0 to 1.
    """
    x = _as_config(params, config)
    n = params.n_spins
    if not 0 <= k < n:
        raise IndexError(f"spin index {k} out of range for N={n}")
    s_other = int(2 * x.sum() - n) - (2 * int(x[k]) - 1)
    return params.field + 2.0 * params.coupling * s_other / (n - 1)
