"""Mean-field theory of the pheromone-ratio dynamics.

In magnetization variables M(k) = 2 alpha (Z(k) - 1/2) the colony is
approximated by the multivariate Ornstein-Uhlenbeck process

    dM(k) = (r / D(t)) [-(1 - alpha) M(k) + alpha (h + 2J/(N-1) sum_{l!=k} M(l))] dt
            + (alpha r / D(t)) dW(k),

which is gradient flow on the quadratic potential U({M}). The integrator uses
Euler-Maruyama with unit steps (one ant per unit time) and clamps M to
[-alpha, alpha] after each step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError
from .ising import IsingParams, energy_from_spin_sum
from .refnet import GrowthParams, total_popularity


@dataclass(frozen=True)
class TheoryPoint:
    alpha: float
    m_star: float
    alpha_s: float
    alpha_c: float
    potential_curvature: float

    @property
    def unstable(self) -> bool:
        """True above alpha_c, where +-alpha replace m_star as the stable states."""
        return self.alpha > self.alpha_c


def theory_point(coupling: float, field: float, alpha: float) -> TheoryPoint:
    """Minimum m_star of u(m) = (1 - alpha(1+2J)) m^2 / 2 - alpha h m, and thresholds.

    m_star = alpha h / (1 - alpha (1 + 2J)) below alpha_s = (1 - h/2) / (1 + 2J)
    and alpha from alpha_s on; alpha_c = 1 / (1 + 2J).
    """
    if not 0.0 <= alpha < 1.0:
        raise ConfigurationError(f"alpha must satisfy 0 <= alpha < 1, got {alpha}")
    if not coupling > 0.0:
        raise ConfigurationError(f"coupling must be positive, got {coupling}")
    alpha_c = 1.0 / (1.0 + 2.0 * coupling)
    alpha_s = (1.0 - field / 2.0) / (1.0 + 2.0 * coupling)
    curvature = 1.0 - alpha * (1.0 + 2.0 * coupling)
    # zero curvature falls through to the boundary branch
    if alpha < alpha_s and curvature != 0.0:
        m_star = alpha * field / curvature
    else:
        m_star = alpha
    return TheoryPoint(alpha, m_star, alpha_s, alpha_c, curvature)


def potential(m, coupling: float, field: float, alpha: float) -> float:
    """U({M}) = (1-alpha)/2 sum M^2 - alpha [h sum M + J/(N-1) sum_{k!=l} M_k M_l]."""
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[0]
    total = m.sum()
    pairs = total * total - np.dot(m, m)
    return float(0.5 * (1.0 - alpha) * np.dot(m, m)
                 - alpha * (field * total + coupling / (n - 1) * pairs))


def uniform_potential(m: float, coupling: float, field: float, alpha: float) -> float:
    """u(m) = U / N at uniform M = m, dropping the O(1/N) diagonal term."""
    return 0.5 * (1.0 - alpha * (1.0 + 2.0 * coupling)) * m * m - alpha * field * m


def potential_gradient(m, coupling: float, field: float, alpha: float) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[0]
    others = m.sum() - m
    return (1.0 - alpha) * m - alpha * (field + 2.0 * coupling / (n - 1) * others)


@njit(cache=True)
def _drift_into(m, coupling, field, alpha, out):
    n = m.shape[0]
    total = 0.0
    for k in range(n):
        total += m[k]
    c = 2.0 * coupling / (n - 1)
    for k in range(n):
        out[k] = -(1.0 - alpha) * m[k] + alpha * (field + c * (total - m[k]))


def drift(m, coupling: float, field: float, alpha: float) -> np.ndarray:
    """Drift per unit rate r/D(t); equals minus the gradient of U."""
    m = np.ascontiguousarray(m, dtype=np.float64)
    out = np.empty_like(m)
    _drift_into(m, coupling, field, alpha, out)
    return out


@dataclass(frozen=True)
class MeanFieldState:
    t: int
    magnetizations: np.ndarray


@dataclass
class Trajectory:
    times: np.ndarray
    magnetizations: np.ndarray  # (n_snapshots, N)
    seed: int

    @property
    def final(self) -> np.ndarray:
        return self.magnetizations[-1]


@njit(cache=True, nogil=True)
def _em_steps(m, t0, r, omega, coupling, field, alpha, normals, snap_every, snaps, snap_t, n_snap):
    """Advance ``m`` in place by ``normals.shape[0]`` unit steps starting at time t0."""
    n = m.shape[0]
    d = np.empty(n)
    t = t0
    base = omega * r * (r + 1) / 2.0
    for step in range(normals.shape[0]):
        rate = r / (r * t * (1.0 + omega) - base)
        _drift_into(m, coupling, field, alpha, d)
        for k in range(n):
            v = m[k] + rate * d[k] + alpha * rate * normals[step, k]
            if v > alpha:
                v = alpha
            elif v < -alpha:
                v = -alpha
            m[k] = v
        t += 1
        if snap_every > 0 and t % snap_every == 0:
            snaps[n_snap, :] = m
            snap_t[n_snap] = t
            n_snap += 1
    return n_snap


def sde_step(state: MeanFieldState, ising: IsingParams, growth: GrowthParams, alpha: float,
             rng: np.random.Generator) -> MeanFieldState:
    """One Euler-Maruyama step from t to t + 1 (one ant)."""
    r = growth.in_degree
    if state.t < r + 1:
        raise ValueError(f"t must be >= r + 1 = {r + 1}")
    rate = r / total_popularity(growth, state.t)
    m = np.asarray(state.magnetizations, dtype=np.float64)
    new = m + rate * drift(m, ising.coupling, ising.field, alpha) \
        + alpha * rate * rng.standard_normal(m.shape[0])
    return MeanFieldState(state.t + 1, np.clip(new, -alpha, alpha))


def initial_magnetizations(ising: IsingParams, growth: GrowthParams, alpha: float,
                           rng: np.random.Generator) -> np.ndarray:
    """M(k, r+1) from r + 1 fair-coin ants, Boltzmann weighted as the colony would see them.

    Draws the same (r + 1, N) uniform block as the colony's founding ants, so
    equal seeds give equal starting points.
    """
    r, n = growth.in_degree, ising.n_spins
    x = rng.random((r + 1, n)) < 0.5
    s = 2 * x.sum(axis=1) - n
    lw = -np.array([energy_from_spin_sum(int(v), n, ising.coupling, ising.field) for v in s])
    w = np.exp(lw - lw.max())
    z = (w[:, None] * x).sum(axis=0) / w.sum()
    return 2.0 * alpha * (z - 0.5)


def integrate(ising: IsingParams, growth: GrowthParams, alpha: float, n_ants: int, seed: int,
              *, init: str = "colony", snapshot_every: int | None = None,
              chunk: int = 4096) -> Trajectory:
    """Integrate from t = r + 1 to t = n_ants.

    ``init`` is ``"colony"`` (founding-ant estimate) or ``"zero"``. Snapshots
    are taken every ``snapshot_every`` ants (default n_ants // 1000) plus the
    initial and final states.
    """
    r, n = growth.in_degree, ising.n_spins
    if n_ants < r + 2:
        raise ConfigurationError(f"n_ants must be >= r + 2 = {r + 2}, got {n_ants}")
    if not 0.0 <= alpha < 1.0:
        raise ConfigurationError(f"alpha must satisfy 0 <= alpha < 1, got {alpha}")
    rng = np.random.default_rng(seed)
    if init == "colony":
        m = initial_magnetizations(ising, growth, alpha, rng)
    elif init == "zero":
        m = np.zeros(n)
    else:
        raise ConfigurationError(f"unknown init {init!r}")
    every = snapshot_every or max(1, n_ants // 1000)
    cap = (n_ants // every) + 2
    snaps = np.empty((cap, n))
    snap_t = np.empty(cap, dtype=np.int64)
    snaps[0], snap_t[0], n_snap = m, r + 1, 1
    t = r + 1
    while t < n_ants:
        steps = min(chunk, n_ants - t)
        normals = rng.standard_normal((steps, n))
        n_snap = _em_steps(m, t, r, float(growth.asymmetry), float(ising.coupling),
                           float(ising.field), float(alpha), normals, every, snaps, snap_t, n_snap)
        t += steps
    if snap_t[n_snap - 1] != n_ants:
        snaps[n_snap], snap_t[n_snap] = m, n_ants
        n_snap += 1
    return Trajectory(snap_t[:n_snap].copy(), snaps[:n_snap].copy(), int(seed))


def stationary_density_lattice(m, coupling: float, field: float, alpha: float, r: int) -> float:
    """Unnormalized exp(-U({m}) / (2 alpha^2 / (r+1)^2)) for the omega = -1 lattice.

    Diagnostic only: the exponent scale is taken as published and is not the
    stationary variance of the integrator (see :func:`ou_stationary_variance`).
    """
    theta = 2.0 * alpha ** 2 / (r + 1) ** 2
    return math.exp(-potential(m, coupling, field, alpha) / theta)


def ou_stationary_variance(r: int, coupling: float, alpha: float) -> float:
    """b^2 / (2 a c) for the decoupled lattice OU process.

    a = 2 / (r + 1) is the lattice rate r / D, b = alpha a the noise amplitude
    and c = 1 - alpha (1 + 2J) the potential curvature.
    """
    a = 2.0 / (r + 1)
    b = alpha * a
    c = 1.0 - alpha * (1.0 + 2.0 * coupling)
    return b * b / (2.0 * a * c)
