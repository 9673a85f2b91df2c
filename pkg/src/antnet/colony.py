"""Ant colony search for the Ising ground state over the reference network.

One ant decides per step. Ant t + 1 draws its r references, reads their
Boltzmann-weighted pheromone (weights e^{-E(s)}), forms the ratio Z(k) of
pheromone on X(k) = 1, and sets each X(k) = 1 with probability
(1 - alpha)/2 + alpha Z(k).

Random stream layout (one ``numpy.random.Generator`` per trial):

* the r + 1 founding ants: an (r + 1, N) block of uniforms, X = u < 1/2;
* every later ant: r uniforms for reference selection, then N uniforms for
  the decisions, in spin order.

The fast path (:func:`run_trial`) and the step-by-step API (:func:`step`)
consume the stream identically and share the same numba kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import refnet
from .errors import ConfigurationError, ExhaustionError
from .ising import IsingParams, energy_from_spin_sum
from .refnet import GrowthParams, NetworkState, _apply, _select


@dataclass(frozen=True)
class DecisionParams:
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ConfigurationError(f"alpha must satisfy 0 <= alpha < 1, got {self.alpha!r}")


@dataclass(frozen=True)
class AntRecord:
    """One ant's choices (bit-packed, see :meth:`unpack`) and its energy."""
    packed: bytes
    n_spins: int
    energy: float

    @property
    def log_weight(self) -> float:
        return -self.energy

    def unpack(self) -> np.ndarray:
        bits = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8))
        return bits[: self.n_spins]


@dataclass(frozen=True)
class PheromoneAggregate:
    log_total: float
    ratios: np.ndarray


@dataclass
class TrialResult:
    final_magnetizations: np.ndarray
    trial_seed: int
    trace_t: np.ndarray
    trace_energy: np.ndarray
    metadata: dict
    history: dict | None = field(default=None, repr=False)


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

@njit(cache=True)
def _aggregate(choices, energies, refs, z_out):
    """Fill z_out with Z(k) over ``refs``; return log S."""
    mx = -np.inf
    for j in range(refs.shape[0]):
        lw = -energies[refs[j]]
        if lw > mx:
            mx = lw
    n = z_out.shape[0]
    for k in range(n):
        z_out[k] = 0.0
    total = 0.0
    for j in range(refs.shape[0]):
        s = refs[j]
        w = math.exp(-energies[s] - mx)
        total += w
        for k in range(n):
            if choices[s, k]:
                z_out[k] += w
    for k in range(n):
        z_out[k] /= total
    return mx + math.log(total)


@njit(cache=True)
def _decide(z, alpha, u, x_out):
    base = 0.5 * (1.0 - alpha)
    for k in range(z.shape[0]):
        x_out[k] = 1 if u[k] < base + alpha * z[k] else 0


@njit(cache=True)
def _energy_row(x, coupling, field):
    n = x.shape[0]
    s = 0
    for k in range(n):
        s += x[k]
    return energy_from_spin_sum(2 * s - n, n, coupling, field)


@njit(cache=True, nogil=True)
def _run_steps(tree, weights, kout, mark, undo_pos, undo_val, t0, n_pos, r, omega,
               choices, energies, alpha, coupling, field, uniforms,
               frozen, frozen_refs, record, refs_rec, z_rec, z_last):
    """Advance the colony by ``uniforms.shape[0]`` ants. Returns (t, n_pos)."""
    t = t0
    refs = np.empty(r, dtype=np.int64)
    for step in range(uniforms.shape[0]):
        row = uniforms[step]
        if frozen:
            for j in range(r):
                refs[j] = frozen_refs[step, j]
        else:
            if n_pos < r:
                return t, -1
            _select(tree, weights, t, r, row[:r], refs, mark, undo_pos, undo_val)
        _aggregate(choices, energies, refs, z_last)
        _decide(z_last, alpha, row[r:], choices[t])
        energies[t] = _energy_row(choices[t], coupling, field)
        if record:
            refs_rec[step, :] = refs
            z_rec[step, :] = z_last
        if not frozen:
            n_pos = _apply(tree, weights, kout, t, r, omega, refs, n_pos)
        t += 1
    return t, n_pos


# --------------------------------------------------------------------------
# step-by-step API
# --------------------------------------------------------------------------

def aggregate_pheromone(choices, energies, refs) -> PheromoneAggregate:
    """Boltzmann-weighted pheromone ratios over the referenced ants.

    ``choices`` is the (t, N) 0/1 matrix of earlier ants and ``energies``
    their energies. Weights are exponentiated relative to the largest log
    weight in the reference set, so large |E| cannot overflow.
    """
    refs = np.asarray(refs, dtype=np.int64)
    if refs.size == 0:
        raise ValueError("reference set is empty")
    choices = np.asarray(choices, dtype=np.uint8)
    energies = np.asarray(energies, dtype=np.float64)
    z = np.empty(choices.shape[1])
    log_total = _aggregate(choices, energies, refs, z)
    return PheromoneAggregate(float(log_total), z)


def decision_probabilities(agg: PheromoneAggregate, params: DecisionParams) -> np.ndarray:
    return 0.5 * (1.0 - params.alpha) + params.alpha * agg.ratios


def magnetizations(agg: PheromoneAggregate, params: DecisionParams) -> np.ndarray:
    """Expected spins 2 alpha (Z - 1/2), each in [-alpha, alpha]."""
    return 2.0 * params.alpha * (agg.ratios - 0.5)


def decide(agg: PheromoneAggregate, params: DecisionParams, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(agg.ratios.shape[0])
    x = np.empty(agg.ratios.shape[0], dtype=np.uint8)
    _decide(agg.ratios, params.alpha, u, x)
    return x


class ColonyState:
    """History of all ants plus the network they grew.

    Choices are held as a (capacity, N) uint8 matrix; :meth:`ant` returns the
    bit-packed record of a single ant.
    """

    def __init__(self, ising: IsingParams, growth: GrowthParams, decision: DecisionParams,
                 rng: np.random.Generator, capacity: int = 256):
        r, n = growth.in_degree, ising.n_spins
        self.ising, self.growth, self.decision = ising, growth, decision
        cap = max(capacity, r + 2)
        self.choices = np.zeros((cap, n), dtype=np.uint8)
        self.energies = np.zeros(cap)
        self.choices[: r + 1] = rng.random((r + 1, n)) < 0.5
        for i in range(r + 1):
            self.energies[i] = _energy_row(self.choices[i], ising.coupling, ising.field)
        self.network = NetworkState(growth, capacity=cap)
        self.last_refs: np.ndarray | None = None
        self.last_aggregate: PheromoneAggregate | None = None

    @property
    def n_ants(self) -> int:
        return self.network.t

    def ant(self, i: int) -> AntRecord:
        return AntRecord(np.packbits(self.choices[i]).tobytes(), self.ising.n_spins,
                         float(self.energies[i]))

    def _ensure_capacity(self):
        t = self.n_ants
        if t < self.choices.shape[0]:
            return
        choices = np.zeros((2 * t, self.ising.n_spins), dtype=np.uint8)
        energies = np.zeros(2 * t)
        choices[:t], energies[:t] = self.choices[:t], self.energies[:t]
        self.choices, self.energies = choices, energies


def step(state: ColonyState, rng: np.random.Generator) -> ColonyState:
    """Add one ant: select references, aggregate, decide, score, link."""
    state._ensure_capacity()
    t = state.n_ants
    refs = refnet.select_references(state.network, rng)
    agg = aggregate_pheromone(state.choices[:t], state.energies[:t], refs)
    x = decide(agg, state.decision, rng)
    state.choices[t] = x
    state.energies[t] = _energy_row(x, state.ising.coupling, state.ising.field)
    refnet.apply_selection(state.network, refs)
    state.last_refs, state.last_aggregate = refs, agg
    return state


# --------------------------------------------------------------------------
# whole trials
# --------------------------------------------------------------------------

def default_trace_interval(n_ants: int) -> int:
    return max(1, n_ants // 1000)


def run_trial(ising: IsingParams, growth: GrowthParams, decision: DecisionParams,
              n_ants: int, seed: int, *, frozen_refs: np.ndarray | None = None,
              trace_interval: int | None = None, record_history: bool = False,
              chunk: int = 1024) -> TrialResult:
    """Run one trial of ``n_ants`` ants and report the last ant's magnetizations.

    The reported M(k, T) = 2 alpha (Z(k) - 1/2) uses the pheromone ratios ant
    T observed when it decided. With ``frozen_refs`` (shape (T - r - 1, r)) the
    reference sets are replayed instead of drawn; the stream layout is kept.
    """
    r, n = growth.in_degree, ising.n_spins
    if n_ants < r + 2:
        raise ConfigurationError(f"n_ants must be >= r + 2 = {r + 2}, got {n_ants}")
    n_steps = n_ants - r - 1
    frozen = frozen_refs is not None
    if frozen:
        frozen_refs = np.ascontiguousarray(frozen_refs, dtype=np.int64)
        if frozen_refs.shape[0] < n_steps or frozen_refs.shape[1] != r:
            raise ConfigurationError(
                f"frozen reference array has shape {frozen_refs.shape}, need ({n_steps}, {r})"
            )
    interval = trace_interval or default_trace_interval(n_ants)

    rng = np.random.default_rng(seed)
    choices = np.zeros((n_ants, n), dtype=np.uint8)
    energies = np.zeros(n_ants)
    choices[: r + 1] = rng.random((r + 1, n)) < 0.5
    for i in range(r + 1):
        energies[i] = _energy_row(choices[i], ising.coupling, ising.field)
    net = NetworkState(growth, capacity=n_ants)

    z_last = np.zeros(n)
    if record_history:
        refs_rec = np.zeros((n_steps, r), dtype=np.int64)
        z_rec = np.zeros((n_steps, n))
    else:
        refs_rec = np.zeros((1, r), dtype=np.int64)
        z_rec = np.zeros((1, n))
    dummy_frozen = np.zeros((1, r), dtype=np.int64)

    t, n_pos, done = net.t, net.n_positive, 0
    while done < n_steps:
        m = min(chunk, n_steps - done)
        u = rng.random((m, r + n))
        sl = slice(done, done + m)
        t, n_pos = _run_steps(
            net.tree, net.weights, net.kout, net.mark, net.undo_pos, net.undo_val,
            t, n_pos, r, float(growth.asymmetry), choices, energies,
            float(decision.alpha), float(ising.coupling), float(ising.field), u,
            frozen, frozen_refs[sl] if frozen else dummy_frozen,
            record_history, refs_rec[sl] if record_history else refs_rec,
            z_rec[sl] if record_history else z_rec, z_last,
        )
        if n_pos < 0:
            raise ExhaustionError(f"popularity exhausted at t={t}")
        done += m
    net.t, net.n_positive = t, n_pos

    trace_t = np.arange(interval, n_ants + 1, interval)
    metadata = {
        "n_spins": n, "coupling": ising.coupling, "field": ising.field,
        "in_degree": r, "asymmetry": growth.asymmetry, "alpha": decision.alpha,
        "n_ants": n_ants, "seed": int(seed),
        "network_mode": "frozen" if frozen else "coevolve",
    }
    history = None
    if record_history:
        history = {"refs": refs_rec, "ratios": z_rec, "choices": choices,
                   "energies": energies, "out_degrees": net.out_degrees}
    return TrialResult(
        final_magnetizations=2.0 * decision.alpha * (z_last - 0.5),
        trial_seed=int(seed),
        trace_t=trace_t,
        trace_energy=energies[trace_t - 1].copy(),
        metadata=metadata,
        history=history,
    )
