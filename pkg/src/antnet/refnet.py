"""Growing pheromone reference network (asymmetric Barabasi-Albert rule).

Every ant i carries a popularity l(i, t) = r + omega * k_out(i, t), where
k_out counts the later ants that referenced it. A newly arriving ant picks r
distinct earlier ants, sequentially and without replacement, with probability
proportional to max(l, 0).

Weights live in a binary indexed (Fenwick) tree so that a weighted draw and a
weight update both cost O(log t). Ant indices are 0-based throughout the
Python API; the network dump format is 1-based.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError, ConsistencyError, ExhaustionError

# Fenwick nodes accumulate rounding for non-dyadic omega; rebuild periodically.
REBUILD_EVERY = 4096


@dataclass(frozen=True)
class GrowthParams:
    in_degree: int
    asymmetry: float

    def __post_init__(self):
        if int(self.in_degree) != self.in_degree or self.in_degree < 1:
            raise ConfigurationError(f"in_degree must be a positive integer, got {self.in_degree!r}")
        if not math.isfinite(self.asymmetry) or self.asymmetry < -1:
            raise ConfigurationError(f"asymmetry must be >= -1, got {self.asymmetry!r}")


def total_popularity(params: GrowthParams, t: int) -> float:
    """D(t) = r t (1 + omega) - omega r (r + 1) / 2, valid for t >= r + 1."""
    r, w = params.in_degree, params.asymmetry
    if t < r + 1:
        raise ValueError(f"t must be >= r + 1 = {r + 1}, got {t}")
    return r * t * (1 + w) - w * r * (r + 1) / 2


def out_degree_total(r: int, t: int) -> int:
    """Sum of out-degrees after t ants have decided (t >= r + 1)."""
    return r * (r + 1) // 2 + r * (t - (r + 1))


# --------------------------------------------------------------------------
# Fenwick kernels. Tree positions are 1-based: ant i lives at position i + 1.
# --------------------------------------------------------------------------

@njit(cache=True)
def _fw_add(tree, pos, delta):
    n = tree.shape[0] - 1
    while pos <= n:
        tree[pos] += delta
        pos += pos & (-pos)


@njit(cache=True)
def _fw_prefix(tree, pos):
    s = 0.0
    while pos > 0:
        s += tree[pos]
        pos -= pos & (-pos)
    return s


@njit(cache=True)
def _fw_find(tree, target):
    """0-based index of the first ant whose cumulative weight exceeds target."""
    n = tree.shape[0] - 1
    step = 1
    while step * 2 <= n:
        step *= 2
    pos = 0
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step //= 2
    return pos


@njit(cache=True)
def _fw_build(tree, weights, t):
    n = tree.shape[0] - 1
    tree[:] = 0.0
    for i in range(t):
        tree[i + 1] = weights[i]
    for pos in range(1, n + 1):
        parent = pos + (pos & (-pos))
        if parent <= n:
            tree[parent] += tree[pos]


@njit(cache=True)
def _popularity(r, omega, k):
    w = r + omega * k
    return w if w > 0.0 else 0.0


@njit(cache=True)
def _init_complete(tree, weights, kout, r, omega):
    for i in range(r + 1):
        kout[i] = r - i
        weights[i] = _popularity(r, omega, kout[i])
    _fw_build(tree, weights, r + 1)
    n_pos = 0
    for i in range(r + 1):
        if weights[i] > 0.0:
            n_pos += 1
    return n_pos


@njit(cache=True)
def _select(tree, weights, t, r, u, out, mark, undo_pos, undo_val):
    """Draw r distinct ants among 0..t-1 into ``out`` (sorted on return).

    Each draw consumes one uniform from ``u``. Chosen ants are flagged in
    ``mark`` and zeroed in the tree for the rest of the sequence; both are
    restored before returning (the tree exactly, from an undo log).
    """
    n = tree.shape[0] - 1
    n_undo = 0
    for j in range(r):
        total = _fw_prefix(tree, t)
        target = u[j] * total
        idx = _fw_find(tree, target)
        if idx >= t or weights[idx] <= 0.0 or mark[idx] != 0:
            # Rounding residue put the target on a zeroed slot; take the
            # nearest eligible ant instead.
            found = -1
            for i in range(min(idx, t - 1), -1, -1):
                if weights[i] > 0.0 and mark[i] == 0:
                    found = i
                    break
            if found < 0:
                for i in range(min(idx, t - 1) + 1, t):
                    if weights[i] > 0.0 and mark[i] == 0:
                        found = i
                        break
            idx = found
        out[j] = idx
        mark[idx] = 1
        w = weights[idx]
        pos = idx + 1
        while pos <= n:
            undo_pos[n_undo] = pos
            undo_val[n_undo] = tree[pos]
            n_undo += 1
            tree[pos] -= w
            pos += pos & (-pos)
    for q in range(n_undo - 1, -1, -1):
        tree[undo_pos[q]] = undo_val[q]
    for j in range(r):
        mark[out[j]] = 0
    out.sort()


@njit(cache=True)
def _apply(tree, weights, kout, t, r, omega, refs, n_pos):
    """Credit the referenced ants, append ant t, return the new positive count."""
    for j in range(refs.shape[0]):
        i = refs[j]
        kout[i] += 1
        new = _popularity(r, omega, kout[i])
        old = weights[i]
        if new != old:
            _fw_add(tree, i + 1, new - old)
            if old > 0.0 and new <= 0.0:
                n_pos -= 1
            weights[i] = new
    kout[t] = 0
    weights[t] = float(r)
    _fw_add(tree, t + 1, float(r))
    n_pos += 1
    if (t + 1) % REBUILD_EVERY == 0:
        _fw_build(tree, weights, t + 1)
    return n_pos


@njit(cache=True, nogil=True)
def _grow(tree, weights, kout, mark, undo_pos, undo_val, t0, n_pos, r, omega, uniforms, refs_out):
    """Grow the network by ``uniforms.shape[0]`` ants; returns (t, n_pos) or n_pos=-1 on exhaustion."""
    t = t0
    for step in range(uniforms.shape[0]):
        if n_pos < r:
            return t, -1
        _select(tree, weights, t, r, uniforms[step], refs_out[step], mark,
                undo_pos, undo_val)
        n_pos = _apply(tree, weights, kout, t, r, omega, refs_out[step], n_pos)
        t += 1
    return t, n_pos


def _undo_capacity(r, cap):
    return r * (int(cap).bit_length() + 1)


class NetworkState:
    """Out-degrees, clamped popularities and the Fenwick index over them.

    Attributes
    ----------
    t : number of ants that have decided
    params : the GrowthParams the state was grown under
    """

    def __init__(self, params: GrowthParams, capacity: int | None = None):
        r = params.in_degree
        cap = max(capacity or 0, 2 * (r + 1), 16)
        self.params = params
        self._alloc(cap)
        self.n_positive = _init_complete(self.tree, self.weights, self.kout, r,
                                         float(params.asymmetry))
        self.t = r + 1

    def _alloc(self, cap):
        r = self.params.in_degree
        self.capacity = cap
        self.tree = np.zeros(cap + 1)
        self.weights = np.zeros(cap)
        self.kout = np.zeros(cap, dtype=np.int64)
        # scratch flags for the current draw sequence, all zero between draws
        self.mark = np.zeros(cap, dtype=np.int64)
        self.undo_pos = np.zeros(_undo_capacity(r, cap), dtype=np.int64)
        self.undo_val = np.zeros(_undo_capacity(r, cap))

    def _grow_capacity(self):
        weights, kout, mark, t = self.weights, self.kout, self.mark, self.t
        self._alloc(2 * self.capacity)
        self.weights[:t] = weights[:t]
        self.kout[:t] = kout[:t]
        _fw_build(self.tree, self.weights, t)

    @property
    def out_degrees(self) -> np.ndarray:
        return self.kout[: self.t].copy()

    @property
    def popularities(self) -> np.ndarray:
        """Clamped weights max(l(i, t), 0) for i < t."""
        return self.weights[: self.t].copy()

    @property
    def weight_total(self) -> float:
        return float(_fw_prefix(self.tree, self.t))

    def copy(self) -> "NetworkState":
        other = object.__new__(NetworkState)
        other.__dict__.update(self.__dict__)
        for name in ("tree", "weights", "kout", "mark", "undo_pos", "undo_val"):
            setattr(other, name, getattr(self, name).copy())
        return other


def init_complete(params: GrowthParams, capacity: int | None = None) -> NetworkState:
    """Complete graph on the first r + 1 ants, k_out(i) = r - i (0-based i)."""
    return NetworkState(params, capacity)


def select_references(state: NetworkState, rng: np.random.Generator) -> np.ndarray:
    """Pick r distinct ants for the next arrival; consumes r uniforms from ``rng``.

    Returns the sorted 0-based indices. The state is not modified (apart from
    scratch markers that carry no meaning between calls).
    """
    r = state.params.in_degree
    if state.n_positive < r:
        raise ExhaustionError(
            f"only {state.n_positive} ants have positive popularity, need {r}"
        )
    u = rng.random(r)
    out = np.empty(r, dtype=np.int64)
    _select(state.tree, state.weights, state.t, r, u, out, state.mark,
            state.undo_pos, state.undo_val)
    return out


def apply_selection(state: NetworkState, refs) -> NetworkState:
    """Record ant t's references and append it to the network, in place."""
    r = state.params.in_degree
    refs = np.asarray(refs, dtype=np.int64)
    if refs.shape != (r,) or len(set(refs.tolist())) != r:
        raise ConsistencyError(f"expected {r} distinct references, got {refs.tolist()}")
    if refs.min() < 0 or refs.max() >= state.t:
        raise ConsistencyError(f"references {refs.tolist()} out of range for t={state.t}")
    if np.any(state.weights[refs] <= 0.0):
        raise ConsistencyError("reference set contains an ant with zero popularity")
    if state.t == state.capacity:
        state._grow_capacity()
    state.n_positive = _apply(state.tree, state.weights, state.kout, state.t, r,
                              float(state.params.asymmetry), np.sort(refs), state.n_positive)
    state.t += 1
    return state


def degree_histogram(state: NetworkState) -> dict[int, int]:
    return dict(sorted(Counter(state.kout[: state.t].tolist()).items()))


def grow_network(params: GrowthParams, n_ants: int, rng: np.random.Generator,
                 chunk: int = 4096) -> tuple[NetworkState, np.ndarray]:
    """Grow from the complete graph to ``n_ants`` ants.

    Returns the final state and the (n_ants - r - 1, r) array of reference
    sets, row j belonging to ant r + 1 + j. Consumes r uniforms per ant, in
    the same order as repeated :func:`select_references` calls.
    """
    r = params.in_degree
    if n_ants < r + 1:
        raise ValueError(f"n_ants must be >= r + 1 = {r + 1}")
    state = NetworkState(params, capacity=n_ants)
    refs = np.empty((n_ants - r - 1, r), dtype=np.int64)
    done = 0
    while done < refs.shape[0]:
        m = min(chunk, refs.shape[0] - done)
        u = rng.random((m, r))
        t, n_pos = _grow(state.tree, state.weights, state.kout, state.mark,
                         state.undo_pos, state.undo_val, state.t, state.n_positive,
                         r, float(params.asymmetry), u, refs[done:done + m])
        if n_pos < 0:
            raise ExhaustionError(f"popularity exhausted at t={t}")
        state.t, state.n_positive = t, n_pos
        done += m
    return state, refs


def dump_lines(r: int, refs: np.ndarray):
    """Yield ``ant_id,selected_ids...`` lines (1-based) for a grown network.

    The first r + 1 ants form the complete graph, so ant i lists 1..i-1.
    """
    for i in range(1, r + 2):
        yield ",".join(str(j) for j in [i, *range(1, i)])
    for row, sel in enumerate(refs):
        yield ",".join([str(r + 2 + row)] + [str(int(j) + 1) for j in sel])


def parse_dump(lines, r: int) -> np.ndarray:
    """Inverse of :func:`dump_lines`: the 0-based reference array."""
    rows = []
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        fields = [int(f) for f in line.split(",")]
        ant, sel = fields[0], fields[1:]
        if ant <= r + 1:
            if sel != list(range(1, ant)):
                raise ConsistencyError(f"line {n}: initial ant {ant} must list 1..{ant - 1}")
            continue
        if len(sel) != r:
            raise ConsistencyError(f"line {n}: ant {ant} lists {len(sel)} references, expected {r}")
        if ant != r + 2 + len(rows):
            raise ConsistencyError(f"line {n}: ant ids must be consecutive")
        rows.append([j - 1 for j in sel])
    return np.asarray(rows, dtype=np.int64).reshape(-1, r)
