import math

import numpy as np
import pytest

from antnet.errors import ConfigurationError, ConsistencyError, ExhaustionError
from antnet.refnet import (GrowthParams, NetworkState, apply_selection, degree_histogram,
                           dump_lines, grow_network, init_complete, out_degree_total,
                           parse_dump, select_references, total_popularity)
from oracle import draw_references, out_degrees


def test_growth_params_validation():
    with pytest.raises(ConfigurationError):
        GrowthParams(0, 0.0)
    with pytest.raises(ConfigurationError):
        GrowthParams(3, -1.5)
    GrowthParams(3, -1.0)


def test_init_complete():
    s = init_complete(GrowthParams(3, 1.0))
    assert s.t == 4
    assert s.out_degrees.tolist() == [3, 2, 1, 0]
    assert s.out_degrees.sum() == 6
    assert s.popularities.tolist() == [6.0, 5.0, 4.0, 3.0]
    assert init_complete(GrowthParams(1, 0.0)).out_degrees.tolist() == [1, 0]
    assert degree_histogram(s) == {0: 1, 1: 1, 2: 1, 3: 1}


@pytest.mark.parametrize("omega,t,expected", [(1.0, 5, 24.0), (0.0, 5, 15.0),
                                              (-1.0, 4, 6.0), (-1.0, 1000, 6.0)])
def test_total_popularity(omega, t, expected):
    assert total_popularity(GrowthParams(3, omega), t) == expected


def test_total_popularity_domain():
    with pytest.raises(ValueError):
        total_popularity(GrowthParams(3, 0.0), 3)


def test_total_popularity_matches_grown_network():
    p = GrowthParams(3, 1.0)
    s, _ = grow_network(p, 5, np.random.default_rng(0))
    assert s.popularities.sum() == 24.0
    assert s.weight_total == 24.0


def test_lattice_selection_is_previous_r():
    p = GrowthParams(3, -1.0)
    s = init_complete(p)
    rng = np.random.default_rng(1)
    apply_selection(s, select_references(s, rng))
    assert s.t == 5
    for _ in range(20):
        refs = select_references(s, rng)
        assert refs.tolist() == [s.t - 3, s.t - 2, s.t - 1]
        apply_selection(s, refs)


def test_first_draw_probability_on_complete_graph():
    # weights (6, 5, 4, 3): ant 0 is drawn first with probability 6/18
    p = GrowthParams(3, 1.0)
    s = init_complete(p)
    rng = np.random.default_rng(2)
    n = 60000
    u = rng.random(n)
    # one uniform per draw; feed the first-draw uniform through select
    hits = 0
    for x in u[:n]:
        class Fixed:
            def random(self, k, _x=x):
                return np.array([_x] + [0.999] * (k - 1))
        if 0 in select_references(s, Fixed()).tolist() and x * 18 < 6:
            hits += 1
    assert hits / n == pytest.approx(6 / 18, abs=4 * math.sqrt(6 / 18 * 12 / 18 / n))


def test_select_does_not_mutate():
    p = GrowthParams(4, 0.7)
    s, _ = grow_network(p, 50, np.random.default_rng(3))
    before = (s.tree.copy(), s.weights.copy(), s.kout.copy(), s.t)
    select_references(s, np.random.default_rng(4))
    assert np.array_equal(before[0], s.tree)
    assert np.array_equal(before[1], s.weights)
    assert np.array_equal(before[2], s.kout) and before[3] == s.t


def test_apply_selection_increments():
    s = init_complete(GrowthParams(3, 1.0))
    apply_selection(s, [1, 2, 3])
    assert s.out_degrees.tolist() == [3, 3, 2, 1, 0]
    assert s.out_degrees.sum() == out_degree_total(3, 5)


def test_apply_selection_rejects_bad_refs():
    s = init_complete(GrowthParams(3, 1.0))
    with pytest.raises(ConsistencyError):
        apply_selection(s, [1, 1, 2])
    with pytest.raises(ConsistencyError):
        apply_selection(s, [1, 2, 4])
    with pytest.raises(ConsistencyError):
        apply_selection(s, [1, 2])
    lattice = init_complete(GrowthParams(3, -1.0))
    with pytest.raises(ConsistencyError):
        apply_selection(lattice, [0, 1, 2])  # ant 0 has popularity 0


def test_negative_omega_clamp():
    s = init_complete(GrowthParams(3, -0.5))
    s.kout[0] = 5
    s.weights[0] = 0.5
    s.tree[:] = 0
    from antnet.refnet import _fw_build
    _fw_build(s.tree, s.weights, s.t)
    apply_selection(s, [0, 1, 2])
    assert s.weights[0] == 0.0
    assert s.weights[1] == max(3 - 0.5 * 3, 0)


def test_exhaustion_error():
    s = init_complete(GrowthParams(3, -1.0))
    s.n_positive = 2
    with pytest.raises(ExhaustionError):
        select_references(s, np.random.default_rng(0))


def test_capacity_growth_keeps_state():
    p = GrowthParams(2, 1.0)
    s = NetworkState(p, capacity=4)
    rng = np.random.default_rng(5)
    for _ in range(100):
        apply_selection(s, select_references(s, rng))
    assert s.t == 103
    assert s.weight_total == total_popularity(p, 103)


@pytest.mark.parametrize("omega", [-1.0, -0.5, 0.0, 1.0, 2.5])
def test_grow_matches_oracle_draws(omega):
    r = 3
    p = GrowthParams(r, omega)
    _, refs = grow_network(p, 60, np.random.default_rng(11))
    rng = np.random.default_rng(11)
    history = []
    for t in range(r + 1, 60):
        kout = out_degrees(r, history, t)
        history.append(draw_references(r, omega, kout, rng.random(r).tolist()))
    assert refs.tolist() == history


def test_step_api_matches_grow():
    p = GrowthParams(4, 0.5)
    _, refs = grow_network(p, 300, np.random.default_rng(8))
    s = init_complete(p)
    rng = np.random.default_rng(8)
    for row in refs:
        got = select_references(s, rng)
        assert got.tolist() == row.tolist()
        apply_selection(s, got)


@pytest.mark.parametrize("r,omega", [(2, 1.0), (3, 0.0), (5, -0.5), (4, -1.0), (6, 0.3)])
def test_out_degree_identity_and_popularity(r, omega):
    p = GrowthParams(r, omega)
    s, _ = grow_network(p, 5000, np.random.default_rng(r))
    assert s.out_degrees.sum() == out_degree_total(r, s.t)
    expected = np.maximum(r + omega * s.out_degrees, 0.0)
    assert np.array_equal(s.popularities, expected)
    if omega >= 0:
        assert s.weight_total == pytest.approx(total_popularity(p, s.t), rel=1e-12)
    else:
        assert s.out_degrees.max() <= math.floor(r / abs(omega)) + 1


def test_uniform_selection_frequency():
    # omega = 0, r = 2, t = 10: every ant is chosen with probability 2/10
    p = GrowthParams(2, 0.0)
    base = init_complete(p)
    rng = np.random.default_rng(21)
    for _ in range(7):
        apply_selection(base, select_references(base, rng))
    assert base.t == 10
    n = 100_000
    counts = np.zeros(10)
    for _ in range(n):
        counts[select_references(base, rng)] += 1
    freq = counts / n
    se = math.sqrt(0.2 * 0.8 / n)
    assert np.all(np.abs(freq - 0.2) < 3 * se * 1.5)  # 10 ants, Bonferroni-ish slack


@pytest.mark.slow
def test_hubs_form_for_positive_omega():
    def max_degree(omega, seed):
        s, _ = grow_network(GrowthParams(3, omega), 10_000, np.random.default_rng(seed))
        return s.out_degrees.max()
    ba = np.mean([max_degree(1.0, s) for s in range(20)])
    rand = np.mean([max_degree(0.0, s) for s in range(20)])
    assert ba > 2 * rand


def test_random_graph_degrees_stay_small():
    s, _ = grow_network(GrowthParams(3, 0.0), 20_000, np.random.default_rng(4))
    hist = degree_histogram(s)
    assert sum(hist.values()) == s.t
    # uniform attachment: tail ~ geometric, max grows like log t
    assert max(hist) < 3 * (math.log(s.t) + 10)


def test_lattice_degree_histogram():
    s, _ = grow_network(GrowthParams(3, -1.0), 100, np.random.default_rng(0))
    k = s.out_degrees
    assert np.all(k[: s.t - 3] == 3)
    assert k[-3:].tolist() == [2, 1, 0]


def test_dump_roundtrip():
    p = GrowthParams(3, 1.0)
    _, refs = grow_network(p, 40, np.random.default_rng(3))
    lines = list(dump_lines(3, refs))
    assert lines[:4] == ["1", "2,1", "3,1,2", "4,1,2,3"]
    assert len(lines) == 40
    assert lines[4].startswith("5,")
    assert np.array_equal(parse_dump(lines, 3), refs)
    with pytest.raises(ConsistencyError):
        parse_dump(["1", "2,1", "3,1,2", "4,1,2,3", "5,1,2"], 3)
