import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antnet.analysis import (Histogram, binomial_se, histogram, load_results,
                             mean_magnetization, mean_magnetization_se, save_results,
                             success_probability, summarize)
from antnet.colony import TrialResult


def tr(values, seed=0):
    return TrialResult(np.asarray(values, dtype=float), seed, np.array([1, 2]),
                       np.array([-0.5, -1.25]), {"alpha": 0.5})


def test_mean_magnetization_examples():
    assert mean_magnetization([tr([0.5, 0.5]), tr([0.5, 0.5])]) == 0.5
    assert mean_magnetization([tr([0.2, 0.4]), tr([0.0, 0.2])]) == pytest.approx(0.2)
    assert mean_magnetization([tr([0.3, -0.3]), tr([-0.1, 0.1])]) == 0.0
    with pytest.raises(ValueError):
        mean_magnetization([])


def test_mean_magnetization_se():
    res = [tr([0.2, 0.4]), tr([0.0, 0.2])]
    assert mean_magnetization_se(res) == pytest.approx(np.std([0.3, 0.1], ddof=1) / math.sqrt(2))
    assert math.isnan(mean_magnetization_se([tr([0.1])]))


def test_success_probability_examples():
    assert success_probability([tr([0.1, 0.2]), tr([0.3, 0.01])]) == 1.0
    assert success_probability([tr([0.1, 0.2]), tr([0.3, -0.01])]) == 0.5
    assert success_probability([tr([0.0, 0.2])]) == 1.0
    with pytest.raises(ValueError):
        success_probability([])
    assert binomial_se(0.5, 100) == pytest.approx(0.05)


def test_histogram_examples():
    h = histogram([-0.5, -0.5, 0.5, 0.5], bins=2)
    assert h.counts.tolist() == [2, 2] and h.n_outside == 0
    assert histogram([], bins=4).counts.tolist() == [0, 0, 0, 0]
    # interior edge goes up, top edge is inclusive
    h = histogram([0.0, 1.0, -1.0], bins=2)
    assert h.counts.tolist() == [1, 2]
    h = histogram([-3.0, 2.0, 0.1], bins=4)
    assert h.counts.tolist() == [1, 0, 1, 1] and h.n_outside == 2
    with pytest.raises(ValueError):
        histogram([0.1], bins=0)


def test_histogram_uniform_multinomial():
    v = np.random.default_rng(0).random(10_000)
    h = histogram(v, bins=10, value_range=(0.0, 1.0))
    sigma = math.sqrt(10_000 * 0.1 * 0.9)
    assert np.all(np.abs(h.counts - 1000) < 4 * sigma)


def test_histogram_edges_exact_for_default_bins():
    h = histogram(np.linspace(-1, 1, 51)[1:-1], bins=50)
    assert h.counts[0] == 0 and np.all(h.counts[1:] == 1)


mags = st.lists(st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3),
                min_size=1, max_size=12)


@settings(max_examples=100, deadline=None)
@given(mags, st.randoms(use_true_random=False))
def test_success_invariant_under_permutations(rows, rnd):
    res = [tr(r) for r in rows]
    p = success_probability(res)
    shuffled = list(res)
    rnd.shuffle(shuffled)
    perm = [0, 1, 2]
    rnd.shuffle(perm)
    relabeled = [tr(np.asarray(r.final_magnetizations)[perm]) for r in shuffled]
    assert success_probability(relabeled) == p
    assert p * len(res) == int(round(p * len(res)))


@settings(max_examples=100, deadline=None)
@given(mags, mags)
def test_mean_is_mergeable(a, b):
    ra, rb = [tr(r) for r in a], [tr(r) for r in b]
    merged = mean_magnetization(ra + rb)
    weighted = (mean_magnetization(ra) * len(a) + mean_magnetization(rb) * len(b)) / (len(a) + len(b))
    assert merged == pytest.approx(weighted, abs=1e-12)


def test_persistence_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(3)
    res = [tr(rng.uniform(-0.8, 0.8, 5), seed=s) for s in range(4)]
    path = tmp_path / "cell.json"
    save_results(path, res, {"omega": -0.9999})
    header, back = load_results(path)
    assert header == {"omega": -0.9999}
    for a, b in zip(res, back):
        assert a.final_magnetizations.tobytes() == b.final_magnetizations.tobytes()
        assert a.trace_energy.tobytes() == b.trace_energy.tobytes()
        assert a.trial_seed == b.trial_seed
    c1, c2 = summarize(0.0, 0.5, res, 10), summarize(0.0, 0.5, back, 10)
    assert (c1.m_mean, c1.m_mean_se, c1.success_probability) == (c2.m_mean, c2.m_mean_se,
                                                                  c2.success_probability)
    assert np.array_equal(c1.histogram.counts, c2.histogram.counts)
    assert c1.histogram.counts.sum() == 20
