"""Observables over many trials: M_mean, ground-state success rate, histograms.

Also (de)serializes trial results so that every summary can be recomputed
from disk.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .colony import TrialResult

SWEEP_HEADER = ["omega", "alpha", "m_mean", "m_mean_se", "success_prob", "success_se",
                "n_trials", "n_spins", "T", "r", "J", "h", "seed"]
HIST_HEADER = ["omega", "alpha", "bin_lo", "bin_hi", "count"]
TRACE_HEADER = ["trial", "t", "energy"]


def _stack(results: Sequence[TrialResult]) -> np.ndarray:
    if len(results) == 0:
        raise ValueError("no trial results")
    return np.vstack([np.asarray(r.final_magnetizations, dtype=np.float64) for r in results])


def mean_magnetization(results: Sequence[TrialResult]) -> float:
    """Average of M(k, T, s) over all spins k and trials s."""
    return float(_stack(results).mean())


def mean_magnetization_se(results: Sequence[TrialResult]) -> float:
    """Standard error of M_mean from the spread of per-trial means (nan for one trial)."""
    per_trial = _stack(results).mean(axis=1)
    if per_trial.size < 2:
        return math.nan
    return float(per_trial.std(ddof=1) / math.sqrt(per_trial.size))


def ground_state_found(m) -> bool:
    # sgn(0) = +1
    return bool(np.all(np.asarray(m) >= 0.0))


def success_probability(results: Sequence[TrialResult]) -> float:
    """Fraction of trials whose final magnetizations are all non-negative."""
    m = _stack(results)
    return float(np.all(m >= 0.0, axis=1).mean())


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n) if n > 0 else math.nan


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    edges: np.ndarray
    n_outside: int


def histogram(values, bins: int = 50, value_range: tuple[float, float] = (-1.0, 1.0)) -> Histogram:
    """Equal-width histogram; values on an interior edge fall in the upper bin.

    The top edge is inclusive. Values outside the range are counted in the
    end bins and reported in ``n_outside``.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = value_range
    edges = np.linspace(lo, hi, bins + 1)
    v = np.asarray(values, dtype=np.float64).ravel()
    idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(np.int64)
    n_outside = int(np.count_nonzero((v < lo) | (v > hi)))
    return Histogram(counts, edges, n_outside)


@dataclass(frozen=True)
class SweepCell:
    omega: float
    alpha: float
    m_mean: float
    m_mean_se: float
    success_probability: float
    success_se: float
    histogram: Histogram
    n_trials: int


def summarize(omega: float, alpha: float, results: Sequence[TrialResult], bins: int = 50) -> SweepCell:
    p = success_probability(results)
    return SweepCell(
        omega=omega, alpha=alpha,
        m_mean=mean_magnetization(results),
        m_mean_se=mean_magnetization_se(results),
        success_probability=p,
        success_se=binomial_se(p, len(results)),
        histogram=histogram(_stack(results), bins),
        n_trials=len(results),
    )


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-tripping text for a number."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _atomic_write(path: Path, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path, header: list[str], rows: Iterable[Iterable]):
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    _atomic_write(Path(path), buf.getvalue())


def results_to_json(results: Sequence[TrialResult], header: dict) -> str:
    payload = {
        "header": header,
        "trials": [
            {
                "seed": r.trial_seed,
                "final_magnetizations": [float(v) for v in r.final_magnetizations],
                "trace_t": [int(v) for v in r.trace_t],
                "trace_energy": [float(v) for v in r.trace_energy],
                "metadata": r.metadata,
            }
            for r in results
        ],
    }
    return json.dumps(payload, sort_keys=True)


def save_results(path, results: Sequence[TrialResult], header: dict):
    _atomic_write(Path(path), results_to_json(results, header))


def load_results(path) -> tuple[dict, list[TrialResult]]:
    with open(path) as fh:
        payload = json.load(fh)
    trials = [
        TrialResult(
            final_magnetizations=np.asarray(t["final_magnetizations"], dtype=np.float64),
            trial_seed=int(t["seed"]),
            trace_t=np.asarray(t["trace_t"], dtype=np.int64),
            trace_energy=np.asarray(t["trace_energy"], dtype=np.float64),
            metadata=t["metadata"],
        )
        for t in payload["trials"]
    ]
    return payload["header"], trials
