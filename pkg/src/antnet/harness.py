"""Sweeps over the (omega, alpha) grid with seeded, parallel trials.

Output directory layout::

    sweep.csv, hist.csv           colony summaries, one row per cell / bin
    theory.csv                    closed-form m_star, alpha_s, alpha_c per alpha
    meanfield.csv                 integrator summaries per cell
    meanfield_traj.csv            spin-averaged integrator trajectories
    failures.txt                  cells that aborted (only if any did)
    cells/w{i}_a{j}.json          persisted trial results for cell (i, j)
    cells/w{i}_a{j}_trace.csv     energy traces when trace_interval > 0

Every trial seed is derived from (master_seed, omega index, alpha index,
trial index), so results do not depend on thread count or scheduling.
"""
from __future__ import annotations

import logging
import os
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .colony import DecisionParams, run_trial
from .config import RunConfig
from .errors import ConfigurationError, ExhaustionError
from .meanfield import integrate, theory_point
from .refnet import grow_network

log = logging.getLogger(__name__)

OUT_ENV = "ANTNET_OUT"
NETWORK_TAG = 0x6E6574  # separates network seeds from trial seeds


def derive_seed(master_seed: int, *indices: int) -> int:
    """Stable 64-bit seed for a position in the experiment grid."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def network_seed(master_seed: int, omega: float) -> int:
    """Seed of the shared network realization for ``omega`` (frozen mode, dumps)."""
    hi, lo = struct.unpack("<II", struct.pack("<d", float(omega)))
    return derive_seed(master_seed, NETWORK_TAG, hi, lo)


def resolve_output_dir(cfg: RunConfig, override: str | None = None) -> Path:
    return Path(override or os.environ.get(OUT_ENV) or cfg.output_dir)


def cell_header(cfg: RunConfig, omega: float, alpha: float) -> dict:
    return {
        "omega": omega, "alpha": alpha, "n_spins": cfg.n_spins, "coupling": cfg.coupling,
        "field": cfg.field, "in_degree": cfg.in_degree, "ants_per_trial": cfg.ants_per_trial,
        "trials": cfg.trials, "master_seed": cfg.master_seed,
        "network_mode": cfg.network_mode, "trace_interval": cfg.trace_interval,
    }


@dataclass
class SweepOutcome:
    out_dir: Path
    cells: dict = field(default_factory=dict)     # (i, j) -> list[TrialResult]
    failures: dict = field(default_factory=dict)  # (i, j) -> message
    skipped: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def exit_code(self) -> int:
        return 2 if self.failures else 0


def _cell_path(out: Path, i: int, j: int) -> Path:
    return out / "cells" / f"w{i:02d}_a{j:02d}.json"


def _frozen_networks(cfg: RunConfig, threads: int) -> dict:
    def grow(w):
        _, refs = grow_network(cfg.growth(w), cfg.ants_per_trial,
                               np.random.default_rng(network_seed(cfg.master_seed, w)))
        return w, refs
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return dict(pool.map(grow, sorted(set(cfg.omegas))))


def run_sweep(cfg: RunConfig, *, out_dir: str | None = None, threads: int | None = None,
              resume: bool = False) -> SweepOutcome:
    """Run every (omega, alpha) cell and write sweep.csv and hist.csv."""
    out = resolve_output_dir(cfg, out_dir)
    (out / "cells").mkdir(parents=True, exist_ok=True)
    threads = threads or os.cpu_count() or 1
    outcome = SweepOutcome(out)
    start = time.perf_counter()
    if not cfg.omegas or not cfg.alphas:
        log.warning("empty omega or alpha list: nothing to simulate")

    todo = []
    for i, w in enumerate(cfg.omegas):
        for j, a in enumerate(cfg.alphas):
            path = _cell_path(out, i, j)
            if resume and path.exists():
                header, results = analysis.load_results(path)
                if header == cell_header(cfg, w, a) and len(results) == cfg.trials:
                    outcome.cells[(i, j)] = results
                    outcome.skipped.append((i, j))
                    continue
            todo.append((i, j))

    frozen = _frozen_networks(cfg, threads) if cfg.network_mode == "frozen" and todo else {}
    ising = cfg.ising()
    interval = cfg.trace_interval or None

    def one(task):
        i, j, s = task
        w, a = cfg.omegas[i], cfg.alphas[j]
        try:
            return task, run_trial(ising, cfg.growth(w), DecisionParams(a), cfg.ants_per_trial,
                                   derive_seed(cfg.master_seed, i, j, s),
                                   frozen_refs=frozen.get(w), trace_interval=interval)
        except ExhaustionError as exc:
            return task, exc

    tasks = [(i, j, s) for i, j in todo for s in range(cfg.trials)]
    pending = {cell: [None] * cfg.trials for cell in todo}
    remaining = {cell: cfg.trials for cell in todo}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for (i, j, s), res in pool.map(one, tasks):
            if isinstance(res, Exception):
                outcome.failures[(i, j)] = f"trial {s}: {res}"
            pending[(i, j)][s] = res
            remaining[(i, j)] -= 1
            if remaining[(i, j)] == 0 and (i, j) not in outcome.failures:
                results = pending.pop((i, j))
                analysis.save_results(_cell_path(out, i, j), results,
                                      cell_header(cfg, cfg.omegas[i], cfg.alphas[j]))
                outcome.cells[(i, j)] = results
                log.info("cell omega=%s alpha=%s done", cfg.omegas[i], cfg.alphas[j])

    write_sweep_outputs(cfg, outcome)
    outcome.seconds = time.perf_counter() - start
    (out / "timing.txt").write_text(
        f"colony sweep: {outcome.seconds:.1f} s, {len(tasks)} trials run, "
        f"{len(outcome.skipped)} cells resumed, threads={threads}\n")
    return outcome


def write_sweep_outputs(cfg: RunConfig, outcome: SweepOutcome):
    out = outcome.out_dir
    sweep_rows, hist_rows = [], []
    nan = float("nan")
    for i, w in enumerate(cfg.omegas):
        for j, a in enumerate(cfg.alphas):
            results = outcome.cells.get((i, j))
            tail = [cfg.n_spins, cfg.ants_per_trial, cfg.in_degree, cfg.coupling, cfg.field,
                    cfg.master_seed]
            if results is None:
                sweep_rows.append([w, a, nan, nan, nan, nan, 0, *tail])
                continue
            cell = analysis.summarize(w, a, results, cfg.hist_bins)
            sweep_rows.append([w, a, cell.m_mean, cell.m_mean_se, cell.success_probability,
                               cell.success_se, cell.n_trials, *tail])
            edges = cell.histogram.edges
            for b, c in enumerate(cell.histogram.counts):
                hist_rows.append([w, a, edges[b], edges[b + 1], int(c)])
            if cfg.trace_interval:
                analysis.write_csv(
                    out / "cells" / f"w{i:02d}_a{j:02d}_trace.csv", analysis.TRACE_HEADER,
                    ([s, int(t), e] for s, r in enumerate(results)
                     for t, e in zip(r.trace_t, r.trace_energy)))
    analysis.write_csv(out / "sweep.csv", analysis.SWEEP_HEADER, sweep_rows)
    analysis.write_csv(out / "hist.csv", analysis.HIST_HEADER, hist_rows)
    failures = out / "failures.txt"
    if outcome.failures:
        failures.write_text("".join(
            f"omega={cfg.omegas[i]!r} alpha={cfg.alphas[j]!r}: {msg}\n"
            for (i, j), msg in sorted(outcome.failures.items())))
    elif failures.exists():
        failures.unlink()


def theory_rows(coupling: float, field: float, alphas) -> list[list]:
    rows = []
    for a in alphas:
        tp = theory_point(coupling, field, a)
        rows.append([a, tp.m_star, tp.alpha_s, tp.alpha_c, "1" if tp.unstable else "0"])
    return rows


THEORY_HEADER = ["alpha", "m_star", "alpha_s", "alpha_c", "unstable"]
MEANFIELD_HEADER = ["omega", "alpha", "m_mean", "m_mean_se", "m_star", "n_runs"]
MEANFIELD_TRAJ_HEADER = ["omega", "alpha", "run", "t", "m_mean"]


def run_meanfield(cfg: RunConfig, *, out_dir: str | None = None,
                  threads: int | None = None) -> Path:
    """Write theory.csv plus integrator runs for every cell.

    Run s of cell (i, j) uses the colony's trial seed for the same position,
    so both start from the same founding ants.
    """
    out = resolve_output_dir(cfg, out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not cfg.alphas:
        log.warning("empty alpha list: nothing to integrate")
    analysis.write_csv(out / "theory.csv", THEORY_HEADER,
                       theory_rows(cfg.coupling, cfg.field, cfg.alphas))
    ising = cfg.ising()
    snap = cfg.trace_interval or None

    def one(task):
        i, j, s = task
        return task, integrate(ising, cfg.growth(cfg.omegas[i]), cfg.alphas[j],
                               cfg.ants_per_trial, derive_seed(cfg.master_seed, i, j, s),
                               snapshot_every=snap)

    tasks = [(i, j, s) for i in range(len(cfg.omegas)) for j in range(len(cfg.alphas))
             for s in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=threads or os.cpu_count() or 1) as pool:
        trajs = dict(pool.map(one, tasks))

    summary, traj_rows = [], []
    for i, w in enumerate(cfg.omegas):
        for j, a in enumerate(cfg.alphas):
            finals = np.array([trajs[(i, j, s)].final.mean() for s in range(cfg.trials)])
            se = finals.std(ddof=1) / np.sqrt(finals.size) if finals.size > 1 else float("nan")
            summary.append([w, a, finals.mean(), se, theory_point(cfg.coupling, cfg.field, a).m_star
                            if cfg.coupling > 0 else float("nan"), cfg.trials])
            for s in range(cfg.trials):
                tr = trajs[(i, j, s)]
                for t, m in zip(tr.times, tr.magnetizations.mean(axis=1)):
                    traj_rows.append([w, a, s, int(t), m])
    analysis.write_csv(out / "meanfield.csv", MEANFIELD_HEADER, summary)
    analysis.write_csv(out / "meanfield_traj.csv", MEANFIELD_TRAJ_HEADER, traj_rows)
    return out


def dump_network(cfg: RunConfig, omega: float, n_ants: int | None = None):
    """Lines of the network realization used for ``omega`` in frozen mode."""
    from .refnet import dump_lines
    if omega < -1:
        raise ConfigurationError(f"omega must be >= -1, got {omega}")
    n = n_ants or cfg.ants_per_trial
    _, refs = grow_network(cfg.growth(omega), n,
                           np.random.default_rng(network_seed(cfg.master_seed, omega)))
    return dump_lines(cfg.in_degree, refs)
