"""Run configuration: flat ``key = value`` text, one setting per line.

List-valued settings (``omega``, ``alpha``) are given by repeating the key.
``alpha_range = lo:hi:step`` appends an inclusive grid to the alpha list.
Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .colony import DecisionParams
from .errors import ConfigurationError
from .ising import IsingParams
from .refnet import GrowthParams

MODES = ("colony", "meanfield", "both")
NETWORK_MODES = ("coevolve", "frozen")


@dataclass(frozen=True)
class RunConfig:
    n_spins: int = 100
    coupling: float = 0.1
    field: float = 0.01
    in_degree: int = 100
    omegas: tuple[float, ...] = ()
    alphas: tuple[float, ...] = ()
    ants_per_trial: int = 100_000
    trials: int = 100
    master_seed: int = 0
    mode: str = "colony"
    network_mode: str = "coevolve"
    output_dir: str = "out"
    hist_bins: int = 50
    trace_interval: int = 0

    def __post_init__(self):
        self.ising()
        for w in self.omegas:
            self.growth(w)
        for a in self.alphas:
            DecisionParams(a)
        if self.ants_per_trial < self.in_degree + 2:
            raise ConfigurationError(
                f"ants_per_trial must be >= in_degree + 2 = {self.in_degree + 2}")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.master_seed < 0:
            raise ConfigurationError("master_seed must be non-negative")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.network_mode not in NETWORK_MODES:
            raise ConfigurationError(
                f"network_mode must be one of {NETWORK_MODES}, got {self.network_mode!r}")
        if self.hist_bins < 1:
            raise ConfigurationError("hist_bins must be >= 1")
        if self.trace_interval < 0:
            raise ConfigurationError("trace_interval must be >= 0")

    def ising(self) -> IsingParams:
        return IsingParams(self.n_spins, self.coupling, self.field)

    def growth(self, omega: float) -> GrowthParams:
        return GrowthParams(self.in_degree, omega)


_SCALARS = {
    "n_spins": int, "coupling": float, "field": float, "in_degree": int,
    "ants_per_trial": int, "trials": int, "master_seed": int, "mode": str,
    "network_mode": str, "output_dir": str, "hist_bins": int, "trace_interval": int,
}
_ALIASES = {"N": "n_spins", "J": "coupling", "h": "field", "r": "in_degree",
            "T": "ants_per_trial", "S": "trials", "seed": "master_seed"}


def _number(text: str, kind, lineno: int, key: str):
    try:
        if kind is int:
            v = float(text)
            if not v.is_integer():
                raise ValueError
            return int(v)
        v = kind(text)
        if kind is float and not math.isfinite(v):
            raise ValueError
        return v
    except ValueError:
        raise ConfigurationError(f"line {lineno}: {key}: cannot parse {text!r} as {kind.__name__}")


def parse_range(text: str) -> list[float]:
    """Inclusive ``lo:hi:step`` grid, rounded to 12 decimals."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected lo:hi:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(n + 1)]


def parse_config(text: str) -> RunConfig:
    values: dict = {}
    omegas: list[float] = []
    alphas: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key == "omega":
            w = _number(value, float, lineno, key)
            if w < -1:
                raise ConfigurationError(f"line {lineno}: omega must be >= -1, got {w}")
            omegas.append(w)
        elif key in ("alpha", "alpha_range"):
            try:
                new = parse_range(value) if key == "alpha_range" else [float(value)]
            except ValueError as exc:
                raise ConfigurationError(f"line {lineno}: {key}: {exc}")
            for a in new:
                if not 0.0 <= a < 1.0:
                    raise ConfigurationError(f"line {lineno}: alpha must satisfy 0 <= alpha < 1, got {a}")
            alphas.extend(new)
        elif key in _SCALARS:
            if key in values:
                raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
            values[key] = _number(value, _SCALARS[key], lineno, key)
        else:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
    return RunConfig(omegas=tuple(omegas), alphas=tuple(alphas), **values)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc}")
    return parse_config(text)


def dump_config(cfg: RunConfig) -> str:
    """Text form that :func:`parse_config` reads back to an equal config."""
    lines = [f"{k} = {getattr(cfg, k)!r}" if isinstance(getattr(cfg, k), float)
             else f"{k} = {getattr(cfg, k)}" for k in _SCALARS]
    lines += [f"omega = {w!r}" for w in cfg.omegas]
    lines += [f"alpha = {a!r}" for a in cfg.alphas]
    return "\n".join(lines) + "\n"
