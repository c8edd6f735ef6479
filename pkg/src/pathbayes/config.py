"""
``key = value`` run configuration and the CSV formats used by the CLI.

Numbers are written with 17 significant digits so every float re-parses to
the value that was emitted. Every CSV starts with ``#`` lines carrying the
resolved configuration.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Grid, ModelParams
from .kernel import ObservationSeries, Potential
from .scenario import PriorSpec, Scenario

KEY_ORDER = (
    "D", "delta", "eps", "t_final", "grid_min", "grid_max", "grid_n",
    "n_max", "seed", "prior", "obs_noise_std", "potential",
)
REQUIRED = ("D", "delta", "eps", "t_final")
DEFAULTS = {
    "grid_min": "-8",
    "grid_max": "8",
    "grid_n": "513",
    "n_max": "48",
    "seed": "0",
    "prior": "gaussian(0,1)",
    "potential": "gaussian",
}


class ConfigError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def _float(raw: dict, key: str) -> float:
    try:
        value = float(raw[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {raw[key]!r}", key) from None
    if not math.isfinite(value):
        raise ConfigError(f"key {key!r}: value must be finite", key)
    return value


def _int(raw: dict, key: str) -> int:
    try:
        return int(raw[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {raw[key]!r}", key) from None


def parse_potential(text: str, delta: float) -> Potential:
    text = text.strip()
    if text == "gaussian":
        return Potential.gaussian(delta)
    if text == "none":
        return Potential.zero()
    m = re.fullmatch(r"table\((.+)\)", text)
    if m:
        path = m.group(1).strip()
        try:
            cols = read_csv(path, ("u", "v"))
        except OSError as exc:
            raise ConfigError(f"key 'potential': cannot read table {path!r}: {exc}", "potential") from None
        return Potential.tabulated(cols["u"], cols["v"])
    raise ConfigError(f"key 'potential': expected gaussian, none or table(FILE), got {text!r}", "potential")


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    params: ModelParams
    grid: Grid
    prior: PriorSpec
    t_final: float
    seed: int
    n_max: int
    obs_noise_std: float
    potential: Potential

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.params.eps))

    def metadata(self) -> list[str]:
        return [f"{k} = {self.raw[k]}" for k in KEY_ORDER]

    def scenario(self, observations: Optional[ObservationSeries] = None) -> Scenario:
        return Scenario(
            params=self.params,
            grid=self.grid,
            prior=self.prior,
            t_final=self.t_final,
            seed=self.seed,
            obs_noise_std=None if observations is not None else self.obs_noise_std,
            observations=observations,
            n_max=self.n_max,
            potential=self.potential,
        )


def parse_config(text: str) -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEY_ORDER:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", key)
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", key)
        raw[key] = value
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}", key)
    for key, value in DEFAULTS.items():
        raw.setdefault(key, value)
    raw.setdefault("obs_noise_std", raw["delta"])

    try:
        params = ModelParams(_float(raw, "D"), _float(raw, "delta"), _float(raw, "eps"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"model parameters: {exc}") from None
    try:
        grid = Grid(_float(raw, "grid_min"), _float(raw, "grid_max"), _int(raw, "grid_n"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"grid: {exc}") from None
    try:
        prior = PriorSpec.parse(raw["prior"])
    except ValueError as exc:
        raise ConfigError(f"key 'prior': {exc}", "prior") from None
    t_final = _float(raw, "t_final")
    seed = _int(raw, "seed")
    n_max = _int(raw, "n_max")
    if n_max < 2:
        raise ConfigError("key 'n_max': must be at least 2", "n_max")
    noise = _float(raw, "obs_noise_std")
    potential = parse_potential(raw["potential"], params.delta)
    cfg = RunConfig(raw, params, grid, prior, t_final, seed, n_max, noise, potential)
    try:
        cfg.scenario()
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None


def write_csv(path: str, header: tuple, columns: list, metadata: list[str] = ()) -> None:
    """Write columns (arrays of floats, or lists of str) as CSV with ``#`` metadata."""
    lines = [f"# {m}" for m in metadata]
    lines.append(",".join(header))
    n = len(columns[0]) if columns else 0
    cells = [[c if isinstance(c, str) else fmt(c) for c in col] for col in columns]
    for i in range(n):
        lines.append(",".join(col[i] for col in cells))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str, header: tuple, numeric: bool = True) -> dict:
    """Columns of a CSV written by ``write_csv``; ``#`` lines are skipped."""
    with open(path) as fh:
        rows = [line.rstrip("\n") for line in fh if line.strip() and not line.startswith("#")]
    if not rows or tuple(rows[0].split(",")) != tuple(header):
        raise ValueError(f"{path}: expected header {','.join(header)}")
    body = [r.split(",") for r in rows[1:]]
    if any(len(r) != len(header) for r in body):
        raise ValueError(f"{path}: ragged rows")
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in body]
        out[name] = np.array(col, dtype=float) if numeric else col
    return out


def read_metadata(path: str) -> dict:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") and "=" in line:
                key, value = line[1:].split("=", 1)
                meta[key.strip()] = value.strip()
    return meta


def read_observations(path: str, eps: float) -> ObservationSeries:
    """Read ``t,x`` rows and check ``t_i = i * eps``."""
    cols = read_csv(path, ("t", "x"))
    t = cols["t"]
    expected = eps * np.arange(1, t.size + 1)
    if not np.allclose(t, expected, rtol=1e-9, atol=1e-12):
        raise ValueError(f"{path}: observation times are not i*eps for eps={eps}")
    return ObservationSeries(eps, cols["x"])
