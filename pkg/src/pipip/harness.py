"""Configuration-driven coverage experiments.

A run is described by an INI file with four flat sections::

    [world]
    width = 9                      # grid columns
    height = 6                     # grid rows
    cell_side = 0.3
    origin = 0.15                  # centre coordinate of the first cell
    sensing_radius = 0.3
    obstacles = 0.75 1.35; 1.05 1.05        # cell centres, ';'-separated
    agents = 0.15 0.15; 0.15 0.45; 0.45 0.15; 0.45 0.45   # initial cells

    [density]
    kind = static-gaussian         # uniform | static-gaussian | moving-gaussian | tabulated
    mean = 1.95 1.35
    shape = 2.7777777777777777     # W = exp(-shape * |q - mean|^2)
    value = 1.0                    # uniform level
    table = 0.1 0.2 ...            # tabulated values, row-major (or table_file = path)
    scale = auto                   # or a number
    margin = 0.01

    [learning]
    algorithm = PHPIP              # PIPIP | PHPIP | DISL
    kappa = 0.5
    epsilon = 0.15                 # or "inhomogeneous" (PIPIP only)

    [run]
    horizon = 700
    seeds = 0-49                   # ranges and comma lists, e.g. 0-9,20,31
    output = runs/experiment1
    checkpoint_every = 100

Every key is optional.  ``emit_config`` writes the fully resolved config and
``parse_config(emit_config(c)) == c``.

Outputs of :func:`run_experiment`, per seed, in the output directory:

* ``seed_<seed>.csv``: columns ``t, epsilon, a_1..a_n, u_1..u_n, phi``;
  floats use ``repr`` so the file is byte-identical across reruns.
* ``seed_<seed>.summary``: ``key=value`` lines (see :class:`RunSummary`).

plus ``config.ini``, the resolved config echo.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .coverage import (
    GAUSSIAN_SHAPE,
    CoverageGame,
    CoverageWorld,
    DensityField,
    GridSpec,
    build_coverage_game,
    coverage_optimum,
    optimum_values,
)
from .learning import Algorithm, EpisodeTrace, LearnerParams, kappa_bounds, run_episode

DEFAULT_AGENTS = ((0.15, 0.15), (0.15, 0.45), (0.45, 0.15), (0.45, 0.45))
EXPERIMENT1_OBSTACLES = ((0.75, 1.35), (1.05, 1.05), (1.35, 0.75), (1.65, 0.45))
SUCCESS_FRACTION = 0.95
TRACKING_START = 100

_SCHEMA = {
    "world": ("width", "height", "cell_side", "origin", "sensing_radius", "obstacles", "agents"),
    "density": ("kind", "mean", "shape", "value", "table", "table_file", "scale", "margin"),
    "learning": ("algorithm", "kappa", "epsilon"),
    "run": ("horizon", "seeds", "output", "checkpoint_every"),
}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    width: int = 9
    height: int = 6
    cell_side: float = 0.3
    origin: float = 0.15
    sensing_radius: float = 0.3
    obstacles: tuple[tuple[float, float], ...] = ()
    agents: tuple[tuple[float, float], ...] = DEFAULT_AGENTS
    density: str = "uniform"
    mean: tuple[float, float] = (1.95, 1.35)
    shape: float = GAUSSIAN_SHAPE
    value: float = 1.0
    table: tuple[float, ...] | None = None
    scale: float | None = None
    margin: float = 0.01
    algorithm: str = "PHPIP"
    kappa: float = 0.5
    epsilon: float | None = 0.15
    horizon: int = 700
    seeds: tuple[int, ...] = tuple(range(50))
    output: str = "runs"
    checkpoint_every: int = 100

    # -- derived objects ------------------------------------------------------

    def grid(self) -> GridSpec:
        return GridSpec(self.width, self.height, self.cell_side, self.origin)

    def world(self) -> CoverageWorld:
        field_ = DensityField(self.density, tuple(self.mean), self.shape, self.value, self.table)
        return CoverageWorld.from_points(
            self.grid(), field_, self.obstacles,
            sensing_radius=self.sensing_radius, scale=self.scale, margin=self.margin,
        )

    def params(self) -> LearnerParams:
        return LearnerParams(kappa=self.kappa, epsilon=self.epsilon)

    def world_id(self) -> str:
        """Hash of the world and density sections, shared by arms that may be compared."""
        text = "\n".join(_world_lines(self))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


# -- parsing ------------------------------------------------------------------


def parse_points(text: str) -> tuple[tuple[float, float], ...]:
    points = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(f"expected 'x y' pairs, got {chunk.strip()!r}")
        points.append((float(parts[0]), float(parts[1])))
    return tuple(points)


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"0-4,10,12-13"`` -> ``(0, 1, 2, 3, 4, 10, 12, 13)``."""
    seeds: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return tuple(seeds)


def format_seeds(seeds: Sequence[int]) -> str:
    """Inverse of :func:`parse_seeds`, collapsing consecutive runs."""
    parts, i = [], 0
    seeds = list(seeds)
    while i < len(seeds):
        j = i
        while j + 1 < len(seeds) and seeds[j + 1] == seeds[j] + 1:
            j += 1
        parts.append(str(seeds[i]) if i == j else f"{seeds[i]}-{seeds[j]}")
        i = j + 1
    return ",".join(parts)


def _optional_float(text: str) -> float | None:
    text = text.strip().lower()
    return None if text in ("auto", "inhomogeneous", "decaying", "none") else float(text)


def parse_config(text: str, strict: bool = True, base_dir: str | os.PathLike | None = None) -> ExperimentConfig:
    """Parse and validate an experiment config.

    ``strict`` rejects unknown sections and keys.  ``table_file`` paths are
    resolved against ``base_dir``.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if strict:
        for section in cp.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key in cp[section]:
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")

    def get(section, key):
        return cp[section][key] if cp.has_option(section, key) else None

    kw: dict = {}
    try:
        for key, conv in (("width", int), ("height", int), ("cell_side", float), ("origin", float),
                          ("sensing_radius", float)):
            if (v := get("world", key)) is not None:
                kw[key] = conv(v)
        if (v := get("world", "obstacles")) is not None:
            kw["obstacles"] = parse_points(v)
        if (v := get("world", "agents")) is not None:
            kw["agents"] = parse_points(v)

        if (v := get("density", "kind")) is not None:
            kw["density"] = v.strip()
        if (v := get("density", "mean")) is not None:
            (kw["mean"],) = parse_points(v)
        for key in ("shape", "value", "margin"):
            if (v := get("density", key)) is not None:
                kw[key] = float(v)
        if (v := get("density", "scale")) is not None:
            kw["scale"] = _optional_float(v)
        table_text = get("density", "table")
        if (v := get("density", "table_file")) is not None:
            if table_text is not None:
                raise ConfigError("give either table or table_file, not both")
            path = Path(base_dir or ".") / v.strip()
            table_text = path.read_text()
        if table_text is not None:
            kw["table"] = tuple(float(x) for x in table_text.replace(",", " ").split())

        if (v := get("learning", "algorithm")) is not None:
            kw["algorithm"] = v.strip().upper()
        if (v := get("learning", "kappa")) is not None:
            kw["kappa"] = float(v)
        if (v := get("learning", "epsilon")) is not None:
            kw["epsilon"] = _optional_float(v)
        elif kw.get("algorithm") == "PIPIP":
            kw["epsilon"] = None

        if (v := get("run", "horizon")) is not None:
            kw["horizon"] = int(v)
        if (v := get("run", "seeds")) is not None:
            kw["seeds"] = parse_seeds(v)
        if (v := get("run", "output")) is not None:
            kw["output"] = v.strip()
        if (v := get("run", "checkpoint_every")) is not None:
            kw["checkpoint_every"] = int(v)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc

    config = ExperimentConfig(**kw)
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig) -> CoverageGame:
    """Check every invariant and return the built game."""
    try:
        algorithm = Algorithm(config.algorithm)
    except ValueError:
        raise ConfigError(f"unknown algorithm {config.algorithm!r}") from None
    if config.horizon < 2:
        raise ConfigError(f"horizon must be >= 2 (got {config.horizon})")
    if not config.seeds:
        raise ConfigError("no seeds given")
    if len(set(config.seeds)) != len(config.seeds):
        raise ConfigError("seeds must be distinct")
    if min(config.seeds) < 0:
        raise ConfigError("seeds must be nonnegative")
    if config.checkpoint_every < 1:
        raise ConfigError("checkpoint_every must be >= 1")
    if algorithm is Algorithm.PIPIP:
        if config.epsilon is not None:
            raise ConfigError("PIPIP uses the decaying exploration rate; set epsilon = inhomogeneous")
    elif config.epsilon is None:
        raise ConfigError(f"{algorithm.value} needs a constant epsilon")
    elif not 0.0 < config.epsilon <= 0.5:
        raise ConfigError(f"epsilon {config.epsilon} outside (0, 0.5]")
    if not config.agents:
        raise ConfigError("at least one agent is required")
    try:
        game = _game_for(config)
    except ValueError as exc:
        raise ConfigError(f"world does not build: {exc}") from exc
    lo, hi = kappa_bounds(game)
    if not lo < config.kappa <= hi:
        raise ConfigError(f"kappa {config.kappa} outside ({lo:.6g}, {hi}] for C = {game.max_choices}")
    initial_action(config, game)
    return game


def _fmt(x: float) -> str:
    return repr(float(x))


def _points(points) -> str:
    return "; ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in points)


def _world_lines(config: ExperimentConfig) -> list[str]:
    lines = [
        "[world]",
        f"width = {config.width}",
        f"height = {config.height}",
        f"cell_side = {_fmt(config.cell_side)}",
        f"origin = {_fmt(config.origin)}",
        f"sensing_radius = {_fmt(config.sensing_radius)}",
        f"obstacles = {_points(config.obstacles)}",
        f"agents = {_points(config.agents)}",
        "",
        "[density]",
        f"kind = {config.density}",
        f"mean = {_points([config.mean])}",
        f"shape = {_fmt(config.shape)}",
        f"value = {_fmt(config.value)}",
    ]
    if config.table is not None:
        lines.append("table = " + " ".join(_fmt(x) for x in config.table))
    lines += [
        f"scale = {'auto' if config.scale is None else _fmt(config.scale)}",
        f"margin = {_fmt(config.margin)}",
    ]
    return lines


def emit_config(config: ExperimentConfig) -> str:
    lines = _world_lines(config) + [
        "",
        "[learning]",
        f"algorithm = {config.algorithm}",
        f"kappa = {_fmt(config.kappa)}",
        f"epsilon = {'inhomogeneous' if config.epsilon is None else _fmt(config.epsilon)}",
        "",
        "[run]",
        f"horizon = {config.horizon}",
        f"seeds = {format_seeds(config.seeds)}",
        f"output = {config.output}",
        f"checkpoint_every = {config.checkpoint_every}",
    ]
    return "\n".join(lines) + "\n"


# -- presets ------------------------------------------------------------------

PRESETS: dict[str, ExperimentConfig] = {
    "experiment1": ExperimentConfig(
        obstacles=EXPERIMENT1_OBSTACLES,
        density="static-gaussian",
        epsilon=0.15,
        horizon=700,
        output="runs/experiment1",
    ),
    "experiment1-eps0.3": ExperimentConfig(
        obstacles=EXPERIMENT1_OBSTACLES,
        density="static-gaussian",
        epsilon=0.3,
        horizon=700,
        output="runs/experiment1-eps0.3",
    ),
    "experiment2": ExperimentConfig(
        density="moving-gaussian",
        epsilon=0.15,
        horizon=1000,
        seeds=tuple(range(20)),
        output="runs/experiment2",
    ),
}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_text(name: str) -> str:
    return emit_config(preset(name))


# -- running ------------------------------------------------------------------


def _game_for(config: ExperimentConfig) -> CoverageGame:
    return _build(config.world(), len(config.agents))


@lru_cache(maxsize=8)
def _build(world: CoverageWorld, n_agents: int) -> CoverageGame:
    return build_coverage_game(world, n_agents)


def initial_action(config: ExperimentConfig, game: CoverageGame) -> tuple[int, ...]:
    grid = config.grid()
    try:
        return tuple(game.action_of(grid.cell_at(p)) for p in config.agents)
    except ValueError as exc:
        raise ConfigError(f"bad initial position: {exc}") from exc


@dataclass
class RunSummary:
    """Per-seed outcome, stored as ``key=value`` lines.

    ``optimal_fraction`` is the share of steps whose potential is within
    1e-9 of the (per-step) optimum.  ``tracking_median`` is the median over
    ``t > 100`` of ``phi(t) / optimum(t)``; for static densities the optimum
    is constant.
    """

    algorithm: str
    seed: int
    horizon: int
    epsilon: float | None
    kappa: float
    final_phi: float
    optimum: float
    optimum_method: str
    optimal_fraction: float
    tracking_median: float
    world_id: str
    wall_clock: float = 0.0
    checkpoints: dict[int, float] = field(default_factory=dict)

    @property
    def final_ratio(self) -> float:
        return self.final_phi / self.optimum if self.optimum > 0 else math.nan

    @property
    def success(self) -> bool:
        return self.final_phi >= SUCCESS_FRACTION * self.optimum

    def to_text(self) -> str:
        rows = [
            ("algorithm", self.algorithm),
            ("seed", self.seed),
            ("horizon", self.horizon),
            ("epsilon", "inhomogeneous" if self.epsilon is None else _fmt(self.epsilon)),
            ("kappa", _fmt(self.kappa)),
            ("final_phi", _fmt(self.final_phi)),
            ("optimum", _fmt(self.optimum)),
            ("optimum_method", self.optimum_method),
            ("optimal_fraction", _fmt(self.optimal_fraction)),
            ("tracking_median", _fmt(self.tracking_median)),
            ("success", int(self.success)),
            ("world_id", self.world_id),
            ("wall_clock", f"{self.wall_clock:.6f}"),
        ]
        rows += [(f"checkpoint.{t}", _fmt(v)) for t, v in sorted(self.checkpoints.items())]
        return "".join(f"{k}={v}\n" for k, v in rows)

    @classmethod
    def from_text(cls, text: str) -> "RunSummary":
        data = {}
        for line in text.splitlines():
            if line.strip():
                key, _, value = line.partition("=")
                data[key.strip()] = value.strip()
        try:
            return cls(
                algorithm=data["algorithm"],
                seed=int(data["seed"]),
                horizon=int(data["horizon"]),
                epsilon=_optional_float(data["epsilon"]),
                kappa=float(data["kappa"]),
                final_phi=float(data["final_phi"]),
                optimum=float(data["optimum"]),
                optimum_method=data["optimum_method"],
                optimal_fraction=float(data["optimal_fraction"]),
                tracking_median=float(data["tracking_median"]),
                world_id=data["world_id"],
                wall_clock=float(data.get("wall_clock", 0.0)),
                checkpoints={int(k.split(".", 1)[1]): float(v) for k, v in data.items() if k.startswith("checkpoint.")},
            )
        except KeyError as exc:
            raise ValueError(f"summary is missing {exc.args[0]!r}") from None


def optimum_series(config: ExperimentConfig, horizon: int | None = None):
    """``(values, method)`` with ``values[t-1] = max_a phi_t(a)`` for ``t = 1..horizon``.

    Time-varying densities are solved once per distinct density vector.
    """
    horizon = horizon or config.horizon
    game = _game_for(config)
    world, n = game.world, game.n_agents
    if not world.density.time_varying:
        value, _, method = coverage_optimum(world, n)
        return np.full(horizon, value), method
    dens = np.array([world.density_vector(t) for t in range(1, horizon + 1)])
    uniq, inverse = np.unique(dens, axis=0, return_inverse=True)
    values, _ = optimum_values(world, n, uniq)
    return values[np.ravel(inverse)], "exact"


def tracking_ratios(trace: EpisodeTrace, optimum: np.ndarray, start: int = TRACKING_START) -> np.ndarray:
    """``phi(t) / optimum(t)`` for ``t > start``."""
    keep = trace.t > start
    return trace.potential[keep] / np.asarray(optimum)[keep]


def write_trace(trace: EpisodeTrace, path: str | os.PathLike) -> None:
    n = trace.actions.shape[1]
    header = ["t", "epsilon"] + [f"a_{i + 1}" for i in range(n)] + [f"u_{i + 1}" for i in range(n)] + ["phi"]
    lines = [",".join(header)]
    for k in range(len(trace)):
        row = [str(int(trace.t[k])), _fmt(trace.epsilon[k])]
        row += [str(int(x)) for x in trace.actions[k]]
        row += [_fmt(x) for x in trace.utilities[k]]
        row.append(_fmt(trace.potential[k]))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path: str | os.PathLike) -> dict[str, np.ndarray]:
    """Columns of a trace file keyed by header name."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def _checkpoint_times(horizon: int, every: int) -> list[int]:
    times = list(range(every, horizon + 1, every))
    if horizon not in times:
        times.append(horizon)
    return [t for t in times if t >= 2]


def summarize_trace(
    trace: EpisodeTrace,
    optimum,
    method: str = "exact",
    world_id: str = "",
    kappa: float = math.nan,
    epsilon: float | None = None,
    checkpoint_every: int = 100,
    wall_clock: float = 0.0,
) -> RunSummary:
    """Reduce an episode to a :class:`RunSummary`.

    ``optimum`` is a scalar or a per-step array aligned with the trace.
    """
    phi = trace.potential
    horizon = len(trace)
    optimum = np.broadcast_to(np.asarray(optimum, dtype=float), (horizon,)) if np.ndim(optimum) == 0 \
        else np.asarray(optimum, dtype=float)[:horizon]
    ratios = tracking_ratios(trace, optimum)
    return RunSummary(
        algorithm=trace.algorithm.value,
        seed=trace.seed,
        horizon=horizon,
        epsilon=epsilon,
        kappa=kappa,
        final_phi=float(phi[-1]),
        optimum=float(optimum[-1]),
        optimum_method=method,
        optimal_fraction=float(np.mean(phi >= optimum - 1e-9)),
        tracking_median=float(np.median(ratios)) if ratios.size else math.nan,
        world_id=world_id,
        wall_clock=wall_clock,
        checkpoints={t: float(phi[t - 1]) for t in _checkpoint_times(horizon, checkpoint_every)},
    )


def run_seed(config: ExperimentConfig, seed: int, optimum: np.ndarray, method: str, out_dir=None) -> RunSummary:
    """Run one seed, optionally writing its trace and summary into ``out_dir``."""
    game = _game_for(config)
    start = time.perf_counter()
    trace = run_episode(
        game, config.algorithm, config.params(), config.horizon, seed,
        initial_action(config, game), validate=False, time_varying=game.time_varying,
    )
    summary = summarize_trace(
        trace, optimum, method, config.world_id(), config.kappa, config.epsilon,
        config.checkpoint_every, time.perf_counter() - start,
    )
    if out_dir is not None:
        out = Path(out_dir)
        write_trace(trace, out / f"seed_{seed:04d}.csv")
        (out / f"seed_{seed:04d}.summary").write_text(summary.to_text())
    return summary


def run_experiment(config: ExperimentConfig, threads: int = 1, out_dir=None) -> list[RunSummary]:
    """Run every seed of ``config`` and write traces, summaries and a config echo.

    ``out_dir`` defaults to ``config.output``; pass ``False`` to skip writing.
    Results do not depend on ``threads``.
    """
    validate_config(config)
    if out_dir is None:
        out_dir = config.output
    if out_dir is not False:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "config.ini").write_text(emit_config(config))
    else:
        out_dir = None
    optimum, method = optimum_series(config)
    if threads <= 1 or len(config.seeds) == 1:
        return [run_seed(config, s, optimum, method, out_dir) for s in config.seeds]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run_seed, config, s, optimum, method, out_dir) for s in config.seeds]
        return [f.result() for f in futures]


# -- analysis -----------------------------------------------------------------


def load_summaries(directory: str | os.PathLike) -> list[RunSummary]:
    """Every ``*.summary`` file below ``directory``, sorted by arm and seed."""
    paths = sorted(Path(directory).rglob("*.summary"))
    summaries = [RunSummary.from_text(p.read_text()) for p in paths]
    return sorted(summaries, key=lambda s: (s.algorithm, s.seed))


@dataclass
class ArmStats:
    algorithm: str
    n_seeds: int
    median_final_phi: float
    iqr_final_phi: tuple[float, float]
    median_final_ratio: float
    success_rate: float
    median_optimal_fraction: float
    median_tracking: float


@dataclass
class ComparisonReport:
    world_id: str
    optimum: float
    arms: dict[str, ArmStats]

    def lines(self) -> list[str]:
        out = [f"world {self.world_id}  optimum {self.optimum:.6g}"]
        for arm in self.arms.values():
            lo, hi = arm.iqr_final_phi
            out.append(
                f"{arm.algorithm:6s} seeds={arm.n_seeds:3d}  median final phi={arm.median_final_phi:.6g} "
                f"(IQR {lo:.6g}..{hi:.6g}, {arm.median_final_ratio:.3f} of optimum)  "
                f"success={arm.success_rate:.3f}  optimal-time={arm.median_optimal_fraction:.3f}  "
                f"tracking={arm.median_tracking:.3f}"
            )
        return out


def aggregate(summaries: Iterable[RunSummary] | Mapping[str, Sequence[RunSummary]]) -> ComparisonReport:
    """Per-arm medians, IQRs and success rates.

    Accepts a flat iterable (grouped by ``algorithm``) or an explicit mapping
    from arm name to summaries.  Raises on empty arms and on arms that ran
    different worlds or horizons.
    """
    if isinstance(summaries, Mapping):
        groups = {k: list(v) for k, v in summaries.items()}
    else:
        groups = {}
        for s in summaries:
            groups.setdefault(s.algorithm, []).append(s)
    if not groups:
        raise ValueError("no summaries to aggregate")
    for name, group in groups.items():
        if not group:
            raise ValueError(f"arm {name!r} has no summaries")
    everything = [s for g in groups.values() for s in g]
    worlds = {s.world_id for s in everything}
    if len(worlds) > 1:
        raise ValueError(f"arms ran different worlds: {sorted(worlds)}")
    horizons = {s.horizon for s in everything}
    if len(horizons) > 1:
        raise ValueError(f"arms ran different horizons: {sorted(horizons)}")

    arms = {}
    for name, group in groups.items():
        final = np.array([s.final_phi for s in group])
        arms[name] = ArmStats(
            algorithm=name,
            n_seeds=len(group),
            median_final_phi=float(np.median(final)),
            iqr_final_phi=(float(np.quantile(final, 0.25)), float(np.quantile(final, 0.75))),
            median_final_ratio=float(np.median([s.final_ratio for s in group])),
            success_rate=float(np.mean([s.success for s in group])),
            median_optimal_fraction=float(np.median([s.optimal_fraction for s in group])),
            median_tracking=float(np.median([s.tracking_median for s in group])),
        )
    return ComparisonReport(worlds.pop(), everything[0].optimum, arms)
