"""Experiment orchestration: configs, replicate-parallel execution with
deterministic per-replicate streams, and diff-able CSV / JSON-lines output.

Replicate r always uses the stream (seed, r), and replicates are assembled
in index order, so records are identical for any worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .rng import RngStream

CSV_COLUMNS = [
    "experiment",
    "d",
    "n",
    "reps",
    "seed",
    "estimate",
    "std_error",
    "ci_low",
    "ci_high",
    "exact_target",
    "pass",
    "runtime_ms",
]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    d: int = 2
    n: int | None = None
    n_sweep: tuple = ()
    gamma: float | None = None
    R: float | None = None
    reps: int = 1000
    seed: int = 0
    workers: int = 1
    se_band: float = 4.0
    options: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if not self.experiment:
            raise ConfigError("experiment: name must be nonempty")
        if self.d < 1:
            raise ConfigError("d: must be >= 1")
        if self.reps < 1:
            raise ConfigError("reps: must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        return self

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)


@dataclass
class ResultRecord:
    experiment: str
    d: int
    n: object
    reps: int
    seed: int
    estimate: float | None
    std_error: float | None
    ci_low: float | None
    ci_high: float | None
    exact_target: float | None
    passed: bool | None
    runtime_ms: float = 0.0

    @classmethod
    def from_estimate(
        cls,
        config: ExperimentConfig,
        name: str,
        estimate,
        exact_target: float | None = None,
        n=None,
        passed: bool | None = None,
    ) -> "ResultRecord":
        lo, hi = estimate.ci(config.se_band)
        if passed is None and exact_target is not None:
            passed = estimate.covers(exact_target, config.se_band)
        return cls(
            experiment=name,
            d=config.d,
            n=n if n is not None else config.n,
            reps=config.reps,
            seed=config.seed,
            estimate=estimate.value,
            std_error=estimate.std_error,
            ci_low=lo,
            ci_high=hi,
            exact_target=exact_target,
            passed=passed,
        )

    def csv_row(self, include_runtime: bool = True) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return f"{v:.12g}"
            return str(v)

        fields = [
            self.experiment,
            fmt(self.d),
            fmt(self.n),
            fmt(self.reps),
            fmt(self.seed),
            fmt(self.estimate),
            fmt(self.std_error),
            fmt(self.ci_low),
            fmt(self.ci_high),
            fmt(self.exact_target),
            fmt(self.passed),
        ]
        fields.append(f"{self.runtime_ms:.3f}" if include_runtime else "")
        return ",".join(fields)

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "d": self.d,
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "exact_target": self.exact_target,
            "pass": self.passed,
            "runtime_ms": self.runtime_ms,
        }


def records_to_csv(records, include_runtime: bool = True) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines += [r.csv_row(include_runtime) for r in records]
    return "\n".join(lines) + "\n"


def strip_runtime_column(csv_text: str) -> str:
    out = []
    for line in csv_text.strip().split("\n"):
        out.append(",".join(line.split(",")[:-1]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Replicate-parallel map
# ---------------------------------------------------------------------------

_WORKER_FN = None


def _init_worker(fn):
    global _WORKER_FN
    _WORKER_FN = fn


def _run_block(args):
    seed, lo, hi = args
    return [_WORKER_FN(RngStream(seed, r).generator(), r) for r in range(lo, hi)]


def map_replicates(fn, reps: int, seed: int, workers: int = 1, block: int = 64) -> list:
    """fn(rng, replicate_index) over replicate streams (seed, 0..reps-1).

    Output order and content are independent of the worker count; the only
    requirement on fn is picklability (module-level function or partial).
    """
    if workers <= 1 or reps < 2 * block:
        return [fn(RngStream(seed, r).generator(), r) for r in range(reps)]
    blocks = [(seed, lo, min(lo + block, reps)) for lo in range(0, reps, block)]
    results: list = []
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(fn,)
    ) as pool:
        for chunk in pool.map(_run_block, blocks):
            results.extend(chunk)
    return results


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

EXPERIMENTS: dict = {}


def register_experiment(name: str):
    def deco(fn):
        EXPERIMENTS[name] = fn
        return fn

    return deco


def run_experiment(config: ExperimentConfig) -> list[ResultRecord]:
    """Dispatch a named experiment; records carry wall-clock runtimes."""
    config.validate()
    fn = EXPERIMENTS.get(config.experiment)
    if fn is None:
        raise ConfigError(f"experiment: unknown name {config.experiment!r}")
    t0 = time.perf_counter()
    records = fn(config)
    elapsed = (time.perf_counter() - t0) * 1000.0
    for r in records:
        if r.runtime_ms == 0.0:
            r.runtime_ms = elapsed / max(len(records), 1)
    return records


def config_from_json(obj: dict) -> ExperimentConfig:
    known = {
        "experiment",
        "d",
        "n",
        "n_sweep",
        "gamma",
        "R",
        "reps",
        "seed",
        "workers",
        "se_band",
        "options",
    }
    bad = set(obj) - known
    if bad:
        raise ConfigError(f"{sorted(bad)[0]}: unknown config field")
    if "n_sweep" in obj:
        obj = dict(obj)
        obj["n_sweep"] = tuple(obj["n_sweep"])
    return ExperimentConfig(**obj).validate()


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_json(json.load(fh))
