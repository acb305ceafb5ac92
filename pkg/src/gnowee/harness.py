"""Multi-trial campaigns, summary statistics, the figure of merit and CSV reports."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .engine import GnoweeSettings, RunResult, Termination, fitness_threshold, run
from .problem import Problem

__all__ = [
    "CONVERGENCE_COLUMNS",
    "SUMMARY_COLUMNS",
    "TRIAL_COLUMNS",
    "SchemaError",
    "TrialError",
    "TrialRecord",
    "TrialStats",
    "aggregate",
    "compute_fom",
    "derive_seed",
    "is_premature",
    "read_summary",
    "run_trials",
    "write_report",
]

SUMMARY_COLUMNS = (
    "name", "n_trials", "f_avg", "f_sigma", "n_avg", "n_sigma", "f_best", "n_best",
    "premature_fraction", "fom_avg", "fom_best", "f_opt",
)  # fmt: skip
TRIAL_COLUMNS = ("trial", "seed", "best_fitness", "evals", "termination")
CONVERGENCE_COLUMNS = ("trial", "eval_count", "best_fitness")


class TrialError(RuntimeError):
    def __init__(self, trial: int, cause: BaseException):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial


def derive_seed(base_seed: int, trial: int) -> int:
    """Independent 64-bit seed for one trial of a campaign."""
    ss = np.random.SeedSequence([int(base_seed), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def compute_fom(f_avg: float, f_opt: float, n_avg: float, n_sigma: float) -> float:
    """Relative fitness error times ``n_avg + 3 n_sigma``; absolute error when ``f_opt`` is 0."""
    if n_avg < 0 or n_sigma < 0:
        raise ValueError("evaluation counts must be non-negative")
    denom = abs(f_opt) if abs(f_opt) > 1e-12 else 1.0
    return (f_avg - f_opt) / denom * (n_avg + 3.0 * n_sigma)


def is_premature(best_fitness: float, f_opt: float | None, tol: float = 0.01) -> bool:
    if f_opt is None:
        return False
    return not best_fitness <= fitness_threshold(f_opt, tol)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    best_fitness: float
    evals: int
    termination: str
    feasible: bool = True
    history: tuple = ()
    best_values: tuple = ()

    @classmethod
    def from_result(cls, trial: int, seed: int, res: RunResult) -> "TrialRecord":
        values = res.best_values
        flat = tuple(np.asarray(v).tolist() if isinstance(v, np.ndarray) else float(v) for v in values)
        return cls(
            trial, seed, float(res.best_fitness), int(res.total_evals), Termination(res.termination).value,
            bool(res.feasible), tuple(res.history), flat,
        )  # fmt: skip


@dataclass(frozen=True)
class TrialStats:
    name: str
    n_trials: int
    f_avg: float
    f_sigma: float
    n_avg: float
    n_sigma: float
    f_best: float
    n_best: int
    premature_fraction: float
    fom_avg: float
    fom_best: float
    f_opt: float | None = None

    def row(self) -> dict:
        return asdict(self)


def aggregate(name: str, records: list[TrialRecord], f_opt: float | None, tol: float = 0.01) -> TrialStats:
    """Population statistics over per-trial records (sigmas divide by ``n_trials``)."""
    if not records:
        raise ValueError("at least one trial record is needed")
    f = np.array([r.best_fitness for r in records], dtype=float)
    n = np.array([r.evals for r in records], dtype=float)
    best = min(records, key=lambda r: (r.best_fitness, r.evals))
    f_avg, f_sigma = float(f.mean()), float(f.std())
    n_avg, n_sigma = float(n.mean()), float(n.std())
    if f_opt is None:
        fom_avg = fom_best = math.nan
    else:
        fom_avg = compute_fom(f_avg, f_opt, n_avg, n_sigma)
        fom_best = compute_fom(best.best_fitness, f_opt, best.evals, 0.0)
    premature = sum(is_premature(r.best_fitness, f_opt, tol) for r in records) / len(records)
    return TrialStats(
        name, len(records), f_avg, f_sigma, n_avg, n_sigma, best.best_fitness, best.evals,
        premature, fom_avg, fom_best, f_opt,
    )  # fmt: skip


def _one_trial(args) -> TrialRecord:
    problem, settings, trial = args
    seed = settings.seed
    try:
        res = run(problem, settings)
    except Exception as exc:
        raise TrialError(trial, exc) from exc
    return TrialRecord.from_result(trial, seed, res)


def run_trials(
    problem: Problem, settings: GnoweeSettings, n_trials: int, jobs: int = 1
) -> tuple[TrialStats, list[TrialRecord]]:
    """Run ``n_trials`` independent runs seeded from ``settings.seed`` and the trial index."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    tasks = [(problem, settings.with_seed(derive_seed(settings.seed, t)), t) for t in range(n_trials)]
    if jobs > 1 and n_trials > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, n_trials)) as pool:
            records = list(pool.map(_one_trial, tasks))
    else:
        records = [_one_trial(t) for t in tasks]
    f_opt = problem.reference_optimum
    stats = aggregate(problem.name, records, f_opt, settings.criteria.fitness_rel_tol)
    return stats, records


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def write_report(
    stats: TrialStats | list[TrialStats] | None, records: list[TrialRecord], destination, prefix: str = ""
) -> dict[str, Path]:
    """Write ``summary.csv``, ``trials.csv`` and ``convergence.csv`` into ``destination``."""
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    if stats is None:
        stats = []
    elif isinstance(stats, TrialStats):
        stats = [stats]
    paths = {
        "summary": dest / f"{prefix}summary.csv",
        "trials": dest / f"{prefix}trials.csv",
        "convergence": dest / f"{prefix}convergence.csv",
    }
    _write_csv(paths["summary"], SUMMARY_COLUMNS, [s.row() for s in stats])
    ordered = sorted(records, key=lambda r: r.trial)
    _write_csv(paths["trials"], TRIAL_COLUMNS, [asdict(r) for r in ordered])
    conv = (
        {"trial": r.trial, "eval_count": e, "best_fitness": float(f)} for r in ordered for e, f in r.history
    )
    _write_csv(paths["convergence"], CONVERGENCE_COLUMNS, conv)
    return paths


class SchemaError(ValueError):
    pass


_INT_COLUMNS = {"n_trials", "n_best"}


def read_summary(path) -> list[TrialStats]:
    """Parse a summary CSV back into :class:`TrialStats` rows."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        required = [f.name for f in fields(TrialStats) if f.name != "f_opt"]
        for col in required:
            if col not in header:
                raise SchemaError(f"summary CSV {path} lacks column {col!r}")
        out = []
        for lineno, row in enumerate(reader, 2):
            kw = {}
            for col in required + (["f_opt"] if "f_opt" in header else []):
                raw = row.get(col)
                try:
                    if col == "name":
                        kw[col] = raw
                    elif col == "f_opt" and raw in ("", None):
                        kw[col] = None
                    elif col in _INT_COLUMNS:
                        kw[col] = int(raw)
                    else:
                        kw[col] = float(raw)
                except (TypeError, ValueError):
                    raise SchemaError(f"summary CSV {path} line {lineno}: bad value {raw!r} in column {col!r}") from None
            out.append(TrialStats(**kw))
        return out
