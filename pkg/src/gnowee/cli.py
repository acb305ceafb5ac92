"""Command-line interface: ``gnowee list | run | fom``."""

from __future__ import annotations

import argparse
import hashlib
import importlib
import importlib.util
import json
import math
import os
import sys
from pathlib import Path

from .benchmarks import UnknownProblemError, describe, get_problem
from .engine import GnoweeSettings, SettingsError
from .harness import SchemaError, TrialError, compute_fom, read_summary, run_trials, write_report
from .problem import Problem
from .space import DesignSpace, SpaceError

__all__ = ["ConfigError", "build_parser", "load_problem_file", "main", "resolve_config"]


class ConfigError(ValueError):
    """Bad configuration; maps to exit code 2."""


def _on_off(text: str) -> bool:
    v = str(text).lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


# config key -> (flag, type); settings keys match GnoweeSettings.from_dict
_SETTING_FLAGS = {
    "max_evals": ("--max-evals", int),
    "stall_evals": ("--stall-evals", int),
    "stall_tol": ("--stall-tol", float),
    "fitness_tol": ("--fitness-tol", float),
    "population": ("--population", int),
    "alpha": ("--alpha", float),
    "gamma": ("--gamma", float),
    "beta": ("--beta", float),
    "f_levy": ("--f-levy", float),
    "f_elite": ("--f-elite", float),
    "f_mh": ("--f-mh", float),
    "f_mutation": ("--f-mutation", float),
    "init": ("--init", str),
    "tsp_distance_bias": ("--tsp-distance-bias", _on_off),
}
_CAMPAIGN_FLAGS = {
    "problem": ("--problem", str),
    "problem_file": ("--problem-file", str),
    "trials": ("--trials", int),
    "seed": ("--seed", int),
    "out": ("--out", str),
    "jobs": ("--jobs", int),
}
_CAMPAIGN_DEFAULTS = {"trials": 100, "seed": 0, "out": "results", "jobs": None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnowee", description="Gnowee benchmark runner")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list registered benchmark problems")

    run_p = sub.add_parser("run", help="run a multi-trial campaign and write CSV reports")
    run_p.add_argument("--config", help="JSON file with any of the flag settings (flags win)")
    for key, (flag, typ) in {**_CAMPAIGN_FLAGS, **_SETTING_FLAGS}.items():
        kw = {"dest": key, "default": None, "type": typ}
        if key == "init":
            kw["choices"] = ["lhc", "uniform"]
        if key == "tsp_distance_bias":
            kw["metavar"] = "{on,off}"
        run_p.add_argument(flag, **kw)

    fom_p = sub.add_parser("fom", help="recompute the figure of merit from a summary CSV")
    fom_p.add_argument("summary", help="path to a summary.csv written by 'gnowee run'")
    return parser


def _coerce(path: str, key: str, value, typ):
    if value is None and key == "jobs":
        return None
    try:
        if typ is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if typ is float:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if typ is str:
            if not isinstance(value, str):
                raise ValueError
            return value
        if isinstance(value, bool):
            return value
        return typ(value)
    except (TypeError, ValueError, argparse.ArgumentTypeError):
        raise ConfigError(f"{path}: key {key!r} has invalid value {value!r}") from None


def _read_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = {**_CAMPAIGN_FLAGS, **_SETTING_FLAGS}
    out = {}
    for key, value in doc.items():
        if key not in known:
            raise ConfigError(f"{path}: unknown key {key!r}")
        out[key] = _coerce(path, key, value, known[key][1])
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (flags take precedence)."""
    merged = dict(_CAMPAIGN_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(_read_config(args.config))
    for key in {**_CAMPAIGN_FLAGS, **_SETTING_FLAGS}:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    if bool(merged.get("problem")) == bool(merged.get("problem_file")):
        raise ConfigError("exactly one of --problem or --problem-file is required")
    return merged


def _settings(merged: dict) -> GnoweeSettings:
    doc = {k: merged[k] for k in _SETTING_FLAGS if k in merged}
    doc["seed"] = merged["seed"]
    try:
        return GnoweeSettings.from_dict(doc)
    except SettingsError as exc:
        raise ConfigError(f"invalid settings: {exc}") from None


def _load_callable(ref: str, base: Path):
    if ":" not in ref:
        raise ConfigError(f"callable reference {ref!r} must look like 'module:function' or 'file.py:function'")
    mod_name, func_name = ref.rsplit(":", 1)
    if mod_name.endswith(".py"):
        path = (base / mod_name).resolve()
        key = f"_gnowee_user_{path.stem}_{hashlib.sha1(str(path).encode()).hexdigest()[:12]}"
        module = sys.modules.get(key)
        if module is None:
            spec = importlib.util.spec_from_file_location(key, path)
            if spec is None or not path.is_file():
                raise ConfigError(f"cannot load module file {path}")
            module = importlib.util.module_from_spec(spec)
            sys.modules[key] = module
            spec.loader.exec_module(module)
    else:
        try:
            module = importlib.import_module(mod_name)
        except ImportError as exc:
            raise ConfigError(f"cannot import {mod_name!r}: {exc}") from None
    try:
        return getattr(module, func_name)
    except AttributeError:
        raise ConfigError(f"{mod_name!r} has no attribute {func_name!r}") from None


def load_problem_file(path: str) -> Problem:
    """Build a problem from a JSON definition.

    Keys: ``name``, ``variables`` (list of variable documents),
    ``objective`` and optionally ``constraints``/``equality`` as
    ``module:function`` or ``file.py:function`` references (files resolve
    relative to the definition), ``known_optimum``.
    """
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read problem file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    for key in ("variables", "objective"):
        if key not in doc:
            raise ConfigError(f"{path}: missing key {key!r}")
    try:
        space = DesignSpace.from_dict({"variables": doc["variables"]})
    except (SpaceError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: key 'variables': {exc}") from None
    base = p.parent
    known = doc.get("known_optimum")
    return Problem(
        name=doc.get("name", p.stem),
        space=space,
        objective=_load_callable(doc["objective"], base),
        inequality=_load_callable(doc["constraints"], base) if doc.get("constraints") else None,
        equality=_load_callable(doc["equality"], base) if doc.get("equality") else None,
        known_optimum=None if known is None else float(known),
    )


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def cmd_list(out=None) -> int:
    out = out or sys.stdout
    rows = [("name", "kinds", "dim", "optimum")]
    for info in describe():
        name = info.name if info.implemented else f"{info.name} (not implemented)"
        opt = "-" if info.optimum is None else f"{info.optimum:g}"
        dim = str(info.dimension) if info.implemented else "-"
        rows.append((name, info.kinds, dim, opt))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip(), file=out)
    return 0


def cmd_run(merged: dict, out=None) -> int:
    out = out or sys.stdout
    settings = _settings(merged)
    if merged.get("problem_file"):
        problem = load_problem_file(merged["problem_file"])
    else:
        try:
            problem = get_problem(merged["problem"])
        except UnknownProblemError as exc:
            raise ConfigError(str(exc)) from None
    if merged["trials"] < 1:
        raise ConfigError("trials must be at least 1")
    jobs = merged.get("jobs") or os.cpu_count() or 1
    stats, records = run_trials(problem, settings, merged["trials"], jobs=jobs)
    paths = write_report(stats, records, merged["out"])
    cols = ("name", "n_trials", "f_avg", "f_sigma", "n_avg", "n_sigma", "f_best", "n_best",
            "premature_fraction", "fom_avg", "fom_best")  # fmt: skip
    row = stats.row()
    print(",".join(cols), file=out)
    print(",".join(_fmt(row[c]) for c in cols), file=out)
    print(f"reports written to {paths['summary'].parent}", file=out)
    return 0


def cmd_fom(path: str, out=None) -> int:
    out = out or sys.stdout
    rows = read_summary(path)
    for s in rows:
        if s.f_opt is None:
            raise SchemaError(f"summary CSV {path}: row {s.name!r} has no value in column 'f_opt'")
        print(f"{s.name},{compute_fom(s.f_avg, s.f_opt, s.n_avg, s.n_sigma):.6g}", file=out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "list":
            return cmd_list()
        if args.command == "fom":
            try:
                return cmd_fom(args.summary)
            except OSError as exc:
                raise ConfigError(str(exc)) from None
        return cmd_run(resolve_config(args))
    except (ConfigError, SchemaError) as exc:
        print(f"gnowee: error: {exc}", file=sys.stderr)
        return 2
    except NotImplementedError as exc:
        print(f"gnowee: error: {exc}", file=sys.stderr)
        return 1
    except (TrialError, RuntimeError, OSError) as exc:
        print(f"gnowee: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
