"""Command-line front end.

Subcommands
-----------
bound            constrained CRB for a configured set, point and Fisher information
mc               Monte Carlo estimator study against the bound (optionally a sweep)
verify           randomized property suites
counterexamples  the two singular-Fisher counterexamples

Configs are JSON objects; see ``CONFIG_KEYS`` for the accepted keys. Output
is JSON with sorted keys and every float written with 17 significant digits.
Matrices are ``{"rows": r, "cols": c, "data": [[...], ...]}`` (row-major).

Exit codes: 0 success, 1 usage/config error, 2 bound computed but infeasible,
3 property-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import matlin, models, tangent, verify
from .crb import FisherContext, constrained_crb
from .errors import CcrbError, ConfigError
from .matlin import DEFAULT_TOL, Tolerances

CONFIG_KEYS = {
    "set", "theta", "model", "fisher", "bias_gradient", "estimator",
    "n", "seed", "tolerances", "output", "sweep",
}
CSV_COLUMNS = ("k", "sigma", "n", "empirical_trace", "bound_trace", "verdict")
U64 = 1 << 64

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SUITE = 0, 1, 2, 3


# --- serialization ---------------------------------------------------------------


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def matrix_record(m) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": m.tolist()}


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with sorted keys and full-precision floats."""
    pad = " " * indent

    def emit(x, depth):
        if isinstance(x, dict):
            if not x:
                return "{}"
            inner = pad * (depth + 1)
            items = [
                f"{inner}{json.dumps(str(k))}: {emit(x[k], depth + 1)}" for k in sorted(x)
            ]
            return "{\n" + ",\n".join(items) + "\n" + pad * depth + "}"
        if isinstance(x, (list, tuple)):
            if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
                   for v in x):
                return "[" + ", ".join(emit(v, depth) for v in x) + "]"
            if not x:
                return "[]"
            inner = pad * (depth + 1)
            return "[\n" + ",\n".join(inner + emit(v, depth + 1) for v in x) + "\n" + pad * depth + "]"
        if isinstance(x, np.ndarray):
            return emit(x.tolist(), depth)
        if isinstance(x, (bool, np.bool_)):
            return "true" if x else "false"
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if isinstance(x, (float, np.floating)):
            return fmt_float(float(x))
        if x is None:
            return "null"
        return json.dumps(x)

    return emit(obj, 0) + "\n"


def csv_text(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(
            [fmt_float(v) if isinstance(v, float) else v for v in (r[c] for c in CSV_COLUMNS)]
        )
    return buf.getvalue()


# --- config parsing --------------------------------------------------------------

SET_PARAMS = {
    "euclidean": ("k",),
    "sphere": ("k",),
    "stiefel": ("p", "q"),
    "orthogonal": ("p",),
    "special_orthogonal": ("p",),
    "fixed_rank": ("p", "q", "r"),
    "fixed_rank_psd": ("p", "r"),
    "positive_definite": ("p",),
    "sparse": ("k", "s"),
    "product": ("factors",),
}
ESTIMATORS = {"ml_project": (), "unbiased_sphere": ("a",), "linear": ("matrix",), "identity": ()}


def _require_dict(x, key: str) -> dict:
    if not isinstance(x, dict):
        raise ConfigError(key, "expected an object")
    return x


def _check_keys(d: dict, allowed, prefix: str) -> None:
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{prefix}{k}", "unknown key")


def _int(x, key: str, lo: int = 0) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < lo:
        raise ConfigError(key, f"expected an integer >= {lo}")
    return x


def _float(x, key: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(key, "expected a finite number")
    return float(x)


def _matrix(x, key: str) -> np.ndarray:
    if isinstance(x, dict) and {"rows", "cols", "data"} >= set(x) and "data" in x:
        x = x["data"]
    try:
        m = np.array(x, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(key, "expected a matrix (list of rows)") from None
    if m.ndim != 2 or not np.all(np.isfinite(m)):
        raise ConfigError(key, "expected a finite matrix (list of rows)")
    return m


def parse_set(spec, key: str = "set") -> tangent.ConstraintSet:
    spec = _require_dict(spec, key)
    kind = spec.get("type")
    if kind not in SET_PARAMS:
        raise ConfigError(f"{key}.type", f"unknown set type {kind!r}")
    params = SET_PARAMS[kind]
    _check_keys(spec, ("type",) + params, f"{key}.")
    for p in params:
        if p not in spec:
            raise ConfigError(f"{key}.{p}", "missing")
    if kind == "product":
        factors = spec["factors"]
        if not isinstance(factors, list) or not factors:
            raise ConfigError(f"{key}.factors", "expected a non-empty list")
        return tangent.Product(
            tuple(parse_set(f, f"{key}.factors[{i}]") for i, f in enumerate(factors))
        )
    v = {p: _int(spec[p], f"{key}.{p}", lo=0 if p == "s" else 1) for p in params}
    try:
        return {
            "euclidean": lambda: tangent.Euclidean(v["k"]),
            "sphere": lambda: tangent.Sphere(v["k"]),
            "stiefel": lambda: tangent.Stiefel(v["p"], v["q"]),
            "orthogonal": lambda: tangent.OrthogonalGroup(v["p"]),
            "special_orthogonal": lambda: tangent.SpecialOrthogonal(v["p"]),
            "fixed_rank": lambda: tangent.FixedRank(v["p"], v["q"], v["r"]),
            "fixed_rank_psd": lambda: tangent.FixedRankPsd(v["p"], v["r"]),
            "positive_definite": lambda: tangent.PositiveDefinite(v["p"]),
            "sparse": lambda: tangent.Sparse(v["k"], v["s"]),
        }[kind]()
    except (ValueError, CcrbError) as exc:
        raise ConfigError(key, str(exc)) from None


def default_point(cset: tangent.ConstraintSet) -> np.ndarray:
    """A canonical point of each catalog set."""
    if isinstance(cset, tangent.Product):
        return np.concatenate([default_point(f) for f in cset.factors])
    if isinstance(cset, tangent.Sphere):
        return np.eye(cset.n)[0]
    if isinstance(cset, tangent.Stiefel):
        return tangent.vec(np.eye(cset.p, cset.q))
    if isinstance(cset, tangent.FixedRank):
        x = np.zeros((cset.p, cset.q))
        x[range(cset.r), range(cset.r)] = 1.0
        return tangent.vec(x)
    if isinstance(cset, tangent.FixedRankPsd):
        return tangent.vec(np.diag([1.0] * cset.r + [0.0] * (cset.p - cset.r)))
    if isinstance(cset, tangent.PositiveDefinite):
        return tangent.vec(np.eye(cset.p))
    return np.zeros(cset.k)


def parse_theta(x, cset: tangent.ConstraintSet) -> np.ndarray:
    if x is None or x in ("default", "identity"):
        return default_point(cset)
    if x == "e1":
        return np.eye(cset.k)[0]
    if x == "corner":
        return np.zeros(cset.k)
    if isinstance(x, str):
        raise ConfigError("theta", f"unknown preset {x!r}")
    if not isinstance(x, list):
        raise ConfigError("theta", "expected a list of numbers or a preset name")
    theta = np.array([_float(v, f"theta[{i}]") for i, v in enumerate(x)])
    if theta.size != cset.k:
        raise ConfigError("theta", f"expected {cset.k} entries, got {theta.size}")
    return theta


def parse_tolerances(x) -> Tolerances:
    if x is None:
        return DEFAULT_TOL
    x = _require_dict(x, "tolerances")
    fields = DEFAULT_TOL.__dict__.keys()
    _check_keys(x, fields, "tolerances.")
    try:
        return DEFAULT_TOL.replace(**{k: _float(v, f"tolerances.{k}") for k, v in x.items()})
    except ValueError as exc:
        raise ConfigError("tolerances", str(exc)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict
    set: tangent.ConstraintSet
    theta: np.ndarray
    sigma: float
    fisher: Optional[np.ndarray]
    bias_gradient: Any  # None, matrix or "estimate"
    estimator: dict
    n: int
    seed: int
    tol: Tolerances
    output: Optional[str]
    sweep: Optional[dict]

    @property
    def model(self) -> models.GaussianDenoiseModel:
        return models.GaussianDenoiseModel(self.set, self.sigma)

    def with_grid_point(self, param: str, value) -> "ExperimentConfig":
        raw = dict(self.raw)
        if param == "sigma":
            raw["model"] = {**raw.get("model", {}), "sigma": value}
        else:
            raw["set"] = {**raw["set"], "k": value}
        raw.pop("sweep", None)
        return parse_config(raw, self.seed, self.output)


def parse_config(raw, seed: Optional[int] = None, out: Optional[str] = None) -> ExperimentConfig:
    raw = _require_dict(raw, "config")
    _check_keys(raw, CONFIG_KEYS, "")
    if "set" not in raw:
        raise ConfigError("set", "missing")
    cset = parse_set(raw["set"])
    theta = parse_theta(raw.get("theta"), cset)

    model = _require_dict(raw.get("model", {}), "model")
    _check_keys(model, ("sigma",), "model.")
    sigma = _float(model.get("sigma", 1.0), "model.sigma")
    if sigma <= 0:
        raise ConfigError("model.sigma", "must be positive")

    fisher = raw.get("fisher")
    if fisher is not None and fisher != "model":
        fisher = _matrix(fisher, "fisher")
        if fisher.shape != (cset.k, cset.k):
            raise ConfigError("fisher", f"expected {cset.k}x{cset.k}")
    else:
        fisher = None

    db = raw.get("bias_gradient")
    if db is not None and db != "estimate":
        db = _matrix(db, "bias_gradient")
        if db.shape != (cset.k, cset.k):
            raise ConfigError("bias_gradient", f"expected {cset.k}x{cset.k}")

    est = _require_dict(raw.get("estimator", {"kind": "ml_project"}), "estimator")
    kind = est.get("kind", "ml_project")
    if kind not in ESTIMATORS:
        raise ConfigError("estimator.kind", f"unknown estimator {kind!r}")
    _check_keys(est, ("kind",) + ESTIMATORS[kind], "estimator.")
    est = dict(est, kind=kind)
    if kind == "unbiased_sphere":
        if not isinstance(cset, tangent.Sphere):
            raise ConfigError("estimator.kind", "unbiased_sphere needs a sphere set")
        if "a" in est:
            est["a"] = _float(est["a"], "estimator.a")
    if kind == "linear":
        if "matrix" not in est:
            raise ConfigError("estimator.matrix", "missing")
        est["matrix"] = _matrix(est["matrix"], "estimator.matrix")
        if est["matrix"].shape != (cset.k, cset.k):
            raise ConfigError("estimator.matrix", f"expected {cset.k}x{cset.k}")

    n = raw.get("n", 10_000)
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ConfigError("n", "must be an integer >= 2")

    if seed is None:
        seed = raw.get("seed")
        if seed is None:
            seed = env_seed()
        seed = _int(seed, "seed")
    if seed >= U64:
        raise ConfigError("seed", "must fit in 64 bits")

    sweep = raw.get("sweep")
    if sweep is not None:
        sweep = _require_dict(sweep, "sweep")
        _check_keys(sweep, ("param", "values"), "sweep.")
        if sweep.get("param") not in ("sigma", "k"):
            raise ConfigError("sweep.param", "expected 'sigma' or 'k'")
        values = sweep.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values", "expected a non-empty list")
        if sweep["param"] == "k":
            if "k" not in SET_PARAMS.get(raw["set"].get("type"), ()):
                raise ConfigError("sweep.param", "k sweeps need a set with a 'k' parameter")
            if isinstance(raw.get("theta"), list):
                raise ConfigError("theta", "k sweeps need a preset point")
            values = [_int(v, f"sweep.values[{i}]", 1) for i, v in enumerate(values)]
        else:
            values = [_float(v, f"sweep.values[{i}]") for i, v in enumerate(values)]
        sweep = {"param": sweep["param"], "values": values}

    output = out if out is not None else raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output", "expected a path string")

    return ExperimentConfig(
        raw=raw, set=cset, theta=theta, sigma=sigma, fisher=fisher, bias_gradient=db,
        estimator=est, n=n, seed=seed, tol=parse_tolerances(raw.get("tolerances")),
        output=output, sweep=sweep,
    )


def env_seed() -> int:
    value = os.environ.get("CCRB_DEFAULT_SEED")
    if value is None:
        return 0
    try:
        seed = int(value)
    except ValueError:
        raise ConfigError("CCRB_DEFAULT_SEED", "expected an integer") from None
    if not 0 <= seed < U64:
        raise ConfigError("CCRB_DEFAULT_SEED", "must be an unsigned 64-bit integer")
    return seed


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None


# --- commands --------------------------------------------------------------------


def build_estimator(cfg: ExperimentConfig, threads: int = 1):
    kind = cfg.estimator["kind"]
    if kind == "ml_project":
        return models.MlProject(cfg.set), {}
    if kind == "identity":
        return models.Linear(np.eye(cfg.set.k)), {}
    if kind == "linear":
        return models.Linear(cfg.estimator["matrix"]), {}
    if "a" in cfg.estimator:
        return models.UnbiasedSphere(cfg.estimator["a"]), {"a": cfg.estimator["a"]}
    cal = models.calibrate_sphere_a(cfg.set.k, cfg.sigma, cfg.n, cfg.seed + 1, threads)
    return models.UnbiasedSphere(cal.a), {"a": cal.a, "a_se": cal.se, "calibration_seed": cfg.seed + 1}


def compute_bound(cfg: ExperimentConfig, threads: int = 1) -> dict:
    span = tangent.tangent_span(cfg.set, cfg.theta, cfg.tol)
    j = cfg.fisher if cfg.fisher is not None else models.fisher(cfg.model, cfg.theta)
    db = cfg.bias_gradient
    if isinstance(db, str):
        est, _ = build_estimator(cfg, threads)
        db = models.mc_bias_gradient(
            est, cfg.model, cfg.theta, span, n=cfg.n, seed=cfg.seed, threads=threads
        ).as_db(span)
    res = constrained_crb(FisherContext(j, db), span, cfg.tol)
    return {
        "bound": matrix_record(res.bound),
        "trace": res.trace,
        "d": span.d,
        "projector": matrix_record(span.pi),
        "feasible": res.feasible,
        "rule": res.rule,
        "fisher": matrix_record(j),
        "bias_gradient": None if db is None else matrix_record(db),
        "_result": res,
    }


def config_echo(cfg: ExperimentConfig) -> dict:
    echo = {k: v for k, v in cfg.raw.items() if k not in ("output",)}
    echo["seed"] = cfg.seed
    echo["theta"] = cfg.theta.tolist()
    return echo


def cmd_bound(cfg: ExperimentConfig, threads: int = 1) -> tuple[dict, int]:
    t0 = time.perf_counter()
    rec = compute_bound(cfg, threads)
    rec.pop("_result")
    rec["config"] = config_echo(cfg)
    rec["wall_time"] = time.perf_counter() - t0
    return rec, EXIT_OK if rec["feasible"] else EXIT_INFEASIBLE


def mc_point(cfg: ExperimentConfig, threads: int = 1) -> dict:
    est, est_info = build_estimator(cfg, threads)
    rep = models.mc_report(est, cfg.model, cfg.theta, cfg.n, cfg.seed, threads)
    b = compute_bound(cfg, threads)
    verdict = models.bound_vs_empirical(rep, b["_result"])
    return {
        "k": cfg.set.k,
        "sigma": cfg.sigma,
        "n": cfg.n,
        "empirical_trace": float(np.trace(rep.mse)),
        "bound_trace": b["trace"],
        "verdict": "holds" if verdict.holds else "fails",
        "feasible": b["feasible"],
        "estimator": est_info,
        "mean": rep.mean.tolist(),
        "cov": matrix_record(rep.cov),
        "mse": matrix_record(rep.mse),
        "bound": b["bound"],
        "min_eig_gap": verdict.min_eig,
        "slack": verdict.slack,
    }


def cmd_mc(cfg: ExperimentConfig, threads: int = 1) -> tuple[dict, int]:
    t0 = time.perf_counter()
    if cfg.sweep is None:
        points = [cfg]
    else:
        points = [cfg.with_grid_point(cfg.sweep["param"], v) for v in cfg.sweep["values"]]
    rows = [mc_point(p, threads) for p in points]
    rec = {
        "config": config_echo(cfg),
        "rows": rows,
        "csv_columns": list(CSV_COLUMNS),
        "wall_time": time.perf_counter() - t0,
    }
    code = EXIT_OK if all(r["feasible"] for r in rows) else EXIT_INFEASIBLE
    return rec, code


def suite_record(results: list) -> dict:
    return {
        "properties": [
            {"name": r.name, "passed": r.passed, "total": r.total, "failures": list(r.failures)}
            for r in results
        ],
        "ok": all(r.ok for r in results),
    }


def print_suite(results: list, stream) -> None:
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} {r.name}: {r.passed}/{r.total}", file=stream)
        for f in r.failures:
            print(f"    {f}", file=stream)


def cmd_verify(suite: str, seed: int, trials: Optional[int]) -> tuple[dict, int]:
    if suite != "all" and suite not in verify.SUITES:
        raise ConfigError("suite", f"unknown suite {suite!r}; choose from all, {', '.join(verify.SUITES)}")
    t0 = time.perf_counter()
    results = verify.run_suite(suite, trials, seed)
    rec = {"suite": suite, "seed": seed, "trials": trials, **suite_record(results)}
    rec["wall_time"] = time.perf_counter() - t0
    return rec, EXIT_OK if rec["ok"] else EXIT_SUITE


def cmd_counterexamples() -> tuple[dict, int]:
    from .crb import bound_via_basis, constrained_bound_u

    t0 = time.perf_counter()
    j1, w = np.ones((2, 2)), np.diag([1.0, 0.0])
    b = constrained_bound_u(FisherContext(j1), w).bound
    ctx = FisherContext(np.diag([1.0, 0.0]))
    b1 = bound_via_basis(ctx, np.eye(2))
    b2 = bound_via_basis(ctx, np.array([[1.0, 1.0], [0.0, 1.0]]))
    results = verify.suite_counterexamples()
    rec = {
        "singular_fisher": {
            "fisher": matrix_record(j1),
            "w": matrix_record(w),
            "bound": matrix_record(b),
            "pinv_fisher": matrix_record(matlin.pinv(j1)),
            "pinv_dominates_bound": matlin.loewner_geq(matlin.pinv(j1), b),
        },
        "same_column_space": {
            "fisher": matrix_record(ctx.j),
            "bound_w1": matrix_record(b1),
            "bound_w2": matrix_record(b2),
            "max_entry_difference": float(np.max(np.abs(b1 - b2))),
        },
        **suite_record(results),
    }
    rec["wall_time"] = time.perf_counter() - t0
    return rec, EXIT_OK if rec["ok"] else EXIT_SUITE


# --- entry point -----------------------------------------------------------------

EPILOG = f"""\
mc CSV columns (in order): {", ".join(CSV_COLUMNS)}.
  empirical_trace is the trace of the Monte Carlo MSE matrix; bound_trace the
  trace of the constrained bound; verdict is 'holds' when the sample covariance
  dominates the bound within 6 standard errors. One row per sweep grid point.
  The CSV is written next to --out with a .csv suffix.

config keys: {", ".join(sorted(CONFIG_KEYS))}.
exit codes: 0 ok, 1 usage/config error, 2 infeasible bound, 3 suite failure.
seed: --seed, else config "seed", else $CCRB_DEFAULT_SEED, else 0.
"""


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an unsigned 64-bit integer") from None
    if not 0 <= v < U64:
        raise argparse.ArgumentTypeError("expected an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="random seed (u64)")
    common.add_argument("--out", default=None, help="output JSON path (default: stdout)")

    p = _Parser(
        prog="ccrb",
        description="Constrained Cramer-Rao bounds: compute, simulate, verify.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("bound", "compute the constrained CRB"), ("mc", "Monte Carlo study")):
        s = sub.add_parser(
            name, parents=[common], help=text, epilog=EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        s.add_argument("--config", required=True, help="JSON config path")
        s.add_argument("--threads", type=_positive, default=1)
    s = sub.add_parser("verify", parents=[common], help="run property suites")
    s.add_argument("suite", nargs="?", default="all",
                   help=f"one of: all, {', '.join(verify.SUITES)}")
    s.add_argument("--trials", type=_positive, default=None)
    sub.add_parser("counterexamples", parents=[common], help="singular-Fisher counterexamples")
    return p


def write_outputs(rec: dict, out: Optional[str], stdout) -> None:
    text = dumps(rec)
    if out is None:
        stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    if "rows" in rec and "csv_columns" in rec:
        path.with_suffix(".csv").write_text(csv_text(rec["rows"]))


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command in ("bound", "mc"):
            cfg = parse_config(load_config(args.config), args.seed, args.out)
            fn = cmd_bound if args.command == "bound" else cmd_mc
            rec, code = fn(cfg, args.threads)
            out = cfg.output
        elif args.command == "verify":
            seed = args.seed if args.seed is not None else env_seed()
            rec, code = cmd_verify(args.suite, seed, args.trials)
            print_suite(verify_results_from(rec), stderr)
            out = args.out
        else:
            rec, code = cmd_counterexamples()
            print_suite(verify_results_from(rec), stderr)
            out = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (CcrbError, ValueError, NotImplementedError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_CONFIG
    write_outputs(rec, out, stdout)
    if code == EXIT_INFEASIBLE:
        print("bound is infeasible: no estimator with this bias gradient exists", file=stderr)
    return code


def verify_results_from(rec: dict) -> list:
    return [
        verify.PropertyResult(p["name"], p["passed"], p["total"], p["failures"])
        for p in rec["properties"]
    ]


if __name__ == "__main__":
    raise SystemExit(main())
