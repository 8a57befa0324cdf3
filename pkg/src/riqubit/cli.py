"""Command-line runner: ``riqubit <kind> --config FILE`` or ``riqubit preset <id>``.

Exit codes: 0 success, 2 invalid input, 3 no convergence, 4 degenerate parameters.
Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import eta, is_degenerate, steady_population
from .collision import _fmt, run_trajectory
from .config import ExperimentConfig, resolve_state
from .errors import ContractViolation, DegenerateParametersError, NonConvergenceError
from .metrics import n_star_bound_diagonal, n_star_numeric
from .model import PARAM_FIELDS, QubitState, effective_beta
from .presets import PRESETS, preset
from .protocols import ProtocolConfig, RegimeWarning, randomized_thermalization, regime_diagnostics, run_ensemble
from .thermo import asymptotic_housekeeping, cumulative_work_closed

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3
EXIT_DEGENERATE = 4

SWEEP_COLUMNS = ("beta", "epsilon", "metric", "n_star", "total_work", "achieved_distance", "p_inf", "status")


class PartialResult(Exception):
    """Carries the exit code of a run that still wrote its output."""

    def __init__(self, exc: Exception):
        super().__init__(str(exc))
        self.exc = exc


def _point_inputs(cfg: ExperimentConfig, point: dict, state0: QubitState):
    params = cfg.params.replace(**{k: v for k, v in point.items() if k in PARAM_FIELDS})
    state = state0 if "p0" not in point else QubitState(point["p0"], state0.c)
    return params, state, point.get("epsilon", cfg.epsilon), point.get("metric", cfg.metric)


def _refuse_degenerate(params) -> None:
    if is_degenerate(params):
        raise DegenerateParametersError(
            "refusing degenerate parameters: tau*theta and tau*phi are both multiples of 2*pi "
            "(or the transverse couplings vanish), so eta = 1 and the state never relaxes",
            eta=eta(params),
        )


def _summary_path(out: Path) -> Path:
    return out.with_name(out.stem + ".summary.json")


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return _fmt(x)


# --- simulate ---------------------------------------------------------------


def run_simulate(cfg: ExperimentConfig, out: Path | None) -> dict:
    state0 = resolve_state(cfg.initial_state)
    points = cfg.grid_points()
    names = [a.name for a in cfg.sweep_axes]
    prepared = []
    for point in points:
        params, state, eps, metric = _point_inputs(cfg, point, state0)
        _refuse_degenerate(params)
        prepared.append((point, params, state, eps, metric))

    runs = []
    writer = fh = None
    if out is not None:
        fh = out.open("w", newline="")
        writer = csv.writer(fh)
    try:
        for i, (point, params, state, eps, metric) in enumerate(prepared):
            record = run_trajectory(state, params, cfg.n_steps, with_ledger=cfg.with_ledger, stride=cfg.stride)
            if writer is not None:
                if i == 0:
                    writer.writerow(names + record.csv_header())
                prefix = [_cell(point[n]) for n in names]
                writer.writerows(prefix + row for row in record.csv_rows())
            p_inf = steady_population(params)
            final = record.final
            try:
                report = n_star_numeric(state, params, eps, metric, max_steps=cfg.max_steps)
                n_star, work = report.n_star, report.total_work
            except NonConvergenceError:
                n_star, work = None, None
            runs.append({
                **point,
                "final_p": final.p,
                "final_abs_c": abs(final.c),
                "p_inf": p_inf,
                "endpoint_error": abs(final.p - p_inf),
                "epsilon": eps,
                "metric": metric,
                "n_star": n_star,
                "total_work": work,
            })
    finally:
        if fh is not None:
            fh.close()

    summary = {"kind": "simulate", "n_steps": cfg.n_steps, "initial_state": state0.to_dict(), "runs": runs}
    if out is not None:
        _write_json(_summary_path(out), summary)
    last = runs[-1]
    summary["line"] = (
        f"simulate: {len(runs)} run(s) of {cfg.n_steps} collisions; last final p={last['final_p']:.10g}, "
        f"|c|={last['final_abs_c']:.3e}, max |p - p_inf|={max(r['endpoint_error'] for r in runs):.3e}, "
        f"n*={last['n_star']}"
    )
    return summary


# --- steady -----------------------------------------------------------------


def run_steady(cfg: ExperimentConfig, out: Path | None) -> dict:
    names = [a.name for a in cfg.sweep_axes]
    rows = []
    for point in cfg.grid_points():
        params = cfg.params.replace(**{k: v for k, v in point.items() if k in PARAM_FIELDS})
        degenerate = is_degenerate(params)
        if degenerate and not names:
            _refuse_degenerate(params)
        p_inf = None if degenerate else steady_population(params)
        # the steady state's own temperature is generally not the ancilla's
        beta_s = None if p_inf is None else effective_beta(QubitState(p_inf), params.omega_s)
        rows.append({**point, "eta": eta(params), "p_inf": p_inf, "p_a": params.p_a, "beta_ancilla": params.beta,
                     "beta_s_inf": beta_s, "degenerate": degenerate})
    columns = names + ["eta", "p_inf", "p_a", "beta_ancilla", "beta_s_inf", "degenerate"]
    if out is not None:
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            writer.writerows([_cell(r[c]) for c in columns] for r in rows)
    values = [r["p_inf"] for r in rows if r["p_inf"] is not None]
    n_bad = sum(r["degenerate"] for r in rows)
    line = f"steady: {len(rows)} point(s), {n_bad} degenerate"
    if values:
        line += f", p_inf in [{min(values):.6g}, {max(values):.6g}]"
    return {"kind": "steady", "rows": rows, "line": line}


# --- resources and sweep ----------------------------------------------------


def _resources_point(args) -> dict:
    params, state, eps, metric, route, max_steps = args
    row = {"beta": params.beta, "epsilon": eps, "metric": metric, "n_star": None, "total_work": None,
           "achieved_distance": None, "p_inf": None, "status": "ok"}
    try:
        p_inf = steady_population(params)
        row["p_inf"] = p_inf
        if route == "bound":
            if not state.is_diagonal(0.0):
                raise ContractViolation("the closed-form bound needs a diagonal initial state")
            n = n_star_bound_diagonal(state.p, params, eps)
            row["n_star"] = n
            row["total_work"] = cumulative_work_closed(state.p, params, n)
            row["achieved_distance"] = abs(eta(params)) ** n * abs(state.p - p_inf)
        else:
            report = n_star_numeric(state, params, eps, metric, max_steps=max_steps)
            row.update(n_star=report.n_star, total_work=report.total_work,
                       achieved_distance=report.achieved_distance)
    except DegenerateParametersError:
        row["status"] = "degenerate"
    except NonConvergenceError as exc:
        row["status"] = "no_convergence"
        row["achieved_distance"] = exc.best_distance
    return row


def run_resources(cfg: ExperimentConfig, out: Path | None) -> dict:
    state0 = resolve_state(cfg.initial_state)
    params, state, eps, metric = _point_inputs(cfg, {}, state0)
    _refuse_degenerate(params)
    if cfg.route == "bound":
        n = n_star_bound_diagonal(state.p, params, eps)
        p_inf = steady_population(params)
        result = {"n_star": n, "metric": "trace_distance", "epsilon": eps,
                  "achieved_distance": abs(eta(params)) ** n * abs(state.p - p_inf),
                  "total_work": cumulative_work_closed(state.p, params, n), "p_inf": p_inf}
        failure = None
    else:
        try:
            result = n_star_numeric(state, params, eps, metric, max_steps=cfg.max_steps).to_dict()
            failure = None
        except NonConvergenceError as exc:
            result = {"n_star": None, "metric": metric, "epsilon": eps, "achieved_distance": exc.best_distance,
                      "n_best": exc.n_best, "total_work": None, "p_inf": steady_population(params)}
            failure = exc
    w_inf, q_inf = asymptotic_housekeeping(params)
    result.update(w_inf=w_inf, q_inf=q_inf, route=cfg.route, params=params.to_dict(),
                  initial_state=state.to_dict(), status="ok" if failure is None else "no_convergence")
    if out is not None:
        _write_json(out, result)
    if failure is not None:
        raise PartialResult(failure)
    result["line"] = (
        f"resources: n*={result['n_star']} ({result['metric']}, epsilon={eps:g}), "
        f"total work={result['total_work']:.6g}, w_inf={w_inf:.6g}, q_inf={q_inf:.6g}"
    )
    return result


def run_sweep(cfg: ExperimentConfig, out: Path | None, jobs: int = 1) -> dict:
    state0 = resolve_state(cfg.initial_state)
    names = [a.name for a in cfg.sweep_axes]
    points = cfg.grid_points()
    tasks = []
    for point in points:
        params, state, eps, metric = _point_inputs(cfg, point, state0)
        tasks.append((params, state, eps, metric, cfg.route, cfg.max_steps))
    if jobs > 1:
        # map() keeps input order, so rows stay row-major whatever finishes first
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_resources_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_resources_point(t) for t in tasks]
    rows = [{**r, **point} for point, r in zip(points, results)]
    columns = names + [c for c in SWEEP_COLUMNS if c not in names]
    if out is not None:
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            writer.writerows([_cell(r[c]) for c in columns] for r in rows)
    counts = {s: sum(r["status"] == s for r in rows) for s in ("ok", "degenerate", "no_convergence")}
    return {
        "kind": "sweep",
        "rows": rows,
        "counts": counts,
        "line": f"sweep: {len(rows)} point(s); ok={counts['ok']}, degenerate={counts['degenerate']}, "
        f"no_convergence={counts['no_convergence']}",
    }


# --- thermalize -------------------------------------------------------------


def protocol_config(cfg: ExperimentConfig) -> ProtocolConfig:
    proto = cfg.protocol or {}
    p = cfg.params
    return ProtocolConfig(
        omega=p.omega_s,
        omega_a=None if p.omega_a == p.omega_s else p.omega_a,
        j_max=float(proto["j_max"]),
        tau=p.tau,
        n_max=cfg.n_steps,
        seed=int(proto.get("seed", 0)),
        beta=p.beta,
        signed=bool(proto.get("signed", False)),
        randomize_jzz=bool(proto.get("randomize_jzz", False)),
    )


def run_thermalize(cfg: ExperimentConfig, out: Path | None) -> dict:
    state0 = resolve_state(cfg.initial_state)
    pc = protocol_config(cfg)
    proto = cfg.protocol or {}
    diag = regime_diagnostics(pc)
    for msg in diag.warnings:
        print(json.dumps({"warning": msg}), file=sys.stderr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        record = randomized_thermalization(state0, pc)
    ensemble = run_ensemble(
        state0, pc, int(proto.get("n_seeds", 1)),
        threshold=float(proto.get("threshold", 0.02)), window=int(proto.get("window", 10)),
    )
    summary = {
        "seeds_run": ensemble.seeds_run,
        "success_fraction": ensemble.success_fraction,
        "median_n_to_threshold": ensemble.median_n_to_threshold,
        "rng": ensemble.rng,
        "first_seed": pc.seed,
        "threshold": ensemble.threshold,
        "window": ensemble.window,
        "hits": ensemble.hits,
        "diagnostics": diag.to_dict(),
        "exploratory": pc.exploratory,
        "initial_state": state0.to_dict(),
    }
    if out is not None:
        record.to_csv(out)
        _write_json(_summary_path(out), summary)
    summary["line"] = (
        f"thermalize: {ensemble.success_fraction:.0%} of {ensemble.seeds_run} seeds within "
        f"{ensemble.window} collisions (threshold {ensemble.threshold:g}); median n={ensemble.median_n_to_threshold}; "
        f"seed {pc.seed} final p={record.final.p:.6g}, |c|={abs(record.final.c):.3e}"
    )
    return summary


RUNNERS = {
    "simulate": run_simulate,
    "steady": run_steady,
    "resources": run_resources,
    "thermalize": run_thermalize,
}


def run(cfg: ExperimentConfig, out: Path | None = None, jobs: int = 1) -> dict:
    """Dispatch ``cfg`` to its pipeline; returns a summary dict with a ``line`` entry."""
    if out is None and cfg.output_path:
        out = Path(cfg.output_path)
    if out is not None and not out.parent.exists():
        raise ContractViolation(f"output directory {out.parent} does not exist")
    if cfg.kind == "sweep":
        return run_sweep(cfg, out, jobs)
    return RUNNERS[cfg.kind](cfg, out)


# --- argument handling ------------------------------------------------------


def _parse_set(items) -> dict:
    changes = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ContractViolation(f"--set expects NAME=VALUE, got {item!r}")
        if name not in PARAM_FIELDS:
            raise ContractViolation(f"--set: unknown parameter {name!r}; allowed: {', '.join(PARAM_FIELDS)}")
        try:
            changes[name] = float(value)
        except ValueError:
            raise ContractViolation(f"--set {name}: {value!r} is not a number") from None
    return changes


def apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        if isinstance(cfg.initial_state, str):
            changes["initial_state"] = f"random({args.seed})"
        if cfg.protocol is not None:
            changes["protocol"] = {**cfg.protocol, "seed": args.seed}
    if args.stride is not None:
        changes["stride"] = args.stride
    if args.max_steps is not None:
        changes["max_steps"] = args.max_steps
    if args.epsilon is not None:
        changes["epsilon"] = args.epsilon
    if args.metric is not None:
        changes["metric"] = args.metric
    if args.n_steps is not None:
        changes["n_steps"] = args.n_steps
    params = _parse_set(args.set)
    if params:
        changes["params"] = cfg.params.replace(**params)
    return cfg.replace(**changes) if changes else cfg


class _Parser(argparse.ArgumentParser):
    """Turns usage errors into validation errors so they are reported as JSON."""

    def error(self, message):
        raise ContractViolation(f"{self.prog}: {message}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="output file (CSV, or JSON for resources)")
    p.add_argument("--seed", type=int, help="seed for random(...) initial states and protocol draws")
    p.add_argument("--stride", type=int, help="record every K-th state")
    p.add_argument("--max-steps", type=int, help="cap on collisions in the n* search")
    p.add_argument("--epsilon", type=float, help="convergence threshold")
    p.add_argument("--metric", choices=("trace", "infidelity"), help="distance used for n*")
    p.add_argument("--n-steps", type=int, help="number of collisions to simulate")
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="override a model parameter")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--save-config", type=Path, help="write the effective config JSON here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="riqubit", description="Repeated-interaction qubit experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ("simulate", "steady", "resources", "thermalize", "sweep"):
        p = sub.add_parser(kind, help=f"run a {kind} experiment from a config file")
        p.add_argument("--config", type=Path, required=True, help="experiment config JSON")
        _add_common(p)
    p = sub.add_parser("preset", help="run a figure preset")
    p.add_argument("preset_id", choices=sorted(PRESETS, key=lambda s: int(s[3:])))
    p.add_argument("--dump", action="store_true", help="print the preset config and exit")
    _add_common(p)
    return parser


def _error_payload(exc: Exception, code: int) -> dict:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, DegenerateParametersError) and exc.eta is not None:
        payload["eta"] = exc.eta
    if isinstance(exc, NonConvergenceError):
        payload.update(best_distance=exc.best_distance, n_best=exc.n_best, n_steps=exc.n_steps)
    return payload


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "preset":
            cfg = preset(args.preset_id)
        else:
            cfg = ExperimentConfig.load(args.config).replace(kind=args.command)
        cfg = apply_overrides(cfg, args)
        if args.command == "preset" and args.dump:
            print(cfg.to_json())
            return EXIT_OK
        if args.save_config is not None:
            cfg.save(args.save_config)
        if args.jobs < 1:
            raise ContractViolation("--jobs must be >= 1")
        summary = run(cfg, args.out, jobs=args.jobs)
    except PartialResult as partial:
        exc = partial.exc
        code = EXIT_NO_CONVERGENCE
    except ContractViolation as exc_:
        exc, code = exc_, EXIT_INVALID
    except NonConvergenceError as exc_:
        exc, code = exc_, EXIT_NO_CONVERGENCE
    except DegenerateParametersError as exc_:
        exc, code = exc_, EXIT_DEGENERATE
    else:
        print(summary["line"])
        return EXIT_OK
    print(json.dumps(_error_payload(exc, code), default=_json_default), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
