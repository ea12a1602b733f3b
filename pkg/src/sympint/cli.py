"""Command-line front end: integration runs, certification batteries,
convergence studies, and long-run method comparisons. Emits CSV/JSON only
(plotting is a consumer concern); all outputs are byte-identical across
reruns with the same config."""

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, SolverFailure, SympintError
from .integrators import (ORDER_OF, MethodSpec, integrate, make_stepper,
                          parse_scheme, run_long)
from .phase_space import eval_energy, make_state
from .reference import make_reference
from .solvers import SolverMethod, SolverPolicy
from .systems import get_system
from .verify import certify_scheme, make_polygon, measured_order, \
    polygon_area_drift

_BATTERY_H = (0.5, 0.1, 0.02)
_ORDER_H = (0.4, 0.2, 0.1, 0.05, 0.025)
_AREA_VERTICES = 64
_AREA_RADIUS = 0.1
_AREA_MAX_STEPS = 1000


@dataclass
class RunConfig:
    """Resolved settings of one CLI invocation; the JSON config file mirrors
    these fields and command-line flags override file values."""

    command: str
    system: str
    method: Optional[str] = None
    methods: Optional[list] = None
    alpha: Optional[float] = None
    h: Optional[list] = None          # one or more step sizes
    steps: int = 0
    q0: Optional[list] = None
    p0: Optional[list] = None
    t0: float = 0.0
    solver: str = "newton"
    tol: float = 1e-12
    max_iter: int = 50
    seed: int = 0
    n_states: int = 20
    expect_symplectic: Optional[bool] = None
    box: float = 0.8
    horizon: float = 1.0
    record_every: Optional[int] = None
    out: Optional[str] = None

    def to_metadata(self) -> str:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        return json.dumps(d, sort_keys=True)


def _parse_float_list(text) -> list:
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(tok) for tok in str(text).split(",") if tok.strip()]
        except ValueError as err:
            raise ConfigError(f"could not parse float list {text!r}") from err
    if not vals:
        raise ConfigError("empty float list")
    return vals


def _parse_str_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [tok.strip() for tok in str(text).split(",") if tok.strip()]


def _fmt(v) -> str:
    return repr(float(v))


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


_CONFIG_KEYS = {f for f in RunConfig.__dataclass_fields__} - {"command"}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults < config file < explicit flags into a RunConfig."""
    merged = {}
    if args.config:
        file_cfg = _load_config_file(args.config)
        unknown = set(file_cfg) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}; "
                              f"known: {sorted(_CONFIG_KEYS)}")
        merged.update(file_cfg)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val

    if "system" not in merged:
        raise ConfigError("missing required setting: system")
    if merged.get("h") is not None:
        merged["h"] = _parse_float_list(merged["h"])
    if merged.get("q0") is not None:
        merged["q0"] = _parse_float_list(merged["q0"])
    if merged.get("p0") is not None:
        merged["p0"] = _parse_float_list(merged["p0"])
    if merged.get("methods") is not None:
        merged["methods"] = _parse_str_list(merged["methods"])
    cfg = RunConfig(command=args.command, **merged)

    if cfg.steps < 0:
        raise ConfigError("steps must be >= 0")
    if cfg.steps > 0 and cfg.h is not None and any(v == 0.0 for v in cfg.h):
        raise ConfigError("h must be nonzero when steps > 0")
    if cfg.solver not in {m.value for m in SolverMethod}:
        raise ConfigError(f"unknown solver '{cfg.solver}'; choose from "
                          f"{sorted(m.value for m in SolverMethod)}")
    return cfg


def _system_and_state(cfg: RunConfig):
    sysdef = get_system(cfg.system)
    q0 = cfg.q0 if cfg.q0 is not None else [0.0] * sysdef.dim
    p0 = cfg.p0 if cfg.p0 is not None else [0.0] * sysdef.dim
    if len(q0) != sysdef.dim or len(p0) != sysdef.dim:
        raise ConfigError(f"system '{sysdef.name}' needs {sysdef.dim} "
                          f"q/p components, got q0={len(q0)}, p0={len(p0)}")
    return sysdef, make_state(np.array(q0), np.array(p0), cfg.t0)


def _method_spec(cfg: RunConfig, name: Optional[str] = None) -> MethodSpec:
    scheme = parse_scheme(name if name is not None else cfg.method)
    policy = SolverPolicy(method=SolverMethod(cfg.solver), tol=cfg.tol,
                          max_iter=cfg.max_iter)
    return MethodSpec(scheme=scheme, alpha=cfg.alpha, solver=policy)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as err:
            raise ConfigError(f"cannot write output file: {err}") from err
    else:
        sys.stdout.write(text)


def _csv_document(cfg: RunConfig, header: list, rows: list) -> str:
    lines = [f"# sympint {cfg.command}",
             f"# config: {cfg.to_metadata()}",
             ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


# --- subcommands -------------------------------------------------------------

def cmd_integrate(cfg: RunConfig) -> int:
    if cfg.method is None:
        raise ConfigError("missing required setting: method")
    if cfg.steps > 0 and cfg.h is None:
        raise ConfigError("missing required setting: h (steps > 0)")
    if cfg.h is not None and len(cfg.h) != 1:
        raise ConfigError("integrate expects a single h value")
    sysdef, s0 = _system_and_state(cfg)
    spec = _method_spec(cfg)
    h = cfg.h[0] if cfg.h else 0.0
    traj = integrate(sysdef, s0, spec, h, cfg.steps)
    n = sysdef.dim
    header = (["t"] + [f"q_{i}" for i in range(n)]
              + [f"p_{i}" for i in range(n)] + ["H"])
    rows = [[s.t, *s.q.tolist(), *s.p.tolist(), e]
            for s, e in zip(traj.states, traj.energies)]
    _emit(cfg, _csv_document(cfg, header, rows))
    return 0


def cmd_certify(cfg: RunConfig) -> int:
    if cfg.method is None:
        raise ConfigError("missing required setting: method")
    sysdef, _ = _system_and_state(cfg)
    spec = _method_spec(cfg)
    order_h = tuple(cfg.h) if cfg.h is not None else _ORDER_H
    report = certify_scheme(
        sysdef, spec, seed=cfg.seed, n_states=cfg.n_states,
        h_values=_BATTERY_H, order_h=order_h, horizon=cfg.horizon,
        box=cfg.box, expect_symplectic=cfg.expect_symplectic)

    rows = [("scheme", report.scheme),
            ("system", report.system),
            ("alpha", f"{report.alpha:g}"),
            ("det defect", f"{report.det_defect:.3e}"),
            ("symplectic defect", f"{report.symp_defect:.3e}"),
            ("bracket residual",
             f"{report.bracket_residuals['max']:.3e}"),
            ("measured order",
             "unresolved" if report.measured_order["unresolved"]
             else f"{report.measured_order['slope']:.3f} "
                  f"(expected {report.measured_order['expected']})")]
    if report.error_constant is not None:
        rows.append(("error-constant dev",
                     f"{report.error_constant['max_rel_dev']:.3%} over "
                     f"{report.error_constant['checked']} components"))
    rows.append(("result", "PASS" if report.passed else "FAIL"))
    width = max(len(k) for k, _ in rows)
    table = "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
    doc = report.to_json() + "\n"
    if cfg.out:
        _emit(cfg, doc)
        print(table)
    else:
        print(table)
        sys.stdout.write(doc)
    for line in report.failures:
        print(f"failed: {line}", file=sys.stderr)
    return 0 if report.passed else 4


def cmd_order(cfg: RunConfig) -> int:
    if cfg.method is None:
        raise ConfigError("missing required setting: method")
    sysdef, s0 = _system_and_state(cfg)
    spec = _method_spec(cfg)
    h_list = list(cfg.h) if cfg.h is not None else list(_ORDER_H)
    if len(h_list) < 4:
        raise ConfigError("order fit needs at least 4 step sizes")
    stepper = make_stepper(sysdef, spec)
    fit = measured_order(stepper, sysdef, s0, make_reference(sysdef),
                         h_list, cfg.horizon)
    if cfg.out:
        rows = list(zip(fit.h_list, fit.errors))
        _emit(cfg, _csv_document(cfg, ["h", "error_inf"], rows))
    summary = {"slope": None if fit.unresolved else fit.slope,
               "stderr": None if fit.unresolved else fit.stderr,
               "expected": ORDER_OF[spec.scheme],
               "unresolved": fit.unresolved}
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    if not cfg.methods or len(cfg.methods) < 2:
        raise ConfigError("compare needs at least 2 methods "
                          "(--methods a,b)")
    if cfg.h is None or len(cfg.h) != 1:
        raise ConfigError("compare expects a single h value")
    if cfg.steps <= 0:
        raise ConfigError("compare needs steps > 0")
    sysdef, s0 = _system_and_state(cfg)
    h = cfg.h[0]
    every = cfg.record_every or max(1, cfg.steps // 1000)
    results = []
    n_failed = 0
    for name in cfg.methods:
        spec = _method_spec(cfg, name)
        entry = {"method": name}
        try:
            run = run_long(sysdef, s0, spec, h, cfg.steps, every)
            entry["backend"] = run.backend
            entry["t"] = run.t.tolist()
            entry["energy_drift"] = (run.energy - run.energy[0]).tolist()
            entry["max_energy_drift"] = run.max_energy_drift
            if sysdef.dim == 1:
                poly = make_polygon((float(s0.q[0]), float(s0.p[0])),
                                    _AREA_RADIUS, _AREA_VERTICES, s0.t)
                ratios = polygon_area_drift(
                    make_stepper(sysdef, spec), poly, h,
                    min(cfg.steps, _AREA_MAX_STEPS))
                entry["area_ratio"] = ratios.tolist()
                entry["max_area_drift"] = float(np.max(np.abs(ratios - 1.0)))
            else:
                entry["area_ratio"] = None
                entry["max_area_drift"] = None
        except SympintError as err:
            entry["error"] = str(err)
            n_failed += 1
        results.append(entry)
    doc = json.dumps({"config": json.loads(cfg.to_metadata()),
                      "results": results}, indent=2, sort_keys=True) + "\n"
    _emit(cfg, doc)
    if n_failed:
        print(f"warning: {n_failed}/{len(cfg.methods)} methods failed",
              file=sys.stderr)
    return 3 if n_failed == len(cfg.methods) else 0


# --- argument parsing ----------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--system", help="registered system name")
    sp.add_argument("--method", help="scheme name (see README for the list)")
    sp.add_argument("--alpha", type=float,
                    help="intermediate-time parameter in [0, 1]")
    sp.add_argument("--h", help="step size, or comma-separated list where "
                                "the command takes a ladder")
    sp.add_argument("--steps", type=int, help="number of steps")
    sp.add_argument("--q0", help="comma-separated initial positions")
    sp.add_argument("--p0", help="comma-separated initial momenta")
    sp.add_argument("--t0", type=float, help="initial time")
    sp.add_argument("--solver", choices=[m.value for m in SolverMethod],
                    help="implicit-stage solver")
    sp.add_argument("--tol", type=float, help="solver residual tolerance")
    sp.add_argument("--max-iter", dest="max_iter", type=int,
                    help="solver iteration cap")
    sp.add_argument("--out", help="output file path (default: stdout)")
    sp.add_argument("--config", help="JSON config file; flags override it")
    sp.add_argument("--seed", type=int, help="seed for random probe states")
    sp.add_argument("--horizon", type=float,
                    help="integration horizon for order fits")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sympint",
        description="Area-preserving one-step integrators with a "
                    "certification battery.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("integrate", help="run one trajectory, emit CSV")
    _add_common(sp)

    sp = sub.add_parser("certify", help="run the invariant battery for one "
                                        "scheme, emit a JSON report")
    _add_common(sp)
    sp.add_argument("--n-states", dest="n_states", type=int,
                    help="number of random probe states (default 20)")
    sp.add_argument("--box", type=float,
                    help="half-width of the probe-state box (default 0.8)")
    sp.add_argument("--expect-symplectic", dest="expect_symplectic",
                    action=argparse.BooleanOptionalAction, default=None,
                    help="count area-preservation defects as failures "
                         "(default: on for the area-preserving schemes)")

    sp = sub.add_parser("order", help="measure the convergence slope")
    _add_common(sp)

    sp = sub.add_parser("compare", help="long-run energy/area drift of "
                                        "several methods, one JSON report")
    _add_common(sp)
    sp.add_argument("--methods", help="comma-separated scheme names (>= 2)")
    sp.add_argument("--record-every", dest="record_every", type=int,
                    help="thin the recorded series to every k-th step")
    return ap


_HANDLERS = {"integrate": cmd_integrate, "certify": cmd_certify,
             "order": cmd_order, "compare": cmd_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return _HANDLERS[args.command](cfg)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SolverFailure as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
