"""
Command-line front end.

    multitime <command> [--config FILE] [flags]

Commands: norms, lambdamax, twotime, commutator, criterion, oracle-compare,
goldens.  Settings are resolved as defaults < MULTITIME_* environment
variables < key=value config file < command-line flags.

Grid values accept an explicit list ``0.1,0.2,0.5``, ``lin:a:b:n``
(n points from a to b inclusive) or ``mid:a:b:n`` (midpoints of n equal
cells of [a, b]).

Exit codes: 0 success, 2 configuration error, 3 convergence-gate violation
without interval splitting, 4 oracle tolerance failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from multitime import __version__, linalg2
from multitime.charfunc import ordered_moments, principal_axes, quadratic_form, two_time_surface
from multitime.criteria import MAX_SEARCH_ORDER, search_violation
from multitime.errors import ConvergenceGateViolation, ToleranceNotReached, TruncationError
from multitime.magnus import MAX_ORDER, ModelParams, convergence_gate, magnus_terms, term_norm_map
from multitime.propagator import (
    assemble,
    assemble_stepped,
    ode_trajectory,
    propagators,
    unequal_time_commutator,
)

EXIT_OK, EXIT_CONFIG, EXIT_GATE, EXIT_ORACLE = 0, 2, 3, 4
ENV_PREFIX = "MULTITIME_"
COMMANDS = ("norms", "lambdamax", "twotime", "commutator", "criterion", "oracle-compare", "goldens")

DISCLAIMER = (
    "A negative minor certifies nonclassicality. Finding none is not a proof of "
    "classicality: only finitely many orders and displacements were tested."
)


class ConfigError(Exception):
    pass


# --- value parsers --------------------------------------------------------------------


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _positive(text):
    v = _float(text)
    if v <= 0:
        raise ValueError("must be positive")
    return v


def _nonneg(text):
    v = _float(text)
    if v < 0:
        raise ValueError("must be non-negative")
    return v


def _int_range(lo, hi=None):
    def parse(text):
        v = int(text)
        if v < lo or (hi is not None and v > hi):
            raise ValueError(f"must be an integer in {lo}..{hi if hi is not None else 'inf'}")
        return v

    return parse


def _grid(text):
    text = text.strip()
    if text.startswith(("lin:", "mid:")):
        kind, a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
        if n < 1:
            raise ValueError("grid needs at least one point")
        if kind == "lin":
            vals = [a] if n == 1 else [a + (b - a) * i / (n - 1) for i in range(n)]
        else:
            vals = [a + (b - a) * (i + 0.5) / n for i in range(n)]
    else:
        vals = [float(x) for x in text.split(",") if x.strip()]
    if not vals or not all(math.isfinite(v) and v >= 0 for v in vals):
        raise ValueError("grid values must be finite and non-negative")
    return tuple(vals)


def _order_list(text):
    vals = tuple(int(x) for x in text.split(",") if x.strip())
    if not vals or not all(1 <= v <= MAX_ORDER for v in vals):
        raise ValueError(f"orders must lie in 1..{MAX_ORDER}")
    return vals


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


def _steps(text):
    if text in ("0", "off", "none"):
        return 0
    if text == "auto":
        return "auto"
    return _int_range(1)(text)


def _grid_points(text):
    if text in ("auto", "default"):
        return None
    return _int_range(64)(text)


FIELDS = {
    "kappa": _positive,
    "delta_ratio": _nonneg,
    "tau_grid": _grid,
    "ratio_grid": _grid,
    "dtau_grid": _grid,
    "n_max": _int_range(1, MAX_ORDER),
    "n_list": _order_list,
    "grid_points": _grid_points,
    "mode": _choice("paper", "sup"),
    "seed": _int_range(0),
    "format": _choice("csv", "json"),
    "steps": _steps,
    "workers": _int_range(1),
    "order": _int_range(2, MAX_SEARCH_ORDER),
    "budget": _int_range(1),
    "starts": _int_range(1),
    "box": _positive,
    "oracle_tol": _positive,
    "out": str,
    "regenerate": lambda t: t.lower() in ("1", "true", "yes", "on"),
}

# run-time only settings, excluded from the embedded header
NON_SEMANTIC = {"out", "workers", "regenerate"}

COMMON_DEFAULTS = {
    "kappa": "1.0",
    "delta_ratio": "3.18",
    "n_max": "11",
    "grid_points": "auto",
    "seed": "0",
    "format": "csv",
    "steps": "0",
    "workers": str(os.cpu_count() or 1),
    "out": "-",
}

COMMAND_DEFAULTS = {
    "norms": {"tau_grid": "mid:0:1:20", "ratio_grid": "lin:0:10:41", "n_list": "1,2,10,11"},
    "lambdamax": {"tau_grid": "lin:0:0.95:20", "n_list": "1,2,10,11"},
    "twotime": {"tau_grid": "mid:0:1:32", "mode": "paper"},
    "commutator": {"tau_grid": "lin:0:0.8:9", "dtau_grid": "lin:0:0.15:4"},
    "criterion": {
        "tau_grid": "0.4,0.7",
        "order": "2",
        "budget": "10000",
        "starts": "8",
        "box": "3.0",
        "format": "json",
    },
    "oracle-compare": {"tau_grid": "0.5", "n_list": "1,2,3,4,5,6,7,8,9,10,11", "oracle_tol": "1e-12"},
    "goldens": {"out": "tests/goldens.json", "regenerate": "false", "format": "json"},
}


def parse_config_file(path):
    """Read ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc.strerror})")
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = (value, f"{path}:{lineno}")
    return out


def resolve(command, flags, environ=None):
    """Merge defaults, environment, config file and flags into typed settings."""
    environ = os.environ if environ is None else environ
    raw = {k: (v, "default") for k, v in COMMON_DEFAULTS.items()}
    raw.update({k: (v, "default") for k, v in COMMAND_DEFAULTS[command].items()})
    for key in FIELDS:
        env_key = ENV_PREFIX + key.upper()
        if env_key in environ:
            raw[key] = (environ[env_key], f"env {env_key}")
    if flags.get("config"):
        raw.update(parse_config_file(flags["config"]))
    for key, value in flags.items():
        if key != "config" and value is not None:
            raw[key] = (value, f"flag --{key.replace('_', '-')}")
    cfg = {}
    for key, (value, origin) in raw.items():
        try:
            cfg[key] = FIELDS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{origin}: field {key!r}: invalid value {value!r} ({exc})")
    return cfg


# --- output ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def header_lines(command, cfg, gate):
    lines = [f"multitime {__version__}", f"command={command}"]
    for key in sorted(cfg):
        if key in NON_SEMANTIC:
            continue
        v = cfg[key]
        if isinstance(v, tuple):
            v = ",".join(_fmt(x) for x in v)
        elif v is None:
            v = "auto"
        lines.append(f"{key}={_fmt(v)}")
    lines.append(f"convergence_gate={gate}")
    return lines


def render_table(command, cfg, gate, columns, rows):
    if cfg["format"] == "json":
        doc = {
            "header": header_lines(command, cfg, gate),
            "columns": list(columns),
            "rows": [list(r) for r in rows],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    for line in header_lines(command, cfg, gate):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def emit(text, out):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --- commands -------------------------------------------------------------------------


def _params(cfg):
    return ModelParams(cfg["kappa"], cfg["delta_ratio"] * cfg["kappa"])


def _gate_status(cfg, taus):
    top = max(taus)
    report = convergence_gate(_params(cfg), top)
    if report.converges:
        return f"ok max_tau={_fmt(top)} margin={_fmt(report.margin)}"
    if not cfg["steps"]:
        raise ConvergenceGateViolation(
            f"tau={top} is outside the Magnus convergence radius; pass --steps to split the interval"
        )
    return f"stepped max_tau={_fmt(top)} steps={cfg['steps']}"


def _props(cfg, taus, n_max):
    """Propagators honouring the --steps setting."""
    params = _params(cfg)
    if not cfg["steps"]:
        return propagators(params, taus, n_max, "magnus", cfg["grid_points"])
    out = []
    for t in taus:
        n_steps = None if cfg["steps"] == "auto" else cfg["steps"]
        out.append(assemble_stepped(params, t, n_max, n_steps, cfg["grid_points"]))
    return out


def cmd_norms(cfg):
    taus = cfg["tau_grid"]
    if max(taus) >= 1.0:
        raise ConvergenceGateViolation("norm maps are only defined inside the convergence radius")
    gate = _gate_status(cfg, taus)
    rows = term_norm_map(taus, cfg["ratio_grid"], cfg["n_list"], cfg["grid_points"], cfg["workers"])
    return gate, ("tau", "delta_over_kappa", "n", "norm"), rows


def cmd_lambdamax(cfg):
    taus = cfg["tau_grid"]
    gate = _gate_status(cfg, taus)
    params = _params(cfg)
    rows = []
    if cfg["steps"]:

        def series_for(n):
            props = _props(cfg, taus, n)
            return [(p.tau, _lmax(p)) for p in props]

        with ThreadPoolExecutor(max_workers=cfg["workers"]) as pool:
            curves = list(pool.map(series_for, cfg["n_list"]))
    else:
        series = magnus_terms(params, max(taus), max(cfg["n_list"]), cfg["grid_points"])
        curves = [[(t, _lmax(assemble(series, t, n))) for t in taus] for n in cfg["n_list"]]
    for n, curve in zip(cfg["n_list"], curves):
        rows.extend((t, n, lm) for t, lm in curve)
    return gate, ("tau", "n_max", "lambda_max"), rows


def _lmax(prop):
    return principal_axes(quadratic_form(ordered_moments([prop]))).lambda_max


def cmd_twotime(cfg):
    taus = cfg["tau_grid"]
    gate = _gate_status(cfg, taus)
    method = "stepped" if cfg["steps"] else "magnus"
    surface = two_time_surface(
        _params(cfg), taus, cfg["n_max"], cfg["mode"], method, cfg["grid_points"], cfg["workers"]
    )
    rows = [(t1, t2, float(surface[i, j])) for i, t1 in enumerate(taus) for j, t2 in enumerate(taus)]
    return gate, ("tau1", "tau2", "phi_sq"), rows


def cmd_commutator(cfg):
    taus, dtaus = cfg["tau_grid"], cfg["dtau_grid"]
    pairs = [(t, d) for t in taus for d in dtaus]
    needed = sorted({t for t in taus} | {t + d for t, d in pairs})
    gate = _gate_status(cfg, needed)
    props = dict(zip(needed, _props(cfg, needed, cfg["n_max"])))
    rows = []
    for t, d in pairs:
        c = unequal_time_commutator(props[t], props[t + d])
        rows.append((t, d, c.real, c.imag))
    return gate, ("tau", "dtau", "comm_re", "comm_im"), rows


def cmd_oracle_compare(cfg):
    taus = cfg["tau_grid"]
    gate = _gate_status(cfg, taus)
    params = _params(cfg)
    oracle = ode_trajectory(params, taus, cfg["oracle_tol"])
    rows = []
    for n in cfg["n_list"]:
        props = _props(cfg, taus, n)
        for t, p, o in zip(taus, props, oracle):
            rows.append((t, n, float(linalg2.spectral_norm(p.U - o.U))))
    return gate, ("tau", "n_max", "error"), rows


def cmd_criterion(cfg):
    taus = cfg["tau_grid"]
    gate = _gate_status(cfg, taus)
    moments = ordered_moments(_props(cfg, taus, cfg["n_max"]))
    res = search_violation(
        moments, cfg["order"], cfg["budget"], cfg["seed"], cfg["starts"], cfg["box"], cfg["workers"]
    )
    report = {
        "tool": f"multitime {__version__}",
        "header": header_lines("criterion", cfg, gate),
        "times": list(taus),
        "order": cfg["order"],
        "seed": cfg["seed"],
        "minors": res.report.minors,
        "verdict": "nonclassical" if res.report.nonclassical else "inconclusive",
        "witness_order": res.report.witness,
        "best_minor": res.best,
        "betas": [[[z.real, z.imag] for z in row] for row in res.config.entries],
        "evaluations": res.evaluations,
        "budget_exhausted": res.budget_exhausted,
        "disclaimer": DISCLAIMER,
    }
    return gate, report


def cmd_goldens(cfg):
    from multitime import goldens

    if cfg["regenerate"]:
        data = goldens.generate()
        goldens.save(data, cfg["out"])
        return f"wrote {len(data)} golden values to {cfg['out']}\n"
    failures = goldens.verify(goldens.load(cfg["out"]))
    if failures:
        return "".join(f"FAIL {name}: {msg}\n" for name, msg in failures)
    return "all golden values reproduced\n"


TABLE_COMMANDS = {
    "norms": cmd_norms,
    "lambdamax": cmd_lambdamax,
    "twotime": cmd_twotime,
    "commutator": cmd_commutator,
    "oracle-compare": cmd_oracle_compare,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--kappa")
    common.add_argument("--delta-ratio", dest="delta_ratio", help="delta/kappa")
    common.add_argument("--tau", dest="tau_grid", help="single time or list")
    common.add_argument("--tau-grid", dest="tau_grid")
    common.add_argument("--ratio-grid", dest="ratio_grid")
    common.add_argument("--dtau-grid", dest="dtau_grid")
    common.add_argument("--n-max", dest="n_max")
    common.add_argument("--n-list", dest="n_list", help="comma-separated Magnus orders")
    common.add_argument("--grid-points", dest="grid_points")
    common.add_argument("--mode")
    common.add_argument("--seed")
    common.add_argument("--out")
    common.add_argument("--format")
    common.add_argument("--steps", help="interval splitting: off, auto or a step count")
    common.add_argument("--workers")
    common.add_argument("--order")
    common.add_argument("--budget")
    common.add_argument("--starts")
    common.add_argument("--box")
    common.add_argument("--oracle-tol", dest="oracle_tol")
    common.add_argument("--regenerate", action="store_const", const="true")

    parser = argparse.ArgumentParser(prog="multitime", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"multitime {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None, environ=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        cfg = resolve(ns.command, flags, environ)
        if ns.command == "goldens":
            sys.stdout.write(cmd_goldens(cfg))
            return EXIT_OK
        if ns.command == "criterion":
            gate, report = cmd_criterion(cfg)
            if cfg["format"] == "json":
                text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
            else:
                rows = [(o, m) for o, m in enumerate(report["minors"], start=1)]
                text = render_table("criterion", cfg, gate, ("order", "minor"), rows)
        else:
            gate, columns, rows = TABLE_COMMANDS[ns.command](cfg)
            text = render_table(ns.command, cfg, gate, columns, rows)
        emit(text, cfg["out"])
    except ConfigError as exc:
        print(f"multitime: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceGateViolation as exc:
        print(f"multitime: convergence gate: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (ToleranceNotReached, TruncationError) as exc:
        print(f"multitime: oracle failure: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except ValueError as exc:
        print(f"multitime: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
