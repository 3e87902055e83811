"""Command-line entry point: ``catbell <subcommand> [options]``."""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, experiments, validation
from .config import ConfigError, parse_config
from .experiments import SweepSpec

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

CSV_COLUMNS = ("x", "alpha_used", "F", "P", "R_eg", "S", "skr", "status")
SUBCOMMANDS = ("sweep-distance", "sweep-coherence", "sweep-alpha-skr", "violation-range", "validate")

DEFAULT_RATE_HZ = 3000.0
VIOLATION_RATE_HZ = 3.0
DEFAULT_DISTANCE = {"sweep-coherence": 5.0, "sweep-alpha-skr": 10.0}

ASSUMPTIONS = [
    "fiber attenuation default 0.2 dB/km (assumed, configurable)",
    "t_0 default 10 us (assumed, configurable); crossings and rates shift with t_0",
    "QBER taken from the simulated state (zero for the ideal Bell-diagonal family) plus q_int",
    "violation counted only when S exceeds 2 by the configured margin",
    "default target rate 3000 Hz for sweeps and 3 Hz for violation-range",
]


def _fmt(v, precision):
    if isinstance(v, str):
        return v
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.{precision}g}"


def rows_to_csv(rows, precision=12):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c), precision) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def dump_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def metadata(cfg, subcommand):
    return {
        "tool": "catbell",
        "version": __version__,
        "subcommand": subcommand,
        "config": cfg.resolved(),
        "tolerances": {
            "eps_trunc": cfg.eps_trunc,
            "alpha_xtol": 1e-10,
            "distance_tol_km": cfg.sweep.get("distance_tol_km", 0.1),
            "violation_margin": cfg.sweep.get("margin", experiments.VIOLATION_MARGIN),
        },
        "assumptions": ASSUMPTIONS,
    }


def _grid(cfg, variable):
    sw = cfg.sweep
    if "grid" in sw:
        return tuple(sw["grid"])
    if variable == "coherence_time":
        start = sw.get("start", 1e-5)
        stop = sw.get("stop", 1e-1)
        per = sw.get("per_decade", 9)
        n = int(round(math.log10(stop / start) * per))
        g = [start * 10 ** (k / per) for k in range(n + 1)]
        if sw.get("include_infinite", True):
            g.append(math.inf)
        return tuple(g)
    if variable == "distance":
        start, stop, step = sw.get("start", 0.0), sw.get("stop", 100.0), sw.get("step", 1.0)
    else:
        start, stop, step = sw.get("start", 0.1), sw.get("stop", 4.0), sw.get("step", 0.05)
    n = int(math.floor((stop - start) / step + 1e-9))
    return tuple(round(start + k * step, 12) for k in range(n + 1))


def _single_m(cfg):
    if len(cfg.m) != 1:
        raise ConfigError([f"code.m: sweeps take a single code index, got {list(cfg.m)}"])
    return cfg.m[0]


def build_spec(cfg, subcommand, workers=1):
    variable = {"sweep-distance": "distance", "sweep-coherence": "coherence_time", "sweep-alpha-skr": "alpha"}[subcommand]
    rate = None
    if variable != "alpha" and cfg.alpha is None:
        rate = cfg.sweep.get("rate_hz", DEFAULT_RATE_HZ)
    return SweepSpec(
        variable=variable,
        grid=_grid(cfg, variable),
        m=_single_m(cfg),
        noise=cfg.noise,
        strategy=cfg.strategy,
        rate_hz=rate,
        alpha=cfg.alpha,
        distance_km=cfg.sweep.get("distance_km", DEFAULT_DISTANCE.get(subcommand, 0.0)),
        backend=cfg.backend,
        margin=cfg.sweep.get("margin", experiments.VIOLATION_MARGIN),
        workers=workers,
    )


def run_sweep(cfg, subcommand, workers=1):
    spec = build_spec(cfg, subcommand, workers)
    fn = {
        "sweep-distance": experiments.sweep_distance,
        "sweep-coherence": experiments.sweep_coherence,
        "sweep-alpha-skr": experiments.sweep_alpha_skr,
    }[subcommand]
    rows = fn(spec)
    summary = experiments.summarize(rows)
    if subcommand == "sweep-coherence":
        summary["saturation_onset_s"] = experiments.saturation_onset(rows)
    if subcommand == "sweep-alpha-skr" and any(r.status != experiments.UNREACHABLE for r in rows):
        a, r = experiments.best_alpha(spec.m, spec.distance_km, spec.noise, spec.strategy, "skr",
                                      grid=spec.grid, backend=spec.backend)
        summary["refined_argmax_alpha"] = a
        summary["refined_max_skr"] = r.skr
    summary["status_counts"] = {s: sum(r.status == s for r in rows) for s in sorted({r.status for r in rows})}
    return rows, summary


def run_violation_range(cfg):
    rate = None if cfg.alpha is not None else cfg.sweep.get("rate_hz", VIOLATION_RATE_HZ)
    records = []
    for m in cfg.m:
        vr = experiments.violation_range(
            m,
            cfg.noise,
            cfg.strategy,
            rate_hz=rate,
            alpha=cfg.alpha,
            margin=cfg.sweep.get("margin", experiments.VIOLATION_MARGIN),
            L_max=cfg.sweep.get("max_distance_km", 500.0),
            tol=cfg.sweep.get("distance_tol_km", 0.1),
            backend=cfg.backend,
        )
        records.append({"m": m, "crossing_km": vr.crossing_km, "status": vr.status,
                        "alpha_at_crossing": vr.alpha_at_crossing, "margin": vr.margin, "rate_hz": rate})
    return records


def run(subcommand, cfg, workers=1, stdout=None):
    """Execute one subcommand and write its artifacts under ``cfg.out_dir``.

    Returns the process exit status.
    """
    stdout = stdout or sys.stdout
    out = cfg.out_dir
    meta = metadata(cfg, subcommand)
    if subcommand == "validate":
        checks = validation.run_all()
        for c in checks:
            print(c.line(), file=stdout)
        report = {"metadata": meta, "checks": [
            {"name": c.name, "residual": c.residual, "tolerance": c.tolerance, "passed": c.passed} for c in checks]}
        write_atomic(os.path.join(out, "validate.json"), dump_json(report))
        return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL
    if subcommand == "violation-range":
        records = run_violation_range(cfg)
        for r in records:
            print(json.dumps(_jsonable(r), sort_keys=True), file=stdout)
        write_atomic(os.path.join(out, "violation-range.summary.json"), dump_json({"metadata": meta, "records": records}))
        return EXIT_OK
    rows, summary = run_sweep(cfg, subcommand, workers)
    write_atomic(os.path.join(out, f"{subcommand}.csv"), rows_to_csv(rows, cfg.precision))
    write_atomic(os.path.join(out, f"{subcommand}.summary.json"), dump_json({"metadata": meta, "summary": summary}))
    print(dump_json(summary), end="", file=stdout)
    return EXIT_OK


def _error(kind, message, violations=None):
    rec = {"error": kind, "message": message}
    if violations:
        rec["violations"] = violations
    print(json.dumps(rec), file=sys.stderr)


def build_parser():
    p = argparse.ArgumentParser(prog="catbell", description="Cat-code Bell test and DI-QKD rate calculator")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", metavar="PATH", help="config file ([noise], [code], [usd], [sweep], [output])")
    p.add_argument("--preset", choices=("ideal", "table1", "table1-altdc"), help="noise preset (overrides the file)")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    p.add_argument("--m", type=int, nargs="+", help="code index/indices (overrides [code] m)")
    p.add_argument("--threads", type=int, default=1, metavar="N", help="concurrent sweep workers")
    p.add_argument("--seed", type=int, help="reserved; the pipeline is deterministic")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, preset=args.preset)
        if args.out:
            cfg.out_dir = args.out
        if args.m:
            if any(not 0 <= m <= 2 for m in args.m):
                raise ConfigError([f"--m: code indices must be 0, 1 or 2, got {args.m}"])
            cfg.m = tuple(args.m)
        if args.threads < 1:
            raise ConfigError(["--threads must be >= 1"])
        if args.subcommand.startswith("sweep-"):
            build_spec(cfg, args.subcommand)
    except ConfigError as exc:
        _error("config", str(exc), exc.violations)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    try:
        return run(args.subcommand, cfg, workers=args.threads)
    except Exception as exc:  # surfaced as a machine-readable record
        _error(type(exc).__name__, str(exc))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
