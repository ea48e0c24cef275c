"""Batch harness: ``fixvi run <config>`` and ``fixvi validate <config>``."""
import argparse
import csv
import io
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, plain
from .diagnostics import atomic_write, write_trace
from .schemes import CORRIDOR_MARGIN, CorridorError, SchemeDiverged, resolve_spec, run_scheme, validate_corridors

EXIT_OK, EXIT_ERROR, EXIT_NONCONVERGED = 0, 1, 2
SUMMARY_HEADER = ("scheme", "iterations", "final_residual_vi", "final_residual_fix", "terminated_by", "wall_ms")


def _say(quiet, *args):
    if not quiet:
        print(*args)


def _err(*args):
    print(*args, file=sys.stderr)


def _trace_name(i, spec):
    safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in spec.name)
    return f"{i:02d}_{safe}.csv"


def _x0(cfg):
    p = cfg.problem
    if cfg.x0 is not None:
        return cfg.x0
    if p.x0 is not None:
        return p.x0
    return p.C.project(np.zeros(p.dim))


def _summary_tables(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow([r[k] for k in SUMMARY_HEADER])
    cells = [list(SUMMARY_HEADER)] + [[str(r[k]) for k in SUMMARY_HEADER] for r in rows]
    widths = [max(len(c[j]) for c in cells) for j in range(len(SUMMARY_HEADER))]
    text = "\n".join("  ".join(c.ljust(wd) for c, wd in zip(line, widths)).rstrip() for line in cells) + "\n"
    return buf.getvalue(), text


def _fmt_float(v):
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.6e}"


def run_experiment(config_path, output_dir=None, seed=None, quiet=False) -> int:
    """Run every scheme of one config file; returns the process exit status."""
    try:
        cfg = load_config(config_path, seed=seed, output_dir=output_dir)
    except (ConfigError, OSError) as exc:
        _err(f"error: {exc}")
        return EXIT_ERROR
    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _err(f"error: output_dir {cfg.output_dir} is not writable: {exc}")
        return EXIT_ERROR

    problem = cfg.problem
    x0 = _x0(cfg)
    echo_common = {"problem": plain(problem.to_record())}
    status = EXIT_OK
    rows = []
    for i, spec in enumerate(cfg.schemes):
        t0 = time.perf_counter()
        row = {"scheme": spec.name, "iterations": "", "final_residual_vi": "", "final_residual_fix": ""}
        try:
            trace = run_scheme(spec, problem, x0, cfg.stop, oracle=problem.oracle_hint,
                               config_echo=echo_common)
        except (CorridorError, SchemeDiverged, ValueError) as exc:
            status = EXIT_ERROR
            row["terminated_by"] = f"Error({exc})"
            row["wall_ms"] = f"{(time.perf_counter() - t0) * 1e3:.3f}"
            rows.append(row)
            _err(f"scheme {spec.name}: {exc}")
            if isinstance(exc, SchemeDiverged):
                exc.trace.config_echo = plain(exc.trace.config_echo)
                write_trace(exc.trace, cfg.output_dir / _trace_name(i, spec))
            continue
        wall = (time.perf_counter() - t0) * 1e3
        trace.config_echo = plain(trace.config_echo)
        path = cfg.output_dir / _trace_name(i, spec)
        write_trace(trace, path)
        if trace.terminated_by == "MaxIter" and status == EXIT_OK:
            status = EXIT_NONCONVERGED
        f = trace.final
        row.update(iterations=f.n, final_residual_vi=_fmt_float(f.residual_vi),
                   final_residual_fix=_fmt_float(f.residual_fix), terminated_by=trace.terminated_by,
                   wall_ms=f"{wall:.3f}")
        rows.append(row)
        _say(quiet, f"{spec.name}: {trace.terminated_by} after {f.n} iterations -> {path}")
    if cfg.compare:
        csv_text, table = _summary_tables(rows)
        atomic_write(cfg.output_dir / "summary.csv", csv_text)
        atomic_write(cfg.output_dir / "summary.txt", table)
        _say(quiet, table.rstrip())
    # an error in any scheme outranks non-convergence
    return status


def _bounds_text(sched):
    lo, hi = sched.bounds
    return f"[{lo:.6g}, {hi:.6g}]"


def validate(config_path, seed=None, quiet=False) -> int:
    """Parse, certify and check corridors without iterating. Returns the exit status."""
    try:
        cfg = load_config(config_path, seed=seed)
    except (ConfigError, OSError) as exc:
        print(f"FAIL: {exc}")
        return EXIT_ERROR
    A = cfg.problem.A
    lines = [f"problem {cfg.problem.label}: dim {cfg.problem.dim}, "
             f"certified alpha = {A.alpha:.12g}, nominal alpha = {A.nominal_alpha:.12g}"]
    if math.isfinite(A.alpha):
        lo, hi = A.certified_corridor()
        plo, phi = A.nominal_corridor()
        lines.append(f"  lambda corridor: certified ({lo:.6g}, {hi:.12g}), nominal ({plo:.6g}, {phi:.12g}), "
                     f"enforced cap {hi * (1 - CORRIDOR_MARGIN):.12g}")
    else:
        lines.append("  lambda corridor: unbounded (operator is zero)")
    ok = True
    for i, spec in enumerate(cfg.schemes):
        r = resolve_spec(spec, cfg.problem)
        parts = [f"lambda {_bounds_text(r.lam)}", f"alpha {_bounds_text(r.alpha)}"]
        for key in ("beta", "gamma"):
            if getattr(r, key) is not None:
                parts.append(f"{key} {_bounds_text(getattr(r, key))}")
        try:
            validate_corridors(r, A)
            verdict = "ok"
        except CorridorError as exc:
            ok = False
            verdict = f"VIOLATION: {exc}"
        lines.append(f"  schemes[{i}] {r.name}: " + ", ".join(parts) + f" -> {verdict}")
    lines.insert(0, "OK" if ok else "FAIL")
    print("\n".join(lines) if not quiet or not ok else lines[0])
    return EXIT_OK if ok else EXIT_ERROR


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", type=Path, default=None, help="override the config's output_dir")
    common.add_argument("--seed", type=_u64, default=None, help="override the generator seed")
    common.add_argument("--quiet", action="store_true", help="only print errors")
    parser = argparse.ArgumentParser(prog="fixvi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run every scheme and write traces"),
                            ("validate", "certify and check corridors without iterating")):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("config", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_experiment(args.config, args.output_dir, args.seed, args.quiet)
    return validate(args.config, args.seed, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
