"""Command-line interface.

    probterm --benchmarks PATH... [--json] [--canonical] [--timeout S]
    probterm suite MANIFEST [--timeout S] [--jobs N] [--report-dir DIR]
    probterm simulate PATH --bind SYM=VALUE ... --runs N --max-steps N --seed N
                           [--json] [--report-dir DIR]

Exit codes: 0 success, 1 suite disagreement, 2 usage / parse / validation
error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing as mp
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from .errors import FrontendError, InternalSoundnessError, UnboundSymbol
from .frontend import load_file
from .report import AnalysisReport
from .rules import decide

EXIT_OK, EXIT_DISAGREE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
DEFAULT_TIMEOUT = 50.0


# --- single-program analysis -----------------------------------------------------------

def analyze_path(path: str) -> dict:
    """Analyze one file; returns ``{"report": ...}`` or ``{"error": kind, "message": ...}``."""
    t0 = time.perf_counter()
    try:
        prog = load_file(path)
    except OSError as exc:
        return {"error": "input", "message": f"{path}: {exc.strerror or exc}"}
    except FrontendError as exc:
        return {"error": "input", "message": f"{path}: {exc}"}
    parse_ms = (time.perf_counter() - t0) * 1000
    try:
        verdict = decide(prog)
    except InternalSoundnessError as exc:
        return {"error": "internal", "message": f"{path}: {exc}"}
    except Exception as exc:  # noqa: BLE001 - reported as an internal error, never swallowed
        return {"error": "internal", "message": f"{path}: {type(exc).__name__}: {exc}"}
    return {"report": AnalysisReport.from_verdict(path, verdict, parse_ms).to_dict()}


def _child(path, conn):
    conn.send(analyze_path(path))
    conn.close()


def analyze_with_timeout(path: str, timeout: float | None) -> dict:
    """``analyze_path`` in a child process, giving up after ``timeout`` seconds."""
    if timeout is None:
        return analyze_path(path)
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    parent, child = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_child, args=(path, child), daemon=True)
    proc.start()
    child.close()
    timed_out = not parent.poll(timeout)
    result = None
    if not timed_out:
        try:
            result = parent.recv()
        except EOFError:
            result = None
    proc.join(1.0)
    if proc.is_alive():
        proc.terminate()
        proc.join()
    if timed_out:
        note = f"timeout after {timeout:g} s"
        return {"report": AnalysisReport.undecided(path, note).to_dict(), "timeout": True}
    if result is None:
        return {"error": "internal", "message": f"{path}: analysis process died (exit code {proc.exitcode})"}
    return result


def run_analyze(args) -> int:
    worst = EXIT_OK
    for path in args.benchmarks:
        result = analyze_with_timeout(path, args.timeout)
        if "error" in result:
            print(f"error: {result['message']}", file=sys.stderr)
            worst = max(worst, EXIT_USAGE if result["error"] == "input" else EXIT_INTERNAL)
            continue
        report = AnalysisReport.from_dict(result["report"])
        if args.json:
            print(report.to_json(canonical=args.canonical))
        else:
            print(report.render())
            print()
        sys.stdout.flush()
    return worst


# --- suite ----------------------------------------------------------------------------

def read_manifest(path) -> list:
    """Entries ``(program path, expected PAST, expected AST)``; paths relative to the manifest."""
    base = Path(path).parent
    entries = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[1] not in ("Yes", "No", "Maybe") or parts[2] not in ("Yes", "No", "Maybe"):
            raise ValueError(f"{path}:{lineno}: expected 'program PAST AST' with Yes/No/Maybe answers")
        entries.append((str(base / parts[0]), parts[1], parts[2]))
    return entries


def agreement(expected: tuple, got: tuple) -> str:
    """``exact``, ``maybe`` (sound but undecided) or ``conflict`` (a Yes/No clash)."""
    if any({e, g} == {"Yes", "No"} for e, g in zip(expected, got)):
        return "conflict"
    if tuple(expected) == tuple(got):
        return "exact"
    return "maybe"


def summarize(rows) -> dict:
    counts = {"exact": 0, "maybe": 0, "conflict": 0, "error": 0}
    for r in rows:
        counts[r["agreement"]] += 1
    counts["total"] = len(rows)
    return counts


def run_suite(args) -> int:
    try:
        entries = read_manifest(args.manifest)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    def work(entry):
        path, ep, ea = entry
        t0 = time.perf_counter()
        result = analyze_with_timeout(path, args.timeout)
        seconds = time.perf_counter() - t0
        row = {"program": path, "expected_past": ep, "expected_ast": ea, "seconds": seconds,
               "timeout": bool(result.get("timeout"))}
        if "error" in result:
            row.update(got_past="-", got_ast="-", agreement="error", message=result["message"])
        else:
            rep = result["report"]
            row.update(got_past=rep["past"], got_ast=rep["ast"],
                       agreement=agreement((ep, ea), (rep["past"], rep["ast"])))
        return row

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(work, entries))

    width = max([len(r["program"]) for r in rows] + [7])
    print(f"{'program':<{width}}  {'expected':<10}  {'got':<12}  {'agree':<8}  time")
    for r in rows:
        exp = f"{r['expected_past']}/{r['expected_ast']}"
        got = f"{r['got_past']}/{r['got_ast']}"
        flag = " (timeout)" if r["timeout"] else ""
        print(f"{r['program']:<{width}}  {exp:<10}  {got:<12}  {r['agreement']:<8}  {r['seconds']:.2f}s{flag}")
        if r.get("message"):
            print(f"  error: {r['message']}", file=sys.stderr)
    counts = summarize(rows)
    median = statistics.median([r["seconds"] for r in rows]) if rows else 0.0
    print(f"summary: {counts['exact']} exact, {counts['maybe']} sound-but-Maybe, "
          f"{counts['conflict']} disagreements, {counts['error']} errors, "
          f"{counts['total']} total; median time {median:.2f}s")

    if args.report_dir:
        write_suite_report(rows, Path(args.report_dir))
    return EXIT_OK if counts["conflict"] == 0 and counts["error"] == 0 else EXIT_DISAGREE


def write_suite_report(rows, out: Path) -> None:
    from .plotting import plot_suite_times

    out.mkdir(parents=True, exist_ok=True)
    fields = ["program", "expected_past", "expected_ast", "got_past", "got_ast", "agreement", "seconds", "timeout"]
    with open(out / "suite.tsv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fields, delimiter="\t", extrasaction="ignore")
        writer.writeheader()
        for r in rows:
            writer.writerow({**r, "seconds": f"{r['seconds']:.4f}"})
    plot_suite_times(rows, out / "suite_times.png")


# --- simulate -------------------------------------------------------------------------

def _binding(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected SYM=VALUE, got {text!r}")
    try:
        return name.strip(), Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {value!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def run_simulate(args) -> int:
    from .simulator import SimConfig, simulate

    try:
        prog = load_file(args.path)
    except OSError as exc:
        print(f"error: {args.path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    except FrontendError as exc:
        print(f"error: {args.path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = SimConfig(dict(args.bind), args.runs, args.max_steps, args.seed)
        report = simulate(prog, cfg)
    except UnboundSymbol as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    doc = {"program": args.path, "seed": cfg.seed, "max_steps": cfg.max_steps,
           "bindings": {k: str(v) for k, v in sorted(cfg.bindings.items())}, **report.to_dict()}
    if args.json:
        print(json.dumps(doc, sort_keys=True))
    else:
        mean = report.mean_steps_terminated
        print(f"program: {args.path}")
        print(f"runs: {report.runs}")
        print(f"terminated: {report.terminated}")
        print(f"termination rate: {float(report.termination_rate):.6f} +- {report.rate_stderr:.6f}")
        print(f"mean steps (terminated): {'n/a' if mean is None else f'{float(mean):.4f}'}")
        print(f"censored at {cfg.max_steps} steps: {report.censored}")
        print(f"overflowed: {report.overflowed}")
        for lo, hi, count in report.histogram:
            print(f"  steps {lo}-{hi}: {count}")
    if args.report_dir:
        write_simulation_report(report, Path(args.report_dir), args.path)
    return EXIT_OK


def write_simulation_report(report, out: Path, program: str) -> None:
    from .plotting import plot_step_histogram

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "simulate.tsv", "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["steps_lo", "steps_hi", "trials"])
        writer.writerows(report.histogram)
    plot_step_histogram(report, out / "step_histogram.png", title=Path(program).name)


# --- entry point ----------------------------------------------------------------------

def _timeout(text: str):
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("timeout must be positive")
    return v


def build_parsers():
    analyze = argparse.ArgumentParser(prog="probterm", description="Decide (P)AST of probabilistic loops.")
    analyze.add_argument("--benchmarks", nargs="+", required=True, metavar="PATH", help="program files")
    analyze.add_argument("--json", action="store_true", help="one JSON document per line and program")
    analyze.add_argument("--canonical", action="store_true", help="zero timing fields in JSON output")
    analyze.add_argument("--timeout", type=_timeout, default=DEFAULT_TIMEOUT, help="seconds per program")

    suite = argparse.ArgumentParser(prog="probterm suite", description="Compare verdicts with a manifest.")
    suite.add_argument("manifest")
    suite.add_argument("--timeout", type=_timeout, default=DEFAULT_TIMEOUT, help="seconds per program")
    suite.add_argument("--jobs", type=_positive_int, default=1)
    suite.add_argument("--report-dir", help="write suite.tsv and suite_times.png here")

    sim = argparse.ArgumentParser(prog="probterm simulate", description="Monte Carlo runs of a program.")
    sim.add_argument("path")
    sim.add_argument("--bind", type=_binding, action="append", default=[], metavar="SYM=VALUE")
    sim.add_argument("--runs", type=_positive_int, default=1000)
    sim.add_argument("--max-steps", type=_positive_int, default=10000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--json", action="store_true")
    sim.add_argument("--report-dir", help="write simulate.tsv and step_histogram.png here")
    return {"analyze": analyze, "suite": suite, "simulate": sim}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parsers = build_parsers()
    command = argv[0] if argv and argv[0] in ("suite", "simulate") else "analyze"
    if command != "analyze":
        argv = argv[1:]
    try:
        args = parsers[command].parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handler = {"analyze": run_analyze, "suite": run_suite, "simulate": run_simulate}[command]
    return handler(args)
