"""Command-line front end: ``svc-sim run | cases | report``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import Executor, Future, ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from .checks import check_case, check_runtime
from .errors import SvcError
from .io import load_scenario, parse_scenario, report, write_outputs
from .scenario import CASE_IDS, run

log = logging.getLogger("svc_sim")


def case_fixture(case_id: int) -> str:
    """Text of the shipped scenario file for a canned case."""
    if case_id not in CASE_IDS:
        raise ValueError(f"unknown case id {case_id}; expected one of {CASE_IDS}")
    return resources.files("svc_sim.cases").joinpath(f"case{case_id}.json").read_text(encoding="utf-8")


def _parse_ids(text: str) -> list[int]:
    ids = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            ids.extend(range(int(lo), int(hi) + 1))
        else:
            ids.append(int(part))
    bad = [i for i in ids if i not in CASE_IDS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown case ids {bad}; choose from {list(CASE_IDS)}")
    if not ids:
        raise argparse.ArgumentTypeError("at least one case id is required")
    return sorted(set(ids))


def _run_case(case_id: int, out: Path):
    scenario = parse_scenario(case_fixture(case_id))
    t0 = time.perf_counter()
    result = run(scenario)
    elapsed = time.perf_counter() - t0
    write_outputs(result, out / f"case{case_id}", scenario)
    checks = check_case(case_id, result, scenario) + [check_runtime(case_id, elapsed)]
    return checks


class _Inline(Executor):
    def submit(self, fn, *args):
        f = Future()
        try:
            f.set_result(fn(*args))
        except BaseException as exc:  # re-raised by result()
            f.set_exception(exc)
        return f


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario, args.set or ())
    result = run(scenario)
    write_outputs(result, args.out, scenario)
    print(json.dumps(result.metrics, indent=2, sort_keys=True))
    return 0


def run_cases(ids: list[int], out: str | Path, jobs: int = 1) -> int:
    """Run canned cases into ``out/caseN/`` and print one line per check; returns the exit status."""
    if not ids:
        raise ValueError("no case ids given")
    out = Path(out)
    # more workers than cores would only stretch each case's wall-clock
    jobs = max(1, min(jobs, os.cpu_count() or 1, len(ids)))
    # separate processes so that per-case wall-clock is not shared under the GIL
    with (ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else _Inline()) as pool:
        futures = {i: pool.submit(_run_case, i, out) for i in ids}
        ok = True
        for i in ids:
            try:
                checks = futures[i].result()
            except SvcError as exc:
                print(f"FAIL  case{i}: {exc}")
                ok = False
                continue
            for c in checks:
                print(c.line())
                ok &= c.passed
    return 0 if ok else 1


def cmd_cases(args) -> int:
    return run_cases(args.ids, args.out, args.jobs)


def cmd_report(args) -> int:
    summary = report(args.out)
    if not summary:
        print(f"no timeseries.csv found under {args.out}", file=sys.stderr)
        return 1
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="svc-sim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario file")
    r.add_argument("--scenario", required=True, type=Path)
    r.add_argument("--out", required=True, type=Path)
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a scenario field, e.g. --set duration=200 --set events[0].at=100")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("cases", help="run canned case studies and check them")
    c.add_argument("--ids", type=_parse_ids, default=list(CASE_IDS), help="e.g. 1,2,6 or 1-6")
    c.add_argument("--out", required=True, type=Path)
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_cases)

    s = sub.add_parser("report", help="recompute metrics from existing outputs")
    s.add_argument("--out", required=True, type=Path)
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("SVC_SIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SvcError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
