"""Run a directory of benchmarks under several strategies and emit CSV."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..engine import Strategy, decide
from ..frontend import ParseError, parse_file
from ..preprocess import PreprocessError

SUFFIX = ".lte.smt2"
HEADER = ("file", "strategy", "verdict", "instances", "eager_bound", "rounds", "ground_checks", "wall_ms")


class AgreementError(Exception):
    pass


@dataclass
class BenchRecord:
    file: str
    strategy: str
    verdict: str
    instances: int = 0
    eager_bound: int = 0
    rounds: int = 0
    ground_checks: int = 0
    wall_ms: float = 0.0
    reason: str = ""

    def row(self) -> list[str]:
        vals = [self.file, self.strategy, self.verdict, str(self.instances), str(self.eager_bound),
                str(self.rounds), str(self.ground_checks), f"{self.wall_ms:.1f}"]
        return [v.replace(",", "_") for v in vals]


def benchmark_files(directory) -> list[Path]:
    return sorted((p for p in Path(directory).iterdir() if p.name.endswith(SUFFIX)), key=lambda p: p.name)


def run_one(path: str, mode: str, backend: Optional[str] = None,
            timeout_ms: Optional[int] = None) -> BenchRecord:
    name = Path(path).name
    try:
        problem = parse_file(path)
        verdict = decide(problem, Strategy(mode=mode, backend=backend, timeout_ms=timeout_ms))
    except (OSError, UnicodeDecodeError, ParseError, PreprocessError) as exc:
        return BenchRecord(name, mode, "error", reason=str(exc))
    s = verdict.stats
    return BenchRecord(name, mode, verdict.status, s.instances, s.eager_bound, s.rounds,
                       s.ground_checks, s.wall_ms, verdict.reason)


def _run_args(args) -> BenchRecord:
    return run_one(*args)


def run_bench(directory, modes: Sequence[str], backend: Optional[str] = None,
              timeout_ms: Optional[int] = None, jobs: int = 1) -> list[BenchRecord]:
    """One record per (file, mode), ordered by file name, then by the order of ``modes``."""
    tasks = [(str(p), m, backend, timeout_ms) for p in benchmark_files(directory) for m in modes]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_args, tasks))
    return [_run_args(t) for t in tasks]


def disagreements(records: Iterable[BenchRecord]) -> list[str]:
    """Files on which two strategies returned different definite verdicts."""
    seen: dict[str, dict[str, str]] = {}
    for r in records:
        if r.verdict in ("sat", "unsat"):
            seen.setdefault(r.file, {})[r.strategy] = r.verdict
    out = []
    for f, verdicts in seen.items():
        if len(set(verdicts.values())) > 1:
            detail = ", ".join(f"{k}={v}" for k, v in verdicts.items())
            out.append(f"{f}: {detail}")
    return out


def write_csv(records: Iterable[BenchRecord], out) -> None:
    """Write records to a path or a text stream."""
    if isinstance(out, io.TextIOBase):
        _write(records, out)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        _write(records, fh)


def _write(records: Iterable[BenchRecord], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HEADER)
    for r in records:
        w.writerow(r.row())


def read_csv(path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
