"""Benchmark runs, CSV records and linearity fits.

Complexity is judged on matcher step counters, which are deterministic per
backend; wall time is recorded for reference only.
"""

from __future__ import annotations

import csv
import math
import os
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .interpreter import BudgetExceeded, Interpreter
from .programs import (build_input, build_program, family_for_size, input_mark,
                       random_family_graph)
from .store import HostGraph

CSV_FIELDS = ("program", "family", "backend", "nodes", "edges", "size", "steps",
              "rule_apps", "wall_ms", "outcome")


@dataclass(frozen=True)
class BenchRecord:
    program: str
    family: str
    backend: str
    nodes: int
    edges: int
    size: int
    steps: int
    rule_apps: int
    wall_ms: float
    outcome: str  # success | failure | budget

    def row(self) -> dict:
        d = asdict(self)
        d["wall_ms"] = f"{self.wall_ms:.3f}"
        return d


def run_once(program: str, graph: HostGraph, family: str = "file",
             budget: Optional[int] = None) -> tuple[BenchRecord, Interpreter]:
    """Run ``program`` on ``graph`` (mutated in place) and measure it."""
    prog = build_program(program)
    nodes, edges = graph.node_count(), graph.edge_count()
    graph.reset_counters()
    interp = Interpreter(prog, graph, budget=budget)
    t0 = time.perf_counter()
    try:
        outcome = "success" if interp.run().success else "failure"
    except BudgetExceeded:
        outcome = "budget"
    wall = (time.perf_counter() - t0) * 1000.0
    rec = BenchRecord(program, family, graph.backend, nodes, edges, nodes + edges,
                      graph.steps, interp.rule_apps, wall, outcome)
    return rec, interp


def family_input(program: str, family: str, size: int, backend: str = "indexed",
                 seed: int = 0) -> HostGraph:
    """Input graph for ``program``; ``random`` draws a seeded random digraph."""
    if family == "random":
        return random_family_graph(size, seed, backend, input_mark(program))
    return build_input(program, family_for_size(family, size), backend)


def bench_family(program: str, family: str, size: int, backend: str = "indexed",
                 budget: Optional[int] = None, seed: int = 0) -> BenchRecord:
    g = family_input(program, family, size, backend, seed)
    return run_once(program, g, family, budget)[0]


def write_csv(records: Iterable[BenchRecord], path) -> None:
    """Append ``records`` to ``path``, writing the header if the file is new."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if new:
            w.writeheader()
        for r in records:
            w.writerow(r.row())


def read_csv(path) -> list[BenchRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(BenchRecord(
                row["program"], row["family"], row["backend"], int(row["nodes"]),
                int(row["edges"]), int(row["size"]), int(row["steps"]),
                int(row["rule_apps"]), float(row["wall_ms"]), row["outcome"]))
    return out


@dataclass(frozen=True)
class FitSummary:
    """Least-squares fit ``steps = slope * size + intercept``.

    ``doubling_ratios[i]`` is the step growth between consecutive sizes,
    rescaled to an exact doubling of the size: ``2 ** p`` where ``p`` is the
    local exponent ``log(steps ratio) / log(size ratio)``.
    """

    family: str
    sizes: tuple[int, ...]
    steps: tuple[float, ...]
    slope: float
    intercept: float
    r2: float
    doubling_ratios: tuple[float, ...]


def fit(family: str, sizes: Sequence[int], steps: Sequence[float]) -> FitSummary:
    if len(sizes) < 5:
        raise ValueError("a fit needs at least 5 sizes")
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(steps, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    ratios = []
    for (s0, y0), (s1, y1) in zip(zip(x, y), zip(x[1:], y[1:])):
        if y0 > 0 and y1 > 0 and s1 != s0:
            p = math.log(y1 / y0) / math.log(s1 / s0)
            ratios.append(2.0 ** p)
        else:
            ratios.append(float("nan"))
    return FitSummary(family, tuple(int(s) for s in sizes), tuple(float(v) for v in y),
                      float(slope), float(intercept), r2, tuple(ratios))


def sweep(program: str, families: Sequence[str], sizes: Sequence[int],
          backend: str = "indexed", reps: int = 1, budget: Optional[int] = None,
          seed: int = 0) -> tuple[list[BenchRecord], list[FitSummary]]:
    """One record per (family, size, repetition) and one fit per family.

    Steps are deterministic so the fit uses the median over repetitions,
    which only matters for wall time.
    """
    records: list[BenchRecord] = []
    fits: list[FitSummary] = []
    for fam in families:
        xs, ys = [], []
        for size in sizes:
            recs = [bench_family(program, fam, size, backend, budget, seed) for _ in range(reps)]
            records.extend(recs)
            xs.append(recs[0].size)
            ys.append(statistics.median(r.steps for r in recs))
        fits.append(fit(fam, xs, ys))
    return records, fits


def doubling_sizes(lo: int, hi: int) -> list[int]:
    out = []
    s = lo
    while s <= hi:
        out.append(s)
        s *= 2
    return out


def format_fits(fits: Iterable[FitSummary]) -> str:
    lines = [f"{'family':10} {'slope':>10} {'intercept':>12} {'R2':>8}  doubling ratios"]
    for f in fits:
        ratios = " ".join(f"{r:.2f}" for r in f.doubling_ratios)
        lines.append(f"{f.family:10} {f.slope:10.3f} {f.intercept:12.1f} {f.r2:8.4f}  {ratios}")
    return "\n".join(lines)
