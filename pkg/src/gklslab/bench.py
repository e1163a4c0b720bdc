"""Measurement protocol: target ladder, first hits, ECDF of runtimes,
convergence aggregation and parameter-dependence tables.

Errors are always ``best value - f*`` with ``f*`` taken from the problem's
oracle.  A trace stores only improvement points.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

NUM_TARGETS = 51
STOP_ERROR = 1e-8
BUDGET_PER_DIM = 50_000
ECDF_GRID_SIZE = 101


class MixedBudgets(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


def fmt(value) -> str:
    """17 significant digits for floats, plain text for everything else."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (np.integer,)):
        return str(int(value))
    if value is None:
        return "NA"
    return str(value)


@dataclass
class RunTrace:
    problem: str
    optimizer: str
    seed: int
    points: list[tuple[int, float]]
    evaluations: int
    budget: int
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        evals = [e for e, _ in self.points]
        errs = [v for _, v in self.points]
        if any(b <= a for a, b in zip(evals, evals[1:])):
            raise ValueError("evaluation indices must be strictly increasing")
        if any(b > a for a, b in zip(errs, errs[1:])):
            raise ValueError("best error must be non-increasing")

    @property
    def final_error(self) -> float:
        return self.points[-1][1] if self.points else float("inf")

    def error_at(self, evaluation: int) -> float:
        """Best error after ``evaluation`` evaluations (nan before the first)."""
        best = float("nan")
        for e, v in self.points:
            if e > evaluation:
                break
            best = v
        return best


def make_targets() -> np.ndarray:
    """Error targets 10**2, 10**1.8, ..., 10**-8 (descending)."""
    exponents = [(10 - k) / 5 for k in range(NUM_TARGETS)]
    return np.array([10.0**e for e in exponents])


def first_hits(trace: RunTrace, ladder: Sequence[float]) -> list[tuple[float, int | None]]:
    out = []
    for tau in ladder:
        hit = None
        for e, v in trace.points:
            if v <= tau:
                hit = e
                break
        out.append((float(tau), hit))
    return out


@dataclass
class EcdfCurve:
    x: np.ndarray
    y: np.ndarray
    hits: int
    pairs: int
    times: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    def at(self, evaluations: float) -> float:
        """Exact ECDF value at any evaluation count (not just grid points)."""
        return float(np.searchsorted(self.times, evaluations, side="right") / self.pairs)


def ecdf_grid(budget: int, size: int = ECDF_GRID_SIZE) -> np.ndarray:
    grid = np.logspace(0.0, np.log10(budget), size) if budget > 1 else np.ones(size)
    grid[0], grid[-1] = 1.0, float(budget)
    return grid


def ecdf(hits, budget: int, grid_size: int = ECDF_GRID_SIZE) -> EcdfCurve:
    """Fraction of (problem, target) pairs hit within x evaluations.

    ``hits`` is a mapping problem id -> first-hit list, or a sequence of
    first-hit lists; entries are evaluation counts, ``None`` for a miss, or
    ``(target, count)`` pairs as returned by :func:`first_hits`.
    """
    if isinstance(hits, Mapping):
        rows = [hits[k] for k in sorted(hits)]
    else:
        rows = list(hits)
    if not rows:
        raise ValueError("need at least one problem")
    times = []
    pairs = 0
    for row in rows:
        for entry in row:
            pairs += 1
            t = entry[1] if isinstance(entry, tuple) else entry
            if t is not None:
                times.append(t)
    times = np.sort(np.asarray(times, dtype=float))
    grid = ecdf_grid(budget, grid_size)
    y = np.searchsorted(times, grid, side="right") / pairs
    return EcdfCurve(grid, y, int(np.count_nonzero(times <= budget)), pairs, times)


def convergence_aggregate(traces: Sequence[RunTrace], grid: Iterable[int]) -> dict:
    """Step-function interpolation of best error onto ``grid`` plus mean and median."""
    traces = list(traces)
    budgets = {t.budget for t in traces}
    if len(budgets) > 1:
        raise MixedBudgets(f"traces use different budgets: {sorted(budgets)}")
    grid = np.asarray(list(grid), dtype=float)
    curves = np.full((len(traces), len(grid)), np.nan)
    for row, trace in enumerate(traces):
        if not trace.points:
            continue
        evals = np.array([e for e, _ in trace.points], dtype=float)
        errs = np.array([v for _, v in trace.points])
        k = np.searchsorted(evals, grid, side="right") - 1
        ok = k >= 0
        curves[row, ok] = errs[k[ok]]
    with np.errstate(all="ignore"):
        if len(traces):
            mean = np.array([np.mean(c) if not np.any(np.isnan(c)) else np.nan for c in curves.T])
            median = np.array([np.median(c) if not np.any(np.isnan(c)) else np.nan for c in curves.T])
        else:
            mean = median = np.full(len(grid), np.nan)
    return {
        "grid": grid,
        "problems": [t.problem for t in traces],
        "curves": curves,
        "mean": mean,
        "median": median,
    }


def param_dependence(results: Sequence[float], specs) -> list[dict]:
    if len(results) != len(specs):
        raise LengthMismatch(f"{len(results)} results for {len(specs)} specs")
    return [
        {
            "type": s.fn_type,
            "d": s.dist_to_vertex,
            "r": s.global_radius,
            "h": s.num_minima,
            "best_error": float(err),
        }
        for err, s in zip(results, specs)
    ]


# CSV ------------------------------------------------------------------------------

TRACE_HEADER = ["problem", "optimizer", "seed", "eval", "best_error"]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def traces_to_csv(traces: Iterable[RunTrace]) -> str:
    rows = []
    for t in traces:
        for e, v in t.points:
            rows.append((t.problem, t.optimizer, t.seed, int(e), float(v)))
    return _csv_text(TRACE_HEADER, rows)


def traces_from_csv(text: str, evaluations=None, budgets=None) -> list[RunTrace]:
    """Parse trace CSV; ``evaluations``/``budgets`` map (problem, optimizer) to counts."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {header}")
    grouped: dict = {}
    for problem, optimizer, seed, e, v in reader:
        key = (problem, optimizer, int(seed))
        grouped.setdefault(key, []).append((int(e), float(v)))
    out = []
    for (problem, optimizer, seed), pts in grouped.items():
        last = pts[-1][0]
        n = (evaluations or {}).get((problem, optimizer), last)
        b = (budgets or {}).get((problem, optimizer), n)
        out.append(RunTrace(problem, optimizer, seed, pts, n, b))
    return out


def curve_to_csv(x, y) -> str:
    return _csv_text(["x", "y"], zip((float(v) for v in x), (float(v) for v in y)))


def table_to_csv(rows: list[dict], header: list[str] | None = None) -> str:
    header = header or (list(rows[0]) if rows else [])
    return _csv_text(header, ([r[k] for k in header] for r in rows))
