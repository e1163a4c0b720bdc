"""Batch experiments from the command line: ``gklslab generate|bench|ela|report``.

Everything one experiment produces lives under its ``--out`` directory::

    config.json                             resolved configuration + tool version
    suites/<suite>/suite.json               suite manifest
    suites/<suite>/problems/pNNNN.json      problem manifests
    bench/<suite>/<optimizer>/traces/pNNNN.csv
    bench/<suite>/<optimizer>/ecdf.csv      (when targets are on)
    bench/<suite>/<optimizer>/convergence.csv
    bench/<suite>/<optimizer>/param_dependence.csv   (mod suites)
    bench/summary.json, bench/report.csv
    ela/features.csv, features_clean.csv, features_normalized.csv,
    ela/dropped.csv, pca_report.csv, pca_projection.csv, embedding.csv,
    ela/summary.json

Exit codes: 0 success, 1 invalid configuration or input, 2 some runs failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    BUDGET_PER_DIM,
    STOP_ERROR,
    RunTrace,
    convergence_aggregate,
    curve_to_csv,
    ecdf,
    ecdf_grid,
    first_hits,
    fmt,
    make_targets,
    param_dependence,
    table_to_csv,
    traces_from_csv,
    traces_to_csv,
)
from .ela import (
    EverythingDropped,
    FeatureMatrix,
    ParseError,
    RankTooLow,
    clean_features,
    embedding_csv,
    import_features,
    normalize,
    pca_fit,
    problem_features,
    tsne_embed,
)
from .ela.pipeline import CORR_THRESHOLD
from .ela.sample import SAMPLES_PER_DIM
from .generator import GklsProblem, InvalidSpec, PlacementFailure, generate_problem
from .optim import REGISTRY, BlackBox, InvalidParameters, OptimizerConfig, run_optimizer
from .rng import derive_seed
from .suites import (
    CANONICAL_CLASS_SIZE,
    CANONICAL_TABLE,
    MOD_CLASS_SIZE,
    SuiteManifest,
    canonical_manifest,
    extended_manifest,
    mod_manifest,
    sample_mod_class_with_stats,
    suite_summary,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARTIAL = 2
CONFIG_FILE = "config.json"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Resolved settings of one experiment.

    Suites: any mix of canonical class ids, ``dim`` with one or more
    difficulties, and the mod class at ``dim``.  ``count`` overrides the
    suite size (100 per canonical/extended suite, 50 for mod).
    The output directory is deliberately not part of the config, so the
    same file reproduces the same tree anywhere.
    """

    classes: list = field(default_factory=list)
    dim: int | None = None
    difficulties: list = field(default_factory=list)
    mod: bool = False
    count: int | None = None
    seed: int = 0
    optimizers: list = field(default_factory=lambda: ["random_search"])
    optimizer_params: dict = field(default_factory=dict)
    budget_mult: int = BUDGET_PER_DIM
    stop_error: float = STOP_ERROR
    targets: bool = True
    ela: bool = True
    ela_samples_per_dim: int = SAMPLES_PER_DIM
    corr_threshold: float = CORR_THRESHOLD
    normalization: str = "minmax"
    pca_components: int = 7
    tsne_perplexity: float = 30.0
    tsne_iterations: int = 1000
    import_file: str | None = None
    threads: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a key-value object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**data).validate()

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "ExperimentConfig":
        def need(ok, message):
            if not ok:
                raise ConfigError(message)

        def is_int(v):
            return isinstance(v, (int, np.integer)) and not isinstance(v, bool)

        def is_real(v):
            return (is_int(v) or isinstance(v, float)) and math.isfinite(v)

        need(isinstance(self.classes, list) and all(is_int(c) for c in self.classes),
             "classes must be a list of integers")
        for c in self.classes:
            need(c in CANONICAL_TABLE, f"canonical classes are 1..8, got {c}")
        need(isinstance(self.difficulties, list), "difficulties must be a list")
        for d in self.difficulties:
            need(d in ("simple", "hard"), f"difficulty must be simple or hard, got {d!r}")
        need(self.dim is None or (is_int(self.dim) and self.dim >= 2), "dim must be an integer >= 2")
        need(isinstance(self.mod, bool), "mod must be true or false")
        if self.difficulties or self.mod:
            need(self.dim is not None, "--dim is required with --difficulty or --mod")
        elif self.dim is not None:
            need(False, "--dim needs --difficulty or --mod")
        need(self.count is None or (is_int(self.count) and self.count >= 1), "count must be >= 1")
        need(is_int(self.seed), "seed must be an integer")
        need(isinstance(self.optimizers, list) and self.optimizers, "need at least one optimizer")
        need(len(set(self.optimizers)) == len(self.optimizers), "optimizers listed twice")
        for name in self.optimizers:
            need(name in REGISTRY, f"unknown optimizer {name!r}; known: {sorted(REGISTRY)}")
        need(isinstance(self.optimizer_params, dict), "optimizer_params must map names to parameters")
        for name, params in self.optimizer_params.items():
            need(name in self.optimizers, f"parameters given for unused optimizer {name!r}")
            need(isinstance(params, dict), f"parameters of {name} must be a key-value object")
            try:
                OptimizerConfig(name, 0, params).validate()
            except InvalidParameters as err:
                raise ConfigError(str(err)) from None
        need(is_int(self.budget_mult) and self.budget_mult >= 1, "budget multiplier must be >= 1")
        need(is_real(self.stop_error) and self.stop_error >= 0, "stop_error must be >= 0")
        need(isinstance(self.targets, bool) and isinstance(self.ela, bool), "toggles must be booleans")
        need(is_int(self.ela_samples_per_dim) and self.ela_samples_per_dim >= 1,
             "ela_samples_per_dim must be >= 1")
        need(is_real(self.corr_threshold) and 0 < self.corr_threshold <= 1,
             "corr_threshold must be in (0, 1]")
        need(self.normalization in ("minmax", "zscore"), "normalization must be minmax or zscore")
        need(is_int(self.pca_components) and self.pca_components >= 1, "pca_components must be >= 1")
        need(is_real(self.tsne_perplexity) and self.tsne_perplexity > 0, "perplexity must be > 0")
        need(is_int(self.tsne_iterations) and self.tsne_iterations >= 1, "iterations must be >= 1")
        need(self.import_file is None or isinstance(self.import_file, str), "import_file must be a path")
        need(is_int(self.threads) and self.threads >= 1, "threads must be >= 1")
        names = [m.name for m in self.manifests()]
        need(len(set(names)) == len(names), f"suite selected twice: {names}")
        return self

    def manifests(self) -> list[SuiteManifest]:
        out = [canonical_manifest(c, self.count or CANONICAL_CLASS_SIZE, self.seed) for c in self.classes]
        for d in self.difficulties:
            out.append(extended_manifest(self.dim, d, self.count or CANONICAL_CLASS_SIZE, self.seed))
        if self.mod:
            out.append(mod_manifest(self.dim, self.count or MOD_CLASS_SIZE, self.seed))
        return out


# output directory -------------------------------------------------------------


class Output:
    """All writes go through here: paths are checked to stay inside the
    root and files are replaced atomically."""

    def __init__(self, root):
        self.root = Path(root).resolve()

    def path(self, rel) -> Path:
        p = (self.root / rel).resolve()
        if p != self.root and self.root not in p.parents:
            raise ConfigError(f"refusing to write outside {self.root}: {rel}")
        return p

    def write(self, rel, text: str) -> None:
        p = self.path(rel)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=f".{p.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def write_json(self, rel, data) -> None:
        self.write(rel, json.dumps(data, indent=1, sort_keys=True) + "\n")

    def read(self, rel) -> str:
        return self.path(rel).read_text()

    def exists(self, rel) -> bool:
        return self.path(rel).exists()


def pid_of(index: int) -> str:
    return f"p{index:04d}"


def write_config(out: Output, cfg: ExperimentConfig) -> None:
    out.write_json(CONFIG_FILE, {"tool": "gklslab", "version": __version__, "config": cfg.to_dict()})


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file {path} is not valid JSON: {err}") from None
    # accept the provenance file written into output directories
    if isinstance(data, dict) and set(data) == {"tool", "version", "config"}:
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigError("config must be a key-value object")
    return data


def _pool_map(fn, items, threads):
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def load_suites(out: Output, cfg: ExperimentConfig):
    """(manifest, problems, missing indices) per selected suite, read from disk."""
    loaded = []
    for expected in cfg.manifests():
        rel = f"suites/{expected.name}/suite.json"
        if not out.exists(rel):
            raise ConfigError(f"no manifest for suite {expected.name} in {out.root}; run generate first")
        stored = SuiteManifest.from_json(out.read(rel))
        if stored.to_dict() != expected.to_dict():
            raise ConfigError(f"suite {expected.name} on disk was generated with different settings")
        problems, missing = [], []
        for index, _ in stored.indexed_specs():
            prel = f"suites/{stored.name}/problems/{pid_of(index)}.json"
            if out.exists(prel):
                problems.append(GklsProblem.from_json(out.read(prel)))
            else:
                missing.append(index)
        loaded.append((stored, problems, missing))
    return loaded


# generate -------------------------------------------------------------------


def cmd_generate(cfg: ExperimentConfig, out: Output) -> int:
    manifests = cfg.manifests()
    if not manifests:
        raise ConfigError("select a suite with --class, --difficulty or --mod")
    write_config(out, cfg)
    failed = []
    for manifest in manifests:
        out.write(f"suites/{manifest.name}/suite.json", manifest.to_json() + "\n")
        jobs = list(manifest.indexed_specs())

        def build(job):
            index, spec = job
            try:
                return generate_problem(spec, index), None
            except PlacementFailure as err:
                return None, f"{manifest.name} problem {index}: {err}"

        problems = []
        for (index, _), (problem, error) in zip(jobs, _pool_map(build, jobs, cfg.threads)):
            if problem is None:
                failed.append(error)
                print(f"error: placement failed for {error}", file=sys.stderr)
                continue
            out.write(f"suites/{manifest.name}/problems/{pid_of(index)}.json", problem.to_json() + "\n")
            problems.append(problem)
        stats = suite_summary(problems)
        line = f"{manifest.name}: {stats['problems']}/{len(manifest)} problems, dim {manifest.dim}"
        if problems:
            line += (f", {stats['minima_total']} minima, local radius min {stats['local_radius_min']:.4g}"
                     f" mean {stats['local_radius_mean']:.4g}")
        if manifest.name.startswith("mod"):
            _, mstats = sample_mod_class_with_stats(manifest.dim, len(manifest), cfg.seed)
            line += f", {mstats.resampled} of {mstats.draws} recipe draws resampled"
        print(line)
    return EXIT_PARTIAL if failed else EXIT_OK


# bench ----------------------------------------------------------------------


def _run_one(job):
    suite, problem, name, params, seed, budget, stop_error = job
    pid = pid_of(problem.problem_index)
    box = BlackBox.from_problem(problem, budget, stop_error)
    try:
        trace = run_optimizer(OptimizerConfig(name, seed, params), box, problem_id=pid)
        return trace, None
    except Exception as err:  # report per run, keep the batch going
        trace = RunTrace(pid, name, seed, box.error_trace(), box.n_evals, budget)
        return trace, f"{type(err).__name__}: {err}"


def cmd_bench(cfg: ExperimentConfig, out: Output) -> int:
    suites = load_suites(out, cfg)
    if not suites:
        raise ConfigError("select a suite with --class, --difficulty or --mod")
    write_config(out, cfg)
    jobs = []
    for manifest, problems, _ in suites:
        budget = cfg.budget_mult * manifest.dim
        for problem in problems:
            for name in cfg.optimizers:
                seed = derive_seed(cfg.seed, manifest.name, problem.problem_index, name)
                params = cfg.optimizer_params.get(name, {})
                jobs.append((manifest.name, problem, name, params, seed, budget, cfg.stop_error))
    results = _pool_map(_run_one, jobs, cfg.threads)

    runs = []
    for job, (trace, error) in zip(jobs, results):
        suite = job[0]
        out.write(f"bench/{suite}/{trace.optimizer}/traces/{trace.problem}.csv", traces_to_csv([trace]))
        runs.append({
            "suite": suite,
            "problem": trace.problem,
            "optimizer": trace.optimizer,
            "seed": trace.seed,
            "evaluations": trace.evaluations,
            "budget": trace.budget,
            "final_error": trace.final_error if trace.points else None,
            "status": "failed" if error else "ok",
            "message": error,
        })
        if error:
            print(f"error: {suite} {trace.problem} {trace.optimizer}: {error}", file=sys.stderr)
    missing = [f"{m.name} {pid_of(i)}" for m, _, miss in suites for i in miss]
    for m in missing:
        print(f"error: no problem manifest for {m}", file=sys.stderr)
    summary = {
        "runs": runs,
        "failed": [f"{r['suite']} {r['problem']} {r['optimizer']}" for r in runs if r["status"] != "ok"],
        "missing_problems": missing,
    }
    out.write_json("bench/summary.json", summary)
    traces = [trace for trace, _ in results]
    write_aggregates(out, cfg, suites, runs, traces)
    return EXIT_PARTIAL if summary["failed"] or missing else EXIT_OK


def _convergence_grid(budget: int) -> np.ndarray:
    return np.unique(np.round(ecdf_grid(budget)).astype(int))


def write_aggregates(out: Output, cfg: ExperimentConfig, suites, runs, traces) -> list[dict]:
    """ECDF, convergence and parameter-dependence tables plus report.csv."""
    ladder = make_targets()
    specs = {m.name: dict(m.indexed_specs()) for m, _, _ in suites}
    report = []
    groups: dict = {}
    for run, trace in zip(runs, traces):
        groups.setdefault((run["suite"], run["optimizer"]), []).append((run, trace))
    for (suite, name), items in groups.items():
        base = f"bench/{suite}/{name}"
        budget = items[0][1].budget
        ts = [t for _, t in items]
        row = {
            "suite": suite,
            "optimizer": name,
            "runs": len(items),
            "failed": sum(r["status"] != "ok" for r, _ in items),
            "solved": sum(t.final_error <= cfg.stop_error for t in ts),
            "median_final_error": float(np.median([t.final_error for t in ts])),
            "ecdf_final": None,
        }
        if cfg.targets:
            curve = ecdf({t.problem: first_hits(t, ladder) for t in ts}, budget)
            out.write(f"{base}/ecdf.csv", curve_to_csv(curve.x, curve.y))
            row["ecdf_final"] = float(curve.y[-1])
        agg = convergence_aggregate(ts, _convergence_grid(budget))
        table = []
        for j, e in enumerate(agg["grid"]):
            entry = {"eval": int(e), "mean": agg["mean"][j], "median": agg["median"][j]}
            entry.update({p: agg["curves"][i, j] for i, p in enumerate(agg["problems"])})
            table.append(entry)
        out.write(f"{base}/convergence.csv", table_to_csv(table, ["eval", "mean", "median"] + agg["problems"]))
        if suite.startswith("mod"):
            index = {pid_of(i): s for i, s in specs[suite].items()}
            rows = param_dependence([t.final_error for t in ts], [index[t.problem] for t in ts])
            for r, t in zip(rows, ts):
                r["problem"] = t.problem
            header = ["problem", "type", "d", "r", "h", "best_error"]
            out.write(f"{base}/param_dependence.csv", table_to_csv(rows, header))
        report.append(row)
    header = ["suite", "optimizer", "runs", "failed", "solved", "median_final_error", "ecdf_final"]
    out.write("bench/report.csv", table_to_csv(report, header))
    return report


def cmd_report(cfg: ExperimentConfig, out: Output) -> int:
    """Rebuild the bench tables from the trace files and bench/summary.json."""
    if not out.exists("bench/summary.json"):
        raise ConfigError(f"no bench results in {out.root}; run bench first")
    summary = json.loads(out.read("bench/summary.json"))
    suites = load_suites(out, cfg)
    traces = []
    for run in summary["runs"]:
        rel = f"bench/{run['suite']}/{run['optimizer']}/traces/{run['problem']}.csv"
        if not out.exists(rel):
            raise ConfigError(f"missing trace file {rel}")
        key = (run["problem"], run["optimizer"])
        parsed = traces_from_csv(out.read(rel), {key: run["evaluations"]}, {key: run["budget"]})
        if parsed:
            traces.append(parsed[0])
        else:  # a run that never evaluated anything
            traces.append(RunTrace(run["problem"], run["optimizer"], run["seed"], [],
                                   run["evaluations"], run["budget"]))
    report = write_aggregates(out, cfg, suites, summary["runs"], traces)
    print(table_to_csv(report, list(report[0]) if report else []), end="")
    return EXIT_PARTIAL if summary["failed"] or summary.get("missing_problems") else EXIT_OK


# ela ------------------------------------------------------------------------


def _perplexity_for(rows: int, wanted: float) -> float:
    """The configured perplexity, lowered to the largest integer below
    (rows - 1) / 3 when the matrix is too small for it."""
    limit = (rows - 1) / 3
    return wanted if wanted < limit else float(math.ceil(limit) - 1)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_ela(cfg: ExperimentConfig, out: Output) -> int:
    suites = load_suites(out, cfg) if cfg.ela else []
    if not suites and cfg.import_file is None:
        raise ConfigError("nothing to analyse: select suites or pass --import")
    imported = None
    if cfg.import_file is not None:
        try:
            imported = import_features(cfg.import_file)
        except FileNotFoundError:
            raise ConfigError(f"import file not found: {cfg.import_file}") from None
        except ParseError as err:
            raise ConfigError(f"{cfg.import_file}: {err}") from None
    write_config(out, cfg)

    jobs = [(m, p) for m, problems, _ in suites for p in problems]

    def features(job):
        manifest, problem = job
        seed = derive_seed(cfg.seed, manifest.name, problem.problem_index, "ela")
        try:
            n = cfg.ela_samples_per_dim * problem.dim
            return problem_features(problem, n, seed, manifest.name, pid_of(problem.problem_index)), None
        except Exception as err:
            return None, f"{manifest.name} {pid_of(problem.problem_index)}: {type(err).__name__}: {err}"

    vectors, failed = [], []
    for vec, error in _pool_map(features, jobs, cfg.threads):
        if error:
            failed.append(error)
            print(f"error: features for {error}", file=sys.stderr)
        else:
            vectors.append(vec)
    failed += [f"{m.name} {pid_of(i)}: no problem manifest" for m, _, miss in suites for i in miss]

    matrix = FeatureMatrix.from_vectors(vectors) if vectors else None
    if imported is not None:
        matrix = imported if matrix is None else matrix.concat(imported)
    if matrix is None or not matrix.problems:
        raise ConfigError("no feature rows to analyse")
    out.write("ela/features.csv", matrix.to_csv())

    try:
        cleaned = clean_features(matrix, cfg.corr_threshold)
    except EverythingDropped as err:
        raise ConfigError(f"feature cleaning: {err}") from None
    out.write("ela/features_clean.csv", cleaned.to_csv())
    out.write("ela/dropped.csv", _csv(["feature", "reason"], [(n, r) for n, r in cleaned.dropped.items()]))
    normalized = normalize(cleaned, cfg.normalization)
    out.write("ela/features_normalized.csv", normalized.to_csv())

    rows, cols = normalized.shape
    k = min(cfg.pca_components, rows - 1, cols)
    info = {
        "rows": rows,
        "rows_per_suite": {s: normalized.suites.count(s) for s in dict.fromkeys(normalized.suites)},
        "features_computed": len(matrix.names),
        "features_kept": cols,
        "features_dropped": len(cleaned.dropped),
        "failed": failed,
        "pca_components": None,
        "pca_cumulative": None,
        "tsne_perplexity": None,
    }
    try:
        model, Z = pca_fit(normalized.data, k)
    except RankTooLow as err:
        print(f"warning: PCA skipped: {err}", file=sys.stderr)
        Z = None
    if Z is not None:
        info["pca_components"] = k
        info["pca_cumulative"] = float(model.cumulative[k - 1])
        out.write("ela/pca_report.csv", model.report_csv())
        header = ["suite", "problem"] + [f"pc{i + 1}" for i in range(k)]
        body = [[s, p] + [fmt(float(v)) for v in z] for s, p, z in zip(normalized.suites, normalized.problems, Z)]
        out.write("ela/pca_projection.csv", _csv(header, body))
        if rows >= 10:
            perplexity = _perplexity_for(rows, cfg.tsne_perplexity)
            if perplexity != cfg.tsne_perplexity:
                print(f"note: t-SNE perplexity lowered to {perplexity:g} for {rows} rows")
            Y = tsne_embed(Z, perplexity, cfg.tsne_iterations, seed=derive_seed(cfg.seed, "tsne"))
            info["tsne_perplexity"] = perplexity
            out.write("ela/embedding.csv", embedding_csv(normalized.suites, normalized.problems, Y))
        else:
            print(f"warning: t-SNE skipped: needs 10 rows, have {rows}", file=sys.stderr)
    out.write_json("ela/summary.json", info)
    print(f"ela: {rows} rows, {cols} of {len(matrix.names)} features kept, "
          f"PCA k={info['pca_components']}")
    return EXIT_PARTIAL if failed else EXIT_OK


# argument parsing -----------------------------------------------------------


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with 2, which means partial failure here
        raise UsageError(message)


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


# flag dest -> config key
FLAG_KEYS = {
    "classes": "classes",
    "dim": "dim",
    "difficulties": "difficulties",
    "mod": "mod",
    "count": "count",
    "seed": "seed",
    "budget_mult": "budget_mult",
    "optimizers": "optimizers",
    "import_file": "import_file",
    "threads": "threads",
    "samples_per_dim": "ela_samples_per_dim",
    "corr_threshold": "corr_threshold",
    "normalization": "normalization",
    "pca_components": "pca_components",
    "perplexity": "tsne_perplexity",
    "tsne_iterations": "tsne_iterations",
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override its values)")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--class", dest="classes", type=_int_list, help="canonical class ids, e.g. 1 or 7,8")
    common.add_argument("--dim", type=int, help="dimension for --difficulty and --mod suites")
    common.add_argument("--difficulty", dest="difficulties", type=_str_list, help="simple, hard or simple,hard")
    common.add_argument("--mod", action="store_true", default=None, help="include the randomized mod class")
    common.add_argument("--count", type=int, help="problems per suite (default 100, mod 50)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--budget-mult", type=int, help="evaluations per dimension (default 50000)")
    common.add_argument("--optimizers", type=_str_list, help="comma separated optimizer names")
    common.add_argument("--import", dest="import_file", help="external feature CSV to merge (ela)")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--samples-per-dim", type=int, help="ELA sample size per dimension (default 250)")
    common.add_argument("--corr-threshold", type=float)
    common.add_argument("--normalization", choices=["minmax", "zscore"])
    common.add_argument("--pca-components", type=int)
    common.add_argument("--perplexity", type=float)
    common.add_argument("--tsne-iterations", type=int)
    common.add_argument("--no-targets", action="store_true", help="skip ECDF output")

    parser = _Parser(prog="gklslab", description="GKLS generator lab")
    parser.add_argument("--version", action="version", version=f"gklslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="write suite and problem manifests")
    sub.add_parser("bench", parents=[common], help="run optimizers on generated suites")
    sub.add_parser("ela", parents=[common], help="landscape features, cleaning, PCA and t-SNE")
    sub.add_parser("report", parents=[common], help="rebuild bench tables from saved traces")
    return parser


def resolve_config(args, out: Output) -> ExperimentConfig:
    if args.config:
        data = load_config_file(args.config)
    elif args.command != "generate" and out.exists(CONFIG_FILE):
        data = load_config_file(out.path(CONFIG_FILE))
    else:
        data = {}
    data = dict(data)
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest)
        if value is not None:
            data[key] = value
    if args.no_targets:
        data["targets"] = False
    return ExperimentConfig.from_dict(data)


COMMANDS = {"generate": cmd_generate, "bench": cmd_bench, "ela": cmd_ela, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = Output(args.out)
        cfg = resolve_config(args, out)
        return COMMANDS[args.command](cfg, out)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
    except (ConfigError, InvalidSpec) as err:
        print(f"error: {err}", file=sys.stderr)
    return EXIT_INVALID


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
