import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from gklslab import __version__, cli
from gklslab.generator import PlacementFailure
from gklslab.optim import REGISTRY


def run(*args):
    return cli.main([str(a) for a in args])


def tree(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# generate -------------------------------------------------------------------


def test_generate_class7_writes_100_dim5_manifests(tmp_path):
    assert run("generate", "--class", 7, "--out", tmp_path) == 0
    files = sorted((tmp_path / "suites/class7/problems").glob("p*.json"))
    assert len(files) == 100
    dims = {json.loads(f.read_text())["spec"]["dim"] for f in files}
    assert dims == {5}


def test_generate_mod_dim10_writes_50_manifests(tmp_path):
    assert run("generate", "--mod", "--dim", 10, "--seed", 42, "--out", tmp_path) == 0
    assert len(list((tmp_path / "suites/mod10/problems").glob("p*.json"))) == 50
    suite = json.loads((tmp_path / "suites/mod10/suite.json").read_text())
    assert suite["suite_seed"] == 42 and suite["dim"] == 10


def test_generate_rerun_is_byte_identical(tmp_path):
    args = ("generate", "--class", 1, "--difficulty", "hard", "--dim", 3, "--count", 5)
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    assert tree(tmp_path / "a") == tree(tmp_path / "b")


def test_generate_placement_failure_is_partial(tmp_path, monkeypatch, capsys):
    real = cli.generate_problem

    def flaky(spec, index):
        if index == 3:
            raise PlacementFailure("no room", index)
        return real(spec, index)

    monkeypatch.setattr(cli, "generate_problem", flaky)
    assert run("generate", "--class", 1, "--count", 4, "--out", tmp_path) == 2
    assert "problem 3" in capsys.readouterr().err
    names = sorted(p.name for p in (tmp_path / "suites/class1/problems").iterdir())
    assert names == ["p0001.json", "p0002.json", "p0004.json"]


# config ---------------------------------------------------------------------


def test_config_json_holds_version_and_resolved_config(tmp_path):
    run("generate", "--class", 2, "--count", 3, "--seed", 11, "--out", tmp_path)
    doc = json.loads((tmp_path / "config.json").read_text())
    assert doc["version"] == __version__
    cfg = doc["config"]
    assert cfg["classes"] == [2] and cfg["count"] == 3 and cfg["seed"] == 11
    assert cfg["budget_mult"] == 50_000 and cfg["ela_samples_per_dim"] == 250
    assert "out" not in cfg


def test_flags_override_config_file(tmp_path):
    conf = tmp_path / "exp.json"
    conf.write_text(json.dumps({"classes": [1], "count": 2, "seed": 5}))
    run("generate", "--config", conf, "--seed", 7, "--out", tmp_path / "o")
    cfg = json.loads((tmp_path / "o/config.json").read_text())["config"]
    assert cfg["seed"] == 7 and cfg["count"] == 2


def test_unknown_config_key_is_rejected(tmp_path):
    conf = tmp_path / "exp.json"
    conf.write_text(json.dumps({"classes": [1], "colour": "red"}))
    assert run("generate", "--config", conf, "--out", tmp_path / "o") == 1
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize(
    "args",
    [
        ("generate", "--class", 9),
        ("generate", "--dim", 3),
        ("generate", "--difficulty", "medium", "--dim", 3),
        ("generate", "--mod"),
        ("generate", "--class", 1, "--optimizers", "nope"),
        ("generate", "--class", 1, "--count", 0),
        ("generate", "--class", "x"),
        ("generate", "--class", 1, "--bogus"),
        ("generate",),
        ("bench", "--class", 1),  # nothing generated yet
        ("report", "--class", 1),
    ],
)
def test_validation_errors_exit_1(tmp_path, args):
    assert run(*args, "--out", tmp_path / "o") == 1


def test_missing_out_is_a_validation_error():
    assert cli.main(["generate", "--class", "1"]) == 1


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--help"])
    assert info.value.code == 0


def test_config_validation_in_python():
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig(classes=[1], optimizer_params={"de_lpr": {}}).validate()
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig(classes=[1], optimizer_params={"random_search": {"speed": 2}}).validate()
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig(classes=[1, 1]).validate()
    cfg = cli.ExperimentConfig(classes=[3], difficulties=["simple", "hard"], dim=10, mod=True).validate()
    assert [m.name for m in cfg.manifests()] == ["class3", "simple10", "hard10", "mod10"]
    assert [len(m) for m in cfg.manifests()] == [100, 100, 100, 50]


def test_bench_mismatched_manifest_is_rejected(tmp_path):
    run("generate", "--class", 1, "--count", 2, "--seed", 1, "--out", tmp_path)
    assert run("bench", "--class", 1, "--count", 2, "--seed", 2, "--out", tmp_path) == 1


# bench ----------------------------------------------------------------------


def test_bench_class7_smoke(tmp_path):
    assert run("generate", "--class", 7, "--out", tmp_path) == 0
    assert run("bench", "--out", tmp_path, "--optimizers", "random_search", "--budget-mult", 200) == 0
    traces = list((tmp_path / "bench/class7/random_search/traces").glob("p*.csv"))
    assert len(traces) == 100
    rows = read_csv(tmp_path / "bench/class7/random_search/ecdf.csv")
    assert rows[0] == ["x", "y"]
    ys = [float(r[1]) for r in rows[1:]]
    assert 0 <= ys[-1] <= 1 and ys == sorted(ys)
    assert float(rows[-1][0]) == 1000
    summary = json.loads((tmp_path / "bench/summary.json").read_text())
    assert len(summary["runs"]) == 100 and summary["failed"] == []
    assert all(r["evaluations"] <= r["budget"] == 1000 for r in summary["runs"])


def test_bench_full_budget_rule_dim5(tmp_path):
    run("generate", "--class", 7, "--count", 2, "--out", tmp_path)
    assert run("bench", "--out", tmp_path, "--optimizers", "random_search") == 0
    summary = json.loads((tmp_path / "bench/summary.json").read_text())
    for r in summary["runs"]:
        assert r["budget"] == 250_000
        assert r["evaluations"] <= 250_000


def test_bench_rerun_identical_and_threads_do_not_matter(tmp_path):
    for name, threads in (("a", 1), ("b", 1), ("c", 3)):
        out = tmp_path / name
        run("generate", "--mod", "--dim", 3, "--count", 6, "--seed", 4, "--out", out)
        assert run("bench", "--out", out, "--optimizers", "random_search,de_lpr",
                   "--budget-mult", 100, "--threads", threads) == 0
    a, b, c = (tree(tmp_path / n) for n in "abc")
    assert a == b
    a.pop("config.json"), c.pop("config.json")
    assert a == c


def test_bench_writes_all_tables(tmp_path):
    run("generate", "--mod", "--dim", 2, "--count", 5, "--out", tmp_path)
    run("bench", "--out", tmp_path, "--optimizers", "random_search,direct_lite", "--budget-mult", 50)
    for opt in ("random_search", "direct_lite"):
        base = tmp_path / "bench/mod2" / opt
        conv = read_csv(base / "convergence.csv")
        assert conv[0][:3] == ["eval", "mean", "median"] and len(conv[0]) == 3 + 5
        dep = read_csv(base / "param_dependence.csv")
        assert dep[0] == ["problem", "type", "d", "r", "h", "best_error"] and len(dep) == 6
    report = read_csv(tmp_path / "bench/report.csv")
    assert [r[1] for r in report[1:]] == ["random_search", "direct_lite"]


def test_no_targets_skips_ecdf(tmp_path):
    run("generate", "--class", 1, "--count", 2, "--out", tmp_path)
    run("bench", "--out", tmp_path, "--budget-mult", 10, "--no-targets")
    assert not (tmp_path / "bench/class1/random_search/ecdf.csv").exists()
    assert (tmp_path / "bench/class1/random_search/convergence.csv").exists()


def test_bench_failed_runs_are_listed_and_exit_2(tmp_path, monkeypatch):
    def boom(box, rng):
        box.evaluate(np.zeros(box.dim))
        raise RuntimeError("optimizer crashed")

    monkeypatch.setitem(REGISTRY, "boom", (boom, {}))
    run("generate", "--class", 1, "--count", 3, "--out", tmp_path)
    code = run("bench", "--out", tmp_path, "--optimizers", "random_search,boom", "--budget-mult", 10)
    assert code == 2
    summary = json.loads((tmp_path / "bench/summary.json").read_text())
    assert summary["failed"] == [f"class1 p000{i} boom" for i in (1, 2, 3)]
    failed = [r for r in summary["runs"] if r["status"] == "failed"]
    assert all("optimizer crashed" in r["message"] and r["evaluations"] == 1 for r in failed)
    # the healthy optimizer still produced everything
    assert len(list((tmp_path / "bench/class1/random_search/traces").iterdir())) == 3


def test_report_rebuilds_bench_tables_exactly(tmp_path, capsys):
    run("generate", "--class", 1, "--count", 4, "--out", tmp_path)
    run("bench", "--out", tmp_path, "--optimizers", "random_search,de_lpr", "--budget-mult", 100)
    before = tree(tmp_path)
    for rel in ("bench/report.csv", "bench/class1/de_lpr/ecdf.csv", "bench/class1/de_lpr/convergence.csv"):
        (tmp_path / rel).unlink()
    assert run("report", "--out", tmp_path) == 0
    assert tree(tmp_path) == before
    assert "class1,de_lpr,4" in capsys.readouterr().out


def test_rerun_from_saved_config_reproduces_outputs(tmp_path):
    a = tmp_path / "a"
    run("generate", "--class", 1, "--count", 3, "--seed", 8, "--out", a)
    run("bench", "--out", a, "--budget-mult", 20, "--optimizers", "de_lpr")
    saved = tmp_path / "saved.json"
    saved.write_bytes((a / "config.json").read_bytes())
    b = tmp_path / "b"
    run("generate", "--config", saved, "--out", b)
    run("bench", "--config", saved, "--out", b)
    assert tree(a) == tree(b)


# ela ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def ela_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ela")
    args = ("--difficulty", "simple,hard", "--mod", "--dim", 10, "--samples-per-dim", 20,
            "--tsne-iterations", 300)
    assert run("generate", *args, "--out", out) == 0
    assert run("ela", *args, "--out", out) == 0
    return out


def test_ela_three_suites_give_250_rows(ela_run):
    rows = read_csv(ela_run / "ela/features.csv")
    assert rows[0][:2] == ["suite", "problem"]
    suites = [r[0] for r in rows[1:]]
    assert len(suites) == 250
    assert {s: suites.count(s) for s in set(suites)} == {"simple10": 100, "hard10": 100, "mod10": 50}


def test_ela_pca_report_reaches_one(ela_run):
    rows = read_csv(ela_run / "ela/pca_report.csv")
    assert rows[0] == ["component", "explained_variance_ratio", "cumulative"]
    assert float(rows[-1][2]) == 1.0
    cum = [float(r[2]) for r in rows[1:]]
    assert cum == sorted(cum)


def test_ela_outputs_are_consistent(ela_run):
    clean = read_csv(ela_run / "ela/features_clean.csv")
    full = read_csv(ela_run / "ela/features.csv")
    dropped = read_csv(ela_run / "ela/dropped.csv")
    assert dropped[0] == ["feature", "reason"]
    assert sorted(clean[0][2:] + [d[0] for d in dropped[1:]]) == sorted(full[0][2:])
    emb = read_csv(ela_run / "ela/embedding.csv")
    assert emb[0] == ["suite", "problem", "x", "y"] and len(emb) == 251
    info = json.loads((ela_run / "ela/summary.json").read_text())
    assert info["rows"] == 250 and info["pca_components"] == 7 and info["tsne_perplexity"] == 30
    proj = read_csv(ela_run / "ela/pca_projection.csv")
    assert proj[0] == ["suite", "problem"] + [f"pc{i}" for i in range(1, 8)]


def test_ela_import_merge_keeps_suite_labels(tmp_path):
    run("generate", "--class", 1, "--count", 12, "--out", tmp_path)
    run("ela", "--out", tmp_path, "--samples-per-dim", 50, "--tsne-iterations", 250)
    ours = read_csv(tmp_path / "ela/features.csv")
    ext = tmp_path / "bbob.csv"
    rng = np.random.default_rng(0)
    lines = [",".join(ours[0])]
    for k in range(8):
        vals = [f"{v:.6g}" for v in rng.normal(size=len(ours[0]) - 2)]
        lines.append(",".join(["bbob", f"f{k + 1}"] + vals))
    ext.write_text("\n".join(lines) + "\n")
    out = tmp_path / "merged"
    run("generate", "--class", 1, "--count", 12, "--out", out)
    code = run("ela", "--out", out, "--samples-per-dim", 50, "--tsne-iterations", 250, "--import", ext)
    assert code == 0
    emb = read_csv(out / "ela/embedding.csv")
    labels = [(r[0], r[1]) for r in emb[1:]]
    assert labels[:12] == [("class1", f"p{i:04d}") for i in range(1, 13)]
    assert labels[12:] == [("bbob", f"f{k}") for k in range(1, 9)]


def test_ela_import_only(tmp_path):
    ext = tmp_path / "ext.csv"
    rng = np.random.default_rng(1)
    lines = ["suite,problem,a,b,c"] + [f"x,q{i},{rng.random()},{rng.random()},{rng.random()}" for i in range(5)]
    ext.write_text("\n".join(lines) + "\n")
    assert run("ela", "--out", tmp_path / "o", "--import", ext) == 0
    info = json.loads((tmp_path / "o/ela/summary.json").read_text())
    assert info["rows"] == 5 and info["tsne_perplexity"] is None  # too few rows to embed


def test_ela_parse_error_has_context(tmp_path, capsys):
    ext = tmp_path / "bad.csv"
    ext.write_text("suite,problem,a\nx,q1,0.5\nx,q2,oops\n")
    assert run("ela", "--out", tmp_path / "o", "--import", ext) == 1
    err = capsys.readouterr().err
    assert "row 3" in err and "column a" in err


def test_ela_everything_dropped_exits_1(tmp_path, capsys):
    ext = tmp_path / "flat.csv"
    ext.write_text("suite,problem,a,b\n" + "".join(f"x,q{i},1,NA\n" for i in range(4)))
    assert run("ela", "--out", tmp_path / "o", "--import", ext) == 1
    assert "error" in capsys.readouterr().err


# filesystem hygiene --------------------------------------------------------------


def test_cli_never_writes_outside_out(tmp_path, monkeypatch):
    work = tmp_path / "cwd"
    work.mkdir()
    (work / "keep.txt").write_text("x")
    monkeypatch.chdir(work)
    out = tmp_path / "out"
    run("generate", "--class", 1, "--count", 12, "--out", out)
    run("bench", "--out", out, "--budget-mult", 10)
    run("ela", "--out", out, "--samples-per-dim", 20, "--tsne-iterations", 250)
    run("report", "--out", out)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["cwd", "out"]
    assert [p.name for p in work.iterdir()] == ["keep.txt"]
    assert not [p for p in out.rglob("*.tmp")]


def test_output_refuses_escaping_paths(tmp_path):
    out = cli.Output(tmp_path / "o")
    with pytest.raises(cli.ConfigError):
        out.write("../evil.txt", "x")
    out.write("fine/ok.txt", "x")
    assert (tmp_path / "o/fine/ok.txt").read_text() == "x"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gklslab", "generate", "--class", "9", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert "1..8" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "gklslab", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
