from __future__ import annotations

import csv
import math
import subprocess
import sys

import pytest

from rootedgp.bench import (CSV_FIELDS, bench_family, doubling_sizes, fit, read_csv, run_once,
                            sweep, write_csv)
from rootedgp.cli import UsageError, main, parse_size, parse_sizes
from rootedgp.parser import load_host_graph, save_host_graph
from rootedgp.programs import Star, build_input
from rootedgp.store import EdgeMark, NodeMark

HEADER = "program,family,backend,nodes,edges,size,steps,rule_apps,wall_ms,outcome"


def cli(*argv: str) -> int:
    return main(list(argv))


def test_csv_header_is_stable():
    assert ",".join(CSV_FIELDS) == HEADER


def test_run_cycle_fails_and_appends_row(tmp_path, capsys):
    out = tmp_path / "out.csv"
    args = ("run", "--program", "is-dag", "--family", "cycle", "--size", "1000",
            "--backend", "indexed", "--csv", str(out))
    assert cli(*args) == 1
    assert "program failed" in capsys.readouterr().err
    assert cli(*args) == 1
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER and len(lines) == 3
    (rec, _) = read_csv(out)
    assert rec.outcome == "failure" and rec.size == rec.nodes + rec.edges == 1000
    assert rec.steps > 0


def test_run_bfs_emits_blue_graph(tmp_path):
    src, dst = tmp_path / "g.gpg", tmp_path / "r.gpg"
    save_host_graph(build_input("bfs", Star(6)), src)
    assert cli("run", "--program", "bfs", "--graph", str(src), "--emit-result", str(dst)) == 0
    g = load_host_graph(dst)
    assert {g.get_mark(n) for n in g.nodes()} == {NodeMark.BLUE}
    assert {g.get_edge_mark(e) for e in g.edges()} == {EdgeMark.BLUE}


def test_failed_run_writes_no_result(tmp_path):
    dst = tmp_path / "r.gpg"
    assert cli("run", "--program", "is-dag", "--family", "cycle", "--size", "10",
               "--emit-result", str(dst)) == 1
    assert not dst.exists()


def test_backends_agree_on_outcome_not_cost(tmp_path):
    out = tmp_path / "d.csv"
    for backend in ("legacy", "indexed"):
        assert cli("run", "--program", "is-discrete", "--family", "discrete", "--size", "500",
                   "--backend", backend, "--csv", str(out)) == 0
    legacy, indexed = read_csv(out)
    assert legacy.outcome == indexed.outcome == "success"
    assert legacy.rule_apps == indexed.rule_apps
    assert legacy.steps > 20 * indexed.steps


def test_explicit_grid_and_kkstar(tmp_path):
    out = tmp_path / "x.csv"
    assert cli("run", "--program", "bfs", "--family", "grid", "--width", "3", "--height", "4",
               "--csv", str(out)) == 0
    assert cli("run", "--program", "component-numbering", "--family", "kkstar", "--k", "3",
               "--csv", str(out)) == 0
    grid, kk = read_csv(out)
    assert (grid.nodes, grid.edges) == (12, 17) and (kk.nodes, kk.edges) == (12, 9)


def test_budget_exit(capsys):
    assert cli("run", "--program", "is-dag", "--family", "list", "--size", "100",
               "--budget", "5") == 1
    assert "budget" in capsys.readouterr().err


def test_random_family_is_seeded(tmp_path):
    out = tmp_path / "r.csv"
    for seed in ("3", "3", "4"):
        cli("run", "--program", "is-connected", "--family", "random", "--size", "300",
            "--seed", seed, "--csv", str(out))
    a, b, c = read_csv(out)
    assert (a.steps, a.outcome) == (b.steps, b.outcome)
    assert a.nodes == c.nodes


def test_reps_write_one_row_each(tmp_path):
    out = tmp_path / "r.csv"
    cli("run", "--program", "is-dag", "--family", "list", "--size", "50", "--reps", "3",
        "--csv", str(out))
    recs = read_csv(out)
    assert len(recs) == 3 and len({r.steps for r in recs}) == 1


@pytest.mark.parametrize("argv", [
    ("run", "--program", "bfs", "--family", "grid"),
    ("run", "--program", "bfs", "--family", "list", "--width", "3", "--size", "9"),
    ("run", "--program", "bfs", "--family", "grid", "--width", "3"),
    ("run", "--program", "bfs", "--graph", "/nonexistent.gpg"),
    ("sweep", "--program", "bfs", "--families", "list", "--sizes", "1k..4k"),
    ("sweep", "--program", "bfs", "--families", "hypercube"),
    ("sweep", "--program", "bfs", "--sizes", "8k..1k"),
])
def test_usage_errors_exit_two(argv, capsys):
    assert cli(*argv) == 2
    assert "error" in capsys.readouterr().err


def test_malformed_graph_file_is_usage_error(tmp_path, capsys):
    p = tmp_path / "bad.gpg"
    p.write_text("[ (n0, 1 | ]")
    assert cli("run", "--program", "bfs", "--graph", str(p)) == 2
    assert "1:10" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ("run", "--program", "nope", "--family", "list", "--size", "9"),
    ("run", "--program", "bfs", "--family", "list", "--size", "9", "--graph", "g.gpg"),
    ("run", "--program", "bfs"),
    ("run", "--program", "bfs", "--family", "list", "--size", "lots"),
    ("run", "--program", "bfs", "--family", "list", "--size", "9", "--budget", "0"),
])
def test_argparse_rejections_exit_two(argv):
    with pytest.raises(SystemExit) as info:
        cli(*argv)
    assert info.value.code == 2


def test_sweep_prints_fits_and_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert cli("sweep", "--program", "is-dag", "--families", "list,star",
               "--sizes", "250..4k", "--csv", str(out)) == 0
    text = capsys.readouterr().out
    assert "list" in text and "star" in text and "R2" in text
    recs = read_csv(out)
    assert len(recs) == 2 * 5
    with open(out, newline="") as fh:
        assert next(csv.reader(fh)) == list(CSV_FIELDS)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "rootedgp", "run", "--program", "is-dag",
                        "--family", "list", "--size", "20"], capture_output=True, text=True)
    assert r.returncode == 0 and "success" in r.stdout


# -- helpers ------------------------------------------------------------------------

def test_parse_sizes():
    assert parse_size("64k") == 64000 and parse_size("2M") == 2_000_000
    assert parse_sizes("1k..16k") == [1000, 2000, 4000, 8000, 16000]
    assert parse_sizes("10,20, 30") == [10, 20, 30]
    assert doubling_sizes(3, 20) == [3, 6, 12]
    with pytest.raises(UsageError):
        parse_size("1.5k")


def test_fit_linear_and_quadratic():
    sizes = [1000, 2000, 4000, 8000, 16000]
    lin = fit("list", sizes, [3 * s + 7 for s in sizes])
    assert lin.r2 == pytest.approx(1.0) and lin.slope == pytest.approx(3.0)
    assert all(1.9 < r < 2.0 for r in lin.doubling_ratios)
    quad = fit("discrete", sizes, [s * s for s in sizes])
    assert all(r == pytest.approx(4.0) for r in quad.doubling_ratios)
    with pytest.raises(ValueError):
        fit("x", sizes[:4], sizes[:4])


def test_fit_ratio_rescales_uneven_sizes():
    sizes = [100, 300, 900, 2700, 8100]
    f = fit("x", sizes, [s * s for s in sizes])
    assert all(r == pytest.approx(4.0) for r in f.doubling_ratios)
    assert math.isnan(fit("x", sizes, [0, 1, 2, 3, 4]).doubling_ratios[0])


def test_sweep_records_deterministic():
    recs, fits = sweep("bfs", ["tree"], [100, 200, 400, 800, 1600], reps=2)
    assert len(recs) == 10 and len(fits) == 1
    assert recs[0].steps == recs[1].steps
    assert fits[0].sizes == tuple(r.size for r in recs[::2])


def test_record_round_trip(tmp_path):
    rec = bench_family("is-connected", "star", 101, "legacy")
    p = tmp_path / "r.csv"
    write_csv([rec], p)
    (back,) = read_csv(p)
    assert back.steps == rec.steps and back.wall_ms == pytest.approx(rec.wall_ms, abs=1e-3)
    assert back.outcome == "success"


def test_run_once_counts_from_zero():
    g = build_input("is-dag", Star(4))
    g.first_root_node()
    rec, interp = run_once("is-dag", g, "star")
    assert rec.steps == g.steps and rec.rule_apps == interp.rule_apps
