import json

import pytest

from kslab.cli import main
from kslab.instances import grid_graph, path_graph
from kslab.metric_core import graph_to_json
from kslab.spanner_cover import SpannerSystem, shortest_path_tree
from kslab.tree_decomp import module_graph_decomposition


def run_cli(*argv):
    return main(list(argv))


def test_run_path_rounds_opt(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = run_cli(
        "run", "--family", "path-rounds", "--bits", "101", "--algo", "opt",
        "--out", str(out),
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["results"]["opt_cost"] == 12  # 4 per round


def test_run_gpc_ratio_one(tmp_path):
    out = tmp_path / "r.json"
    code = run_cli(
        "run", "--family", "random-ktree", "--size", "18", "--k", "2",
        "--n", "15", "--seed", "11", "--algo", "gpc", "--out", str(out),
    )
    assert code == 0
    report = json.loads(out.read_text())
    res = report["results"]
    assert res["online_cost"] == res["opt_cost"]
    assert res["ratio"] in (1, "1/1")
    assert res["bits_read"] <= res["bit_budget"]
    assert res["pass"] is True


def test_run_module_perm_unique(tmp_path):
    out = tmp_path / "r.json"
    code = run_cli(
        "run", "--family", "module", "--gamma", "2", "--rounds", "1",
        "--algo", "perm", "--out", str(out),
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["results"]["online_cost"] == 8
    assert report["extra"]["unique_opt"] is True


def test_run_spanner_grid(tmp_path):
    out = tmp_path / "r.json"
    code = run_cli(
        "run", "--family", "grid", "--size", "4", "--k", "2", "--n", "14",
        "--seed", "4", "--algo", "spanner", "--out", str(out),
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["results"]["pass"] is True
    assert report["results"]["bits_read"] <= report["results"]["bit_budget"]


def test_csv_format(tmp_path):
    out = tmp_path / "r.csv"
    run_cli(
        "run", "--family", "random-ktree", "--size", "15", "--k", "2",
        "--n", "10", "--seed", "3", "--algo", "gpc", "--format", "csv",
        "--out", str(out),
    )
    header, row, *_ = out.read_text().splitlines()
    assert header == (
        "instance_id,N,k,n,algo,online_cost,opt_cost,ratio,bits_read,"
        "bit_budget,pass"
    )
    assert row.split(",")[4] == "gpc"
    assert row.split(",")[-1] == "true"


def test_determinism_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = [
        "run", "--family", "grid", "--size", "4", "--k", "2", "--n", "12",
        "--seed", "21", "--algo", "spanner",
    ]
    run_cli(*args, "--out", str(a))
    run_cli(*args, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_bounds_table(capsys):
    code = run_cli("bounds", "--tau", "6/5,5/4", "--n", "1000000")
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "tau,bits,bits_per_request,bits_per_opt_cost"
    row65 = lines[1].split(",")
    # the published per-cost constant; the per-request theorem value differs
    assert abs(float(row65[3]) - 0.007262) < 1e-6
    row54 = lines[2].split(",")
    assert float(row54[1]) == 0.0


def test_bounds_alpha(capsys):
    code = run_cli("bounds", "--alpha", "8", "--n", "1000")
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "alpha,exact_bits,closed_form_bits"
    alpha, exact, closed = lines[1].split(",")
    assert abs(float(exact) - 573.1203) < 1e-3
    assert float(closed) == 890.0


def test_verify_decomposition_pass_and_fail(tmp_path, capsys):
    from kslab.adversary import module_graph

    g = module_graph(2)
    td = module_graph_decomposition(2)
    gp = tmp_path / "g.json"
    gp.write_text(graph_to_json(g))
    tdp = tmp_path / "td.json"
    tdp.write_text(json.dumps(td.to_json()))
    assert run_cli("verify", "--graph", str(gp), "--td", str(tdp)) == 0

    broken = td.to_json()
    broken["bags"][0] = broken["bags"][0][:-1]  # tamper with one bag
    tdp.write_text(json.dumps(broken))
    assert run_cli("verify", "--graph", str(gp), "--td", str(tdp)) == 1
    assert "witness" in capsys.readouterr().out


def test_verify_spanner_claim(tmp_path, capsys):
    g = grid_graph(4, 4)
    gp = tmp_path / "g.json"
    gp.write_text(graph_to_json(g))
    sysp = tmp_path / "s.json"
    bad = SpannerSystem(trees=(shortest_path_tree(g, 0),), q=1, r=0)
    sysp.write_text(json.dumps(bad.to_json()))
    assert run_cli("verify", "--graph", str(gp), "--spanners", str(sysp)) == 1
    ok = SpannerSystem(
        trees=(shortest_path_tree(g, 0), shortest_path_tree(g, 15)), q=3, r=0
    )
    sysp.write_text(json.dumps(ok.to_json()))
    assert run_cli("verify", "--graph", str(gp), "--spanners", str(sysp)) == 0
