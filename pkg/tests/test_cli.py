"""CLI behavior: commands, formats, exit codes, determinism, golden files."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from browniangame.cli import main

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = Path(__file__).resolve().parent / "golden"

TWO_PLAYER = "specs/two_player.json"
TIE = "specs/symmetric_tie.json"
ORG = "specs/org_demo.json"


@pytest.fixture(autouse=True)
def _repo_root_cwd(monkeypatch):
    monkeypatch.chdir(ROOT)


def run_cli(args, tmp_path, name="out.json"):
    out = tmp_path / name
    rc = main([*args, "--out", str(out)])
    return rc, out.read_text() if out.exists() else None


def test_solve_reports_unique_equilibrium(tmp_path):
    rc, text = run_cli(["solve", TWO_PLAYER], tmp_path)
    assert rc == 0
    doc = json.loads(text)
    assert doc["command"] == "solve"
    assert doc["result"]["unique"] is True
    np.testing.assert_allclose(doc["result"]["points"][0]["profile"],
                               [0.4625, 0.6875], atol=1e-9)
    np.testing.assert_allclose(doc["result"]["points"][0]["expected_outcomes"],
                               [3.075, 2.625], atol=1e-9)
    assert doc["result"]["points"][0]["followership"] == [[0.0, 1.0], [0.0, 0.0]]
    assert len(doc["input_sha256"]) == 64


def test_solve_reports_tie_segment(tmp_path):
    rc, text = run_cli(["solve", TIE], tmp_path)
    doc = json.loads(text)
    assert rc == 0
    seg = doc["result"]["segments"][0]
    np.testing.assert_allclose(seg["lower"], [1.55, 1.55], atol=1e-9)
    np.testing.assert_allclose(seg["upper"], [1.85, 1.85], atol=1e-9)
    assert doc["result"]["tie_interval"]["outcome_upper"] == pytest.approx(0.9)


def test_verify_not_equilibrium_text(tmp_path, capsys):
    rc = main(["verify", TWO_PLAYER, "--profile", "0,0", "--format", "text"])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "not an equilibrium" in captured
    assert "corner condition" in captured


def test_verify_equilibrium_json(tmp_path):
    rc, text = run_cli(["verify", TWO_PLAYER, "--profile", "0.4625,0.6875"], tmp_path)
    doc = json.loads(text)
    assert doc["result"]["is_equilibrium"] is True
    assert doc["result"]["followership"] == [[0.0, 1.0], [0.0, 0.0]]


def test_best_response_with_oracle(tmp_path):
    rc, text = run_cli(
        ["best-response", TWO_PLAYER, "--player", "0", "--profile", "0,0.6875", "--oracle"],
        tmp_path,
    )
    doc = json.loads(text)
    assert doc["result"]["policy"] == pytest.approx(0.4625, abs=1e-9)
    assert doc["result"]["grid_oracle_policy"] == pytest.approx(0.4625, abs=1.01e-3)


def test_payoff_breakdown_and_mc(tmp_path):
    args = ["payoff", TWO_PLAYER, "--profile", "0.4625,0.6875", "--player", "0",
            "--mc", "--samples", "20000", "--seed", "11"]
    rc, text = run_cli(args, tmp_path)
    doc = json.loads(text)
    entry = doc["result"]["players"][0]
    assert entry["utility"] == pytest.approx(-0.593333333333, abs=1e-9)
    assert entry["kinks"][0]["location"] == pytest.approx(0.6875)
    assert abs(entry["mc"]["mean"] - entry["utility"]) <= 3 * entry["mc"]["stderr"]
    rc2, text2 = run_cli(args, tmp_path, name="again.json")
    assert text2 == text  # seeded Monte Carlo reproduces bytes


def test_potential_command(tmp_path):
    rc, text = run_cli(["potential", TWO_PLAYER], tmp_path)
    doc = json.loads(text)
    np.testing.assert_allclose(doc["result"]["maximizer"], [0.4625, 0.6875], atol=1e-9)
    assert doc["result"]["is_equilibrium"] is True
    rc, text = run_cli(["potential", TWO_PLAYER, "--profile", "0,0"], tmp_path)
    doc = json.loads(text)
    assert doc["result"]["value"] == pytest.approx(4 / 3, abs=1e-12)


def test_benchmarks_command(tmp_path):
    rc, text = run_cli(["benchmarks", TWO_PLAYER], tmp_path)
    doc = json.loads(text)
    np.testing.assert_allclose(doc["result"]["gamma0"]["expected_outcomes"],
                               [2.625, 1.875], atol=1e-9)
    np.testing.assert_allclose(doc["result"]["gamma1"]["expected_outcomes"],
                               [3.525, 2.775], atol=1e-9)
    assert doc["result"]["distance_star"] == pytest.approx(0.45, abs=1e-9)
    assert doc["result"]["conformity"]["identity_holds"] is True


def test_org_threshold_command(tmp_path):
    rc, text = run_cli(["org", "threshold", ORG], tmp_path)
    doc = json.loads(text)
    res = doc["result"]
    assert res["threshold_k"] == pytest.approx(6.0, abs=1e-9)
    assert res["threshold_sigma2"] == pytest.approx(8.4, abs=1e-9)
    assert res["onset_sigma2"] == pytest.approx(2.1, abs=1e-9)
    assert res["bisection_k"] == pytest.approx(6.0, abs=1e-5)
    assert res["is_implementable"] is True
    np.testing.assert_allclose(res["p_opt"], [5.0, 5.0], atol=1e-9)


def test_org_sweep_csv(tmp_path):
    rc, text = run_cli(
        ["org", "sweep", ORG, "--sigma2", "0:9.6:0.1"], tmp_path, name="sweep.csv"
    )
    assert rc == 0
    lines = text.strip().split("\n")
    assert lines[0] == "sigma2,k,p1_star,p2_star,L,U,r1_star,r2_star,r_star,branch,interior"
    assert len(lines) == 98
    rows = [line.split(",") for line in lines[1:]]
    branches = [r[9] for r in rows]
    sigmas = [float(r[0]) for r in rows]
    assert sigmas[branches.index("multiple")] == pytest.approx(2.1)
    assert sigmas[branches.index("implementable")] == pytest.approx(8.4)
    # empty cells outside a branch's validity range
    assert rows[30][2] == ""  # p1_star gone in the multiple branch
    assert rows[0][4] == ""  # L absent in the unique branch


def test_round_trip_byte_identical(tmp_path):
    _, a = run_cli(["solve", TWO_PLAYER], tmp_path, name="a.json")
    _, b = run_cli(["solve", TWO_PLAYER], tmp_path, name="b.json")
    assert a == b
    _, c = run_cli(["org", "sweep", ORG, "--sigma2", "0:9.6:0.4"], tmp_path, name="c.csv")
    _, d = run_cli(["org", "sweep", ORG, "--sigma2", "0:9.6:0.4"], tmp_path, name="d.csv")
    assert c == d


def test_exit_codes(tmp_path, capsys):
    assert main(["solve", "does_not_exist.json"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "game", "n": 2, "G": [0, 0.1, 0.1, 0],
                               "d": [1, 1], "mu": -1, "sigma2": 1, "p0": 0,
                               "X0": 4, "bogus": 1}))
    assert main(["solve", str(bad)]) == 2
    wrong_kind = tmp_path / "wrong.json"
    wrong_kind.write_text(Path(ORG).read_text())
    assert main(["solve", str(wrong_kind)]) == 2
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"kind": "game", "n": 2, "G": [0, 1.0, 1.0, 0],
                                   "d": [1, 1], "mu": -1, "sigma2": 1, "p0": 0, "X0": 4}))
    assert main(["solve", str(invalid)]) == 2
    capsys.readouterr()


def test_csv_format_rejected_for_non_tabular(capsys):
    assert main(["solve", TWO_PLAYER, "--format", "csv"]) == 2
    assert "no CSV representation" in capsys.readouterr().err


def test_solver_failures_map_to_exit_3(tmp_path, capsys, monkeypatch):
    import browniangame.cli as cli
    from browniangame.errors import SolverError

    def boom(*args, **kwargs):
        raise SolverError("synthetic failure")

    monkeypatch.setattr(cli, "enumerate_equilibria", boom)
    assert main(["solve", TWO_PLAYER]) == 3
    assert "solver error" in capsys.readouterr().err


def test_solve_large_game_uses_iteration(tmp_path):
    n = 6
    G = np.full((n, n), 0.4 / (n - 1))
    np.fill_diagonal(G, 0.0)
    spec = tmp_path / "big.json"
    spec.write_text(json.dumps({
        "kind": "game", "n": n, "G": G.ravel().tolist(),
        "d": list(range(n, 0, -1)), "mu": -1.0, "sigma2": 1.0,
        "p0": 0.0, "X0": 20.0,
    }))
    out = tmp_path / "big_out.json"
    assert main(["solve", str(spec), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["method"] == "iteration"
    assert doc["result"]["unique"] is True


def test_plot_files_created(tmp_path):
    png = tmp_path / "sweep.png"
    rc, _ = run_cli(["org", "sweep", ORG, "--sigma2", "0:9.6:0.4",
                     "--plot", str(png)], tmp_path, name="sweep.csv")
    assert rc == 0 and png.stat().st_size > 1000
    png2 = tmp_path / "map.png"
    rc, _ = run_cli(["solve", TIE, "--plot", str(png2)], tmp_path, name="solve.json")
    assert rc == 0 and png2.stat().st_size > 1000
    png3 = tmp_path / "payoff.png"
    rc, _ = run_cli(["payoff", TWO_PLAYER, "--profile", "0.4625,0.6875",
                     "--plot", str(png3)], tmp_path, name="payoff.json")
    assert rc == 0 and png3.stat().st_size > 1000


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "browniangame", "--version"],
        capture_output=True, text=True, cwd=ROOT,
    )
    assert res.returncode == 0
    assert "browniangame" in res.stdout


GOLDEN_CASES = [
    ("solve_two_player.json", ["solve", TWO_PLAYER]),
    ("solve_symmetric_tie.json", ["solve", TIE]),
    ("verify_origin.json", ["verify", TWO_PLAYER, "--profile", "0,0"]),
    ("verify_origin.txt", ["verify", TWO_PLAYER, "--profile", "0,0", "--format", "text"]),
    ("benchmarks_two_player.json", ["benchmarks", TWO_PLAYER]),
    ("payoff_equilibrium.json", ["payoff", TWO_PLAYER, "--profile", "0.4625,0.6875"]),
    ("best_response.json", ["best-response", TWO_PLAYER, "--player", "0",
                            "--profile", "0,0.6875"]),
    ("potential_two_player.json", ["potential", TWO_PLAYER]),
    ("org_threshold.json", ["org", "threshold", ORG]),
    ("org_sweep.csv", ["org", "sweep", ORG, "--sigma2", "0:9.6:0.4"]),
]


@pytest.mark.parametrize("name,args", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_golden_reports(name, args, tmp_path):
    """Report formats are pinned byte-for-byte against committed goldens."""
    rc, text = run_cli(args, tmp_path, name=name)
    assert rc == 0
    assert text == (GOLDEN / name).read_text()
