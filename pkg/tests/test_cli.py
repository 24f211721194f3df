import csv
import json

import numpy as np
import pytest

from lag2ch.cli import fig3_coefficients, main


def scenario(tmp_path, **over):
    doc = {"grid": {"n": 300, "dxi": 0.1, "xi0": -13.0},
           "scenario": {"type": "peakon_pair", "params": {"p": 1.0, "x1": -2.5, "x2": 2.5}, "rho_inf": 0.0},
           "sim": {"dt": 0.02, "t_end": 0.1, "mode": "resolve", "output_every": 1},
           "outputs": {"dir": str(tmp_path / "out")}}
    for k, v in over.items():
        doc[k] = v
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    return p


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", str(scenario(tmp_path))]) == 0
    out = tmp_path / "out"
    rows = list(csv.reader(open(out / "diag.csv")))
    assert rows[0] == ["t", "H_inf", "I", "minDy", "maxh", "residB"] and len(rows) == 7
    assert len(rows[1][1].replace("-", "").replace(".", "").split("e")[0]) >= 16  # 17 significant digits
    assert next(csv.reader(open(out / "char.csv"))) == ["t", "j", "y"]
    assert next(csv.reader(open(out / "field.csv"))) == ["t", "x", "u", "rho", "edens"]
    assert next(csv.reader(open(out / "atoms.csv"))) == ["t", "x", "mass"]


def test_run_missing_and_invalid(tmp_path, capsys):
    assert main(["run", str(tmp_path / "none.json")]) == 1
    assert "scenario not found" in capsys.readouterr().err
    p = scenario(tmp_path, sim={"dt": 0.1, "t_end": 1.0, "bogus": 1})
    assert main(["run", str(p)]) == 1
    assert "sim" in capsys.readouterr().err
    p = scenario(tmp_path, scenario={"type": "peakon_pair", "params": {"p": 1.0, "x1": 0.0}})
    assert main(["run", str(p)]) == 1
    assert "scenario.params" in capsys.readouterr().err


def test_run_abort_exit_code(tmp_path, capsys):
    p = scenario(tmp_path, sim={"dt": 1.0, "t_end": 5.0, "mode": "resolve", "max_halvings": 0})
    assert main(["run", str(p)]) == 2
    assert "step-halving exhausted" in capsys.readouterr().err


def test_greens_dump(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert main(["greens", "--coeff", "fig3", "-o", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["i", "j", "g", "k", "gamma", "kappa"] and len(rows) == 41 * 41 + 1
    assert {int(rows[1][0]), int(rows[-1][0])} == {-20, 20}
    assert "identity residuals" in capsys.readouterr().out
    assert main(["greens", "--coeff", "table:1,-1,2", "-o", str(out)]) == 1
    assert main(["greens", "--coeff", "constant:2", "--n", "10", "-o", str(out)]) == 0


def test_fig3_profile():
    j, a = fig3_coefficients(0.2, 41)
    at = lambda k: a[j == k][0]
    assert at(0) == 2.0 and at(4) == 0.0 and at(6) == 4.0 and at(-10) == 1.0 and at(-5) == 1.0


def test_converge(tmp_path, capsys):
    p = scenario(tmp_path, grid={"n": 70, "dxi": 0.4, "xi0": -14.0},
                 scenario={"type": "smooth", "params": {"amplitude": 1.0, "rho_amplitude": 0.5}, "rho_inf": 1.0},
                 sim={"dt": 0.02, "t_end": 0.5, "mode": "resolve"})
    assert main(["converge", str(p), "--levels", "2"]) == 1
    assert "need ≥ 3 levels" in capsys.readouterr().err
    assert main(["converge", str(p), "--levels", "3"]) == 0
    rep = json.loads((tmp_path / "out" / "converge.json").read_text())
    assert rep["monotone"] and len(rep["distances"]) == 2


def test_greens_constant_matches_closed_form(tmp_path):
    from lag2ch.greens import constant_greens
    out = tmp_path / "c.csv"
    assert main(["greens", "--coeff", "constant:1", "--dxi", "1", "--n", "30", "-o", str(out)]) == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    i, j, g = rows[:, 0], rows[:, 1], rows[:, 2]
    assert np.abs(g - constant_greens(1.0, i - j)).max() < 1e-10


def test_greens_fig3_plateau(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["greens", "--coeff", "fig3", "--dxi", "0.2", "--n", "41", "-o", str(out)]) == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    for src in (0, 4):
        sel = rows[(rows[:, 0] == src) & np.isin(rows[:, 1], [3, 4, 5, 6])]
        assert np.ptp(sel[:, 2]) < 1e-14  # g flat across the zero cells 0.6, 0.8, 1.0
    assert main(["greens", "--coeff", "table:1,1,-0.1,1", "-o", str(out)]) == 1


def test_run_is_deterministic(tmp_path):
    p = scenario(tmp_path)
    assert main(["run", str(p)]) == 0
    first = {f: (tmp_path / "out" / f).read_bytes() for f in ("diag.csv", "char.csv", "field.csv")}
    assert main(["run", str(p)]) == 0
    assert all((tmp_path / "out" / f).read_bytes() == b for f, b in first.items())


def test_converge_levels_one(tmp_path, capsys):
    assert main(["converge", str(scenario(tmp_path)), "--levels", "1"]) == 1


@pytest.mark.parametrize("name", ["peakon_pair", "peakon_collision", "peakon_density", "gaussian", "atom"])
def test_shipped_scenarios_build(name):
    from pathlib import Path
    from lag2ch.cli import build_config, build_grid, build_state, load_scenario
    doc = load_scenario(Path(__file__).parents[1] / "scenarios" / f"{name}.json")
    st = build_state(doc, build_grid(doc))
    build_config(doc)
    assert st.Dy.min() >= -1e-12  # roundoff from storing y - xi
