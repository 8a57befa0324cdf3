import csv
import json
import math

import numpy as np
import pytest

from riqubit.cli import SWEEP_COLUMNS, main, run
from riqubit.config import Axis, ExperimentConfig, parse_initial_state, resolve_state
from riqubit.errors import ContractViolation
from riqubit.model import QubitState, RIParams
from riqubit.presets import PRESETS, preset


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    cfg.save(path)
    return path


@pytest.fixture
def small_sweep():
    return ExperimentConfig(
        kind="sweep",
        params=RIParams(omega_s=1.0, omega_a=2.0, j_xx=2.0, j_yy=1.0, beta=1.0, tau=0.01),
        initial_state=QubitState(0.866),
        sweep_axes=(Axis("beta", values=(0.1, 1.0, 10.0)), Axis("epsilon", min=1e-3, max=1e-1, points=4,
                                                                   scale="log")),
    )


# --- config ----------------------------------------------------------------


@pytest.mark.parametrize("pid", sorted(PRESETS))
def test_preset_round_trips_through_json(tmp_path, pid):
    cfg = preset(pid)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    path = _write_config(tmp_path, cfg)
    assert ExperimentConfig.load(path) == cfg


def test_preset_values():
    fig6 = preset("fig6")
    assert (fig6.params.j_xx, fig6.params.j_yy, fig6.params.j_zz) == (2.0, 1.0, 4.0)
    assert (fig6.params.omega_a, fig6.params.omega_s, fig6.params.tau, fig6.params.beta) == (2.0, 1.0, 0.01, 1.0)
    assert fig6.initial_state == QubitState(0.627, 0.459 - 0.152j)
    fig5 = preset("fig5")
    assert fig5.initial_state == QubitState(0.866)
    assert dict((a.name, a.grid) for a in fig5.sweep_axes)["beta"] == (0.001, 0.1, 0.5, 1.0, 10.0)
    fig7 = preset("fig7")
    assert fig7.params.omega_a == fig7.params.omega_s == 2.0
    assert fig7.params.tau == 100.0 and fig7.protocol["j_max"] == 0.01
    fig3 = preset("fig3")
    assert fig3.params.p_a == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(ContractViolation):
        preset("fig12")


def test_every_preset_documents_itself():
    for cfg in PRESETS.values():
        assert cfg.notes


def test_axis_validation_names_the_field():
    with pytest.raises(ContractViolation, match="omega_z"):
        Axis("omega_z", min=0, max=1, points=3)
    with pytest.raises(ContractViolation, match="2 points"):
        Axis("j_xx", min=0, max=1, points=1)


def test_initial_state_forms():
    assert parse_initial_state("random(7)") == "random(7)"
    assert parse_initial_state({"p": 0.3, "c_re": 0.1, "c_im": -0.2}) == QubitState(0.3, 0.1 - 0.2j)
    a, b = resolve_state("random(7)"), resolve_state("random(7)")
    assert a == b and 0 <= a.p <= 1 and abs(a.c) ** 2 <= a.p * (1 - a.p)
    with pytest.raises(ContractViolation):
        parse_initial_state("random(x)")


def test_grid_points_are_row_major(small_sweep):
    pts = small_sweep.grid_points()
    assert len(pts) == 12
    assert [p["beta"] for p in pts[:4]] == [0.1] * 4
    assert pts[1]["epsilon"] == pytest.approx(math.pow(10, -3 + 2 / 3))


# --- exit codes -------------------------------------------------------------


def test_invalid_axis_in_file_exits_2(tmp_path, capsys):
    data = preset("fig3").to_dict()
    data["sweep_axes"][0]["name"] = "j_xy"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert main(["steady", "--config", str(path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and "j_xy" in err["message"]


@pytest.mark.parametrize("argv", [["bogus"], ["preset", "fig99"], ["steady"], ["preset", "fig3", "--metric", "kl"]])
def test_usage_errors_are_json(argv, capsys):
    assert main(argv) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ContractViolation"


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["steady", "--config", str(tmp_path / "nope.json")]) == 2
    assert "cannot read config" in json.loads(capsys.readouterr().err)["message"]


def test_degenerate_exits_4(tmp_path, capsys):
    cfg = ExperimentConfig(kind="simulate", params=RIParams(omega_s=1.0, omega_a=1.0, j_xx=1.0, j_yy=1.0,
                                                            tau=math.pi), n_steps=10)
    assert main(["simulate", "--config", str(_write_config(tmp_path, cfg))]) == 4
    err = json.loads(capsys.readouterr().err)
    assert "2*pi" in err["message"] and err["eta"] == pytest.approx(1.0)


def test_non_convergence_exits_3_with_partial_output(tmp_path, capsys):
    cfg = ExperimentConfig(kind="resources", params=RIParams(omega_s=1.0, omega_a=2.0, j_xx=2.0, j_yy=1.0,
                                                             tau=0.01), initial_state=QubitState(0.1),
                           epsilon=1e-6, max_steps=50)
    out = tmp_path / "res.json"
    assert main(["resources", "--config", str(_write_config(tmp_path, cfg)), "--out", str(out)]) == 3
    partial = json.loads(out.read_text())
    assert partial["status"] == "no_convergence" and partial["n_star"] is None
    assert partial["achieved_distance"] > 1e-6
    err = json.loads(capsys.readouterr().err)
    assert err["n_steps"] == 50


# --- pipelines --------------------------------------------------------------


def test_steady_surface_diagonals(tmp_path):
    out = tmp_path / "fig3.csv"
    assert main(["preset", "fig3", "--out", str(out)]) == 0
    rows = _read_csv(out)
    header = rows[0]
    assert header == ["j_xx", "j_yy", "eta", "p_inf", "p_a", "beta_ancilla", "beta_s_inf", "degenerate"]
    checked = 0
    for row in rows[1:]:
        jx, jy = float(row[0]), float(row[1])
        if row[7] == "1":
            assert jx == jy == 0.0
            continue
        p = float(row[3])
        if abs(jx - jy) < 1e-12:
            assert abs(p - 0.8) < 1e-12
            assert float(row[6]) == pytest.approx(float(row[5]), abs=1e-10)
            checked += 1
        elif abs(jx + jy) < 1e-12:
            assert abs(p - 0.2) < 1e-6
            assert float(row[6]) == pytest.approx(-float(row[5]), abs=1e-4)  # inverted: negative temperature
            checked += 1
    assert checked == 120


def test_simulate_writes_csv_and_summary(tmp_path, capsys):
    cfg = preset("fig4").replace(n_steps=200, stride=50)
    out = tmp_path / "fig4.csv"
    summary = run(cfg, out)
    rows = _read_csv(out)
    assert rows[0][:4] == ["j_zz", "beta", "n", "p"]
    assert len(rows) == 1 + 4 * 5
    assert [r[2] for r in rows[1:6]] == ["0", "50", "100", "150", "200"]
    saved = json.loads((tmp_path / "fig4.summary.json").read_text())
    assert len(saved["runs"]) == 4
    assert saved["runs"][0]["final_p"] == summary["runs"][0]["final_p"]
    assert summary["line"].startswith("simulate: 4 run(s)")


def test_seed_and_set_overrides(tmp_path, capsys):
    path = tmp_path / "eff.json"
    assert main(["preset", "fig7", "--seed", "5", "--set", "beta=2", "--save-config", str(path),
                 "--out", str(tmp_path / "t.csv")]) == 0
    cfg = ExperimentConfig.load(path)
    assert cfg.initial_state == "random(5)"
    assert cfg.protocol["seed"] == 5 and cfg.params.beta == 2.0
    assert main(["preset", "fig2", "--set", "j_zx=1", "--dump"]) == 2


def test_dump_prints_config(capsys):
    assert main(["preset", "fig6", "--dump"]) == 0
    assert ExperimentConfig.from_json(capsys.readouterr().out) == preset("fig6")


def test_sweep_columns_and_parallel_order(tmp_path, small_sweep):
    serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
    run(small_sweep, serial, jobs=1)
    run(small_sweep, parallel, jobs=3)
    a, b = _read_csv(serial), _read_csv(parallel)
    assert a == b
    assert a[0] == list(SWEEP_COLUMNS)
    assert all(r[-1] == "ok" for r in a[1:])


def test_sweep_marks_degenerate_points_without_failing(tmp_path):
    cfg = preset("fig10").replace(sweep_axes=(Axis("j_xx", values=(0.0, 1.0)), Axis("j_yy", values=(0.0, 1.0))))
    out = tmp_path / "w.csv"
    summary = run(cfg, out)
    assert summary["counts"] == {"ok": 3, "degenerate": 1, "no_convergence": 0}
    rows = _read_csv(out)
    assert rows[1][rows[0].index("status")] == "degenerate"


def test_thermalize_outputs(tmp_path):
    out = tmp_path / "t.csv"
    summary = run(preset("fig7"), out)
    assert summary["seeds_run"] == 100
    assert summary["success_fraction"] >= 0.95
    assert summary["rng"] == "numpy.random.PCG64"
    rows = _read_csv(out)
    assert rows[0][-3:] == ["j_xx", "j_yy", "j_zz"]
    assert len(rows) == 22
    again = json.loads((tmp_path / "t.summary.json").read_text())
    assert again["hits"] == summary["hits"]


def test_resources_bound_route(tmp_path):
    cfg = ExperimentConfig(kind="resources", params=RIParams(omega_s=1.0, omega_a=1.0, j_xx=2.0, j_yy=1.0,
                                                             beta=math.log(4.0), tau=0.01),
                           initial_state=QubitState(0.866), epsilon=0.05, route="bound")
    result = run(cfg, tmp_path / "r.json")
    numeric = run(cfg.replace(route="numeric"))
    assert result["n_star"] == numeric["n_star"] == 925
    assert result["w_inf"] + result["q_inf"] == pytest.approx(0, abs=1e-15)
    assert np.isclose(result["total_work"], numeric["total_work"], atol=1e-12)
