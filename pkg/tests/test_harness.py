import io
import json
import math
from dataclasses import replace

import pytest
import yaml

from overlay_crn.harness.cli import main
from overlay_crn.harness.output import emit_csv, emit_plotdata, read_csv
from overlay_crn.harness.presets import preset, preset_names
from overlay_crn.harness.runner import ResultRow, run_scenario
from overlay_crn.harness.scenario import (
    Axis,
    ScenarioError,
    dump_scenario,
    load_scenario,
    scenario_from_dict,
)
from overlay_crn.linkmodel import db_to_linear
from overlay_crn.simulate import McConfig

# caption constants transcribed directly from the figure captions
CAPTION_TABLE = {
    "fig3": dict(rho=0.6, delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1, k=1, R_thp=0.5,
                 L_S=2, eta=0.8, A_f=0.8, phi=1, nu_s=0, nu_p=0),
    "fig4": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1, k=1, R_ths=1,
                 eta=0.8, A_f=0.2, phi=1, nu_p=0.2, nu_s=0.2, L_R=2),
    "fig5": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, kappa=0, mu=1, k=1, R_ths=1, eta=0.8, A_f=0.2,
                 nu_p=0.2, nu_s=0.2, L_R=2, L_S=1, P_T_dB=2, n_p=1),
    "fig6": dict(delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1, k=1, R_ths=0.5, eta=0.8,
                 A_f=0.9, L_R=2, L_S=1, P_T_dB=5, phi=0.5),
    "fig7": dict(delta=100, alpha=2, lambda_p=1, n_p=1, n_s=1, kappa=0, mu=1, nu_p=0, k=1, R_thp=0.2,
                 eta=0.7, P_T_dB=5, phi=100),
    "fig8": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, n_p=1, n_s=1, kappa=0, mu=1, k=1, eta=0.8,
                 A_f=0.5, nu_p=0.1, nu_s=0.1, L_R=2, L_S=1, phi=1),
    "fig9": dict(delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=0, mu=1, k=1, eta=0.8, nu_p=0,
                 nu_s=0, L_R=2, L_S=1, R_pt=0.4, phi=1),
    "surface_k_nu_s": dict(rho=0.2, delta=1, alpha=2, lambda_p=0.5, n_p=2, n_s=2, kappa=1, mu=1, R_ths=1,
                           eta=0.8, A_f=0.1, nu_p=0.2, L_R=2, L_S=3, P_T_dB=5, phi=1),
}

SWEPT = {"fig3": "P_T_dB", "fig4": "P_T_dB", "fig5": "phi", "fig6": "rho", "fig7": "A_f", "fig8": "P_T_dB",
         "fig9": "P_T_dB", "surface_k_nu_s": "nu_s"}


def _write(tmp_path, doc, name="s.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc) if isinstance(doc, dict) else doc, encoding="utf-8")
    return path


def test_minimal_file_loads(tmp_path):
    s = load_scenario(_write(tmp_path, "schema: 1\nparams:\n  P_T_dB: 10\n"))
    p = s.system_params(next(s.points())[2])
    assert p.P_T == pytest.approx(10.0)
    assert p.T == 1.0 and p.N_0 == 1.0 and p.geometry.dimension == 2
    assert s.engines == ("mc",) and len(list(s.points())) == 1


def test_out_of_range_value_names_field(tmp_path):
    with pytest.raises(ScenarioError) as info:
        load_scenario(_write(tmp_path, {"schema": 1, "params": {"P_T_dB": 10, "rho": 1.2}}))
    assert info.value.field == "params.rho"


def test_unknown_field_rejected(tmp_path):
    with pytest.raises(ScenarioError) as info:
        load_scenario(_write(tmp_path, {"schema": 1, "params": {"P_T_dB": 10, "rhoo": 0.5}}))
    assert info.value.field == "params.rhoo"
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict({"schema": 1, "params": {"P_T_dB": 1}, "colour": "red"})
    assert info.value.field == "colour"


def test_bare_power_is_unit_ambiguous():
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict({"schema": 1, "params": {"P_T": 10}})
    assert info.value.field == "params.P_T" and "ambiguous" in str(info.value)


def test_sweep_values_validated():
    doc = {"schema": 1, "params": {"P_T_dB": 1}, "sweep": {"variable": "rho", "values": [0.2, 1.5]}}
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(doc)
    assert info.value.field == "params.rho"


def test_schema_version_required():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"params": {"P_T_dB": 1}})


def test_conflicting_thresholds_rejected():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"schema": 1, "params": {"P_T_dB": 1, "R_th": 1, "R_thp": 0.5}})


@pytest.mark.parametrize("name", sorted(CAPTION_TABLE))
def test_preset_carries_caption_values(name):
    s = preset(name)
    for key, value in CAPTION_TABLE[name].items():
        assert s.params[key] == value, key
    assert s.sweep.variable == SWEPT[name]
    p = s.system_params(next(s.points())[2])
    assert p.geometry.delta == CAPTION_TABLE[name]["delta"]
    if "rho" in CAPTION_TABLE[name]:
        assert p.rho == CAPTION_TABLE[name]["rho"]
    if "P_T_dB" in CAPTION_TABLE[name]:
        assert p.P_T == pytest.approx(db_to_linear(CAPTION_TABLE[name]["P_T_dB"]))


def test_preset_list_complete():
    assert sorted(preset_names()) == sorted(CAPTION_TABLE)


def test_dump_round_trip(tmp_path):
    for name in preset_names():
        s = preset(name, trials=1234, seed=9)
        again = load_scenario(_write(tmp_path, dump_scenario(s), f"{name}.yaml"))
        assert again == s


def _mc_scenario(trials=10_000, values=(0.0, 10.0, 20.0)):
    return scenario_from_dict({
        "schema": 1, "name": "small", "params": {"P_T_dB": 0, "rho": 0.6, "L_R": 2, "n_p": 1, "n_s": 1},
        "sweep": {"variable": "P_T_dB", "values": list(values)}, "mc": {"trials": trials, "seed": 4},
    })


def test_mc_run_gives_one_row_per_point_with_errors_bars():
    rows = run_scenario(_mc_scenario())
    assert [r.sweep for r in rows] == [0.0, 10.0, 20.0]
    for r in rows:
        assert r.error == ""
        assert 0 <= r.values["op_p_mc"] <= 1 and r.values["se_p_mc"] >= 0
        assert "op_p_analytic" not in r.values


def test_cross_engine_row_agrees():
    s = replace(_mc_scenario(trials=200_000, values=(10.0,)), engines=("mc", "analytic"))
    (row,) = run_scenario(s)
    v = row.values
    assert abs(v["op_p_mc"] - v["op_p_analytic"]) < max(3 * v["se_p_mc"], 0.01)
    assert abs(v["op_s_mc"] - v["op_s_analytic"]) < max(3 * v["se_s_mc"], 0.01)


def test_engine_errors_recorded_per_row():
    s = scenario_from_dict({
        "schema": 1, "params": {"P_T_dB": 5, "n_s": 2, "L_S": 2, "delta": 0.7, "A_f": 0.2},
        "sweep": {"variable": "P_T_dB", "values": [0, 5]}, "engines": ["mc", "analytic"],
        "mc": {"trials": 2000},
    })
    rows = run_scenario(s)
    assert len(rows) == 2
    for r in rows:
        assert "op_s_analytic" in r.error and "op_p_analytic" in r.values and "op_p_mc" in r.values


def test_fig9_preset_emits_all_variants():
    s = preset("fig9")
    s = replace(s, sweep=Axis("P_T_dB", (10.0,)))
    (row,) = run_scenario(s)
    for key in ("rs_joint", "rs_rho_only", "rs_af_only", "rs_fixed", "rho_joint", "af_joint"):
        assert math.isfinite(row.values[key])
    assert row.values["rs_joint"] >= max(row.values["rs_rho_only"], row.values["rs_af_only"]) - 1e-6
    assert row.values["feasible_joint"] == 1


def test_fig3_pu_outage_column_decreases():
    s = preset("fig3", trials=20_000)
    s = replace(s, series=Axis("L_R", (2,)), engines=("analytic",))
    op = [r.values["op_p_analytic"] for r in run_scenario(s)]
    assert all(b <= a for a, b in zip(op, op[1:]))


def test_empty_rows_give_header_only(tmp_path):
    path = emit_csv([], tmp_path / "e.csv")
    assert path.read_text().splitlines() == ["sweep,error"]


def test_csv_round_trip(tmp_path):
    rows = [ResultRow(i, "P_T_dB", 2.5 * i, "L_R", 2, {"op": 1 / (3 + i), "se": math.pi * 1e-5, "n": i})
            for i in range(4)]
    path = emit_csv(rows, tmp_path / "r.csv")
    back = read_csv(path)
    assert [list(b) for b in back][0] == ["L_R", "P_T_dB", "op", "se", "n", "error"]
    for r, b in zip(rows, back):
        assert b["P_T_dB"] == pytest.approx(r.sweep, rel=1e-12)
        for k, v in r.values.items():
            assert float(b[k]) == pytest.approx(v, rel=1e-12)


def test_plotdata_files(tmp_path):
    rows = [ResultRow(i, "P_T_dB", float(i), "L_R", L, {"op": 0.1 * i}) for i, L in enumerate((1, 1, 2))]
    paths = emit_plotdata(rows, tmp_path, stem="fig")
    assert sorted(p.name for p in paths) == ["fig_L_R-1.dat", "fig_L_R-2.dat"]
    lines = (tmp_path / "fig_L_R-1.dat").read_text().splitlines()
    assert lines[0] == "# P_T_dB op" and len(lines) == 3


def _csv_bytes(s, workers):
    buf = io.StringIO()
    emit_csv(run_scenario(s, workers=workers), buf)
    return buf.getvalue().encode()


def test_csv_bytes_identical_across_runs_and_workers():
    s = replace(_mc_scenario(trials=30_000, values=(0.0, 5.0, 10.0, 15.0)),
                series=Axis("L_R", (1, 2)), engines=("mc", "analytic"))
    first = _csv_bytes(s, 1)
    assert _csv_bytes(s, 1) == first
    assert _csv_bytes(s, 3) == first
    s_parallel_mc = replace(s, mc=replace(s.mc, workers=2, batch=8192))
    assert _csv_bytes(s_parallel_mc, 2) == first


def test_cli_preset_list(capsys):
    assert main(["preset", "--list"]) == 0
    assert "fig9" in capsys.readouterr().out.split()


def test_cli_preset_stdout(capsys):
    assert main(["preset", "fig9"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("P_T_dB,rho_joint") and len(lines) == 6


def test_cli_run_writes_outputs(tmp_path):
    path = _write(tmp_path, yaml.safe_load(dump_scenario(_mc_scenario(trials=3000))))
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out), "--trials", "2000", "--seed", "3", "--engine", "both"]) == 0
    rows = read_csv(out / "small.csv")
    assert len(rows) == 3 and "op_p_analytic" in rows[0]
    assert (out / "plotdata" / "small.dat").exists()


def test_cli_scenario_error_is_machine_readable(tmp_path, capsys):
    path = _write(tmp_path, {"schema": 1, "params": {"P_T_dB": 1, "rho": 1.2}})
    assert main(["run", str(path)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["field"] == "params.rho"


def test_cli_strict_reports_failed_rows(tmp_path, capsys):
    path = _write(tmp_path, {"schema": 1, "params": {"P_T_dB": 5, "n_s": 2, "L_S": 2, "delta": 0.7, "A_f": 0.2},
                             "engines": ["analytic"]})
    assert main(["run", str(path)]) == 0
    capsys.readouterr()
    assert main(["run", str(path), "--strict"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert len(err["failed_rows"]) == 1


def test_cli_optimize_verb(tmp_path, capsys):
    path = _write(tmp_path, {"schema": 1, "params": {**CAPTION_TABLE["fig9"], "P_T_dB": 10, "R_th": 1,
                                                     "rho": 0.5, "A_f": 0.5}})
    assert main(["optimize", str(path)]) == 0
    assert "rs_joint" in capsys.readouterr().out


def test_mc_config_from_file_overridden_by_flags(tmp_path):
    path = _write(tmp_path, yaml.safe_load(dump_scenario(_mc_scenario(trials=1000, values=(5.0,)))))
    out = tmp_path / "o"
    main(["run", str(path), "--out", str(out), "--trials", "4000", "--seed", "7"])
    ref = run_scenario(replace(_mc_scenario(values=(5.0,)), mc=McConfig(trials=4000, seed=7)))
    assert read_csv(out / "small.csv")[0]["op_p_mc"] == pytest.approx(ref[0].values["op_p_mc"], rel=1e-15)
