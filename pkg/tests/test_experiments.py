import json
import math

import numpy as np
import pytest

from qlga import LatticeSpec, RuleParams, StateVector, build_rule, step
from qlga.errors import ConfigError
from qlga.experiments import runner
from qlga.experiments.cli import main
from qlga.experiments.config import (
    config_from_dict,
    deep_merge,
    parse_angle,
    parse_overrides,
)
from qlga.experiments.runner import (
    SPECTRUM_FIELDS,
    TRAJECTORY_FIELDS,
    compute_tables,
    eigenpair_fields,
    emit_dispersion,
    read_table,
    run,
)
from qlga.experiments.scenarios import SCENARIOS, build_config, scenario_names

from conftest import MASSIVE, MASSLESS


# -- angles and overrides ---------------------------------------------------


@pytest.mark.parametrize(
    "text, expected",
    [
        ("pi/24", math.pi / 24),
        ("-2pi/3", -2 * math.pi / 3),
        ("3/4*pi", 3 * math.pi / 4),
        ("3/4 pi", 3 * math.pi / 4),
        ("π", math.pi),
        ("PI", math.pi),
        ("0.5pi", math.pi / 2),
        ("1.047", 1.047),
        (0.25, 0.25),
        (2, 2.0),
    ],
)
def test_parse_angle(text, expected):
    assert parse_angle(text) == pytest.approx(expected, rel=1e-15)


def test_parse_angle_exact_multiple():
    assert parse_angle("pi/4") == math.pi / 4


@pytest.mark.parametrize("bad", ["pi/0", "two pi", "pi/x", "1/0pi", "", None, True, [1]])
def test_parse_angle_rejects(bad):
    with pytest.raises(ConfigError):
        parse_angle(bad)


def test_parse_overrides_nesting_and_types():
    got = parse_overrides(["N=16", "initial.s=8", "theta=pi/6", "potential.kind=square_well"])
    assert got == {"N": 16, "initial": {"s": 8}, "theta": "pi/6", "potential": {"kind": "square_well"}}


@pytest.mark.parametrize("bad", ["N", "=3", "a=[1,"])
def test_parse_overrides_rejects(bad):
    with pytest.raises(ConfigError):
        parse_overrides([bad])


def test_deep_merge_does_not_mutate():
    base = {"a": {"b": 1, "c": 2}, "d": 3}
    merged = deep_merge(base, {"a": {"b": 5}})
    assert merged == {"a": {"b": 5, "c": 2}, "d": 3}
    assert base["a"]["b"] == 1


# -- configs and scenarios --------------------------------------------------


def test_registry_covers_all_figures():
    names = scenario_names()
    for i in range(1, 17):
        assert f"fig{i}" in names
    for name in SCENARIOS:
        build_config(name)


def test_fig_presets_match_captions():
    cfg = build_config("fig5")
    assert (cfg.N, cfg.steps, cfg.initial.x0, cfg.initial.s) == (64, 49, 31, 32)
    assert cfg.theta == math.pi / 3 and cfg.rho == math.pi / 4
    assert cfg.initial.k0 == math.pi / 4
    assert build_config("fig6").initial.s == 8
    fig8 = build_config("fig8")
    assert fig8.theta == fig8.rho == math.pi / 6 and fig8.initial.k0 == math.pi / 32
    fig12 = build_config("fig12")
    assert fig12.N == 256 and fig12.potential.depth == math.pi / 24
    assert [build_config(f"fig{i}").potential.depth for i in (14, 15, 16)] == [
        math.pi / 6, math.pi / 4, math.pi / 3
    ]


@pytest.mark.parametrize(
    "overrides",
    [
        {"N": 1},
        {"steps": -1},
        {"outputs": ["plot"]},
        {"outputs": []},
        {"initial": {"s": 7}},
        {"initial": {"s": 66}},
        {"initial": {"x0": 64}},
        {"initial": {"kind": "gaussian"}},
        {"potential": {"kind": "ramp"}},
        {"bogus": 1},
        {"initial": {"width": 3}},
        {"theta": "pi/0"},
        {"N": "many"},
    ],
)
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        build_config("fig5", overrides).validate()


def test_bands_need_sweep():
    raw = {"scenario": "x", "N": 8, "theta": 0.1, "rho": 0.2, "outputs": ["bands"]}
    with pytest.raises(ConfigError):
        config_from_dict(raw).validate()


def test_config_dict_round_trip():
    cfg = build_config("fig14")
    assert config_from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


# -- tables -----------------------------------------------------------------


@pytest.mark.parametrize("params", [MASSIVE, MASSLESS, RuleParams(2.0, -0.7)])
def test_dispersion_rows_satisfy_relation(params):
    table = emit_dispersion(params, 256)
    arr = np.array(table.rows)
    k, wp, wm = arr.T
    assert k.min() > -math.pi and k.max() == pytest.approx(math.pi)
    rhs = np.cos(k) * math.cos(params.theta) * math.cos(params.rho) + math.sin(params.theta) * math.sin(params.rho)
    assert np.abs(np.cos(wp) - rhs).max() <= 1e-12
    np.testing.assert_array_equal(wm, -wp)


def test_dispersion_extremes_massive():
    wp = np.array(emit_dispersion(MASSIVE, 256).rows)[:, 1]
    assert wp.min() == pytest.approx(math.pi / 12, abs=1e-12)
    assert wp.max() == pytest.approx(5 * math.pi / 12, abs=1e-12)


def test_dispersion_massless_through_origin():
    arr = np.array(emit_dispersion(MASSLESS, 256).rows)
    at_zero = arr[np.argmin(np.abs(arr[:, 0]))]
    assert at_zero[0] == 0.0 and abs(at_zero[1]) <= 1e-12


def test_dispersion_minimal_resolution():
    assert len(emit_dispersion(MASSIVE, 2).rows) == 2


def test_trajectory_round_trip(tmp_path):
    cfg = build_config("fig5", {"outputs": ["trajectory"], "steps": 12})
    manifest = run(cfg, tmp_path)
    fields, arr = read_table(manifest.output("trajectory").path)
    assert tuple(fields) == TRAJECTORY_FIELDS
    L = LatticeSpec(cfg.N)
    rule = build_rule(RuleParams(cfg.theta, cfg.rho))
    states = []
    for t in range(cfg.steps + 1):
        rows = arr[arr[:, 0] == t]
        np.testing.assert_array_equal(rows[:, 1], np.arange(cfg.N))
        amps = np.stack([rows[:, 2] + 1j * rows[:, 3], rows[:, 4] + 1j * rows[:, 5]], axis=1)
        states.append(StateVector(L, amps).normalized())
    for a, b in zip(states, states[1:]):
        assert np.abs(step(a, rule).amps - b.amps).max() <= 1e-9


def test_schemas(tmp_path):
    cfg = build_config("planewave", {"outputs": ["trajectory", "density", "spectrum"], "steps": 2})
    m = run(cfg, tmp_path)
    assert tuple(read_table(m.output("spectrum").path)[0]) == SPECTRUM_FIELDS
    assert tuple(read_table(m.output("density").path)[0]) == ("t", "x", "prob")
    cfg = build_config("fig12", {"N": 8, "potential": {"depth": 0.3}})
    m = run(cfg, tmp_path)
    fields, arr = read_table(m.output("eigenpairs").path)
    assert tuple(fields) == eigenpair_fields(8)
    assert len(fields) == 2 + 4 * 8
    assert arr.shape == (3, len(fields))
    assert tuple(read_table(m.output("mode_density").path)[0]) == ("j", "omega", "x", "prob")
    for out in m.outputs:
        with open(out.path) as fh:
            assert "," in fh.readline()


def test_plane_wave_spectrum_table(tmp_path):
    cfg = build_config("planewave", {"initial": {"n": 3, "epsilon": -1}, "steps": 1})
    _, arr = read_table(run(cfg, tmp_path).output("spectrum").path)
    hit = arr[(arr[:, 0] == 3) & (arr[:, 1] == -1)]
    assert hit[0, 4] == pytest.approx(1.0, abs=1e-12)
    assert arr[:, 4].sum() == pytest.approx(1.0, abs=1e-12)


def test_determinism(tmp_path):
    for name in ("fig6", "fig9"):
        cfg = build_config(name)
        a = run(cfg, tmp_path / "a")
        b = run(cfg, tmp_path / "b")
        assert [o.sha256 for o in a.outputs] == [o.sha256 for o in b.outputs]


def test_random_initial_state_is_seeded(tmp_path):
    cfg = build_config("planewave", {"initial": {"kind": "random"}, "seed": 7, "steps": 3})
    a = run(cfg, tmp_path / "a").output("trajectory").sha256
    b = run(cfg, tmp_path / "b").output("trajectory").sha256
    c = run(build_config("planewave", {"initial": {"kind": "random"}, "seed": 8, "steps": 3}),
            tmp_path / "c").output("trajectory").sha256
    assert a == b != c


def test_json_mirrors_csv(tmp_path):
    cfg = build_config("fig1", {"steps": 3})
    csv_fields, csv_arr = read_table(run(cfg, tmp_path, "csv").output("trajectory").path)
    m = run(cfg, tmp_path, "json")
    path = m.output("trajectory").path
    assert path.endswith(".json")
    json_fields, json_arr = read_table(path)
    assert json_fields == csv_fields
    np.testing.assert_array_equal(json_arr, csv_arr)
    with open(m.path) as fh:
        manifest = json.load(fh)
    assert manifest["format"] == "json" and manifest["config"]["scenario"] == "fig1"


def test_band_sweep_is_ordered_and_parallel_safe():
    serial, _ = compute_tables(build_config("fig9", {"workers": 1}))
    parallel, _ = compute_tables(build_config("fig9", {"workers": 4}))
    assert serial["bands"].rows == parallel["bands"].rows
    phis = [row[0] for row in serial["bands"].rows]
    assert phis == sorted(phis) and phis[0] == 0.0 and phis[-1] == pytest.approx(math.pi)


def test_diagnostics_summary():
    _, summary = compute_tables(build_config("fig5"))
    assert summary["initial_peak"] == 31 and summary["final_peak"] == 54
    assert summary["displacement"] == 23
    assert summary["norm_drift"] <= 1e-12


# -- CLI --------------------------------------------------------------------


def _manifest(capsys):
    out = capsys.readouterr().out
    return json.loads(out)


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "fig1 " in out and "fig16" in out


def test_cli_run_scenario(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "run", "fig14", "--set", "steps=5"]) == 0
    info = _manifest(capsys)
    assert info["manifest"].endswith("fig14_manifest.json")
    assert (tmp_path / "fig14_diagnostics.csv").exists()


def test_cli_run_config_file(tmp_path, capsys):
    path = tmp_path / "exp.yaml"
    path.write_text(
        "scenario: mine\nN: 16\ntheta: pi/3\nrho: pi/4\nsteps: 4\n"
        "initial: {kind: basis, x: 3}\noutputs: [density]\n"
    )
    assert main(["run", str(path), "--out-dir", str(tmp_path), "--format", "json"]) == 0
    assert (tmp_path / "mine_density.json").exists()


def test_cli_config_file_inherits_preset(tmp_path, capsys):
    path = tmp_path / "exp.yaml"
    path.write_text("scenario: fig6\nsteps: 3\n")
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 0
    cfg = json.loads((tmp_path / "fig6_manifest.json").read_text())["config"]
    assert cfg["initial"]["s"] == 8 and cfg["steps"] == 3


@pytest.mark.parametrize(
    "argv, stem",
    [
        (["dispersion", "--theta", "pi/6", "--rho", "pi/6", "--resolution", "16"], "dispersion_dispersion"),
        (["planewave", "--N", "16", "--n", "2", "--epsilon", "-1"], "planewave_trajectory"),
        (["packet", "--k0", "pi/8", "--s", "8", "--x0", "10", "--steps", "5"], "packet_diagnostics"),
        (["spectrum", "--N", "16", "--depth", "pi/24", "--lowest-positive", "2"], "spectrum_eigenpairs"),
        (["spectrum", "--N", "8", "--nearest", "0.4"], "spectrum_mode_density"),
        (["spectrum", "--N", "8", "--sweep-count", "5"], "spectrum_bands"),
    ],
)
def test_cli_verbs(argv, stem, tmp_path, capsys):
    assert main([*argv, "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / f"{stem}.csv").exists()
    _manifest(capsys)


def test_cli_bands_fig10(tmp_path, capsys):
    assert main(["run", "fig10", "--out-dir", str(tmp_path), "--set", "sweep.count=9"]) == 0
    fields, arr = read_table(tmp_path / "fig10_bands.csv")
    assert fields == ["phi", "j", "omega"]
    assert arr.shape == (9 * 64, 3)


def test_cli_seed_flag(tmp_path, capsys):
    argv = ["--seed", "3", "run", "planewave", "--set", "initial.kind=random", "--set", "steps=2"]
    assert main([*argv, "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "planewave_manifest.json").read_text())["config"]["seed"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "no_such_scenario"],
        ["run", "fig5", "--set", "initial.s=7"],
        ["run", "fig5", "--set", "N=1"],
        ["packet", "--s", "100"],
        ["dispersion", "--theta", "half"],
    ],
)
def test_cli_config_errors_exit_3(argv, tmp_path, capsys):
    assert main([*argv, "--out-dir", str(tmp_path)]) == 3
    assert "ConfigError" in capsys.readouterr().err


def test_cli_malformed_yaml_exit_3(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("N: [1, 2\n")
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 3


def test_cli_numeric_violation_exit_4(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(runner, "verify_unitarity", lambda rule: 1e-3)
    assert main(["run", "fig1", "--out-dir", str(tmp_path)]) == 4
    assert "NumericContractError" in capsys.readouterr().err


def test_cli_unwritable_output_exit_5(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    assert main(["run", "fig1", "--set", "steps=1", "--out-dir", str(blocker / "out")]) == 5
    assert "OutputError" in capsys.readouterr().err


def test_cli_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
