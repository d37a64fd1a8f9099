import copy
import os

import numpy as np
import pytest

import stefanst.cli as cli
from stefanst.driver import (STEP_STAGES, ConvergenceRow, convergence_study,
                             fit_rate, l2_error, run_simulation, thread_count)
from stefanst.output import read_timeseries
from stefanst.scenarios import build_scenario

STEFAN_SHORT = {"scenario": {"kind": "stefan_1d", "steps": 5},
                "mesh": {"h": 2e-3}}

CUSTOM_MELTOUT = {
    "scenario": {"kind": "custom", "dt": 1.0, "steps": 4},
    "mesh": {"h": 0.2},
    "materials": {
        "liquid": {"rho": 1.0, "cp": 1.0, "kappa": 1.0, "mu": 1.0},
        "solid": {"rho": 1.0, "cp": 1.0, "kappa": 1.0, "mu": 1.0},
        "h_m": 1.0, "t_m": 0.0},
    "initial": {"interface": ["vline", 0.9], "T_liquid": 50.0,
                "T_solid": 0.0},
    "bc": {"temperature": {"left": 50.0}},
}


# --------------------------------------------------------------- step loop

def test_trace_follows_the_documented_stage_order():
    scn = build_scenario(copy.deepcopy(STEFAN_SHORT))
    seen = []
    run_simulation(scn, trace=lambda stage, step: seen.append((stage, step)),
                   steps=2)
    no_flow = tuple(s for s in STEP_STAGES if s != "flow")
    assert tuple(s for s, _ in seen[:len(no_flow)]) == no_flow
    assert [k for _, k in seen] == sorted(k for _, k in seen)


def test_trace_includes_flow_stage_when_enabled():
    scn = build_scenario({"scenario": {"kind": "cavity_melt", "steps": 1},
                          "mesh": {"h": 0.2}})
    seen = []
    run_simulation(scn, trace=lambda stage, step: seen.append(stage),
                   steps=1)
    assert tuple(seen) == STEP_STAGES


def test_melting_front_advances_monotonically():
    scn = build_scenario({"scenario": {"kind": "stefan_1d", "steps": 40},
                          "mesh": {"h": 1e-3}})
    result = run_simulation(scn)
    pci = result.records_array[:, 1]
    assert not np.any(np.isnan(pci))
    assert np.all(np.diff(pci) >= -1e-12)
    assert pci[-1] > pci[0]


def test_molten_domain_is_reported_and_run_continues():
    scn = build_scenario(copy.deepcopy(CUSTOM_MELTOUT))
    result = run_simulation(scn)
    assert result.molten_step is not None
    assert result.steps_run == 4
    rec = result.records_array
    assert np.isnan(rec[-1, 1])           # no front position once molten
    assert np.isfinite(rec[:, 2]).all()   # liquid diagnostic stays defined


def test_run_writes_vtk_and_timeseries(tmp_path):
    cfg = copy.deepcopy(STEFAN_SHORT)
    cfg["output"] = {"fields_every": 2, "series_every": 1}
    scn = build_scenario(cfg)
    result = run_simulation(scn, out_dir=str(tmp_path))
    names = sorted(os.listdir(tmp_path))
    assert "timeseries.csv" in names
    assert "step_000000.vtk" in names     # initial snapshot
    assert "step_000002.vtk" in names and "step_000004.vtk" in names
    data = read_timeseries(tmp_path / "timeseries.csv")
    assert data.shape == (5, 5)
    assert np.array_equal(data, result.records_array)


def test_runs_are_bitwise_deterministic(tmp_path):
    outs = []
    for sub in ("a", "b"):
        scn = build_scenario(copy.deepcopy(STEFAN_SHORT))
        d = tmp_path / sub
        run_simulation(scn, out_dir=str(d))
        outs.append((d / "timeseries.csv").read_bytes())
    assert outs[0] == outs[1]


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("STEFANST_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("STEFANST_THREADS", "0")
    with pytest.raises(ValueError):
        thread_count()
    monkeypatch.delenv("STEFANST_THREADS")
    assert thread_count() >= 1


def test_solver_errors_carry_the_step_number():
    cfg = copy.deepcopy(STEFAN_SHORT)
    scn = build_scenario(cfg)
    # break the material pair mid-run via a poisoned trace callback
    def bomb(stage, step):
        if step == 3 and stage == "stefan":
            raise RuntimeError("synthetic failure")
    with pytest.raises(RuntimeError) as exc:
        run_simulation(scn, trace=bomb)
    assert exc.value.step == 3


# ------------------------------------------------------------- error norms

def test_l2_error_of_exact_field_is_zero(quad_mesh):
    x = quad_mesh.node_coords[:, 0]
    abs_err, rel_err = l2_error(quad_mesh, 2.0 + x,
                                lambda xq, yq: 2.0 + xq)
    assert abs_err == pytest.approx(0.0, abs=1e-14)
    assert rel_err == pytest.approx(0.0, abs=1e-14)


def test_l2_error_of_constant_offset(quad_mesh):
    # shifting the field by delta gives an absolute area-averaged error
    # of exactly delta on any mesh
    vals = np.full(quad_mesh.n_nodes, 5.0)
    abs_err, rel_err = l2_error(quad_mesh, vals, lambda x, y: 4.0)
    assert abs_err == pytest.approx(1.0, rel=1e-13)
    assert rel_err == pytest.approx(0.25, rel=1e-13)


def test_fit_rate_recovers_synthetic_order():
    h = [4e-3, 2e-3, 1e-3]
    e = [2.0 * hh ** 1.5 for hh in h]
    assert fit_rate(h, e) == pytest.approx(1.5, rel=1e-12)
    assert fit_rate(h, [1.0, 1.0, 1.0]) == 0.0


def test_convergence_study_with_injected_runner():
    calls = []

    class FakeResult:
        pass

    def fake_build(cfg):
        scn = build_scenario(copy.deepcopy(STEFAN_SHORT)
                             | {"mesh": cfg["mesh"]})
        calls.append(scn.h)
        return scn

    def fake_run(scn):
        # fabricate a finished run whose error scales like h^2
        res = FakeResult()
        res.scenario = scn
        res.t_final = scn.t_start + scn.dt * scn.steps
        x = scn.mesh.node_coords[:, 0]
        from stefanst.analytic import stefan_analytical
        T, _ = stefan_analytical(x, res.t_final, scn.analytic)
        # the offset dwarfs the interpolation error of the exact profile
        res.temperature = np.asarray(T) + 1e6 * scn.h ** 2
        res.records = [(res.t_final, 0.001, 1.0, 0.0, scn.dt)]
        res.records_array = np.asarray(res.records)
        return res

    h_list = [4e-3, 2e-3, 1e-3]
    rows, rate = convergence_study(copy.deepcopy(STEFAN_SHORT), h_list,
                                   build=fake_build, runner=fake_run)
    assert [r.h for r in rows] == calls
    assert all(isinstance(r, ConvergenceRow) for r in rows)
    # the interpolation error of the reference profile adds a small
    # h-dependent contamination on the coarsest grids
    assert rate == pytest.approx(2.0, rel=0.15)
    errs = [r.rel_err for r in rows]
    assert errs == sorted(errs, reverse=True)
    with pytest.raises(ValueError):
        convergence_study(copy.deepcopy(STEFAN_SHORT), [1e-3, 5e-4],
                          build=fake_build, runner=fake_run)


# -------------------------------------------------------------------- CLI

def _write_cfg(tmp_path, text):
    p = tmp_path / "cfg.toml"
    p.write_text(text)
    return str(p)


def test_cli_run_ok(tmp_path, capsys):
    cfg = _write_cfg(tmp_path,
                     '[scenario]\nkind = "stefan_1d"\nsteps = 3\n'
                     '[mesh]\nh = 2e-3\n')
    rc = cli.main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "finished 3 steps" in out
    assert (tmp_path / "out" / "timeseries.csv").exists()


def test_cli_run_accepts_overrides_and_step_cap(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, '[scenario]\nkind = "stefan_1d"\n')
    rc = cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o"),
                   "--steps", "2", "--override", "mesh.h=2e-3"])
    assert rc == cli.EXIT_OK
    assert "finished 2 steps" in capsys.readouterr().out


def test_cli_bad_config_returns_config_exit_code(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, '[scenario]\nkind = "bogus"\n')
    rc = cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_validate_config(tmp_path, capsys):
    good = _write_cfg(tmp_path, '[scenario]\nkind = "cavity_melt"\n')
    assert cli.main(["validate-config", good]) == cli.EXIT_OK
    assert "config OK" in capsys.readouterr().out
    bad = tmp_path / "bad.toml"
    bad.write_text('[scenario]\ndt = -3\nkind = "stefan_1d"\n')
    assert cli.main(["validate-config", str(bad)]) == cli.EXIT_CONFIG


def test_cli_converge_requires_three_sizes(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, '[scenario]\nkind = "stefan_1d"\n')
    rc = cli.main(["converge", "--config", cfg, "--h", "2e-3,1e-3"])
    assert rc == cli.EXIT_CONFIG
    assert "at least 3" in capsys.readouterr().err


def test_cli_numerical_failure_reports_step(tmp_path, capsys, monkeypatch):
    from stefanst.exceptions import SolverError

    def explode(scenario, out_dir=None, steps=None):
        exc = SolverError("synthetic blow-up")
        exc.step = 7
        raise exc

    monkeypatch.setattr(cli, "run_simulation", explode)
    cfg = _write_cfg(tmp_path, '[scenario]\nkind = "stefan_1d"\n')
    rc = cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == cli.EXIT_NUMERICAL
    assert "error at step 7" in capsys.readouterr().err
