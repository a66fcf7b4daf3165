import json
import math

import pytest

import bohm_ergo


def test_names_and_defaults():
    names = bohm_ergo.scenario_names()
    assert "two_particle_slit" in names and len(names) == 6
    cfg = json.loads(bohm_ergo.default_config("pendulum"))
    assert cfg["seed"] == 2024
    assert bohm_ergo.__version__.startswith("bohm-ergo")


def test_schema_and_parse_errors():
    with pytest.raises(bohm_ergo.SchemaError):
        bohm_ergo.normalize_config('{"scenario": "warp_drive"}')
    with pytest.raises(bohm_ergo.ParseError):
        bohm_ergo.normalize_config('{"scenario": ')


def test_spreading_law_run():
    out = bohm_ergo.run({"scenario": "spreading_law", "integrator": {"t_end": 2.0}})
    stats = out["summary"]["statistics"]
    assert abs(stats["width_ratio_end"]["value"] - math.sqrt(2.0)) < 1e-6
    (traj,) = out["trajectories"]
    assert traj[0][0] == 0.0 and len(traj[0]) == 3


def test_pair_run_writes_outputs(tmp_path):
    cfg = {"scenario": "two_particle_slit", "n_trials": 200, "n_trajectories": 2}
    out = bohm_ergo.run(cfg, threads=2, out_dir=tmp_path)
    s = out["summary"]
    assert s["statistics"]["P_star_12"]["value"] == 0.0
    assert s["flags"]["ergodic_discrepancy"] is True
    assert (tmp_path / "summary.json").exists()
    assert out["histogram"] is not None
