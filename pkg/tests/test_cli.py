import json

import numpy as np
import pytest
import yaml

from skewfold import ConfigurationError
from skewfold.cli import main
from skewfold.scenarios import SCENARIOS, report_fingerprint, resolve_config, run_scenario

SMALL = {"grid": {"n": 256}, "n_paths": 200}


def write_cfg(tmp_path, cfg, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in SCENARIOS:
        assert name in out


def test_missing_alpha_is_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {**SMALL, "params": {"x0": 0.0}})
    assert main(["simulate", "skew-bm", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "alpha" in capsys.readouterr().err


@pytest.mark.parametrize(
    "cfg",
    [
        {"params": {"alpha": 0.7}, "colour": 1},
        {"params": {"alpha": 0.7, "beta": 2}},
        {"params": {"alpha": 1.5}},
        {"params": {"alpha": 0.7}, "grid": {"T": 1.0, "n": 0}},
        {"params": {"alpha": 0.7}, "tolerances": {"nope": 1}},
        {"params": {"alpha": 0.7}, "scenario": "ocone"},
    ],
)
def test_invalid_configs(tmp_path, cfg):
    path = write_cfg(tmp_path, cfg)
    assert main(["verify", "skew-bm", "--config", path, "--out", str(tmp_path)]) == 2


def test_unknown_scenario_and_bad_yaml(tmp_path):
    assert main(["verify", "nope", "--out", str(tmp_path)]) == 2
    p = tmp_path / "bad.yaml"
    p.write_text("grid: [1, 2\n")
    assert main(["verify", "skew-bm", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_ocone_equal_rates(tmp_path):
    cfg = write_cfg(tmp_path, {"n_paths": 100_000, "params": {"u": 1.0, "v": 1.0}})
    assert main(["verify", "ocone", "--config", cfg, "--seed", "3", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "ocone_report.json").read_text())
    first = rep["checks"][0]
    assert first["target"] == 0.0 and first["passed"]
    assert rep["seed"] == 3


def test_outputs_and_env_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SKEWFOLD_OUT", str(tmp_path / "env"))
    cfg = write_cfg(tmp_path, {**SMALL, "params": {"alpha": 0.6, "x0": 0.0}})
    code = main(["simulate", "skew-bm", "--config", cfg])
    assert code in (0, 1)
    out = tmp_path / "env"
    rep = json.loads((out / "skew-bm_report.json").read_text())
    assert rep["parameters"]["params"]["alpha"] == 0.6
    assert {"scenario", "seed", "parameters", "checks", "passed", "wall_clock"} <= set(rep)
    for c in rep["checks"]:
        assert {"name", "target", "estimate", "ci", "tolerance", "passed"} <= set(c)
    lines = (out / "skew-bm_paths.csv").read_text().splitlines()
    assert lines[0] == "t,X"
    assert len(lines) == 258
    data = np.loadtxt(out / "skew-bm_paths.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 0], np.linspace(0, 1, 257))


def test_same_config_same_report(tmp_path):
    cfg = write_cfg(tmp_path, {**SMALL, "params": {"alpha": 0.7, "x0": 0.0}})
    a, b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "skew-bm", "--config", cfg, "--out", str(a)])
    main(["simulate", "skew-bm", "--config", cfg, "--out", str(b), "--workers", "2"])
    ra, rb = (json.loads((d / "skew-bm_report.json").read_text()) for d in (a, b))
    ra.pop("wall_clock"), rb.pop("wall_clock")
    assert ra == rb
    assert (a / "skew-bm_paths.csv").read_bytes() == (b / "skew-bm_paths.csv").read_bytes()


def test_preset_without_config():
    cfg = resolve_config("skew-bm")
    assert cfg["params"]["alpha"] == 0.7 and cfg["n_paths"] == 100_000


def test_strict_requires_params():
    with pytest.raises(ConfigurationError):
        resolve_config("particles", {"params": {"zeta1": 3}}, strict=True)
    resolve_config("particles", {"params": {"zeta1": 3}})


@pytest.mark.slow
def test_skew_bm_seed_42_passes():
    rep = run_scenario(resolve_config("skew-bm", {"seed": 42}))
    assert report_fingerprint(rep)["checks"][0]["name"] == "sign_law"
    assert rep["checks"][0]["passed"]
