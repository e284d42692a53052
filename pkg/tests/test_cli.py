import csv
import json

import numpy as np
import pytest

from corruwave.cli import main
from corruwave.experiments import ConfigError, ExperimentConfig, run_task


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def test_scan_poling_minimum_near_qpm(tmp_path):
    cfg = _write(tmp_path, {"scan": {"poling_period_r": [3.545e-3, 3.56e-3, 4]}})
    out = str(tmp_path / "p.csv")
    assert main(["scan_poling", "--config", cfg, "--out", out]) == 0
    rows = _rows(out)
    lam = [float(r["lambda_sF"]) for r in rows]
    i = int(np.argmin(lam))
    assert float(rows[i]["poling_period_r"]) == pytest.approx(3.55e-3, abs=3e-6)
    assert lam[i] == pytest.approx(0.45, abs=0.05)
    assert all(float(r["conservation"]) < 1e-8 for r in rows if r["status"] == "ok")
    meta = json.loads(open(out + ".meta.json").read())
    assert meta["config"]["task"] == "scan_poling" and meta["rows"] == 4


def test_deterministic_and_refuses_overwrite(tmp_path):
    cfg = _write(tmp_path, {"scan": {"K_r": [0, 10, 3], "m": [1, 2]}})
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["enhancement", "--config", cfg, "--out", a]) == 0
    assert main(["enhancement", "--config", cfg, "--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()
    # identical re-run is accepted, a different one refused unless forced
    assert main(["enhancement", "--config", cfg, "--out", a]) == 0
    cfg2 = _write(tmp_path, {"scan": {"K_r": [0, 20, 3], "m": [1]}}, "cfg2.json")
    assert main(["enhancement", "--config", cfg2, "--out", a]) == 2
    assert main(["enhancement", "--config", cfg2, "--out", a, "--overwrite"]) == 0
    assert len(_rows(a)) == 3


def test_round_trip_float_format(tmp_path):
    out = str(tmp_path / "e.csv")
    main(["enhancement", "--out", out])
    rows = _rows(out)
    assert rows[0]["M"] == "1"
    for r in rows:
        assert float(r["M"]) == pytest.approx(0.5 + 0.5 * np.sqrt(1 + (float(r["K_r"]) / (int(r["m"]) * np.pi)) ** 2),
                                              rel=1e-15)


@pytest.mark.parametrize("doc", [
    {"bogus": 1},
    {"device": {"thickness": -1}},
    {"drive": {"P_pF": -2}},
    {"scan": {"unknown": 1}},
    {"output": {"format": "xml"}},
    {"task": "enhancement"},
])
def test_config_errors_exit_2(tmp_path, doc):
    cfg = _write(tmp_path, doc)
    assert main(["scan_poling", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_missing_config_file(tmp_path):
    assert main(["scan_poling", "--config", str(tmp_path / "nope.json")]) == 2


def test_global_failure_exit_3(tmp_path):
    cfg = _write(tmp_path, {"device": {"thickness": 0.05e-6}, "scan": {"poling_period_r": [3.5e-3]}})
    assert main(["scan_poling", "--config", cfg, "--out", str(tmp_path / "f.csv")]) == 3


def test_per_point_failures_recorded():
    cfg = ExperimentConfig.from_dict({"task": "characterize", "scan": {"t": [0.05e-6, 0.5e-6, 2]}})
    rows = run_task(cfg)
    assert rows[0]["status"] == "NoGuidedMode" and rows[1]["status"] == "ok"


def test_characterize_trends():
    cfg = ExperimentConfig.from_dict({"task": "characterize", "scan": {"t": [0.41e-6, 0.54e-6, 6]}})
    rows = run_task(cfg)
    dnl = [r["delta_nl0"] for r in rows]
    K0 = [r["K_nl0_abs"] for r in rows]
    assert all(1.5e6 <= d <= 2.0e6 for d in dnl)
    assert all(a < b for a, b in zip(K0, K0[1:]))
    assert rows[0]["K_s_abs"] < rows[-1]["K_s_abs"]


def test_json_output_and_threads(tmp_path):
    cfg = _write(tmp_path, {"scan": {"K_r": [1, 3, 3], "delta_r": [-30, -20, 2]}})
    out = str(tmp_path / "c.json")
    assert main(["scan_corrugation", "--config", cfg, "--out", out, "--format", "json", "--threads", "2"]) == 0
    rows = json.loads(open(out).read())
    assert len(rows) == 6 and all("lambda_sF" in r and "status" in r for r in rows)
    serial = run_task(ExperimentConfig.from_dict(json.loads(open(cfg).read()), task="scan_corrugation"))
    assert [r["lambda_sF"] for r in serial] == [r["lambda_sF"] for r in rows]


def test_power_sweep_task(tmp_path):
    cfg = ExperimentConfig.from_dict({"task": "power_sweep", "scan": {"P_pF": [0.5, 2.0, 2]}})
    rows = run_task(cfg)
    by = {(r["P_pF"], r["configuration"]): r for r in rows}
    for P in (0.5, 2.0):
        assert by[(P, "corrugated")]["lambda_sF"] < by[(P, "qpm")]["lambda_sF"]
        assert by[(P, "corrugated")]["N_sF"] > by[(P, "qpm")]["N_sF"]


def test_improvement_and_optimum_tasks():
    rows = run_task(ExperimentConfig.from_dict({"task": "improvement", "scan": {"K_r": [10.0, 20.0, 2]}}))
    assert all(r["D_dB"] > 0 for r in rows)
    rows = run_task(ExperimentConfig.from_dict({"task": "optimum_curve", "scan": {"delta_nl_r": [-20.0, -10.0, 2]}}))
    assert rows[0]["lambda_sF"] < rows[1]["lambda_sF"]


def test_from_dict_rejects_non_object():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict([1, 2], task="optimize")
