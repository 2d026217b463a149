import csv
import json
import math

import pytest

from stickslip.cli import main

PSTAR = {"c": 0.5, "V": 0.5, "epsilon": 0.01,
         "friction": {"kind": "stribeck", "alpha": 0.3, "beta": 0.1, "gamma": 2.0}}
COULOMB = {"c": 1.0, "V": 0.5, "epsilon": 0.01, "friction": {"kind": "coulomb"}}


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path / "out"), "--quiet"])


def read_json(tmp_path, name):
    return json.loads((tmp_path / "out" / name).read_text())


def read_csv(tmp_path, name):
    with open(tmp_path / "out" / name) as fh:
        return list(csv.DictReader(fh))


class TestSimulate:
    def test_coulomb_stays_below(self, tmp_path):
        cfg = write_config(tmp_path, COULOMB)
        assert run(tmp_path, "simulate", "--config", cfg, "--t-end", "18.85") == 0
        rows = read_csv(tmp_path, "trajectory.csv")
        armed = [float(r["x2"]) for r in rows if float(r["t"]) >= 1e-3]
        assert max(armed) < 0.5
        doc = read_json(tmp_path, "events.json")
        assert doc["config"]["c"] == 1.0
        assert doc["events"][-1]["kind"] == "HorizonExpired"

    def test_grazing_circle(self, tmp_path):
        cfg = write_config(tmp_path, {"c": 1.0, "V": 0.5, "epsilon": 0.0, "x0": [1.0, 0.5],
                                      "friction": {"kind": "coulomb"}})
        assert run(tmp_path, "simulate", "--config", cfg, "--t-end", repr(2 * math.pi)) == 0
        last = read_csv(tmp_path, "trajectory.csv")[-1]
        assert float(last["x1"]) == pytest.approx(1.0, abs=1e-8)
        assert float(last["x2"]) == pytest.approx(0.5, abs=1e-8)

    def test_missing_V(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"c": 1.0, "epsilon": 0.01})
        assert run(tmp_path, "simulate", "--config", cfg) == 2
        assert "V" in capsys.readouterr().err

    def test_flag_overrides_file(self, tmp_path):
        cfg = write_config(tmp_path, dict(COULOMB, V=2.0))
        assert run(tmp_path, "simulate", "--config", cfg, "--V", "0.5", "--t-end", "1") == 0
        assert read_json(tmp_path, "events.json")["config"]["V"] == 0.5


class TestCriterion:
    def test_pstar(self, tmp_path):
        assert run(tmp_path, "criterion", "--config", write_config(tmp_path, PSTAR)) == 0
        doc = read_json(tmp_path, "criterion.json")
        assert doc["criterion"]["margin"] == pytest.approx(1.25664, abs=1e-5)
        assert doc["criterion"]["a_plus"] == pytest.approx(2.24199, abs=1e-5)
        assert doc["stribeck"]["closed_form_margin"] == pytest.approx(0.8)
        assert doc["config"]["friction"]["gamma"] == 2.0

    def test_coulomb(self, tmp_path):
        assert run(tmp_path, "criterion", "--config", write_config(tmp_path, COULOMB)) == 0
        doc = read_json(tmp_path, "criterion.json")
        assert doc["criterion"]["margin"] == pytest.approx(-0.5 * math.pi, abs=1e-14)
        assert doc["criterion"]["a_plus"] is None
        assert "stribeck" not in doc

    def test_boundary(self, tmp_path):
        cfg = json.loads(json.dumps(PSTAR))
        cfg["friction"]["gamma"] = 0.6 / 0.7
        assert run(tmp_path, "criterion", "--config", write_config(tmp_path, cfg)) == 0
        doc = read_json(tmp_path, "criterion.json")["criterion"]
        assert doc["boundary"] is True
        assert doc["a_minus"] is None and doc["a_plus"] is None

    def test_floats_round_trip(self, tmp_path):
        run(tmp_path, "criterion", "--config", write_config(tmp_path, PSTAR))
        text = (tmp_path / "out" / "criterion.json").read_text()
        assert "1.2566370614359172" in text


class TestDetect:
    def test_pstar(self, tmp_path):
        assert run(tmp_path, "detect", "--config", write_config(tmp_path, PSTAR)) == 0
        doc = read_json(tmp_path, "cycle.json")
        assert doc["cycle"]["exists"] is True
        assert doc["cycle"]["case"] == "Case3"

    def test_coulomb(self, tmp_path):
        assert run(tmp_path, "detect", "--config", write_config(tmp_path, COULOMB)) == 0
        assert read_json(tmp_path, "cycle.json")["cycle"]["exists"] is False

    def test_negative_margin(self, tmp_path):
        cfg = json.loads(json.dumps(PSTAR))
        cfg["friction"]["beta"] = 2.0
        assert run(tmp_path, "detect", "--config", write_config(tmp_path, cfg)) == 0
        assert read_json(tmp_path, "cycle.json")["cycle"]["exists"] is False

    def test_convergence_table(self, tmp_path):
        cfg = write_config(tmp_path, PSTAR)
        assert run(tmp_path, "detect", "--config", cfg, "--eps-list", "1e-2", "1e-3") == 0
        rows = read_csv(tmp_path, "convergence.csv")
        assert [float(r["epsilon"]) for r in rows] == [1e-2, 1e-3]

    def test_eps_zero_is_numeric_failure(self, tmp_path):
        cfg = write_config(tmp_path, dict(PSTAR, epsilon=0.0))
        assert run(tmp_path, "detect", "--config", cfg) == 3


class TestSweep:
    def sweep_file(self, tmp_path, **fixed):
        doc = {
            "axes": [{"name": "gamma", "values": [0.5, 0.8571, 1.2]}],
            "fixed": {"alpha": 0.3, "beta": 0.1, "c": 0.5, "V": 0.5, **fixed},
            "epsilon_list": [0.01],
        }
        return write_config(tmp_path, doc, "sweep.json")

    def test_gamma_axis(self, tmp_path):
        assert run(tmp_path, "sweep", "--config", self.sweep_file(tmp_path)) == 0
        rows = read_csv(tmp_path, "sweep.csv")
        assert len(rows) == 3
        assert rows[0]["detected"] == "false" and rows[2]["detected"] == "true"
        side = read_json(tmp_path, "sweep.json")
        assert side["boundary_band"] == [1]
        assert side["version"]

    def test_invalid_sweep_file(self, tmp_path, capsys):
        cfg = self.sweep_file(tmp_path, alpha=1.5)
        assert run(tmp_path, "sweep", "--config", cfg) == 2

    def test_needs_config(self, tmp_path):
        assert run(tmp_path, "sweep") == 2


class TestCompareDivergence:
    def test_pstar(self, tmp_path):
        assert run(tmp_path, "compare-divergence", "--config", write_config(tmp_path, PSTAR)) == 0
        doc = read_json(tmp_path, "divergence.json")
        assert doc["perturbation_test"] and doc["instability_test"] and doc["tests_agree"]
        assert doc["instability_margin"] == pytest.approx(0.7724144691696893, abs=1e-15)
        assert doc["divergence_at_rest"] == pytest.approx(0.007724144691696893, abs=1e-17)
        assert doc["cycle"]["exists"] is True
        assert len(doc["divergence_samples"]) > 10
        assert doc["divergence_min"] <= doc["divergence_max"]

    def test_tests_disagree(self, tmp_path):
        # closed-form margin 0.03 > 0 but the eps correction makes the instability margin negative
        cfg = {"c": 0.5, "V": 0.5, "epsilon": 0.1,
               "friction": {"kind": "stribeck", "alpha": 0.3, "beta": 0.1, "gamma": 0.9}}
        assert run(tmp_path, "compare-divergence", "--config", write_config(tmp_path, cfg)) == 0
        doc = read_json(tmp_path, "divergence.json")
        assert doc["closed_form_margin"] > 0 > doc["instability_margin"]
        assert doc["tests_agree"] is False
        assert any("disagree" in n for n in doc["notes"])

    def test_eps_zero(self, tmp_path):
        cfg = write_config(tmp_path, dict(PSTAR, epsilon=0.0))
        assert run(tmp_path, "compare-divergence", "--config", cfg) == 0
        doc = read_json(tmp_path, "divergence.json")
        assert doc["divergence_at_rest"] == 0.0 and doc["divergence_at_belt"] == 0.0
        assert doc["notes"]

    def test_requires_stribeck(self, tmp_path):
        assert run(tmp_path, "compare-divergence", "--config", write_config(tmp_path, COULOMB)) == 2


class TestValidation:
    def test_unknown_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dict(PSTAR, gamma=2.0))
        assert run(tmp_path, "criterion", "--config", cfg) == 2
        assert "gamma" in capsys.readouterr().err

    def test_bad_integrator_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dict(PSTAR, integrator={"rtol": 1e-9}))
        assert run(tmp_path, "detect", "--config", cfg) == 2
        assert "integrator.rtol" in capsys.readouterr().err

    def test_unreadable_config(self, tmp_path):
        assert run(tmp_path, "criterion", "--config", str(tmp_path / "nope.json")) == 2

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert run(tmp_path, "criterion", "--config", str(path)) == 2

    def test_out_is_a_file(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        cfg = write_config(tmp_path, PSTAR)
        assert main(["criterion", "--config", cfg, "--out", str(blocker), "--quiet"]) == 1

    def test_deterministic_output(self, tmp_path):
        cfg = write_config(tmp_path, PSTAR)
        run(tmp_path, "detect", "--config", cfg)
        first = (tmp_path / "out" / "cycle.json").read_bytes()
        run(tmp_path, "detect", "--config", cfg)
        assert (tmp_path / "out" / "cycle.json").read_bytes() == first
