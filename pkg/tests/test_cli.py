import io
import json

import numpy as np
import pytest

from circlefinsler.cli import main

TILT = ["--set", "kappa.family=linear", "--set", "kappa.coefficients=0,0,0.5"]


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


class TestValidate:
    def test_admissible(self):
        code, text = run(["validate", *TILT])
        assert code == 0
        assert "ok,true" in text
        margin = float([l for l in text.splitlines() if l.startswith("margin,")][0].split(",")[1])
        assert margin == pytest.approx(0.5, abs=1e-3)

    def test_inadmissible(self):
        code, text = run(["validate", "--set", "kappa.family=linear",
                          "--set", "kappa.coefficients=0,0,2"])
        assert code == 1
        assert "ok,false" in text

    def test_malformed(self):
        code, _ = run(["validate", "--set", "kappa.family=nope"])
        assert code == 2

    def test_bad_config_file(self, tmp_path):
        bad = tmp_path / "cfg.json"
        bad.write_text("{not json")
        code, _ = run(["--config", str(bad), "validate"])
        assert code == 2


class TestMetric:
    def test_round_value(self):
        code, text = run(["metric", "--p", "1,0,0", "--v", "0,1,0"])
        assert code == 0
        value = float(text.strip().splitlines()[-1])
        assert value == pytest.approx(4.0, rel=5e-3)

    def test_indicatrix_row_count(self):
        code, text = run(["metric", "--p", "0,0,1", "--indicatrix", "-N", "64"])
        assert code == 0
        rows = [l for l in text.splitlines() if not l.startswith("#") and "," in l]
        assert len(rows) == 65  # header + 64 samples

    def test_zero_vector(self):
        code, text = run(["metric", "--p", "1,0,0", "--v", "0,0,0"])
        assert code == 0
        assert text.strip().splitlines()[-1] == "0"

    def test_config_echo_head(self):
        _, text = run(["metric", "--p", "1,0,0", "--v", "0,1,0"])
        first = text.splitlines()[0]
        assert first.startswith("# config: ")
        cfg = json.loads(first[len("# config: "):])
        assert cfg["kappa"]["family"] == "zero"
        assert cfg["quadrature"]["n_theta"] == 256


class TestCroftonCheck:
    def test_equator_round(self):
        code, text = run(["crofton-check", "--curve", "equator"])
        assert code == 0
        row = [l for l in text.splitlines() if l.startswith("0,")][0]
        _, lf, lc, gap = row.split(",")
        assert float(lf) == pytest.approx(8 * np.pi, rel=1e-2)
        assert float(lc) == pytest.approx(8 * np.pi, rel=1e-2)
        assert float(gap) < 0.01

    def test_random_arcs_tilt(self):
        code, text = run(["crofton-check", "--curve", "random:2", *TILT])
        assert code == 0

    def test_coarse_quadrature_reports(self):
        # resolution-starved runs must still report a gap and exit 0 or 1
        code, text = run(["crofton-check", "--curve", "random:1",
                          "--set", "quadrature.n_theta=16",
                          "--set", "quadrature.sphere_grid_level=3", *TILT])
        assert code in (0, 1)
        assert "max_gap" in text


class TestGeodesic:
    def test_round_deviation_reported(self):
        code, text = run(["geodesic", "--p", "1,0,0", "--t", "0,1,0", "--T", "0.3"])
        assert code == 0
        dev = float([l for l in text.splitlines() if "circle_deviation" in l][0].split()[-1])
        assert dev < 1e-4
        rows = [l for l in text.splitlines() if not l.startswith("#")]
        assert rows[0] == "time,x1,x2,x3,v1,v2,v3,F"
        assert len(rows) == 32  # header + 31 states


class TestRoundtrip:
    def test_small_grid(self):
        code, text = run(["roundtrip", "--grid-level", "0", *TILT])
        assert code == 0
        err = float([l for l in text.splitlines() if "max_rel_err" in l][0].split()[-1])
        assert err < 0.02


class TestHyperbolic:
    def test_summary(self):
        code, text = run(["hyperbolic", "--samples", "3"])
        assert code == 0
        c0 = float([l for l in text.splitlines() if l.startswith("c0,")][0].split(",")[1])
        assert c0 == pytest.approx(4.0, abs=1e-3)
        div = float([l for l in text.splitlines() if "conformal_divergence" in l][0].split()[-1])
        ctrl = float([l for l in text.splitlines() if "constant_weight_control" in l][0].split()[-1])
        assert div > 0.01
        assert ctrl < 1e-6


class TestFibrationExport:
    def test_schema(self):
        code, text = run(["fibration-export", "--grid-level", "0", *TILT])
        assert code == 0
        lines = [l for l in text.splitlines() if not l.startswith("#")]
        assert len(lines) == 12  # icosahedron vertices
        record = json.loads(lines[0])
        assert set(record) == {"x", "kappa", "f", "axis", "radius"}
        assert len(record["x"]) == 3 and len(record["axis"]) == 3 and len(record["f"]) == 3

    def test_inadmissible_exits_one(self):
        code, _ = run(["fibration-export", "--set", "kappa.family=linear",
                       "--set", "kappa.coefficients=0,0,2"])
        assert code == 1


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["roundtrip", "--grid-level", "0", *TILT],
        ["crofton-check", "--curve", "random:2", *TILT],
        ["fibration-export", "--grid-level", "1", *TILT],
    ])
    def test_worker_count_invariance(self, argv):
        outputs = [run(["--workers", str(w), *argv])[1] for w in (1, 4, 8)]
        assert outputs[0] == outputs[1] == outputs[2]

    def test_rerun_identical(self):
        a = run(["metric", "--p", "0.3,0.5,0.8", "--v", "0,1,0", *TILT])[1]
        b = run(["metric", "--p", "0.3,0.5,0.8", "--v", "0,1,0", *TILT])[1]
        assert a == b


class TestConfigHandling:
    def test_config_file_and_override(self, tmp_path):
        cfg = {"kappa": {"family": "linear", "coefficients": [0, 0, 0.25]}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code, text = run(["--config", str(path), "validate"])
        assert code == 0
        margin = float([l for l in text.splitlines() if l.startswith("margin,")][0].split(",")[1])
        assert margin == pytest.approx(0.75, abs=1e-3)
        code, text = run(["--config", str(path), "--set", "kappa.coefficients=0,0,0.75", "validate"])
        margin = float([l for l in text.splitlines() if l.startswith("margin,")][0].split(",")[1])
        assert margin == pytest.approx(0.25, abs=1e-3)

    def test_linear_cubic_coefficient_count(self):
        code, _ = run(["validate", "--set", "kappa.family=linear+cubic",
                       "--set", "kappa.coefficients=0,0,0.3"])
        assert code == 2
