import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from starshape import io
from starshape.cli import RunConfig, build_config, main, make_parser, read_config_file
from starshape.errors import ParameterError

SVG = "{http://www.w3.org/2000/svg}"
FAST = ["--resolution", "90", "--fill-resolution", "8"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def triangle_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tri")
    code = main(["reproduce-triangle", "--n", "100,200,400,1000", "--out", str(out), *FAST])
    return code, out


class TestReproduce:
    def test_artifacts(self, triangle_run):
        code, out = triangle_run
        assert code == 0
        assert len(list(out.glob("*.svg"))) == 4
        assert [p.name for p in out.glob("*_table.csv")] == ["triangle_table.csv"]
        for n in (100, 200, 400, 1000):
            for suffix in ("_estimate.csv", "_estimate.json", "_sample.csv", "_sample.json"):
                assert (out / f"triangle_n{n}{suffix}").exists()
        assert (out / "triangle_truth.csv").exists()

    def test_svg_structure(self, triangle_run):
        _, out = triangle_run
        for path in out.glob("*.svg"):
            root = ET.parse(path).getroot()
            polylines = root.findall(f"{SVG}polyline")
            assert [p.get("id") for p in polylines] == ["truth", "estimate"]
            assert "stroke-dasharray" in polylines[0].attrib and "stroke-dasharray" not in polylines[1].attrib
            assert len(root.findall(f"{SVG}line")) == 2

    def test_factor_three(self, triangle_run):
        _, out = triangle_run
        doc = json.loads((out / "triangle_n1000_estimate.json").read_text())
        assert doc["metadata"]["c0_used"] == pytest.approx(1 / 9)
        table = io.read_table_csv(out / "triangle_table.csv")
        assert [int(r["n"]) for r in table] == [100, 200, 400, 1000]
        for r in table:
            assert float(r["hausdorff_boundary"]) <= float(r["d_n"]) + 1e-9
            assert r["runtime_ms"] == ""

    def test_l_half_scale(self, tmp_path):
        code = main(["reproduce-lhalf", "--n", "100,200", "--out", str(tmp_path), *FAST])
        assert code == 0
        svg = (tmp_path / "lhalf_n100.svg").read_text()
        assert "scaled by 10" in svg
        meta = json.loads((tmp_path / "lhalf_n200_estimate.json").read_text())["metadata"]
        assert meta["c0_used"] == 0.75
        assert len(list(tmp_path.glob("*.svg"))) == 2

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run(capsys, "reproduce-triangle", "--n", "100", "--out", blocker / "sub", *FAST)
        assert code == 3
        assert "I/O error" in err


class TestEstimate:
    def test_round_trip(self, triangle_run, tmp_path, capsys):
        _, out = triangle_run
        code, text, _ = run(capsys, "estimate", out / "triangle_n1000_sample.csv", "--c0", 1 / 9,
                            "--truth", "triangle", "--out", tmp_path, "--resolution", 360)
        assert code == 0
        assert "convention=known-c0" in text
        rep = json.loads((tmp_path / "triangle_n1000_sample_estimate_hausdorff.json").read_text())
        assert rep["distance"] < 0.6
        assert set(rep) == {"distance", "witness_a_to_b", "witness_b_to_a", "grid_resolution"}

    def test_normalized_default(self, triangle_run, tmp_path, capsys):
        _, out = triangle_run
        code, text, _ = run(capsys, "estimate", out / "triangle_n400_sample.json", "--out", tmp_path,
                            "--eta", "0.3")
        assert code == 0
        meta = json.loads((tmp_path / "triangle_n400_sample_estimate.json").read_text())["metadata"]
        assert meta["convention"] == "normalized" and meta["c0_used"] == 1.0 and meta["eta"] == 0.3

    def test_zero_row(self, tmp_path, capsys):
        path = tmp_path / "x.csv"
        path.write_text("x1,x2\n1,0\n0,0\n")
        code, _, err = run(capsys, "estimate", path, "--out", tmp_path)
        assert code == 2
        assert "zero vector at data row 2" in err

    def test_malformed(self, tmp_path, capsys):
        path = tmp_path / "x.csv"
        path.write_text("x1,x2\n1,0\n1,oops\n")
        code, _, err = run(capsys, "estimate", path, "--out", tmp_path)
        assert code == 2
        assert "line 3, column 2" in err

    def test_cv_failure_surfaced(self, tmp_path, capsys):
        x = np.random.default_rng(0).normal(size=(10, 2))
        path = io.write_points_csv(x, tmp_path / "x.csv")
        code, _, err = run(capsys, "estimate", path, "--out", tmp_path, "--kernel", "uniform",
                           "--eta", "cv:0.0001,0.0002")
        assert code == 4
        assert "widen the bandwidth grid" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(capsys, "estimate", tmp_path / "nope.csv", "--out", tmp_path)
        assert code == 3


class TestConvergence:
    def test_two_rows(self, tmp_path, capsys):
        code, text, _ = run(capsys, "convergence", "--n", "100,200", "--seeds", "0", "--out", tmp_path, *FAST)
        assert code == 0
        rows = io.read_table_csv(tmp_path / "triangle_convergence.csv")
        assert len(rows) == 2
        cond = json.loads((tmp_path / "triangle_conditions.json").read_text())
        assert cond["condition_4"]["status"] == "pass"
        assert "median hausdorff" in text

    def test_constant_schedule_flags_condition_4(self, tmp_path, capsys):
        code, text, _ = run(capsys, "convergence", "--n", "100,200,400", "--seeds", "0,1", "--eta", "0.3",
                            "--out", tmp_path, *FAST)
        assert code == 0
        cond = json.loads((tmp_path / "triangle_conditions.json").read_text())
        assert cond["condition_4"]["status"] == "fail"
        assert len(io.read_table_csv(tmp_path / "triangle_convergence.csv")) == 6
        assert "conditions failed" in text

    def test_deterministic(self, tmp_path):
        for d in ("a", "b"):
            assert main(["convergence", "--target", "lhalf", "--n", "100,200", "--seeds", "0-2",
                         "--format", "csv,json", "--out", str(tmp_path / d), *FAST]) == 0
        for name in ("lhalf_convergence.csv", "lhalf_convergence.json", "lhalf_conditions.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_jobs_match_serial(self, tmp_path):
        for d, jobs in (("a", "1"), ("b", "2")):
            assert main(["convergence", "--n", "100,200", "--seeds", "0,1", "--jobs", jobs,
                         "--out", str(tmp_path / d), *FAST]) == 0
        name = "triangle_convergence.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_needs_two_sizes(self, tmp_path, capsys):
        code, _, err = run(capsys, "convergence", "--n", "100", "--out", tmp_path)
        assert code == 2

    @pytest.mark.parametrize("flags", [
        ["--n", "200,100"],
        ["--resolution", "4"],
        ["--eta", "-1"],
        ["--eta", "bogus"],
        ["--format", "png"],
        ["--seeds", "a-b"],
    ])
    def test_parameter_errors(self, tmp_path, capsys, flags):
        code, _, err = run(capsys, "convergence", "--out", tmp_path, *flags)
        assert code == 2
        assert err.startswith("error:")


class TestConfig:
    def test_file_then_flags(self, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text("# comment\nn = 10,20\nseeds = 0-3\nkernel = uniform\neta = schedule:0.25\n"
                            "fill-resolution = 4\n")
        args = make_parser().parse_args(["convergence", "--config", str(cfg_path), "--seeds", "7"])
        cfg = build_config(args, RunConfig())
        assert cfg.n == (10, 20) and cfg.seeds == (7,) and cfg.kernel == "uniform"
        assert cfg.eta == "schedule:0.25" and cfg.fill_resolution == 4

    def test_unknown_key(self, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text("colour = red\n")
        args = make_parser().parse_args(["convergence", "--config", str(cfg_path)])
        with pytest.raises(ParameterError, match="colour"):
            build_config(args, RunConfig())

    def test_bad_line(self, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text("n = 1\njunk\n")
        with pytest.raises(ParameterError, match=":2:"):
            read_config_file(cfg_path)


def test_gauges(capsys):
    code, text, _ = run(capsys, "gauges", "--resolution", 10000)
    assert code == 0
    assert "triangle" in text and "0.1111111111" in text
