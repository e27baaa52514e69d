import json
import math

import pytest

from fockspec.cli import main

UNIT_DISC = '{"terms": [{"center": ["0", "0"], "radius": "1", "weight": "1"}]}'
PAIR = ('{"terms": [{"center": ["-2", "0"], "radius": "1", "weight": "1"},'
        ' {"center": ["2", "0"], "radius": "1", "weight": "-1"}]}')


@pytest.fixture
def unit_file(tmp_path):
    p = tmp_path / "unit.json"
    p.write_text(UNIT_DISC)
    return str(p)


@pytest.fixture
def pair_file(tmp_path):
    p = tmp_path / "pair.json"
    p.write_text(PAIR)
    return str(p)


class TestSelftest:
    def test_exit_zero(self, capsys):
        assert main(["selftest"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert all(c["ok"] for c in out["selftest"])
        assert out["provenance"]["artifact"] == "fockspec"


class TestToeplitzSpectrum:
    def test_radial_matches_closed_form(self, unit_file, tmp_path, capsys):
        out = tmp_path / "series.json"
        code = main([
            "toeplitz-spectrum", unit_file,
            "--degree-ladder", "8,12", "--precision-bits", "256",
            "--out", str(out),
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        rung = doc["rungs"][-1]
        assert rung["N"] == 12
        assert rung["lambda_minus"] == []
        import mpmath
        with mpmath.workdps(60):
            for j, s in enumerate(rung["lambda_plus"]):
                want = mpmath.gammainc(j + 1, 0, 1) / mpmath.factorial(j)
                assert abs(mpmath.mpf(s) - want) < mpmath.mpf("1e-50")

    def test_byte_identical_reruns(self, pair_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["toeplitz-spectrum", pair_file, "--degree-ladder", "10",
                "--precision-bits", "320"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestErrorPaths:
    def test_malformed_json_exit_2(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["toeplitz-spectrum", str(p)]) == 2
        assert "line" in capsys.readouterr().err

    def test_unknown_symbol_key_exit_2(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{"terms": [{"center": ["0","0"], "radius": "1", "weight": "1", "x": 1}]}')
        assert main(["capacity", str(p)]) == 2

    def test_overlapping_arrangement_exit_3(self, tmp_path):
        p = tmp_path / "overlap.json"
        p.write_text('{"terms": [{"center": ["0","0"], "radius": "1", "weight": "1"},'
                     ' {"center": ["1","0"], "radius": "1", "weight": "-1"}]}')
        assert main(["capacity", str(p)]) == 3

    def test_missing_file_exit_2(self):
        assert main(["capacity", "/nonexistent/sym.json"]) == 2

    def test_uncertified_lambda_exit_4(self, pair_file):
        code = main([
            "landau-report", pair_file, "--epsilon", "0.1", "--a", "1",
            "--lambda-grid", "1e-40", "--degree-ladder", "12",
            "--precision-bits", "320",
        ])
        assert code == 4


class TestCommands:
    def test_capacity_json(self, pair_file, capsys):
        assert main(["capacity", pair_file]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["capacity"]["supp_plus"]["lower"].startswith("1")
        assert doc["capacity"]["supp_minus"] is not None

    def test_moments_kinds(self, unit_file, capsys):
        assert main(["moments", unit_file, "--degree", "2", "--kind", "fock-toeplitz",
                     "--precision-bits", "192"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["kind"] == "fock-toeplitz"
        t00 = float(doc["entries"][0][0][0])
        assert abs(t00 - (1 - math.exp(-1))) < 1e-12

    def test_outbed_csv(self, pair_file, capsys):
        code = main(["outbed", pair_file, "--degree-ladder", "0,1,2,3",
                     "--format", "csv", "--precision-bits", "192"])
        assert code == 0
        out = capsys.readouterr().out
        lines = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert lines[0].split(",")[:4] == ["n", "count_01", "count_1inf", "near_unit"]
        assert len(lines) == 5

    def test_orthopoly_profile(self, unit_file, capsys):
        code = main(["orthopoly", unit_file, "--degree", "12", "--point", "2,0",
                     "--precision-bits", "192"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert float(doc["green_target"]) == 2.0
        assert abs(float(doc["profile"][-1]["nth_root"]) - 2.0) < 0.2

    def test_landau_report(self, pair_file, capsys):
        code = main([
            "landau-report", pair_file, "--epsilon", "0.1", "--a", "1",
            "--lambda-grid", "1e-2,1e-4,1e-6", "--degree-ladder", "40",
            "--precision-bits", "512",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["magnetic_field"] == 2
        neg = doc["negative_side"]
        assert all(a <= b for a, b in zip(neg["lower"], neg["upper_plus_unknown_constant"]))

    def test_asymfit_roundtrip(self, unit_file, tmp_path, capsys):
        series_path = tmp_path / "series.json"
        assert main(["toeplitz-spectrum", unit_file, "--degree-ladder", "20,40",
                     "--out", str(series_path)]) == 0
        code = main(["asymfit", "--series", str(series_path), "--window", "10,25"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        c = float(doc["fits"]["singular"]["c"])
        assert 0.8 <= c <= 1.2
        assert doc["capacity_limit"]["verdict"] in ("pass", "fail")
