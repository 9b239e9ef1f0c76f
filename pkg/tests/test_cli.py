import csv
import json

import pytest

from rotor_spectra.cli import main
from rotor_spectra.config import CASE_STUDY_JSON


@pytest.fixture()
def case_cfg(tmp_path):
    p = tmp_path / "case.json"
    p.write_text(CASE_STUDY_JSON, encoding="utf-8")
    return p


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestValidate:
    def test_case_study_exit0(self, case_cfg, capsys):
        assert main(["validate", "--config", str(case_cfg)]) == 0
        assert "pass" in capsys.readouterr().out

    def test_negative_offdiagonal_exit1(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{"beta": [0.1, 0.2], "L": [1, 1],'
                     ' "generator": [[0.5, -0.5], [-0.5, 0.5]]}', encoding="utf-8")
        assert main(["validate", "--config", str(p)]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_asymmetric_exit1(self, tmp_path):
        p = tmp_path / "asym.json"
        p.write_text('{"beta": [0.1, 0.2], "L": [1, 1],'
                     ' "generator": [[-0.5, 0.5], [0.2, -0.2]]}', encoding="utf-8")
        assert main(["validate", "--config", str(p)]) == 1

    def test_bad_config_exit2(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{nope", encoding="utf-8")
        assert main(["validate", "--config", str(p)]) == 2

    def test_missing_config_exit2(self, tmp_path):
        assert main(["validate", "--config", str(tmp_path / "ghost.json")]) == 2

    def test_report_file(self, case_cfg, tmp_path):
        out = tmp_path / "rep"
        assert main(["validate", "--config", str(case_cfg), "--out", str(out)]) == 0
        doc = json.loads((out / "admissibility.json").read_text())
        assert doc["passed"] is True


class TestSpectrum:
    def test_case_study_files(self, case_cfg, tmp_path):
        out = tmp_path / "spec"
        assert main(["spectrum", "--config", str(case_cfg), "--out", str(out)]) == 0
        header, rows = read_csv(out / "spectrum_k1_eps0.1.csv")
        assert header == ["k", "ell", "band", "re", "im", "abs", "arg", "target_re",
                          "target_im", "dist_to_target", "gersh_radius", "residual"]
        assert len(rows) == 33
        assert (out / "vectors_k1_eps0.1.csv").exists()
        assert (out / "circles_k1_eps0.1.csv").exists()
        assert (out / "manifest.json").exists()

    def test_k0_real(self, case_cfg, tmp_path):
        out = tmp_path / "k0"
        assert main(["spectrum", "--config", str(case_cfg), "--out", str(out),
                     "--k", "0", "--eps", "0.2", "--delta", "0"]) == 0
        _, rows = read_csv(out / "spectrum_k0_eps0.2.csv")
        assert max(abs(float(r[4])) for r in rows) <= 1e-12

    def test_eps0_zero_distance(self, case_cfg, tmp_path):
        out = tmp_path / "e0"
        assert main(["spectrum", "--config", str(case_cfg), "--out", str(out),
                     "--k", "1", "--eps", "0", "--delta", "0"]) == 0
        _, rows = read_csv(out / "spectrum_k1_eps0.csv")
        assert max(float(r[9]) for r in rows) <= 1e-13

    def test_thread_cap_env(self, case_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("ROTOR_SPECTRA_THREADS", "2")
        out = tmp_path / "thr"
        assert main(["spectrum", "--config", str(case_cfg), "--out", str(out),
                     "--k", "1,2", "--eps", "0.1,0.01"]) == 0
        assert len(list(out.glob("spectrum_*.csv"))) == 4


class TestOtherCommands:
    def test_limit_files(self, case_cfg, tmp_path):
        out = tmp_path / "lim"
        assert main(["limit", "--config", str(case_cfg), "--out", str(out),
                     "--eps", "0.1,0.01"]) == 0
        header, rows = read_csv(out / "limit_basis_k1.csv")
        assert header[:3] == ["k", "ell", "band"]
        assert len(rows) == 33 * 33
        _, conv = read_csv(out / "convergence_k1.csv")
        assert len(conv) == 2 * 33

    def test_response_s1_zero_second_order(self, tmp_path):
        p = tmp_path / "s1.json"
        p.write_text('{"beta": [0.3], "L": [4], "ks": [2]}', encoding="utf-8")
        out = tmp_path / "resp"
        assert main(["response", "--config", str(p), "--out", str(out)]) == 0
        _, rows = read_csv(out / "response_k2.csv")
        assert all(float(r[5]) == 0 and float(r[6]) == 0 for r in rows)

    def test_oracle_exit_codes(self, case_cfg, tmp_path):
        out = tmp_path / "orc"
        assert main(["oracle", "--config", str(case_cfg), "--out", str(out)]) == 0
        assert (out / "oracle_k1.csv").exists()
        bad = tmp_path / "nl.json"
        bad.write_text('{"beta": [0.1, 0.2], "L": [1, 1],'
                       ' "generator": [[0.0, 0.0], [0.0, 0.0]]}', encoding="utf-8")
        assert main(["oracle", "--config", str(bad), "--out", str(tmp_path / "o2")]) == 1

    def test_simulate_cycles(self, tmp_path):
        p = tmp_path / "two.json"
        p.write_text('{"beta": [0.1, 0.3], "L": [1, 1], "delta": 0.05,'
                     ' "epsilons": [0.01]}', encoding="utf-8")
        out = tmp_path / "sim"
        assert main(["simulate", "--config", str(p), "--out", str(out),
                     "--bins", "32", "--top-m", "2", "--paths", "3", "--steps", "5",
                     "--seed", "11"]) == 0
        doc = json.loads((out / "cycles.json").read_text())
        assert len(doc["cycles"]) == 2
        header, rows = read_csv(out / "trajectories.csv")
        assert header == ["path", "step", "j", "x"]
        assert len(rows) == 3 * 6


class TestCaseStudy:
    def test_full_run_and_determinism(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["casestudy", "--out", str(out1), "--x-res", "16"]) == 0
        names = sorted(p.name for p in out1.iterdir())
        assert names == sorted([
            "spectrum_k1_eps0.1.csv", "vectors_k1_eps0.1.csv", "circles_k1_eps0.1.csv",
            "limit_basis_k1.csv", "response_k1.csv", "fhat_k1.csv",
            "convergence_k1.csv", "eigenfunction_grid_k1.csv", "manifest.json"])
        assert main(["casestudy", "--out", str(out2), "--x-res", "16"]) == 0
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_grid_shape(self, tmp_path):
        out = tmp_path / "g"
        assert main(["casestudy", "--out", str(out), "--x-res", "8"]) == 0
        header, rows = read_csv(out / "eigenfunction_grid_k1.csv")
        assert header == ["ell", "j", "x", "abs", "arg"]
        # three band-leading labels, 33 fibres, 8 samples
        assert len(rows) == 3 * 33 * 8
        ells = sorted({int(r[0]) for r in rows})
        assert ells == [1, 12, 19]
