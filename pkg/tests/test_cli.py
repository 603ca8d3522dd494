"""CLI subcommands end to end on tiny graphs."""

import json

import pytest

from spacattack.cli import main


def sbm_flags(tmp_path, extra=()):
    return [
        "--synthetic", "sbm",
        "--sbm-sizes", "12,12",
        "--p-in", "0.4",
        "--p-out", "0.05",
        "--out", str(tmp_path),
        *extra,
    ]


class TestAttackCommand:
    def test_spac_on_karate(self, tmp_path):
        rc = main([
            "attack", "--synthetic", "karate", "--attack", "SPAC",
            "--epsilon", "0.05", "--steps", "5", "--seed", "3",
            "--out", str(tmp_path),
        ])
        assert rc == 0
        payload = json.loads((tmp_path / "attack_result.json").read_text())
        assert payload["n"] == 34
        assert payload["flips_used"] <= int(0.05 * 78)
        assert len(payload["objective_trace"]) == 5
        for u, v in payload["flips"]:
            assert 0 <= u < v < 34

    def test_dice_on_sbm(self, tmp_path):
        rc = main(["attack", "--attack", "DICE", "--epsilon", "0.2",
                   *sbm_flags(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "attack_result.json").read_text())
        assert payload["flips_used"] >= 1

    def test_requires_some_dataset(self):
        with pytest.raises(SystemExit):
            main(["attack", "--attack", "SPAC"])


class TestExperimentCommand:
    def test_random_sweep(self, tmp_path):
        rc = main([
            "experiment", "--attack", "Random", "--stage", "evasion",
            "--epsilon", "0.05,0.1", "--seed", "0,1", "--steps", "3",
            *sbm_flags(tmp_path),
        ])
        assert rc == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert set(report["cells"]["Random"]) == {"0.05", "0.1"}
        assert (tmp_path / "table3.csv").exists()
        assert (tmp_path / "sweep.csv").exists()

    def test_white_box_cell(self, tmp_path):
        rc = main([
            "experiment", "--attack", "PGD-CE", "--stage", "evasion",
            "--epsilon", "0.1", "--seed", "0", "--steps", "3",
            *sbm_flags(tmp_path),
        ])
        assert rc == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert "PGD-CE" in report["cells"]


class TestSpectraCommand:
    def test_edge_bands_only(self, tmp_path):
        rc = main(["spectra", "--band-k", "2", *sbm_flags(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "edge_bands.csv").read_text().strip().splitlines()
        assert lines[0] == "u,v,low_band,high_band"
        assert len(lines) > 1

    def test_shift_comparison(self, tmp_path):
        rc = main([
            "spectra", "--attack", "Random", "--attack2", "DICE",
            "--epsilon", "0.1", "--steps", "2", "--seed", "0",
            *sbm_flags(tmp_path),
        ])
        assert rc == 0
        assert (tmp_path / "spectrum_diff.csv").exists()
        lines = (tmp_path / "spectrum_diff.csv").read_text().strip().splitlines()
        assert lines[0] == "rank,clean_eigenvalue,difference"
        assert len(lines) == 25  # 24 nodes + header


class TestReportCommand:
    def test_regenerates_tables(self, tmp_path):
        src = tmp_path / "src"
        rc = main([
            "experiment", "--attack", "Random", "--epsilon", "0.1",
            "--seed", "0", "--steps", "2", *sbm_flags(src),
        ])
        assert rc == 0
        out = tmp_path / "regen"
        rc = main(["report", "--report", str(src / "report.json"), "--out", str(out)])
        assert rc == 0
        assert (out / "table3.csv").read_bytes() == (src / "table3.csv").read_bytes()
        assert (out / "sweep.csv").read_bytes() == (src / "sweep.csv").read_bytes()
