"""Experiment orchestration, report emission, and spectrum analyses."""

import json

import numpy as np
import pytest

from spacattack.datasets import sbm
from spacattack.errors import MissingLabelsError
from spacattack.experiments import (
    ExperimentSpec,
    Report,
    band_reconstruction_matrix,
    classify_flips,
    default_beta,
    frequency_band_reconstruction,
    graph_density,
    run_experiment,
    significant,
    spectrum_shift_report,
    write_report,
)
from spacattack.graph import Graph, normalized_laplacian

from conftest import random_graph, two_cliques


class TestBandReconstruction:
    def test_full_band_is_identity_minus_laplacian(self):
        g = random_graph(12, 0.4, seed=1)
        full = band_reconstruction_matrix(g, "low", 12)
        lap = normalized_laplacian(g)
        np.testing.assert_allclose(full, np.eye(12) - lap, atol=1e-10)
        edges, values = frequency_band_reconstruction(g, "low", 12)
        deg = g.adjacency.sum(axis=1)
        for (u, v), val in zip(edges, values):
            assert val == pytest.approx(1.0 / np.sqrt(deg[u] * deg[v]), abs=1e-10)

    def test_two_cliques_low_band_favors_intra_edges(self):
        g = two_cliques(4)
        r = band_reconstruction_matrix(g, "low", 2)
        intra_values = []
        for u, v in g.edge_list():
            intra_values.append(r[u, v])
        cross = [r[u, v] for u in range(4) for v in range(4, 8)]
        assert min(intra_values) > max(cross)

    def test_highest_band_on_single_edge(self):
        # lambda = 2 gives filter factor -1; its eigenvector takes opposite
        # signs at the two endpoints (u0*u1 = -1/2), so the edge entry is
        # (-1) * (-1/2) = +1/2 and the two bands split the full value 1 evenly
        g = Graph(adjacency=np.array([[0.0, 1.0], [1.0, 0.0]]))
        _, high = frequency_band_reconstruction(g, "high", 1)
        _, low = frequency_band_reconstruction(g, "low", 1)
        assert high[0] == pytest.approx(0.5)
        assert low[0] == pytest.approx(0.5)
        assert high[0] + low[0] == pytest.approx(1.0)  # full band: A_uv/sqrt(d_u d_v)

    def test_complementary_bands_sum_to_full(self):
        g = random_graph(15, 0.3, seed=2)
        low = band_reconstruction_matrix(g, "low", 6)
        high = band_reconstruction_matrix(g, "high", 9)
        full = band_reconstruction_matrix(g, "low", 15)
        np.testing.assert_allclose(low + high, full, atol=1e-8)


class TestSpectrumShift:
    def test_identical_perturbations_zero_diff(self):
        g = two_cliques(4)
        b = np.zeros((8, 8))
        b[0, 4] = b[4, 0] = 1.0
        shift = spectrum_shift_report(g, b, b)
        np.testing.assert_allclose(shift["eig_diff"], 0.0, atol=1e-12)

    def test_single_inter_addition_counts(self):
        g = two_cliques(4)
        b1 = np.zeros((8, 8))
        b1[0, 4] = b1[4, 0] = 1.0
        b2 = np.zeros((8, 8))
        shift = spectrum_shift_report(g, b1, b2)
        assert shift["counts_b1"] == {
            "added_inter": 1, "added_intra": 0,
            "removed_inter": 0, "removed_intra": 0,
        }
        assert shift["counts_b2"] == {
            "added_inter": 0, "added_intra": 0,
            "removed_inter": 0, "removed_intra": 0,
        }

    def test_unlabeled_graph_still_emits_spectra(self):
        g = random_graph(10, 0.4, seed=3)
        b = np.zeros((10, 10))
        shift = spectrum_shift_report(g, b, b)
        assert shift["counts_b1"] is None
        assert shift["clean_eigenvalues"].size == 10

    def test_classify_flips_sums_to_flip_count(self):
        g = two_cliques(5)
        rng = np.random.default_rng(4)
        iu = np.triu_indices(10, 1)
        mask = rng.random(iu[0].size) < 0.3
        b = np.zeros((10, 10))
        b[iu[0][mask], iu[1][mask]] = 1.0
        b = b + b.T
        counts = classify_flips(g, b)
        assert sum(counts.values()) == int(mask.sum())

    def test_classify_needs_labels(self):
        g = random_graph(6, 0.5, seed=5)
        with pytest.raises(MissingLabelsError):
            classify_flips(g, np.zeros((6, 6)))


class TestBetaDefaults:
    def test_named_datasets(self):
        g = two_cliques(4)
        assert default_beta(g, "cora") == 1.4
        assert default_beta(g, "Citeseer") == 0.8
        assert default_beta(g, "polblogs") == 15.0
        assert default_beta(g, "blogcatalog") == 13.0

    def test_synthetic_uses_density(self):
        g = two_cliques(4)
        assert default_beta(g, "sbm") == pytest.approx(100.0 * graph_density(g))


class TestRunExperiment:
    def small_spec(self, tmp_path, attack="Random", **kw):
        return ExperimentSpec(
            dataset="sbm",
            attack=attack,
            stage=kw.pop("stage", "evasion"),
            budgets=kw.pop("budgets", [0.1]),
            seeds=kw.pop("seeds", [0, 1]),
            output_dir=tmp_path,
            steps=kw.pop("steps", 5),
            dataset_params={"sizes": [15, 15], "p_in": 0.4, "p_out": 0.05,
                            "feature_signal": 2.0, "feature_noise": 0.5},
            train_per_class=5,
            test_count=12,
            **kw,
        )

    def test_smoke_random_evasion(self, tmp_path):
        report = run_experiment(self.small_spec(tmp_path))
        cells = report.cells["Random"]["0.1"]
        assert set(cells) == {"0", "1"}
        for payload in cells.values():
            assert 0.0 <= payload["misclassification"] <= 1.0
            counts = payload["flip_counts"]
            assert sum(counts.values()) == payload["flips_used"]
        assert (tmp_path / "report.json").exists()
        assert (tmp_path / "table3.csv").exists()
        assert (tmp_path / "sweep.csv").exists()
        assert (tmp_path / "flip_counts.csv").exists()
        assert (tmp_path / "timing.csv").exists()

    def test_poison_stage_runs(self, tmp_path):
        report = run_experiment(self.small_spec(tmp_path, stage="poison", seeds=[0]))
        rate = report.cells["Random"]["0.1"]["0"]["misclassification"]
        assert 0.0 <= rate <= 1.0

    def test_spac_attack_cell(self, tmp_path):
        report = run_experiment(
            self.small_spec(tmp_path, attack="SPAC", seeds=[0], steps=4)
        )
        payload = report.cells["SPAC"]["0.1"]["0"]
        assert payload["objective_final"] is not None
        assert payload["flips_used"] >= 1

    def test_deterministic_reports_byte_identical(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        run_experiment(self.small_spec(d1))
        run_experiment(self.small_spec(d2))
        for name in ("report.json", "table3.csv", "sweep.csv", "flip_counts.csv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_report_round_trips_losslessly(self, tmp_path):
        run_experiment(self.small_spec(tmp_path, seeds=[0]))
        raw = (tmp_path / "report.json").read_bytes()
        report = Report.from_dict(json.loads(raw))
        out2 = tmp_path / "again"
        write_report(report, out2)
        assert (out2 / "report.json").read_bytes() == raw

    def test_significant_rounding_idempotent(self):
        for x in (0.123456789, 1e-17, 3.0, 0.2847561234):
            assert significant(significant(x)) == significant(x)
