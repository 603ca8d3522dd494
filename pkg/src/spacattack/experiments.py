"""Experiment orchestration, report emission, and spectrum analyses.

An experiment sweeps (attack, budget, seed) cells on one dataset, measuring
misclassification under the evasion or poisoning protocol, and writes a JSON
report plus CSV tables. Wall-clock timing is recorded around the attack call
only and kept in a separate file so the deterministic outputs stay
byte-reproducible across runs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attack import AttackConfig, AttackResult, pgd_spectral_attack
from .baselines import dice_attack, random_attack
from .errors import MissingLabelsError
from .gcn import (
    AttackObjectiveSpec,
    TrainConfig,
    evaluate_misclassification,
    run_white_box_attack,
    train_gcn,
)
from .graph import Graph, LegalOpsMatrix, apply_perturbation, normalized_laplacian
from .spectral import eig_full
from .datasets import karate_club, load_dataset, make_split, random_geometric, sbm

BETA_BY_DATASET = {
    "cora": 1.4,
    "citeseer": 0.8,
    "blogcatalog": 13.0,
    "polblogs": 15.0,
}

BLACK_BOX_ATTACKS = ("Random", "DICE", "SPAC", "SPAC-approx")
WHITE_BOX_KINDS = {
    "PGD-CE": ("ce_test", 0.0),
    "SPAC-CE": ("ce_test", None),
    "PGD-CW": ("neg_cw", 0.0),
    "SPAC-CW": ("neg_cw", None),
    "Max-Min": ("ce_train", 0.0),
    "SPAC-Min": ("ce_train", None),
}
ATTACK_ALIASES = {"PGD-C&W": "PGD-CW", "SPAC-C&W": "SPAC-CW"}


def significant(x: float, digits: int = 6) -> float:
    """Round to the serialized precision so reports round-trip losslessly."""
    return float(f"{float(x):.{digits}g}")


def graph_density(g: Graph) -> float:
    return 2.0 * g.num_edges / (g.n * (g.n - 1))


def default_beta(g: Graph, dataset_name: str | None = None) -> float:
    """Spectral-term weight: known-dataset table, else 100x graph density."""
    if dataset_name and dataset_name.lower() in BETA_BY_DATASET:
        return BETA_BY_DATASET[dataset_name.lower()]
    return 100.0 * graph_density(g)


@dataclass
class ExperimentSpec:
    """One dataset, one attack, a budget sweep, and a seed list."""

    dataset: str | dict
    attack: str
    stage: str  # "evasion" | "poison"
    budgets: list[float]
    seeds: list[int]
    output_dir: str | Path
    steps: int = 100
    beta: float | None = None  # None: density-based default
    approx: tuple[int, int, int] = (128, 64, 10)
    victim_seed: int = 0
    train_per_class: int = 20
    test_count: int = 1000
    split_seed: int = 0
    dataset_params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.attack = ATTACK_ALIASES.get(self.attack, self.attack)
        if self.attack not in BLACK_BOX_ATTACKS and self.attack not in WHITE_BOX_KINDS:
            raise ValueError(f"unknown attack {self.attack!r}")
        if self.stage not in ("evasion", "poison"):
            raise ValueError(f"unknown stage {self.stage!r}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        for eps in self.budgets:
            if not 0.0 < eps <= 1.0:
                raise ValueError(f"budget {eps} outside (0, 1]")


@dataclass
class Report:
    """Per-cell rates and analyses, plus (separately written) wall times."""

    dataset: str
    stage: str
    clean_misclassification: float
    cells: dict = field(default_factory=dict)  # attack -> eps -> seed -> payload
    wall_times: dict = field(default_factory=dict)  # same keys -> seconds

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "stage": self.stage,
            "clean_misclassification": self.clean_misclassification,
            "cells": self.cells,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Report":
        return cls(
            dataset=payload["dataset"],
            stage=payload["stage"],
            clean_misclassification=payload["clean_misclassification"],
            cells=payload["cells"],
        )


def resolve_dataset(spec: ExperimentSpec) -> tuple[Graph, str]:
    """Build the experiment graph from a synthetic id or a set of file paths."""
    params = dict(spec.dataset_params)
    if isinstance(spec.dataset, dict):
        g = load_dataset(
            spec.dataset["edges"],
            spec.dataset.get("features"),
            spec.dataset.get("labels"),
            spec.dataset.get("split"),
        )
        name = Path(spec.dataset["edges"]).stem
    elif spec.dataset == "karate":
        g, name = karate_club(), "karate"
    elif spec.dataset == "sbm":
        params.setdefault("sizes", [200, 200])
        params.setdefault("p_in", 0.05)
        params.setdefault("p_out", 0.01)
        g, name = sbm(**params), "sbm"
    elif spec.dataset == "geometric":
        params.setdefault("n", 200)
        params.setdefault("radius", 0.12)
        g, name = random_geometric(**params), "geometric"
    else:
        raise ValueError(f"unknown dataset {spec.dataset!r}")

    if g.features is None:
        g = Graph(
            adjacency=g.adjacency,
            features=np.eye(g.n),
            labels=g.labels,
            train_idx=g.train_idx,
            test_idx=g.test_idx,
        )
    if g.train_idx is None or g.test_idx is None:
        per_class = min(spec.train_per_class, max(1, g.n // (4 * max(1, g.num_classes))))
        g = make_split(g, per_class, spec.test_count, seed=spec.split_seed)
    return g, name


def classify_flips(g: Graph, binary: np.ndarray) -> dict:
    """Count added/removed flips split by inter-/intra-class pairs."""
    if g.labels is None:
        raise MissingLabelsError("flip classification needs labels")
    iu, ju = np.where(np.triu(binary, 1) > 0)
    same = g.labels[iu] == g.labels[ju]
    existing = g.adjacency[iu, ju] > 0
    return {
        "added_inter": int((~existing & ~same).sum()),
        "added_intra": int((~existing & same).sum()),
        "removed_inter": int((existing & ~same).sum()),
        "removed_intra": int((existing & same).sum()),
    }


def run_attack_cell(
    g: Graph,
    attack: str,
    eps: float,
    seed: int,
    spec: ExperimentSpec,
    beta: float,
    victim,
) -> AttackResult:
    """Produce the binary perturbation for one (attack, budget, seed) cell."""
    budget_int = int(np.floor(eps * g.num_edges))
    if attack == "Random":
        t0 = time.perf_counter()
        b = random_attack(g, budget_int, seed=seed)
        return _wrap_binary(g, b, time.perf_counter() - t0)
    if attack == "DICE":
        t0 = time.perf_counter()
        b = dice_attack(g, budget_int, seed=seed)
        return _wrap_binary(g, b, time.perf_counter() - t0)

    if attack in ("SPAC", "SPAC-approx"):
        cfg = AttackConfig(
            budget_ratio=eps,
            steps=spec.steps,
            approx=spec.approx if attack == "SPAC-approx" else None,
            rng_seed=seed,
        )
        return pgd_spectral_attack(g, cfg)

    kind, beta_override = WHITE_BOX_KINDS[attack]
    cfg = AttackConfig(
        budget_ratio=eps,
        steps=spec.steps,
        beta=beta if beta_override is None else beta_override,
        rng_seed=seed,
    )
    obj_spec = AttackObjectiveSpec(kind=kind, stage=spec.stage)
    return run_white_box_attack(
        g, cfg, obj_spec, model=victim, train_cfg=TrainConfig(seed=spec.victim_seed)
    )


def _wrap_binary(g: Graph, binary: np.ndarray, wall: float) -> AttackResult:
    legal = LegalOpsMatrix.from_graph(g).c
    return AttackResult(
        binary_perturbation=binary,
        perturbed_adjacency=g.adjacency + legal * binary,
        objective_trace=[],
        flips_used=int(round(np.triu(binary, 1).sum())),
        wall_time=wall,
    )


def run_experiment(spec: ExperimentSpec, graph: Graph | None = None) -> Report:
    """Run every (budget, seed) cell and write the report files.

    Evasion: one victim is trained on the clean graph, each perturbed graph
    is evaluated against it. Poisoning: each perturbed graph trains a fresh
    victim, evaluated on the clean structure. Partial results are flushed if
    a cell fails.
    """
    if graph is None:
        g, name = resolve_dataset(spec)
    else:
        g, name = graph, str(spec.dataset)

    train_cfg = TrainConfig(seed=spec.victim_seed)
    victim = train_gcn(g, train_cfg)
    clean_rate = evaluate_misclassification(victim, g, g.test_idx)
    clean_eigs = eig_full(normalized_laplacian(g)).eigenvalues

    report = Report(
        dataset=name,
        stage=spec.stage,
        clean_misclassification=significant(clean_rate),
    )
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    beta = spec.beta if spec.beta is not None else default_beta(g, name)
    cells = report.cells.setdefault(spec.attack, {})
    try:
        for eps in spec.budgets:
            eps_cells = cells.setdefault(f"{eps:g}", {})
            for seed in spec.seeds:
                t0 = time.perf_counter()
                result = run_attack_cell(g, spec.attack, eps, seed, spec, beta, victim)
                wall = time.perf_counter() - t0
                if spec.stage == "evasion":
                    rate = evaluate_misclassification(
                        victim, g, g.test_idx, adjacency=result.perturbed_adjacency
                    )
                else:
                    poisoned = train_gcn(
                        g, train_cfg, adjacency=result.perturbed_adjacency
                    )
                    rate = evaluate_misclassification(poisoned, g, g.test_idx)
                if result.perturbed_adjacency.sum(axis=1).min() > 0:
                    pert_eigs = eig_full(
                        normalized_laplacian(result.perturbed_adjacency)
                    ).eigenvalues
                    eig_diff = [significant(v) for v in (pert_eigs - clean_eigs)]
                else:
                    eig_diff = None  # perturbation isolated a node
                payload = {
                    "misclassification": significant(rate),
                    "flips_used": result.flips_used,
                    "flip_counts": classify_flips(g, result.binary_perturbation)
                    if g.labels is not None
                    else None,
                    "eig_diff": eig_diff,
                    "objective_final": significant(result.objective_trace[-1])
                    if result.objective_trace
                    else None,
                }
                eps_cells[str(seed)] = payload
                report.wall_times.setdefault(spec.attack, {}).setdefault(
                    f"{eps:g}", {}
                )[str(seed)] = wall
    finally:
        write_report(report, out_dir)
    return report


def write_report(report: Report, out_dir: Path) -> None:
    """Emit report.json plus the CSV tables; timing goes to its own file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")

    # table3.csv: attacks x budgets, mean misclassification over seeds
    budgets = sorted(
        {eps for cells in report.cells.values() for eps in cells},
        key=float,
    )
    with open(out_dir / "table3.csv", "w", encoding="utf-8") as fh:
        fh.write("attack," + ",".join(f"eps={b}" for b in budgets) + "\n")
        fh.write(
            "Clean," + ",".join(f"{report.clean_misclassification:.6g}" for _ in budgets) + "\n"
        )
        for attack, cells in sorted(report.cells.items()):
            row = [attack]
            for b in budgets:
                rates = [p["misclassification"] for p in cells.get(b, {}).values()]
                row.append(f"{np.mean(rates):.6g}" if rates else "")
            fh.write(",".join(row) + "\n")

    # sweep.csv: long format for budget-sweep figures
    with open(out_dir / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write("attack,epsilon,seed,misclassification,flips_used\n")
        for attack, cells in sorted(report.cells.items()):
            for eps, by_seed in sorted(cells.items(), key=lambda kv: float(kv[0])):
                for seed, p in sorted(by_seed.items(), key=lambda kv: int(kv[0])):
                    fh.write(
                        f"{attack},{eps},{seed},"
                        f"{p['misclassification']:.6g},{p['flips_used']}\n"
                    )

    # flip_counts.csv
    with open(out_dir / "flip_counts.csv", "w", encoding="utf-8") as fh:
        fh.write(
            "attack,epsilon,seed,added_inter,added_intra,removed_inter,removed_intra\n"
        )
        for attack, cells in sorted(report.cells.items()):
            for eps, by_seed in sorted(cells.items(), key=lambda kv: float(kv[0])):
                for seed, p in sorted(by_seed.items(), key=lambda kv: int(kv[0])):
                    c = p.get("flip_counts")
                    if c is None:
                        continue
                    fh.write(
                        f"{attack},{eps},{seed},{c['added_inter']},{c['added_intra']},"
                        f"{c['removed_inter']},{c['removed_intra']}\n"
                    )

    if report.wall_times:
        with open(out_dir / "timing.csv", "w", encoding="utf-8") as fh:
            fh.write("attack,epsilon,mean_seconds,runs\n")
            for attack, cells in sorted(report.wall_times.items()):
                for eps, by_seed in sorted(cells.items(), key=lambda kv: float(kv[0])):
                    times = list(by_seed.values())
                    fh.write(f"{attack},{eps},{np.mean(times):.6g},{len(times)}\n")


def band_reconstruction_matrix(g: Graph, band: str, k: int) -> np.ndarray:
    """Band-limited filter response sum_{i in band} (1 - lam_i) u_i u_i^T."""
    if k > g.n:
        raise ValueError(f"band size {k} exceeds n={g.n}")
    basis = eig_full(normalized_laplacian(g))
    idx = np.arange(k) if band == "low" else np.arange(g.n - k, g.n)
    lam = basis.eigenvalues[idx]
    u = basis.eigenvectors[:, idx]
    return (u * (1.0 - lam)) @ u.T


def frequency_band_reconstruction(g: Graph, band: str, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-existing-edge band reconstruction values.

    Returns (edges, values) where edges is an (m, 2) array with u < v and
    values[i] is the reconstruction entry for that edge.
    """
    r = band_reconstruction_matrix(g, band, k)
    edges = g.edge_list()
    return edges, r[edges[:, 0], edges[:, 1]]


def spectrum_shift_report(g: Graph, b1: np.ndarray, b2: np.ndarray) -> dict:
    """Eigenvalue difference between two perturbations, rank-paired.

    The difference is indexed by the clean graph's eigenvalues. Flip-type
    counts need labels; without them the spectral part is still emitted.
    """
    clean = eig_full(normalized_laplacian(g)).eigenvalues
    lam1 = eig_full(normalized_laplacian(apply_perturbation(g, b1))).eigenvalues
    lam2 = eig_full(normalized_laplacian(apply_perturbation(g, b2))).eigenvalues
    out = {
        "clean_eigenvalues": clean,
        "eig_diff": lam1 - lam2,
    }
    if g.labels is not None:
        out["counts_b1"] = classify_flips(g, b1)
        out["counts_b2"] = classify_flips(g, b2)
    else:
        out["counts_b1"] = out["counts_b2"] = None
    return out


def write_spectrum_files(shift: dict, out_dir: str | Path) -> None:
    """Emit spectrum_diff.csv and flip_counts comparison for two attacks."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "spectrum_diff.csv", "w", encoding="utf-8") as fh:
        fh.write("rank,clean_eigenvalue,difference\n")
        for i, (lam, d) in enumerate(zip(shift["clean_eigenvalues"], shift["eig_diff"])):
            fh.write(f"{i},{lam:.6g},{d:.6g}\n")


def write_edge_bands(g: Graph, k: int, out_dir: str | Path) -> None:
    """Emit edge_bands.csv with low- and high-band reconstruction per edge."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    edges, low = frequency_band_reconstruction(g, "low", k)
    _, high = frequency_band_reconstruction(g, "high", k)
    with open(out_dir / "edge_bands.csv", "w", encoding="utf-8") as fh:
        fh.write("u,v,low_band,high_band\n")
        for (u, v), lo, hi in zip(edges, low, high):
            fh.write(f"{u},{v},{lo:.6g},{hi:.6g}\n")
