"""Command-line interface: attack, experiment, spectra, and report subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .datasets import karate_club, load_dataset, random_geometric, sbm
from .experiments import (
    ExperimentSpec,
    Report,
    default_beta,
    run_attack_cell,
    run_experiment,
    spectrum_shift_report,
    write_edge_bands,
    write_report,
    write_spectrum_files,
)
from .graph import Graph


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="edge-list file (u<TAB>v per line)")
    p.add_argument("--features", help="feature CSV, one row per node")
    p.add_argument("--labels", help="label CSV: node_id,label")
    p.add_argument("--split", help="split JSON: {'train': [...], 'test': [...]}")
    p.add_argument(
        "--synthetic",
        choices=["karate", "sbm", "geometric"],
        help="generate the graph instead of loading files",
    )
    p.add_argument("--sbm-sizes", default="200,200", help="comma-separated block sizes")
    p.add_argument("--p-in", type=float, default=0.05)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--n", type=int, default=200, help="node count (geometric)")
    p.add_argument("--radius", type=float, default=0.12, help="edge radius (geometric)")
    p.add_argument("--gen-seed", type=int, default=0, help="generator seed")


def _add_attack_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--attack", default="SPAC")
    p.add_argument("--stage", choices=["evasion", "poison"], default="evasion")
    p.add_argument("--epsilon", default="0.05", help="budget ratio(s), comma-separated")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--beta", type=float, default=None, help="spectral weight (default: by density)")
    p.add_argument("--k1", type=int, default=128)
    p.add_argument("--k2", type=int, default=64)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--seed", default="0", help="seed(s), comma-separated")
    p.add_argument("--out", default="out", help="output directory")


def _build_graph(args) -> tuple[Graph, str]:
    if args.synthetic:
        seed = args.gen_seed
        if args.synthetic == "karate":
            return karate_club(), "karate"
        if args.synthetic == "sbm":
            sizes = [int(s) for s in args.sbm_sizes.split(",")]
            return sbm(sizes, args.p_in, args.p_out, seed=seed), "sbm"
        return random_geometric(args.n, args.radius, seed=seed), "geometric"
    if not args.dataset:
        raise SystemExit("either --dataset or --synthetic is required")
    g = load_dataset(args.dataset, args.features, args.labels, args.split)
    return g, Path(args.dataset).stem


def _experiment_spec(args, name: str) -> ExperimentSpec:
    return ExperimentSpec(
        dataset=name,
        attack=args.attack,
        stage=args.stage,
        budgets=[float(e) for e in args.epsilon.split(",")],
        seeds=[int(s) for s in args.seed.split(",")],
        output_dir=args.out,
        steps=args.steps,
        beta=args.beta,
        approx=(args.k1, args.k2, args.m),
    )


def cmd_attack(args) -> int:
    g, name = _build_graph(args)
    spec = _experiment_spec(args, name)
    g, _ = _prepare(g, spec)
    eps = spec.budgets[0]
    seed = spec.seeds[0]
    beta = spec.beta if spec.beta is not None else default_beta(g, name)
    victim = None
    if spec.attack not in ("Random", "DICE", "SPAC", "SPAC-approx"):
        from .gcn import TrainConfig, train_gcn

        victim = train_gcn(g, TrainConfig(seed=spec.victim_seed))
    result = run_attack_cell(g, spec.attack, eps, seed, spec, beta, victim)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "attack_result.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {path} ({result.flips_used} flips)")
    return 0


def _prepare(g: Graph, spec: ExperimentSpec) -> tuple[Graph, str]:
    """Attach identity features and a split when the dataset lacks them."""
    from .datasets import make_split

    if g.features is None:
        g = Graph(
            adjacency=g.adjacency,
            features=np.eye(g.n),
            labels=g.labels,
            train_idx=g.train_idx,
            test_idx=g.test_idx,
        )
    if g.labels is not None and (g.train_idx is None or g.test_idx is None):
        per_class = min(
            spec.train_per_class, max(1, g.n // (4 * max(1, g.num_classes)))
        )
        g = make_split(g, per_class, spec.test_count, seed=spec.split_seed)
    return g, spec.dataset if isinstance(spec.dataset, str) else "dataset"


def cmd_experiment(args) -> int:
    g, name = _build_graph(args)
    spec = _experiment_spec(args, name)
    g, _ = _prepare(g, spec)
    report = run_experiment(spec, graph=g)
    print(f"wrote report to {spec.output_dir}")
    for attack, cells in report.cells.items():
        for eps, by_seed in cells.items():
            rates = [p["misclassification"] for p in by_seed.values()]
            print(f"  {attack} eps={eps}: mean misclassification {np.mean(rates):.4f}")
    return 0


def cmd_spectra(args) -> int:
    g, name = _build_graph(args)
    spec = _experiment_spec(args, name)
    g, _ = _prepare(g, spec)
    out = Path(args.out)
    write_edge_bands(g, args.band_k, out)
    print(f"wrote {out / 'edge_bands.csv'}")
    if args.attack2:
        beta = spec.beta if spec.beta is not None else default_beta(g, name)
        victim = None
        from .gcn import TrainConfig, train_gcn

        needs_victim = {args.attack, args.attack2} - {"Random", "DICE", "SPAC", "SPAC-approx"}
        if needs_victim:
            victim = train_gcn(g, TrainConfig(seed=spec.victim_seed))
        eps, seed = spec.budgets[0], spec.seeds[0]
        r1 = run_attack_cell(g, spec.attack, eps, seed, spec, beta, victim)
        r2 = run_attack_cell(g, args.attack2, eps, seed, spec, beta, victim)
        shift = spectrum_shift_report(g, r1.binary_perturbation, r2.binary_perturbation)
        write_spectrum_files(shift, out)
        print(f"wrote {out / 'spectrum_diff.csv'}")
        print(f"  {spec.attack}: {shift['counts_b1']}")
        print(f"  {args.attack2}: {shift['counts_b2']}")
    return 0


def cmd_report(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        report = Report.from_dict(json.load(fh))
    write_report(report, Path(args.out))
    print(f"regenerated tables in {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spacattack",
        description="Spectral-distance structural attacks on graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_attack = sub.add_parser("attack", help="run one attack and dump its result")
    _add_dataset_flags(p_attack)
    _add_attack_flags(p_attack)
    p_attack.set_defaults(func=cmd_attack)

    p_exp = sub.add_parser("experiment", help="sweep budgets and seeds, write reports")
    _add_dataset_flags(p_exp)
    _add_attack_flags(p_exp)
    p_exp.set_defaults(func=cmd_experiment)

    p_spec = sub.add_parser("spectra", help="emit band-reconstruction and shift data")
    _add_dataset_flags(p_spec)
    _add_attack_flags(p_spec)
    p_spec.add_argument("--attack2", help="second attack for the shift comparison")
    p_spec.add_argument("--band-k", type=int, default=4, help="band size for edge data")
    p_spec.set_defaults(func=cmd_spectra)

    p_rep = sub.add_parser("report", help="regenerate CSV tables from report.json")
    p_rep.add_argument("--report", required=True, help="path to report.json")
    p_rep.add_argument("--out", default="out")
    p_rep.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
