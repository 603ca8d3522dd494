"""Spectral-distance structural attacks on graphs.

Perturbs a graph's edges to maximize the Euclidean distance between the
clean and perturbed normalized-Laplacian eigenvalue vectors, under an
edge-flip budget. Ships exact and selective first-order variants, a
two-layer GCN victim for white-box and poisoning experiments, black-box
baselines, and an experiment harness with CSV/JSON reporting.
"""

from ._kernels import NUMBA_ENABLED
from .attack import (
    AttackConfig,
    AttackResult,
    pgd_spectral_attack,
    project_feasible,
    sample_binary,
    step_size,
)
from .baselines import dice_attack, random_attack
from .datasets import karate_club, load_dataset, make_split, random_geometric, sbm
from .gcn import (
    AttackObjectiveSpec,
    GcnModel,
    TrainConfig,
    attack_loss_and_grad,
    evaluate_misclassification,
    gcn_forward,
    load_model,
    run_white_box_attack,
    save_model,
    train_gcn,
)
from .graph import (
    Graph,
    LegalOpsMatrix,
    PerturbationState,
    add_symmetry_noise,
    apply_perturbation,
    normalized_laplacian,
    self_loop_propagator,
)
from .experiments import (
    ExperimentSpec,
    Report,
    default_beta,
    frequency_band_reconstruction,
    run_experiment,
    spectrum_shift_report,
)
from .spectral import (
    SpectralBasis,
    SpectralObjective,
    eig_full,
    eig_selective,
    eigenvalue_shift_estimate,
    grad_spectral_distance,
    spectral_distance,
    spectral_distance_approx,
)

__version__ = "0.1.0"
