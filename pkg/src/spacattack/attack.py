"""Projected gradient ascent on the relaxed perturbation, and rounding.

The loop alternates: build the perturbed adjacency, evaluate the (exact or
selective first-order) spectral objective, optionally add a task loss, ascend
the relaxed perturbation along the analytic gradient, and project back onto
the box-and-budget feasible set. A randomized rounding pass converts the
final relaxed matrix into a binary perturbation within the flip budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from ._kernels import bisect_budget_multiplier
from .errors import BudgetTooSmallError, ZeroDistanceError
from .graph import (
    DEFAULT_NOISE_SCALE,
    Graph,
    LegalOpsMatrix,
    add_symmetry_noise,
    normalized_laplacian,
)
from .spectral import (
    SpectralObjective,
    eig_full,
    eig_selective,
    first_order_shifts,
    grad_spectral_distance,
    spectral_distance,
    weighted_pair_gradient_laplacian,
)

INIT_DELTA = 1e-3
# deletions stay strictly fractional so continuous degrees stay positive
DELTA_CAP = 1.0 - 1e-9

# extra_loss(delta_matrix, perturbed_adjacency) -> (loss_value, gradient)
ExtraLoss = Callable[[np.ndarray, np.ndarray], tuple[float, np.ndarray]]


@dataclass
class AttackConfig:
    """Knobs for the projected-gradient structural attack.

    budget_ratio: fraction of existing edges that may be flipped.
    steps: number of ascent iterations T.
    step_schedule: "adaptive" (T * eps / sqrt(t)) or "constant".
    step_size: the constant step when step_schedule == "constant".
    beta: weight of the spectral term when a task loss is present.
    approx: optional (k1, k2, m) enabling the selective first-order objective.
    noise_scale: symmetric tie-breaking noise used for gradient evaluation.
    sample_trials: number of rounding draws scored to pick the binary output.
    """

    budget_ratio: float
    steps: int = 100
    step_schedule: str = "adaptive"
    step_size: float | None = None
    beta: float = 0.0
    approx: tuple[int, int, int] | None = None
    noise_scale: float = DEFAULT_NOISE_SCALE
    sample_trials: int = 20
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.budget_ratio <= 1.0:
            raise ValueError("budget_ratio must lie in (0, 1]")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.approx is not None:
            k1, k2, m = self.approx
            if m < 1 or k1 < 0 or k2 < 0:
                raise ValueError("approx requires k1, k2 >= 0 and m >= 1")
        if self.step_schedule not in ("adaptive", "constant"):
            raise ValueError("step_schedule must be 'adaptive' or 'constant'")
        if self.step_schedule == "constant" and self.step_size is None:
            raise ValueError("constant schedule needs step_size")


@dataclass
class AttackResult:
    """Binary perturbation plus the optimization trace that produced it."""

    binary_perturbation: np.ndarray
    perturbed_adjacency: np.ndarray
    objective_trace: list[float]
    flips_used: int
    wall_time: float

    def flipped_pairs(self) -> list[tuple[int, int]]:
        iu, ju = np.where(np.triu(self.binary_perturbation, 1) > 0)
        return [(int(a), int(b)) for a, b in zip(iu, ju)]

    def to_dict(self) -> dict:
        return {
            "flips": self.flipped_pairs(),
            "flips_used": self.flips_used,
            "objective_trace": [float(v) for v in self.objective_trace],
            "wall_time": self.wall_time,
            "n": int(self.binary_perturbation.shape[0]),
        }


def step_size(t: int, cfg: AttackConfig) -> float:
    """Step size at 1-based step t: T * eps / sqrt(t), or a constant."""
    if cfg.step_schedule == "constant":
        return float(cfg.step_size)
    return cfg.steps * cfg.budget_ratio / np.sqrt(t)


def project_feasible(delta: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {0 <= delta <= 1, sum over pairs <= budget}.

    Clipping alone is returned when it already meets the budget; otherwise a
    uniform shift found by bisection makes the budget bind. The budget counts
    each unordered pair once; output is symmetric with zero diagonal.
    """
    n = delta.shape[0]
    iu = np.triu_indices(n, 1)
    raw = delta[iu]
    v = np.clip(raw, 0.0, 1.0)
    if v.sum() > budget + 1e-15:
        mu = bisect_budget_multiplier(raw, budget)
        v = np.clip(raw - mu, 0.0, 1.0)
    out = np.zeros_like(delta)
    out[iu] = v
    return out + out.T


def sample_binary(
    delta: np.ndarray,
    budget: int,
    trials: int,
    score: Callable[[np.ndarray], float],
    rng: np.random.Generator | int | None = 0,
) -> np.ndarray:
    """Round a relaxed perturbation to binary by scored Bernoulli draws.

    Each trial samples every unordered pair independently with probability
    delta_ij (mirrored); draws over budget are discarded and the surviving
    draw with the best score wins. If every draw exceeds the budget, the one
    with the fewest flips is truncated by dropping its lowest-probability
    flips.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    n = delta.shape[0]
    iu = np.triu_indices(n, 1)
    probs = delta[iu]

    def expand(mask: np.ndarray) -> np.ndarray:
        b = np.zeros((n, n))
        b[iu] = mask.astype(np.float64)
        return b + b.T

    best_b = None
    best_score = -np.inf
    fallback_mask = None
    fallback_flips = np.inf
    for _ in range(max(1, trials)):
        mask = rng.random(probs.size) < probs
        flips = int(mask.sum())
        if flips <= budget:
            b = expand(mask)
            s = score(b)
            if s > best_score:
                best_score, best_b = s, b
        elif flips < fallback_flips:
            fallback_flips, fallback_mask = flips, mask.copy()

    if best_b is not None:
        return best_b
    # all draws exceeded the budget: truncate the smallest one
    chosen = np.where(fallback_mask)[0]
    order = np.argsort(probs[chosen], kind="stable")
    drop = chosen[order[: len(chosen) - budget]]
    fallback_mask[drop] = False
    return expand(fallback_mask)


class _ApproxState:
    """Frozen selective basis anchoring first-order shift estimates."""

    def __init__(self):
        self.base_laplacian = None
        self.basis = None
        self.steps_since_refresh = 0


def _approx_eigs(state: _ApproxState, lap: np.ndarray) -> np.ndarray:
    """Estimated selective eigenvalues of ``lap`` from the frozen basis."""
    shifts = first_order_shifts(lap - state.base_laplacian, state.basis)
    return state.basis.eigenvalues + shifts


def pgd_spectral_attack(
    g: Graph,
    cfg: AttackConfig,
    objective: SpectralObjective | None = None,
    extra_loss: ExtraLoss | None = None,
    _on_step: Callable[[int, np.ndarray], None] | None = None,
) -> AttackResult:
    """Run the projected-gradient spectral attack end to end.

    Ascends the relaxed perturbation for ``cfg.steps`` iterations, projecting
    onto the budgeted box after every update, then rounds to a binary
    perturbation scored by the configured objective. When ``extra_loss`` is
    given, the objective becomes task_loss + beta * spectral_distance; with
    beta == 0 the spectral machinery is skipped entirely.
    """
    t_start = time.perf_counter()
    budget_real = cfg.budget_ratio * g.num_edges
    budget_int = int(np.floor(budget_real))
    if budget_int < 1:
        raise BudgetTooSmallError(
            f"budget ratio {cfg.budget_ratio} on {g.num_edges} edges allows no flip"
        )

    rng = np.random.default_rng(cfg.rng_seed)
    legal = LegalOpsMatrix.from_graph(g).c
    adjacency = g.adjacency
    n = g.n

    spectral_on = extra_loss is None or cfg.beta != 0.0
    if objective is None and spectral_on:
        if cfg.approx is not None:
            objective = SpectralObjective.selective(g, *cfg.approx)
        else:
            objective = SpectralObjective.exact(g)

    delta = INIT_DELTA * (np.ones((n, n)) - np.eye(n))
    delta = project_feasible(delta, budget_real)

    approx = _ApproxState()
    trace: list[float] = []

    for t in range(1, cfg.steps + 1):
        a_pert = adjacency + legal * delta
        grad_total = np.zeros((n, n))
        value = 0.0

        if extra_loss is not None:
            task_value, task_grad = extra_loss(delta, a_pert)
            value += task_value
            grad_total += task_grad

        if spectral_on:
            # objective value on the noise-free adjacency
            lap_clean = normalized_laplacian(a_pert)
            if objective.mode == "exact":
                cur = scipy.linalg.eigvalsh(lap_clean)
                dist = spectral_distance(objective.reference_eigs, cur)
            else:
                if (
                    approx.basis is None
                    or approx.steps_since_refresh >= objective.refresh_every
                ):
                    approx.basis = eig_selective(lap_clean, objective.k1, objective.k2)
                    approx.base_laplacian = lap_clean
                    approx.steps_since_refresh = 0
                    cur = approx.basis.eigenvalues
                else:
                    cur = _approx_eigs(approx, lap_clean)
                approx.steps_since_refresh += 1
                objective.refresh_counter = approx.steps_since_refresh - 1
                dist = spectral_distance(objective.reference_selected, cur)
            value += dist if extra_loss is None else cfg.beta * dist

            # gradient on the noise-injected adjacency
            a_noisy = add_symmetry_noise(a_pert, cfg.noise_scale, rng)
            lap_noisy = normalized_laplacian(a_noisy)
            try:
                if objective.mode == "exact":
                    basis = eig_full(lap_noisy)
                    g_spec = grad_spectral_distance(
                        g, delta, basis, objective.reference_eigs, adjacency=a_noisy
                    )
                else:
                    est = _approx_eigs(approx, lap_noisy)
                    diff = est - objective.reference_selected
                    d_noisy = float(np.linalg.norm(diff))
                    if d_noisy < 1e-12:
                        raise ZeroDistanceError("estimated spectral distance is zero")
                    w = diff / d_noisy
                    weight = (approx.basis.eigenvectors * w) @ approx.basis.eigenvectors.T
                    g_spec = weighted_pair_gradient_laplacian(weight, a_noisy, legal)
                grad_total += g_spec if extra_loss is None else cfg.beta * g_spec
            except ZeroDistanceError:
                pass  # flat point: keep whatever task gradient we have

        trace.append(float(value))
        delta = project_feasible(delta + step_size(t, cfg) * grad_total, budget_real)
        if spectral_on:
            np.minimum(delta, DELTA_CAP, out=delta)
        if _on_step is not None:
            _on_step(t, delta)

    def rounding_score(b: np.ndarray) -> float:
        a_b = adjacency + legal * b
        s = 0.0
        if extra_loss is not None:
            s += extra_loss(b, a_b)[0]
        if spectral_on:
            if a_b.sum(axis=1).min() <= 0.0:
                return -1e18  # draw isolates a node: spectral objective undefined
            cur = scipy.linalg.eigvalsh(normalized_laplacian(a_b))
            if objective.mode == "exact":
                d = spectral_distance(objective.reference_eigs, cur)
            else:
                d = spectral_distance(objective.reference_selected, cur[objective.selected])
            s += d if extra_loss is None else cfg.beta * d
        return s

    binary = sample_binary(delta, budget_int, cfg.sample_trials, rounding_score, rng)
    flips = int(round(np.triu(binary, 1).sum()))
    return AttackResult(
        binary_perturbation=binary,
        perturbed_adjacency=adjacency + legal * binary,
        objective_trace=trace,
        flips_used=flips,
        wall_time=time.perf_counter() - t_start,
    )
