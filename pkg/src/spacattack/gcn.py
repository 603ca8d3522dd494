"""Two-layer GCN victim: training, task losses, and white-box attacks.

The network is Z = P relu(P X T0) T1 with P the self-loop propagator of the
(possibly perturbed, possibly continuous) adjacency. All gradients, for both
training the weights and attacking the structure, are hand-derived; the
structural gradient differentiates through the propagator's degree terms and
is checked against finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import pair_gradient
from .attack import AttackConfig, AttackResult, pgd_spectral_attack
from .errors import (
    MissingFeaturesError,
    MissingLabelsError,
    ShapeMismatchError,
    UnlabeledTargetError,
)
from .graph import Graph, LegalOpsMatrix, self_loop_propagator


@dataclass
class TrainConfig:
    """Victim training hyper-parameters (full-batch, manual backprop)."""

    hidden: int = 64
    learning_rate: float = 0.01
    epochs: int = 200
    weight_decay: float = 5e-4
    optimizer: str = "adam"  # "adam" | "sgd"
    seed: int = 0


@dataclass
class GcnModel:
    """Weights of a two-layer GCN plus the propagator it was trained with."""

    theta0: np.ndarray
    theta1: np.ndarray
    propagator: np.ndarray


@dataclass
class AttackObjectiveSpec:
    """Which task loss drives a white-box attack, and at which stage.

    kind: "ce_test" (cross-entropy on test nodes), "neg_cw" (negated
    margin hinge on test nodes), or "ce_train" (cross-entropy on train
    nodes, with a surrogate retrained every ``retrain_every`` steps).
    stage: "evasion" attacks a fixed trained model; "poison" perturbs the
    graph the victim will later be trained on.
    """

    kind: str
    stage: str
    kappa: float = 0.0
    retrain_every: int = 20

    def __post_init__(self):
        if self.kind not in ("ce_test", "neg_cw", "ce_train"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.stage not in ("evasion", "poison"):
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def gcn_forward(model: GcnModel, propagator: np.ndarray, features: np.ndarray) -> np.ndarray:
    """Logits Z = P relu(P X T0) T1."""
    if features.shape[1] != model.theta0.shape[0]:
        raise ShapeMismatchError(
            f"features have {features.shape[1]} columns, theta0 expects "
            f"{model.theta0.shape[0]}"
        )
    if propagator.shape[0] != features.shape[0]:
        raise ShapeMismatchError("propagator and features disagree on node count")
    hidden = np.maximum(propagator @ features @ model.theta0, 0.0)
    return propagator @ hidden @ model.theta1


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_model(g: Graph, hyper: TrainConfig, adjacency: np.ndarray | None = None) -> GcnModel:
    if g.features is None:
        raise MissingFeaturesError("training needs node features")
    if g.labels is None:
        raise MissingLabelsError("training needs node labels")
    rng = np.random.default_rng(hyper.seed)
    d = g.features.shape[1]
    k = g.num_classes
    prop = self_loop_propagator(g.adjacency if adjacency is None else adjacency)
    return GcnModel(
        theta0=_glorot(rng, d, hyper.hidden),
        theta1=_glorot(rng, hyper.hidden, k),
        propagator=prop,
    )


def train_gcn(
    g: Graph,
    hyper: TrainConfig | None = None,
    adjacency: np.ndarray | None = None,
) -> GcnModel:
    """Train the victim by full-batch gradient descent on the train split.

    ``adjacency`` overrides the graph structure (used when a surrogate is
    fit on a perturbed, possibly continuous, adjacency). Weight decay is
    applied to the first layer only.
    """
    hyper = hyper or TrainConfig()
    model = init_model(g, hyper, adjacency)
    if g.train_idx is None or g.train_idx.size == 0:
        raise MissingLabelsError("training needs a non-empty train split")
    x, y, train = g.features, g.labels, g.train_idx
    prop = model.propagator
    px = prop @ x

    t0, t1 = model.theta0.copy(), model.theta1.copy()
    if hyper.optimizer == "adam":
        m0 = np.zeros_like(t0)
        v0 = np.zeros_like(t0)
        m1 = np.zeros_like(t1)
        v1 = np.zeros_like(t1)
        b1, b2, eps = 0.9, 0.999, 1e-8

    for epoch in range(hyper.epochs):
        g1 = px @ t0
        h1 = np.maximum(g1, 0.0)
        z = prop @ h1 @ t1
        p = softmax(z)
        dz = np.zeros_like(p)
        dz[train] = (p[train] - _one_hot(y[train], p.shape[1])) / train.size
        d_t1 = (prop @ h1).T @ dz
        dh1 = prop.T @ dz @ t1.T
        dg1 = dh1 * (g1 > 0)
        d_t0 = px.T @ dg1 + hyper.weight_decay * t0

        if hyper.optimizer == "adam":
            step = epoch + 1
            m0 = b1 * m0 + (1 - b1) * d_t0
            v0 = b2 * v0 + (1 - b2) * d_t0**2
            m1 = b1 * m1 + (1 - b1) * d_t1
            v1 = b2 * v1 + (1 - b2) * d_t1**2
            corr1 = 1 - b1**step
            corr2 = 1 - b2**step
            t0 -= hyper.learning_rate * (m0 / corr1) / (np.sqrt(v0 / corr2) + eps)
            t1 -= hyper.learning_rate * (m1 / corr1) / (np.sqrt(v1 / corr2) + eps)
        else:
            t0 -= hyper.learning_rate * d_t0
            t1 -= hyper.learning_rate * d_t1

    model.theta0, model.theta1 = t0, t1
    return model


def _one_hot(y: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((y.size, k))
    out[np.arange(y.size), y] = 1.0
    return out


def training_cross_entropy(model: GcnModel, g: Graph,
                           adjacency: np.ndarray | None = None) -> float:
    """Mean cross-entropy of the model on the train split."""
    prop = model.propagator if adjacency is None else self_loop_propagator(adjacency)
    z = gcn_forward(model, prop, g.features)
    logp = _log_softmax(z)
    return float(-logp[g.train_idx, g.labels[g.train_idx]].mean())


def _log_softmax(z: np.ndarray) -> np.ndarray:
    zs = z - z.max(axis=1, keepdims=True)
    return zs - np.log(np.exp(zs).sum(axis=1, keepdims=True))


def _target_nodes(g: Graph, spec: AttackObjectiveSpec) -> np.ndarray:
    nodes = g.train_idx if spec.kind == "ce_train" else g.test_idx
    if nodes is None or nodes.size == 0:
        raise UnlabeledTargetError(f"objective {spec.kind!r} needs a node split")
    if g.labels is None:
        raise UnlabeledTargetError("objective needs ground-truth labels")
    return nodes


def _loss_and_dz(z: np.ndarray, y: np.ndarray, nodes: np.ndarray,
                 spec: AttackObjectiveSpec) -> tuple[float, np.ndarray]:
    """Task loss summed over target nodes and its gradient w.r.t. logits."""
    dz = np.zeros_like(z)
    if spec.kind in ("ce_test", "ce_train"):
        logp = _log_softmax(z)
        loss = float(-logp[nodes, y[nodes]].sum())
        p = softmax(z)
        dz[nodes] = p[nodes] - _one_hot(y[nodes], z.shape[1])
        return loss, dz
    # negated Carlini-Wagner margin hinge
    zn = z[nodes]
    yn = y[nodes]
    true_logit = zn[np.arange(nodes.size), yn]
    masked = zn.copy()
    masked[np.arange(nodes.size), yn] = -np.inf
    best_other = masked.argmax(axis=1)
    margin = true_logit - masked[np.arange(nodes.size), best_other] - spec.kappa
    active = margin > 0
    loss = float(-margin[active].sum())
    rows = nodes[active]
    dz[rows, yn[active]] = -1.0
    dz[rows, best_other[active]] += 1.0
    return loss, dz


def attack_loss_and_grad(
    model: GcnModel,
    g: Graph,
    delta: np.ndarray,
    spec: AttackObjectiveSpec,
    adjacency: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Task loss on the perturbed graph and its gradient w.r.t. the perturbation.

    Differentiates through the self-loop propagator of A' = A + C * delta,
    including its degree normalization, back to the unordered-pair variables.
    """
    if g.features is None:
        raise MissingFeaturesError("attack objective needs node features")
    nodes = _target_nodes(g, spec)
    legal = LegalOpsMatrix.from_graph(g).c
    if adjacency is None:
        adjacency = g.adjacency + legal * delta
    a_tilde = adjacency + np.eye(g.n)
    deg = a_tilde.sum(axis=1)
    prop = a_tilde / np.sqrt(np.outer(deg, deg))

    x = g.features
    xt0 = x @ model.theta0
    g1 = prop @ xt0
    h1 = np.maximum(g1, 0.0)
    ht1 = h1 @ model.theta1
    z = prop @ ht1

    loss, dz = _loss_and_dz(z, g.labels, nodes, spec)

    sens = dz @ ht1.T
    dh1 = prop.T @ dz @ model.theta1.T
    dg1 = dh1 * (g1 > 0)
    sens += dg1 @ xt0.T
    sens = 0.5 * (sens + sens.T)
    grad = pair_gradient(sens, a_tilde, deg, legal, 1.0)
    return loss, grad


def run_white_box_attack(
    g: Graph,
    cfg: AttackConfig,
    spec: AttackObjectiveSpec,
    model: GcnModel | None = None,
    train_cfg: TrainConfig | None = None,
) -> AttackResult:
    """Joint task-loss + spectral-distance attack (weighted by cfg.beta).

    Evasion fixes one model trained on the clean graph. The poisoning
    objective ("ce_train") retrains a surrogate from scratch on the current
    relaxed perturbation every ``spec.retrain_every`` steps; rounding reuses
    the last surrogate.
    """
    train_cfg = train_cfg or TrainConfig()
    if spec.kind == "ce_train" and spec.stage == "poison":
        state = {"model": train_gcn(g, train_cfg), "calls": 0}

        def extra_loss(delta, a_pert):
            state["calls"] += 1
            t = state["calls"]
            if t <= cfg.steps and t > 1 and (t - 1) % spec.retrain_every == 0:
                state["model"] = train_gcn(g, train_cfg, adjacency=a_pert)
            return attack_loss_and_grad(state["model"], g, delta, spec, adjacency=a_pert)

    else:
        fixed = model if model is not None else train_gcn(g, train_cfg)

        def extra_loss(delta, a_pert):
            return attack_loss_and_grad(fixed, g, delta, spec, adjacency=a_pert)

    return pgd_spectral_attack(g, cfg, extra_loss=extra_loss)


def evaluate_misclassification(
    model: GcnModel,
    g: Graph,
    nodes: np.ndarray,
    adjacency: np.ndarray | None = None,
) -> float:
    """Fraction of ``nodes`` whose argmax logit differs from their label.

    ``adjacency`` selects the graph the forward pass runs on (defaults to the
    clean graph of ``g``). Ties in the logits resolve to the lowest class id.
    """
    if g.labels is None:
        raise MissingLabelsError("evaluation needs node labels")
    prop = (
        self_loop_propagator(adjacency)
        if adjacency is not None
        else self_loop_propagator(g.adjacency)
    )
    z = gcn_forward(model, prop, g.features)
    pred = z.argmax(axis=1)
    nodes = np.asarray(nodes, dtype=np.int64)
    return float((pred[nodes] != g.labels[nodes]).mean())


def save_model(model: GcnModel, path: str | Path) -> None:
    """Write weights and propagator to an .npz archive (bit-exact round trip)."""
    np.savez(
        path,
        theta0=model.theta0,
        theta1=model.theta1,
        propagator=model.propagator,
    )


def load_model(path: str | Path) -> GcnModel:
    with np.load(path) as data:
        return GcnModel(
            theta0=data["theta0"],
            theta1=data["theta1"],
            propagator=data["propagator"],
        )
