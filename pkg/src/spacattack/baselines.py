"""Black-box comparison attacks: uniform random flips and label-aware DICE."""

from __future__ import annotations

import numpy as np

from .errors import BudgetTooLargeError, MissingLabelsError
from .graph import Graph


def _expand(n: int, pairs: np.ndarray) -> np.ndarray:
    b = np.zeros((n, n))
    if pairs.size:
        b[pairs[:, 0], pairs[:, 1]] = 1.0
        b[pairs[:, 1], pairs[:, 0]] = 1.0
    return b


def random_attack(g: Graph, budget: int, seed: int = 0) -> np.ndarray:
    """Flip ``budget`` distinct unordered pairs chosen uniformly at random."""
    if budget == 0:
        return np.zeros((g.n, g.n))
    iu = np.triu_indices(g.n, 1)
    total = iu[0].size
    if budget > total:
        raise BudgetTooLargeError(f"budget {budget} exceeds {total} available pairs")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(total, size=budget, replace=False)
    pairs = np.column_stack([iu[0][chosen], iu[1][chosen]])
    return _expand(g.n, pairs)


def dice_attack(g: Graph, budget: int, seed: int = 0) -> np.ndarray:
    """Delete intra-class edges and add inter-class non-edges.

    Each flip is a deletion or an addition with probability 1/2, falling back
    to the other action when its pool runs dry. Uses ground-truth labels.
    """
    if g.labels is None:
        raise MissingLabelsError("DICE needs node labels")
    rng = np.random.default_rng(seed)
    y = g.labels
    iu, ju = np.triu_indices(g.n, 1)
    same = y[iu] == y[ju]
    edge = g.adjacency[iu, ju] > 0
    del_pool = list(np.where(edge & same)[0])
    add_pool = list(np.where(~edge & ~same)[0])
    rng.shuffle(del_pool)
    rng.shuffle(add_pool)

    if budget > len(del_pool) + len(add_pool):
        raise BudgetTooLargeError(
            f"budget {budget} exceeds {len(del_pool)} intra-class edges plus "
            f"{len(add_pool)} inter-class non-edges"
        )

    chosen = []
    for _ in range(budget):
        want_delete = rng.random() < 0.5
        if want_delete and not del_pool:
            want_delete = False
        elif not want_delete and not add_pool:
            want_delete = True
        chosen.append(del_pool.pop() if want_delete else add_pool.pop())
    idx = np.asarray(chosen, dtype=np.int64)
    pairs = np.column_stack([iu[idx], ju[idx]])
    return _expand(g.n, pairs)
