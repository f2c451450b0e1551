"""CART decision trees and the bagging + cross-validation vote ensemble.

Labels are the strings "particle" (positive) and "non_particle".
Internally samples are (X, y) with X an (n, p) float array and y an int
array, 1 = particle.  Every random choice is drawn from a generator
seeded by the caller, so training is bitwise reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PARTICLE = 1
NON_PARTICLE = 0
LABEL_NAMES = {PARTICLE: "particle", NON_PARTICLE: "non_particle"}
LABEL_CODES = {v: k for k, v in LABEL_NAMES.items()}

DEFAULT_K = 21
CANDIDATE_MIN_SPLITS = (5, 10, 20)  # plus two bootstrap trees at min_split 10
BOOTSTRAP_MIN_SPLIT = 10
N_BOOTSTRAP_CANDIDATES = 2
VALIDATION_FRACTION = 0.10
TEST_FRACTION = 0.20  # 4:1 train:test within each round


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (feature is None)."""

    feature: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    label: int = NON_PARTICLE
    counts: tuple[int, int] = (0, 0)  # (non_particle, particle)

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class DecisionTree:
    root: TreeNode
    n_features: int


@dataclass
class RoundRecord:
    train_idx: np.ndarray
    test_idx: np.ndarray
    candidate_errors: list[float]
    chosen: int


@dataclass
class SplitReport:
    seed: int
    validation_idx: np.ndarray
    rounds: list[RoundRecord] = field(default_factory=list)


@dataclass
class Ensemble:
    members: list[DecisionTree]
    feature_names: list[str]
    k: int
    seed: int
    validation_sensitivity: float | None
    validation_specificity: float | None


def _leaf(y: np.ndarray) -> TreeNode:
    n_part = int(np.sum(y == PARTICLE))
    n_non = int(y.size - n_part)
    # Majority label; ties go to the conservative non_particle.
    label = PARTICLE if n_part > n_non else NON_PARTICLE
    return TreeNode(label=label, counts=(n_non, n_part))


def _best_split(X: np.ndarray, y: np.ndarray) -> tuple[int, float, float] | None:
    """Lowest weighted Gini split; ties -> lowest feature index, lowest threshold.

    Returns (feature, threshold, impurity_decrease) or None if no split helps.
    """
    n = y.size
    n_part = np.sum(y == PARTICLE)
    p = n_part / n
    parent_gini = 2.0 * p * (1.0 - p)
    best = None
    for j in range(X.shape[1]):
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        sorted_vals = col[order]
        sorted_pos = (y[order] == PARTICLE).astype(np.float64)
        cum_pos = np.cumsum(sorted_pos)
        # split after index i (left = first i+1 samples); only between distinct values
        boundary = np.nonzero(sorted_vals[:-1] < sorted_vals[1:])[0]
        if boundary.size == 0:
            continue
        n_left = boundary + 1.0
        n_right = n - n_left
        pos_left = cum_pos[boundary]
        pos_right = n_part - pos_left
        p_l = pos_left / n_left
        p_r = pos_right / n_right
        gini = (n_left * 2.0 * p_l * (1.0 - p_l) + n_right * 2.0 * p_r * (1.0 - p_r)) / n
        i = int(np.argmin(gini))  # first minimum -> smallest threshold
        decrease = parent_gini - gini[i]
        if decrease <= 1e-12:
            continue
        threshold = 0.5 * (sorted_vals[boundary[i]] + sorted_vals[boundary[i] + 1])
        if best is None or decrease > best[2] + 1e-15:
            best = (j, float(threshold), float(decrease))
    return best


def _grow(X: np.ndarray, y: np.ndarray, min_split: int) -> TreeNode:
    if y.size < min_split or np.all(y == y[0]):
        return _leaf(y)
    split = _best_split(X, y)
    if split is None:
        return _leaf(y)
    feature, threshold, _ = split
    mask = X[:, feature] <= threshold
    node = TreeNode(feature=feature, threshold=threshold, counts=_leaf(y).counts)
    node.left = _grow(X[mask], y[mask], min_split)
    node.right = _grow(X[~mask], y[~mask], min_split)
    return node


def train_tree(X: np.ndarray, y: np.ndarray, min_split: int = 10) -> DecisionTree:
    """Greedy CART induction; unbounded depth, no pruning."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.size == 0 or X.shape[0] != y.size:
        raise ValueError("need a non-empty (n, p) sample matrix with matching labels")
    return DecisionTree(root=_grow(X, y, min_split), n_features=X.shape[1])


def predict_tree(tree: DecisionTree, fv: np.ndarray) -> int:
    fv = np.asarray(fv, dtype=np.float64)
    if fv.shape != (tree.n_features,):
        raise ValueError(f"feature vector has shape {fv.shape}, expected ({tree.n_features},)")
    node = tree.root
    while not node.is_leaf:
        node = node.left if fv[node.feature] <= node.threshold else node.right
    return node.label


def predict_tree_batch(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != tree.n_features:
        raise ValueError("feature matrix does not match tree schema")
    return np.array([predict_tree(tree, row) for row in X], dtype=np.int64)


def predict_ensemble(ensemble: Ensemble, fv: np.ndarray) -> tuple[int, int]:
    """Majority-vote label and the absolute vote margin (odd for odd K)."""
    votes = sum(predict_tree(t, fv) for t in ensemble.members)
    k = len(ensemble.members)
    label = PARTICLE if votes > k / 2 else NON_PARTICLE
    return label, abs(2 * votes - k)


def predict_ensemble_batch(ensemble: Ensemble, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectors of (label, margin, particle votes) for each row of X."""
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for tree in ensemble.members:
        votes += predict_tree_batch(tree, X)
    k = len(ensemble.members)
    labels = (votes > k / 2).astype(np.int64)
    return labels, np.abs(2 * votes - k), votes


def _stratified_holdout(y: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    held = []
    for cls in (NON_PARTICLE, PARTICLE):
        idx = np.nonzero(y == cls)[0]
        take = max(1, int(round(fraction * idx.size)))
        held.append(rng.permutation(idx)[:take])
    return np.sort(np.concatenate(held))


def build_ensemble(
    X: np.ndarray,
    y: np.ndarray,
    k: int = DEFAULT_K,
    seed: int = 0,
    feature_names: list[str] | None = None,
) -> tuple[Ensemble, SplitReport]:
    """Hold out 10%, run K best-of-round selections on 4:1 resplits.

    Per round the candidate pool is three trees with min_split 5/10/20 on
    the round-train set plus two min_split-10 trees on bootstrap resamples
    of it; the candidate with the lowest round-test error joins the
    ensemble (ties to the smaller candidate index).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] < 50:
        raise ValueError("need at least 50 labeled samples")
    if len(np.unique(y)) < 2:
        raise ValueError("need samples of both classes")
    if k % 2 == 0:
        raise ValueError("K must be odd")
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(X.shape[1])]

    rng = np.random.default_rng(seed)
    validation_idx = _stratified_holdout(y, VALIDATION_FRACTION, rng)
    pool = np.setdiff1d(np.arange(y.size), validation_idx)
    report = SplitReport(seed=seed, validation_idx=validation_idx)

    members: list[DecisionTree] = []
    for _ in range(k):
        perm = rng.permutation(pool)
        n_test = max(1, int(round(TEST_FRACTION * pool.size)))
        test_idx, train_idx = np.sort(perm[:n_test]), np.sort(perm[n_test:])
        Xtr, ytr = X[train_idx], y[train_idx]
        Xte, yte = X[test_idx], y[test_idx]

        candidates = [train_tree(Xtr, ytr, ms) for ms in CANDIDATE_MIN_SPLITS]
        for _ in range(N_BOOTSTRAP_CANDIDATES):
            boot = rng.integers(0, Xtr.shape[0], size=Xtr.shape[0])
            candidates.append(train_tree(Xtr[boot], ytr[boot], BOOTSTRAP_MIN_SPLIT))

        errors = [float(np.mean(predict_tree_batch(t, Xte) != yte)) for t in candidates]
        chosen = int(np.argmin(errors))  # first minimum -> smaller index on ties
        members.append(candidates[chosen])
        report.rounds.append(RoundRecord(train_idx, test_idx, errors, chosen))

    ensemble = Ensemble(members, list(feature_names), k, seed, None, None)
    labels, _, _ = predict_ensemble_batch(ensemble, X[validation_idx])
    truth = y[validation_idx]
    tp = int(np.sum((labels == PARTICLE) & (truth == PARTICLE)))
    fn = int(np.sum((labels == NON_PARTICLE) & (truth == PARTICLE)))
    tn = int(np.sum((labels == NON_PARTICLE) & (truth == NON_PARTICLE)))
    fp = int(np.sum((labels == PARTICLE) & (truth == NON_PARTICLE)))
    ensemble.validation_sensitivity = tp / (tp + fn) if tp + fn else None
    ensemble.validation_specificity = tn / (tn + fp) if tn + fp else None
    return ensemble, report


def _flatten(node: TreeNode, out: list[dict]) -> None:
    if node.is_leaf:
        out.append({"leaf": LABEL_NAMES[node.label], "counts": list(node.counts)})
    else:
        out.append({"feature": node.feature, "threshold": node.threshold})
        _flatten(node.left, out)
        _flatten(node.right, out)


def _unflatten(nodes: list[dict], pos: list[int]) -> TreeNode:
    rec = nodes[pos[0]]
    pos[0] += 1
    if "leaf" in rec:
        return TreeNode(label=LABEL_CODES[rec["leaf"]], counts=tuple(rec["counts"]))
    node = TreeNode(feature=int(rec["feature"]), threshold=float(rec["threshold"]))
    node.left = _unflatten(nodes, pos)
    node.right = _unflatten(nodes, pos)
    return node


def save_ensemble(path, ensemble: Ensemble) -> None:
    members = []
    for tree in ensemble.members:
        flat: list[dict] = []
        _flatten(tree.root, flat)
        members.append({"nodes": flat})
    doc = {
        "schema": ensemble.feature_names,
        "k": ensemble.k,
        "seed": ensemble.seed,
        "validation": {
            "sensitivity": ensemble.validation_sensitivity,
            "specificity": ensemble.validation_specificity,
        },
        "members": members,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_ensemble(path) -> Ensemble:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    n_features = len(doc["schema"])
    members = [
        DecisionTree(root=_unflatten(m["nodes"], [0]), n_features=n_features)
        for m in doc["members"]
    ]
    return Ensemble(
        members=members,
        feature_names=list(doc["schema"]),
        k=int(doc["k"]),
        seed=int(doc["seed"]),
        validation_sensitivity=doc["validation"]["sensitivity"],
        validation_specificity=doc["validation"]["specificity"],
    )
