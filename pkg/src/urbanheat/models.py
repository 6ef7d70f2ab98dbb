"""Regression trees and tree ensembles mapping blurred volume to temperature.

Plain CART with the squared-error criterion underneath; on top, a bagged
forest (bootstrap resamples, per-split feature subsampling, mean of tree
outputs) and squared-error gradient boosting (leaf-mean trees fit to
residuals, scaled by a learning rate).  No second-order terms, leaf
regularization or early stopping.

Everything is deterministic given (data, params, seed): per-tree generators
are derived from the master seed and the tree index, and split ties resolve
to the lowest feature index, then the lowest threshold.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

MODEL_FORMAT = "tree-ensemble"
MODEL_VERSION = 1


@dataclass
class TrainingSet:
    """Rows of (feature vector, target temperature, source city tag)."""

    features: np.ndarray
    targets: np.ndarray
    cities: list[str]

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        self.targets = np.asarray(self.targets, dtype=np.float64)
        n = self.features.shape[0]
        if n < 1:
            raise ValueError("training set needs at least one row")
        if self.targets.shape != (n,) or len(self.cities) != n:
            raise ValueError("features, targets and cities must have equal row counts")
        if not (np.all(np.isfinite(self.features)) and np.all(np.isfinite(self.targets))):
            raise ValueError("training set contains non-finite values")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def arity(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class RFParams:
    n_trees: int = 100_000
    max_depth: int = 3
    min_samples_split: int = 4
    min_samples_leaf: int = 2
    max_features: str | int | None = "sqrt"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")
        if self.min_samples_leaf < 1 or self.min_samples_split < 2:
            raise ValueError("min_samples_leaf >= 1 and min_samples_split >= 2 required")


@dataclass(frozen=True)
class GBParams:
    n_trees: int = 300_000
    max_depth: int = 3
    learning_rate: float = 0.000003
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class AugmentParams:
    n_samples: int = 100
    noise_level: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 0 or self.noise_level < 0:
            raise ValueError("n_samples and noise_level must be >= 0")


@dataclass
class TreeNode:
    """Binary split node; leaves carry only ``value``."""

    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None


def augment(ts: TrainingSet, p: AugmentParams) -> TrainingSet:
    """Originals plus n_samples noisy copies per row, targets untouched.

    The noise is zero-mean Gaussian per feature with standard deviation
    noise_level * (that feature's std over ts), which keeps 0.01 meaningful
    against m^3-scale volumes.
    """
    if p.n_samples == 0:
        return TrainingSet(ts.features.copy(), ts.targets.copy(), list(ts.cities))
    rng = np.random.default_rng(p.seed)
    scale = p.noise_level * ts.features.std(axis=0)
    feats = [ts.features]
    targets = [ts.targets]
    cities = list(ts.cities)
    for i in range(ts.n_rows):
        noise = rng.normal(0.0, 1.0, size=(p.n_samples, ts.arity)) * scale
        feats.append(ts.features[i] + noise)
        targets.append(np.full(p.n_samples, ts.targets[i]))
        cities.extend([ts.cities[i]] * p.n_samples)
    return TrainingSet(np.vstack(feats), np.concatenate(targets), cities)


def _best_split(X, y, feature_indices, min_leaf):
    """Best squared-error split over the given features.

    Returns (gain, feature, threshold) or None.  Candidate thresholds are
    midpoints between consecutive distinct feature values; strict comparisons
    keep the lowest feature index and lowest threshold among equal gains.
    """
    n = len(y)
    total = y.sum()
    total_sq = (y**2).sum()
    parent_sse = total_sq - total**2 / n
    best = None
    for f in sorted(feature_indices):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys**2)
        left_n = np.arange(1, n)
        ok = (xs[:-1] < xs[1:]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
        if not ok.any():
            continue
        idx = np.nonzero(ok)[0]
        ln = left_n[idx].astype(np.float64)
        rn = n - ln
        left_sse = csq[idx] - csum[idx] ** 2 / ln
        right_sse = (total_sq - csq[idx]) - (total - csum[idx]) ** 2 / rn
        gains = parent_sse - left_sse - right_sse
        k = int(np.argmax(gains))
        gain = float(gains[k])
        if gain > 0.0 and (best is None or gain > best[0]):
            thr = float(0.5 * (xs[idx[k]] + xs[idx[k] + 1]))
            best = (gain, int(f), thr)
    return best


def _grow(X, y, depth, max_depth, min_split, min_leaf, n_sub, rng):
    n, arity = X.shape
    if depth >= max_depth or n < min_split or np.all(y == y[0]):
        return TreeNode(value=float(y.mean()))
    if n_sub < arity:
        feats = rng.choice(arity, size=n_sub, replace=False)
    else:
        feats = range(arity)
    best = _best_split(X, y, feats, min_leaf)
    if best is None:
        return TreeNode(value=float(y.mean()))
    _, f, thr = best
    go_left = X[:, f] <= thr
    return TreeNode(
        feature=f,
        threshold=thr,
        left=_grow(X[go_left], y[go_left], depth + 1, max_depth, min_split, min_leaf, n_sub, rng),
        right=_grow(
            X[~go_left], y[~go_left], depth + 1, max_depth, min_split, min_leaf, n_sub, rng
        ),
    )


def _resolve_max_features(rule, arity: int) -> int:
    if rule is None:
        return arity
    if rule == "sqrt":
        return int(np.ceil(np.sqrt(arity)))
    k = int(rule)
    if not 1 <= k <= arity:
        raise ValueError(f"max_features {rule} out of range for arity {arity}")
    return k


def fit_tree(
    features,
    targets,
    *,
    max_depth: int = 3,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features: str | int | None = None,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> TreeNode:
    """Greedy CART regression tree; leaf values are target means.

    Splits require a strict squared-error reduction; otherwise the node
    becomes a leaf.
    """
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(targets, dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(seed)
    n_sub = _resolve_max_features(max_features, X.shape[1])
    return _grow(X, y, 0, max_depth, min_samples_split, min_samples_leaf, n_sub, rng)


def predict_tree(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.float64)
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if idx.size == 0:
            continue
        if nd.is_leaf:
            out[idx] = nd.value
        else:
            left = X[idx, nd.feature] <= nd.threshold
            stack.append((nd.left, idx[left]))
            stack.append((nd.right, idx[~left]))
    return out


@dataclass
class ForestModel:
    trees: list[TreeNode]
    params: RFParams
    feature_arity: int
    training_cities: list[str] = field(default_factory=list)

    kind = "rf"

    def predict(self, X: np.ndarray) -> np.ndarray:
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for t in self.trees:
            acc += predict_tree(t, X)
        return acc / len(self.trees)


@dataclass
class BoostedModel:
    base: float
    learning_rate: float
    trees: list[TreeNode]
    params: GBParams
    feature_arity: int
    training_cities: list[str] = field(default_factory=list)
    loss_curve: np.ndarray | None = None  # training artifact, not serialized

    kind = "gbt"

    def predict(self, X: np.ndarray) -> np.ndarray:
        acc = np.full(X.shape[0], self.base, dtype=np.float64)
        for t in self.trees:
            acc += self.learning_rate * predict_tree(t, X)
        return acc


def _tree_rng(master_seed: int, i: int) -> np.random.Generator:
    # Per-tree generator derived from (master, index); parallel fitting with
    # these seeds reproduces sequential results exactly.
    return np.random.default_rng([master_seed, i])


def fit_random_forest(
    ts: TrainingSet, p: RFParams = RFParams(), *, bootstrap: bool = True
) -> ForestModel:
    """Bagged forest: each tree sees a same-size bootstrap resample.

    Predictions average the tree outputs and therefore always stay within the
    training target range.
    """
    n_sub = _resolve_max_features(p.max_features, ts.arity)
    trees = []
    for i in range(p.n_trees):
        rng = _tree_rng(p.seed, i)
        if bootstrap:
            idx = rng.integers(0, ts.n_rows, size=ts.n_rows)
            X, y = ts.features[idx], ts.targets[idx]
        else:
            X, y = ts.features, ts.targets
        trees.append(
            _grow(X, y, 0, p.max_depth, p.min_samples_split, p.min_samples_leaf, n_sub, rng)
        )
    return ForestModel(
        trees=trees,
        params=p,
        feature_arity=ts.arity,
        training_cities=sorted(set(ts.cities)),
    )


def fit_gradient_boosting(ts: TrainingSet, p: GBParams = GBParams()) -> BoostedModel:
    """Squared-error boosting: base prediction plus shrunken residual trees.

    With leaf-mean trees and a learning rate in (0, 2) each stage cannot
    increase the training loss; the recorded loss curve is checked for that
    as the model fits.
    """
    X, y = ts.features, ts.targets
    base = float(y.mean())
    pred = np.full(ts.n_rows, base, dtype=np.float64)
    losses = [float(((y - pred) ** 2).mean())]
    trees = []
    for i in range(p.n_trees):
        rng = _tree_rng(p.seed, i)
        tree = _grow(X, y - pred, 0, p.max_depth, 2, 1, ts.arity, rng)
        pred += p.learning_rate * predict_tree(tree, X)
        loss = float(((y - pred) ** 2).mean())
        if loss > losses[-1] * (1 + 1e-9) + 1e-12:
            raise RuntimeError(
                f"training loss increased at iteration {i}: {losses[-1]} -> {loss}"
            )
        losses.append(loss)
        trees.append(tree)
    return BoostedModel(
        base=base,
        learning_rate=p.learning_rate,
        trees=trees,
        params=p,
        feature_arity=ts.arity,
        training_cities=sorted(set(ts.cities)),
        loss_curve=np.array(losses),
    )


def predict(model, features) -> np.ndarray | float:
    """Ensemble prediction; accepts one feature vector or an (N, F) matrix."""
    X = np.asarray(features, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.feature_arity:
        raise ValueError(
            f"model expects {model.feature_arity} features, got {X.shape[1]}"
        )
    out = model.predict(X)
    return float(out[0]) if single else out


def _node_to_dict(node: TreeNode):
    if node.is_leaf:
        return {"v": node.value}
    return {
        "f": node.feature,
        "t": node.threshold,
        "l": _node_to_dict(node.left),
        "r": _node_to_dict(node.right),
    }


def _node_from_dict(d) -> TreeNode:
    if "v" in d:
        return TreeNode(value=d["v"])
    return TreeNode(
        feature=d["f"],
        threshold=d["t"],
        left=_node_from_dict(d["l"]),
        right=_node_from_dict(d["r"]),
    )


def _model_payload(model) -> dict:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "type": model.kind,
        "feature_arity": model.feature_arity,
        "training_cities": model.training_cities,
        "params": {
            k: getattr(model.params, k) for k in model.params.__dataclass_fields__
        },
        "trees": [_node_to_dict(t) for t in model.trees],
    }
    if model.kind == "gbt":
        payload["base"] = model.base
        payload["learning_rate"] = model.learning_rate
    return payload


def serialize_model(model) -> str:
    """Canonical JSON text: key order, separators and float repr are fixed."""
    return json.dumps(_model_payload(model), sort_keys=True, separators=(",", ":")) + "\n"


def model_id(model) -> str:
    """Stable short identifier: hash of the canonical serialization."""
    return hashlib.sha256(serialize_model(model).encode("utf-8")).hexdigest()[:12]


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(serialize_model(model), encoding="utf-8")


def load_model(path: str | Path):
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: truncated or invalid model file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a {MODEL_FORMAT} model file")
    if payload.get("version") != MODEL_VERSION:
        raise DataError(
            f"{path}: unsupported model version {payload.get('version')!r}"
        )
    trees = [_node_from_dict(t) for t in payload["trees"]]
    if payload["type"] == "rf":
        return ForestModel(
            trees=trees,
            params=RFParams(**payload["params"]),
            feature_arity=payload["feature_arity"],
            training_cities=payload["training_cities"],
        )
    if payload["type"] == "gbt":
        return BoostedModel(
            base=payload["base"],
            learning_rate=payload["learning_rate"],
            trees=trees,
            params=GBParams(**payload["params"]),
            feature_arity=payload["feature_arity"],
            training_cities=payload["training_cities"],
        )
    raise DataError(f"{path}: unknown model type {payload['type']!r}")


def write_training_csv(ts: TrainingSet, path: str | Path) -> None:
    """CSV with header feature_0,...,target,city; floats written exactly."""
    cols = [f"feature_{i}" for i in range(ts.arity)] + ["target", "city"]
    lines = [",".join(cols)]
    for i in range(ts.n_rows):
        feats = [repr(float(v)) for v in ts.features[i]]
        lines.append(",".join(feats + [repr(float(ts.targets[i])), ts.cities[i]]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_training_csv(path: str | Path) -> TrainingSet:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError(f"{path}: empty training file")
    header = lines[0].split(",")
    if len(header) < 3 or header[-2:] != ["target", "city"]:
        raise DataError(f"{path}: expected header feature_0,...,target,city")
    arity = len(header) - 2
    feats, targets, cities = [], [], []
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != arity + 2:
            raise DataError(f"{path}:{ln}: expected {arity + 2} columns, got {len(parts)}")
        feats.append([float(v) for v in parts[:arity]])
        targets.append(float(parts[arity]))
        cities.append(parts[arity + 1])
    return TrainingSet(np.array(feats), np.array(targets), cities)
