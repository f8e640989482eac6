"""Three-layer dense binary classifier trained with Adam and early stopping.

Architecture: ``input -> relu(width//4) -> dropout -> relu(width//4) -> dropout
-> sigmoid(1)``, with L2 on the two hidden weight matrices and binary
cross-entropy loss. Arithmetic is float64 throughout.
"""
from __future__ import annotations

import copy
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .encode import FeatureMatrix
from .prng import Prng

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
BCE_EPS = 1e-7
DESK_BATCH = 4096
DESK_ROWS = 100_000


class CheckpointError(ValueError):
    pass


@dataclass
class TrainConfig:
    max_epochs: int = 1000
    # None: 100000 (as published) unless the training split is smaller than
    # DESK_ROWS, in which case DESK_BATCH.
    batch_size: int | None = None
    l2_lambda: float = 0.0005
    dropout_rate: float = 0.2
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    min_delta: float = 0.001
    patience: int = 25
    restore_best: bool = True
    test_fraction: Fraction = Fraction(1, 3)
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.test_fraction = Fraction(self.test_fraction)

    def effective_batch_size(self, n_rows: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return DESK_BATCH if n_rows < DESK_ROWS else 100_000

    def to_json(self) -> dict:
        d = asdict(self)
        d["test_fraction"] = f"{self.test_fraction.numerator}/{self.test_fraction.denominator}"
        return d


@dataclass
class MlpModel:
    weights: list[np.ndarray]  # each (out, in)
    biases: list[np.ndarray]
    input_width: int
    l2_lambda: float = 0.0005
    dropout_rate: float = 0.2
    activations: tuple[str, ...] = ("relu", "relu", "sigmoid")

    @property
    def params(self) -> list[np.ndarray]:
        """Flat parameter list ``[W1, b1, W2, b2, W3, b3]`` (views, not copies)."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def copy(self) -> "MlpModel":
        return copy.deepcopy(self)


@dataclass
class TrainReport:
    loss_history: list[float] = field(default_factory=list)
    accuracy_history: list[float] = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0
    stopped_early: bool = False
    in_sample_accuracy: float = float("nan")
    out_of_sample_accuracy: float = float("nan")
    confusion: list[list[float]] = field(default_factory=list)
    n_train: int = 0
    n_test: int = 0
    batch_size: int = 0

    def to_json(self) -> dict:
        return asdict(self)


def hidden_width(input_width: int) -> int:
    return input_width // 4


def init_model(input_width: int, cfg: TrainConfig | None = None, rng: np.random.Generator | Prng | int | None = None) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    cfg = cfg or TrainConfig()
    if input_width < 4:
        raise ValueError("input_width must be >= 4")
    gen = _numpy_rng(rng if rng is not None else cfg.seed)
    h = hidden_width(input_width)
    shapes = [(h, input_width), (h, h), (1, h)]
    weights, biases = [], []
    for fan_out, fan_in in shapes:
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(gen.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights, biases, input_width, cfg.l2_lambda, cfg.dropout_rate)


def _numpy_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, Prng):
        return rng.numpy_generator()
    return Prng(int(rng)).numpy_generator()


def _sigmoid(z):
    # Split by sign to avoid overflow in exp.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(model: MlpModel, x, train_mode: bool = False, rng: np.random.Generator | None = None):
    """Probabilities for a batch (or a single row). Returns ``(probs, cache)``.

    In train mode inverted dropout is applied after each hidden layer with masks
    drawn from ``rng``; inference is deterministic.
    """
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != model.input_width:
        raise ValueError(f"width mismatch: model expects {model.input_width}, got {X.shape[1]}")
    rate = model.dropout_rate if train_mode else 0.0
    if rate > 0 and rng is None:
        raise ValueError("train_mode with dropout needs an rng")
    acts = [X]
    pre = []
    masks = []
    a = X
    n_layers = len(model.weights)
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ W.T + b
        pre.append(z)
        if i < n_layers - 1:
            a = np.maximum(z, 0.0)
            if rate > 0:
                mask = (rng.random(a.shape) >= rate) / (1.0 - rate)
                a = a * mask
            else:
                mask = None
            masks.append(mask)
        else:
            a = _sigmoid(z)
        acts.append(a)
    probs = acts[-1][:, 0]
    cache = {"acts": acts, "pre": pre, "masks": masks, "probs": probs}
    return (probs[0] if single else probs), cache


def loss(model: MlpModel, y, probs) -> float:
    """Mean clipped binary cross-entropy plus L2 on the hidden weight matrices."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    p = np.clip(np.asarray(probs, dtype=np.float64).reshape(-1), BCE_EPS, 1.0 - BCE_EPS)
    bce = -np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    l2 = model.l2_lambda * sum(float(np.sum(W * W)) for W in model.weights[:-1])
    return float(bce + l2)


def backward(model: MlpModel, y, cache) -> list[np.ndarray]:
    """Gradients of :func:`loss`, ordered like ``model.params``."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    acts, pre, masks, p = cache["acts"], cache["pre"], cache["masks"], cache["probs"]
    B = y.shape[0]
    # d(BCE)/dz for a sigmoid output; zero where the clip is active.
    live = (p > BCE_EPS) & (p < 1.0 - BCE_EPS)
    delta = ((p - y) * live / B)[:, None]
    n_layers = len(model.weights)
    grads: list[np.ndarray] = [None] * (2 * n_layers)
    for i in range(n_layers - 1, -1, -1):
        W = model.weights[i]
        dW = delta.T @ acts[i]
        if i < n_layers - 1:
            dW = dW + 2.0 * model.l2_lambda * W
        grads[2 * i] = dW
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            da = delta @ W
            if masks[i - 1] is not None:
                da = da * masks[i - 1]
            delta = da * (pre[i - 1] > 0)
    return grads


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(params, grads, state: AdamState, t: int, cfg: TrainConfig):
    """One bias-corrected Adam update, in place. Returns ``(params, state)``."""
    if t < 1:
        raise ValueError("t must be >= 1")
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.epsilon)
    return params, state


def confusion_matrix(y_true, y_pred) -> np.ndarray:
    """Normalised 2x2 matrix; rows are actual (T, F), columns predicted (T, F)."""
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    n = y_true.size
    tp = np.sum(y_true & y_pred)
    fn = np.sum(y_true & ~y_pred)
    fp = np.sum(~y_true & y_pred)
    tn = np.sum(~y_true & ~y_pred)
    return np.array([[tp, fn], [fp, tn]], dtype=np.float64) / n


def predict_proba(model: MlpModel, X) -> np.ndarray:
    probs, _ = forward(model, np.atleast_2d(X), train_mode=False)
    return probs


def classify(model: MlpModel, x) -> tuple[int, float]:
    """``(label, prob)`` with label 1 iff prob > 0.5."""
    prob = float(forward(model, np.asarray(x).reshape(-1), train_mode=False)[0])
    return int(prob > 0.5), prob


def evaluate(model: MlpModel, fm_or_X, y=None) -> tuple[float, np.ndarray]:
    """Accuracy and normalised confusion matrix."""
    if isinstance(fm_or_X, FeatureMatrix):
        X, y = fm_or_X.values, fm_or_X.labels
    else:
        X = fm_or_X
    X = np.asarray(X)
    if X.shape[0] == 0:
        raise ValueError("empty matrix")
    pred = predict_proba(model, X) > 0.5
    cm = confusion_matrix(y, pred)
    return float(cm[0, 0] + cm[1, 1]), cm


def split_rows(n_rows: int, test_fraction: Fraction) -> int:
    """Number of training rows: the first ``n - ceil(n * test_fraction)``."""
    n_test = -(-n_rows * test_fraction.numerator // test_fraction.denominator)
    return n_rows - n_test


def train(fm: FeatureMatrix, cfg: TrainConfig | None = None, checkpoint_path: str | Path | None = None):
    """Train on the first rows, test on the rest (no reshuffle). Returns ``(model, report)``.

    The monitored metric is the training accuracy accumulated over the
    epoch's mini-batches (train-mode predictions). Training stops after
    ``patience`` epochs without an improvement larger than ``min_delta`` and
    the best epoch's weights are restored.
    """
    cfg = cfg or TrainConfig()
    X = np.asarray(fm.values, dtype=np.float64)
    y = np.asarray(fm.labels, dtype=np.float64)
    n = X.shape[0]
    if n < 10:
        raise ValueError("need at least 10 rows")
    n_train = split_rows(n, cfg.test_fraction)
    if n_train >= n or n_train < 1:
        raise ValueError("degenerate train/test split")
    Xtr, ytr, Xte, yte = X[:n_train], y[:n_train], X[n_train:], y[n_train:]

    gen = Prng(cfg.seed).numpy_generator()
    model = init_model(X.shape[1], cfg, gen)
    params = model.params
    state = AdamState.zeros_like(params)
    batch = cfg.effective_batch_size(n_train)
    report = TrainReport(n_train=n_train, n_test=n - n_train, batch_size=batch)

    best_acc = -np.inf
    best_params = [p.copy() for p in params]
    wait = 0
    t = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = gen.permutation(n_train)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n_train, batch):
            idx = order[start:start + batch]
            xb, yb = Xtr[idx], ytr[idx]
            probs, cache = forward(model, xb, train_mode=True, rng=gen)
            loss_sum += loss(model, yb, probs) * len(idx)
            correct += int(np.sum((probs > 0.5) == (yb > 0.5)))
            grads = backward(model, yb, cache)
            t += 1
            adam_step(params, grads, state, t, cfg)
        ep_loss = loss_sum / n_train
        ep_acc = correct / n_train
        report.loss_history.append(ep_loss)
        report.accuracy_history.append(ep_acc)
        report.epochs_run = epoch
        log.debug("epoch %d/%d - loss: %.4f - accuracy: %.4f", epoch, cfg.max_epochs, ep_loss, ep_acc)
        if ep_acc - cfg.min_delta > best_acc:
            best_acc = ep_acc
            best_params = [p.copy() for p in params]
            report.best_epoch = epoch
            wait = 0
        else:
            wait += 1
            if wait >= cfg.patience:
                report.stopped_early = True
                log.info("epoch %d: early stopping (best epoch %d)", epoch, report.best_epoch)
                break
    if cfg.restore_best:
        for p, best in zip(params, best_params):
            p[...] = best

    report.in_sample_accuracy, _ = evaluate(model, Xtr, ytr)
    acc, cm = evaluate(model, Xte, yte)
    report.out_of_sample_accuracy = acc
    report.confusion = cm.tolist()
    if checkpoint_path is not None:
        save_checkpoint(model, checkpoint_path, cfg=cfg, base=fm.base)
    return model, report


# -- checkpoints ----------------------------------------------------------


def save_checkpoint(model: MlpModel, path: str | Path, cfg: TrainConfig | None = None, base=None) -> None:
    """JSON checkpoint: shapes plus row-major weights as round-trippable floats."""
    layers = []
    for W, b, act in zip(model.weights, model.biases, model.activations):
        layers.append({
            "shape": list(W.shape),
            "activation": act,
            "weights": [float(v) for v in W.ravel(order="C")],
            "bias": [float(v) for v in b],
        })
    doc = {
        "format": "mlfactor-mlp",
        "version": CHECKPOINT_VERSION,
        "input_width": model.input_width,
        "l2_lambda": model.l2_lambda,
        "dropout_rate": model.dropout_rate,
        "base": None if base is None else f"{Fraction(base).numerator}/{Fraction(base).denominator}",
        "train_config": None if cfg is None else cfg.to_json(),
        "layers": layers,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_checkpoint(path: str | Path) -> MlpModel:
    model, _ = load_checkpoint_with_meta(path)
    return model


def load_checkpoint_with_meta(path: str | Path) -> tuple[MlpModel, dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != "mlfactor-mlp":
        raise CheckpointError(f"{path}: not an mlfactor checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {doc.get('version')}")
    weights, biases, acts = [], [], []
    try:
        for layer in doc["layers"]:
            out_dim, in_dim = layer["shape"]
            W = np.array(layer["weights"], dtype=np.float64).reshape(out_dim, in_dim)
            b = np.array(layer["bias"], dtype=np.float64).reshape(out_dim)
            weights.append(W)
            biases.append(b)
            acts.append(layer["activation"])
        model = MlpModel(weights, biases, int(doc["input_width"]), float(doc["l2_lambda"]),
                         float(doc["dropout_rate"]), tuple(acts))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from exc
    if weights[0].shape[1] != model.input_width:
        raise CheckpointError(f"{path}: input width does not match first layer")
    return model, doc
