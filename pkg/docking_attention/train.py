"""Toy discrimination task and full-batch gradient descent.

The task only separates when a model reads the docking scores: two signal
residues carry opposite embedding directions (so a mean over residues cancels
them), and the label decides which of the two gets the high interaction score.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from docking_attention.analysis import ZTestResult, two_proportion_z_test
from docking_attention.attention import VARIANTS, DaaParams, init_params
from docking_attention.errors import NonFiniteError, TrainingDiverged, ValidationError
from docking_attention.ljscore import smooth_scores, smoothing_grad_beta
from docking_attention.structures import EmbeddingMatrix, format_float
from docking_attention.synth import SplitMix64

logger = logging.getLogger(__name__)

__all__ = [
    "HistoryRow",
    "RunComparison",
    "RunMetrics",
    "ToyTask",
    "TrainConfig",
    "TrainResult",
    "compare_runs",
    "evaluate",
    "format_comparison",
    "format_history",
    "make_toy_task",
    "run_ablation_suite",
    "train_daa_classifier",
    "train_static_baseline",
]


@dataclass(frozen=True)
class ToyTask:
    embeddings: np.ndarray = field(repr=False)  # B × n × d
    scores: np.ndarray = field(repr=False)  # B × n, transformed (pre-smoothing)
    labels: np.ndarray = field(repr=False)  # B
    train_idx: np.ndarray = field(repr=False)
    test_idx: np.ndarray = field(repr=False)
    signal_residues: tuple[int, int]
    seed: int

    @property
    def n_samples(self) -> int:
        return self.labels.shape[0]

    @property
    def samples(self) -> list[tuple[EmbeddingMatrix, np.ndarray, int]]:
        return [
            (EmbeddingMatrix(e), s, int(y))
            for e, s, y in zip(self.embeddings, self.scores, self.labels)
        ]

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        idx = {"train": self.train_idx, "test": self.test_idx}[name]
        return self.embeddings[idx], self.scores[idx], self.labels[idx]

    def with_shuffled_labels(self, seed: int) -> "ToyTask":
        order = SplitMix64(seed).permutation(self.n_samples)
        return ToyTask(
            embeddings=self.embeddings,
            scores=self.scores,
            labels=self.labels[order],
            train_idx=self.train_idx,
            test_idx=self.test_idx,
            signal_residues=self.signal_residues,
            seed=self.seed,
        )


def make_toy_task(
    n_samples: int,
    n: int,
    d: int,
    seed: int,
    signal: float = 3.0,
    peak: float = 24.0,
) -> ToyTask:
    """Seeded toy task.

    Two signal residues A and B get ``+signal·u`` and ``−signal·u`` on top of
    standard-normal rows, for one unit direction ``u``. Background scores are
    uniform on (0, 1]; class 0 puts ``peak`` on A, class 1 on B. Classes are
    balanced and split half/half into train and test per class.
    """
    if n_samples < 4 or n_samples % 2:
        raise ValidationError(f"n_samples must be an even number >= 4, got {n_samples}")
    if n < 4 or d < 2:
        raise ValidationError(f"need n >= 4 and d >= 2, got n={n}, d={d}")

    stream = SplitMix64(seed)
    direction = stream.normal(d)
    direction /= np.linalg.norm(direction)
    a, b = (int(i) for i in stream.permutation(n)[:2])

    labels = np.repeat([0, 1], n_samples // 2)[stream.permutation(n_samples)]
    embeddings = stream.normal((n_samples, n, d))
    embeddings[:, a] += signal * direction
    embeddings[:, b] -= signal * direction

    scores = stream.uniform((n_samples, n))
    hot = np.where(labels == 0, a, b)
    scores[np.arange(n_samples), hot] += peak

    train, test = [], []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        members = members[stream.permutation(members.size)]
        train.append(members[: members.size // 2])
        test.append(members[members.size // 2 :])

    logger.debug("toy task seed=%d: signal residues %d, %d", seed, a + 1, b + 1)
    return ToyTask(
        embeddings=embeddings,
        scores=scores,
        labels=labels,
        train_idx=np.sort(np.concatenate(train)),
        test_idx=np.sort(np.concatenate(test)),
        signal_residues=(a + 1, b + 1),
        seed=seed,
    )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    steps: int
    seed: int
    l2: float = 0.0
    d_h: int = 4
    d_v: int = 4

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.steps < 0:
            raise ValidationError(f"steps must be >= 0, got {self.steps}")
        if self.l2 < 0:
            raise ValidationError(f"l2 must be >= 0, got {self.l2}")


@dataclass(frozen=True)
class HistoryRow:
    step: int
    loss: float
    train_acc: float
    test_acc: float


@dataclass(frozen=True)
class RunMetrics:
    train_correct: int
    train_total: int
    test_correct: int
    test_total: int

    @property
    def test_accuracy(self) -> float:
        return self.test_correct / self.test_total

    @property
    def train_accuracy(self) -> float:
        return self.train_correct / self.train_total


@dataclass(frozen=True)
class TrainResult:
    name: str
    params: DaaParams | None
    head_weights: np.ndarray = field(repr=False)
    head_bias: float
    history: list[HistoryRow] = field(repr=False)
    metrics: RunMetrics


def _logistic_loss(z: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _run(name, features_fn, grad_fn, state, task, config) -> TrainResult:
    """Shared gradient-descent loop.

    ``features_fn(state, E, s)`` returns pooled features; ``grad_fn`` returns the
    state after one full-batch step.
    """
    history = []
    for step in range(config.steps + 1):
        E, s, y = task.split("train")
        try:
            z = features_fn(state, E, s) @ state["w"] + state["b"]
        except NonFiniteError:
            raise TrainingDiverged(step, float("nan")) from None
        loss = _logistic_loss(z, y) + 0.5 * config.l2 * _l2_norm(state)
        if not math.isfinite(loss):
            raise TrainingDiverged(step, loss)

        train_correct = int(np.sum((z > 0) == (y == 1)))
        test_correct = _correct(features_fn, state, task, "test")
        history.append(
            HistoryRow(
                step=step,
                loss=loss,
                train_acc=train_correct / y.size,
                test_acc=test_correct / task.test_idx.size,
            )
        )
        if step == config.steps:
            break
        try:
            state = grad_fn(state, E, s, y, z)
        except NonFiniteError:
            raise TrainingDiverged(step + 1, float("nan")) from None

    logger.info(
        "%s: loss %.4f -> %.4f, test accuracy %.3f",
        name, history[0].loss, history[-1].loss, history[-1].test_acc,
    )
    metrics = RunMetrics(
        train_correct=train_correct,
        train_total=task.train_idx.size,
        test_correct=test_correct,
        test_total=task.test_idx.size,
    )
    return TrainResult(
        name=name,
        params=state.get("params"),
        head_weights=state["w"],
        head_bias=float(state["b"]),
        history=history,
        metrics=metrics,
    )


def _l2_norm(state: dict) -> float:
    total = float(np.sum(state["w"] ** 2))
    params = state.get("params")
    if params is not None:
        total += sum(float(np.sum(a**2)) for a in (params.w_q, params.w_k, params.w_v, params.q_pool))
    return total


def _correct(features_fn, state, task: ToyTask, split: str) -> int:
    E, s, y = task.split(split)
    z = features_fn(state, E, s) @ state["w"] + state["b"]
    return int(np.sum((z > 0) == (y == 1)))


def _init_head(size: int) -> np.ndarray:
    # zero head: every step-0 prediction is class 0
    return np.zeros(size)


def train_daa_classifier(
    task: ToyTask, config: TrainConfig, variant: str = "full"
) -> TrainResult:
    """Logistic head on top of a pooling head, trained jointly (γ and β included)."""
    head = VARIANTS[variant]
    d = task.embeddings.shape[-1]
    state = {
        "params": init_params(d, config.d_h, config.d_v, seed=config.seed),
        "w": _init_head(config.d_v),
        "b": 0.0,
    }
    lr, l2 = config.learning_rate, config.l2

    def features(st, E, s):
        return head.forward(E, smooth_scores(s, st["params"].beta), st["params"]).representation

    def step(st, E, s, y, z):
        params: DaaParams = st["params"]
        dz = (_sigmoid(z) - y) / y.size
        rep = features(st, E, s)
        s_hat = smooth_scores(s, params.beta)
        grads = head.backward(E, s_hat, params, np.outer(dz, st["w"]))
        d_beta = smoothing_grad_beta(s, grads.s_hat)
        return {
            "params": params.replace(
                w_q=params.w_q - lr * (grads.w_q + l2 * params.w_q),
                w_k=params.w_k - lr * (grads.w_k + l2 * params.w_k),
                w_v=params.w_v - lr * (grads.w_v + l2 * params.w_v),
                q_pool=params.q_pool - lr * (grads.q_pool + l2 * params.q_pool),
                gamma=params.gamma - lr * grads.gamma,
                beta=min(1.0, max(0.0, params.beta - lr * d_beta)),
            ),
            "w": st["w"] - lr * (rep.T @ dz + l2 * st["w"]),
            "b": st["b"] - lr * float(np.sum(dz)),
        }

    return _run(variant, features, step, state, task, config)


def train_static_baseline(task: ToyTask, config: TrainConfig) -> TrainResult:
    """Logistic head on mean-pooled embeddings; scores are ignored."""
    d = task.embeddings.shape[-1]
    state = {"w": _init_head(d), "b": 0.0}
    lr, l2 = config.learning_rate, config.l2

    def features(st, E, s):
        return E.mean(axis=-2)

    def step(st, E, s, y, z):
        dz = (_sigmoid(z) - y) / y.size
        return {
            "w": st["w"] - lr * (features(st, E, s).T @ dz + l2 * st["w"]),
            "b": st["b"] - lr * float(np.sum(dz)),
        }

    return _run("static", features, step, state, task, config)


def run_ablation_suite(task: ToyTask, config: TrainConfig) -> dict[str, TrainResult]:
    """Full DAA, both attention ablations and the static baseline on one task."""
    results = {name: train_daa_classifier(task, config, variant=name) for name in VARIANTS}
    results["static"] = train_static_baseline(task, config)
    return results


@dataclass(frozen=True)
class RunComparison:
    name_a: str
    name_b: str
    accuracy_delta: float
    z_test: ZTestResult


def compare_runs(a: TrainResult, b: TrainResult) -> RunComparison:
    ma, mb = a.metrics, b.metrics
    if ma.test_total != mb.test_total:
        raise ValidationError(
            f"runs were evaluated on different test sets ({ma.test_total} vs {mb.test_total})"
        )
    return RunComparison(
        name_a=a.name,
        name_b=b.name,
        accuracy_delta=ma.test_accuracy - mb.test_accuracy,
        z_test=two_proportion_z_test(ma.test_correct, ma.test_total, mb.test_correct, mb.test_total),
    )


def format_history(result: TrainResult) -> str:
    lines = [f"# run {result.name}", "step\tloss\ttrain_acc\ttest_acc"]
    lines += [
        f"{row.step}\t{format_float(row.loss)}\t{format_float(row.train_acc)}\t{format_float(row.test_acc)}"
        for row in result.history
    ]
    return "\n".join(lines) + "\n"


def format_comparison(cmp: RunComparison) -> str:
    z = cmp.z_test
    return "\t".join(
        [
            cmp.name_a,
            cmp.name_b,
            format_float(cmp.accuracy_delta),
            format_float(z.z),
            format_float(z.p_value),
            "significant" if z.significant else "not_significant",
        ]
    )


def evaluate(result: TrainResult, task: ToyTask, split: str = "test") -> tuple[int, int]:
    """Correct predictions and sample count of a trained run on one split."""
    E, s, y = task.split(split)
    if result.params is None:
        features = E.mean(axis=-2)
    else:
        features = VARIANTS[result.name].forward(
            E, smooth_scores(s, result.params.beta), result.params
        ).representation
    z = features @ result.head_weights + result.head_bias
    return int(np.sum((z > 0) == (y == 1))), int(y.size)
