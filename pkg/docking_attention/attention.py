"""Docking-aware attention pooling.

A single learned pooling query attends over the residues of one protein:

    query  = q_pool · W_q                      (d_h)
    keys   = E · W_k                           (n × d_h)
    values = E · W_v                           (n × d_v)
    logits = (keys · query + γ ŝ) / √d_h       (n)
    p_M    = softmax(logits) · values          (d_v)

The ablations differ only in which of the two logit terms they keep. Every
function accepts extra leading axes on ``E`` and ``ŝ`` so a whole batch of
samples can be pooled at once; gradients are summed over the batch.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np

from docking_attention.errors import (
    NonFiniteError,
    ParseError,
    ValidationError,
)
from docking_attention.structures import EmbeddingMatrix, format_float
from docking_attention.synth import SplitMix64

logger = logging.getLogger(__name__)

__all__ = [
    "DaaGradients",
    "DaaOutput",
    "DaaParams",
    "DockingOnly",
    "FullDaa",
    "GradCheckReport",
    "StandardAttention",
    "VARIANTS",
    "daa_backward",
    "daa_forward",
    "docking_only",
    "format_params",
    "grad_check",
    "init_params",
    "multi_head_forward",
    "parse_params",
    "standard_attention",
]

PARAM_BLOCKS = ("W_q", "W_k", "W_v", "q_pool")
GRAD_TOLERANCE = 1e-4


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(name)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DaaParams:
    w_q: np.ndarray = field(repr=False)
    w_k: np.ndarray = field(repr=False)
    w_v: np.ndarray = field(repr=False)
    q_pool: np.ndarray = field(repr=False)
    gamma: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        for name in ("w_q", "w_k", "w_v", "q_pool"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), name))
        d = self.q_pool.shape[0] if self.q_pool.ndim == 1 else -1
        if d < 1:
            raise ValidationError("q_pool must be a non-empty vector")
        for name in ("w_q", "w_k", "w_v"):
            arr = getattr(self, name)
            if arr.ndim != 2 or arr.shape[0] != d or arr.shape[1] < 1:
                raise ValidationError(f"{name} has shape {arr.shape}, expected ({d}, >=1)")
        if self.w_q.shape != self.w_k.shape:
            raise ValidationError(f"W_q {self.w_q.shape} and W_k {self.w_k.shape} differ")
        if not math.isfinite(self.gamma):
            raise NonFiniteError("gamma")
        if not 0.0 <= self.beta <= 1.0:
            raise ValidationError(f"beta must lie in [0, 1], got {self.beta}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def d(self) -> int:
        return self.q_pool.shape[0]

    @property
    def d_h(self) -> int:
        return self.w_q.shape[1]

    @property
    def d_v(self) -> int:
        return self.w_v.shape[1]

    def replace(self, **changes) -> "DaaParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DaaOutput:
    representation: np.ndarray
    weights: np.ndarray
    logits: np.ndarray


@dataclass(frozen=True)
class DaaGradients:
    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    q_pool: np.ndarray
    gamma: float
    s_hat: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: np.asarray(getattr(self, f.name)) for f in fields(self)}


def _check_finite(values: np.ndarray, stage: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(stage)
    return values


def _as_array(E) -> np.ndarray:
    return E.values if isinstance(E, EmbeddingMatrix) else np.asarray(E, dtype=np.float64)


class AttentionVariant(ABC):
    """Which logit terms a pooling head keeps.

    ``scores`` combines the query–key term and the docking bias γŝ before the
    √d_h scaling; ``score_grads`` routes the gradient of the combined score back
    to each term (``None`` for a term the variant ignores).
    """

    name: str

    @abstractmethod
    def scores(self, query_key: np.ndarray, bias: np.ndarray) -> np.ndarray:
        raise NotImplementedError()

    @abstractmethod
    def score_grads(self, d_scores: np.ndarray) -> tuple[np.ndarray | None, np.ndarray | None]:
        raise NotImplementedError()

    def forward(self, E, s_hat, params: DaaParams) -> DaaOutput:
        return self._forward(_as_array(E), s_hat, params)[0]

    def _validate(self, E: np.ndarray, s_hat, params: DaaParams) -> np.ndarray:
        if E.ndim < 2 or E.shape[-1] != params.d:
            raise ValidationError(
                f"dimension mismatch: embeddings {E.shape} vs params d={params.d}"
            )
        s_hat = np.asarray(s_hat, dtype=np.float64)
        if s_hat.shape != E.shape[:-1]:
            raise ValidationError(
                f"dimension mismatch: scores {s_hat.shape} vs embeddings {E.shape[:-1]}"
            )
        return s_hat

    def _forward(self, E: np.ndarray, s_hat, params: DaaParams):
        s_hat = self._validate(E, s_hat, params)
        query = params.q_pool @ params.w_q
        keys = _check_finite(E @ params.w_k, "keys")
        values = _check_finite(E @ params.w_v, "values")
        query_key = keys @ query
        scores = self.scores(query_key, params.gamma * s_hat)
        logits = _check_finite(scores / math.sqrt(params.d_h), "logits")

        shifted = np.exp(logits - logits.max(axis=-1, keepdims=True))
        weights = shifted / shifted.sum(axis=-1, keepdims=True)
        representation = _check_finite(
            np.einsum("...n,...nv->...v", weights, values), "representation"
        )
        cache = (s_hat, query, keys, values, weights)
        return DaaOutput(representation, weights, logits), cache

    def backward(self, E, s_hat, params: DaaParams, upstream_grad) -> DaaGradients:
        """Exact gradients of ``Σ upstream_grad · p_M`` (summed over any batch axes)."""
        E = _as_array(E)
        out, (s_hat, query, keys, values, weights) = self._forward(E, s_hat, params)
        g = np.asarray(upstream_grad, dtype=np.float64)
        if g.shape != out.representation.shape:
            raise ValidationError(
                f"dimension mismatch: upstream gradient {g.shape} vs output {out.representation.shape}"
            )

        d_values = weights[..., :, None] * g[..., None, :]
        flat_E = E.reshape(-1, params.d)
        d_w_v = flat_E.T @ d_values.reshape(-1, params.d_v)

        # softmax Jacobian: dL/dlogit_i = w_i (u_i − Σ_j w_j u_j), u = values · g
        u = np.einsum("...nv,...v->...n", values, g)
        d_logits = weights * (u - np.sum(weights * u, axis=-1, keepdims=True))
        d_scores = d_logits / math.sqrt(params.d_h)
        d_query_key, d_bias = self.score_grads(d_scores)

        if d_bias is None:
            d_gamma = 0.0
            d_s_hat = np.zeros_like(s_hat)
        else:
            d_gamma = float(np.sum(d_bias * s_hat))
            d_s_hat = params.gamma * d_bias

        if d_query_key is None:
            d_w_q = np.zeros_like(params.w_q)
            d_w_k = np.zeros_like(params.w_k)
            d_q_pool = np.zeros_like(params.q_pool)
        else:
            d_keys = d_query_key[..., :, None] * query
            d_w_k = flat_E.T @ d_keys.reshape(-1, params.d_h)
            d_query = keys.reshape(-1, params.d_h).T @ d_query_key.reshape(-1)
            d_w_q = np.outer(params.q_pool, d_query)
            d_q_pool = params.w_q @ d_query

        return DaaGradients(
            w_q=d_w_q, w_k=d_w_k, w_v=d_w_v, q_pool=d_q_pool, gamma=d_gamma, s_hat=d_s_hat
        )


class FullDaa(AttentionVariant):
    name = "full"

    def scores(self, query_key, bias):
        return query_key + bias

    def score_grads(self, d_scores):
        return d_scores, d_scores


class StandardAttention(AttentionVariant):
    name = "standard"

    def scores(self, query_key, bias):
        return query_key

    def score_grads(self, d_scores):
        return d_scores, None


class DockingOnly(AttentionVariant):
    name = "docking"

    def scores(self, query_key, bias):
        return bias

    def score_grads(self, d_scores):
        return None, d_scores


VARIANTS: dict[str, AttentionVariant] = {
    v.name: v for v in (FullDaa(), StandardAttention(), DockingOnly())
}


def daa_forward(E, s_hat, params: DaaParams) -> DaaOutput:
    return VARIANTS["full"].forward(E, s_hat, params)


def standard_attention(E, params: DaaParams) -> DaaOutput:
    E = _as_array(E)
    return VARIANTS["standard"].forward(E, np.zeros(E.shape[:-1]), params)


def docking_only(E, s_hat, params: DaaParams) -> DaaOutput:
    return VARIANTS["docking"].forward(E, s_hat, params)


def daa_backward(E, s_hat, params: DaaParams, upstream_grad) -> DaaGradients:
    return VARIANTS["full"].backward(E, s_hat, params, upstream_grad)


def multi_head_forward(
    E, s_hat, heads: Sequence[DaaParams], variant: str = "full"
) -> DaaOutput:
    """Independent heads; representations concatenated, weights stacked (h × n)."""
    if not heads:
        raise ValidationError("multi-head pooling needs at least one head")
    outputs = [VARIANTS[variant].forward(E, s_hat, p) for p in heads]
    return DaaOutput(
        representation=np.concatenate([o.representation for o in outputs], axis=-1),
        weights=np.stack([o.weights for o in outputs]),
        logits=np.stack([o.logits for o in outputs]),
    )


def init_params(
    d: int, d_h: int, d_v: int, seed: int, gamma: float = 1.0, beta: float = 0.5
) -> DaaParams:
    """Glorot-uniform projections (W_q, W_k, W_v in that order), then a
    standard-normal pooling query, all from ``SplitMix64(seed)``."""
    if min(d, d_h, d_v) < 1:
        raise ValidationError(f"dimensions must be >= 1, got d={d}, d_h={d_h}, d_v={d_v}")
    stream = SplitMix64(seed)
    qk_limit = math.sqrt(6.0 / (d + d_h))
    return DaaParams(
        w_q=stream.symmetric((d, d_h), qk_limit),
        w_k=stream.symmetric((d, d_h), qk_limit),
        w_v=stream.symmetric((d, d_v), math.sqrt(6.0 / (d + d_v))),
        q_pool=stream.normal(d),
        gamma=gamma,
        beta=beta,
    )


@dataclass(frozen=True)
class GradCheckReport:
    seed: int
    dims: tuple[int, int, int, int]
    errors: dict[str, float]
    tolerance: float = GRAD_TOLERANCE

    @property
    def passed(self) -> bool:
        return all(e < self.tolerance for e in self.errors.values())

    def format(self) -> str:
        n, d, d_h, d_v = self.dims
        lines = [
            f"# seed {self.seed}",
            f"# dims n={n} d={d} d_h={d_h} d_v={d_v}",
            f"# tolerance {format_float(self.tolerance)}",
            "parameter\tmax_rel_error\tstatus",
        ]
        for name, err in self.errors.items():
            status = "ok" if err < self.tolerance else "FAIL"
            lines.append(f"{name}\t{err:.3e}\t{status}")
        return "\n".join(lines) + "\n"


def _relative_error(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
    return float(np.max(np.abs(a - b) / scale))


def grad_check(
    seed: int,
    n: int = 8,
    d: int = 16,
    d_h: int = 8,
    d_v: int = 8,
    step: float = 1e-5,
    variant: str = "full",
    corrupt: str | None = None,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    ``corrupt`` names a gradient to perturb before comparison; it exists so the
    failure path can be exercised.
    """
    if min(n, d, d_h, d_v) < 1:
        raise ValidationError("grad_check dimensions must be >= 1")
    head = VARIANTS[variant]
    stream = SplitMix64(seed)
    E = stream.normal((n, d))
    s_hat = stream.normal(n)
    upstream = stream.normal(d_v)
    params = init_params(d, d_h, d_v, seed=seed + 1, gamma=float(stream.normal(1)[0]))

    def loss(p: DaaParams, s: np.ndarray) -> float:
        return float(upstream @ head.forward(E, s, p).representation)

    analytic = head.backward(E, s_hat, params, upstream).as_dict()
    if corrupt is not None:
        analytic[corrupt] = analytic[corrupt] * 1.5 + 1e-3

    numeric: dict[str, np.ndarray] = {}
    for name in ("w_q", "w_k", "w_v", "q_pool"):
        base = getattr(params, name)
        grad = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[idx] += step
            minus[idx] -= step
            grad[idx] = (
                loss(params.replace(**{name: plus}), s_hat)
                - loss(params.replace(**{name: minus}), s_hat)
            ) / (2 * step)
        numeric[name] = grad
    numeric["gamma"] = np.array(
        (
            loss(params.replace(gamma=params.gamma + step), s_hat)
            - loss(params.replace(gamma=params.gamma - step), s_hat)
        )
        / (2 * step)
    )
    d_s = np.zeros(n)
    for i in range(n):
        plus, minus = s_hat.copy(), s_hat.copy()
        plus[i] += step
        minus[i] -= step
        d_s[i] = (loss(params, plus) - loss(params, minus)) / (2 * step)
    numeric["s_hat"] = d_s

    errors = {name: _relative_error(analytic[name], numeric[name]) for name in numeric}
    report = GradCheckReport(seed=seed, dims=(n, d, d_h, d_v), errors=errors)
    logger.info("gradient check seed=%d %s", seed, "passed" if report.passed else "FAILED")
    return report


def format_params(params: DaaParams) -> str:
    lines = [
        f"# gamma {format_float(params.gamma)}",
        f"# beta {format_float(params.beta)}",
        f"# dims {params.d} {params.d_h} {params.d_v}",
    ]
    for block, arr in zip(PARAM_BLOCKS, (params.w_q, params.w_k, params.w_v, params.q_pool)):
        lines.append(f"# block {block}")
        for row in np.atleast_2d(arr):
            lines.append("\t".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_params(text: str) -> DaaParams:
    header: dict[str, list[str]] = {}
    blocks: dict[str, list[list[float]]] = {}
    current = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if not parts:
                raise ParseError("empty header line", line_no)
            key, *rest = parts
            if key == "block":
                if not rest or rest[0] not in PARAM_BLOCKS:
                    raise ParseError("unknown parameter block", line_no)
                current = rest[0]
                blocks[current] = []
            else:
                header[key] = rest
            continue
        if current is None:
            raise ParseError("values before any block header", line_no)
        try:
            blocks[current].append([float(v) for v in line.split("\t")])
        except ValueError:
            raise ParseError("unparseable parameter value", line_no) from None

    try:
        gamma = float(header["gamma"][0])
        beta = float(header["beta"][0])
        d, d_h, d_v = (int(v) for v in header["dims"])
    except (KeyError, IndexError, ValueError):
        raise ParseError("parameter bundle needs gamma, beta and dims headers") from None
    missing = [b for b in PARAM_BLOCKS if b not in blocks]
    if missing:
        raise ParseError(f"parameter bundle is missing block(s) {', '.join(missing)}")
    try:
        arrays = {b: np.array(blocks[b], dtype=np.float64) for b in PARAM_BLOCKS}
    except ValueError:
        raise ParseError("ragged parameter block") from None
    params = DaaParams(
        w_q=arrays["W_q"],
        w_k=arrays["W_k"],
        w_v=arrays["W_v"],
        q_pool=arrays["q_pool"].reshape(-1),
        gamma=gamma,
        beta=beta,
    )
    if (params.d, params.d_h, params.d_v) != (d, d_h, d_v):
        raise ValidationError(
            f"dims header says {d} {d_h} {d_v} but blocks are "
            f"{params.d} {params.d_h} {params.d_v}"
        )
    return params
