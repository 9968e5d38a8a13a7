"""Evaluation and analysis: top-k accuracy, the two-proportion z-test, PCA of
context embeddings, and attention-profile exports."""

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from docking_attention.attention import DaaOutput
from docking_attention.errors import ParseError, ValidationError
from docking_attention.readers.reader import tsv_rows
from docking_attention.structures import ProteinStructure, format_exact, format_float
from docking_attention.synth import SplitMix64

logger = logging.getLogger(__name__)

__all__ = [
    "ClusterSeparation",
    "ProjectionResult",
    "RankedPredictions",
    "ZTestResult",
    "cluster_separation",
    "export_attention_profile",
    "export_attention_profiles",
    "export_context_embeddings",
    "parse_attention_profile",
    "parse_ranked_predictions",
    "pca_project",
    "top_k_accuracy",
    "two_proportion_z_test",
]

ALPHA = 0.05

# Fixed start vectors keep the projection deterministic.
_PCA_START_SEED = 0x9CA


@dataclass(frozen=True)
class RankedPredictions:
    """Per-instance candidates, most confident first, and the true item."""

    candidates: tuple[tuple[str, ...], ...]
    truths: tuple[str, ...]

    def __post_init__(self):
        candidates = tuple(tuple(c) for c in self.candidates)
        if len(candidates) != len(self.truths):
            raise ValidationError(
                f"{len(candidates)} candidate lists for {len(self.truths)} truths"
            )
        for i, c in enumerate(candidates, start=1):
            if not c:
                raise ValidationError(f"instance {i} has no candidates")
            if len(set(c)) != len(c):
                raise ValidationError(f"instance {i} has duplicate candidates")
        object.__setattr__(self, "candidates", candidates)
        object.__setattr__(self, "truths", tuple(self.truths))

    def __len__(self) -> int:
        return len(self.truths)


def parse_ranked_predictions(text: str) -> RankedPredictions:
    """``truth<TAB>candidate_1<TAB>candidate_2...`` per line."""
    truths, candidates = [], []
    for line_no, fields_ in tsv_rows(text):
        if len(fields_) < 2:
            raise ParseError("expected truth and at least one candidate", line_no)
        if len(set(fields_[1:])) != len(fields_) - 1:
            raise ParseError("duplicate candidates", line_no)
        truths.append(fields_[0])
        candidates.append(tuple(fields_[1:]))
    return RankedPredictions(candidates=tuple(candidates), truths=tuple(truths))


def top_k_accuracy(preds: RankedPredictions, k: int) -> float:
    """Fraction of instances whose truth is among the first ``k`` candidates."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if len(preds) == 0:
        raise ValidationError("top-k accuracy of an empty instance set")
    hits = sum(truth in cands[:k] for truth, cands in zip(preds.truths, preds.candidates))
    return hits / len(preds)


@dataclass(frozen=True)
class ZTestResult:
    z: float
    p_value: float
    significant: bool
    degenerate: bool = False
    alpha: float = ALPHA


def two_proportion_z_test(
    s1: int, n1: int, s2: int, n2: int, alpha: float = ALPHA
) -> ZTestResult:
    """Pooled two-proportion z-test, two-sided.

    The p-value is ``2 * (1 - Φ(|z|))`` from ``scipy.stats.norm.sf``. A pooled
    proportion of 0 or 1 has no variance; that case returns ``z = 0, p = 1`` and
    ``degenerate=True``.
    """
    for s, n in ((s1, n1), (s2, n2)):
        if n < 1 or not 0 <= s <= n:
            raise ValidationError(f"need 0 <= successes <= n and n >= 1, got {s}/{n}")

    pooled = (s1 + s2) / (n1 + n2)
    if pooled <= 0.0 or pooled >= 1.0:
        logger.warning("pooled proportion is %s; z-test is degenerate", pooled)
        return ZTestResult(z=0.0, p_value=1.0, significant=False, degenerate=True, alpha=alpha)

    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (s1 / n1 - s2 / n2) / se
    p = min(1.0, 2.0 * float(stats.norm.sf(abs(z))))
    return ZTestResult(z=z, p_value=p, significant=p < alpha, alpha=alpha)


@dataclass(frozen=True)
class ProjectionResult:
    mean: np.ndarray = field(repr=False)
    components: np.ndarray = field(repr=False)  # m × d, orthonormal rows
    projected: np.ndarray = field(repr=False)  # n × m
    explained_variance: np.ndarray

    def transform(self, Y) -> np.ndarray:
        """Project new rows onto the fitted components."""
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if Y.shape[1] != self.mean.shape[0]:
            raise ValidationError(f"expected {self.mean.shape[0]} columns, got {Y.shape[1]}")
        return (Y - self.mean) @ self.components.T


def _orthogonalize(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for b in basis:
        v = v - (b @ v) * b
    return v


def pca_project(
    X, m: int, max_iter: int = 1000, tol: float = 1e-10
) -> ProjectionResult:
    """Top-``m`` principal components by deflated power iteration.

    Iteration stops when the direction moves by less than ``tol`` (up to sign)
    or after ``max_iter`` steps. Each component is flipped so its largest
    magnitude entry is positive.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("PCA needs at least 2 rows")
    n, d = X.shape
    if not 1 <= m <= min(n, d):
        raise ValidationError(f"m must lie in 1..{min(n, d)}, got {m}")

    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    total = float(np.trace(cov))
    if total <= 0.0:
        raise ValidationError("zero-variance data: all rows are equal")

    starts = SplitMix64(_PCA_START_SEED).normal((m, d))
    deflated = cov.copy()
    components: list[np.ndarray] = []
    variances: list[float] = []
    for c in range(m):
        v = _orthogonalize(starts[c], components)
        v /= np.linalg.norm(v)
        for iteration in range(max_iter):
            w = _orthogonalize(deflated @ v, components)
            norm = np.linalg.norm(w)
            if norm <= 1e-14 * total:
                # nothing left in the remaining subspace
                break
            w /= norm
            change = min(np.linalg.norm(w - v), np.linalg.norm(w + v))
            v = w
            if change < tol:
                break
        logger.debug("component %d settled after %d iterations", c + 1, iteration + 1)

        variance = max(float(v @ cov @ v), 0.0)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        components.append(v)
        variances.append(variance)
        deflated = deflated - variance * np.outer(v, v)

    order = sorted(range(m), key=lambda i: -variances[i])
    comps = np.array([components[i] for i in order])
    return ProjectionResult(
        mean=mean,
        components=comps,
        projected=centered @ comps.T,
        explained_variance=np.array([variances[i] for i in order]),
    )


def export_attention_profile(output: DaaOutput, protein: ProteinStructure) -> str:
    """``index<TAB>label<TAB>weight`` per residue.

    Weights are written at full round-trip precision so the emitted column still
    sums to 1 within 1e-9.
    """
    return export_attention_profiles({"weight": output}, protein)


def export_attention_profiles(
    outputs: Mapping[str, DaaOutput], protein: ProteinStructure
) -> str:
    """One weight column per molecular context of the same protein."""
    if not outputs:
        raise ValidationError("no attention outputs to export")
    for name, out in outputs.items():
        if np.shape(out.weights) != (protein.n,):
            raise ValidationError(
                f"attention '{name}' has {np.size(out.weights)} weights for {protein.n} residues"
            )
    lines = [
        f"# residues {protein.n}",
        "# columns index\tlabel\t" + "\t".join(outputs),
    ]
    for i, label in enumerate(protein.labels):
        weights = [format_exact(out.weights[i]) for out in outputs.values()]
        lines.append("\t".join([str(i + 1), label, *weights]))
    return "\n".join(lines) + "\n"


def parse_attention_profile(text: str) -> tuple[list[int], list[str], np.ndarray]:
    """Inverse of :func:`export_attention_profiles`; weights come back n × contexts."""
    indices, labels, weights = [], [], []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields_ = line.split("\t")
        try:
            indices.append(int(fields_[0]))
            weights.append([float(v) for v in fields_[2:]])
        except (ValueError, IndexError):
            raise ParseError("malformed attention profile line", line_no) from None
        labels.append(fields_[1])
    return indices, labels, np.array(weights)


def export_context_embeddings(
    entries: Sequence[tuple[str, str, Sequence[float]]], components: int = 0
) -> str:
    """Rows of ``protein<TAB>molecule<TAB>p_M...``, optionally followed by the
    first ``components`` principal-component coordinates."""
    if not entries:
        raise ValidationError("no context embeddings to export")
    matrix = [np.asarray(vec, dtype=np.float64) for _, _, vec in entries]
    dims = {v.shape for v in matrix}
    if len(dims) != 1 or matrix[0].ndim != 1:
        raise ValidationError(f"inconsistent embedding dimensions: {sorted(dims)}")
    X = np.stack(matrix)

    columns = ["protein", "molecule"] + [f"v{j + 1}" for j in range(X.shape[1])]
    lines = []
    projected = None
    if components:
        result = pca_project(X, components)
        projected = result.projected
        columns += [f"pc{j + 1}" for j in range(components)]
        lines.append(
            "# explained_variance " + " ".join(format_float(v) for v in result.explained_variance)
        )
    lines.insert(0, "# columns " + "\t".join(columns))

    for row, (protein_id, molecule_id, _) in enumerate(entries):
        values = [format_float(v) for v in X[row]]
        if projected is not None:
            values += [format_float(v) for v in projected[row]]
        lines.append("\t".join([protein_id, molecule_id, *values]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClusterSeparation:
    within: float  # mean distance of a point to its own group centroid
    between: float  # mean distance between group centroids


def cluster_separation(groups: Sequence[str], X) -> ClusterSeparation:
    X = np.asarray(X, dtype=np.float64)
    if len(groups) != X.shape[0]:
        raise ValidationError(f"{len(groups)} group labels for {X.shape[0]} rows")
    names = sorted(set(groups))
    if len(names) < 2:
        raise ValidationError("cluster separation needs at least two groups")
    labels = np.array(groups)
    centroids = np.array([X[labels == g].mean(axis=0) for g in names])
    index = {g: i for i, g in enumerate(names)}
    within = np.mean(
        [np.linalg.norm(x - centroids[index[g]]) for g, x in zip(groups, X)]
    )
    between = np.mean(
        [
            np.linalg.norm(centroids[a] - centroids[b])
            for a in range(len(names))
            for b in range(a + 1, len(names))
        ]
    )
    return ClusterSeparation(within=float(within), between=float(between))
