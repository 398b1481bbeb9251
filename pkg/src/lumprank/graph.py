"""Web-graph ingestion, the sparse hyperlink matrix, and probability vectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse


class EdgeListParseError(ValueError):
    """Raised when edge-list text cannot be parsed; message carries the line number."""


@dataclass(frozen=True)
class WebGraph:
    """Directed link graph over dense 0-based internal indices.

    External labels (arbitrary non-negative integers) are renumbered in
    first-appearance order; ``labels[i]`` is the external label of internal
    node ``i`` and ``index_of`` maps labels back.  Out-edge arrays are sorted
    and duplicate-free.
    """

    n: int
    out_edges: list[np.ndarray]
    labels: np.ndarray
    index_of: dict[int, int] = field(repr=False)

    def out_degree(self, i: int) -> int:
        return len(self.out_edges[i])


def parse_edge_list(text: str | bytes) -> WebGraph:
    """Parse "src dst" lines into a :class:`WebGraph`.

    Blank lines and lines starting with ``#`` are ignored.  Duplicate edges
    collapse to one; self-loops count as ordinary out-edges.  Raises
    :class:`EdgeListParseError` on a malformed line or empty input.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    index_of: dict[int, int] = {}
    labels: list[int] = []
    targets: list[set[int]] = []

    def intern(label: int) -> int:
        idx = index_of.get(label)
        if idx is None:
            idx = len(labels)
            index_of[label] = idx
            labels.append(label)
            targets.append(set())
        return idx

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise EdgeListParseError(
                f"line {lineno}: expected two node labels, got {stripped!r}"
            )
        try:
            src_label, dst_label = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(
                f"line {lineno}: non-integer node label in {stripped!r}"
            ) from None
        if src_label < 0 or dst_label < 0:
            raise EdgeListParseError(
                f"line {lineno}: negative node label in {stripped!r}"
            )
        src = intern(src_label)
        dst = intern(dst_label)
        targets[src].add(dst)

    if not labels:
        raise EdgeListParseError("empty edge list: no nodes or edges found")

    out_edges = [np.array(sorted(t), dtype=np.int64) for t in targets]
    return WebGraph(
        n=len(labels),
        out_edges=out_edges,
        labels=np.array(labels, dtype=np.int64),
        index_of=index_of,
    )


@dataclass(frozen=True)
class HyperlinkMatrix:
    """Row-normalized link matrix in CSR form.

    A row with out-links holds 1/out_degree at each out-neighbor column; a
    dangling row stores no entries at all, so danglingness is a structural
    property of the storage, never a floating-point comparison.
    """

    n: int
    csr: sparse.csr_matrix

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.csr.indptr)

    def dangling_mask(self) -> np.ndarray:
        """Boolean mask of rows with zero stored entries."""
        return self.row_nnz() == 0


def build_hyperlink_matrix(g: WebGraph) -> HyperlinkMatrix:
    """Build the hyperlink matrix: uniform weight over each node's out-links."""
    counts = np.fromiter((len(t) for t in g.out_edges), dtype=np.int64, count=g.n)
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    nnz = int(indptr[-1])
    indices = np.empty(nnz, dtype=np.int64)
    data = np.empty(nnz, dtype=np.float64)
    for i, t in enumerate(g.out_edges):
        if len(t):
            indices[indptr[i]:indptr[i + 1]] = t
            data[indptr[i]:indptr[i + 1]] = 1.0 / len(t)
    csr = sparse.csr_matrix((data, indices, indptr), shape=(g.n, g.n))
    return HyperlinkMatrix(n=g.n, csr=csr)


def probability_vector(values, tol: float = 1e-12) -> np.ndarray:
    """Validate and return a float64 probability vector (nonnegative, 1-norm 1)."""
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"probability vector must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("probability vector has non-finite entries")
    if np.any(x < 0.0):
        raise ValueError("probability vector has a negative entry")
    if abs(x.sum() - 1.0) > tol:
        raise ValueError(f"probability vector sums to {x.sum()!r}, not 1")
    return x


def uniform_vector(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def load_weight_vector(source: str, n: int) -> np.ndarray:
    """Weight vector from the literal ``"uniform"`` or whitespace-separated text.

    Explicit entries must be nonnegative, exactly ``n`` of them, and are
    renormalized to sum 1 provided the raw sum lies in [1e-9, 1e9].
    """
    if source.strip() == "uniform":
        return uniform_vector(n)
    tokens = source.split()
    try:
        entries = np.array([float(tok) for tok in tokens], dtype=np.float64)
    except ValueError:
        raise ValueError("weight vector: non-numeric entry") from None
    if entries.size != n:
        raise ValueError(f"weight vector: expected {n} entries, got {entries.size}")
    if not np.all(np.isfinite(entries)):
        raise ValueError("weight vector: non-finite entry")
    if np.any(entries < 0.0):
        raise ValueError("weight vector: negative entry")
    total = entries.sum()
    if not 1e-9 <= total <= 1e9:
        raise ValueError(
            f"weight vector: sum {total!r} outside [1e-9, 1e9] (all-zero or badly scaled)"
        )
    return entries / total


@dataclass(frozen=True)
class PageRankParams:
    """Damping factor, teleportation/dangling vectors, and the stopping rule."""

    alpha: float
    v: np.ndarray
    w: np.ndarray
    tol: float = 1e-10
    max_iter: int = 1000

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie strictly in (0, 1), got {self.alpha}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        object.__setattr__(self, "v", probability_vector(self.v))
        object.__setattr__(self, "w", probability_vector(self.w))
        if self.v.shape != self.w.shape:
            raise ValueError("v and w must have the same length")

    @property
    def n(self) -> int:
        return self.v.size

    @classmethod
    def uniform(cls, n: int, alpha: float = 0.85, tol: float = 1e-10,
                max_iter: int = 1000) -> "PageRankParams":
        """Params with uniform teleportation and dangling vectors of length n."""
        return cls(alpha=alpha, v=uniform_vector(n), w=uniform_vector(n),
                   tol=tol, max_iter=max_iter)
