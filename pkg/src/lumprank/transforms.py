"""Dense verification lab: the transform family mapping ones to e1, the block
similarity form, spectrum identity, and the general lumpability test.

Everything here is O(n^2)/O(n^3) dense machinery meant for desk-scale cross
checks of the sparse pipeline, guarded by a configurable size cap.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from .graph import PageRankParams, WebGraph, build_hyperlink_matrix
from .lumping import BlockStructure, DanglingPartition

DENSE_LIMIT_DEFAULT = 2000

# an LU pivot below this multiple of the max-abs entry counts as singular
_PIVOT_RTOL = 1e-10


class TransformKind(Enum):
    """Built-in families of order-m matrices with L @ ones = e1."""

    AVERAGING = "averaging"      # dense rows: identity minus rank-one averaging
    SPARSE_ELIM = "sparse-elim"  # subtract row 1 from the rest; lower triangular
    JORDAN_DIFF = "jordan-diff"  # identity minus a lower Jordan block, bidiagonal
    CUSTOM = "custom"


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a numerical identity check."""

    passed: bool
    max_abs_deviation: float
    detail: str = ""


def build_transform(kind: TransformKind, m: int,
                    custom: np.ndarray | None = None) -> np.ndarray:
    """Build the m-by-m transform of the chosen family.

    Every built-in kind is invertible, maps the all-ones vector to the first
    coordinate vector, and collapses to [[1]] for m == 1.  CUSTOM passes the
    caller's square matrix through unchecked (verify it separately).
    """
    if m < 1:
        raise ValueError(f"transform order must be >= 1, got {m}")
    if kind is TransformKind.CUSTOM:
        if custom is None:
            raise ValueError("CUSTOM kind requires the custom matrix")
        L = np.array(custom, dtype=np.float64)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError(f"custom transform must be square, got shape {L.shape}")
        if L.shape[0] != m:
            raise ValueError(f"custom transform has order {L.shape[0]}, expected {m}")
        return L
    L = np.eye(m)
    if kind is TransformKind.AVERAGING:
        L[1:, :] = -1.0 / m
        L[np.arange(1, m), np.arange(1, m)] = (m - 1.0) / m
    elif kind is TransformKind.SPARSE_ELIM:
        L[1:, 0] = -1.0
    elif kind is TransformKind.JORDAN_DIFF:
        L[np.arange(1, m), np.arange(m - 1)] = -1.0
    else:
        raise ValueError(f"unknown transform kind: {kind!r}")
    return L


def _lu_with_pivot_check(A: np.ndarray, what: str):
    """LU-factor A, raising LinAlgError when a pivot is negligibly small."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns instead of raising on 0 pivots
        lu, piv = linalg.lu_factor(A)
    scale = np.abs(A).max()
    if scale == 0.0 or np.abs(np.diag(lu)).min() <= _PIVOT_RTOL * scale:
        raise np.linalg.LinAlgError(f"{what} is singular to working precision")
    return lu, piv


def verify_transform_condition(L: np.ndarray, tol: float = 1e-12) -> CheckReport:
    """Check L @ ones == e1, invertibility, and L^-1 @ e1 == ones.

    Invertibility is judged by the smallest LU pivot against 1e-10 times the
    matrix inf-norm.  Failures are reported, never raised.
    """
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"transform must be square, got shape {L.shape}")
    m = L.shape[0]
    e1 = np.zeros(m)
    e1[0] = 1.0
    dev_fwd = float(np.abs(L @ np.ones(m) - e1).max())

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = linalg.lu_factor(L)
    inf_norm = float(np.abs(L).sum(axis=1).max())
    min_pivot = float(np.abs(np.diag(lu)).min())
    if inf_norm == 0.0 or min_pivot <= _PIVOT_RTOL * inf_norm:
        return CheckReport(
            passed=False, max_abs_deviation=np.inf,
            detail=f"singular: smallest LU pivot {min_pivot:.3e} vs inf-norm {inf_norm:.3e}",
        )
    dev_inv = float(np.abs(linalg.lu_solve((lu, piv), e1) - 1.0).max())

    max_dev = max(dev_fwd, dev_inv)
    passed = max_dev <= tol
    detail = f"|L e - e1|={dev_fwd:.3e}, |L^-1 e1 - e|={dev_inv:.3e}"
    if not passed:
        which = "forward map" if dev_fwd > tol else "inverse map"
        detail = f"{which} off: " + detail
    return CheckReport(passed=passed, max_abs_deviation=max_dev, detail=detail)


def build_dense_google(g: WebGraph, params: PageRankParams, p: DanglingPartition,
                       dense_limit: int = DENSE_LIMIT_DEFAULT) -> np.ndarray:
    """Assemble the explicit permuted Google matrix (lab use only).

    Rows above the split are alpha*H + (1-alpha) e v^T; dangling rows are the
    rank-one u^T rows.  Refuses graphs beyond the dense cap.
    """
    if g.n > dense_limit:
        raise ValueError(
            f"n={g.n} exceeds the dense lab limit {dense_limit}; use the sparse solver"
        )
    if params.n != g.n or p.perm.size != g.n:
        raise ValueError("graph, params, and partition sizes differ")
    H = build_hyperlink_matrix(g)
    Ht = H.csr[p.perm, :][:, p.perm].toarray()
    v = params.v[p.perm]
    w = params.w[p.perm]
    G = params.alpha * Ht
    G[p.k:, :] += params.alpha * w
    G += (1.0 - params.alpha) * v
    return G


def build_dense_lumped(b: BlockStructure) -> np.ndarray:
    """Explicit (k+1)-order lumped matrix [G11, G12 e; u1^T, u2^T e] from the
    block data: the dense counterpart of the matrix-free operator."""
    k = b.k
    beta = 1.0 - b.alpha
    M = np.empty((k + 1, k + 1))
    M[:k, :k] = b.alpha * b.H11.toarray() + beta * b.v1
    M[:k, k] = b.alpha * b.r12 + beta * b.v2_sum
    M[k, :k] = b.u1
    M[k, k] = b.u2_sum
    return M


def stationary_dense(M: np.ndarray) -> np.ndarray:
    """Stationary row vector of a stochastic matrix by direct linear solve."""
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    A = np.eye(n) - M.T
    A[-1, :] = 1.0  # replace one redundant equation by the normalization
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return np.linalg.solve(A, rhs)


def similarity_transform(Gt: np.ndarray, L: np.ndarray, k: int):
    """Conjugate the permuted matrix by blockdiag(I_k, L) and split the result.

    Returns (full, lumped_block, coupling_block): the conjugated n x n matrix,
    its leading (k+1) x (k+1) block, and the (k+1) x (n-k-1) block to its
    right.  The inverse is applied through an LU solve on L, never formed.
    """
    Gt = np.asarray(Gt, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    n = Gt.shape[0]
    if Gt.ndim != 2 or Gt.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {Gt.shape}")
    m = n - k
    if not 0 <= k < n:
        raise ValueError(f"split point k={k} out of range for order {n}")
    if L.shape != (m, m):
        raise ValueError(f"transform must have order {m}, got shape {L.shape}")

    lu_piv = _lu_with_pivot_check(L, "transform")
    A = np.empty_like(Gt)
    A[:k] = Gt[:k]
    A[k:] = L @ Gt[k:]
    full = np.empty_like(A)
    full[:, :k] = A[:, :k]
    # right-multiplying by L^-1 == solving L^T X^T = A_right^T
    full[:, k:] = linalg.lu_solve(lu_piv, A[:, k:].T, trans=1).T
    G1 = full[:k + 1, :k + 1].copy()
    G2 = full[:k + 1, k + 1:].copy()
    return full, G1, G2


def check_spectrum_identity(Gt: np.ndarray, G1: np.ndarray, k: int,
                            tol: float = 1e-8, seed: int = 0) -> CheckReport:
    """Compare characteristic polynomials of the full and lumped matrices.

    Evaluates det(lam I - Gt) against lam^(n-k-1) * det(lam I - G1) at three
    fixed points {1.5, 2, 3} plus five seeded uniform draws from (1.1, 4.0),
    all outside the unit spectral disk so neither side vanishes.  Comparison
    runs in log-determinant space (LU under the hood), which equals the
    relative deviation for small discrepancies and cannot overflow.
    """
    Gt = np.asarray(Gt, dtype=np.float64)
    G1 = np.asarray(G1, dtype=np.float64)
    n = Gt.shape[0]
    if Gt.shape != (n, n) or G1.shape != (k + 1, k + 1):
        raise ValueError("inconsistent sizes: full must be n x n, lumped (k+1) x (k+1)")
    rng = np.random.default_rng(seed)
    lams = np.concatenate([[1.5, 2.0, 3.0], rng.uniform(1.1, 4.0, size=5)])
    worst = 0.0
    worst_lam = float(lams[0])
    for lam in lams:
        s_full, ld_full = np.linalg.slogdet(lam * np.eye(n) - Gt)
        s_lump, ld_lump = np.linalg.slogdet(lam * np.eye(k + 1) - G1)
        ld_lump += (n - k - 1) * np.log(lam)
        # |d1 - d2| / max(|d1|, |d2|) with determinants kept in log space
        rel = abs(1.0 - s_full * s_lump * np.exp(-abs(ld_full - ld_lump)))
        if rel > worst:
            worst, worst_lam = float(rel), float(lam)
    passed = worst <= tol
    return CheckReport(
        passed=passed, max_abs_deviation=worst,
        detail=f"seed={seed}; worst relative deviation at lambda={worst_lam:.6g}",
    )


def check_lumpable(M: np.ndarray, boundaries, tol: float = 1e-10,
                   blocks=None) -> CheckReport:
    """Row-sum-constancy test for the off-diagonal blocks of a partition.

    ``boundaries`` are the interior split points of a contiguous partition of
    [0, n).  A block passes when its row sums agree within tol (a rank-one
    block such as e u^T always does).  ``blocks`` optionally restricts the
    test to the given (row_block, col_block) pairs; default is every
    off-diagonal block.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    if M.ndim != 2 or M.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    cuts = [0, *boundaries, n]
    for a, b in zip(cuts, cuts[1:]):
        if not a < b:
            raise ValueError(f"boundaries must be strictly increasing inside (0, {n}): {boundaries}")
    if np.abs(M.sum(axis=1) - 1.0).max() > tol:
        raise ValueError("matrix is not row-stochastic within tol")

    nblocks = len(cuts) - 1
    if blocks is None:
        blocks = [(i, j) for i in range(nblocks) for j in range(nblocks) if i != j]
    worst = 0.0
    parts = []
    for i, j in blocks:
        if not (0 <= i < nblocks and 0 <= j < nblocks) or i == j:
            raise ValueError(f"invalid off-diagonal block index pair {(i, j)}")
        sums = M[cuts[i]:cuts[i + 1], cuts[j]:cuts[j + 1]].sum(axis=1)
        spread = float(sums.max() - sums.min())
        worst = max(worst, spread)
        parts.append(f"block({i},{j}) spread={spread:.3e}")
    return CheckReport(passed=worst <= tol, max_abs_deviation=worst,
                       detail="; ".join(parts))
