"""Dangling-node lumping: partition, block structure, matrix-free operators,
power iteration, and recovery of the full ranking.

The full chain has transition matrix G = alpha*(H + d w^T) + (1-alpha) e v^T.
Reordering nondangling nodes first turns G into a 2x2 block form whose lower
blocks are rank one; collapsing the dangling block to one state yields a
(k+1)-order chain with the same nonzero spectrum.  Its stationary vector is
found by power iteration and expanded back to all n nodes in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse

from .graph import (
    HyperlinkMatrix,
    PageRankParams,
    WebGraph,
    build_hyperlink_matrix,
    uniform_vector,
)


@dataclass(frozen=True)
class DanglingPartition:
    """Reordering that lists the k nondangling nodes first, dangling last.

    ``perm[i]`` is the original index at permuted position ``i``; both groups
    keep ascending original order so the permutation is deterministic.
    """

    k: int
    perm: np.ndarray
    inv_perm: np.ndarray

    @property
    def n(self) -> int:
        return self.perm.size


@dataclass(frozen=True)
class BlockStructure:
    """Everything the lumped operator needs, precomputed once.

    H11/H12 are the nondangling rows of the permuted hyperlink matrix split at
    column k; ``r12`` caches the H12 row sums so iteration never touches H12.
    The two rank-one dangling blocks are represented implicitly by u1 and u2
    (u = alpha*w + (1-alpha)*v split at k).  No dense block of size k*(n-k) or
    (n-k)^2 is ever formed.
    """

    k: int
    n: int
    alpha: float
    H11: sparse.csr_matrix
    H12: sparse.csr_matrix
    r12: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    v2_sum: float
    u2_sum: float


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a PageRank solve; scores are in original node order."""

    iterations: int
    residual: float
    converged: bool
    pagerank: np.ndarray
    k: int
    n: int


def detect_dangling(H: HyperlinkMatrix) -> DanglingPartition:
    """Split nodes on structurally empty rows of H.

    The test is on stored entries, never on floating-point row sums, so a row
    summing to 0.999... due to rounding can never be misclassified.
    """
    mask = H.dangling_mask()
    nd = np.flatnonzero(~mask)
    d = np.flatnonzero(mask)
    perm = np.concatenate([nd, d])
    inv_perm = np.empty_like(perm)
    inv_perm[perm] = np.arange(H.n)
    return DanglingPartition(k=int(nd.size), perm=perm, inv_perm=inv_perm)


def permute_blocks(H: HyperlinkMatrix, p: DanglingPartition,
                   params: PageRankParams) -> BlockStructure:
    """Split the permuted system into the blocks the lumped operator uses."""
    if p.perm.size != H.n:
        raise ValueError("partition and matrix sizes differ")
    if params.n != H.n:
        raise ValueError("parameter vectors and matrix sizes differ")
    k = p.k
    nd = p.perm[:k]
    dg = p.perm[k:]
    # dangling rows are structurally empty, so only the top k rows are kept
    top = H.csr[nd, :][:, p.perm].tocsr()
    H11 = top[:, :k].tocsr()
    H12 = top[:, k:].tocsr()
    r12 = np.asarray(H12.sum(axis=1)).ravel()
    alpha = params.alpha
    v1, v2 = params.v[nd], params.v[dg]
    w1, w2 = params.w[nd], params.w[dg]
    u1 = alpha * w1 + (1.0 - alpha) * v1
    u2 = alpha * w2 + (1.0 - alpha) * v2
    return BlockStructure(
        k=k, n=H.n, alpha=alpha,
        H11=H11, H12=H12, r12=r12,
        v1=v1, v2=v2, w1=w1, w2=w2, u1=u1, u2=u2,
        v2_sum=float(v2.sum()), u2_sum=float(u2.sum()),
    )


def lumped_apply(sigma: np.ndarray, b: BlockStructure) -> np.ndarray:
    """One matrix-free step sigma^T -> sigma^T M on the (k+1)-order lumped chain.

    With sigma = [sa | sb] (sb the lumped-node mass):

        head = alpha*(sa^T H11) + (1-alpha)*(sa^T e)*v1^T + sb*u1^T
        tail = alpha*(sa^T r12) + (1-alpha)*(sa^T e)*v2_sum + sb*u2_sum

    The lumped matrix is never materialized; cost O(nnz(H11) + k) and only
    O(k) scratch.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (b.k + 1,):
        raise ValueError(f"expected vector of length {b.k + 1}, got shape {sigma.shape}")
    sa = sigma[:b.k]
    sb = sigma[b.k]
    se = sa.sum()
    beta = 1.0 - b.alpha
    out = np.empty(b.k + 1)
    head = out[:b.k]
    if b.k:
        head[:] = sa @ b.H11  # runs through the zero-copy transpose, O(nnz)
        head *= b.alpha
        head += (beta * se) * b.v1
        head += sb * b.u1
    out[b.k] = b.alpha * (sa @ b.r12) + beta * b.v2_sum * se + sb * b.u2_sum
    return out


def full_operator(H: HyperlinkMatrix,
                  params: PageRankParams) -> Callable[[np.ndarray], np.ndarray]:
    """Bind a matrix-free x^T -> x^T G step over the full n-node chain.

    x^T G = alpha*x^T H + alpha*(x^T d)*w^T + (1-alpha)*(x^T e)*v^T, where
    x^T d sums x over the dangling indices.  Cost O(nnz(H) + n).
    """
    if params.n != H.n:
        raise ValueError("parameter vectors and matrix sizes differ")
    mask = H.dangling_mask()
    A = H.csr
    alpha, beta = params.alpha, 1.0 - params.alpha
    v, w = params.v, params.w
    n = H.n

    def apply(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (n,):
            raise ValueError(f"expected vector of length {n}, got shape {x.shape}")
        xd = x[mask].sum()
        out = x @ A
        out *= alpha
        out += (alpha * xd) * w
        out += (beta * x.sum()) * v
        return out

    return apply


def full_apply(x: np.ndarray, H: HyperlinkMatrix,
               params: PageRankParams) -> np.ndarray:
    """One-shot x^T G product; see :func:`full_operator`."""
    return full_operator(H, params)(x)


def power_method(apply_op: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
                 tol: float, max_iter: int):
    """Left power iteration with per-step renormalization to unit 1-norm.

    Stops when the 1-norm difference of successive iterates drops below tol.
    Returns (iterate, iterations, residual, converged); with max_iter=0 the
    start vector comes straight back unconverged.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    residual = np.inf
    for t in range(1, max_iter + 1):
        y = apply_op(x)
        total = y.sum()
        if not np.all(np.isfinite(y)) or not total > 0.0:
            raise FloatingPointError(f"non-finite or degenerate iterate at step {t}")
        y /= total  # exact no-op in exact arithmetic; arrests rounding drift
        residual = float(np.abs(y - x).sum())
        x = y
        if residual < tol:
            return x, t, residual, True
    return x, max_iter, residual, False


def recover_pagerank(sigma: np.ndarray, b: BlockStructure) -> np.ndarray:
    """Expand the lumped stationary vector to all n nodes (permuted order).

    The first k entries are sigma's nondangling entries unchanged; the tail
    redistributes the lumped node's mass:

        tail = alpha*(sa^T H12) + (1-alpha)*(sa^T e)*v2^T + sb*u2^T

    No renormalization: stationarity of sigma makes the result sum to 1.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (b.k + 1,):
        raise ValueError(f"expected vector of length {b.k + 1}, got shape {sigma.shape}")
    sa = sigma[:b.k]
    sb = sigma[b.k]
    se = sa.sum()
    beta = 1.0 - b.alpha
    out = np.empty(b.n)
    out[:b.k] = sa
    tail = out[b.k:]
    if b.k:
        tail[:] = sa @ b.H12
        tail *= b.alpha
    else:
        tail[:] = 0.0
    tail += (beta * se) * b.v2
    tail += sb * b.u2
    return out


def unpermute(pi_tilde: np.ndarray, p: DanglingPartition) -> np.ndarray:
    """Map a permuted-order vector back to original node order."""
    pi_tilde = np.asarray(pi_tilde)
    if pi_tilde.shape != (p.perm.size,):
        raise ValueError(f"expected vector of length {p.perm.size}, got shape {pi_tilde.shape}")
    out = np.empty_like(pi_tilde)
    out[p.perm] = pi_tilde
    return out


def solve_lumped(g: WebGraph, params: PageRankParams) -> SolveReport:
    """Full pipeline: hyperlink matrix, partition, lumped power iteration,
    recovery, un-permutation.

    Degenerate cases: with no dangling nodes there is nothing to lump and the
    full chain is iterated directly; with no nondangling nodes the chain is
    rank one and u = alpha*w + (1-alpha)*v is returned in closed form.
    """
    H = build_hyperlink_matrix(g)
    p = detect_dangling(H)
    n, k = H.n, p.k
    if k == n:
        op = full_operator(H, params)
        pi, iters, res, conv = power_method(op, uniform_vector(n),
                                            params.tol, params.max_iter)
        return SolveReport(iterations=iters, residual=res, converged=conv,
                           pagerank=pi, k=k, n=n)
    if k == 0:
        u = params.alpha * params.w + (1.0 - params.alpha) * params.v
        return SolveReport(iterations=0, residual=0.0, converged=True,
                           pagerank=u, k=0, n=n)
    b = permute_blocks(H, p, params)
    sigma, iters, res, conv = power_method(lambda s: lumped_apply(s, b),
                                           uniform_vector(k + 1),
                                           params.tol, params.max_iter)
    pi = unpermute(recover_pagerank(sigma, b), p)
    # exact no-op at stationarity; keeps the report a probability vector when
    # iteration stopped early or tol was loose
    pi /= pi.sum()
    return SolveReport(iterations=iters, residual=res, converged=conv,
                       pagerank=pi, k=k, n=n)
