"""Block LDU factorization of I - G~, the stochastic complement of the
dangling block, and the coupled stationarity identities linking the two block
rankings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .transforms import CheckReport, _lu_with_pivot_check


@dataclass(frozen=True)
class LduFactors:
    """I - G~ = Lfac @ Dfac @ Ufac with unit block-triangular outer factors.

    Dfac is block diagonal: the inverted leading block on top, I minus the
    stochastic complement (singular by stochasticity) at the bottom.
    """

    Lfac: np.ndarray
    Dfac: np.ndarray
    Ufac: np.ndarray
    k: int


def _split_blocks(Gt: np.ndarray, k: int):
    Gt = np.asarray(Gt, dtype=np.float64)
    n = Gt.shape[0]
    if Gt.ndim != 2 or Gt.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {Gt.shape}")
    if not 1 <= k <= n - 1:
        raise ValueError(f"split point k={k} must leave both blocks nonempty (n={n})")
    return Gt[:k, :k], Gt[:k, k:], Gt[k:, :k], Gt[k:, k:]


def _complement_parts(Gt: np.ndarray, k: int):
    """Shared solves: Y = (I-G11)^-1 G12, Z = G21 (I-G11)^-1, S = G22 + Z G12."""
    G11, G12, G21, G22 = _split_blocks(Gt, k)
    lu_piv = _lu_with_pivot_check(np.eye(k) - G11, "I minus the leading block")
    Y = linalg.lu_solve(lu_piv, G12)
    Z = linalg.lu_solve(lu_piv, G21.T, trans=1).T
    S = G22 + Z @ G12
    return G11, G12, G21, G22, Y, Z, S


def ldu_factors(Gt: np.ndarray, k: int) -> LduFactors:
    """Block LDU factors of I - G~ split at k.

    The leading block I - G11 is nonsingular whenever the damping factor is
    below 1; a singular leading block raises LinAlgError.
    """
    n = np.asarray(Gt).shape[0]
    G11, _, _, _, Y, Z, S = _complement_parts(Gt, k)
    Lfac = np.eye(n)
    Lfac[k:, :k] = -Z
    Ufac = np.eye(n)
    Ufac[:k, k:] = -Y
    Dfac = np.zeros((n, n))
    Dfac[:k, :k] = np.eye(k) - G11
    Dfac[k:, k:] = np.eye(n - k) - S
    return LduFactors(Lfac=Lfac, Dfac=Dfac, Ufac=Ufac, k=k)


def stochastic_complement(Gt: np.ndarray, k: int) -> np.ndarray:
    """Stochastic complement S = G22 + G21 (I-G11)^-1 G12 of the trailing block.

    The complement of a stochastic matrix is stochastic; entries below -1e-12
    or row sums off 1 by more than 1e-10 mean the input was not a stochastic
    matrix split and raise ValueError.
    """
    _, _, _, _, _, _, S = _complement_parts(Gt, k)
    if S.min() < -1e-12:
        raise ValueError(f"complement has entry {S.min():.3e} < -1e-12; input not stochastic?")
    row_dev = np.abs(S.sum(axis=1) - 1.0).max()
    if row_dev > 1e-10:
        raise ValueError(f"complement row sums deviate from 1 by {row_dev:.3e} > 1e-10")
    return S


def verify_coupled_stationarity(pi_tilde: np.ndarray, Gt: np.ndarray, k: int,
                                tol: float = 1e-8) -> CheckReport:
    """Check the three identities binding the block parts of the stationary vector.

    (a) the dangling part is stationary for the stochastic complement;
    (b) the nondangling part equals the dangling part pushed through
        G21 (I-G11)^-1;
    (c) the dangling part equals the nondangling part pushed through
        G12 (I-G22)^-1.

    (c) needs I - G22 nonsingular; it is skipped (and reported) when the
    trailing block has a row sum at 1 within 1e-12.
    """
    pi_tilde = np.asarray(pi_tilde, dtype=np.float64)
    n = np.asarray(Gt).shape[0]
    if pi_tilde.shape != (n,):
        raise ValueError(f"expected stationary vector of length {n}, got shape {pi_tilde.shape}")
    G11, G12, G21, G22, _, _, S = _complement_parts(Gt, k)
    pi1, pi2 = pi_tilde[:k], pi_tilde[k:]

    dev_a = float(np.abs(pi2 @ S - pi2).max())

    lu11 = _lu_with_pivot_check(np.eye(k) - G11, "I minus the leading block")
    lhs_b = linalg.lu_solve(lu11, pi2 @ G21, trans=1)
    dev_b = float(np.abs(lhs_b - pi1).max())

    devs = [dev_a, dev_b]
    parts = [f"complement stationarity={dev_a:.3e}",
             f"nondangling from dangling={dev_b:.3e}"]
    if G22.sum(axis=1).max() >= 1.0 - 1e-12:
        parts.append("dangling from nondangling skipped (trailing block has unit row sums)")
    else:
        lu22 = _lu_with_pivot_check(np.eye(n - k) - G22, "I minus the trailing block")
        lhs_c = linalg.lu_solve(lu22, pi1 @ G12, trans=1)
        dev_c = float(np.abs(lhs_c - pi2).max())
        devs.append(dev_c)
        parts.append(f"dangling from nondangling={dev_c:.3e}")

    worst = max(devs)
    return CheckReport(passed=worst <= tol, max_abs_deviation=worst,
                       detail="; ".join(parts))
