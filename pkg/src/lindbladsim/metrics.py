"""Choi matrices and diamond-norm sandwich estimates.

The Choi matrix used here is the unnormalized C = sum_ij Phi(|i><j|) kron |i><j|
(output factor first), obtained from a column-stacking superoperator by an index
reshuffle. For a map given by Kraus operators, C = sum_a vec_r(A_a) vec_r(A_a)^dag
with vec_r the row-major flattening, so complete positivity shows up as C >= 0.

For a difference of channels Delta, ||C(Delta)||_1 / d <= ||Delta||_diamond
<= ||C(Delta)||_1, which brackets the diamond norm within a factor d without
semidefinite programming. Every bound-verification test in this package checks
the lower member of the sandwich against the closed-form bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError


def _dim_of_superop(S: np.ndarray) -> int:
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ArgumentError(f"superoperator must be square, got shape {S.shape}")
    d = math.isqrt(S.shape[0])
    if d * d != S.shape[0]:
        raise ArgumentError(f"superoperator side {S.shape[0]} is not a perfect square")
    return d


def choi(superop: np.ndarray) -> np.ndarray:
    """Reshuffle a column-stacking superoperator into its (unnormalized) Choi matrix."""
    d = _dim_of_superop(superop)
    S4 = np.asarray(superop).reshape(d, d, d, d)
    return np.einsum("lkji->kilj", S4).reshape(d * d, d * d)


def choi_to_superop(C: np.ndarray) -> np.ndarray:
    """Inverse reshuffle; choi_to_superop(choi(S)) == S."""
    d = _dim_of_superop(C)
    C4 = np.asarray(C).reshape(d, d, d, d)
    return np.einsum("kilj->lkji", C4).reshape(d * d, d * d)


def trace_norm(mat: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(np.asarray(mat), compute_uv=False).sum())


def diamond_sandwich(S1: np.ndarray, S2: np.ndarray):
    """(lower, upper) bounds on ||S1 - S2||_diamond from the Choi trace norm."""
    S1 = np.asarray(S1)
    S2 = np.asarray(S2)
    if S1.shape != S2.shape:
        raise ArgumentError("superoperators must have identical shapes")
    d = _dim_of_superop(S1)
    nrm = trace_norm(choi(S1 - S2))
    return nrm / d, nrm


@dataclass(frozen=True)
class CPTPReport:
    min_choi_eigenvalue: float
    tp_residual: float
    hermiticity_residual: float
    choi_trace: float


def cptp_report(superop: np.ndarray) -> CPTPReport:
    """Complete-positivity and trace-preservation diagnostics of a superoperator."""
    d = _dim_of_superop(superop)
    C = choi(superop)
    herm = float(np.abs(C - C.conj().T).max())
    Ch = (C + C.conj().T) / 2
    eigs = np.linalg.eigvalsh(Ch)
    C4 = C.reshape(d, d, d, d)
    tr_out = np.einsum("kikj->ij", C4)
    tp = float(np.linalg.norm(tr_out - np.eye(d), 2))
    return CPTPReport(min_choi_eigenvalue=float(eigs.min()),
                      tp_residual=tp,
                      hermiticity_residual=herm,
                      choi_trace=float(C.trace().real))
