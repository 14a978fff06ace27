"""Small dense two-phase simplex solver.

Solves  min c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0,
entirely in double precision.  Bland's rule guards against cycling; problem
sizes here are at most a few hundred variables, so the dense tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-10


class InfeasibleError(RuntimeError):
    pass


class UnboundedError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    basis[row] = col


def _simplex_phase(T: np.ndarray, basis: np.ndarray, ncols: int) -> None:
    """Run simplex iterations on tableau T (last row = objective, last column
    = rhs) until optimal.  Only columns < ncols may enter the basis."""
    while True:
        costs = T[-1, :ncols]
        entering = -1
        for j in range(ncols):
            if costs[j] < -_TOL:
                entering = j  # Bland: smallest eligible index
                break
        if entering < 0:
            return
        col = T[:-1, entering]
        rhs = T[:-1, -1]
        best_row = -1
        best_ratio = np.inf
        for i in range(len(col)):
            if col[i] > _TOL:
                ratio = rhs[i] / col[i]
                if ratio < best_ratio - _TOL or (
                    abs(ratio - best_ratio) <= _TOL
                    and (best_row < 0 or basis[i] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            raise UnboundedError("LP is unbounded")
        _pivot(T, basis, best_row, entering)


def solve_lp(
    c: np.ndarray,
    A_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    A_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    maximize: bool = False,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    n_slack = 0 if A_ub is None else np.asarray(A_ub).shape[0]
    if A_ub is not None:
        A_ub = np.asarray(A_ub, dtype=float)
        b_ub = np.asarray(b_ub, dtype=float)
        for i in range(A_ub.shape[0]):
            slack = np.zeros(n_slack)
            slack[i] = 1.0
            rows.append(np.concatenate([A_ub[i], slack]))
            rhs.append(b_ub[i])
    if A_eq is not None:
        A_eq = np.asarray(A_eq, dtype=float)
        b_eq = np.asarray(b_eq, dtype=float)
        for i in range(A_eq.shape[0]):
            rows.append(np.concatenate([A_eq[i], np.zeros(n_slack)]))
            rhs.append(b_eq[i])
    A = np.array(rows) if rows else np.zeros((0, n + n_slack))
    b = np.array(rhs) if rhs else np.zeros(0)
    m = A.shape[0]
    total = n + n_slack

    # Normalize to b >= 0 (flips slack signs where needed).
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    obj = -c if maximize else c.copy()
    obj = np.concatenate([obj, np.zeros(n_slack)])

    # Initial basis: slack columns where usable, artificials elsewhere.
    basis = np.full(m, -1, dtype=int)
    art_cols = []
    for i in range(m):
        cand = -1
        if i < n_slack and not neg[i]:
            cand = n + i
        if cand >= 0 and A[i, cand] == 1.0:
            basis[i] = cand
        else:
            art_cols.append(i)
    n_art = len(art_cols)
    T = np.zeros((m + 1, total + n_art + 1))
    T[:m, :total] = A
    T[:m, -1] = b
    for idx, i in enumerate(art_cols):
        T[i, total + idx] = 1.0
        basis[i] = total + idx

    if n_art:
        # Phase 1: minimize the artificial total.
        T[-1, total:total + n_art] = 1.0
        for i in range(m):
            if basis[i] >= total:
                T[-1] -= T[i]
        _simplex_phase(T, basis, total + n_art)
        if T[-1, -1] < -1e-7:
            raise InfeasibleError(f"phase-1 residual {-T[-1, -1]:.3g}")
        # Drive any lingering artificials out of the basis.
        for i in range(m):
            if basis[i] >= total:
                pivot_col = -1
                for j in range(total):
                    if abs(T[i, j]) > _TOL:
                        pivot_col = j
                        break
                if pivot_col >= 0:
                    _pivot(T, basis, i, pivot_col)
        T[:, total:total + n_art] = 0.0

    # Phase 2.
    T[-1, :] = 0.0
    T[-1, :total] = obj
    for i in range(m):
        if basis[i] < total:
            T[-1] -= obj[basis[i]] * T[i]
    _simplex_phase(T, basis, total)

    x = np.zeros(total)
    for i in range(m):
        if basis[i] < total:
            x[basis[i]] = T[i, -1]
    fun = float(obj[:total] @ x)
    if maximize:
        fun = -fun
    return LPResult(x=x[:n], fun=fun)
