"""Dense two-phase primal simplex for small linear programs.

Problems are ``min c.x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub``,
``0 <= x <= upper``. Rows are equilibrated by their largest coefficient, slack
and artificial columns are appended, and phase one drives the artificials out.
Pricing is Dantzig (most negative reduced cost, lowest index on ties); after
``2 * (rows + cols)`` consecutive degenerate pivots the solver switches to
Bland's rule for the rest of the phase.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

PIVOT_TOL = 1e-10
PHASE1_TOL = 1e-8
OPT_TOL = 1e-10
ITERATION_CAP = 100_000


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


class LpError(ValueError):
    pass


def _matrix(a, n: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    m = np.array(a, dtype=float)
    if m.size == 0:
        return np.zeros((0, n))
    if m.ndim != 2 or m.shape[1] != n:
        raise LpError(f"{name} must have {n} columns, got shape {m.shape}")
    return m


def _vector(b, rows: int, name: str) -> np.ndarray:
    v = np.zeros(0) if b is None else np.array(b, dtype=float).reshape(-1)
    if v.shape[0] != rows:
        raise LpError(f"{name} must have {rows} entries, got {v.shape[0]}")
    return v


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    upper: np.ndarray | None = None
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        n = c.shape[0]
        A_eq = _matrix(self.A_eq, n, "A_eq")
        A_ub = _matrix(self.A_ub, n, "A_ub")
        b_eq = _vector(self.b_eq, A_eq.shape[0], "b_eq")
        b_ub = _vector(self.b_ub, A_ub.shape[0], "b_ub")
        upper = None
        if self.upper is not None:
            upper = np.array(self.upper, dtype=float).reshape(-1)
            if upper.shape[0] != n:
                raise LpError(f"upper must have {n} entries")
            if np.any(np.isnan(upper)) or np.any(upper < 0):
                raise LpError("upper bounds must be nonnegative (inf for none)")
        for name, arr in (("c", c), ("A_eq", A_eq), ("b_eq", b_eq), ("A_ub", A_ub), ("b_ub", b_ub)):
            if not np.all(np.isfinite(arr)):
                raise LpError(f"non-finite coefficient in {name}")
        for name, arr in (("c", c), ("A_eq", A_eq), ("b_eq", b_eq), ("A_ub", A_ub), ("b_ub", b_ub),
                          ("upper", upper)):
            if arr is not None:
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    def dump(self) -> str:
        """Human-readable rows, one constraint per line."""
        names = self.names or tuple(f"x{j}" for j in range(self.n))

        def expr(row):
            terms = [f"{v:+.10g}*{names[j]}" for j, v in enumerate(row) if v != 0]
            return " ".join(terms) if terms else "0"

        lines = [f"min {expr(self.c)}"]
        lines += [f"eq{i}: {expr(r)} = {b:.10g}" for i, (r, b) in enumerate(zip(self.A_eq, self.b_eq))]
        lines += [f"ub{i}: {expr(r)} <= {b:.10g}" for i, (r, b) in enumerate(zip(self.A_ub, self.b_ub))]
        if self.upper is not None:
            lines += [f"bound: {names[j]} <= {u:.10g}" for j, u in enumerate(self.upper) if np.isfinite(u)]
        return "\n".join(lines)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective_value: float
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass(frozen=True)
class FeasibilityReport:
    eq_residual: float
    ub_violation: float
    bound_violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.eq_residual, self.ub_violation, self.bound_violation) <= self.tol


def _row_scale(A: np.ndarray) -> np.ndarray:
    s = np.abs(A).max(axis=1) if A.shape[0] else np.zeros(0)
    return np.where(s > 0, s, 1.0)


def check_feasibility(lp: LinearProgram, x, tol: float = 1e-9, scaled: bool = False) -> FeasibilityReport:
    """Largest equality residual, inequality excess and bound excess of ``x``.

    With ``scaled=True`` rows are divided by their largest coefficient first,
    matching the solver's internal equilibration.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != lp.n:
        raise LpError(f"x must have {lp.n} entries")
    A_eq, b_eq, A_ub, b_ub = lp.A_eq, lp.b_eq, lp.A_ub, lp.b_ub
    if scaled:
        s = _row_scale(A_eq)
        A_eq, b_eq = A_eq / s[:, None], b_eq / s
        s = _row_scale(A_ub)
        A_ub, b_ub = A_ub / s[:, None], b_ub / s
    eq = float(np.max(np.abs(A_eq @ x - b_eq))) if A_eq.shape[0] else 0.0
    ub = float(max(0.0, np.max(A_ub @ x - b_ub))) if A_ub.shape[0] else 0.0
    bound = float(max(0.0, -x.min())) if x.size else 0.0
    if lp.upper is not None and x.size:
        finite = np.isfinite(lp.upper)
        if finite.any():
            bound = max(bound, float(max(0.0, np.max(x[finite] - lp.upper[finite]))))
    return FeasibilityReport(eq, ub, bound, tol)


class _Tableau:
    """Constraint rows plus a reduced-cost row; the last column is the rhs."""

    def __init__(self, T: np.ndarray, basis: list[int], pivot):
        self.T = T
        self.basis = basis
        self.pivot = pivot
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def run(self, ncols: int, cap: int) -> LpStatus | None:
        T, m = self.T, self.m
        degenerate = 0
        bland = False
        stall_limit = 2 * (m + ncols)
        while True:
            d = T[m, :ncols]
            if bland:
                neg = np.flatnonzero(d < -OPT_TOL)
                if neg.size == 0:
                    return None
                e = int(neg[0])
            else:
                e = int(np.argmin(d))
                if d[e] >= -OPT_TOL:
                    return None
            col = T[:m, e]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if self.iterations >= cap:
                return LpStatus.ITERATION_LIMIT
            self.pivot(T, r, e)
            self.basis[r] = e
            self.iterations += 1
            if best <= 1e-12:
                degenerate += 1
                if degenerate > stall_limit:
                    bland = True
            else:
                degenerate = 0


def solve(lp: LinearProgram, max_iter: int = ITERATION_CAP, backend=None) -> LpSolution:
    """Solve ``lp`` with the two-phase simplex method."""
    pivot = (backend or kernels).pivot
    n = lp.n
    blocks_A, blocks_b, is_ub = [], [], []
    if lp.A_ub.shape[0]:
        blocks_A.append(lp.A_ub)
        blocks_b.append(lp.b_ub)
        is_ub += [True] * lp.A_ub.shape[0]
    if lp.upper is not None:
        idx = np.flatnonzero(np.isfinite(lp.upper))
        if idx.size:
            B = np.zeros((idx.size, n))
            B[np.arange(idx.size), idx] = 1.0
            blocks_A.append(B)
            blocks_b.append(lp.upper[idx])
            is_ub += [True] * idx.size
    if lp.A_eq.shape[0]:
        blocks_A.append(lp.A_eq)
        blocks_b.append(lp.b_eq)
        is_ub += [False] * lp.A_eq.shape[0]

    empty = LpSolution(LpStatus.INFEASIBLE, np.full(n, np.nan), math.nan, 0)
    if not blocks_A:
        if np.any(lp.c < 0):
            return LpSolution(LpStatus.UNBOUNDED, np.full(n, np.nan), -math.inf, 0)
        return LpSolution(LpStatus.OPTIMAL, np.zeros(n), 0.0, 0)

    A = np.vstack(blocks_A)
    b = np.concatenate(blocks_b)
    is_ub = np.array(is_ub)
    s = _row_scale(A)
    A = A / s[:, None]
    b = b / s

    # rows with no coefficients are either trivially satisfied or infeasible
    zero = ~np.any(A != 0, axis=1)
    if np.any(zero & is_ub & (b < -PHASE1_TOL)) or np.any(zero & ~is_ub & (np.abs(b) > PHASE1_TOL)):
        return empty
    keep = ~zero
    A, b, is_ub = A[keep], b[keep], is_ub[keep]
    m = A.shape[0]

    n_slack = int(is_ub.sum())
    slack_col = np.full(m, -1)
    slack_col[is_ub] = n + np.arange(n_slack)
    sign = np.where(b < 0, -1.0, 1.0)
    needs_art = ~is_ub | (sign < 0)
    n_art = int(needs_art.sum())
    art_col = np.full(m, -1)
    art_col[needs_art] = n + n_slack + np.arange(n_art)
    width = n + n_slack + n_art

    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A * sign[:, None]
    rows = np.flatnonzero(is_ub)
    T[rows, slack_col[rows]] = sign[rows]
    rows = np.flatnonzero(needs_art)
    T[rows, art_col[rows]] = 1.0
    T[:m, -1] = b * sign
    basis = [int(art_col[i]) if needs_art[i] else int(slack_col[i]) for i in range(m)]

    tab = _Tableau(T, basis, pivot)
    if n_art:
        T[m, n + n_slack:width] = 1.0
        T[m] -= T[:m][needs_art].sum(axis=0)
        status = tab.run(width, max_iter)
        if status is LpStatus.ITERATION_LIMIT:
            return LpSolution(status, np.full(n, np.nan), math.nan, tab.iterations)
        if -T[m, -1] > PHASE1_TOL:
            return LpSolution(LpStatus.INFEASIBLE, np.full(n, np.nan), math.nan, tab.iterations)
        # drive remaining artificials out of the basis; rows without a usable pivot are redundant
        drop = []
        for i in range(m):
            if tab.basis[i] >= n + n_slack:
                cand = np.abs(T[i, :n + n_slack])
                j = int(np.argmax(cand))
                if cand[j] > PIVOT_TOL:
                    pivot(T, i, j)
                    tab.basis[i] = j
                else:
                    drop.append(i)
        if drop:
            keep_rows = [i for i in range(m + 1) if i not in drop]
            tab.basis = [bv for i, bv in enumerate(tab.basis) if i not in drop]
            T = T[keep_rows]
            m = T.shape[0] - 1
        T = np.ascontiguousarray(np.delete(T, np.s_[n + n_slack:width], axis=1))
        tab.T = T

    ncols = n + n_slack
    cost = np.zeros(ncols)
    cost[:n] = lp.c
    cb = cost[tab.basis]
    T[m, :ncols] = cost - cb @ T[:m, :ncols]
    T[m, -1] = -cb @ T[:m, -1]
    status = tab.run(ncols, max_iter - tab.iterations)
    if status is not None:
        return LpSolution(status, np.full(n, np.nan), -math.inf if status is LpStatus.UNBOUNDED else math.nan,
                          tab.iterations)

    xfull = np.zeros(ncols)
    xfull[tab.basis] = T[:m, -1]
    # refine basic values against the unpivoted scaled system
    aug = np.zeros((A.shape[0], ncols))
    aug[:, :n] = A
    r_ub = np.flatnonzero(is_ub)
    aug[r_ub, slack_col[r_ub]] = 1.0
    Bmat = aug[:, tab.basis]
    if Bmat.shape[0] == Bmat.shape[1]:
        try:
            refined = np.linalg.solve(Bmat, b)
            if np.all(np.isfinite(refined)) and np.max(np.abs(refined - xfull[tab.basis])) < 1e-6:
                xfull[tab.basis] = refined
        except np.linalg.LinAlgError:
            pass
    x = xfull[:n].copy()
    x[(x < 0) & (x > -1e-9)] = 0.0
    x += 0.0  # no negative zeros in reports
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.c @ x), tab.iterations)
