"""Dense two-phase simplex for small linear programs.

Solves ``min c.z`` subject to rows ``A z (<=|==|>=) b`` and per-variable
lower bounds (``-inf`` for free variables).  Pricing is Dantzig's rule;
after a run of degenerate pivots the solver switches to Bland's rule for
the remainder of the phase, which rules out cycling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalBreakdown

PIVOT_TOL = 1e-10
EPS_FEAS = 1e-8
PHASE1_TOL = 1e-9
DEGENERATE_RUN = 20


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: list = field(default_factory=list)
    lower: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        nvar = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, nvar)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.shape[0] != self.b.size:
            raise ValueError(f"A has {self.A.shape[0]} rows but b has {self.b.size} entries")
        if not self.senses:
            self.senses = ["<="] * self.b.size
        self.senses = list(self.senses)
        if len(self.senses) != self.b.size:
            raise ValueError("one sense per row required")
        bad = set(self.senses) - {"<=", "==", ">="}
        if bad:
            raise ValueError(f"unknown row senses {sorted(bad)}")
        if self.lower is None:
            self.lower = np.zeros(nvar)
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        if self.lower.size != nvar:
            raise ValueError("one lower bound per variable required")
        if np.any(np.isposinf(self.lower)) or np.any(np.isnan(self.lower)):
            raise ValueError("lower bounds must be finite or -inf")

    @property
    def nvar(self) -> int:
        return self.c.size

    def violation(self, z: np.ndarray) -> float:
        """Largest constraint violation of ``z`` (0 when feasible)."""
        r = self.A @ z - self.b
        worst = 0.0
        for ri, s in zip(r, self.senses):
            if s == "<=":
                worst = max(worst, ri)
            elif s == ">=":
                worst = max(worst, -ri)
            else:
                worst = max(worst, abs(ri))
        finite = np.isfinite(self.lower)
        if finite.any():
            worst = max(worst, float(np.max(self.lower[finite] - z[finite], initial=0.0)))
        return worst


@dataclass
class LpSolution:
    status: LpStatus
    z: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Simplex tableau ``[T | rhs]`` with a tracked basis."""

    def __init__(self, T: np.ndarray, basis: list[int], max_iter: int):
        self.T = T
        self.basis = basis
        self.max_iter = max_iter
        self.iterations = 0

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def run(self, obj_row: int, allowed: np.ndarray) -> bool:
        """Minimise the objective held in ``obj_row`` (reduced costs).

        Returns False on unboundedness.
        """
        T = self.T
        m = len(self.basis)
        bland = False
        degenerate = 0
        while True:
            rc = T[obj_row, :-1]
            candidates = np.flatnonzero(allowed & (rc < -PIVOT_TOL))
            if candidates.size == 0:
                return True
            if self.iterations >= self.max_iter:
                raise NumericalBreakdown(f"simplex did not terminate in {self.max_iter} pivots")
            j = int(candidates[0]) if bland else int(candidates[np.argmin(rc[candidates])])
            col = T[:m, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            if bland:
                r = int(min(tied, key=lambda k: self.basis[k]))
            else:
                r = int(tied[np.argmax(col[tied])])
            if best <= PIVOT_TOL:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
            self.pivot(r, j)
            self.iterations += 1


def solve_lp(lp: LinearProgram, eps_feas: float = EPS_FEAS, max_iter: int | None = None) -> LpSolution:
    """Solve ``lp`` with the two-phase simplex method.

    Raises :class:`NumericalBreakdown` if pivoting stalls or the returned
    point violates a constraint by more than ``eps_feas``.
    """
    A, b, c, lower = lp.A, lp.b, lp.c, lp.lower
    m, nvar = A.shape
    finite = np.isfinite(lower)

    # z = lower + u (bounded) or z = u+ - u- (free); all u >= 0
    cols = []
    back = []  # (orig var, sign) per structural column
    for j in range(nvar):
        cols.append(A[:, j])
        back.append((j, 1.0))
        if not finite[j]:
            cols.append(-A[:, j])
            back.append((j, -1.0))
    shift = A[:, finite] @ lower[finite] if finite.any() else np.zeros(m)
    rhs = b - shift
    nstruct = len(cols)
    M = np.column_stack(cols) if cols else np.zeros((m, 0))

    slack_cols = []
    for i, s in enumerate(lp.senses):
        if s == "==":
            continue
        e = np.zeros(m)
        e[i] = 1.0 if s == "<=" else -1.0
        slack_cols.append(e)
    if slack_cols:
        M = np.hstack([M, np.column_stack(slack_cols)])
    nreal = M.shape[1]

    neg = rhs < 0
    M[neg] *= -1.0
    rhs = np.where(neg, -rhs, rhs)

    if max_iter is None:
        max_iter = 50 * (m + nreal) + 100

    # rows: m constraints, phase-2 objective, phase-1 objective
    T = np.zeros((m + 2, nreal + m + 1))
    T[:m, :nreal] = M
    T[:m, nreal:nreal + m] = np.eye(m)
    T[:m, -1] = rhs
    cost = np.zeros(nreal)
    for k, (j, sgn) in enumerate(back):
        cost[k] = sgn * c[j]
    T[m, :nreal] = cost
    T[m + 1, :nreal] = -M.sum(axis=0)
    T[m + 1, -1] = -rhs.sum()
    tab = _Tableau(T, list(range(nreal, nreal + m)), max_iter)

    allowed = np.ones(nreal + m, dtype=bool)
    if m:
        tab.run(m + 1, allowed)
        infeas = -T[m + 1, -1]
        scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
        if infeas > PHASE1_TOL * scale:
            return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)

        # drive remaining artificials out of the basis; drop redundant rows
        keep = []
        for r in range(m):
            if tab.basis[r] < nreal:
                keep.append(r)
                continue
            row = T[r, :nreal]
            nz = np.flatnonzero(np.abs(row) > 1e-9)
            if nz.size:
                tab.pivot(r, int(nz[np.argmax(np.abs(row[nz]))]))
                keep.append(r)
        if len(keep) < m:
            rows = keep + [m, m + 1]
            tab.T = T = T[rows]
            tab.basis = [tab.basis[r] for r in keep]
            m = len(keep)

    allowed[nreal:] = False
    if not tab.run(m, allowed):
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.iterations)

    u = np.zeros(T.shape[1] - 1)
    for r, j in enumerate(tab.basis):
        u[j] = T[r, -1]
    z = np.where(finite, lower, 0.0).astype(float)
    for k, (j, sgn) in enumerate(back):
        z[j] += sgn * u[k]
    viol = lp.violation(z)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if viol > eps_feas * scale:
        raise NumericalBreakdown(f"simplex solution violates constraints by {viol:.3g}; rescale the instance")
    return LpSolution(LpStatus.OPTIMAL, z, float(c @ z), tab.iterations)
