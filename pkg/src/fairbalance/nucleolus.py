"""Nucleolus by a sequence of min-max complaint linear programs.

Each round minimises the largest complaint ``T`` over the coalitions not
yet fixed, subject to efficiency, imputation bounds ``x_i >= v({i})`` and
the complaints fixed in earlier rounds.  Coalitions whose complaint cannot
be pushed more than ``DELTA_PROBE`` below ``T*`` while every other free
complaint stays at most ``T*`` are then fixed at ``T*``.  The loop stops
once the fixed complaints plus efficiency pin down the allocation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InfeasibleGame, NumericalBreakdown, UnsupportedPlayerCount
from .game import (
    EPS_EFF,
    EPS_TIE,
    CoalitionGame,
    CoalitionId,
    ExcessVector,
    complaints,
    excess_vector,
)
from .lp import LinearProgram, LpStatus, solve_lp

DELTA_PROBE = 1e-6


@dataclass(frozen=True)
class Round:
    value: float
    fixed: tuple


@dataclass(frozen=True)
class NucleolusResult:
    x: np.ndarray
    rounds: tuple
    excess: ExcessVector

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.rounds]


def check_imputations(g: CoalitionGame, eps: float = EPS_EFF) -> None:
    lo = g.singleton_worths.sum()
    if lo > g.grand_worth + eps:
        raise InfeasibleGame(
            f"imputation set is empty: singleton worths sum to {lo:g} > v(N) = {g.grand_worth:g}"
        )


def _frozen_masks(frozen: Mapping) -> dict[int, float]:
    return {CoalitionId.parse(k).mask if not isinstance(k, int) else k: float(v) for k, v in frozen.items()}


def _build(g, free, fixed, probe=None, t_cap=None, eps_tie=EPS_TIE):
    """Constraint rows over ``[x_1..x_n, T]`` (or just ``x`` when ``t_cap`` given)."""
    n = g.n
    with_t = t_cap is None
    width = n + 1 if with_t else n
    rows, rhs, senses = [], [], []
    member = g.membership(free) if free else np.zeros((0, n))
    for mask, a in zip(free, member):
        row = np.zeros(width)
        row[:n] = -a
        if with_t:
            row[n] = -1.0
            rows.append(row)
            rhs.append(-g.worths[mask])
        else:
            rows.append(row)
            rhs.append(t_cap + eps_tie - g.worths[mask])
        senses.append("<=")
    fixed_masks = list(fixed)
    if fixed_masks:
        for mask, a in zip(fixed_masks, g.membership(fixed_masks)):
            row = np.zeros(width)
            row[:n] = -a
            rows.append(row)
            rhs.append(fixed[mask] - g.worths[mask])
            senses.append("==")
    row = np.zeros(width)
    row[:n] = 1.0
    rows.append(row)
    rhs.append(g.grand_worth)
    senses.append("==")
    lower = g.singleton_worths
    if with_t:
        lower = np.append(lower, -np.inf)
    c = np.zeros(width)
    if with_t:
        c[n] = 1.0
    else:
        # minimise the probed complaint, i.e. maximise the probed coalition's payoff
        c[:n] = -g.membership([probe])[0]
    return LinearProgram(c, np.array(rows), np.array(rhs), senses, lower)


def min_max_lp(g: CoalitionGame, frozen: Mapping | None = None, eps_tie: float = EPS_TIE):
    """Least achievable largest complaint among the non-frozen coalitions.

    ``frozen`` maps coalitions (CoalitionId, member iterables or bitmasks)
    to their fixed complaint.  Returns ``(T*, x*, tight)`` where ``tight``
    holds the coalitions whose complaint equals ``T*`` at every optimum.
    """
    check_imputations(g)
    fixed = _frozen_masks(frozen or {})
    free = [m for m in g.proper_masks if m not in fixed]
    if not free:
        raise ValueError("every proper coalition is frozen; nothing to minimise")
    sol = solve_lp(_build(g, free, fixed))
    if sol.status is LpStatus.INFEASIBLE:
        raise InfeasibleGame("no imputation is consistent with the frozen complaints")
    if sol.status is LpStatus.UNBOUNDED:
        raise NumericalBreakdown("min-max program reported unbounded")
    x = sol.z[: g.n]
    t_star = float(sol.z[g.n])

    vals = complaints(g, x, free)
    tight = []
    for mask, val in zip(free, vals):
        if val < t_star - eps_tie:
            continue
        probe = solve_lp(_build(g, free, fixed, probe=mask, t_cap=t_star, eps_tie=eps_tie))
        if not probe.optimal or g.worths[mask] + probe.objective > t_star - DELTA_PROBE:
            tight.append(mask)
    if not tight:
        # cannot happen for a bounded program; fall back to the vertex reading
        tight = [m for m, v in zip(free, vals) if v >= t_star - eps_tie]
    return t_star, x, sorted(CoalitionId.from_mask(m) for m in tight)


def _rank(g: CoalitionGame, masks) -> int:
    if not masks:
        return 1
    M = np.vstack([g.membership(list(masks)), np.ones(g.n)])
    return int(np.linalg.matrix_rank(M))


def nucleolus(g: CoalitionGame, eps_tie: float = EPS_TIE) -> NucleolusResult:
    """Nucleolus of ``g`` with the per-round min-max values and fixed sets."""
    check_imputations(g)
    fixed: dict[int, float] = {}
    rounds = []
    x = None
    while True:
        t_star, x, tight = min_max_lp(g, fixed, eps_tie)
        for c in tight:
            fixed[c.mask] = t_star
        rounds.append(Round(t_star, tuple(tight)))
        if _rank(g, fixed) == g.n or len(fixed) == len(g.proper_masks):
            break
    x = _polish(g, fixed, x)
    return NucleolusResult(x, tuple(rounds), excess_vector(g, x))


def _polish(g: CoalitionGame, fixed: dict[int, float], x: np.ndarray) -> np.ndarray:
    """Re-solve the fixed-complaint equalities directly to shed simplex round-off."""
    masks = list(fixed)
    A = np.vstack([g.membership(masks), np.ones(g.n)])
    b = np.append(np.array([g.worths[m] - fixed[m] for m in masks]), g.grand_worth)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.max(np.abs(A @ sol - b), initial=0.0) <= 1e-7 and np.max(np.abs(sol - x)) <= 1e-6:
        return sol
    return np.asarray(x, dtype=float)


def lex_key(values) -> np.ndarray:
    return np.sort(np.asarray(values, dtype=float))[::-1]


def brute_force_min_max(g: CoalitionGame, grid_step: float, tol: float = 1e-9) -> np.ndarray:
    """Grid search for the lexicographic minimiser of the sorted excess vector.

    Test oracle for three-player games: enumerates imputations
    ``x_i = v({i}) + k_i * grid_step`` for players 1 and 2, with player 3
    taking the remainder.
    """
    if g.n != 3:
        raise UnsupportedPlayerCount("grid oracle covers three-player games only")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    check_imputations(g)
    lo = g.singleton_worths
    slack = g.grand_worth - lo.sum()
    k = int(np.floor(slack / grid_step + 1e-9))
    pts = []
    for a, b in itertools.product(range(k + 1), repeat=2):
        if a + b > k:
            continue
        x1 = lo[0] + a * grid_step
        x2 = lo[1] + b * grid_step
        pts.append((x1, x2, g.grand_worth - x1 - x2))
    X = np.array(pts)
    E = g.worths[list(g.proper_masks)][None, :] - X @ g.membership().T
    E = -np.sort(-E, axis=1)
    best = 0
    for i in range(1, len(E)):
        d = E[i] - E[best]
        nz = np.flatnonzero(np.abs(d) > tol)
        if nz.size and d[nz[0]] < 0:
            best = i
    return X[best]
