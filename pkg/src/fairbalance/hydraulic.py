"""Digital analog of the two-cylinder gravity balance for three players.

Six liquid levels track the complaints at ``X = y + v(N)/3``:

* ``E_i = y_i + v(N)/3 - v(N) + v({j,k})``, the complaint of the pair
  without player ``i``;
* ``C_i = v({i}) - y_i - v(N)/3``, the complaint of player ``i`` alone.

``E_i`` and ``C_i`` share ``y_i`` with opposite signs (the interlocked
adjusters) and ``y`` stays on ``sum(y) = 0`` (incompressible liquid).

Gravity is modelled as steepest descent of the highest free level: each
step moves ``y`` against the minimum-norm element of the convex hull of
the projected gradients of the levels tied at the top.  Every level tied
at the top then drops at the same rate.  A step is at most ``eta`` long
and stops early where a lower level would reach the falling top, so the
top level never rises.  When the top can no longer fall, the top levels
that are stuck are frozen and the remaining levels relax in the next phase.

Each adjuster has a stop at ``y_i = v({i}) - v(N)/3`` so no player ends
below their solo worth.  This only matters when the core is empty or the
equal split already short-changes someone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import MaxStepsExceeded, UnsupportedPlayerCount
from .game import CoalitionGame

LEVELS = ("E1", "E2", "E3", "C1", "C2", "C3")
_INDEX = np.array([0, 1, 2, 0, 1, 2])
_SIGN = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])
BOUND_TOL = 1e-12


@dataclass(frozen=True)
class SimConfig:
    eta: float = 0.01
    eps_tie: float = 1e-6
    eps_conv: float = 1e-9
    max_steps: int = 10**6
    trace_every: int = 100

    def __post_init__(self):
        if not (self.eta > 0 and self.eps_tie > 0 and self.eps_conv > 0):
            raise ValueError("eta, eps_tie and eps_conv must be positive")
        if self.max_steps < 1 or self.trace_every < 1:
            raise ValueError("max_steps and trace_every must be at least 1")


@dataclass(frozen=True)
class SimState:
    y: np.ndarray
    E: np.ndarray
    C: np.ndarray
    frozen: frozenset = frozenset()
    step_count: int = 0
    phase: int = 1
    stationary: bool = False

    @property
    def levels(self) -> np.ndarray:
        return np.concatenate([self.E, self.C])

    @property
    def free_mask(self) -> np.ndarray:
        return np.array([name not in self.frozen for name in LEVELS])

    @property
    def max_level(self) -> float:
        """Highest non-frozen level (highest overall once everything is frozen)."""
        lv = self.levels
        free = self.free_mask
        return float(lv[free].max() if free.any() else lv.max())

    def allocation(self, g: CoalitionGame) -> np.ndarray:
        return self.y + g.grand_worth / 3


class TraceRow(NamedTuple):
    step: int
    y: tuple
    E: tuple
    C: tuple
    max_level: float
    phase: int


@dataclass
class SimResult:
    x: np.ndarray
    state: SimState
    trace: list = field(default_factory=list)
    phase1_level: float = float("nan")

    @property
    def steps(self) -> int:
        return self.state.step_count


def _offsets(g: CoalitionGame) -> tuple[np.ndarray, np.ndarray]:
    if g.n != 3:
        raise UnsupportedPlayerCount(f"the balance simulates three players, got {g.n}")
    vn = g.grand_worth
    pair = np.array([g.v({2, 3}), g.v({1, 3}), g.v({1, 2})])
    single = g.singleton_worths
    return pair + vn / 3 - vn, single - vn / 3


def _with_levels(g: CoalitionGame, y: np.ndarray, **kw) -> SimState:
    e_off, c_off = _offsets(g)
    return SimState(y=y, E=y + e_off, C=c_off - y, **kw)


def init_state(g: CoalitionGame) -> SimState:
    """Equal split ``X_i = v(N)/3`` with every level set from its complaint."""
    return _with_levels(g, np.zeros(3))


def _pinned(frozen: frozenset) -> np.ndarray:
    pinned = np.zeros(3, dtype=bool)
    for k, name in enumerate(LEVELS):
        if name in frozen:
            pinned[_INDEX[k]] = True
    return pinned


def _project(v: np.ndarray, pinned: np.ndarray) -> np.ndarray:
    out = np.where(pinned, 0.0, v)
    free = ~pinned
    if free.sum() <= 1:
        return np.zeros_like(v)
    out[free] -= out[free].mean()
    return out


def min_norm_point(points: np.ndarray, rays: np.ndarray | None = None) -> np.ndarray:
    """Smallest-norm point of ``conv(points) + cone(rays)`` (rows as generators).

    Checks the affine minimiser of every support of up to three generators
    with at least one point.  Everything here lies in a plane, so three
    suffice.
    """
    pts = np.unique(np.round(points, 15), axis=0)
    if rays is None or len(rays) == 0:
        rays = np.zeros((0, pts.shape[1]))
    if len(rays) == 0 and len(pts) == 1:
        return pts[0]
    if len(rays) == 0 and len(pts) == 2:
        a, b = pts
        diff = b - a
        dd = diff @ diff
        lam = 0.0 if dd == 0 else min(1.0, max(0.0, -(a @ diff) / dd))
        return a + lam * diff
    best = min(pts, key=lambda p: p @ p)
    best_norm = best @ best
    for n_pts in (1, 2, 3):
        for n_rays in range(0, min(3 - n_pts, len(rays)) + 1):
            if n_pts == 1 and n_rays == 0:
                continue
            size = n_pts + n_rays
            for pi in itertools.combinations(range(len(pts)), n_pts):
                for ri in itertools.combinations(range(len(rays)), n_rays):
                    gens = np.vstack([pts[list(pi)], rays[list(ri)]])
                    K = np.zeros((size + 1, size + 1))
                    K[:size, :size] = gens @ gens.T
                    K[:n_pts, size] = 1.0
                    K[size, :n_pts] = 1.0
                    rhs = np.zeros(size + 1)
                    rhs[size] = 1.0
                    try:
                        w = np.linalg.solve(K, rhs)[:size]
                    except np.linalg.LinAlgError:
                        continue
                    if np.any(w < -1e-12) or not np.all(np.isfinite(w)):
                        continue
                    q = w @ gens
                    qn = q @ q
                    if qn < best_norm:
                        best, best_norm = q, qn
    return best


def lower_bounds(g: CoalitionGame) -> np.ndarray:
    """Adjuster stops ``y_i >= v({i}) - v(N)/3``: nobody drops below their solo worth."""
    return g.singleton_worths - g.grand_worth / 3


def _at_bound(state: SimState, lb: np.ndarray) -> np.ndarray:
    tol = BOUND_TOL * max(1.0, float(np.abs(lb).max()))
    return (state.y <= lb + tol) & ~_pinned(state.frozen)


def _gradients(state: SimState, ks) -> dict:
    pinned = _pinned(state.frozen)
    out = {}
    for k in ks:
        a = np.zeros(3)
        a[_INDEX[k]] = _SIGN[k]
        out[k] = _project(a, pinned)
    return out


def _stop_rays(state: SimState, lb: np.ndarray) -> list[np.ndarray]:
    # an adjuster resting on its stop can only push y_i up
    pinned = _pinned(state.frozen)
    rays = []
    for i in np.flatnonzero(_at_bound(state, lb)):
        e = np.zeros(3)
        e[i] = -1.0
        r = _project(e, pinned)
        if r @ r > 0:
            rays.append(r)
    return rays


def descent_direction(
    state: SimState, eps_tie: float, lb: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Direction ``d`` (move ``y`` by ``-t d``) and the mask of top levels.

    With ``lb`` given, players resting on their stop are never pushed lower.
    """
    lv = state.levels
    free = state.free_mask
    top = lv[free].max()
    active = free & (lv >= top - eps_tie)
    grads = _gradients(state, np.flatnonzero(active))
    rays = _stop_rays(state, lb) if lb is not None else []
    return min_norm_point(np.array(list(grads.values())), np.array(rays)), active


def step(state: SimState, g: CoalitionGame, cfg: SimConfig) -> SimState:
    """One relaxation update; flags the state stationary when the top cannot fall."""
    if not state.free_mask.any():
        return replace(state, stationary=True)
    lb = lower_bounds(g)
    d, active = descent_direction(state, cfg.eps_tie, lb)
    nd2 = float(d @ d)
    if np.sqrt(nd2) <= cfg.eps_conv:
        return replace(state, stationary=True)

    lv = state.levels
    free = state.free_mask
    top = lv[free].max()
    rates = _SIGN * d[_INDEX]
    t = cfg.eta
    for k in np.flatnonzero(free & ~active):
        closing = nd2 - rates[k]
        if closing > 1e-15:
            t = min(t, (top - lv[k]) / closing)
    pinned = _pinned(state.frozen)
    stop = None
    for i in np.flatnonzero(~_at_bound(state, lb) & ~pinned):
        if d[i] > 1e-15 and (state.y[i] - lb[i]) / d[i] < t:
            t, stop = (state.y[i] - lb[i]) / d[i], i

    y = state.y - t * d
    y[pinned] = state.y[pinned]
    rest = ~pinned
    if stop is not None:
        y[stop] = lb[stop]
        rest[stop] = False
    y[rest] -= y.sum() / rest.sum()
    return _with_levels(
        g, y, frozen=state.frozen, step_count=state.step_count + 1, phase=state.phase
    )


def _in_cone(target: np.ndarray, gens: list[np.ndarray], tol: float = 1e-9) -> bool:
    """Whether ``target`` is a nonnegative combination of ``gens`` (all in a plane)."""
    if target @ target <= tol:
        return True
    for size in (1, 2):
        for combo in itertools.combinations(gens, size):
            G = np.array(combo).T
            lam, *_ = np.linalg.lstsq(G, target, rcond=None)
            if np.all(lam >= -tol) and np.linalg.norm(G @ lam - target) <= tol:
                return True
    return False


def freeze_top(state: SimState, eps_tie: float, lb: np.ndarray | None = None) -> SimState:
    """Freeze the top levels that cannot fall further, with their interlocked partners.

    A top level is stuck when lowering it would have to raise another top
    level or push a player through their stop: its negated projected
    gradient lies in the cone spanned by the other top gradients and the
    stop directions.  Top levels that can still fall stay free.
    """
    lv = state.levels
    free = state.free_mask
    top = lv[free].max()
    active = np.flatnonzero(free & (lv >= top - eps_tie))
    grads = _gradients(state, active)
    rays = _stop_rays(state, lb) if lb is not None else []
    stuck = [
        k for k in active
        if _in_cone(-grads[k], [grads[j] for j in active if j != k] + rays)
    ]
    frozen = set(state.frozen)
    frozen.update(LEVELS[k] for k in (stuck or active))
    pinned = _pinned(frozenset(frozen))
    frozen.update(name for k, name in enumerate(LEVELS) if pinned[_INDEX[k]])
    return replace(state, frozen=frozenset(frozen), stationary=False)


def project_to_bounds(y: np.ndarray, lb: np.ndarray) -> np.ndarray:
    """Nearest point to ``y`` on ``sum = 0`` with ``y >= lb``."""
    # y' = max(y - tau, lb); sum(y') is nonincreasing in tau
    lo = min(float((y - lb).min()), float(y.sum()) / len(y)) - 1.0
    hi = float((y - lb).max()) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(y - mid, lb).sum() > 0:
            lo = mid
        else:
            hi = mid
    out = np.maximum(y - 0.5 * (lo + hi), lb)
    loose = out > lb
    if loose.any():
        out[loose] -= out.sum() / loose.sum()
    return out


def level_bound_check(state: SimState, g: CoalitionGame, eps_tie: float = 1e-6) -> bool:
    """``y_i >= v({i}) - v(N)/3`` for every player (individual rationality)."""
    return bool(np.all(state.y >= lower_bounds(g) - eps_tie))


def _row(state: SimState, top: float | None = None) -> TraceRow:
    return TraceRow(
        state.step_count,
        tuple(state.y.tolist()),
        tuple(state.E.tolist()),
        tuple(state.C.tolist()),
        state.max_level if top is None else top,
        state.phase,
    )


def run(g: CoalitionGame, cfg: SimConfig | None = None) -> SimResult:
    """Relax to equilibrium, then refine with freeze-and-continue phases.

    Raises :class:`MaxStepsExceeded` (carrying the partial trace) when the
    step budget runs out first.
    """
    cfg = cfg or SimConfig()
    state = init_state(g)
    lb = lower_bounds(g)
    trace = [_row(state)]
    if np.any(state.y < lb):
        # equal split short-changes someone: the stops push those adjusters up first
        state = _with_levels(g, project_to_bounds(state.y, lb), step_count=1)
        trace.append(_row(state))
    phase1 = float("nan")
    top = None
    while True:
        nxt = step(state, g, cfg)
        if nxt.stationary:
            if state.phase == 1:
                phase1 = state.max_level
            top = state.max_level
            state = freeze_top(nxt, cfg.eps_tie, lb)
            if _pinned(state.frozen).sum() >= 2:
                # sum(y) = 0 pins the last player too
                state = replace(state, frozen=frozenset(LEVELS))
                break
            state = replace(state, phase=state.phase + 1)
            continue
        if state.step_count >= cfg.max_steps:
            if trace[-1].step != state.step_count:
                trace.append(_row(state))
            raise MaxStepsExceeded(
                f"no equilibrium after {state.step_count} steps", trace=trace, state=state
            )
        state = nxt
        if state.step_count % cfg.trace_every == 0:
            trace.append(_row(state))
    if trace[-1].step != state.step_count or trace[-1].phase != state.phase:
        # report where the last phase stalled, not the max over every frozen level
        trace.append(_row(state, top))
    return SimResult(state.allocation(g), state, trace, phase1)
