"""Bankruptcy division: the contested-garment rule and the Talmud division.

The Talmud division is computed as the nucleolus of the bankruptcy game
``v(S) = (M - sum of debts outside S)_+`` and is pairwise consistent with
the two-creditor contested-garment rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstateExceedsClaims, GameInputError, NumericalBreakdown
from .game import CoalitionGame, CoalitionId, canonical_masks, make_game
from .nucleolus import nucleolus

CLAIM_TOL = 1e-9


def plus_part(x: float) -> float:
    return max(x, 0.0)


def cg_rule(estate: float, d1: float, d2: float) -> tuple[float, float]:
    """Contested-garment split of ``estate`` between claims ``d1`` and ``d2``.

    Each claimant first receives what the other concedes, ``(M - D_other)_+``,
    and the remainder is halved.
    """
    if d1 < 0 or d2 < 0 or estate < 0:
        raise GameInputError("estate and claims must be nonnegative")
    if estate > d1 + d2 + CLAIM_TOL * max(1.0, d1 + d2):
        raise EstateExceedsClaims(f"estate {estate:g} exceeds total claims {d1 + d2:g}")
    conceded_to_1 = plus_part(estate - d2)
    conceded_to_2 = plus_part(estate - d1)
    contested = estate - conceded_to_1 - conceded_to_2
    return conceded_to_1 + contested / 2, conceded_to_2 + contested / 2


@dataclass(frozen=True)
class BankruptcyInstance:
    estate: float
    debts: tuple

    def __post_init__(self):
        debts = tuple(float(d) for d in self.debts)
        object.__setattr__(self, "debts", debts)
        object.__setattr__(self, "estate", float(self.estate))
        if len(debts) < 2:
            raise GameInputError("need at least two creditors")
        if not np.all(np.isfinite(debts)) or not np.isfinite(self.estate):
            raise GameInputError("estate and debts must be finite")
        if self.estate < 0 or min(debts) < 0:
            raise GameInputError("estate and debts must be nonnegative")
        total = sum(debts)
        if self.estate > total + CLAIM_TOL * max(1.0, total):
            raise EstateExceedsClaims(f"estate {self.estate:g} exceeds total debts {total:g}")

    @property
    def n(self) -> int:
        return len(self.debts)


def bankruptcy_game(inst: BankruptcyInstance) -> CoalitionGame:
    """The game where a coalition is worth what the others leave unclaimed."""
    d = np.asarray(inst.debts)
    total = d.sum()
    worths = {}
    for mask in canonical_masks(inst.n, proper=False):
        c = CoalitionId.from_mask(mask)
        inside = sum(d[i - 1] for i in c)
        worths[c] = plus_part(inst.estate - (total - inside))
    worths[CoalitionId(range(1, inst.n + 1))] = inst.estate
    return make_game(inst.n, worths)


def talmud_division(inst: BankruptcyInstance, check: bool = True) -> np.ndarray:
    x = nucleolus(bankruptcy_game(inst)).x
    if check:
        bad = cg_violations(inst, x)
        if bad:
            i, j, err = bad[0]
            raise NumericalBreakdown(f"division not contested-garment consistent for creditors {i},{j} (off by {err:.3g})")
    return x


def cg_violations(inst: BankruptcyInstance, x, tol: float = 1e-6) -> list[tuple[int, int, float]]:
    """Creditor pairs (1-based) whose shares disagree with the contested-garment rule."""
    out = []
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            pair = x[i] + x[j]
            di, dj = inst.debts[i], inst.debts[j]
            # pair sums may overshoot di+dj by round-off
            pair = min(pair, di + dj)
            a, b = cg_rule(max(pair, 0.0), di, dj)
            err = max(abs(a - x[i]), abs(b - x[j]))
            if err > tol:
                out.append((i + 1, j + 1, err))
    return out
