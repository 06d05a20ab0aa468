"""Characteristic-function games, allocations and complaints.

Coalitions are stored by bitmask: player ``i`` (1-based) is bit ``i - 1``.
A game keeps a dense table of worths for every nonempty coalition, so the
player count is capped at :data:`MAX_PLAYERS`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import total_ordering
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateCoalitionKey,
    GameInputError,
    InvalidCoalition,
    MissingGrandCoalition,
)

MAX_PLAYERS = 20
EPS_EFF = 1e-9
EPS_TIE = 1e-9


@total_ordering
@dataclass(frozen=True)
class CoalitionId:
    """A nonempty set of 1-based player indices.

    Ordering is the canonical coalition order: by size, then by the sorted
    member list.
    """

    members: frozenset

    def __init__(self, members: Iterable[int]):
        ms = frozenset(int(m) for m in members)
        if not ms:
            raise InvalidCoalition("coalition must be nonempty")
        if min(ms) < 1:
            raise InvalidCoalition(f"player indices are 1-based, got {sorted(ms)}")
        object.__setattr__(self, "members", ms)

    @classmethod
    def from_mask(cls, mask: int) -> "CoalitionId":
        return cls(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)

    @classmethod
    def parse(cls, key) -> "CoalitionId":
        """Accept a CoalitionId, an iterable of ints or a string like ``"1,3"``."""
        if isinstance(key, CoalitionId):
            return key
        if isinstance(key, str):
            parts = [p.strip() for p in key.split(",")]
            try:
                return cls(int(p) for p in parts)
            except ValueError:
                raise InvalidCoalition(f"bad coalition key {key!r}") from None
        if isinstance(key, int):
            return cls([key])
        return cls(key)

    @property
    def mask(self) -> int:
        m = 0
        for i in self.members:
            m |= 1 << (i - 1)
        return m

    @property
    def sorted(self) -> tuple:
        return tuple(sorted(self.members))

    def sort_key(self) -> tuple:
        return (len(self.members), self.sorted)

    def __lt__(self, other: "CoalitionId") -> bool:
        return self.sort_key() < other.sort_key()

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members

    def __iter__(self):
        return iter(self.sorted)

    def key(self) -> str:
        return ",".join(str(i) for i in self.sorted)

    def __repr__(self) -> str:
        return "{" + ",".join(str(i) for i in self.sorted) + "}"


def canonical_masks(n: int, proper: bool = True) -> list[int]:
    """Bitmasks of nonempty coalitions in canonical order."""
    top = n - 1 if proper else n
    out = []
    for size in range(1, top + 1):
        for combo in combinations(range(n), size):
            out.append(sum(1 << i for i in combo))
    return out


@dataclass(frozen=True, eq=False)
class CoalitionGame:
    """A transferable-utility game ``(N, v)``.

    ``worths[mask]`` holds ``v`` of the coalition with that bitmask; entry 0
    (the empty coalition) is always 0.  ``explicit`` lists the coalitions
    given by the caller and ``defaulted`` the proper coalitions filled in
    with 0.
    """

    n: int
    worths: np.ndarray
    explicit: tuple = ()
    defaulted: tuple = ()
    _proper: tuple = field(default=(), repr=False)

    def v(self, s) -> float:
        return float(self.worths[_mask_of(s, self.n)])

    @property
    def grand_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def grand_worth(self) -> float:
        return float(self.worths[self.grand_mask])

    @property
    def singleton_worths(self) -> np.ndarray:
        return np.array([self.worths[1 << i] for i in range(self.n)], dtype=float)

    @property
    def proper_masks(self) -> tuple:
        return self._proper

    def proper_coalitions(self) -> list[CoalitionId]:
        return [CoalitionId.from_mask(m) for m in self._proper]

    def membership(self, masks: Sequence[int] | None = None) -> np.ndarray:
        """0/1 matrix with one row per coalition mask and one column per player."""
        masks = self._proper if masks is None else masks
        bits = 1 << np.arange(self.n)
        return ((np.asarray(masks, dtype=np.int64)[:, None] & bits) != 0).astype(float)

    def as_dict(self) -> dict:
        """Map from CoalitionId to worth over every nonempty coalition."""
        return {CoalitionId.from_mask(m): float(self.worths[m]) for m in canonical_masks(self.n, proper=False)}

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoalitionGame):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.worths, other.worths)
            and self.defaulted == other.defaulted
        )

    __hash__ = None


def _mask_of(s, n: int) -> int:
    cid = CoalitionId.parse(s)
    if max(cid.members) > n:
        raise InvalidCoalition(f"coalition {cid!r} has players outside 1..{n}")
    return cid.mask


def make_game(n: int, worths: Mapping) -> CoalitionGame:
    """Build a game from a partial worth map.

    Keys may be :class:`CoalitionId`, iterables of player indices or
    strings such as ``"1,2"``.  Unspecified proper coalitions default to 0
    and are listed in ``defaulted``.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise GameInputError(f"player count must be an integer >= 2, got {n!r}")
    if n > MAX_PLAYERS:
        raise GameInputError(f"at most {MAX_PLAYERS} players supported, got {n}")
    n = int(n)
    table = np.zeros(1 << n, dtype=float)
    seen: dict[int, object] = {}
    for key, value in worths.items():
        cid = CoalitionId.parse(key)
        if max(cid.members) > n:
            raise InvalidCoalition(f"coalition {cid!r} has players outside 1..{n}")
        m = cid.mask
        if m in seen:
            raise DuplicateCoalitionKey(f"coalition {cid!r} given twice ({seen[m]!r} and {key!r})")
        seen[m] = key
        val = float(value)
        if not np.isfinite(val):
            raise GameInputError(f"worth of {cid!r} must be finite")
        table[m] = val
    grand = (1 << n) - 1
    if grand not in seen:
        raise MissingGrandCoalition(f"no worth given for the grand coalition of {n} players")
    proper = tuple(canonical_masks(n))
    defaulted = tuple(CoalitionId.from_mask(m) for m in proper if m not in seen)
    explicit = tuple(sorted(CoalitionId.from_mask(m) for m in seen))
    table.setflags(write=False)
    return CoalitionGame(n, table, explicit, defaulted, proper)


def game_from_json(obj) -> CoalitionGame:
    """Parse the ``{"players": n, "values": {"1,2": w, ...}}`` format.

    ``obj`` may be a decoded dict or a JSON string.
    """
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj, object_pairs_hook=_reject_duplicate_pairs)
    if not isinstance(obj, dict):
        raise GameInputError("game JSON must be an object")
    unknown = set(obj) - {"players", "values", "defaulted"}
    if unknown:
        raise GameInputError(f"unknown keys in game JSON: {sorted(unknown)}")
    if "players" not in obj or "values" not in obj:
        raise GameInputError('game JSON needs "players" and "values"')
    n = obj["players"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise GameInputError('"players" must be an integer')
    values = obj["values"]
    if not isinstance(values, dict):
        raise GameInputError('"values" must be an object')
    for k, w in values.items():
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise GameInputError(f"worth for {k!r} must be a number")
    return make_game(n, values)


def load_game(path) -> CoalitionGame:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return game_from_json(text)


def _reject_duplicate_pairs(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise DuplicateCoalitionKey(f"duplicate key {k!r} in game JSON")
        out[k] = v
    return out


def game_to_json(g: CoalitionGame) -> dict:
    """Echo form of a game; re-parsing it yields an equal game."""
    return {
        "players": g.n,
        "values": {c.key(): float(g.worths[c.mask]) for c in g.explicit},
        "defaulted": [c.key() for c in g.defaulted],
    }


def _as_vector(g: CoalitionGame, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise DimensionMismatch(f"allocation has shape {x.shape}, expected ({g.n},)")
    return x


def is_efficient(x, g: CoalitionGame, eps: float = EPS_EFF) -> bool:
    x = _as_vector(g, x)
    return bool(abs(x.sum() - g.grand_worth) <= eps)


def is_individually_rational(x, g: CoalitionGame, eps: float = EPS_EFF) -> bool:
    x = _as_vector(g, x)
    return bool(np.all(x >= g.singleton_worths - eps))


def is_imputation(x, g: CoalitionGame, eps: float = EPS_EFF) -> bool:
    return is_efficient(x, g, eps) and is_individually_rational(x, g, eps)


def complaint(g: CoalitionGame, s, x) -> float:
    """``v(S) - sum_{i in S} x_i``; no efficiency requirement on ``x``."""
    x = _as_vector(g, x)
    mask = _mask_of(s, g.n)
    idx = [i for i in range(g.n) if mask >> i & 1]
    return float(g.worths[mask] - x[idx].sum())


def complaints(g: CoalitionGame, x, masks: Sequence[int] | None = None) -> np.ndarray:
    """Complaints of the given coalitions (default: all proper ones, canonical order)."""
    x = _as_vector(g, x)
    masks = g.proper_masks if masks is None else masks
    return g.worths[list(masks)] - g.membership(masks) @ x


@dataclass(frozen=True)
class ExcessVector:
    """Complaints of all proper coalitions, sorted descending.

    Ties are broken by canonical coalition order.
    """

    entries: tuple

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.entries], dtype=float)

    @property
    def coalitions(self) -> list[CoalitionId]:
        return [c for c, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def excess_vector(g: CoalitionGame, x) -> ExcessVector:
    vals = complaints(g, x)
    order = sorted(range(len(vals)), key=lambda k: -vals[k])  # stable: keeps canonical order on ties
    return ExcessVector(tuple((CoalitionId.from_mask(g.proper_masks[k]), float(vals[k])) for k in order))


def max_complaint(g: CoalitionGame, x, eps_tie: float = EPS_TIE) -> tuple[float, list[CoalitionId]]:
    """Largest complaint and every coalition within ``eps_tie`` of it."""
    vals = complaints(g, x)
    top = float(vals.max())
    attaining = [CoalitionId.from_mask(m) for m, v in zip(g.proper_masks, vals) if v >= top - eps_tie]
    return top, sorted(attaining)


def lex_compare(a, b, tol: float = 1e-9) -> int:
    """Compare two descending-sorted excess vectors lexicographically.

    Returns -1, 0 or 1.  Entries within ``tol`` of each other count as equal.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch("excess vectors differ in length")
    for p, q in zip(a, b):
        if p < q - tol:
            return -1
        if p > q + tol:
            return 1
    return 0
