import itertools

import numpy as np
import pytest

from fairbalance import BankruptcyInstance, bankruptcy_game, make_game

TAXI_WORTHS = {"1,2,3": 21, "1,2": 11, "1,3": 11, "2,3": 5, "1": 0, "2": 0, "3": 0}
TALMUD_DEBTS = (100, 200, 300)
TALMUD_TABLE = {
    100: (100 / 3, 100 / 3, 100 / 3),
    200: (50.0, 75.0, 75.0),
    300: (50.0, 100.0, 150.0),
}

_ACCEPTANCE = []


@pytest.fixture
def taxi():
    return make_game(3, TAXI_WORTHS)


@pytest.fixture
def symmetric21():
    return make_game(3, {"1,2,3": 21})


@pytest.fixture(params=sorted(TALMUD_TABLE))
def talmud(request):
    estate = request.param
    inst = BankruptcyInstance(estate, TALMUD_DEBTS)
    return inst, bankruptcy_game(inst), TALMUD_TABLE[estate]


def all_subsets(n, proper=True):
    top = n - 1 if proper else n
    for size in range(1, top + 1):
        yield from itertools.combinations(range(1, n + 1), size)


def random_game(rng, n, integer=False, lo=0.0, hi=20.0):
    """Random game with a nonempty imputation set."""
    worths = {}
    for s in all_subsets(n, proper=False):
        w = rng.integers(int(lo), int(hi) + 1) if integer else rng.uniform(lo, hi)
        worths[s] = float(w)
    grand = tuple(range(1, n + 1))
    singles = sum(worths[(i,)] for i in range(1, n + 1))
    worths[grand] = max(worths[grand], singles + (0 if integer else rng.uniform(0, 5)))
    return make_game(n, worths)


def is_superadditive(worths, n):
    for s in all_subsets(n, proper=False):
        for t in all_subsets(n, proper=False):
            if set(s) & set(t):
                continue
            u = tuple(sorted(set(s) | set(t)))
            if worths[u] < worths[s] + worths[t]:
                return False
    return True


def random_superadditive_game(rng, n=3, hi=20):
    while True:
        worths = {s: int(rng.integers(0, hi + 1)) for s in all_subsets(n, proper=False)}
        if is_superadditive(worths, n):
            return make_game(n, worths)


def record_criterion(number, title, passed, detail=""):
    _ACCEPTANCE.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}" + (f"  ({detail})" if detail else ""))
