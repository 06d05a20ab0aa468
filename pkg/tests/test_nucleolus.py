import itertools

import numpy as np
import pytest

from fairbalance import (
    BankruptcyInstance,
    bankruptcy_game,
    CoalitionId,
    InfeasibleGame,
    UnsupportedPlayerCount,
    brute_force_min_max,
    excess_vector,
    make_game,
    max_complaint,
    min_max_lp,
    nucleolus,
)
from fairbalance.game import complaints, lex_compare

from conftest import all_subsets, random_game, random_superadditive_game


def test_taxi_min_max(taxi):
    t, x, tight = min_max_lp(taxi)
    assert t == pytest.approx(-5, abs=1e-12)
    np.testing.assert_allclose(x, [11, 5, 5], atol=1e-12)
    assert [c.key() for c in tight] == ["2", "3", "1,2", "1,3", "2,3"]


def test_symmetric_two_player_min_max():
    g = make_game(2, {"1,2": 1})
    t, x, _ = min_max_lp(g)
    assert t == pytest.approx(-0.5)
    np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-12)


def test_min_max_with_frozen_coalitions():
    g = bankruptcy_game(BankruptcyInstance(200, (100, 200, 300)))
    expected = (50, 75, 75)
    t1, _, tight = min_max_lp(g)
    assert t1 == pytest.approx(-50)
    # only {1} and {2,3} are tight in every optimum; {2},{3} can go lower
    assert {c.key() for c in tight} == {"1", "2,3"}
    t2, x2, tight2 = min_max_lp(g, {c: t1 for c in tight})
    assert t2 == pytest.approx(-75)
    np.testing.assert_allclose(x2, expected, atol=1e-9)
    assert {c.key() for c in tight2} == {"2", "3"}


def test_min_max_value_equals_max_complaint_of_free_coalitions():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = random_game(rng, 4)
        t, x, tight = min_max_lp(g)
        assert max(complaints(g, x)) == pytest.approx(t, abs=1e-9)
        frozen = {c: t for c in tight}
        if len(frozen) < len(g.proper_masks):
            t2, x2, _ = min_max_lp(g, frozen)
            free = [m for m in g.proper_masks if m not in {c.mask for c in tight}]
            assert max(complaints(g, x2, free)) == pytest.approx(t2, abs=1e-9)


def test_nucleolus_taxi_single_round(taxi):
    res = nucleolus(taxi)
    np.testing.assert_allclose(res.x, [11, 5, 5], atol=1e-9)
    assert len(res.rounds) == 1
    assert res.rounds[0].value == pytest.approx(-5, abs=1e-9)
    assert res.excess.values[0] == pytest.approx(-5, abs=1e-9)


def test_nucleolus_talmud(talmud):
    _, g, expected = talmud
    np.testing.assert_allclose(nucleolus(g).x, expected, atol=1e-9)


def test_nucleolus_symmetric(symmetric21):
    np.testing.assert_allclose(nucleolus(symmetric21).x, [7, 7, 7], atol=1e-12)


def test_nucleolus_zero_game():
    res = nucleolus(make_game(3, {"1,2,3": 0}))
    np.testing.assert_allclose(res.x, 0, atol=1e-12)
    assert res.rounds[0].value == pytest.approx(0, abs=1e-12)


def test_infeasible_game():
    g = make_game(3, {"1,2,3": 5, "1": 3, "2": 3})
    with pytest.raises(InfeasibleGame):
        nucleolus(g)
    with pytest.raises(InfeasibleGame):
        min_max_lp(g)
    with pytest.raises(InfeasibleGame):
        brute_force_min_max(g, 1)


def test_round_values_strictly_decrease():
    rng = np.random.default_rng(11)
    multi = 0
    for _ in range(40):
        g = random_game(rng, int(rng.integers(3, 5)), integer=True)
        vals = nucleolus(g).values
        multi += len(vals) > 1
        assert all(a > b for a, b in zip(vals, vals[1:])), vals
    assert multi > 0


def test_brute_force_oracle_examples(taxi, symmetric21):
    np.testing.assert_allclose(brute_force_min_max(taxi, 0.5), [11, 5, 5])
    np.testing.assert_allclose(brute_force_min_max(symmetric21, 1), [7, 7, 7])
    with pytest.raises(UnsupportedPlayerCount):
        brute_force_min_max(make_game(2, {"1,2": 1}), 0.5)


def test_lp_beats_every_grid_point_small_sample():
    rng = np.random.default_rng(7)
    for _ in range(10):
        g = random_superadditive_game(rng)
        nx = excess_vector(g, nucleolus(g).x).values
        grid = excess_vector(g, brute_force_min_max(g, 0.25)).values
        assert lex_compare(nx, grid, tol=1e-9) <= 0


def test_no_improving_perturbation():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(3, 5))
        g = random_game(rng, n)
        x = nucleolus(g).x
        base = excess_vector(g, x).values
        lo = g.singleton_worths
        for _ in range(50):
            d = rng.normal(size=n) * 10 ** rng.uniform(-4, 0)
            d -= d.mean()
            y = x + d
            if np.any(y < lo):
                continue
            assert lex_compare(excess_vector(g, y).values, base, tol=1e-9) >= 0


def permute_game(g, perm):
    """Relabel players: player i becomes perm[i-1]."""
    worths = {}
    for s in all_subsets(g.n, proper=False):
        worths[tuple(sorted(perm[i - 1] for i in s))] = g.v(s)
    return make_game(g.n, worths)


def test_anonymity():
    rng = np.random.default_rng(17)
    for _ in range(15):
        n = int(rng.integers(3, 5))
        g = random_game(rng, n)
        perm = [int(p) + 1 for p in rng.permutation(n)]
        x = nucleolus(g).x
        xp = nucleolus(permute_game(g, perm)).x
        np.testing.assert_allclose(xp[np.array(perm) - 1], x, atol=1e-6)


def test_covariance():
    rng = np.random.default_rng(19)
    for _ in range(15):
        n = int(rng.integers(3, 5))
        g = random_game(rng, n)
        lam = rng.uniform(0.2, 5)
        c = rng.uniform(-10, 10, n)
        x = nucleolus(g).x
        scaled = make_game(n, {s: lam * g.v(s) for s in all_subsets(n, proper=False)})
        np.testing.assert_allclose(nucleolus(scaled).x, lam * x, atol=1e-6)
        shifted = make_game(
            n, {s: g.v(s) + sum(c[i - 1] for i in s) for s in all_subsets(n, proper=False)}
        )
        np.testing.assert_allclose(nucleolus(shifted).x, x + c, atol=1e-6)


def test_larger_game_terminates_with_imputation():
    rng = np.random.default_rng(23)
    g = random_game(rng, 6)
    res = nucleolus(g)
    assert abs(res.x.sum() - g.grand_worth) < 1e-9
    assert np.all(res.x >= g.singleton_worths - 1e-9)
    top, _ = max_complaint(g, res.x)
    assert top == pytest.approx(res.rounds[0].value, abs=1e-9)


def test_rounds_record_fixed_coalitions(taxi):
    res = nucleolus(taxi)
    fixed = {c for r in res.rounds for c in r.fixed}
    assert CoalitionId([1]) not in fixed
