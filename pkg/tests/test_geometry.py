"""Perimeter, curvature, total variation, and Cheeger search."""

import itertools

import numpy as np
import pytest

import rwtorsion as rw

from _instances import lasso, random_domain, random_space


def _complement(space, subset):
    inside = set(subset)
    return [s for s in space.states if s not in inside]


def test_perimeter_is_interaction_with_complement():
    rng = np.random.default_rng(101)
    for _ in range(40):
        sp = random_space(rng, n_max=20)
        e = random_domain(rng, sp, max_size=10)
        per = rw.perimeter(sp, e)
        via_interaction = rw.interaction(sp, e, _complement(sp, e))
        assert per == pytest.approx(via_interaction, abs=1e-12 * max(1.0, sp.nu_total))
        assert -1e-12 <= per <= sp.nu_of(e) + 1e-12


def test_standing_domain_has_positive_strict_perimeter():
    rng = np.random.default_rng(55)
    for _ in range(20):
        sp = random_space(rng, n_max=16)
        omega = random_domain(rng, sp, max_size=8)
        if not rw.m_boundary(sp, omega):
            continue
        per = rw.perimeter(sp, omega)
        assert 0.0 < per < sp.nu_of(omega) + 1e-12


def test_interaction_symmetry_under_reversibility():
    rng = np.random.default_rng(7)
    for _ in range(25):
        sp = random_space(rng, n_max=18)
        a = random_domain(rng, sp, max_size=6)
        b = random_domain(rng, sp, max_size=6)
        lab = rw.interaction(sp, a, b)
        lba = rw.interaction(sp, b, a)
        assert lab == pytest.approx(lba, abs=1e-12 * max(1.0, sp.nu_total))


def test_curvature_integral_identity():
    # summing nu(x) (1 - 2 m_x(E)) over E telescopes to 2 P(E) - nu(E)
    rng = np.random.default_rng(2)
    for _ in range(30):
        sp = random_space(rng, n_max=15)
        e = random_domain(rng, sp, max_size=8)
        total = sum(sp.nu_of([x]) * rw.mean_curvature(sp, e, x) for x in e)
        expected = 2.0 * rw.perimeter(sp, e) - sp.nu_of(e)
        assert total == pytest.approx(expected, abs=1e-12 * max(1.0, sp.nu_total))


def test_mean_curvature_lasso_values(lasso_unit):
    assert rw.mean_curvature(lasso_unit, ["x"], "x") == pytest.approx(0.0)
    assert rw.mean_curvature(lasso_unit, ["x"], "y") == pytest.approx(-1.0)
    assert rw.mean_curvature(lasso_unit, ["y"], "x") == pytest.approx(0.0)


def test_total_variation_of_indicator_is_perimeter():
    rng = np.random.default_rng(31)
    for _ in range(25):
        sp = random_space(rng, n_max=18)
        e = random_domain(rng, sp, max_size=9)
        inside = set(e)
        tv = rw.total_variation(sp, {s: 1.0 if s in inside else 0.0 for s in sp.states})
        assert tv == pytest.approx(rw.perimeter(sp, e), abs=1e-12 * max(1.0, sp.nu_total))


def test_total_variation_accepts_arrays_and_is_subadditive():
    rng = np.random.default_rng(8)
    sp = random_space(rng, n_max=12)
    f = rng.normal(size=sp.n_states)
    g = rng.normal(size=sp.n_states)
    tv_sum = rw.total_variation(sp, f + g)
    assert tv_sum <= rw.total_variation(sp, f) + rw.total_variation(sp, g) + 1e-12


def test_cheeger_lasso(lasso_unit):
    res = rw.cheeger(lasso_unit, ["x"])
    assert res.value == pytest.approx(0.5)
    assert res.argmin_set == ("x",)
    assert res.certified
    assert res.mode == "exhaustive"


def test_cheeger_matches_bruteforce_enumeration():
    rng = np.random.default_rng(13)
    for _ in range(12):
        sp = random_space(rng, n_max=12)
        omega = random_domain(rng, sp, max_size=7)
        for p in (1.0, 1.5, 2.0):
            res = rw.cheeger(sp, omega, p=p)
            best = min(
                rw.perimeter(sp, subset) / sp.nu_of(subset) ** p
                for r in range(1, len(omega) + 1)
                for subset in itertools.combinations(omega, r)
            )
            assert res.value == pytest.approx(best, rel=1e-12, abs=1e-12)


def test_no_indicator_beats_the_cheeger_minimum():
    rng = np.random.default_rng(47)
    for _ in range(15):
        sp = random_space(rng, n_max=14)
        omega = random_domain(rng, sp, max_size=8)
        h1 = rw.cheeger(sp, omega).value
        for r in range(1, len(omega) + 1):
            for subset in itertools.combinations(omega, r):
                inside = set(subset)
                f = {s: 1.0 if s in inside else 0.0 for s in sp.states}
                ratio = rw.total_variation(sp, f) / sp.nu_of(subset)
                assert ratio >= h1 * (1.0 - 1e-12)


def test_greedy_never_beats_exhaustive():
    rng = np.random.default_rng(29)
    for _ in range(20):
        sp = random_space(rng, n_max=16)
        omega = random_domain(rng, sp, max_size=9)
        for p in (1.0, 2.0):
            exact = rw.cheeger(sp, omega, p=p, mode="exhaustive")
            greedy = rw.cheeger(sp, omega, p=p, mode="greedy")
            assert not greedy.certified
            assert greedy.value >= exact.value - 1e-12 * max(1.0, exact.value)


def test_greedy_respects_budget():
    rng = np.random.default_rng(3)
    sp = random_space(rng, n_max=16)
    omega = random_domain(rng, sp, max_size=9)
    tight = rw.cheeger(sp, omega, mode="greedy", budget=1)
    free = rw.cheeger(sp, omega, mode="greedy")
    assert tight.value >= free.value - 1e-12


def test_cheeger_tie_break_prefers_small_then_lexicographic():
    g = rw.WeightedGraph.from_edges([("c", "a", 1.0), ("c", "b", 1.0)])
    sp = rw.from_weighted_graph(g)
    res = rw.cheeger(sp, ["a", "b"])
    # {a}, {b}, {a,b} all have ratio 1; the reported argmin must be {a}
    assert res.value == pytest.approx(1.0)
    assert res.argmin_set == ("a",)


def test_exhaustive_mode_refuses_large_domains():
    edges = [(f"v{i:02d}", f"v{i+1:02d}", 1.0) for i in range(24)]
    sp = rw.from_weighted_graph(rw.WeightedGraph.from_edges(edges))
    omega = [f"v{i:02d}" for i in range(23)]
    with pytest.raises(rw.DomainTooLarge):
        rw.cheeger(sp, omega, mode="exhaustive")
    # greedy still runs on the same domain
    res = rw.cheeger(sp, omega, mode="greedy")
    assert res.value > 0.0


def test_cheeger_rejects_unknown_mode(lasso_unit):
    with pytest.raises(ValueError):
        rw.cheeger(lasso_unit, ["x"], mode="annealed")


def test_is_calibrable_lasso(lasso_unit):
    assert rw.is_calibrable(lasso_unit, ["x"])


def test_is_calibrable_detects_a_better_subset():
    g = rw.WeightedGraph.from_edges(
        [("a", "b", 1.0), ("b", "c", 0.01), ("c", "d", 1.0)]
    )
    sp = rw.from_weighted_graph(g)
    assert not rw.is_calibrable(sp, ["a", "b", "c"])
    assert rw.is_calibrable(sp, ["a", "b"])
