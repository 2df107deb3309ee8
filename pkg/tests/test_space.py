"""Construction, validation, and boundary structure of spaces."""

import itertools

import numpy as np
import pytest

import rwtorsion as rw
from rwtorsion.space import PROPERTY_TOL

from _instances import random_domain, random_space


def test_build_space_basic():
    sp = rw.build_space(
        ["a", "b"],
        {"a": 2.0, "b": 1.0},
        [("a", "a", 0.5), ("a", "b", 0.5), ("b", "a", 1.0)],
    )
    assert sp.n_states == 2
    assert sp.states == ("a", "b")
    assert sp.nu_total == pytest.approx(3.0)
    assert sp.state_index("b") == 1
    assert sp.nu_of(["a", "b", "a"]) == pytest.approx(3.0)


def test_row_sums_are_exactly_renormalized():
    rng = np.random.default_rng(11)
    for _ in range(30):
        sp = random_space(rng, n_max=25)
        sums = sp.kernel.sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) <= 1e-12


def test_graph_spaces_are_reversible():
    rng = np.random.default_rng(5)
    for _ in range(30):
        sp = random_space(rng, n_max=25)
        report = rw.check_reversibility(sp, tol=1e-12)
        assert report.passed
        assert report.max_deviation <= 1e-15 * sp.nu_total


def test_check_reversibility_flags_asymmetry():
    sp = rw.build_space(
        ["a", "b"],
        [1.0, 1.0],
        [("a", "b", 1.0), ("b", "a", 0.5), ("b", "b", 0.5)],
    )
    report = rw.check_reversibility(sp)
    assert not report.passed
    assert report.worst_pair in {("a", "b"), ("b", "a")}
    assert report.max_deviation == pytest.approx(0.5)


def test_build_space_rejects_bad_rows():
    with pytest.raises(rw.RowNotStochastic):
        rw.build_space(["a"], [1.0], [("a", "a", 0.7)])
    with pytest.raises(rw.RowNotStochastic):
        rw.build_space(["a", "b"], [1.0, 1.0], [("a", "b", 1.0), ("b", "a", -0.2), ("b", "b", 1.2)])


def test_build_space_rejects_bad_nu():
    with pytest.raises(rw.NonpositiveMeasure):
        rw.build_space(["a"], [0.0], [("a", "a", 1.0)])
    with pytest.raises(rw.NonpositiveMeasure):
        rw.build_space(["a", "b"], {"a": 1.0}, [("a", "b", 1.0), ("b", "a", 1.0)])


def test_build_space_rejects_unknown_states():
    with pytest.raises(rw.UnknownState):
        rw.build_space(["a"], [1.0], [("a", "zz", 1.0)])
    with pytest.raises(rw.UnknownState):
        rw.build_space(["a", "a"], [1.0, 1.0], [("a", "a", 1.0)])


def test_state_lookup_errors():
    sp = rw.build_space(["a"], [1.0], [("a", "a", 1.0)])
    with pytest.raises(rw.UnknownState):
        sp.state_index("nope")
    with pytest.raises(rw.EmptyDomain):
        rw.make_domain(sp, [])


def test_space_from_csr_matches_build_space():
    rng = np.random.default_rng(3)
    sp = random_space(rng, n_max=12)
    rebuilt = rw.space_from_csr(sp.states, sp.nu.copy(), sp.kernel.copy())
    assert rebuilt.states == sp.states
    assert np.array_equal(rebuilt.nu, sp.nu)
    assert abs(rebuilt.kernel - sp.kernel).max() == 0.0


def test_closure_is_omega_plus_boundary():
    rng = np.random.default_rng(20)
    for _ in range(40):
        sp = random_space(rng, n_max=20)
        omega = random_domain(rng, sp, max_size=8)
        boundary = rw.m_boundary(sp, omega)
        closure = rw.m_closure(sp, omega)
        assert set(closure) == set(omega) | set(boundary)
        assert not set(boundary) & set(omega)
        # the boundary really is reachable in one jump from omega
        for state in boundary:
            assert rw.interaction(sp, omega, [state]) > 0.0


def test_domain_precomputes_consistent_views(five_path):
    dom = rw.make_domain(five_path, ["x2", "x1"])
    assert dom.omega == ("x1", "x2")
    assert dom.boundary == ("x3",)
    assert dom.closure == ("x1", "x2", "x3")
    assert dom.size == 2
    assert dom.nu_omega == pytest.approx(3.0)
    assert dom.nu_closure == pytest.approx(5.0)
    # sub-kernel rows are sub-stochastic with mass escaping from x2
    sums = dom.sub_kernel.sum(axis=1)
    assert sums[0] == pytest.approx(1.0)  # x1 only jumps to x2
    assert sums[1] == pytest.approx(0.5)


def _bruteforce_connected(space, omega):
    omega = tuple(omega)
    if len(omega) == 1:
        return rw.interaction(space, omega, omega) > 0.0
    members = list(omega)
    for r in range(1, len(members)):
        for part in itertools.combinations(members, r):
            rest = tuple(s for s in members if s not in part)
            if rw.interaction(space, part, rest) == 0.0:
                return False
    return True


def test_m_connected_matches_bruteforce():
    rng = np.random.default_rng(77)
    checked = 0
    while checked < 60:
        sp = random_space(rng, n_max=14)
        omega = random_domain(rng, sp, max_size=7)
        if len(omega) > 10:
            continue
        checked += 1
        assert rw.is_m_connected(sp, omega) == _bruteforce_connected(sp, omega)


def test_restrict_preserves_detailed_balance():
    rng = np.random.default_rng(41)
    for _ in range(25):
        sp = random_space(rng, n_max=18)
        omega = random_domain(rng, sp, max_size=9)
        sub = rw.restrict(sp, omega)
        report = rw.check_reversibility(sub, tol=1e-12)
        assert report.passed, report
        assert sub.states == tuple(sorted(omega, key=sp.state_index))


def test_restrict_redirects_escape_to_diagonal(lasso_unit):
    sub = rw.restrict(lasso_unit, ["x"])
    # x kept its loop mass 1/2 and gained the escape mass 1/2
    assert sub.kernel[0, 0] == pytest.approx(1.0)
    assert sub.nu[0] == pytest.approx(2.0)


def test_property_tolerance_is_strict():
    # the shared tolerance constants stay where the suite expects them
    assert PROPERTY_TOL == 1e-12
    assert rw.space.STRUCTURAL_TOL == 1e-9
