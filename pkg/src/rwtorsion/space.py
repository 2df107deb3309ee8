"""Finite random walk spaces.

A space is a finite state set X, a positive weight measure nu on X, and a
row-stochastic jump kernel: row x holds the probability measure m_x that
governs a single jump out of x.  The pair is reversible when the detailed
balance relation nu(x) P(x, y) = nu(y) P(y, x) holds for every pair.

A study domain omega is a subset of X.  Its m-boundary is the set of
states outside omega that a single jump from omega can reach with positive
probability (equivalently, by reversibility, states outside omega whose
own jump measure charges omega); the m-closure is omega plus its boundary.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import (
    EmptyDomain,
    NonpositiveMeasure,
    NotReversible,
    RowNotStochastic,
    UnknownState,
)

# Structural validation tolerance (row sums, detailed balance checks).
STRUCTURAL_TOL = 1e-9
# Tolerance for exact-identity assertions, scaled by max(1, magnitude).
PROPERTY_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class FiniteRWSpace:
    """Immutable finite random walk space [X, kernel, nu].

    states   : ordered state identifiers (opaque strings)
    nu       : positive weights, aligned with states
    kernel   : sparse row-stochastic matrix; row x is the jump measure m_x
    index    : identifier -> dense row index
    """

    states: tuple[str, ...]
    nu: np.ndarray
    kernel: sparse.csr_array
    index: Mapping[str, int] = dataclasses.field(repr=False)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def nu_total(self) -> float:
        return float(self.nu.sum())

    def state_index(self, state: str) -> int:
        try:
            return self.index[state]
        except KeyError:
            raise UnknownState(f"unknown state {state!r}") from None

    def nu_of(self, states: Iterable[str]) -> float:
        idx = resolve_indices(self, states, allow_empty=True)
        return float(self.nu[idx].sum())


@dataclasses.dataclass(frozen=True)
class Domain:
    """A study subset omega of a space, with its boundary data precomputed.

    sub_kernel is the omega-by-omega block of the jump kernel (rows are
    sub-stochastic: the missing mass is the per-jump escape probability).
    """

    space: FiniteRWSpace = dataclasses.field(repr=False)
    omega: tuple[str, ...]
    boundary: tuple[str, ...]
    closure: tuple[str, ...]
    omega_idx: np.ndarray = dataclasses.field(repr=False)
    boundary_idx: np.ndarray = dataclasses.field(repr=False)
    closure_idx: np.ndarray = dataclasses.field(repr=False)
    sub_kernel: sparse.csr_array = dataclasses.field(repr=False)

    @property
    def size(self) -> int:
        return len(self.omega)

    @property
    def nu_omega(self) -> float:
        return float(self.space.nu[self.omega_idx].sum())

    @property
    def nu_closure(self) -> float:
        return float(self.space.nu[self.closure_idx].sum())


def resolve_indices(
    space: FiniteRWSpace, states: Iterable[str], allow_empty: bool = False
) -> np.ndarray:
    """Map identifiers to a sorted, duplicate-free dense index array."""
    idx = sorted({space.state_index(s) for s in states})
    if not idx and not allow_empty:
        raise EmptyDomain("domain contains no states")
    return np.asarray(idx, dtype=np.intp)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def build_space(
    states: Sequence[str],
    nu_weights: Mapping[str, float] | Sequence[float],
    kernel_entries: Mapping[tuple[str, str], float] | Iterable[tuple[str, str, float]],
) -> FiniteRWSpace:
    """Assemble and validate a finite random walk space.

    kernel_entries may be a {(x, y): mass} mapping or an iterable of
    (x, y, mass) triples; absent entries mean mass zero.  Rows must sum to
    one within 1e-9 and are then renormalized exactly.
    """
    states = tuple(str(s) for s in states)
    if len(set(states)) != len(states):
        raise UnknownState("duplicate state identifiers")
    if not states:
        raise EmptyDomain("a space needs at least one state")
    index = {s: i for i, s in enumerate(states)}

    if isinstance(nu_weights, Mapping):
        missing = [s for s in states if s not in nu_weights]
        if missing:
            raise NonpositiveMeasure(f"no nu weight for states {missing}")
        nu = np.array([float(nu_weights[s]) for s in states])
    else:
        nu = np.asarray(nu_weights, dtype=float)
        if nu.shape != (len(states),):
            raise NonpositiveMeasure(
                f"nu has shape {nu.shape}, expected ({len(states)},)"
            )
    if not np.all(np.isfinite(nu)) or np.any(nu <= 0.0):
        raise NonpositiveMeasure("nu weights must be finite and positive")

    if isinstance(kernel_entries, Mapping):
        triples = [(x, y, m) for (x, y), m in kernel_entries.items()]
    else:
        triples = [(x, y, m) for x, y, m in kernel_entries]
    rows, cols, data = [], [], []
    for x, y, mass in triples:
        i = index.get(x)
        j = index.get(y)
        if i is None or j is None:
            raise UnknownState(f"kernel entry ({x!r}, {y!r}) references a missing state")
        mass = float(mass)
        if not np.isfinite(mass) or mass < 0.0:
            raise RowNotStochastic(
                f"kernel mass for ({x!r}, {y!r}) is {mass}; masses must be >= 0"
            )
        rows.append(i)
        cols.append(j)
        data.append(mass)

    n = len(states)
    kernel = sparse.coo_array(
        (np.asarray(data, dtype=float), (rows, cols)), shape=(n, n)
    ).tocsr()
    kernel.sum_duplicates()
    kernel.eliminate_zeros()

    row_sums = kernel.sum(axis=1)
    bad = np.flatnonzero(np.abs(row_sums - 1.0) > STRUCTURAL_TOL)
    if bad.size:
        worst = bad[np.argmax(np.abs(row_sums[bad] - 1.0))]
        raise RowNotStochastic(
            f"row {states[worst]!r} sums to {row_sums[worst]:.12g}, not 1"
        )
    # Renormalize so downstream identities can rely on exact unit rows.
    scale = sparse.dia_array((1.0 / row_sums[None, :], [0]), shape=(n, n))
    kernel = (scale @ kernel).tocsr()
    kernel.data.setflags(write=False)

    return FiniteRWSpace(states=states, nu=_freeze(nu), kernel=kernel, index=index)


def space_from_csr(
    states: Sequence[str], nu: np.ndarray, kernel: sparse.csr_array
) -> FiniteRWSpace:
    """Assemble a space from prebuilt arrays (grid-scale fast path).

    Applies the same validation and exact row renormalization as
    build_space without materializing per-entry triples.
    """
    states = tuple(states)
    nu = np.asarray(nu, dtype=float)
    if not np.all(np.isfinite(nu)) or np.any(nu <= 0.0):
        raise NonpositiveMeasure("nu weights must be finite and positive")
    if np.any(kernel.data < 0.0):
        raise RowNotStochastic("kernel masses must be >= 0")
    n = len(states)
    row_sums = kernel.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > STRUCTURAL_TOL):
        worst = int(np.argmax(np.abs(row_sums - 1.0)))
        raise RowNotStochastic(
            f"row {states[worst]!r} sums to {row_sums[worst]:.12g}, not 1"
        )
    scale = sparse.dia_array((1.0 / row_sums[None, :], [0]), shape=(n, n))
    kernel = (scale @ kernel).tocsr()
    kernel.data.setflags(write=False)
    index = {s: i for i, s in enumerate(states)}
    return FiniteRWSpace(states=states, nu=_freeze(nu), kernel=kernel, index=index)


@dataclasses.dataclass(frozen=True)
class ReversibilityReport:
    max_deviation: float
    passed: bool
    worst_pair: tuple[str, str] | None


def check_reversibility(space: FiniteRWSpace, tol: float = STRUCTURAL_TOL) -> ReversibilityReport:
    """Measure the worst detailed-balance violation nu(x)P(x,y) - nu(y)P(y,x)."""
    n = space.n_states
    weighted = sparse.dia_array((space.nu[None, :], [0]), shape=(n, n)) @ space.kernel
    dev = (weighted - weighted.T).tocoo()
    if dev.nnz == 0 or dev.data.size == 0:
        return ReversibilityReport(0.0, True, None)
    k = int(np.argmax(np.abs(dev.data)))
    max_dev = float(abs(dev.data[k]))
    pair = (space.states[int(dev.coords[0][k])], space.states[int(dev.coords[1][k])])
    return ReversibilityReport(max_dev, max_dev <= tol, pair if max_dev > 0 else None)


def require_reversible(space: FiniteRWSpace, tol: float = STRUCTURAL_TOL) -> None:
    report = check_reversibility(space, tol)
    if not report.passed:
        raise NotReversible(
            f"detailed balance violated by {report.max_deviation:.3g} at {report.worst_pair}"
        )


def m_boundary(space: FiniteRWSpace, omega: Iterable[str]) -> tuple[str, ...]:
    """States outside omega whose jump measure charges omega.

    For reversible spaces this equals the set of states outside omega that
    omega can reach in one jump.
    """
    idx = resolve_indices(space, omega, allow_empty=True)
    mass_into = np.asarray(space.kernel[:, idx].sum(axis=1)).ravel()
    inside = np.zeros(space.n_states, dtype=bool)
    inside[idx] = True
    hit = np.flatnonzero(~inside & (mass_into > 0.0))
    return tuple(space.states[i] for i in hit)


def m_closure(space: FiniteRWSpace, omega: Iterable[str]) -> tuple[str, ...]:
    idx = resolve_indices(space, omega, allow_empty=True)
    boundary = m_boundary(space, omega)
    both = sorted(set(idx.tolist()) | {space.state_index(s) for s in boundary})
    return tuple(space.states[i] for i in both)


def make_domain(space: FiniteRWSpace, omega: Iterable[str]) -> Domain:
    omega_idx = resolve_indices(space, omega)
    boundary = m_boundary(space, (space.states[i] for i in omega_idx))
    boundary_idx = np.asarray([space.state_index(s) for s in boundary], dtype=np.intp)
    closure_idx = np.asarray(
        sorted(set(omega_idx.tolist()) | set(boundary_idx.tolist())), dtype=np.intp
    )
    sub = space.kernel[omega_idx][:, omega_idx].tocsr()
    return Domain(
        space=space,
        omega=tuple(space.states[i] for i in omega_idx),
        boundary=boundary,
        closure=tuple(space.states[i] for i in closure_idx),
        omega_idx=omega_idx,
        boundary_idx=boundary_idx,
        closure_idx=closure_idx,
        sub_kernel=sub,
    )


def is_m_connected(space: FiniteRWSpace, omega: Iterable[str]) -> bool:
    """Whether omega cannot be split into two parts with zero interaction.

    Checked on the support graph of the kernel restricted to omega
    (self-loops ignored); a singleton counts as connected only when it
    carries a self-loop, since both halves of its trivial split must
    interact.
    """
    idx = resolve_indices(space, omega)
    if idx.size == 1:
        i = int(idx[0])
        return float(space.kernel[[i]][:, [i]].sum()) > 0.0
    sub = space.kernel[idx][:, idx].tolil()
    sub.setdiag(0.0)
    sub = sub.tocsr()
    support = (sub + sub.T) > 0
    n_comp = csgraph.connected_components(support, directed=False, return_labels=False)
    return int(n_comp) == 1


def restrict(space: FiniteRWSpace, omega: Iterable[str]) -> FiniteRWSpace:
    """The walk restricted to omega: jumps leaving omega stay put instead.

    Off-diagonal masses inside omega are kept as they are and the escape
    probability is added to the diagonal, which preserves detailed balance.
    """
    idx = resolve_indices(space, omega)
    sub = space.kernel[idx][:, idx].tolil()
    inside_mass = np.asarray(sub.sum(axis=1)).ravel()
    sub.setdiag(sub.diagonal() + np.maximum(0.0, 1.0 - inside_mass))
    states = tuple(space.states[i] for i in idx)
    entries = sub.tocoo()
    triples = [
        (states[int(i)], states[int(j)], float(v))
        for i, j, v in zip(entries.coords[0], entries.coords[1], entries.data)
    ]
    return build_space(states, space.nu[idx], triples)
