"""Torsional rigidity of a domain in a random walk space.

The central object is the jump series g(n): the nu-mass of walks that stay
inside omega for n consecutive jumps,

    g(n) = nu|_omega . (P_omega)^n . 1,

where P_omega is the kernel block on omega.  Everything else unwinds
from it: the torsional rigidity T(omega) is the series sum (equivalently
nu . f for the stress function f solving (I - P_omega) f = 1), the heat
content at time t is the Poisson-weighted sum of g, exit-time moments are
binomial-weighted sums, and the domain's first nontrivial eigenvalue is
recovered either exactly from the symmetrized block or from the limit of
g-ratios.  A p-power version of the stress problem gives the p-torsion.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Iterable

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg
from scipy.special import gammaln
from scipy.stats import nbinom, poisson

from . import geometry
from .errors import (
    NoConvergence,
    NonConvergence,
    SingularSystem,
    StandingAssumptionViolated,
    ZeroFunction,
    ZeroG,
)
from .space import Domain, FiniteRWSpace, make_domain, require_reversible

_RATIO_WINDOW = 5
_RATIO_CEILING = 1.0 - 1e-12
_DENSE_SOLVE_LIMIT = 600
_DENSE_EIG_LIMIT = 500


@dataclasses.dataclass(frozen=True)
class GSequence:
    """Values g(0..n) of the stay-inside series and a trailing ratio."""

    values: np.ndarray
    ratio_estimate: float | None


@dataclasses.dataclass(frozen=True)
class TorsionResult:
    domain_states: tuple[str, ...]
    stress: np.ndarray
    rigidity: float
    terms_used: int | None = None
    error_estimate: float | None = None

    def stress_map(self) -> dict[str, float]:
        return {s: float(v) for s, v in zip(self.domain_states, self.stress)}


@dataclasses.dataclass(frozen=True)
class PTorsionResult:
    domain_states: tuple[str, ...]
    values: np.ndarray
    p: float
    rigidity_p: float
    energy_gap: float
    iterations: int
    residual: float

    def value_map(self) -> dict[str, float]:
        return {s: float(v) for s, v in zip(self.domain_states, self.values)}


@dataclasses.dataclass(frozen=True)
class LambdaPEstimate:
    value: float
    p: float
    certified: bool


def _domain_of(space: FiniteRWSpace, omega) -> Domain:
    if isinstance(omega, Domain):
        return omega
    return make_domain(space, omega)


def _require_standing(domain: Domain) -> None:
    if len(domain.boundary) == 0:
        raise StandingAssumptionViolated(
            "omega has an empty m-boundary: nu(closure) must exceed nu(omega)"
        )


def g_sequence(space: FiniteRWSpace, omega: Iterable[str], n_max: int) -> GSequence:
    """Compute g(0..n_max) by iterating the kernel block on omega."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    dom = _domain_of(space, omega)
    _require_standing(dom)
    sub_t = dom.sub_kernel.T.tocsr()
    v = space.nu[dom.omega_idx].copy()
    values = np.empty(n_max + 1)
    values[0] = v.sum()
    for n in range(1, n_max + 1):
        v = sub_t @ v
        values[n] = v.sum()
    ratio = None
    if n_max >= 1 and values[n_max - 1] > 0.0:
        ratio = float(values[n_max] / values[n_max - 1])
    values.setflags(write=False)
    return GSequence(values=values, ratio_estimate=ratio)


def torsion_series(
    space: FiniteRWSpace,
    omega: Iterable[str],
    rel_tol: float = 1e-10,
    n_cap: int = 100_000,
) -> TorsionResult:
    """Sum the jump series until its geometric tail bound drops below rel_tol.

    The tail ratio rho is the largest g(k)/g(k-1) over a trailing window of
    width 5; the stress function is accumulated alongside as the running sum
    of (P_omega)^n 1.
    """
    dom = _domain_of(space, omega)
    _require_standing(dom)
    sub = dom.sub_kernel
    nu_o = space.nu[dom.omega_idx]

    w = np.ones(dom.size)
    stress = np.ones(dom.size)
    g_prev = float(nu_o.sum())
    total = g_prev
    ratios: list[float] = []
    n = 0
    while n < n_cap:
        n += 1
        w = sub @ w
        g_n = float(nu_o @ w)
        total += g_n
        stress += w
        if g_n == 0.0:
            return TorsionResult(
                domain_states=dom.omega,
                stress=stress,
                rigidity=total,
                terms_used=n,
                error_estimate=0.0,
            )
        ratios.append(g_n / g_prev)
        g_prev = g_n
        rho = max(ratios[-_RATIO_WINDOW:])
        if rho >= _RATIO_CEILING:
            raise NoConvergence(
                f"tail ratio {rho:.17g} at term {n}; the domain's eigenvalue is "
                "numerically zero and the series cannot be bounded"
            )
        tail = g_n * rho / (1.0 - rho)
        # The window ratio lags the asymptotic one from below while the
        # ratios are still climbing, so stop well under the requested
        # tolerance to keep the delivered error inside it.
        if tail <= 0.25 * rel_tol * total:
            return TorsionResult(
                domain_states=dom.omega,
                stress=stress,
                rigidity=total,
                terms_used=n,
                error_estimate=tail,
            )
    raise NoConvergence(f"series did not meet rel_tol={rel_tol} within {n_cap} terms")


def _solve_stress_system(sub: sparse.csr_array, size: int) -> np.ndarray:
    rhs = np.ones(size)
    system = (sparse.eye_array(size, format="csr") - sub).tocsc()
    if size <= _DENSE_SOLVE_LIMIT:
        dense = system.toarray()
        try:
            f = np.linalg.solve(dense, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(
                "I - P_omega is singular: omega contains a closed communicating class"
            ) from exc
        refine = lambda r: np.linalg.solve(dense, r)
    else:
        try:
            lu = sparse_linalg.splu(system)
        except RuntimeError as exc:
            raise SingularSystem(
                "I - P_omega is singular: omega contains a closed communicating class"
            ) from exc
        f = lu.solve(rhs)
        refine = lu.solve
    for _ in range(2):
        residual = rhs - system @ f
        if np.max(np.abs(residual)) <= 1e-12 * size:
            break
        f = f + refine(residual)
    residual = rhs - system @ f
    scale = max(1.0, float(np.max(np.abs(f))))
    if not np.all(np.isfinite(f)) or np.max(np.abs(residual)) > 1e-12 * size * scale:
        raise SingularSystem(
            "stress system is numerically singular "
            f"(residual {np.max(np.abs(residual)):.3g})"
        )
    return f


def stress_solve(space: FiniteRWSpace, omega: Iterable[str]) -> TorsionResult:
    """Solve (I - P_omega) f = 1 directly; rigidity is nu . f."""
    dom = _domain_of(space, omega)
    _require_standing(dom)
    f = _solve_stress_system(dom.sub_kernel, dom.size)
    nu_o = space.nu[dom.omega_idx]
    return TorsionResult(
        domain_states=dom.omega,
        stress=f,
        rigidity=float(nu_o @ f),
        terms_used=None,
        error_estimate=None,
    )


class _GSeries:
    """Incrementally extendable g-sequence over a fixed domain."""

    def __init__(self, space: FiniteRWSpace, dom: Domain):
        self.sub_t = dom.sub_kernel.T.tocsr()
        self.v = space.nu[dom.omega_idx].copy()
        self.values = [float(self.v.sum())]

    def value(self, n: int) -> float:
        while len(self.values) <= n:
            self.v = self.sub_t @ self.v
            self.values.append(float(self.v.sum()))
        return self.values[n]

    def trailing_ratio(self) -> float:
        vals = self.values
        ratios = [
            vals[k] / vals[k - 1]
            for k in range(max(1, len(vals) - _RATIO_WINDOW), len(vals))
            if vals[k - 1] > 0.0
        ]
        return max(ratios) if ratios else 0.0


def heat_content(
    space: FiniteRWSpace, omega: Iterable[str], t: float, rel_tol: float = 1e-12
) -> float:
    """Q(t) = sum_k g(k) e^{-t} t^k / k!, the expected nu-mass still inside.

    Poisson weights are evaluated in log space so large t does not
    underflow; the truncation tail is bounded by g(n) times the Poisson
    upper tail, which is valid because g is non-increasing.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    dom = _domain_of(space, omega)
    _require_standing(dom)
    series = _GSeries(space, dom)
    if t == 0.0:
        return series.value(0)

    log_t = math.log(t)
    total = 0.0
    n = 0
    while True:
        g_n = series.value(n)
        if g_n == 0.0:
            return total
        weight = math.exp(-t + n * log_t - float(gammaln(n + 1)))
        total += g_n * weight
        tail = g_n * float(poisson.sf(n, t))
        if total > 0.0 and tail <= rel_tol * total:
            return total
        n += 1
        if n > 100_000:
            raise NoConvergence(f"heat content at t={t} did not converge")


def heat_content_integral(
    space: FiniteRWSpace, omega: Iterable[str], rel_tol: float = 1e-9
) -> float:
    """Quadrature of the heat content over (0, infinity).

    Composite 20-point Gauss-Legendre on [0, T_cut], with T_cut chosen so
    the geometric tail of Q is below rel_tol times the rigidity.  Used as
    an independent cross-check of the series identity integral(Q) = T.
    """
    dom = _domain_of(space, omega)
    _require_standing(dom)

    # Materialize g until its own geometric tail is negligible.
    series = _GSeries(space, dom)
    n = 0
    while True:
        g_n = series.value(n)
        rho = series.trailing_ratio()
        if g_n == 0.0:
            break
        if n >= 1 and rho < _RATIO_CEILING:
            partial = sum(series.values)
            if g_n * rho / (1.0 - rho) <= 1e-13 * partial:
                break
        if rho >= _RATIO_CEILING:
            raise NoConvergence("g-sequence tail ratio is numerically 1")
        n += 1
        if n > 100_000:
            raise NoConvergence("g-sequence did not converge")
    g = np.asarray(series.values)
    total = float(g.sum())
    rho = max(series.trailing_ratio(), 1e-6)

    gap = 1.0 - rho
    t_cut = max(10.0, math.log(max(g[0] / (gap * rel_tol * total), 2.0)) / gap)
    panel_width = 0.5 / gap
    n_panels = int(min(4000, max(16, math.ceil(t_cut / panel_width))))
    nodes, weights = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(0.0, t_cut, n_panels + 1)

    k = np.arange(g.size)
    log_fact = gammaln(k + 1.0)
    integral = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        t_vals = lo + half * (nodes + 1.0)
        log_w = -t_vals[None, :] + k[:, None] * np.log(t_vals)[None, :] - log_fact[:, None]
        q_vals = g @ np.exp(log_w)
        integral += half * float(weights @ q_vals)
    return integral


def exit_moment(
    space: FiniteRWSpace, omega: Iterable[str], j: int, rel_tol: float = 1e-10
) -> float:
    """j-th moment of the exit time: j! sum_k C(k+j-1, j-1) g(k).

    The truncation tail is bounded through the negative-binomial upper
    tail at the trailing g-ratio, evaluated in log space.
    """
    if j < 1 or j != int(j):
        raise ValueError("moment order j must be a positive integer")
    j = int(j)
    dom = _domain_of(space, omega)
    _require_standing(dom)
    series = _GSeries(space, dom)

    total = 0.0
    coeff = 1.0  # C(k+j-1, j-1), starting at k=0
    n = 0
    while True:
        g_n = series.value(n)
        if g_n == 0.0:
            break
        total += coeff * g_n
        rho = series.trailing_ratio()
        if n >= _RATIO_WINDOW:
            if rho >= _RATIO_CEILING:
                raise NoConvergence("g-sequence tail ratio is numerically 1")
            if rho == 0.0:
                break
            log_tail = (
                math.log(g_n)
                - n * math.log(rho)
                - j * math.log1p(-rho)
                + float(nbinom.logsf(n, j, 1.0 - rho))
            )
            # The trailing ratio slightly underestimates the asymptotic one,
            # so stop two orders below the requested tolerance.
            if log_tail <= math.log(0.01 * rel_tol * total):
                break
        n += 1
        coeff *= (n + j - 1) / n
        if n > 100_000:
            raise NoConvergence(f"exit moment of order {j} did not converge")
    return float(math.factorial(j)) * total


def _symmetrized_block(space: FiniteRWSpace, dom: Domain) -> sparse.csr_array:
    root = np.sqrt(space.nu[dom.omega_idx])
    k = dom.size
    left = sparse.dia_array((root[None, :], [0]), shape=(k, k))
    right = sparse.dia_array(((1.0 / root)[None, :], [0]), shape=(k, k))
    return (left @ dom.sub_kernel @ right).tocsr()


def eigenvalue_exact(space: FiniteRWSpace, omega: Iterable[str]) -> float:
    """lambda(omega) = 1 - mu_max of the nu-symmetrized kernel block.

    Dense solve up to 500 states, seeded power iteration with a 1e-10
    Rayleigh-quotient residual beyond that.  Requires a reversible space.
    """
    dom = _domain_of(space, omega)
    _require_standing(dom)
    require_reversible(space)
    sym = _symmetrized_block(space, dom)
    if dom.size <= _DENSE_EIG_LIMIT:
        dense = sym.toarray()
        dense = 0.5 * (dense + dense.T)
        mu = float(np.linalg.eigvalsh(dense)[-1])
    else:
        rng = np.random.default_rng(0)
        x = rng.standard_normal(dom.size)
        x /= np.linalg.norm(x)
        sym2 = (0.5 * (sym + sym.T)).tocsr()
        mu = 0.0
        for _ in range(200_000):
            y = sym2 @ x
            norm = np.linalg.norm(y)
            if norm == 0.0:
                mu = 0.0
                break
            x = y / norm
            mu = float(x @ (sym2 @ x))
            if np.linalg.norm(sym2 @ x - mu * x) <= 1e-10 * max(1.0, abs(mu)):
                break
        else:
            raise NoConvergence("power iteration did not reach its residual target")
    return 1.0 - mu


def eigenvalue_limit(space: FiniteRWSpace, omega: Iterable[str], n: int) -> float:
    """Ratio formula 1 - (g(2n)/g(n))^(1/n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seq = g_sequence(space, omega, 2 * n)
    if seq.values[n] == 0.0:
        raise ZeroG(n)
    if seq.values[2 * n] == 0.0:
        raise ZeroG(2 * n, f"g({2 * n}) vanished (underflow or disconnection)")
    return 1.0 - float((seq.values[2 * n] / seq.values[n]) ** (1.0 / n))


def _closure_edges(space: FiniteRWSpace, dom: Domain):
    """Symmetrized COO triples of nu(x) P(x, y) over the closure.

    Averaging with the transpose makes the edge weights exactly symmetric;
    under the reversibility precondition this changes nothing beyond float
    noise, and it keeps quadratic forms and Newton matrices symmetric.
    Self pairs are dropped: every consumer works with value differences,
    which vanish identically on them, and keeping them would only inject
    spurious (and for p near 1 enormous) weights into Newton diagonals.
    """
    sub = space.kernel[dom.closure_idx][:, dom.closure_idx].tocoo()
    m = len(dom.closure)
    raw_rows, raw_cols = sub.coords
    weighted = sparse.coo_array(
        (space.nu[dom.closure_idx][raw_rows] * sub.data, (raw_rows, raw_cols)),
        shape=(m, m),
    ).tocsr()
    sym = (0.5 * (weighted + weighted.T)).tocoo()
    rows, cols = sym.coords
    off = rows != cols
    return rows[off], cols[off], sym.data[off]


def rayleigh_quotient(space: FiniteRWSpace, omega: Iterable[str], f) -> float:
    """Energy-to-mass quotient of a function vanishing on the boundary.

    f may be a mapping from identifiers or an array over the domain's
    states (space order).  The numerator integrates squared jumps over the
    closure; the denominator is the nu-weighted square mass on omega.
    """
    dom = _domain_of(space, omega)
    _require_standing(dom)
    require_reversible(space)
    closure_pos = {s: i for i, s in enumerate(dom.closure)}
    values = np.zeros(len(dom.closure))
    if hasattr(f, "items"):
        for name, val in f.items():
            if name not in closure_pos:
                continue
            values[closure_pos[name]] = float(val)
        for name in dom.boundary:
            if abs(values[closure_pos[name]]) > 0.0:
                raise ValueError(f"f must vanish on the m-boundary (state {name!r})")
    else:
        arr = np.asarray(f, dtype=float)
        if arr.shape != (dom.size,):
            raise ValueError(f"f has shape {arr.shape}, expected ({dom.size},)")
        for name, val in zip(dom.omega, arr):
            values[closure_pos[name]] = float(val)

    omega_pos = np.asarray([closure_pos[s] for s in dom.omega], dtype=np.intp)
    nu_omega_vals = space.nu[dom.omega_idx]
    denom = float(nu_omega_vals @ values[omega_pos] ** 2)
    if denom == 0.0:
        raise ZeroFunction("f vanishes identically on omega")
    rows, cols, weights = _closure_edges(space, dom)
    num = 0.5 * float(weights @ (values[cols] - values[rows]) ** 2)
    return num / denom


def _phi(s: np.ndarray, p: float) -> np.ndarray:
    return np.sign(s) * np.abs(s) ** (p - 1.0)


def _constrained_newton_step(hess, force, nu_free, size):
    """Newton direction for the stress energy on the unit-mass slice.

    Solves the saddle system [[H, nu], [nu^T, 0]] [d; mu] = [-force; 0],
    the first-order conditions of min (1/2) d'Hd + force.d subject to
    nu.d = 0.  Retries once with a tiny diagonal shift when the
    factorization hits an exactly singular matrix (flat-gradient edges
    at p > 2 can zero out a row).
    """
    k = len(nu_free)
    rhs = np.concatenate([-force, [0.0]])

    def solve(shift: float) -> np.ndarray:
        if size <= _DENSE_SOLVE_LIMIT:
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = hess.toarray()
            if shift:
                kkt[:k, :k] += shift * np.eye(k)
            kkt[:k, k] = nu_free
            kkt[k, :k] = nu_free
            return np.linalg.solve(kkt, rhs)[:k]
        block = hess + shift * sparse.eye_array(k) if shift else hess
        col = sparse.csc_array(nu_free[:, None])
        kkt = sparse.bmat([[block, col], [col.T, None]], format="csc")
        return sparse_linalg.splu(kkt).solve(rhs)[:k]

    try:
        return solve(0.0)
    except (np.linalg.LinAlgError, RuntimeError):
        pass
    shift = 1e-12 * max(float(hess.diagonal().max(initial=0.0)), 1.0)
    try:
        return solve(shift)
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise NonConvergence("Newton matrix could not be factorized") from exc


def p_torsion(
    space: FiniteRWSpace,
    omega: Iterable[str],
    p: float,
    tol: float = 1e-10,
    max_iter: int = 500,
    delta: float = 1e-12,
) -> PTorsionResult:
    """Minimize the p-power stress energy by damped Newton iteration.

    The objective is (1/2p) sum nu(x) P(x,y) |f(y)-f(x)|^p - sum_omega f nu
    over functions vanishing on the boundary; its minimizer solves the
    p-stress equation and the p-rigidity is (integral of f)^(p-1).

    The minimizer's overall magnitude is handled in closed form: for a
    fixed shape the optimal multiple is explicit, so scaling out the mass
    leaves an equivalent problem for the shape alone, the energy on the
    slice of unit nu-mass.  Newton steps are taken tangent to that slice,
    warm-started from the normalized linear (p=2) stress solution.  This
    keeps every iterate of order one even when p is close to 1, where the
    minimizer itself grows like (mass ratio)^(1/(p-1)) and Newton in the
    raw variables overflows or hits a numerically singular Hessian.  The
    Hessian's |difference|^(p-2) factors are smoothed with delta, applied
    at the scale of the raw stress differences, so the factorization
    stays positive definite; gradients and the objective are exact.

    residual is the max-norm stationarity defect of the original
    objective at the returned function, measured relative to nu.  For p
    very near 1 the exact minimizer can have a value spread beyond what
    float64 resolves; the iteration then stops at the representable
    optimum with residual above tol, while rigidity_p stays accurate
    because the energy is flat there.  In the same regime the reported
    stress values (and hence energy_gap) can overflow to inf; rigidity_p
    is computed in log space and does not.
    """
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    dom = _domain_of(space, omega)
    _require_standing(dom)
    require_reversible(space)

    m = len(dom.closure)
    closure_pos = {s: i for i, s in enumerate(dom.closure)}
    omega_pos = np.asarray([closure_pos[s] for s in dom.omega], dtype=np.intp)
    nu_free = space.nu[dom.omega_idx]

    rows, cols, sym_w = _closure_edges(space, dom)

    stress = _solve_stress_system(dom.sub_kernel, dom.size)
    values = np.zeros(m)
    values[omega_pos] = stress / float(nu_free @ stress)

    def energy(v: np.ndarray) -> float:
        diff = v[cols] - v[rows]
        with np.errstate(over="ignore"):
            return float(sym_w @ np.abs(diff) ** p) / (2.0 * p)

    def eforce(v: np.ndarray) -> np.ndarray:
        diff = v[cols] - v[rows]
        flux = sym_w * _phi(diff, p)
        per_state = np.zeros(m)
        np.add.at(per_state, rows, -flux)
        return per_state[omega_pos]

    def hessian(v: np.ndarray, smoothing: float) -> sparse.csc_array:
        diff = v[cols] - v[rows]
        psi = (p - 1.0) * (diff * diff + smoothing) ** ((p - 2.0) / 2.0)
        hw = sym_w * psi
        diag = np.zeros(m)
        np.add.at(diag, rows, hw)
        off = sparse.coo_array((hw, (rows, cols)), shape=(m, m)).tocsr()
        lap = sparse.dia_array((diag[None, :], [0]), shape=(m, m)) - off
        return lap[omega_pos][:, omega_pos].tocsc()

    iterations = 0
    best_energy = np.inf
    best_values = values.copy()
    stagnant = 0
    for iterations in range(1, max_iter + 1):
        n_mass = float(nu_free @ values[omega_pos])
        values[omega_pos] = values[omega_pos] / n_mass
        current = energy(values)
        if current <= 0.0:
            raise NonConvergence("stress energy degenerated to zero")
        force = eforce(values)
        resid_vec = force / (p * current) - nu_free
        res = float(np.max(np.abs(resid_vec / nu_free)))
        if current < best_energy:
            best_energy = current
            best_values = values.copy()
        if res <= tol:
            best_values = values.copy()
            break
        if stagnant >= 10:
            # Ten accepted steps in a row with only value-irrelevant
            # energy decreases: the iterate is rattling in a region the
            # energy barely resolves in float64.  The lowest-energy
            # point seen is the answer.
            break
        # delta smooths raw stress differences; the shape iterate divides
        # them by the implied scale s, so the equivalent smoothing here is
        # delta / s^2 (clamped to keep the power finite at exact zeros).
        log_s = math.log(n_mass / (p * current)) / (p - 1.0)
        smoothing = delta * math.exp(min(max(-2.0 * log_s, -690.0), 690.0))
        step = _constrained_newton_step(
            hessian(values, smoothing), force, nu_free, dom.size
        )
        slope = float(force @ step)
        accepted = False
        if slope < 0.0:
            alpha = 1.0
            for _ in range(60):
                trial = values.copy()
                trial[omega_pos] = values[omega_pos] + alpha * step
                candidate = energy(trial)
                if candidate <= current + 1e-4 * alpha * slope:
                    accepted = True
                    break
                alpha *= 0.5
        if not accepted:
            break
        stagnant = stagnant + 1 if candidate >= current - 1e-13 * current else 0
        values = trial
    else:
        raise NonConvergence(
            f"p-stress solver did not reach tol={tol} in {max_iter} iterations"
        )

    values = best_values
    n_mass = float(nu_free @ values[omega_pos])
    d_val = energy(values)
    force = eforce(values)
    scale_pow = n_mass / (p * d_val)
    resid_vec = scale_pow * force - nu_free
    residual = float(np.max(np.abs(resid_vec / nu_free)))
    log_scale = math.log(scale_pow) / (p - 1.0)
    log_mass = log_scale + math.log(n_mass)
    rigidity = math.exp((p - 1.0) * log_mass)
    with np.errstate(over="ignore", invalid="ignore"):
        scale = float(np.exp(log_scale))
        mass = scale * n_mass
        f_values = scale * values
        diff = f_values[cols] - f_values[rows]
        energy_full = float(sym_w @ np.abs(diff) ** p)
        gap = abs(mass - 0.5 * energy_full)
        if math.isnan(gap):
            gap = math.inf
    return PTorsionResult(
        domain_states=dom.omega,
        values=f_values[omega_pos],
        p=p,
        rigidity_p=rigidity,
        energy_gap=gap,
        iterations=iterations,
        residual=residual,
    )


def _p_quotient(p: float, rows, cols, sym_w, omega_pos, nu_free):
    def quotient(v: np.ndarray) -> float:
        diff = v[cols] - v[rows]
        num = 0.5 * float(sym_w @ np.abs(diff) ** p)
        den = float(nu_free @ np.abs(v[omega_pos]) ** p)
        return num / den if den > 0 else np.inf

    return quotient


def lambda_p_estimate(
    space: FiniteRWSpace,
    omega: Iterable[str],
    p: float,
    seed: int = 0,
    n_random_starts: int = 3,
    max_iter: int = 400,
    tol: float = 1e-10,
) -> LambdaPEstimate:
    """Estimate the first p-eigenvalue of the domain.

    p = 2 is solved exactly (certified); p = 1 returns the 1-Cheeger
    constant (certified when the exhaustive search is feasible).  Other p
    run a projected-gradient descent of the p-Rayleigh quotient over
    nonnegative functions from several deterministic starts: the linear
    stress function, the indicator of the 1-Cheeger argmin, and seeded
    random vectors.  Those values are upper bounds, never certified.
    """
    if p < 1.0:
        raise ValueError("p must be >= 1")
    dom = _domain_of(space, omega)
    _require_standing(dom)
    if p == 2.0:
        return LambdaPEstimate(value=eigenvalue_exact(space, dom), p=p, certified=True)
    if p == 1.0:
        if dom.size <= geometry.EXHAUSTIVE_LIMIT:
            found = geometry.cheeger(space, dom.omega, p=1.0, mode="exhaustive")
        else:
            found = geometry.cheeger(space, dom.omega, p=1.0, mode="greedy")
        return LambdaPEstimate(value=found.value, p=p, certified=found.certified)

    require_reversible(space)
    m = len(dom.closure)
    closure_pos = {s: i for i, s in enumerate(dom.closure)}
    omega_pos = np.asarray([closure_pos[s] for s in dom.omega], dtype=np.intp)
    nu_free = space.nu[dom.omega_idx]
    rows, cols, weights = _closure_edges(space, dom)
    quotient = _p_quotient(p, rows, cols, weights, omega_pos, nu_free)

    starts: list[np.ndarray] = []
    stress = _solve_stress_system(dom.sub_kernel, dom.size)
    starts.append(stress)
    mode = "exhaustive" if dom.size <= geometry.EXHAUSTIVE_LIMIT else "greedy"
    argmin = geometry.cheeger(space, dom.omega, p=1.0, mode=mode).argmin_set
    indicator = np.asarray([1.0 if s in set(argmin) else 0.0 for s in dom.omega])
    starts.append(indicator)
    rng = np.random.default_rng(seed)
    for _ in range(n_random_starts):
        starts.append(rng.uniform(0.1, 1.0, size=dom.size))

    best = np.inf
    for start in starts:
        v = np.zeros(m)
        v[omega_pos] = np.abs(start)
        den = float(nu_free @ np.abs(v[omega_pos]) ** p)
        if den <= 0.0:
            continue
        v /= den ** (1.0 / p)
        value = quotient(v)
        eta = 0.5
        for _ in range(max_iter):
            diff = v[cols] - v[rows]
            grad_num = np.zeros(m)
            np.add.at(grad_num, rows, -p * weights * _phi(diff, p))
            grad_den = p * nu_free * _phi(v[omega_pos], p)
            grad = grad_num[omega_pos] - value * grad_den
            scale = float(np.max(np.abs(grad)))
            if scale == 0.0:
                break
            improved = False
            while eta > 1e-14:
                trial = v.copy()
                trial[omega_pos] = np.maximum(v[omega_pos] - eta * grad / scale, 0.0)
                den = float(nu_free @ np.abs(trial[omega_pos]) ** p)
                if den > 0.0:
                    trial /= den ** (1.0 / p)
                    trial_value = quotient(trial)
                    if trial_value < value - tol * max(1.0, abs(value)):
                        v = trial
                        value = trial_value
                        improved = True
                        eta = min(eta * 2.0, 1.0)
                        break
                eta *= 0.5
            if not improved:
                break
        best = min(best, value)
    return LambdaPEstimate(value=float(best), p=p, certified=False)
