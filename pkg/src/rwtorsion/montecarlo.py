"""Monte Carlo estimation of exit times and torsional rigidity.

The stress function of a domain equals the expected number of jumps a walk
started at x makes before leaving omega, so sample means of exit times
estimate the stress pointwise, and the nu-weighted sum of per-state means
estimates the rigidity (stratified by start state).

Randomness comes from SplitMix64 used as a counter-based generator: every
uniform is a pure function of (seed, start state, sample index, step), so
estimates do not depend on batching or scheduling and replay exactly for a
fixed seed.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable

import numpy as np

from .errors import StepCapExceeded
from .space import FiniteRWSpace, make_domain
from .torsion import _require_standing

STEP_CAP = 10_000_000
MIN_SAMPLES = 100

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / float(1 << 53)


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (modular arithmetic throughout)."""
    z = z + _GOLDEN
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    return z ^ (z >> np.uint64(31))


def _uniforms(seed: int, state_rank: int, sample_idx: np.ndarray, step: int) -> np.ndarray:
    """Uniforms in [0, 1) indexed by (seed, state, sample, step)."""
    salt = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    salt = _mix(salt)
    salt = _mix(salt ^ (np.array([state_rank], dtype=np.uint64) * _MIX1))
    salt = _mix(salt ^ (np.array([step], dtype=np.uint64) * _MIX2))
    hs = _mix((sample_idx.astype(np.uint64) * _GOLDEN) ^ salt)
    return (hs >> np.uint64(11)).astype(np.float64) * _INV_2_53


@dataclasses.dataclass(frozen=True)
class McEstimate:
    mean: float
    half_width_95: float
    n_samples: int
    seed: int

    @property
    def interval(self) -> tuple[float, float]:
        return (self.mean - self.half_width_95, self.mean + self.half_width_95)


class _RowSampler:
    """Per-state cumulative jump distributions over the full state set."""

    def __init__(self, space: FiniteRWSpace):
        kernel = space.kernel.tocsr()
        self.cums: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        indptr, indices, data = kernel.indptr, kernel.indices, kernel.data
        for i in range(space.n_states):
            lo, hi = indptr[i], indptr[i + 1]
            cum = np.cumsum(data[lo:hi])
            cum /= cum[-1]
            cum[-1] = 1.0
            self.cums.append(cum)
            self.cols.append(indices[lo:hi].copy())

    def step(self, current: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = np.empty_like(current)
        for state in np.unique(current):
            mask = current == state
            picks = np.searchsorted(self.cums[state], u[mask], side="right")
            out[mask] = self.cols[state][picks]
        return out


def _exit_steps(
    space: FiniteRWSpace,
    in_omega: np.ndarray,
    sampler: _RowSampler,
    start_idx: int,
    n_samples: int,
    seed: int,
) -> np.ndarray:
    steps = np.zeros(n_samples, dtype=np.int64)
    alive = np.arange(n_samples)
    current = np.full(n_samples, start_idx, dtype=np.int64)
    step = 0
    while alive.size:
        step += 1
        if step > STEP_CAP:
            raise StepCapExceeded(
                f"{alive.size} walks from {space.states[start_idx]!r} ran past {STEP_CAP} steps"
            )
        u = _uniforms(seed, start_idx, alive, step)
        nxt = sampler.step(current[alive], u)
        current[alive] = nxt
        exited = ~in_omega[nxt]
        steps[alive[exited]] = step
        alive = alive[~exited]
    return steps


def sample_exit_time(space: FiniteRWSpace, omega: Iterable[str], start: str, rng) -> int:
    """Walk a single trajectory until it leaves omega; returns the jump count.

    rng is a numpy Generator or an integer seed (Philox-backed when an int).
    """
    dom = make_domain(space, omega)
    _require_standing(dom)
    if isinstance(rng, (int, np.integer)):
        rng = np.random.Generator(np.random.Philox(int(rng)))
    start_idx = space.state_index(start)
    in_omega = np.zeros(space.n_states, dtype=bool)
    in_omega[dom.omega_idx] = True
    if not in_omega[start_idx]:
        raise ValueError(f"start state {start!r} is not in omega")
    sampler = _RowSampler(space)
    current = start_idx
    for step in range(1, STEP_CAP + 1):
        u = rng.random()
        cum = sampler.cums[current]
        current = int(sampler.cols[current][np.searchsorted(cum, u, side="right")])
        if not in_omega[current]:
            return step
    raise StepCapExceeded(f"walk from {start!r} ran past {STEP_CAP} steps")


def mc_stress(
    space: FiniteRWSpace, omega: Iterable[str], start: str, n_samples: int, seed: int
) -> McEstimate:
    """Sample-mean estimate of the stress value at one start state."""
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}")
    dom = make_domain(space, omega)
    _require_standing(dom)
    start_idx = space.state_index(start)
    in_omega = np.zeros(space.n_states, dtype=bool)
    in_omega[dom.omega_idx] = True
    if not in_omega[start_idx]:
        raise ValueError(f"start state {start!r} is not in omega")
    sampler = _RowSampler(space)
    steps = _exit_steps(space, in_omega, sampler, start_idx, n_samples, seed)
    mean = float(steps.mean())
    sd = float(steps.std(ddof=1))
    return McEstimate(
        mean=mean,
        half_width_95=1.96 * sd / np.sqrt(n_samples),
        n_samples=n_samples,
        seed=seed,
    )


def mc_torsion(
    space: FiniteRWSpace, omega: Iterable[str], n_samples_per_state: int, seed: int
) -> McEstimate:
    """Stratified rigidity estimate: nu-weighted sum of per-state exit means.

    Every start state draws n_samples_per_state walks from its own
    substream; the 95% half-width combines the per-state normal errors.
    """
    if n_samples_per_state < MIN_SAMPLES:
        raise ValueError(f"n_samples_per_state must be at least {MIN_SAMPLES}")
    dom = make_domain(space, omega)
    _require_standing(dom)
    in_omega = np.zeros(space.n_states, dtype=bool)
    in_omega[dom.omega_idx] = True
    sampler = _RowSampler(space)
    total = 0.0
    variance = 0.0
    for idx in dom.omega_idx:
        steps = _exit_steps(space, in_omega, sampler, int(idx), n_samples_per_state, seed)
        weight = float(space.nu[idx])
        total += weight * float(steps.mean())
        variance += weight**2 * float(steps.var(ddof=1)) / n_samples_per_state
    return McEstimate(
        mean=total,
        half_width_95=1.96 * float(np.sqrt(variance)),
        n_samples=n_samples_per_state * dom.size,
        seed=seed,
    )
