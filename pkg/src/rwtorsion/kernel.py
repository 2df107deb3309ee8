"""Grid discretizations of convolution-kernel random walks.

A radial probability density J on R^N (N = 1, 2, 3), rescaled to
J_eps(x) = eps^{-N} J(x / eps), induces a random walk space on the cell
centers of a uniform grid: the raw mass between cells i and j is
J_eps(c_i - c_j) h^N, rows are renormalized to probability measures, and
each cell carries nu = h^N times its raw row sum, which makes detailed
balance exact by construction.

With the right normalizing constant the torsional rigidity of a region
converges, as eps shrinks, to the classical (local) torsional rigidity:
(eps^2 / C_{J,2}) T converges to the local value, where
C_{J,2} = 2 / integral(J(x) |x_N|^2 dx).
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from collections.abc import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate, sparse

from .errors import EmptyDomain, KernelEscapesBox, ParseError
from .space import FiniteRWSpace, space_from_csr
from .torsion import TorsionResult, stress_solve

# Volume of the unit ball per dimension; index 0 backs the sphere-average
# constant A_N = 2 * omega_{N-1} used for the first absolute moment.
_BALL_VOLUME = {0: 1.0, 1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}

_ESCAPE_MASS = 0.999  # a box must hold this much of a centered kernel


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Uniform cell grid over a box; each axis must split into whole cells."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    h: float

    def __post_init__(self):
        if not 1 <= self.dim <= 3:
            raise ValueError("grids support 1 to 3 dimensions")
        if self.h <= 0:
            raise ValueError("cell size h must be positive")
        for a, (lo, hi) in enumerate(zip(self.lo, self.hi)):
            if hi <= lo:
                raise ValueError(f"axis {a}: box is empty ({lo} .. {hi})")
            ratio = (hi - lo) / self.h
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ValueError(
                    f"axis {a}: extent {hi - lo} is not a whole number of cells of {self.h}"
                )

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(
            int(round((hi - lo) / self.h)) for lo, hi in zip(self.lo, self.hi)
        )

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return self.lo[axis] + (np.arange(n) + 0.5) * self.h

    def centers(self) -> np.ndarray:
        """Cell centers as an (n_cells, dim) array in C order."""
        axes = [self.axis_centers(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def multi_indices(self) -> np.ndarray:
        grids = np.indices(self.shape)
        return np.stack([g.ravel() for g in grids], axis=1)

    def ids(self) -> tuple[str, ...]:
        return tuple("c" + "_".join(str(i) for i in row) for row in self.multi_indices())


@dataclasses.dataclass(frozen=True)
class RadialKernel:
    """Normalized radial probability density with precomputed moments.

    support_radius bounds the support of the unit-scale profile; c2 and c1
    are the rescaling constants 2 / integral(J |x_N|^2) and
    2 / integral(J |x_N|), and r_cover is the radius holding 99.9% of the
    mass (used for box-coverage checks).
    """

    profile: str
    dim: int
    params: tuple[float, ...]
    support_radius: float
    normalizer: float
    c2: float
    c1: float
    r_cover: float

    def raw(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.profile == "uniform":
            (radius,) = self.params
            return np.where(r <= radius, 1.0, 0.0)
        if self.profile == "tent":
            (radius,) = self.params
            return np.maximum(0.0, 1.0 - r / radius)
        sigma, cutoff = self.params
        return np.where(r <= cutoff, np.exp(-0.5 * (r / sigma) ** 2), 0.0)

    def density(self, r) -> np.ndarray:
        """J evaluated at radius r (unit scale)."""
        return self.raw(r) / self.normalizer

    def radial_cdf(self, r: float) -> float:
        """Mass of the centered ball of radius r."""
        n = self.dim
        surface = n * _BALL_VOLUME[n]
        value, _ = integrate.quad(
            lambda s: float(self.raw(s)) * s ** (n - 1),
            0.0,
            min(r, self.support_radius),
            epsabs=1e-14,
            epsrel=1e-10,
        )
        return surface * value / self.normalizer


def make_kernel(
    profile: str,
    dim: int,
    radius: float | None = None,
    sigma: float | None = None,
    cutoff: float | None = None,
) -> RadialKernel:
    """Build one of the supported profiles: uniform, tent, gauss."""
    if not 1 <= dim <= 3:
        raise ValueError("kernels support 1 to 3 dimensions")
    if profile in ("uniform", "tent"):
        if radius is None or radius <= 0:
            raise ValueError(f"{profile} kernel needs a positive radius")
        params = (float(radius),)
        support = float(radius)
        if profile == "uniform":
            raw: Callable[[float], float] = lambda r: 1.0 if r <= radius else 0.0
        else:
            raw = lambda r: max(0.0, 1.0 - r / radius)
    elif profile == "gauss":
        if sigma is None or sigma <= 0 or cutoff is None or cutoff <= 0:
            raise ValueError("gauss kernel needs positive sigma and cutoff")
        params = (float(sigma), float(cutoff))
        support = float(cutoff)
        raw = lambda r: math.exp(-0.5 * (r / sigma) ** 2) if r <= cutoff else 0.0
    else:
        raise ValueError(f"unknown kernel profile {profile!r}")

    def moment(power: int) -> float:
        value, _ = integrate.quad(
            lambda r: raw(r) * r**power, 0.0, support, epsabs=1e-14, epsrel=1e-10
        )
        return value

    n = dim
    normalizer = n * _BALL_VOLUME[n] * moment(n - 1)
    if normalizer <= 0:
        raise ValueError("kernel has zero mass")
    # integral(J |x_N|) over R^N: the sphere average of |x . e| contributes
    # A_N = 2 * omega_{N-1}; the second moment uses the full omega_N surface.
    first_abs = 2.0 * _BALL_VOLUME[n - 1] * moment(n) / normalizer
    second = _BALL_VOLUME[n] * moment(n + 1) / normalizer

    kernel = RadialKernel(
        profile=profile,
        dim=dim,
        params=params,
        support_radius=support,
        normalizer=normalizer,
        c2=2.0 / second,
        c1=2.0 / first_abs,
        r_cover=0.0,
    )
    total = kernel.radial_cdf(support)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"kernel mass check failed: integral is {total:.9g}")

    lo_r, hi_r = 0.0, support
    for _ in range(60):
        mid = 0.5 * (lo_r + hi_r)
        if kernel.radial_cdf(mid) >= _ESCAPE_MASS:
            hi_r = mid
        else:
            lo_r = mid
    return dataclasses.replace(kernel, r_cover=hi_r)


def parse_kernel_spec(text: str, dim: int) -> RadialKernel:
    """Parse CLI kernel specs: uniform:<radius>, tent:<radius>, gauss:<sigma>:<cutoff>."""
    parts = text.split(":")
    try:
        if parts[0] in ("uniform", "tent") and len(parts) == 2:
            return make_kernel(parts[0], dim, radius=float(parts[1]))
        if parts[0] == "gauss" and len(parts) == 3:
            return make_kernel("gauss", dim, sigma=float(parts[1]), cutoff=float(parts[2]))
    except ValueError as exc:
        raise ParseError(1, f"bad kernel spec {text!r}: {exc}") from None
    raise ParseError(1, f"bad kernel spec {text!r}")


def rescale_constant_2(kernel: RadialKernel, eps: float) -> float:
    """C at scale eps for the second moment: C_{J_eps,2} = C_{J,2} / eps^2."""
    return kernel.c2 / eps**2


def rescale_constant_1(kernel: RadialKernel, eps: float) -> float:
    """C at scale eps for the first moment: C_{J_eps} = C_{J} / eps."""
    return kernel.c1 / eps


def build_grid_space(grid: GridSpec, kernel: RadialKernel, eps: float) -> FiniteRWSpace:
    """Random walk space on grid cells under the eps-rescaled kernel.

    Raises KernelEscapesBox when the box cannot hold 99.9% of the kernel
    mass from its center, i.e. the kernel scale is too coarse for the box.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if kernel.dim != grid.dim:
        raise ValueError("kernel and grid dimensions differ")
    half_extent = min((hi - lo) / 2.0 for lo, hi in zip(grid.lo, grid.hi))
    if kernel.r_cover * eps > half_extent:
        raise KernelEscapesBox(
            f"kernel at scale eps={eps} needs radius {kernel.r_cover * eps:.6g} "
            f"but the smallest box half-extent is {half_extent:.6g}"
        )

    shape = grid.shape
    n = grid.n_cells
    h = grid.h
    dim = grid.dim
    flat = np.arange(n).reshape(shape)
    reach = int(math.floor(kernel.support_radius * eps / h + 1e-12))

    row_parts: list[np.ndarray] = []
    col_parts: list[np.ndarray] = []
    val_parts: list[np.ndarray] = []
    raw_row_sum = np.zeros(n)
    scale = h**dim / eps**dim
    for offset in itertools.product(range(-reach, reach + 1), repeat=dim):
        dist = math.hypot(*offset) * h
        mass = float(kernel.density(dist / eps)) * scale
        if mass <= 0.0:
            continue
        src = tuple(
            slice(max(0, -d), s - max(0, d)) for d, s in zip(offset, shape)
        )
        dst = tuple(
            slice(max(0, d), s - max(0, -d)) for d, s in zip(offset, shape)
        )
        rows = flat[src].ravel()
        cols = flat[dst].ravel()
        row_parts.append(rows)
        col_parts.append(cols)
        val_parts.append(np.full(rows.size, mass))
        raw_row_sum[rows] += mass

    rows = np.concatenate(row_parts)
    cols = np.concatenate(col_parts)
    vals = np.concatenate(val_parts) / raw_row_sum[rows]
    matrix = sparse.coo_array((vals, (rows, cols)), shape=(n, n)).tocsr()
    nu = h**dim * raw_row_sum
    return space_from_csr(grid.ids(), nu, matrix)


def cells_inside(
    grid: GridSpec,
    box: Sequence[tuple[float, float]],
    region: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[str, ...]:
    """Identifiers of cells wholly contained in the box (and region).

    A cell is selected when every corner of the closed cell lies in the
    closed box, and, when region is given, when the predicate holds at all
    corners.  region maps an (n, dim) array of points to a boolean mask.
    Whole-cell containment approximates curved regions from inside; for a
    box aligned with the grid it keeps exactly the tiling cells (corners
    on the box boundary count as inside, up to float noise in h).
    """
    centers = grid.centers()
    slack = 1e-9 * grid.h
    inside = np.ones(len(centers), dtype=bool)
    half = grid.h / 2.0
    for signs in itertools.product((-half, half), repeat=grid.dim):
        corners = centers + np.asarray(signs)
        for a, (lo, hi) in enumerate(box):
            inside &= (corners[:, a] >= lo - slack) & (corners[:, a] <= hi + slack)
        if region is not None:
            inside &= np.asarray(region(corners), dtype=bool)
    ids = grid.ids()
    return tuple(ids[i] for i in np.flatnonzero(inside))


def symmetrize_set(grid: GridSpec, omega_cells: Iterable[str]) -> tuple[str, ...]:
    """The same number of cells, re-picked nearest to the grid's box center.

    Distance ties are broken by lexicographic multi-index, so the result
    is a deterministic function of the cell count alone.
    """
    wanted = len(set(omega_cells))
    if wanted == 0:
        raise EmptyDomain("cannot symmetrize an empty cell set")
    if wanted > grid.n_cells:
        raise ValueError("more cells requested than the grid holds")
    centers = grid.centers()
    middle = np.asarray([(lo + hi) / 2.0 for lo, hi in zip(grid.lo, grid.hi)])
    dist2 = ((centers - middle) ** 2).sum(axis=1)
    multi = grid.multi_indices()
    keys = tuple(multi[:, a] for a in reversed(range(grid.dim))) + (dist2,)
    order = np.lexsort(keys)[:wanted]
    ids = grid.ids()
    return tuple(ids[i] for i in sorted(order))


@dataclasses.dataclass(frozen=True)
class RescaledTorsion:
    value: float
    raw_rigidity: float
    eps: float
    h: float
    n_cells: int
    n_omega: int
    warnings: tuple[str, ...]


def rescaled_torsion(
    domain_box: Sequence[tuple[float, float]],
    kernel: RadialKernel,
    eps: float,
    h: float,
    region: Callable[[np.ndarray], np.ndarray] | None = None,
) -> RescaledTorsion:
    """Estimate the local torsional rigidity of a box (or region within it).

    The grid box is the domain box padded by the kernel support at scale
    eps (rounded up to whole cells), so every domain row keeps its full
    kernel mass inside the grid.  The result is (eps^2 / C_{J,2}) times
    the rigidity of the discretized domain.
    """
    domain_box = [(float(lo), float(hi)) for lo, hi in domain_box]
    if len(domain_box) != kernel.dim:
        raise ValueError("domain box and kernel dimensions differ")
    for lo, hi in domain_box:
        if hi <= lo:
            raise ValueError("domain box is empty")
    pad = math.ceil(kernel.support_radius * eps / h - 1e-12) * h
    grid = GridSpec(
        lo=tuple(lo - pad for lo, _ in domain_box),
        hi=tuple(hi + pad for _, hi in domain_box),
        h=h,
    )
    space = build_grid_space(grid, kernel, eps)
    omega = cells_inside(grid, domain_box, region)
    if not omega:
        raise EmptyDomain("no cell centers fall inside the domain box")
    result: TorsionResult = stress_solve(space, omega)

    warnings: list[str] = []
    if eps / h < 4.0:
        warnings.append(
            f"eps/h = {eps / h:.3g} < 4: the kernel spans too few cells for a faithful walk"
        )
    min_extent = min(hi - lo for lo, hi in domain_box)
    if eps > min_extent / 4.0:
        warnings.append(
            f"eps = {eps:.3g} exceeds a quarter of the domain extent {min_extent:.3g}"
        )
    return RescaledTorsion(
        value=eps**2 / kernel.c2 * result.rigidity,
        raw_rigidity=result.rigidity,
        eps=eps,
        h=h,
        n_cells=grid.n_cells,
        n_omega=len(omega),
        warnings=tuple(warnings),
    )
