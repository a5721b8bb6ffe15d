#!/usr/bin/env python3
# lib/sieve_direct.py - Direct two-slab solver for the thin perforated domain (N = 3)

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from lib.discretization import TensorGrid, graded_axis, solve_spd
from lib.errors import BudgetExceededError, SolverError, UnresolvedHolesError
from lib.homogenized import FieldLike, GridU, evaluate_field
from lib.point_process import Box, SieveRealization
from utils.constants import DEFAULT_MAX_UNKNOWNS
from utils.output import write_csv

logger = logging.getLogger(__name__)

SYMMETRIES = ("none", "odd")


@dataclass
class ThinGrid:
    """Node grid on U' x [0, delta] shared by both slabs; hole nodes sit on z = 0."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    delta: float
    hole_mask: np.ndarray
    hole_centers: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    hole_radii: np.ndarray = field(default_factory=lambda: np.empty(0))
    _tensor: Optional[TensorGrid] = field(default=None, repr=False)
    _stiffness: Optional[sp.csr_matrix] = field(default=None, repr=False)

    @classmethod
    def build(
        cls,
        realization: Optional[SieveRealization] = None,
        delta: Optional[float] = None,
        domain: Optional[Box] = None,
        fine_fraction: float = 0.125,
        coarse: float = 1.0 / 32.0,
        growth: float = 1.5,
        n_z: int = 6,
        max_unknowns: int = DEFAULT_MAX_UNKNOWNS,
        symmetry: str = "none",
        check_resolution: bool = True,
    ) -> "ThinGrid":
        """Graded grid: spacing fine_fraction * diameter inside holes, growing by `growth` up to `coarse`."""
        if realization is not None:
            delta = realization.delta if delta is None else delta
            domain = domain or realization.domain
            centers, radii = realization.hole_centers, realization.hole_radii
        else:
            if delta is None:
                raise ValueError("a grid without a realization needs an explicit delta")
            centers, radii = np.empty((0, 2)), np.empty(0)
        domain = domain or Box.unit(2)
        if domain.dimension != 2:
            raise ValueError("thin-domain grids are built over a 2-D domain")
        if n_z < 1:
            raise ValueError("n_z must be at least 1")

        if radii.size:
            fine = fine_fraction * 2.0 * float(radii.min())
            x_features = _features(centers[:, 0], radii)
            y_features = _features(centers[:, 1], radii)
        else:
            fine = coarse
            x_features = y_features = []
        x = graded_axis(domain.lo[0], domain.hi[0], x_features, fine, coarse, growth)
        y = graded_axis(domain.lo[1], domain.hi[1], y_features, fine, coarse, growth)
        coarse_z = delta / n_z
        z = graded_axis(0.0, delta, [(0.0, 0.0)], min(fine, coarse_z), coarse_z, growth)

        grid = cls(x, y, z, delta, _hole_mask(x, y, centers, radii), centers, radii)
        if check_resolution and radii.size:
            grid.check_resolution()
        unknowns = grid.unknowns(symmetry)
        if unknowns > max_unknowns:
            raise BudgetExceededError(unknowns, max_unknowns)
        logger.info("thin grid %dx%dx%d, %d unknowns", x.size, y.size, z.size, unknowns)
        return grid

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.x.size, self.y.size, self.z.size

    def unknowns(self, symmetry: str = "none") -> int:
        nx, ny, nz = self.shape
        per_slab = (nx - 2) * (ny - 2) * nz
        holes = int(self.hole_mask[1:-1, 1:-1].sum())
        return per_slab - holes if symmetry == "odd" else 2 * per_slab - holes

    def check_resolution(self, minimum: int = 4) -> None:
        bad = []
        for (cx, cy), r in zip(self.hole_centers, self.hole_radii):
            across_x = np.count_nonzero(np.abs(self.x - cx) < r)
            across_y = np.count_nonzero(np.abs(self.y - cy) < r)
            if min(across_x, across_y) < minimum:
                bad.append((float(cx), float(cy), float(r)))
        if bad:
            raise UnresolvedHolesError(bad)

    @property
    def tensor(self) -> TensorGrid:
        if self._tensor is None:
            self._tensor = TensorGrid((self.x, self.y, self.z))
        return self._tensor

    def stiffness(self) -> sp.csr_matrix:
        if self._stiffness is None:
            self._stiffness = self.tensor.stiffness()
        return self._stiffness

    def volumes(self) -> np.ndarray:
        return self.tensor.volumes()

    def lateral_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[[0, -1], :, :] = True
        mask[:, [0, -1], :] = True
        return mask

    def hole_nodes(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[:, :, 0] = self.hole_mask
        return mask & ~self.lateral_mask()


def _features(coords: np.ndarray, radii: np.ndarray) -> List[Tuple[float, float]]:
    pairs = np.unique(np.round(np.column_stack([coords, radii]), 12), axis=0)
    return [(float(c), float(r)) for c, r in pairs]


def _hole_mask(x: np.ndarray, y: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    mask = np.zeros((x.size, y.size), dtype=bool)
    for (cx, cy), r in zip(centers, radii):
        i0, i1 = np.searchsorted(x, [cx - r, cx + r])
        j0, j1 = np.searchsorted(y, [cy - r, cy + r])
        if i0 >= i1 or j0 >= j1:
            continue
        dx = x[i0:i1, None] - cx
        dy = y[None, j0:j1] - cy
        mask[i0:i1, j0:j1] |= dx ** 2 + dy ** 2 < r ** 2
    return mask


@dataclass
class SlabSource:
    """Source f on the upper slab (f_plus) and the lower slab (f_minus), functions of physical (x, y, z)."""

    f_plus: FieldLike
    f_minus: FieldLike

    def evaluate(self, grid: ThinGrid) -> Tuple[np.ndarray, np.ndarray]:
        X, Y, Z = grid.tensor.mesh()
        return evaluate_field(self.f_plus, (X, Y, Z)), evaluate_field(self.f_minus, (X, Y, -Z))

    def is_odd(self, grid: ThinGrid, tol: float = 1e-12) -> bool:
        fp, fm = self.evaluate(grid)
        return bool(np.allclose(fm, -fp, rtol=0.0, atol=tol * max(1.0, np.abs(fp).max())))


@dataclass
class SieveField:
    """Values on both slabs; lower[..., k] sits at z = -grid.z[k]."""

    grid: ThinGrid
    upper: np.ndarray
    lower: np.ndarray
    residual: float = 0.0
    iterations: int = 0
    symmetry: str = "none"

    def energy(self) -> float:
        """Dirichlet energy int |grad u|^2 over both slabs."""
        k = self.grid.stiffness()
        up, lo = self.upper.ravel(), self.lower.ravel()
        return float(up @ (k @ up) + lo @ (k @ lo))

    def load(self, source: SlabSource) -> float:
        fp, fm = source.evaluate(self.grid)
        vol = self.grid.volumes()
        return float(np.sum(vol * (fp * self.upper + fm * self.lower)))

    def interface_jump(self) -> np.ndarray:
        return jump_profile(self)

    def export_csv(self, path: str) -> str:
        X, Y, Z = self.grid.tensor.mesh()
        rows = []
        for slab, sign, values in (("upper", 1.0, self.upper), ("lower", -1.0, self.lower)):
            for xv, yv, zv, u in zip(X.ravel(), Y.ravel(), Z.ravel(), values.ravel()):
                rows.append({"slab": slab, "x": xv, "y": yv, "z": sign * zv, "u": u})
        return write_csv(path, rows)


def solve_direct(
    realization: Optional[SieveRealization],
    source: SlabSource,
    grid: ThinGrid,
    symmetry: str = "none",
    method: str = "cg",
) -> SieveField:
    """-Lap u = f on both slabs: lateral Dirichlet, Neumann on caps and walls, continuity through holes."""
    if symmetry not in SYMMETRIES:
        raise ValueError(f"Unknown symmetry: {symmetry}")
    if realization is not None and realization.classification.points.dimension != 2:
        raise ValueError("the direct solver handles N = 3 only")
    fp, fm = source.evaluate(grid)
    vol = grid.volumes()
    b_up, b_low = (vol * fp).ravel(), (vol * fm).ravel()
    k = grid.stiffness()
    lateral = grid.lateral_mask().ravel()
    holes = grid.hole_nodes().ravel()

    if symmetry == "odd":
        if not source.is_odd(grid):
            raise ValueError("odd symmetry needs f_minus(x, y, -z) = -f_plus(x, y, z)")
        free = ~(lateral | holes)
        result = solve_spd(k[free][:, free], b_up[free], method=method)
        up = np.zeros(grid.tensor.size)
        up[free] = result.x
        upper = up.reshape(grid.shape)
        return SieveField(grid, upper, -upper, result.residual, result.iterations, symmetry)

    if not holes.any():
        free = ~lateral
        a_free = k[free][:, free]
        results = [solve_spd(a_free, b[free], method=method) for b in (b_up, b_low)]
        slabs = []
        for res in results:
            full = np.zeros(grid.tensor.size)
            full[free] = res.x
            slabs.append(full.reshape(grid.shape))
        residual = max(r.residual for r in results)
        return SieveField(grid, slabs[0], slabs[1], residual, sum(r.iterations for r in results), symmetry)

    m = grid.tensor.size
    upper_free = np.flatnonzero(~lateral)
    lower_free = np.flatnonzero(~lateral & ~holes)
    lower_holes = np.flatnonzero(holes)
    up_index = np.full(m, -1)
    up_index[upper_free] = np.arange(upper_free.size)
    n_red = upper_free.size + lower_free.size

    rows = np.concatenate([upper_free, m + lower_free, m + lower_holes])
    cols = np.concatenate([
        np.arange(upper_free.size),
        upper_free.size + np.arange(lower_free.size),
        up_index[lower_holes],
    ])
    if np.any(cols < 0):
        raise SolverError("hole node without a matching upper-slab unknown")
    prolong = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(2 * m, n_red))
    reduced = (prolong.T @ sp.block_diag([k, k], format="csr") @ prolong).tocsr()
    rhs = prolong.T @ np.concatenate([b_up, b_low])
    result = solve_spd(reduced, rhs, method=method)
    full = prolong @ result.x
    return SieveField(grid, full[:m].reshape(grid.shape), full[m:].reshape(grid.shape), result.residual,
                      result.iterations, symmetry)


# --- Rescaled views ---

@dataclass
class RescaledField:
    """u(x', delta * xn) on U' x (-1, 1); upper at xn = grid.z / delta, lower at -grid.z / delta."""

    grid: ThinGrid
    upper: np.ndarray
    lower: np.ndarray
    delta: float

    @property
    def xn(self) -> np.ndarray:
        return self.grid.z / self.delta

    def energy(self) -> float:
        """int |grad' u|^2 + delta^-2 |d_n u|^2 over U' x (-1, 1)."""
        tensor = TensorGrid((self.grid.x, self.grid.y, self.xn), coefficients=(1.0, 1.0, 1.0 / self.delta ** 2))
        k = tensor.stiffness()
        up, lo = self.upper.ravel(), self.lower.ravel()
        return float(up @ (k @ up) + lo @ (k @ lo))


def rescale_field(u: SieveField, delta: Optional[float] = None) -> RescaledField:
    return RescaledField(u.grid, u.upper, u.lower, delta or u.grid.delta)


def rescaled_energy(u: SieveField) -> float:
    return u.energy() / u.grid.delta


def apriori_bound(source: SlabSource, grid: ThinGrid) -> float:
    """||f||^2 on U' x (-1, 1) divided by pi^2; bounds the rescaled energy of the solution."""
    fp, fm = source.evaluate(grid)
    vol = grid.volumes()
    return float(np.sum(vol * (fp ** 2 + fm ** 2)) / grid.delta / math.pi ** 2)


def slab_averages(u: SieveField) -> Tuple[np.ndarray, np.ndarray]:
    """Averages over xn in (0, 1) and (-1, 0) on the in-plane nodes."""
    z = u.grid.z
    return trapezoid(u.upper, z, axis=2) / u.grid.delta, trapezoid(u.lower, z, axis=2) / u.grid.delta


def jump_profile(u: SieveField) -> np.ndarray:
    """u(x', 0+) - u(x', 0-); zero on hole nodes."""
    return u.upper[:, :, 0] - u.lower[:, :, 0]


def interpolate_to(values: np.ndarray, grid: ThinGrid, target: GridU) -> np.ndarray:
    """Bilinear transfer of an in-plane nodal array onto the homogenized grid."""
    interp = RegularGridInterpolator((grid.x, grid.y), values)
    X, Y = target.coordinates()
    return interp(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)


def field_summary(u: SieveField) -> Dict[str, Any]:
    plus, minus = slab_averages(u)
    return {
        "shape": list(u.grid.shape),
        "delta": u.grid.delta,
        "energy": u.energy(),
        "rescaled_energy": rescaled_energy(u),
        "residual": u.residual,
        "iterations": u.iterations,
        "max_abs_upper": float(np.abs(u.upper).max()),
        "mean_jump": float(np.mean(jump_profile(u))),
        "mean_plus": float(np.mean(plus)),
        "mean_minus": float(np.mean(minus)),
    }
