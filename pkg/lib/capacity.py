#!/usr/bin/env python3
# lib/capacity.py - Capacity solvers, cell potentials, extrapolation and the J weights

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import dblquad

from lib.discretization import StretchedAxis, TensorGrid, segment_conductance, solve_dirichlet, sphere_surface
from lib.errors import ExtrapolationError, RegimeError
from lib.regime import H0Tag

logger = logging.getLogger(__name__)

INTERIOR, DIRICHLET0, DIRICHLET1, NEUMANN = 0, 1, 2, 3
HOLE_SHAPES = ("ball", "solid", "other")

# cut edges keep at least this fraction of their length on the free side
CUT_FRACTION_FLOOR = 1e-3


# --- Problem descriptions ---

@dataclass(frozen=True)
class CylinderSpec:
    """Cylinder B'(0, l) x (-h, h) in R^N."""

    l: float
    h: float
    N: int = 3

    def __post_init__(self):
        if self.l <= 0 or self.h <= 0:
            raise ValueError("cylinder needs l > 0 and h > 0")
        if self.N < 3:
            raise ValueError("ambient dimension N must be at least 3")

    def to_json(self) -> Dict[str, Any]:
        return {"l": self.l, "h": self.h, "N": self.N}


@dataclass(frozen=True)
class HoleSpec:
    """Model hole T': a flat ball, a solid N-ball, or an in-plane indicator (N = 3 only)."""

    shape: str = "ball"
    radius: float = 1.0
    # compared by identity, so holes with different indicators never share a cached J
    indicator: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.shape not in HOLE_SHAPES:
            raise ValueError(f"Unknown hole shape: {self.shape}")
        if self.radius <= 0:
            raise ValueError("hole radius must be positive")
        if self.shape == "ball" and self.radius > 1.0:
            raise ValueError("ball hole radius must lie in (0, 1]")
        if self.shape == "other" and self.indicator is None:
            raise ValueError("'other' holes need an indicator function")

    def to_json(self) -> Dict[str, Any]:
        return {"shape": self.shape, "radius": self.radius, "name": self.name}


@dataclass(frozen=True)
class GridSpec:
    dx: float = 0.125
    core_factor: float = 2.0
    stretch: float = 1.0

    def __post_init__(self):
        if self.dx <= 0 or self.core_factor <= 0 or self.stretch <= 0:
            raise ValueError("grid parameters must be positive")

    def scaled(self, factor: float) -> "GridSpec":
        return GridSpec(self.dx * factor, self.core_factor, self.stretch)


@dataclass(frozen=True)
class GridSchedule:
    """Successive halvings of a base spacing."""

    dx: float = 0.125
    levels: int = 3
    core_factor: float = 2.0
    stretch: float = 1.0

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("schedule needs at least one level")

    def specs(self) -> List[GridSpec]:
        return [GridSpec(self.dx / 2 ** k, self.core_factor, self.stretch) for k in range(self.levels)]

    def scaled(self, factor: float) -> "GridSchedule":
        return GridSchedule(self.dx * factor, self.levels, self.core_factor, self.stretch)

    def to_json(self) -> Dict[str, Any]:
        return {"dx": self.dx, "levels": self.levels, "core_factor": self.core_factor, "stretch": self.stretch}


DEFAULT_SCHEDULE = GridSchedule()
DEFAULT_SIZES = (4.0, 8.0, 16.0)


@dataclass
class ScalarField:
    """Nodal values with boundary tags on a tensor grid."""

    grid: TensorGrid
    values: np.ndarray
    tags: np.ndarray
    residual: float = 0.0
    omega: float = 1.0
    symmetric: bool = False

    def energy(self) -> float:
        u = self.values.ravel()
        total = self.omega * float(u @ (self.grid.stiffness() @ u))
        return 2.0 * total if self.symmetric else total

    def satisfies_maximum_principle(self, tol: float = 1e-9) -> bool:
        return bool(self.values.min() >= -tol and self.values.max() <= 1.0 + tol)


def upper_half_energy(field_: ScalarField, axis: int = 1) -> float:
    """Energy of a full (both-sided) solution restricted to z >= 0; the z = 0 layer counts half."""
    total = 0.0
    for k, (energy, coords) in enumerate(field_.grid.edge_energies(field_.values)):
        z = coords[axis]
        weight = np.where(z > 0, 1.0, 0.0)
        if k != axis:
            weight = np.where(z == 0, 0.5, weight)
        total += float(np.sum(energy * weight))
    return field_.omega * total


# --- Axisymmetric cell problems ---

def _radial_axis(hole: HoleSpec, extent: float, grid: GridSpec, staggered: bool) -> np.ndarray:
    return StretchedAxis(grid.core_factor * hole.radius, extent, grid.dx, grid.stretch, staggered).nodes()


def sphere_cut_factors(tensor: TensorGrid, fixed: np.ndarray, radii: Sequence[float]) -> Tuple[np.ndarray, ...]:
    """Conductance factors for (s, z) edges joining a free node to a fixed node across a sphere |x| = r.

    The free side of a cut edge ends on the sphere, so the Dirichlet value is
    imposed at the true boundary distance rather than at the fixed node.
    """
    S, Z = tensor.mesh()
    dist = np.hypot(S, Z)
    factors = []
    for k in range(2):
        lo = tuple(slice(None, -1) if j == k else slice(None) for j in range(2))
        hi = tuple(slice(1, None) if j == k else slice(None) for j in range(2))
        along, across = (S, Z) if k == 0 else (Z, S)
        factor = np.ones(fixed[lo].shape)
        one_fixed = fixed[lo] ^ fixed[hi]
        for r in radii:
            cut = one_fixed & ((dist[lo] - r) * (dist[hi] - r) <= 0)
            if not cut.any():
                continue
            a, b = along[lo][cut], along[hi][cut]
            root = np.sqrt(np.maximum(r * r - across[lo][cut] ** 2, 0.0))
            crossing = np.clip(np.where(b > 0, root, -root), a, b)
            floor = CUT_FRACTION_FLOOR * (b - a)
            free_low = ~fixed[lo][cut]
            start = np.where(free_low, a, np.minimum(crossing, b - floor))
            end = np.where(free_low, np.maximum(crossing, a + floor), b)
            weight = tensor.weights[k]
            factor[cut] = segment_conductance(start, end, weight) / segment_conductance(a, b, weight)
        factors.append(factor)
    return tuple(factors)


def _axisymmetric_cell(cyl: CylinderSpec, hole: HoleSpec, grid: GridSpec, top: str, symmetric: bool,
                       method: str, ball_domain: bool = False) -> Tuple[ScalarField, float]:
    if hole.radius >= cyl.l or (hole.shape == "solid" and hole.radius >= cyl.h):
        raise ValueError("hole must fit strictly inside the cylinder")
    s = _radial_axis(hole, cyl.l, grid, staggered=True)
    z = _radial_axis(hole, cyl.h, grid, staggered=False)
    zero = 0
    if not symmetric:
        z = np.concatenate([-z[:0:-1], z])
        zero = z.size // 2
    tensor = TensorGrid((s, z), weights=(cyl.N - 2, 0))
    S, Z = tensor.mesh()

    tags = np.full(tensor.shape, INTERIOR)
    if symmetric:
        tags[:, 0] = NEUMANN
    tags[:, -1] = DIRICHLET0 if top == "dirichlet" else NEUMANN
    if not symmetric:
        tags[:, 0] = DIRICHLET0 if top == "dirichlet" else NEUMANN
    tags[-1, :] = DIRICHLET0
    spheres = []
    if ball_domain:
        tags[S ** 2 + Z ** 2 >= cyl.l ** 2] = DIRICHLET0
        spheres.append(cyl.l)
    if hole.shape == "solid":
        tags[S ** 2 + Z ** 2 <= hole.radius ** 2] = DIRICHLET1
        spheres.append(hole.radius)
    else:
        tags[s < hole.radius, zero] = DIRICHLET1
    if spheres:
        fixed = (tags == DIRICHLET0) | (tags == DIRICHLET1)
        tensor = TensorGrid((s, z), weights=(cyl.N - 2, 0), edge_factors=sphere_cut_factors(tensor, fixed, spheres))

    field_ = _solve_tagged(tensor, tags, method)
    field_.omega = sphere_surface(cyl.N - 2)
    field_.symmetric = symmetric
    return field_, field_.energy()


def _solve_tagged(tensor: TensorGrid, tags: np.ndarray, method: str, hole_value: float = 1.0) -> ScalarField:
    fixed = (tags == DIRICHLET0) | (tags == DIRICHLET1)
    values = np.where(tags == DIRICHLET1, hole_value, 0.0)
    result = solve_dirichlet(tensor.stiffness(), fixed, values, method=method)
    return ScalarField(tensor, result.x.reshape(tensor.shape), tags, result.residual)


def symmetric_axis(half_width: float, dx: float, core: float, stretch: float = 1.0) -> np.ndarray:
    """Axis on [-half_width, half_width] with staggered nodes mirrored about the origin."""
    half = StretchedAxis(core, half_width, dx, stretch, staggered=True).nodes()
    return np.concatenate([-half[::-1], half])


def solve_tensor_cell(
    x: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    hole_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    outside_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    top: str = "dirichlet",
    method: str = "cg",
) -> ScalarField:
    """Capacitary potential on a 3-D tensor grid over z >= 0: 1 on hole nodes of z = 0, 0 where outside_fn holds."""
    tensor = TensorGrid((x, y, z))
    X, Y, _ = tensor.mesh()
    tags = np.full(tensor.shape, INTERIOR)
    tags[:, :, 0] = NEUMANN
    tags[:, :, -1] = DIRICHLET0 if top == "dirichlet" else NEUMANN
    tags[np.asarray(outside_fn(X, Y), dtype=bool)] = DIRICHLET0
    plane = np.asarray(hole_fn(X[:, :, 0], Y[:, :, 0]), dtype=bool)
    tags[:, :, 0][plane] = DIRICHLET1
    if not plane.any():
        raise ValueError("hole indicator selects no grid nodes")
    field_ = _solve_tagged(tensor, tags, method)
    field_.symmetric = True
    return field_


def _tensor_cell(cyl: CylinderSpec, hole: HoleSpec, grid: GridSpec, top: str, method: str) -> Tuple[ScalarField, float]:
    if cyl.N != 3:
        raise ValueError("'other' holes are supported only for N = 3")
    core = grid.core_factor * hole.radius
    x = symmetric_axis(cyl.l, grid.dx, core, grid.stretch)
    z = StretchedAxis(core, cyl.h, grid.dx, grid.stretch).nodes()
    field_ = solve_tensor_cell(x, x, z, hole.indicator, lambda X, Y: X ** 2 + Y ** 2 >= cyl.l ** 2, top, method)
    return field_, field_.energy()


def solve_cell_dirichlet(cyl: CylinderSpec, hole: HoleSpec, grid: GridSpec = GridSpec(), symmetric: bool = True,
                         method: str = "cg") -> Tuple[ScalarField, float]:
    """Potential equal to 1 on the hole and 0 on the whole cylinder boundary; energy estimates Cap."""
    if hole.shape == "other":
        return _tensor_cell(cyl, hole, grid, "dirichlet", method)
    return _axisymmetric_cell(cyl, hole, grid, "dirichlet", symmetric, method)


def solve_cell_mixed(cyl: CylinderSpec, hole: HoleSpec, grid: GridSpec = GridSpec(), symmetric: bool = True,
                     method: str = "cg") -> Tuple[ScalarField, float]:
    """As solve_cell_dirichlet but Neumann on the caps z = +-h; energy estimates Cap_h."""
    if hole.shape == "solid":
        raise ValueError("strip capacities are defined for flat holes only")
    if hole.shape == "other":
        return _tensor_cell(cyl, hole, grid, "neumann", method)
    return _axisymmetric_cell(cyl, hole, grid, "neumann", symmetric, method)


def _radial_shell(inner: float, outer: float, dim: int, grid: GridSpec) -> Tuple[TensorGrid, np.ndarray]:
    n = max(8, int(math.ceil(math.log(outer / inner) * inner / grid.dx)))
    nodes = np.geomspace(inner, outer, n + 1)
    return TensorGrid((nodes,), weights=(dim - 1,)), nodes


def solve_cell_planar(l: float, hole: HoleSpec, grid: GridSpec = GridSpec(), N: int = 3,
                      method: str = "cg") -> Tuple[ScalarField, float]:
    """(N-1)-dimensional potential with eta = 0 on the hole and 1 on |x'| = l; energy estimates Cap_0."""
    d = N - 1
    if d < 2:
        raise ValueError("planar problems need d = N - 1 >= 2")
    if hole.radius >= l:
        raise ValueError("hole must fit strictly inside B'(0, l)")

    if hole.shape == "other":
        if N != 3:
            raise ValueError("'other' holes are supported only for N = 3")
        x = symmetric_axis(l, grid.dx, grid.core_factor * hole.radius, grid.stretch)
        tensor = TensorGrid((x, x))
        X, Y = tensor.mesh()
        tags = np.full(tensor.shape, INTERIOR)
        tags[X ** 2 + Y ** 2 >= l ** 2] = DIRICHLET1
        tags[np.asarray(hole.indicator(X, Y), dtype=bool)] = DIRICHLET0
        field_ = _solve_tagged(tensor, tags, method)
        return field_, field_.energy()

    if hole.shape != "ball":
        raise ValueError("planar problems need a flat hole")
    tensor, nodes = _radial_shell(hole.radius, l, d, grid)
    tags = np.full(nodes.size, INTERIOR)
    tags[0], tags[-1] = DIRICHLET0, DIRICHLET1
    field_ = _solve_tagged(tensor, tags, method)
    field_.omega = sphere_surface(d - 1)
    return field_, field_.energy()


def solve_spherical_capacitor(inner: float, outer: float, N: int = 3, grid: GridSpec = GridSpec(),
                              method: str = "cg") -> Tuple[ScalarField, float]:
    """Potential 1 on |x| <= inner and 0 on |x| >= outer in R^N, on the (s, z) cell grid with cut spheres."""
    if not 0 < inner < outer:
        raise ValueError("need 0 < inner < outer")
    cyl = CylinderSpec(outer, outer, N)
    return _axisymmetric_cell(cyl, HoleSpec("solid", inner), grid, "dirichlet", True, method, ball_domain=True)


def solve_harmonic_box(N: int = 3, s_max: float = 1.0, z_min: float = 0.5, z_max: float = 1.5, dx: float = 0.125,
                       method: str = "cg") -> Tuple[ScalarField, float]:
    """Discrete harmonic extension of |x|^(2-N) from the boundary of {s < s_max, z_min < z < z_max}."""
    if not (0 < z_min < z_max and s_max > 0):
        raise ValueError("box must lie in z > 0")
    s = StretchedAxis(s_max, s_max, dx, staggered=True).nodes()
    z = StretchedAxis(z_max - z_min, z_max - z_min, dx).nodes() + z_min
    tensor = TensorGrid((s, z), weights=(N - 2, 0))
    S, Z = tensor.mesh()
    tags = np.full(tensor.shape, INTERIOR)
    tags[-1, :] = DIRICHLET0
    tags[:, 0] = DIRICHLET0
    tags[:, -1] = DIRICHLET0
    fixed = tags == DIRICHLET0
    values = np.where(fixed, np.hypot(S, Z) ** (2 - N), 0.0)
    result = solve_dirichlet(tensor.stiffness(), fixed, values, method=method)
    field_ = ScalarField(tensor, result.x.reshape(tensor.shape), tags, result.residual, sphere_surface(N - 2))
    return field_, field_.energy()


def harmonic_box_energy(N: int = 3, s_max: float = 1.0, z_min: float = 0.5, z_max: float = 1.5) -> float:
    """Exact energy of |x|^(2-N) over the box of solve_harmonic_box."""
    def integrand(s, z):
        return (N - 2) ** 2 * (s * s + z * z) ** (1 - N) * s ** (N - 2)

    value, _ = dblquad(integrand, z_min, z_max, 0.0, s_max, epsabs=1e-13, epsrel=1e-12)
    return sphere_surface(N - 2) * value


# --- Extrapolation ---

@dataclass
class Extrapolation:
    value: float
    residual: float
    coefficients: List[float]
    model: str


def extrapolate(samples: Sequence[Tuple[float, float]], model: str = "richardson",
                orders: Sequence[float] = (2,), power: float = 1.0, terms: int = 1) -> Extrapolation:
    """Least-squares fit of v = c0 + sum c_k t^p_k (richardson, t = spacing) or v = c0 + sum_k c_k l^(-k q); returns c0.

    `terms` counts the inverse powers in the second model and is capped by the number of samples minus one.
    """
    if len(samples) < 2:
        raise ExtrapolationError("extrapolation needs at least two samples")
    params = np.array([p for p, _ in samples], dtype=float)
    values = np.array([v for _, v in samples], dtype=float)
    if np.any(params <= 0):
        raise ExtrapolationError("extrapolation parameters must be positive")

    if model == "richardson":
        usable = list(orders)[: len(samples) - 1]
        columns = [np.ones_like(params)] + [params ** p for p in usable]
    elif model == "inverse_power_in_l":
        if power <= 0:
            raise ExtrapolationError("inverse power must be positive")
        if terms < 1:
            raise ExtrapolationError("inverse-power fit needs at least one term")
        usable = min(terms, len(samples) - 1)
        columns = [np.ones_like(params)] + [params ** (-power * k) for k in range(1, usable + 1)]
    else:
        raise ValueError(f"Unknown extrapolation model: {model}")

    matrix = np.column_stack(columns)
    if np.linalg.matrix_rank(matrix) < matrix.shape[1]:
        raise ExtrapolationError(f"degenerate fit for model '{model}'")
    coef, *_ = np.linalg.lstsq(matrix, values, rcond=None)
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    residual = float(np.linalg.norm(matrix @ coef - values) / scale)
    return Extrapolation(float(coef[0]), residual, [float(c) for c in coef], model)


def _orders_for(levels: int) -> Tuple[float, ...]:
    # flat-hole edges and cut sphere edges both leave a first-order term
    return (1.0, 2.0) if levels >= 3 else (1.0,)


@dataclass
class CapacityEstimate:
    value: float
    extrapolated: float
    spacings: List[float]
    samples: List[float]
    residual: float
    domain: Optional[CylinderSpec]
    kind: str
    model: str = "richardson"
    fit_residual: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "value": self.value,
            "extrapolated": self.extrapolated,
            "spacings": self.spacings,
            "samples": self.samples,
            "residual": self.residual,
            "domain": self.domain.to_json() if self.domain else None,
            "model": self.model,
            "fit_residual": self.fit_residual,
            "warnings": self.warnings,
        }


def _refine(kind: str, solve: Callable[[GridSpec], Tuple[ScalarField, float]], schedule: GridSchedule,
            hole: HoleSpec, domain: Optional[CylinderSpec], orders: Optional[Sequence[float]]) -> CapacityEstimate:
    specs = schedule.specs()
    samples, residual = [], 0.0
    for spec in specs:
        field_, energy = solve(spec)
        samples.append(energy)
        residual = max(residual, field_.residual)
    spacings = [s.dx for s in specs]

    warnings = []
    steps = np.diff(samples)
    if steps.size > 1 and not (np.all(steps >= 0) or np.all(steps <= 0)):
        message = f"{kind}: non-monotone refinement sequence {', '.join(f'{v:.6g}' for v in samples)}"
        logger.warning(message)
        warnings.append(message)

    if len(samples) == 1:
        return CapacityEstimate(samples[0], samples[0], spacings, samples, residual, domain, kind, "none", 0.0, warnings)
    fit = extrapolate(list(zip(spacings, samples)), "richardson", orders or _orders_for(len(samples)))
    return CapacityEstimate(samples[-1], fit.value, spacings, samples, residual, domain, kind, fit.model,
                            fit.residual, warnings)


def cap_classical(hole: HoleSpec, cyl: CylinderSpec, schedule: GridSchedule = DEFAULT_SCHEDULE,
                  domain: str = "cylinder", orders: Optional[Sequence[float]] = None) -> CapacityEstimate:
    """Cap(T' x {0}, C(l, h)), or the spherical capacitor Cap(B_r, B_l) when domain='ball'."""
    if domain == "ball":
        if hole.shape != "solid":
            raise ValueError("ball domains take a solid hole")
        return _refine("classical", lambda g: solve_spherical_capacitor(hole.radius, cyl.l, cyl.N, g),
                       schedule, hole, cyl, orders)
    if domain != "cylinder":
        raise ValueError(f"Unknown capacity domain: {domain}")
    return _refine("classical", lambda g: solve_cell_dirichlet(cyl, hole, g), schedule, hole, cyl, orders)


def cap_strip(hole: HoleSpec, l: float, h: float, schedule: GridSchedule = DEFAULT_SCHEDULE, N: int = 3,
              orders: Optional[Sequence[float]] = None) -> CapacityEstimate:
    """Cap_h(T', B'(0, l)) over a spacing schedule with Richardson extrapolation."""
    cyl = CylinderSpec(l, h, N)
    return _refine("strip", lambda g: solve_cell_mixed(cyl, hole, g), schedule, hole, cyl, orders)


def cap_planar(hole: HoleSpec, l: float, schedule: GridSchedule = DEFAULT_SCHEDULE, N: int = 3,
               orders: Optional[Sequence[float]] = None) -> CapacityEstimate:
    """Cap_0(T', B'(0, l)) in R^(N-1)."""
    return _refine("planar", lambda g: solve_cell_planar(l, hole, g, N), schedule, hole, None, orders)


# --- J weights ---

@functools.lru_cache(maxsize=256)
def _j_unit(kind: str, h: Optional[float], hole: HoleSpec, N: int, schedule: GridSchedule,
            sizes: Tuple[float, ...]) -> float:
    samples = []
    for size in sizes:
        l = size * hole.radius
        if kind == "infinite":
            estimate = cap_classical(hole, CylinderSpec(l, l, N), schedule)
        elif kind == "finite":
            estimate = cap_strip(hole, l, h, schedule, N)
        else:
            estimate = cap_planar(hole, l, schedule, N)
        samples.append((l, estimate.extrapolated))
    power = N - 2 if kind == "infinite" else N - 3
    value = extrapolate(samples, "inverse_power_in_l", power=power).value
    logger.debug("J unit value kind=%s h=%s N=%d: %.6g", kind, h, N, value)
    return value


def eval_J(h0_tag, rho: float, hole: HoleSpec = HoleSpec(), N: int = 3,
           schedule: GridSchedule = DEFAULT_SCHEDULE, sizes: Sequence[float] = DEFAULT_SIZES) -> float:
    """Per-hole weight J_h0(rho) with the domain limits taken by extrapolation in l (and h)."""
    tag = H0Tag.parse(h0_tag)
    if rho <= 0 or not math.isfinite(rho):
        raise ValueError("rho must be positive and finite")
    if N < 3:
        raise ValueError("ambient dimension N must be at least 3")
    sizes = tuple(float(s) for s in sizes)
    if tag.kind == "zero":
        if N == 3:
            raise RegimeError("J_0 undefined at N=3")
        return 2.0 * rho ** (N - 3) * _j_unit("zero", None, hole, N, schedule, sizes)
    if tag.kind == "finite":
        if N == 3:
            raise RegimeError("J_h0 with finite h0 undefined at N=3")
        return rho ** (N - 2) * _j_unit("finite", tag.h0 / rho, hole, N, schedule, sizes)
    return rho ** (N - 2) * _j_unit("infinite", None, hole, N, schedule, sizes)


class JTable:
    """J_h0 tabulated on a set of marks and interpolated log-linearly."""

    def __init__(self, h0_tag, hole: HoleSpec = HoleSpec(), N: int = 3, rhos: Sequence[float] = (1.0,),
                 schedule: GridSchedule = DEFAULT_SCHEDULE, sizes: Sequence[float] = DEFAULT_SIZES):
        self.h0_tag = H0Tag.parse(h0_tag)
        self.hole = hole
        self.N = N
        self.rhos = np.unique(np.asarray(rhos, dtype=float))
        if self.rhos.size == 0 or np.any(self.rhos <= 0):
            raise ValueError("J table needs positive marks")
        self.values = np.array([eval_J(self.h0_tag, r, hole, N, schedule, sizes) for r in self.rhos])
        self.unit = eval_J(self.h0_tag, 1.0, hole, N, schedule, sizes) if self.h0_tag.is_infinite else None

    @classmethod
    def log_spaced(cls, h0_tag, rho_min: float, rho_max: float, n: int = 9, **kwargs) -> "JTable":
        return cls(h0_tag, rhos=np.geomspace(rho_min, rho_max, n), **kwargs)

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.unit is not None:
            return rho ** (self.N - 2) * self.unit
        if self.rhos.size == 1:
            if not np.allclose(rho, self.rhos[0], rtol=1e-12):
                raise ValueError("single-entry J table evaluated away from its mark")
            return np.full(rho.shape, self.values[0])
        log_r, log_v = np.log(self.rhos), np.log(self.values)
        x = np.log(rho)
        inner = np.interp(x, log_r, log_v)
        lo_slope = (log_v[1] - log_v[0]) / (log_r[1] - log_r[0])
        hi_slope = (log_v[-1] - log_v[-2]) / (log_r[-1] - log_r[-2])
        out = np.where(x < log_r[0], log_v[0] + lo_slope * (x - log_r[0]), inner)
        out = np.where(x > log_r[-1], log_v[-1] + hi_slope * (x - log_r[-1]), out)
        return np.exp(out)
