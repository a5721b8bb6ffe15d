#!/usr/bin/env python3
# lib/discretization.py - Tensor grids, weighted energy forms and SPD solves for sievelab

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, cg, spsolve
from scipy.special import gamma as gamma_fn

from lib.errors import SolverError
from utils.constants import CG_MAXITER_FACTOR, CG_MIN_ITERATIONS, CG_RTOL

logger = logging.getLogger(__name__)


def sphere_surface(k: int) -> float:
    """Surface measure of the unit k-sphere S^k in R^(k+1)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / gamma_fn((k + 1) / 2)


def ball_volume(d: int, radius: float = 1.0) -> float:
    return math.pi ** (d / 2) / gamma_fn(d / 2 + 1) * radius ** d


# --- Axes ---

@dataclass(frozen=True)
class StretchedAxis:
    """Uniform core of spacing `dx` on [0, core] followed by an exponential stretch up to `extent`.

    Nodes are images of a uniform parameter grid, so halving `dx` halves every
    spacing and scaling (core, extent, dx) together scales the nodes.
    """

    core: float
    extent: float
    dx: float
    stretch: float = 1.0
    staggered: bool = False

    def __post_init__(self):
        if self.dx <= 0 or self.extent <= 0 or self.core <= 0:
            raise ValueError("axis lengths and spacing must be positive")

    def _uniform(self, length: float) -> np.ndarray:
        n = max(1, int(round(length / self.dx)))
        step = length / n
        if self.staggered:
            return np.append((np.arange(n) + 0.5) * step, length)
        return np.linspace(0.0, length, n + 1)

    def _rate(self, param_length: float, span: float) -> float:
        def excess(kappa):
            if abs(kappa) * param_length < 1e-12:
                return param_length - span
            return np.expm1(kappa * param_length) / kappa - span

        if abs(param_length - span) <= 1e-14 * span:
            return 0.0
        lo, hi = -1.0 / param_length, 1.0 / param_length
        while excess(lo) > 0:
            lo *= 2.0
        while excess(hi) < 0:
            hi *= 2.0
        return brentq(excess, lo, hi, xtol=1e-300, rtol=4.5 * np.finfo(float).eps)

    def nodes(self) -> np.ndarray:
        core = min(self.core, self.extent)
        if self.extent - core <= 1e-12 * self.extent:
            return self._uniform(self.extent)

        n_core = max(1, int(round(core / self.dx)))
        step = core / n_core
        n_stretch = max(1, int(round(self.stretch * n_core)))
        param_length = n_stretch * step
        kappa = self._rate(param_length, self.extent - core)

        count = n_core + n_stretch
        xi = (np.arange(count) + 0.5) * step if self.staggered else np.arange(count + 1) * step
        beyond = xi > core
        mapped = xi.copy()
        if kappa == 0.0:
            mapped[beyond] = core + (xi[beyond] - core) * (self.extent - core) / param_length
        else:
            mapped[beyond] = core + np.expm1(kappa * (xi[beyond] - core)) / kappa
        if self.staggered:
            mapped = np.append(mapped, self.extent)
        mapped[-1] = self.extent
        return mapped


def graded_axis(
    lo: float,
    hi: float,
    features: Sequence[Tuple[float, float]],
    fine: float,
    coarse: float,
    growth: float = 1.25,
    samples: int = 4096,
) -> np.ndarray:
    """Nodes on [lo, hi] following the size field min(coarse, fine + (growth-1)*dist(x, features)).

    Each feature is (center, half_width); the spacing is `fine` inside it.
    Nodes are placed by inverting the cumulative node density.
    """
    if hi <= lo:
        raise ValueError("empty interval")
    if fine <= 0 or coarse <= 0 or growth <= 1.0:
        raise ValueError("need fine > 0, coarse > 0 and growth > 1")
    fine = min(fine, coarse)
    slope = growth - 1.0
    width = (coarse - fine) / slope

    pieces: List[np.ndarray] = [np.linspace(lo, hi, samples)]
    offsets = np.concatenate([[0.0], np.geomspace(fine / 16.0, width + fine, 96)])
    for center, half in features:
        pieces.append(np.linspace(center - half, center + half, 33))
        pieces.append(center - half - offsets)
        pieces.append(center + half + offsets)
    xs = np.unique(np.clip(np.concatenate(pieces), lo, hi))

    size = np.full_like(xs, coarse)
    for center, half in features:
        gap = np.maximum(np.abs(xs - center) - half, 0.0)
        size = np.minimum(size, fine + slope * gap)

    cumulative = cumulative_trapezoid(1.0 / size, xs, initial=0.0)
    n = max(1, int(math.ceil(cumulative[-1])))
    nodes = np.interp(np.linspace(0.0, cumulative[-1], n + 1), cumulative, xs)
    nodes[0], nodes[-1] = lo, hi
    return nodes


# --- Energy forms ---

def edge_conductance(nodes: np.ndarray, weight: int) -> np.ndarray:
    """Exact 1-D conductance 1 / int_a^b s^-w ds of each edge."""
    return segment_conductance(nodes[:-1], nodes[1:], weight)


def segment_conductance(a: np.ndarray, b: np.ndarray, weight: int) -> np.ndarray:
    """1 / int_a^b s^-w ds for arrays of segment ends a < b."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if weight == 0:
        return 1.0 / (b - a)
    if np.any(a <= 0):
        raise ValueError("weighted axis must stay away from the origin")
    if weight == 1:
        return 1.0 / np.log(b / a)
    return (1.0 - weight) / (b ** (1.0 - weight) - a ** (1.0 - weight))


def dual_measure(nodes: np.ndarray, weight: int) -> np.ndarray:
    """Weighted measure int s^w ds of each node's dual cell."""
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    start = 0.0 if (weight > 0 and nodes[0] > 0) else nodes[0]
    bounds = np.concatenate([[start], mids, [nodes[-1]]])
    return (bounds[1:] ** (weight + 1) - bounds[:-1] ** (weight + 1)) / (weight + 1)


@dataclass
class TensorGrid:
    """Tensor-product node set with per-axis radial weight and gradient coefficient.

    `edge_factors` optionally scales the conductance of individual edges; entry k
    is None or an array shaped like the grid with axis k one shorter.
    """

    axes: Tuple[np.ndarray, ...]
    weights: Tuple[int, ...] = ()
    coefficients: Tuple[float, ...] = ()
    edge_factors: Tuple[Optional[np.ndarray], ...] = ()

    def __post_init__(self):
        self.axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if not self.weights:
            self.weights = (0,) * len(self.axes)
        if not self.coefficients:
            self.coefficients = (1.0,) * len(self.axes)
        if not self.edge_factors:
            self.edge_factors = (None,) * len(self.axes)
        for axis in self.axes:
            if axis.size < 2 or np.any(np.diff(axis) <= 0):
                raise ValueError("grid axes need at least two strictly increasing nodes")
        for k, factor in enumerate(self.edge_factors):
            if factor is not None and np.shape(factor) != self._edge_shape(k):
                raise ValueError(f"edge factors for axis {k} must have shape {self._edge_shape(k)}")

    def _edge_shape(self, k: int) -> Tuple[int, ...]:
        return tuple(n - 1 if j == k else n for j, n in enumerate(self.shape))

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return np.meshgrid(*self.axes, indexing="ij")

    def measures(self) -> List[np.ndarray]:
        return [dual_measure(a, w) for a, w in zip(self.axes, self.weights)]

    def volumes(self) -> np.ndarray:
        """Dual-cell measure of every node, shaped like the grid."""
        out = np.ones(self.shape)
        for k, m in enumerate(self.measures()):
            out = out * _along(m, k, len(self.shape))
        return out

    def _edge_weights(self, k: int, measures: List[np.ndarray]) -> np.ndarray:
        dim = len(self.shape)
        weights = _along(edge_conductance(self.axes[k], self.weights[k]), k, dim) * self.coefficients[k]
        for j, m in enumerate(measures):
            if j != k:
                weights = weights * _along(m, j, dim)
        if self.edge_factors[k] is not None:
            weights = weights * self.edge_factors[k]
        return np.broadcast_to(weights, self._edge_shape(k))

    def stiffness(self) -> sp.csr_matrix:
        """Sparse matrix K with u^T K u equal to the discrete weighted Dirichlet energy."""
        measures = self.measures()
        total = None
        for k, axis in enumerate(self.axes):
            n = axis.size
            diff = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr")
            if self.edge_factors[k] is None:
                local = diff.T @ sp.diags(edge_conductance(axis, self.weights[k])) @ diff
                factors = [sp.diags(m) for m in measures]
                factors[k] = local * self.coefficients[k]
            else:
                factors = [sp.identity(m.size, format="csr") for m in measures]
                factors[k] = diff
            term = factors[0]
            for f in factors[1:]:
                term = sp.kron(term, f, format="csr")
            if self.edge_factors[k] is not None:
                term = term.T @ sp.diags(self._edge_weights(k, measures).ravel()) @ term
            total = term if total is None else total + term
        return total.tocsr()

    def edge_energies(self, u: np.ndarray) -> List[Tuple[np.ndarray, Tuple[np.ndarray, ...]]]:
        """Per-axis edge energies of `u` with the coordinates of the edge midpoints.

        The sum of all returned energies equals u^T K u.
        """
        u = np.asarray(u).reshape(self.shape)
        measures = self.measures()
        out = []
        for k in range(len(self.axes)):
            energy = np.diff(u, axis=k) ** 2 * self._edge_weights(k, measures)
            coords = [a if j != k else 0.5 * (a[:-1] + a[1:]) for j, a in enumerate(self.axes)]
            out.append((energy, tuple(np.meshgrid(*coords, indexing="ij"))))
        return out


def _along(values: np.ndarray, axis: int, dim: int) -> np.ndarray:
    shape = [1] * dim
    shape[axis] = values.size
    return values.reshape(shape)


def tent_energy(radius: float, n: int = 16) -> float:
    """Energy radius * int |v'|^2 of the 1-D tent v = 1 - x/radius; always 1."""
    grid = TensorGrid((np.linspace(0.0, radius, n + 1),))
    v = 1.0 - grid.axes[0] / radius
    return float(radius * v @ (grid.stiffness() @ v))


# --- Solvers ---

@dataclass
class SolveResult:
    x: np.ndarray
    residual: float
    iterations: int


def solve_spd(
    matrix: sp.spmatrix,
    rhs: np.ndarray,
    rtol: float = CG_RTOL,
    maxiter: Optional[int] = None,
    method: str = "cg",
    x0: Optional[np.ndarray] = None,
) -> SolveResult:
    """Solve a sparse SPD system with Jacobi-preconditioned CG or a direct factorization."""
    matrix = sp.csr_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    n = matrix.shape[0]
    if n == 0:
        raise SolverError("empty system")
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return SolveResult(np.zeros(n), 0.0, 0)

    diagonal = matrix.diagonal()
    if np.any(diagonal <= 0):
        raise SolverError("matrix has a non-positive diagonal entry; system is singular")

    if method == "direct":
        x = spsolve(matrix.tocsc(), rhs)
        residual = float(np.linalg.norm(rhs - matrix @ x) / rhs_norm)
        if not np.all(np.isfinite(x)):
            raise SolverError("direct factorization failed", residual=residual)
        return SolveResult(x, residual, 1)
    if method != "cg":
        raise ValueError(f"Unknown solver method: {method}")

    maxiter = maxiter or max(CG_MIN_ITERATIONS, int(CG_MAXITER_FACTOR * math.sqrt(n)))
    preconditioner = LinearOperator((n, n), matvec=lambda v: v / diagonal, dtype=float)
    count = [0]

    def _count(_):
        count[0] += 1

    x, info = cg(matrix, rhs, x0=x0, rtol=rtol, atol=0.0, maxiter=maxiter, M=preconditioner, callback=_count)
    residual = float(np.linalg.norm(rhs - matrix @ x) / rhs_norm)
    if info != 0 or not np.isfinite(residual):
        raise SolverError(
            f"CG did not converge in {maxiter} iterations (relative residual {residual:.2e})",
            residual=residual,
            iterations=count[0],
        )
    logger.debug("cg: n=%d iterations=%d residual=%.2e", n, count[0], residual)
    return SolveResult(x, residual, count[0])


def solve_dirichlet(
    stiffness: sp.spmatrix,
    fixed: np.ndarray,
    values: np.ndarray,
    load: Optional[np.ndarray] = None,
    method: str = "cg",
) -> SolveResult:
    """Minimize u^T K u - 2 load.u with u prescribed on the `fixed` mask; returns the full vector."""
    fixed = np.asarray(fixed, dtype=bool).ravel()
    values = np.asarray(values, dtype=float).ravel()
    free = ~fixed
    if not free.any():
        raise SolverError("no free nodes left after applying Dirichlet data")

    stiffness = sp.csr_matrix(stiffness)
    u = np.where(fixed, values, 0.0)
    a_free = stiffness[free][:, free]
    rhs = -(stiffness[free][:, fixed] @ u[fixed])
    if load is not None:
        rhs = rhs + np.asarray(load, dtype=float).ravel()[free]
    result = solve_spd(a_free, rhs, method=method)
    u[free] = result.x
    return SolveResult(u, result.residual, result.iterations)
