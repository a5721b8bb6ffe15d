#!/usr/bin/env python3
# lib/homogenized.py - Coupled limit system for u+ and u- on the unit box

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Union

import numpy as np
import scipy.sparse as sp
import sympy as sm

from lib.discretization import solve_spd
from utils.output import write_csv

logger = logging.getLogger(__name__)

SYMBOLS = sm.symbols("x y z")


@dataclass(frozen=True)
class GridU:
    """Uniform node grid on [0, length]^d with a Dirichlet boundary ring."""

    n: int = 64
    dimension: int = 2
    length: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least two cells per side")
        if self.dimension not in (2, 3):
            raise ValueError("homogenized grids are 2-D or 3-D")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n + 1)

    @property
    def shape(self):
        return (self.n + 1,) * self.dimension

    @property
    def interior(self):
        return (slice(1, -1),) * self.dimension

    def coordinates(self):
        return np.meshgrid(*([self.axis] * self.dimension), indexing="ij")

    def boundary_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        mask[self.interior] = False
        return mask


def laplacian(grid: GridU) -> sp.csr_matrix:
    """5-point (2-D) or 7-point (3-D) Dirichlet Laplacian on the interior nodes."""
    m = grid.n - 1
    t = sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1], format="csr") / grid.spacing ** 2
    eye = sp.identity(m, format="csr")
    if grid.dimension == 2:
        return (sp.kron(t, eye) + sp.kron(eye, t)).tocsr()
    return (sp.kron(sp.kron(t, eye), eye) + sp.kron(sp.kron(eye, t), eye) + sp.kron(sp.kron(eye, eye), t)).tocsr()


FieldLike = Union[str, float, Callable[..., Any], np.ndarray]


def evaluate_field(value: FieldLike, coords) -> np.ndarray:
    """Evaluate an expression string, number, callable or array on the coordinate arrays."""
    shape = coords[0].shape
    if isinstance(value, np.ndarray):
        if value.shape != shape:
            raise ValueError(f"field has shape {value.shape}, expected {shape}")
        return value.astype(float)
    if isinstance(value, str):
        expr = sm.sympify(value)
        unknown = expr.free_symbols - set(SYMBOLS[: len(coords)])
        if unknown:
            raise ValueError(f"Unknown symbols in expression '{value}': {sorted(map(str, unknown))}")
        value = sm.lambdify(SYMBOLS[: len(coords)], expr, "numpy")
    if callable(value):
        out = np.broadcast_to(np.asarray(value(*coords), dtype=float), shape).copy()
    else:
        out = np.full(shape, float(value))
    if not np.all(np.isfinite(out)):
        raise ValueError("source field has non-finite values")
    return out


@dataclass
class SourcePair:
    f_plus: np.ndarray
    f_minus: np.ndarray

    @classmethod
    def from_expressions(cls, expr_plus: FieldLike, expr_minus: FieldLike, grid: GridU) -> "SourcePair":
        coords = grid.coordinates()
        return cls(evaluate_field(expr_plus, coords), evaluate_field(expr_minus, coords))

    def scaled(self, factor: float) -> "SourcePair":
        return SourcePair(self.f_plus * factor, self.f_minus * factor)


@dataclass
class CoupledSolution:
    grid: GridU
    u_plus: np.ndarray
    u_minus: np.ndarray
    gamma: float
    residual: float
    iterations: int = 0

    @property
    def jump(self) -> np.ndarray:
        return self.u_plus - self.u_minus

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.grid.n,
            "dimension": self.grid.dimension,
            "gamma": self.gamma,
            "residual": self.residual,
            "iterations": self.iterations,
            "u_plus": self.u_plus.tolist(),
            "u_minus": self.u_minus.tolist(),
        }


def solve_coupled(gamma: float, sources: SourcePair, grid: GridU, method: str = "cg") -> CoupledSolution:
    """-Lap u+ + (g/2)(u+ - u-) = f+, -Lap u- - (g/2)(u+ - u-) = f-, zero on the boundary."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    lap = laplacian(grid)
    fp = sources.f_plus[grid.interior].ravel()
    fm = sources.f_minus[grid.interior].ravel()

    if gamma == 0:
        plus = solve_spd(lap, fp, method=method)
        minus = solve_spd(lap, fm, method=method)
        xp, xm = plus.x, minus.x
        residual, iterations = max(plus.residual, minus.residual), plus.iterations + minus.iterations
    else:
        eye = sp.identity(lap.shape[0], format="csr")
        block = sp.bmat([[lap + 0.5 * gamma * eye, -0.5 * gamma * eye],
                         [-0.5 * gamma * eye, lap + 0.5 * gamma * eye]], format="csr")
        result = solve_spd(block, np.concatenate([fp, fm]), method=method)
        xp, xm = np.split(result.x, 2)
        residual, iterations = result.residual, result.iterations

    u_plus, u_minus = np.zeros(grid.shape), np.zeros(grid.shape)
    inner = tuple(s - 2 for s in grid.shape)
    u_plus[grid.interior] = xp.reshape(inner)
    u_minus[grid.interior] = xm.reshape(inner)
    logger.debug("coupled solve gamma=%g n=%d residual=%.2e", gamma, grid.n, residual)
    return CoupledSolution(grid, u_plus, u_minus, gamma, residual, iterations)


def energy_coupled(sol: CoupledSolution, sources: SourcePair, gamma: Optional[float] = None) -> float:
    """Discrete value of int 1/2|grad u+|^2 + 1/2|grad u-|^2 - f+ u+ - f- u- + (g/4)|u+ - u-|^2."""
    gamma = sol.gamma if gamma is None else gamma
    grid = sol.grid
    lap = laplacian(grid)
    cell = grid.spacing ** grid.dimension
    up = sol.u_plus[grid.interior].ravel()
    um = sol.u_minus[grid.interior].ravel()
    fp = sources.f_plus[grid.interior].ravel()
    fm = sources.f_minus[grid.interior].ravel()
    value = 0.5 * up @ (lap @ up) + 0.5 * um @ (lap @ um) - fp @ up - fm @ um + 0.25 * gamma * np.sum((up - um) ** 2)
    return float(cell * value)


def jump_l2(sol: CoupledSolution) -> float:
    return float(np.sqrt(np.sum(sol.jump ** 2) * sol.grid.spacing ** sol.grid.dimension))


def l2_norm(values: np.ndarray, grid: GridU) -> float:
    return float(np.sqrt(np.sum(values ** 2) * grid.spacing ** grid.dimension))


def export_csv(sol: CoupledSolution, path: str) -> str:
    coords = [c.ravel() for c in sol.grid.coordinates()]
    names = ["x", "y", "z"][: sol.grid.dimension]
    rows = [
        {**{n: float(c[i]) for n, c in zip(names, coords)},
         "u_plus": float(sol.u_plus.ravel()[i]), "u_minus": float(sol.u_minus.ravel()[i])}
        for i in range(coords[0].size)
    ]
    return write_csv(path, rows)


def manufactured_errors(gamma: float, sizes=(16, 32, 64), dimension: int = 2, method: str = "cg"):
    """L2 errors against u+ = -u- = prod sin(pi x_i) and the observed orders between successive sizes."""
    errors = []
    for n in sizes:
        grid = GridU(int(n), dimension)
        exact = np.prod([np.sin(np.pi * c) for c in grid.coordinates()], axis=0)
        load = (dimension * np.pi ** 2 + gamma) * exact
        sol = solve_coupled(gamma, SourcePair(load, -load), grid, method)
        errors.append(max(l2_norm(sol.u_plus - exact, grid), l2_norm(sol.u_minus + exact, grid)))
    orders = [float(np.log(e0 / e1) / np.log(n1 / n0))
              for (n0, e0), (n1, e1) in zip(zip(sizes, errors), zip(sizes[1:], errors[1:]))]
    return errors, orders
