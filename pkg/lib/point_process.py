#!/usr/bin/env python3
# lib/point_process.py - Marked point processes, neighbor geometry, classification and sieve geometry

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.integrate import quad
from scipy.special import betainc

from lib.discretization import ball_volume
from lib.regime import H0Tag
from utils.constants import MC_SAMPLES

logger = logging.getLogger(__name__)

PROCESS_KINDS = ("poisson", "lattice", "perturbed_lattice", "matern_hardcore")
LABELS = ("I", "C1", "C2")

Seed = Union[int, Sequence[int]]


# --- Windows ---

@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] in R^d."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("box corners must have the same positive dimension")

    @classmethod
    def unit(cls, d: int) -> "Box":
        return cls((0.0,) * d, (1.0,) * d)

    @classmethod
    def from_json(cls, data) -> "Box":
        return cls(tuple(data[0]), tuple(data[1]))

    def to_json(self) -> List[List[float]]:
        return [list(self.lo), list(self.hi)]

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> np.ndarray:
        return np.maximum(np.asarray(self.hi) - np.asarray(self.lo), 0.0)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def scaled(self, factor: float) -> "Box":
        return Box(tuple(v * factor for v in self.lo), tuple(v * factor for v in self.hi))

    def padded(self, margin: float) -> "Box":
        return Box(tuple(v - margin for v in self.lo), tuple(v + margin for v in self.hi))

    def contains(self, points: np.ndarray, mode: str = "half_open") -> np.ndarray:
        """Membership mask; mode is 'half_open' [lo, hi), 'open' (lo, hi) or 'closed' [lo, hi]."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if mode == "half_open":
            return np.all((points >= lo) & (points < hi), axis=1)
        if mode == "open":
            return np.all((points > lo) & (points < hi), axis=1)
        if mode == "closed":
            return np.all((points >= lo) & (points <= hi), axis=1)
        raise ValueError(f"Unknown containment mode: {mode}")


# --- Mark laws ---

@dataclass(frozen=True)
class MarkLaw:
    """Distribution of the hole-size factor: a finite mixture of atoms or a uniform law."""

    atoms: Tuple[float, ...] = ()
    weights: Tuple[float, ...] = ()
    uniform: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.uniform is not None:
            lo, hi = self.uniform
            if not (0 < lo <= hi) or not math.isfinite(hi):
                raise ValueError("uniform mark law needs 0 < lo <= hi < inf")
            return
        if not self.atoms or len(self.atoms) != len(self.weights):
            raise ValueError("mark law needs matching atoms and weights")
        if any(not (a > 0) or not math.isfinite(a) for a in self.atoms):
            raise ValueError("mark law support must be positive")
        if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise ValueError("mark weights must be nonnegative with positive total")
        total = float(sum(self.weights))
        object.__setattr__(self, "weights", tuple(w / total for w in self.weights))

    @classmethod
    def atom(cls, rho: float) -> "MarkLaw":
        return cls((float(rho),), (1.0,))

    @classmethod
    def mixture(cls, atoms: Sequence[float], weights: Sequence[float]) -> "MarkLaw":
        return cls(tuple(float(a) for a in atoms), tuple(float(w) for w in weights))

    @classmethod
    def uniform_law(cls, lo: float, hi: float) -> "MarkLaw":
        return cls(uniform=(float(lo), float(hi)))

    @classmethod
    def parse(cls, value: Any) -> "MarkLaw":
        """Build from '1', '1:0.5,2:0.5', 'uniform:0.5:2', a number, or a config table."""
        if isinstance(value, MarkLaw):
            return value
        if isinstance(value, (int, float)):
            return cls.atom(value)
        if isinstance(value, dict):
            if "uniform" in value:
                lo, hi = value["uniform"]
                return cls.uniform_law(lo, hi)
            atoms = value.get("atoms", [1.0])
            weights = value.get("weights", [1.0] * len(atoms))
            return cls.mixture(atoms, weights)

        text = str(value).strip()
        if text.startswith("uniform"):
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(f"Cannot parse mark law: {value}")
            return cls.uniform_law(float(parts[1]), float(parts[2]))
        atoms, weights = [], []
        for item in text.split(","):
            rho, _, weight = item.partition(":")
            atoms.append(float(rho))
            weights.append(float(weight) if weight else 1.0)
        return cls.mixture(atoms, weights)

    @property
    def max_mark(self) -> float:
        return self.uniform[1] if self.uniform else max(a for a, w in zip(self.atoms, self.weights) if w > 0)

    @property
    def min_mark(self) -> float:
        return self.uniform[0] if self.uniform else min(a for a, w in zip(self.atoms, self.weights) if w > 0)

    @property
    def is_single_atom(self) -> bool:
        return self.uniform is None and sum(1 for w in self.weights if w > 0) == 1

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.uniform:
            return rng.uniform(self.uniform[0], self.uniform[1], n)
        return rng.choice(np.asarray(self.atoms), size=n, p=np.asarray(self.weights))

    def expect(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        """E[g(rho)]; exact for atoms, 16-point Gauss-Legendre for the uniform law."""
        if self.uniform:
            lo, hi = self.uniform
            nodes, weights = np.polynomial.legendre.leggauss(16)
            rho = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            return float(0.5 * np.sum(weights * np.asarray(g(rho), dtype=float)))
        active = [(a, w) for a, w in zip(self.atoms, self.weights) if w > 0]
        rho = np.array([a for a, _ in active])
        return float(np.sum(np.array([w for _, w in active]) * np.asarray(g(rho), dtype=float)))

    def to_json(self) -> Dict[str, Any]:
        if self.uniform:
            return {"uniform": list(self.uniform)}
        return {"atoms": list(self.atoms), "weights": list(self.weights)}


@dataclass(frozen=True)
class ProcessSpec:
    kind: str = "poisson"
    intensity: float = 1.0
    marks: MarkLaw = field(default_factory=lambda: MarkLaw.atom(1.0))
    hardcore_radius: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise ValueError(f"Unknown process kind: {self.kind}")
        if not math.isfinite(self.intensity) or self.intensity <= 0:
            raise ValueError(f"intensity must be finite and positive, got {self.intensity}")
        if self.kind == "matern_hardcore" and self.hardcore_radius <= 0:
            raise ValueError("matern_hardcore needs a positive hardcore_radius")

    @classmethod
    def from_config(cls, data: Dict[str, Any]) -> "ProcessSpec":
        return cls(
            kind=data.get("kind", "poisson"),
            intensity=float(data.get("intensity", 1.0)),
            marks=MarkLaw.parse(data.get("marks", 1.0)),
            hardcore_radius=float(data.get("hardcore_radius", 0.0)),
            offset=float(data.get("offset", 0.0)),
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "intensity": self.intensity,
            "marks": self.marks.to_json(),
            "hardcore_radius": self.hardcore_radius,
            "offset": self.offset,
        }

    def mean_intensity(self, d: int) -> float:
        """Points per unit volume of the retained process."""
        if self.kind != "matern_hardcore":
            return self.intensity
        v = ball_volume(d, self.hardcore_radius)
        return (1.0 - math.exp(-self.intensity * v)) / v


# --- Realizations ---

@dataclass
class MarkedPointSet:
    """Centers y' in a window with their marks rho."""

    dimension: int
    centers: np.ndarray
    marks: np.ndarray
    window: Box
    seed: Any = None
    process: str = "poisson"

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1, self.dimension)
        self.marks = np.asarray(self.marks, dtype=float).ravel()
        if self.centers.shape[0] != self.marks.size:
            raise ValueError("one mark per center is required")
        if np.any(self.marks <= 0):
            raise ValueError("marks must be positive")
        if self.marks.size and not self.window.contains(self.centers).all():
            raise ValueError("all centers must lie in the window")

    def __len__(self) -> int:
        return self.marks.size

    def subset(self, mask: np.ndarray) -> "MarkedPointSet":
        return MarkedPointSet(self.dimension, self.centers[mask], self.marks[mask], self.window, self.seed, self.process)

    def to_json(self) -> Dict[str, Any]:
        seed = list(self.seed) if isinstance(self.seed, (list, tuple, np.ndarray)) else self.seed
        return {
            "dimension": self.dimension,
            "window": self.window.to_json(),
            "process": self.process,
            "seed": seed,
            "points": [[*map(float, c), float(m)] for c, m in zip(self.centers, self.marks)],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "MarkedPointSet":
        d = int(data["dimension"])
        points = np.asarray(data.get("points", []), dtype=float).reshape(-1, d + 1)
        return cls(d, points[:, :d], points[:, d], Box.from_json(data["window"]), data.get("seed"),
                   data.get("process", "poisson"))


def sample_process(spec: ProcessSpec, window: Box, seed: Seed) -> MarkedPointSet:
    """Draw one realization of `spec` restricted to `window`."""
    d = window.dimension
    rng = np.random.default_rng(seed)
    if window.volume == 0.0:
        return MarkedPointSet(d, np.empty((0, d)), np.empty(0), window, seed, spec.kind)

    if spec.kind == "poisson":
        count = rng.poisson(spec.intensity * window.volume)
        centers = np.asarray(window.lo) + rng.random((count, d)) * window.widths
    elif spec.kind in ("lattice", "perturbed_lattice"):
        centers = _lattice_centers(spec, window, rng)
    else:
        centers = _matern_centers(spec, window, rng)

    marks = spec.marks.sample(rng, centers.shape[0])
    return MarkedPointSet(d, centers, marks, window, seed, spec.kind)


def _lattice_centers(spec: ProcessSpec, window: Box, rng: np.random.Generator) -> np.ndarray:
    spacing = spec.intensity ** (-1.0 / window.dimension)
    ranges = []
    for lo, hi in zip(window.lo, window.hi):
        start = math.floor(lo / spacing - spec.offset) - 1
        stop = math.ceil(hi / spacing - spec.offset) + 1
        ranges.append(np.arange(start, stop + 1))
    grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, window.dimension).astype(float)
    centers = (grid + spec.offset) * spacing
    if spec.kind == "perturbed_lattice":
        centers = centers + (rng.random(centers.shape) - 0.5) * spacing
    return centers[window.contains(centers)]


def _matern_centers(spec: ProcessSpec, window: Box, rng: np.random.Generator) -> np.ndarray:
    radius = spec.hardcore_radius
    parents_box = window.padded(radius)
    count = rng.poisson(spec.intensity * parents_box.volume)
    parents = np.asarray(parents_box.lo) + rng.random((count, window.dimension)) * parents_box.widths
    ages = rng.random(count)
    keep = np.ones(count, dtype=bool)
    if count > 1:
        pairs = cKDTree(parents).query_pairs(radius, output_type="ndarray")
        if pairs.size:
            older = np.where(ages[pairs[:, 0]] > ages[pairs[:, 1]], pairs[:, 0], pairs[:, 1])
            keep[older] = False
    retained = parents[keep]
    return retained[window.contains(retained)]


def sampling_window(domain: Box, epsilon: float, a: float, max_mark: float) -> Box:
    """Window in y-coordinates covering domain/epsilon plus the classification margin."""
    return domain.scaled(1.0 / epsilon).padded(2.0 * (a / epsilon) * max_mark + 2.0)


@dataclass
class NeighborData:
    distance: np.ndarray
    radius: np.ndarray


def neighbor_data(points: MarkedPointSet) -> NeighborData:
    """Nearest-neighbor distance d_Y and truncated radius r = min(d_Y/2, 1) per point."""
    n = len(points)
    distance = np.full(n, np.inf)
    if n > 1:
        dist, _ = cKDTree(points.centers).query(points.centers, k=2)
        distance = dist[:, 1]
    return NeighborData(distance, np.minimum(distance / 2.0, 1.0))


def thin(points: MarkedPointSet, sigma: float) -> MarkedPointSet:
    """Keep the points with min(d_Y/2, 1/rho) < sigma."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    nd = neighbor_data(points)
    return points.subset(np.minimum(nd.distance / 2.0, 1.0 / points.marks) < sigma)


def spatial_average(points: MarkedPointSet, g: Callable[[np.ndarray], np.ndarray], box: Box, epsilon: float) -> float:
    """(eps^d / |B|) times the sum of g(rho) over points with eps*y in the half-open box B."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if box.volume == 0.0:
        raise ValueError("averaging box has zero volume")
    if len(points) == 0:
        return 0.0
    inside = box.contains(epsilon * points.centers)
    if not inside.any():
        return 0.0
    values = np.asarray(g(points.marks[inside]), dtype=float)
    return float(epsilon ** box.dimension / box.volume * np.sum(values))


# --- Classification ---

@dataclass
class Classification:
    points: MarkedPointSet
    neighbors: NeighborData
    in_domain: np.ndarray
    labels: np.ndarray
    epsilon: float
    a: float
    delta: float
    h0_tag: H0Tag
    domain: Box

    def indices(self, label: str) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    @property
    def isolated(self) -> np.ndarray:
        return self.indices("I")

    @property
    def cluster_large(self) -> np.ndarray:
        return self.indices("C1")

    @property
    def cluster_near(self) -> np.ndarray:
        return self.indices("C2")

    @property
    def cluster(self) -> np.ndarray:
        return np.flatnonzero((self.labels == "C1") | (self.labels == "C2"))

    def counts(self) -> Dict[str, int]:
        return {label: int(np.sum(self.labels == label)) for label in LABELS}

    def to_json(self) -> Dict[str, Any]:
        data = self.points.to_json()
        data["labels"] = [str(v) for v in self.labels]
        data["scaling"] = {"epsilon": self.epsilon, "a": self.a, "delta": self.delta, "h0": str(self.h0_tag)}
        data["domain"] = self.domain.to_json()
        return data


def classify(
    points: MarkedPointSet,
    epsilon: float,
    a: float,
    delta: float,
    h0_tag: Union[H0Tag, str],
    domain: Box,
    neighbors: Optional[NeighborData] = None,
) -> Classification:
    """Split the points with eps*y in the open domain into isolated (I) and cluster (C1, C2) points."""
    if min(epsilon, a, delta) <= 0:
        raise ValueError("epsilon, a and delta must be positive")
    tag = H0Tag.parse(h0_tag)
    nd = neighbors or neighbor_data(points)
    n = len(points)
    labels = np.full(n, "", dtype=object)
    in_domain = domain.contains(epsilon * points.centers, mode="open") if n else np.zeros(0, dtype=bool)
    idx = np.flatnonzero(in_domain)
    if idx.size == 0:
        return Classification(points, nd, in_domain, labels, epsilon, a, delta, tag, domain)

    shield = 2.0 * a * points.marks[idx]
    ball = epsilon * nd.radius[idx]
    bound = np.minimum(ball, delta) if tag.is_infinite else ball
    small = shield < bound

    # condition (2): no other in-domain shield ball meets this point's eps*r ball
    phys = epsilon * points.centers[idx]
    tree = cKDTree(phys)
    reach = ball + 2.0 * a * float(points.marks[idx].max())
    separated = np.ones(idx.size, dtype=bool)
    for k, neighbors_k in enumerate(tree.query_ball_point(phys, reach)):
        others = np.asarray([j for j in neighbors_k if j != k], dtype=int)
        if others.size == 0:
            continue
        gaps = np.linalg.norm(phys[others] - phys[k], axis=1)
        if np.any(gaps < shield[others] + ball[k]):
            separated[k] = False

    local = np.where(small & separated, "I", np.where(small, "C2", "C1"))
    labels[idx] = local
    return Classification(points, nd, in_domain, labels, epsilon, a, delta, tag, domain)


# --- Sieve geometry ---

@dataclass
class SieveRealization:
    classification: Classification
    hole_shape: str
    hole_radius: float
    hole_centers: np.ndarray
    hole_radii: np.ndarray
    isolated_mask: np.ndarray
    shield_centers: np.ndarray
    shield_radii: np.ndarray
    shield_measure: float
    shield_stderr: float
    shield_method: str

    @property
    def epsilon(self) -> float:
        return self.classification.epsilon

    @property
    def a(self) -> float:
        return self.classification.a

    @property
    def delta(self) -> float:
        return self.classification.delta

    @property
    def h0_tag(self) -> H0Tag:
        return self.classification.h0_tag

    @property
    def domain(self) -> Box:
        return self.classification.domain

    def contact_regions(self) -> List[Tuple[Tuple[float, ...], float]]:
        return [(tuple(c), float(r)) for c, r in zip(self.hole_centers, self.hole_radii)]

    def contact_measure(self, samples: int = MC_SAMPLES, seed: Seed = 0) -> float:
        """Measure of the union of contact regions inside U'; NaN for non-ball holes."""
        if self.hole_shape != "ball":
            return float("nan")
        return union_ball_measure(self.hole_centers, self.hole_radii, self.domain, samples, seed)[0]


def realize_sieve(
    classification: Classification,
    hole_shape: str = "ball",
    hole_radius: float = 1.0,
    mc_samples: int = MC_SAMPLES,
    seed: Seed = 0,
) -> SieveRealization:
    """Contact regions eps*y + a*rho*T' and the cluster shield union of B'(eps*y, 2*a*rho)."""
    if hole_shape not in ("ball", "other"):
        raise ValueError(f"Unknown hole shape: {hole_shape}")
    pts = classification.points
    idx = np.flatnonzero(classification.in_domain)
    eps, a = classification.epsilon, classification.a
    centers = eps * pts.centers[idx]
    radii = a * pts.marks[idx] * hole_radius
    isolated_mask = classification.labels[idx] == "I"

    cluster = ~isolated_mask
    shield_centers = centers[cluster]
    shield_radii = 2.0 * a * pts.marks[idx][cluster]
    measure, stderr, method = union_ball_measure(shield_centers, shield_radii, classification.domain, mc_samples, seed)
    return SieveRealization(classification, hole_shape, hole_radius, centers, radii, isolated_mask,
                            shield_centers, shield_radii, measure, stderr, method)


def _cap_volume(d: int, radius: float, height: float) -> float:
    if height <= 0:
        return 0.0
    if height >= 2 * radius:
        return ball_volume(d, radius)
    if height > radius:
        return ball_volume(d, radius) - _cap_volume(d, radius, 2 * radius - height)
    x = (2 * radius * height - height * height) / radius ** 2
    return 0.5 * ball_volume(d, radius) * float(betainc((d + 1) / 2.0, 0.5, x))


def lens_volume(d: int, r1: float, r2: float, distance: float) -> float:
    """Volume of the intersection of two d-balls at the given center distance."""
    if distance >= r1 + r2:
        return 0.0
    if distance <= abs(r1 - r2):
        return ball_volume(d, min(r1, r2))
    c1 = (distance ** 2 + r1 ** 2 - r2 ** 2) / (2 * distance)
    return _cap_volume(d, r1, r1 - c1) + _cap_volume(d, r2, r2 - (distance - c1))


def clipped_ball_measure(center: Sequence[float], radius: float, box: Box) -> float:
    """Exact measure of B(center, radius) intersected with the box, integrated slice by slice."""
    center = np.asarray(center, dtype=float)
    lo, hi = np.asarray(box.lo, dtype=float), np.asarray(box.hi, dtype=float)
    if np.all(center - radius >= lo) and np.all(center + radius <= hi):
        return ball_volume(box.dimension, radius)
    if np.any(center + radius <= lo) or np.any(center - radius >= hi):
        return 0.0
    return _clipped_slices(center, radius, lo, hi)


def _clipped_slices(center: np.ndarray, radius: float, lo: np.ndarray, hi: np.ndarray) -> float:
    if radius <= 0:
        return 0.0
    c = center[0]
    a, b = max(c - radius, lo[0]), min(c + radius, hi[0])
    if b <= a:
        return 0.0
    if center.size == 1:
        return b - a

    # the slice radius crosses a box face of the remaining axes at these abscissae
    kinks = []
    for face in np.concatenate([lo[1:] - center[1:], hi[1:] - center[1:]]):
        if abs(face) < radius:
            offset = math.sqrt(radius * radius - face * face)
            kinks.extend(x for x in (c - offset, c + offset) if a < x < b)

    def slice_measure(x: float) -> float:
        return _clipped_slices(center[1:], math.sqrt(max(radius * radius - (x - c) ** 2, 0.0)), lo[1:], hi[1:])

    value, _ = quad(slice_measure, a, b, points=sorted(kinks) or None, epsabs=0.0, epsrel=1e-10, limit=200)
    return float(value)


def union_ball_measure(
    centers: np.ndarray,
    radii: np.ndarray,
    clip: Box,
    samples: int = MC_SAMPLES,
    seed: Seed = 0,
    method: Optional[str] = None,
) -> Tuple[float, float, str]:
    """Measure of the union of balls intersected with the open box `clip`; returns (value, stderr, method).

    Pairwise-disjoint balls are measured exactly even when the box clips them; overlapping
    balls use inclusion-exclusion when they lie inside the box and no three meet, and
    Monte Carlo otherwise.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, clip.dimension)
    radii = np.asarray(radii, dtype=float).ravel()
    d = clip.dimension
    if radii.size == 0:
        return 0.0, 0.0, "empty"

    lo, hi = np.asarray(clip.lo), np.asarray(clip.hi)
    inside = bool(np.all(centers - radii[:, None] >= lo) and np.all(centers + radii[:, None] <= hi))
    edges = []
    if radii.size > 1:
        pairs = cKDTree(centers).query_pairs(2.0 * radii.max(), output_type="ndarray")
        for i, j in pairs:
            if np.linalg.norm(centers[i] - centers[j]) < radii[i] + radii[j]:
                edges.append((int(i), int(j)))

    if method is None:
        if not edges:
            method = "analytic"
        elif inside and not _has_triangle(edges):
            method = "inclusion_exclusion"
        else:
            method = "monte_carlo"

    if method == "analytic":
        return float(sum(clipped_ball_measure(c, r, clip) for c, r in zip(centers, radii))), 0.0, method
    if method == "inclusion_exclusion":
        total = sum(ball_volume(d, r) for r in radii)
        for i, j in edges:
            total -= lens_volume(d, radii[i], radii[j], float(np.linalg.norm(centers[i] - centers[j])))
        return float(total), 0.0, method

    logger.warning("shield measure: Monte Carlo fallback over %d balls", radii.size)
    box_lo = np.maximum((centers - radii[:, None]).min(axis=0), lo)
    box_hi = np.minimum((centers + radii[:, None]).max(axis=0), hi)
    if np.any(box_hi <= box_lo):
        return 0.0, 0.0, "monte_carlo"
    rng = np.random.default_rng(seed)
    sample = box_lo + rng.random((samples, d)) * (box_hi - box_lo)
    hits = np.zeros(samples, dtype=bool)
    tree = cKDTree(sample)
    for c, r in zip(centers, radii):
        hit = tree.query_ball_point(c, r)
        if hit:
            hits[np.asarray(hit)] = True
    box_volume = float(np.prod(box_hi - box_lo))
    p = hits.mean()
    return box_volume * p, box_volume * math.sqrt(p * (1 - p) / samples), "monte_carlo"


def _has_triangle(edges: Sequence[Tuple[int, int]]) -> bool:
    adjacency: Dict[int, set] = {}
    for i, j in edges:
        adjacency.setdefault(i, set()).add(j)
        adjacency.setdefault(j, set()).add(i)
    return any(adjacency[i] & adjacency[j] for i, j in edges)


def realization_invariants(realization: SieveRealization) -> List[str]:
    """Names of the geometric invariants violated by this realization (empty when all hold)."""
    cls = realization.classification
    pts = cls.points
    violations = []

    finite = np.isfinite(cls.neighbors.distance)
    if finite.sum() > 1:
        tree = cKDTree(pts.centers)
        half = np.where(finite, cls.neighbors.distance / 2.0, 0.0)
        for i, j in tree.query_pairs(float(2.0 * half.max()) + 1e-12):
            if np.linalg.norm(pts.centers[i] - pts.centers[j]) < half[i] + half[j] - 1e-12:
                violations.append("disjointness")
                break

    counts = cls.counts()
    if sum(counts.values()) != int(cls.in_domain.sum()):
        violations.append("partition")

    iso = realization.isolated_mask
    iso_centers = realization.hole_centers[iso]
    idx = np.flatnonzero(cls.in_domain)[iso]
    iso_balls = cls.epsilon * cls.neighbors.radius[idx]
    if realization.shield_radii.size and iso_centers.size:
        gaps = np.linalg.norm(iso_centers[:, None, :] - realization.shield_centers[None, :, :], axis=2)
        if np.any(gaps < iso_balls[:, None] + realization.shield_radii[None, :] - 1e-12):
            violations.append("separation")

    if iso_centers.shape[0] > 1:
        if np.any(realization.hole_radii[iso] >= iso_balls):
            violations.append("contact_separation")
        else:
            tree = cKDTree(iso_centers)
            for i, j in tree.query_pairs(float(2.0 * iso_balls.max())):
                if np.linalg.norm(iso_centers[i] - iso_centers[j]) < iso_balls[i] + iso_balls[j] - 1e-12:
                    violations.append("contact_separation")
                    break
    return violations
