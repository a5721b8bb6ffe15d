#!/usr/bin/env python3
# lib/effective.py - Critical scaling, regime tags and estimates of the effective coefficient gamma

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from lib.capacity import DEFAULT_SCHEDULE, DEFAULT_SIZES, GridSchedule, HoleSpec, JTable
from lib.errors import RegimeError
from lib.point_process import (
    Box,
    MarkLaw,
    ProcessSpec,
    SieveRealization,
    sample_process,
    spatial_average,
)
from lib.regime import INFINITE, H0Tag
from utils.constants import ADMISSIBILITY_LIMIT

logger = logging.getLogger(__name__)

__all__ = [
    "H0Tag",
    "ScalingRule",
    "GammaEstimate",
    "ClusterDiagnostics",
    "critical_a",
    "classify_regime",
    "admissibility",
    "gamma_analytic",
    "estimate_gamma_empirical",
    "cluster_sums",
]


def _power(epsilon: float, delta: float) -> float:
    if not 0 < epsilon < 1:
        raise ValueError("inferring the power of delta needs 0 < epsilon < 1")
    return round(math.log(delta) / math.log(epsilon), 9)


def classify_regime(N: int, p: float) -> H0Tag:
    """Regime of delta = eps^p: compare p(N-3) with N-1."""
    if N < 3:
        raise ValueError("ambient dimension N must be at least 3")
    if p <= 0:
        raise ValueError("power p must be positive")
    lhs, rhs = p * (N - 3), N - 1
    if math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-12):
        return H0Tag("finite", 1.0)
    return INFINITE if lhs < rhs else H0Tag("zero")


def critical_a(N: int, epsilon: float, delta: float, p: Optional[float] = None) -> float:
    """Hole scale a_eps for which the effective coefficient stays finite and positive."""
    if N < 3:
        raise ValueError("ambient dimension N must be at least 3")
    if epsilon <= 0 or delta <= 0:
        raise ValueError("epsilon and delta must be positive")
    if N == 3:
        return epsilon ** 2 * delta
    if p is None:
        p = _power(epsilon, delta)
    if classify_regime(N, p).kind == "zero":
        return epsilon ** ((N - 1) / (N - 3))
    return epsilon ** ((N - 1) / (N - 2)) * delta ** (1.0 / (N - 2))


def admissibility(epsilon: float, delta: float) -> float:
    """eps^2 ln(1/delta); must tend to zero for the N = 3 scaling to hold."""
    return epsilon ** 2 * math.log(1.0 / delta)


@dataclass(frozen=True)
class ScalingRule:
    N: int
    epsilon: float
    delta: float
    a: float
    h_eps: float
    h0_tag: H0Tag
    p: Optional[float] = None

    @classmethod
    def from_power(cls, N: int, epsilon: float, p: float) -> "ScalingRule":
        delta = epsilon ** p
        a = critical_a(N, epsilon, delta, p)
        if N == 3 and admissibility(epsilon, delta) > ADMISSIBILITY_LIMIT:
            logger.warning("eps=%g is far from the N = 3 scaling limit: eps^2 ln(1/delta) = %.3g > %g",
                           epsilon, admissibility(epsilon, delta), ADMISSIBILITY_LIMIT)
        return cls(N, epsilon, delta, a, delta / a, classify_regime(N, p), p)

    def to_json(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "a": self.a,
            "h_eps": self.h_eps,
            "h0": str(self.h0_tag),
            "p": self.p,
        }


def _j_function(h0_tag: H0Tag, hole: HoleSpec, N: int, j, marks: MarkLaw, schedule: GridSchedule,
                sizes: Sequence[float]) -> Callable:
    if j is not None:
        return j
    if marks.uniform:
        return JTable.log_spaced(h0_tag, marks.uniform[0], marks.uniform[1], hole=hole, N=N, schedule=schedule,
                                 sizes=sizes)
    return JTable(h0_tag, hole, N, marks.atoms, schedule, sizes)


def gamma_analytic(intensity: float, marks: MarkLaw, h0_tag, hole: HoleSpec = HoleSpec(), N: int = 3,
                   j: Optional[Callable] = None, schedule: GridSchedule = DEFAULT_SCHEDULE,
                   sizes: Sequence[float] = DEFAULT_SIZES) -> float:
    """gamma = (1/2) mu E[J(rho)] for an ergodic process of intensity mu."""
    tag = H0Tag.parse(h0_tag)
    if tag.kind == "zero" and N == 3:
        raise RegimeError("J_0 undefined at N=3")
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    jf = _j_function(tag, hole, N, j, marks, schedule, sizes)
    return 0.5 * intensity * marks.expect(lambda rho: jf(rho))


@dataclass
class GammaEstimate:
    analytic: Optional[float]
    eps_schedule: List[float]
    samples: List[List[float]]
    means: List[float] = field(default_factory=list)
    stderrs: List[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.means:
            self.means = [float(np.mean(s)) for s in self.samples]
            self.stderrs = [float(np.std(s, ddof=1) / math.sqrt(len(s))) for s in self.samples]

    def within(self, k: int = -1, sigmas: float = 3.0) -> bool:
        if self.analytic is None:
            return False
        return abs(self.means[k] - self.analytic) <= sigmas * self.stderrs[k] + 1e-12 * abs(self.analytic)

    def to_json(self) -> Dict[str, Any]:
        return {
            "analytic": self.analytic,
            "rows": [
                {"epsilon": e, "mean": m, "stderr": s, "count": len(v)}
                for e, m, s, v in zip(self.eps_schedule, self.means, self.stderrs, self.samples)
            ],
        }


def estimate_gamma_empirical(
    process: ProcessSpec,
    h0_tag,
    hole: HoleSpec = HoleSpec(),
    N: int = 3,
    eps_schedule: Sequence[float] = (1 / 8, 1 / 16, 1 / 32),
    window: Optional[Box] = None,
    seeds: Sequence[int] = (0, 1),
    j: Optional[Callable] = None,
    executor: Optional[ThreadPoolExecutor] = None,
    schedule: GridSchedule = DEFAULT_SCHEDULE,
    sizes: Sequence[float] = DEFAULT_SIZES,
) -> GammaEstimate:
    """Spatial averages of J/2 over eps*Y inside the window, one per (eps, seed)."""
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError("at least two seeds are needed for a standard error")
    tag = H0Tag.parse(h0_tag)
    window = window or Box.unit(N - 1)
    jf = _j_function(tag, hole, N, j, process.marks, schedule, sizes)
    analytic = gamma_analytic(process.mean_intensity(N - 1), process.marks, tag, hole, N, jf)

    def one(task):
        k, eps, seed = task
        points = sample_process(process, window.scaled(1.0 / eps), [seed, k])
        return spatial_average(points, lambda rho: 0.5 * jf(rho), window, eps)

    tasks = [(k, eps, seed) for k, eps in enumerate(eps_schedule) for seed in seeds]
    values = list(executor.map(one, tasks)) if executor else [one(t) for t in tasks]
    samples = [values[k * len(seeds):(k + 1) * len(seeds)] for k in range(len(eps_schedule))]
    logger.info("gamma estimate over %d realizations", len(values))
    return GammaEstimate(analytic, list(eps_schedule), samples)


@dataclass
class ClusterDiagnostics:
    epsilon: float
    sum_J: float
    sum_vol: float
    shield_measure: float
    shield_stderr: float
    n_isolated: int
    n_large: int
    n_near: int

    def to_json(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def cluster_sums(realization: SieveRealization, h0_tag, j: Callable, N: int = 3) -> ClusterDiagnostics:
    """Weighted sums of J and rho^(N-1) over the cluster points, with the shield measure."""
    cls = realization.classification
    idx = cls.cluster
    rho = cls.points.marks[idx]
    sum_J = float(np.sum(cls.epsilon ** (N - 1) * np.asarray(j(rho), dtype=float))) if idx.size else 0.0
    sum_vol = float(np.sum((cls.a * rho) ** (N - 1))) if idx.size else 0.0
    counts = cls.counts()
    return ClusterDiagnostics(cls.epsilon, sum_J, sum_vol, realization.shield_measure, realization.shield_stderr,
                              counts["I"], counts["C1"], counts["C2"])
