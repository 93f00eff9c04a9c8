"""Experiment harness: synthetic pair cohorts, trajectories and 3-D exports.

Every pair gets its own feature stream and its own projection matrices,
both derived from the cohort's master seed and the pair id, so a cohort
run is independent of worker count and scheduling.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from entlab.config import settings
from entlab.core.constants import (
    EUCLID_SQ_MAX,
    FEATURE_SALT,
    MASK64,
    MAX_INTRA_ANGLE,
    MIDDLE_BAND,
    PairClass,
)
from entlab.core.entangler import Trajectory, encode, measure_trajectory, project
from entlab.core.errors import DimensionError, InputValidationError
from entlab.core.lshstats import as_vector, require_nonzero
from entlab.core.rngcore import derive_seed, derive_stream
from entlab.core.services.logging_config import log_convergence
from entlab.formats.tables import import_features

logger = logging.getLogger(__name__)

__all__ = [
    "CohortSpec",
    "CohortResult",
    "CohortSummary",
    "Export3dRow",
    "FeaturePair",
    "StepSummary",
    "TrajectoryRow",
    "export_3d",
    "import_features",
    "run_cohort",
    "run_pair",
    "summarize",
    "synth_pair",
    "synth_pairs",
]


class CohortSpec(BaseModel):
    """Parameters of a synthetic cohort."""

    model_config = ConfigDict(frozen=True)

    pair_count: int = Field(default=100, ge=0, description="Number of feature pairs")
    ell: int = Field(default=512, ge=1, description="Feature dimension")
    n: int = Field(default_factory=lambda: settings.default_n, ge=1)
    k: int = Field(default_factory=lambda: settings.default_k, ge=1)
    t_max: int = Field(default_factory=lambda: settings.default_t, ge=1)
    inter_fraction: float = Field(default=1.0, ge=0.0, le=1.0)
    intra_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    master_seed: int = Field(default_factory=lambda: settings.default_seed, ge=0, le=MASK64)
    epsilon: float = Field(
        default_factory=lambda: settings.default_epsilon, gt=0.0, lt=0.5
    )

    @model_validator(mode="after")
    def _check_consistency(self) -> "CohortSpec":
        if abs(self.inter_fraction + self.intra_fraction - 1.0) > 1e-9:
            raise ValueError("inter and intra fractions must sum to 1")
        if self.k > self.n:
            raise ValueError("k must not exceed n")
        return self

    @property
    def inter_count(self) -> int:
        """Pairs ``0 .. inter_count - 1`` are inter-class, the rest intra-class."""
        return int(math.floor(self.pair_count * self.inter_fraction + 0.5))


@dataclass(frozen=True)
class FeaturePair:
    pair_id: int
    label: PairClass
    w: np.ndarray
    wp: np.ndarray


class TrajectoryRow(NamedTuple):
    pair_id: int
    step: int
    angle_theta: float
    hamming_k: float
    hamming_n: float
    euclid_sq: float
    euclid_sq_flipped: float


class Export3dRow(NamedTuple):
    step: int
    cx: float
    cy: float
    cz: float
    cpx: float
    cpy: float
    cpz: float


class StepSummary(BaseModel):
    """Fractions of pairs meeting each convergence criterion at one step."""

    step: int
    angle_converged: float = Field(description="angle_theta < eps or > 1 - eps")
    distance_converged: float = Field(description="min(euclid_sq, 4 - euclid_sq) < eps")
    converged: float = Field(description="both criteria at once")
    middle_band: float = Field(description="angle_theta inside the middle band")


class CohortSummary(BaseModel):
    pair_count: int
    inter_count: int
    intra_count: int
    epsilon: float
    middle_band: List[float]
    steps: List[StepSummary]


@dataclass
class CohortResult:
    rows: List[TrajectoryRow]
    summary: CohortSummary


def synth_pair(master_seed: int, pair_id: int, ell: int, label: PairClass) -> FeaturePair:
    """Build one synthetic pair from the feature stream of ``pair_id``.

    Inter pairs are two independent standard-normal vectors. Intra pairs
    are ``w' = cos(phi) w^ + sin(phi) u^`` with ``u^`` orthogonal to ``w^``
    and ``phi`` uniform in (0, pi/4).
    """
    stream = derive_stream(derive_seed(master_seed ^ FEATURE_SALT, pair_id), 0)
    w = stream.normals(ell)
    other = stream.normals(ell)
    if label is PairClass.INTER:
        return FeaturePair(pair_id, label, w, other)

    if ell < 2:
        raise DimensionError("intra-class pairs need a feature dimension of at least 2")
    w_hat = w / np.linalg.norm(w)
    u = other - (other @ w_hat) * w_hat
    u_hat = u / np.linalg.norm(u)
    phi = MAX_INTRA_ANGLE * math.pi * float(stream.uniforms(1)[0])
    wp = math.cos(phi) * w_hat + math.sin(phi) * u_hat
    return FeaturePair(pair_id, label, w, wp)


def synth_pairs(spec: CohortSpec) -> List[FeaturePair]:
    """All pairs of a cohort, inter-class first."""
    pairs = []
    for pair_id in range(spec.pair_count):
        label = PairClass.INTER if pair_id < spec.inter_count else PairClass.INTRA
        pairs.append(synth_pair(spec.master_seed, pair_id, spec.ell, label))
    return pairs


def run_pair(
    w: np.ndarray, wp: np.ndarray, n: int, k: int, t_max: int, seed: int
) -> Trajectory:
    """Encode ``w``, project ``wp`` through its key, and measure every step."""
    codewords, key = encode(w, n, k, t_max, seed)
    partners = project(key, wp)
    return measure_trajectory(codewords, partners, n)


def _trajectory_rows(pair_id: int, trajectory: Trajectory) -> List[TrajectoryRow]:
    return [
        TrajectoryRow(
            pair_id=pair_id,
            step=step + 1,
            angle_theta=float(trajectory.angle_theta[step]),
            hamming_k=float(trajectory.hamming_k[step]),
            hamming_n=float(trajectory.hamming_n[step]),
            euclid_sq=float(trajectory.euclid_sq[step]),
            euclid_sq_flipped=float(trajectory.euclid_sq_flipped[step]),
        )
        for step in range(trajectory.steps)
    ]


def summarize(spec: CohortSpec, trajectories: List[Trajectory]) -> CohortSummary:
    """Per-step convergence fractions; all zero for an empty cohort."""
    eps = spec.epsilon
    low, high = MIDDLE_BAND
    steps = []
    for step in range(spec.t_max):
        if trajectories:
            theta = np.array([tr.angle_theta[step] for tr in trajectories])
            euclid = np.array([tr.euclid_sq[step] for tr in trajectories])
            angle_ok = (theta < eps) | (theta > 1.0 - eps)
            distance_ok = np.minimum(euclid, EUCLID_SQ_MAX - euclid) < eps
            in_band = (theta >= low) & (theta <= high)
            fractions = (
                float(np.mean(angle_ok)),
                float(np.mean(distance_ok)),
                float(np.mean(angle_ok & distance_ok)),
                float(np.mean(in_band)),
            )
        else:
            fractions = (0.0, 0.0, 0.0, 0.0)
        steps.append(
            StepSummary(
                step=step + 1,
                angle_converged=fractions[0],
                distance_converged=fractions[1],
                converged=fractions[2],
                middle_band=fractions[3],
            )
        )
    return CohortSummary(
        pair_count=spec.pair_count,
        inter_count=spec.inter_count,
        intra_count=spec.pair_count - spec.inter_count,
        epsilon=eps,
        middle_band=list(MIDDLE_BAND),
        steps=steps,
    )


def run_cohort(spec: CohortSpec, threads: Optional[int] = None) -> CohortResult:
    """Run every pair of the cohort, in parallel, with ordered results."""
    if threads is not None and threads < 1:
        raise InputValidationError(f"threads must be at least 1, got {threads}")
    workers = threads or settings.resolved_threads()
    pairs = synth_pairs(spec)
    started = time.perf_counter()

    def _run(pair: FeaturePair) -> Trajectory:
        trajectory = run_pair(
            pair.w,
            pair.wp,
            spec.n,
            spec.k,
            spec.t_max,
            derive_seed(spec.master_seed, pair.pair_id),
        )
        distance = trajectory.entangled_distance()
        settled = np.flatnonzero(distance < spec.epsilon)
        if settled.size:
            first = int(settled[0])
            log_convergence(pair.pair_id, first + 1, float(distance[first]))
        return trajectory

    with ThreadPoolExecutor(max_workers=workers) as pool:
        trajectories = list(pool.map(_run, pairs))

    rows: List[TrajectoryRow] = []
    for pair, trajectory in zip(pairs, trajectories):
        rows.extend(_trajectory_rows(pair.pair_id, trajectory))
    summary = summarize(spec, trajectories)
    logger.info(
        "Cohort of %d pairs finished on %d workers in %.1f ms",
        spec.pair_count,
        workers,
        (time.perf_counter() - started) * 1000,
    )
    return CohortResult(rows=rows, summary=summary)


def export_3d(
    w: np.ndarray, wp: np.ndarray, n: int, t_max: int, seed: int
) -> List[Export3dRow]:
    """Per-step unit 3-vectors of an entangled pair with k = 3."""
    w = as_vector(w, "w")
    wp = as_vector(wp, "wp")
    require_nonzero(w, "w")
    require_nonzero(wp, "wp")
    codewords, key = encode(w, n, 3, t_max, seed)
    partners = project(key, wp)
    return [
        Export3dRow(c.step, *(float(x) for x in c.values), *(float(x) for x in cp.values))
        for c, cp in zip(codewords, partners)
    ]
