"""Iterative reduced-codeword encoding and projection.

``encode`` repeatedly projects a feature vector through a fresh Gaussian
matrix, keeps the k largest-magnitude coordinates and renormalizes; the
kept row indices form the entanglement key. ``project`` replays the same
reduced matrices on a second vector. Reduced matrices are never stored:
both sides rebuild them with ``gaussian_rows`` from the key.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from entlab.config import settings
from entlab.core.constants import MASK64
from entlab.core.errors import (
    DegenerateInputError,
    DimensionError,
    InputValidationError,
)
from entlab.core.lshstats import (
    angle_theta,
    as_vector,
    hamming,
    require_nonzero,
    sign_quantize,
)
from entlab.core.rngcore import gaussian_matvec, gaussian_rows
from entlab.core.services.logging_config import log_causality_warning

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedCodeword:
    """Unit-norm reduced codeword emitted at ``step`` (1-based)."""

    values: np.ndarray
    step: int

    def __neg__(self) -> "ReducedCodeword":
        return ReducedCodeword(values=-self.values, step=self.step)


@dataclass(frozen=True)
class EntanglementKey:
    """Seed, dimensions and per-step row selections.

    Together with the matrix derivation rule this reconstructs every
    reduced matrix; ``selections[i]`` belongs to encoding step ``i``.
    """

    master_seed: int
    ell: int
    n: int
    k: int
    selections: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= MASK64:
            raise InputValidationError("master seed must be a 64-bit unsigned integer")
        if self.ell < 1 or self.n < 1 or self.k < 1:
            raise InputValidationError("key dimensions must be positive")
        if self.k > self.n:
            raise InputValidationError("k must not exceed n")
        if not self.selections:
            raise InputValidationError("a key needs at least one step")
        for step, selection in enumerate(self.selections):
            if len(selection) != self.k:
                raise InputValidationError(
                    f"step {step} selects {len(selection)} rows, expected {self.k}"
                )
            if any(b <= a for a, b in zip(selection, selection[1:])):
                raise InputValidationError(f"step {step} selection is not ascending")
            if selection[0] < 0 or selection[-1] >= self.n:
                raise InputValidationError(f"step {step} selection out of range")

    @property
    def t(self) -> int:
        return len(self.selections)

    def input_dim(self, step: int) -> int:
        """Column count of the matrix used at ``step``."""
        return self.ell if step == 0 else self.k

    def truncate(self, t: int) -> "EntanglementKey":
        """Key for the first ``t`` steps."""
        if not 1 <= t <= self.t:
            raise InputValidationError(f"t must lie in [1, {self.t}], got {t}")
        return EntanglementKey(
            master_seed=self.master_seed,
            ell=self.ell,
            n=self.n,
            k=self.k,
            selections=self.selections[:t],
        )

    def reduced_matrix(self, step: int) -> np.ndarray:
        """Rebuild the reduced matrix of ``step`` (k x input_dim)."""
        return gaussian_rows(
            self.master_seed, step, self.selections[step], self.input_dim(step)
        )


@dataclass
class Trajectory:
    """Per-step distance measurements between two codeword sequences."""

    angle_theta: np.ndarray
    hamming_k: np.ndarray
    hamming_n: np.ndarray
    euclid_sq: np.ndarray
    euclid_sq_flipped: np.ndarray

    @property
    def steps(self) -> int:
        return int(self.angle_theta.size)

    def entangled_distance(self) -> np.ndarray:
        """min(|c - c'|^2, |c + c'|^2) per step."""
        return np.minimum(self.euclid_sq, self.euclid_sq_flipped)


@dataclass
class EntangledStep:
    """One synchronized step of an entangled pair."""

    step: int
    codeword: ReducedCodeword
    partner: ReducedCodeword
    selection: Tuple[int, ...]
    distances: Tuple[float, float] = (0.0, 0.0)


def check_dimensions(n: int, k: int) -> None:
    if n < 1 or k < 1:
        raise DimensionError(f"n and k must be positive, got n={n}, k={k}")
    if k > n:
        raise InputValidationError("k must not exceed n")
    if k / n > settings.causality_bound:
        log_causality_warning(n, k, settings.causality_bound)


def _normalize(raw: np.ndarray, step: int) -> np.ndarray:
    norm = np.linalg.norm(raw)
    if norm == 0.0:
        raise DegenerateInputError(f"reduced codeword collapsed to zero at step {step}")
    return raw / norm


def top_k_selection(c: np.ndarray, k: int) -> Tuple[int, ...]:
    """Indices of the k largest |c_i|, lower index first on ties, ascending."""
    order = np.argsort(-np.abs(c), kind="stable")
    return tuple(int(i) for i in np.sort(order[:k]))


def encode_step(
    w: np.ndarray, master_seed: int, step: int, n: int, k: int
) -> Tuple[ReducedCodeword, Tuple[int, ...]]:
    """One encoding iteration: project, keep the top-k rows, normalize."""
    w = as_vector(w, "w")
    require_nonzero(w, "w")
    if k > n:
        raise InputValidationError("k must not exceed n")
    c = gaussian_matvec(master_seed, step, n, w)
    selection = top_k_selection(c, k)
    reduced = gaussian_rows(master_seed, step, selection, w.size) @ w
    codeword = ReducedCodeword(values=_normalize(reduced, step), step=step + 1)
    return codeword, selection


def project_step(
    w: np.ndarray, master_seed: int, step: int, selection: Sequence[int]
) -> ReducedCodeword:
    """One projection iteration through a recorded reduced matrix."""
    reduced = gaussian_rows(master_seed, step, selection, w.size) @ w
    return ReducedCodeword(values=_normalize(reduced, step), step=step + 1)


def encode(
    w0: np.ndarray, n: int, k: int, t: int, master_seed: int
) -> Tuple[List[ReducedCodeword], EntanglementKey]:
    """Encode ``w0`` for ``t`` iterations; returns the codewords and the key."""
    w = as_vector(w0, "w0")
    require_nonzero(w, "w0")
    check_dimensions(n, k)
    if t < 1:
        raise InputValidationError(f"t must be at least 1, got {t}")

    codewords: List[ReducedCodeword] = []
    selections: List[Tuple[int, ...]] = []
    for step in range(t):
        codeword, selection = encode_step(w, master_seed, step, n, k)
        codewords.append(codeword)
        selections.append(selection)
        w = codeword.values
        logger.debug("Encoded step %d of %d", step + 1, t, extra={"step": step + 1})

    key = EntanglementKey(
        master_seed=master_seed,
        ell=int(np.asarray(w0).size),
        n=n,
        k=k,
        selections=tuple(selections),
    )
    return codewords, key


def project(key: EntanglementKey, w0p: np.ndarray) -> List[ReducedCodeword]:
    """Project a second vector through the key's reduced matrices."""
    w = as_vector(w0p, "w0p")
    if w.size != key.ell:
        raise DimensionError(f"key expects dimension {key.ell}, got {w.size}")
    require_nonzero(w, "w0p")

    projected: List[ReducedCodeword] = []
    for step, selection in enumerate(key.selections):
        codeword = project_step(w, key.master_seed, step, selection)
        projected.append(codeword)
        w = codeword.values
    return projected


def pair_distances(c: np.ndarray, cp: np.ndarray) -> Tuple[float, float]:
    """(|c - c'|^2, |c + c'|^2)."""
    return float(np.sum((c - cp) ** 2)), float(np.sum((c + cp) ** 2))


def entangle_pair(
    w0: np.ndarray,
    w0p: np.ndarray,
    n: int,
    k: int,
    t_max: int,
    master_seed: int,
    stop: Optional[Callable[[EntangledStep], bool]] = None,
) -> Iterator[EntangledStep]:
    """Run encoding and projection side by side, one step at a time.

    Both vectors go through the same reduced matrix at each step, so the
    partner sequence equals ``project(key, w0p)`` for the key the
    codeword sequence produces. Iteration ends after ``t_max`` steps or
    at the first step for which ``stop`` returns True.
    """
    w = as_vector(w0, "w0")
    wp = as_vector(w0p, "w0p")
    if w.size != wp.size:
        raise DimensionError(f"dimension mismatch: {w.size} vs {wp.size}")
    require_nonzero(w, "w0")
    require_nonzero(wp, "w0p")
    check_dimensions(n, k)
    if t_max < 1:
        raise InputValidationError(f"t_max must be at least 1, got {t_max}")

    for step in range(t_max):
        c = gaussian_matvec(master_seed, step, n, w)
        selection = top_k_selection(c, k)
        reduced_matrix = gaussian_rows(master_seed, step, selection, w.size)
        codeword = ReducedCodeword(_normalize(reduced_matrix @ w, step), step + 1)
        partner = ReducedCodeword(_normalize(reduced_matrix @ wp, step), step + 1)
        current = EntangledStep(
            step=step + 1,
            codeword=codeword,
            partner=partner,
            selection=selection,
            distances=pair_distances(codeword.values, partner.values),
        )
        yield current
        if stop is not None and stop(current):
            return
        w, wp = codeword.values, partner.values


def measure_trajectory(
    codewords: Sequence[ReducedCodeword],
    partners: Sequence[ReducedCodeword],
    n: int,
) -> Trajectory:
    """Build a Trajectory from two equally long codeword sequences."""
    if len(codewords) != len(partners):
        raise DimensionError(
            f"sequence lengths differ: {len(codewords)} vs {len(partners)}"
        )
    angles, ham_k, ham_n, euclid, flipped = [], [], [], [], []
    for c, cp in zip(codewords, partners):
        k = c.values.size
        distance = hamming(sign_quantize(c.values), sign_quantize(cp.values))
        minus, plus = pair_distances(c.values, cp.values)
        angles.append(angle_theta(c.values, cp.values))
        ham_k.append(distance / k)
        ham_n.append(distance / n)
        euclid.append(minus)
        flipped.append(plus)
    return Trajectory(
        angle_theta=np.array(angles),
        hamming_k=np.array(ham_k),
        hamming_n=np.array(ham_n),
        euclid_sq=np.array(euclid),
        euclid_sq_flipped=np.array(flipped),
    )
