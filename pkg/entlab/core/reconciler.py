"""Information reconciliation over entangled codeword pairs.

The bit codec XORs the message with the sign pattern of a reduced
codeword (addition mod 2), so a receiver holding an entangled partner
recovers either the message or its complement. A zero pilot block tells
the two apart. The gray codec adds ``alpha * c`` to gray levels and the
receiver picks the orientation whose estimate stays inside [0, 1].
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from entlab.core.constants import (
    ADVERSARY_SALT,
    GRAY_CONVERGENCE_TOL,
    GRAY_MSE_TARGET,
    MIN_PILOT_LEN,
    NETPBM_MAX_MAXVAL,
    CipherMode,
)
from entlab.core.entangler import (
    EntangledStep,
    EntanglementKey,
    ReducedCodeword,
    encode,
    entangle_pair,
)
from entlab.core.errors import DimensionError, InputValidationError
from entlab.core.lshstats import hamming, sign_quantize
from entlab.core.rngcore import derive_stream

logger = logging.getLogger(__name__)

CodewordLike = Union[ReducedCodeword, np.ndarray]


def _values(c: CodewordLike) -> np.ndarray:
    if isinstance(c, ReducedCodeword):
        return c.values
    return np.asarray(c, dtype=np.float64)


def _check_shape(width: int, height: int, size: int) -> None:
    if width < 1 or height < 1:
        raise DimensionError(f"image dimensions must be positive, got {width}x{height}")
    if width * height != size:
        raise DimensionError(
            f"{width}x{height} image does not match a message of length {size}"
        )


@dataclass(frozen=True)
class BitMessage:
    """Row-major {0,1} message."""

    bits: np.ndarray
    width: int
    height: int

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if np.any(bits > 1):
            raise InputValidationError("bit messages hold only 0 and 1")
        _check_shape(self.width, self.height, bits.size)
        object.__setattr__(self, "bits", bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMessage):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and bool(
            np.array_equal(self.bits, other.bits)
        )

    @property
    def k(self) -> int:
        return int(self.bits.size)

    def complement(self) -> "BitMessage":
        return BitMessage(1 - self.bits, self.width, self.height)


@dataclass(frozen=True)
class GrayMessage:
    """Row-major gray levels in [0, 1].

    ``maxval`` is the sample depth of the file the levels were read from,
    if any; it does not take part in equality.
    """

    levels: np.ndarray
    width: int
    height: int
    maxval: Optional[int] = None

    def __post_init__(self) -> None:
        if self.maxval is not None and not 0 < self.maxval <= NETPBM_MAX_MAXVAL:
            raise InputValidationError(f"maxval must lie in [1, {NETPBM_MAX_MAXVAL}]")
        levels = np.asarray(self.levels, dtype=np.float64).reshape(-1)
        if np.any(levels < 0.0) or np.any(levels > 1.0) or not np.all(np.isfinite(levels)):
            raise InputValidationError("gray levels must lie in [0, 1]")
        _check_shape(self.width, self.height, levels.size)
        object.__setattr__(self, "levels", levels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayMessage):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and bool(
            np.array_equal(self.levels, other.levels)
        )

    @property
    def k(self) -> int:
        return int(self.levels.size)


Message = Union[BitMessage, GrayMessage]


@dataclass(frozen=True)
class CipherVector:
    """Transmitted vector y with the codec that produced it."""

    values: np.ndarray
    mode: CipherMode
    width: int
    height: int
    alpha: Optional[float] = None

    @property
    def k(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class GrayDecoding:
    """Gray estimate y - sigma alpha c' for the chosen orientation sigma."""

    levels: np.ndarray
    orientation: int
    out_of_range_mass: float
    width: int
    height: int

    @property
    def message(self) -> GrayMessage:
        """Estimate clamped to [0, 1] for export."""
        return GrayMessage(np.clip(self.levels, 0.0, 1.0), self.width, self.height)


def _check_length(size: int, c: np.ndarray) -> None:
    if size != c.size:
        raise DimensionError(f"length mismatch: message {size} vs codeword {c.size}")


def encode_bits(m: BitMessage, c: CodewordLike) -> CipherVector:
    """y = sgn(c) XOR m."""
    values = _values(c)
    _check_length(m.k, values)
    y = np.bitwise_xor(sign_quantize(values), m.bits)
    return CipherVector(values=y, mode=CipherMode.BIT, width=m.width, height=m.height)


def decode_bits(y: CipherVector, cp: CodewordLike) -> BitMessage:
    """m^ = y XOR sgn(c'); errors sit exactly where the sign patterns differ."""
    values = _values(cp)
    _check_length(y.k, values)
    bits = np.bitwise_xor(np.asarray(y.values, dtype=np.uint8), sign_quantize(values))
    return BitMessage(bits, y.width, y.height)


def frame_with_pilot(m: BitMessage, pilot_len: int) -> BitMessage:
    """Prepend ``pilot_len`` zero bits; the framed message is a single row."""
    if pilot_len < MIN_PILOT_LEN:
        raise InputValidationError(f"pilot_len must be at least {MIN_PILOT_LEN}")
    bits = np.concatenate([np.zeros(pilot_len, dtype=np.uint8), m.bits])
    return BitMessage(bits, bits.size, 1)


def disambiguate(m_hat: BitMessage, pilot_len: int) -> BitMessage:
    """Flip ``m_hat`` when most pilot bits read 1; a tie keeps it as is."""
    if pilot_len < MIN_PILOT_LEN:
        raise InputValidationError(f"pilot_len must be at least {MIN_PILOT_LEN}")
    if pilot_len >= m_hat.k:
        raise InputValidationError(
            f"pilot_len {pilot_len} leaves no payload in a message of length {m_hat.k}"
        )
    ones = int(np.count_nonzero(m_hat.bits[:pilot_len]))
    if 2 * ones > pilot_len:
        return m_hat.complement()
    return m_hat


def strip_pilot(m: BitMessage, pilot_len: int, width: int, height: int) -> BitMessage:
    """Payload view of a framed message."""
    return BitMessage(m.bits[pilot_len:], width, height)


def bit_error_rate(m_hat: BitMessage, m: BitMessage, complement_correct: bool = False) -> float:
    """Fraction of differing bits, optionally min(ber, 1 - ber)."""
    ber = hamming(m_hat.bits, m.bits) / m.k
    return min(ber, 1.0 - ber) if complement_correct else ber


def encode_gray(m: GrayMessage, c: CodewordLike, alpha: float) -> CipherVector:
    """y = alpha c + m (no clamping)."""
    if not alpha > 0.0:
        raise InputValidationError(f"alpha must be positive, got {alpha}")
    values = _values(c)
    _check_length(m.k, values)
    return CipherVector(
        values=alpha * values + m.levels,
        mode=CipherMode.GRAY,
        width=m.width,
        height=m.height,
        alpha=alpha,
    )


def out_of_range_mass(levels: np.ndarray) -> float:
    return float(np.sum(np.maximum(0.0, levels - 1.0) + np.maximum(0.0, -levels)))


def decode_gray(y: CipherVector, cp: CodewordLike, alpha: float) -> GrayDecoding:
    """Try both orientations and keep the one with less out-of-range mass.

    Ties go to orientation +1.
    """
    if not alpha > 0.0:
        raise InputValidationError(f"alpha must be positive, got {alpha}")
    values = _values(cp)
    _check_length(y.k, values)
    best: Optional[GrayDecoding] = None
    for sigma in (1, -1):
        levels = y.values - sigma * alpha * values
        mass = out_of_range_mass(levels)
        if best is None or mass < best.out_of_range_mass:
            best = GrayDecoding(levels, sigma, mass, y.width, y.height)
    assert best is not None
    return best


def gray_mse(decoding: GrayDecoding, m: GrayMessage) -> float:
    """Mean squared error of the unclamped estimate."""
    return float(np.mean((decoding.levels - m.levels) ** 2))


def adversary_attempt(
    y: CipherVector, n: int, k: int, t: int, fresh_seed: int, m: BitMessage
) -> float:
    """Decode ``y`` with a codeword grown from fresh randomness instead of the key.

    Returns the complement-corrected bit error rate against ``m``.
    """
    fresh_input = derive_stream(fresh_seed ^ ADVERSARY_SALT, 0).normals(k)
    codewords, _ = encode(fresh_input, n, k, t, fresh_seed)
    guess = decode_bits(y, codewords[-1])
    ber = bit_error_rate(guess, m, complement_correct=True)
    logger.debug("Adversary seed %d: corrected BER %.4f", fresh_seed, ber)
    return ber


def signs_settled(current: EntangledStep) -> bool:
    """True once the pair's sign patterns agree or disagree everywhere."""
    k = current.codeword.values.size
    distance = hamming(
        sign_quantize(current.codeword.values), sign_quantize(current.partner.values)
    )
    return distance in (0, k)


def distance_settled(current: EntangledStep, tol: float = GRAY_CONVERGENCE_TOL) -> bool:
    """True once min(|c - c'|^2, |c + c'|^2) falls below ``tol``."""
    return min(current.distances) < tol


@dataclass
class ReconcileOutcome:
    """Result of one sender/receiver reconciliation trial."""

    key: EntanglementKey
    cipher: CipherVector
    codeword: ReducedCodeword
    partner: ReducedCodeword
    t_used: int
    orientation: int
    ber: Optional[float] = None
    mse: Optional[float] = None
    decoded: Optional[Message] = None


def entangle_adaptive(
    w: np.ndarray,
    wp: np.ndarray,
    n: int,
    k: int,
    t_max: int,
    seed: int,
    mode: CipherMode,
    tol: float = GRAY_CONVERGENCE_TOL,
) -> Tuple[EntanglementKey, ReducedCodeword, ReducedCodeword]:
    """Entangle a pair until it settles (or ``t_max``); returns key and final pair."""
    stop: Callable[[EntangledStep], bool]
    if mode is CipherMode.BIT:
        stop = signs_settled
    else:
        stop = partial(distance_settled, tol=tol)
    selections = []
    last: Optional[EntangledStep] = None
    for last in entangle_pair(w, wp, n, k, t_max, seed, stop=stop):
        selections.append(last.selection)
    assert last is not None
    key = EntanglementKey(
        master_seed=seed,
        ell=int(np.asarray(w).size),
        n=n,
        k=k,
        selections=tuple(selections),
    )
    logger.info(
        "Pair settled after %d of at most %d steps (distance %.3g)",
        key.t,
        t_max,
        min(last.distances),
        extra={"step": key.t},
    )
    return key, last.codeword, last.partner


def reconcile_bits(
    m: BitMessage,
    w: np.ndarray,
    wp: np.ndarray,
    n: int,
    t_max: int,
    seed: int,
    pilot_len: int,
) -> ReconcileOutcome:
    """Send ``m`` framed with a pilot, receive with the entangled partner."""
    framed = frame_with_pilot(m, pilot_len)
    key, codeword, partner = entangle_adaptive(
        w, wp, n, framed.k, t_max, seed, CipherMode.BIT
    )
    cipher = encode_bits(framed, codeword)
    raw = decode_bits(cipher, partner)
    resolved = disambiguate(raw, pilot_len)
    payload = strip_pilot(resolved, pilot_len, m.width, m.height)
    return ReconcileOutcome(
        key=key,
        cipher=cipher,
        codeword=codeword,
        partner=partner,
        t_used=key.t,
        orientation=1 if resolved is raw else -1,
        ber=bit_error_rate(payload, m),
        decoded=payload,
    )


def reconcile_gray(
    m: GrayMessage,
    w: np.ndarray,
    wp: np.ndarray,
    n: int,
    t_max: int,
    seed: int,
    alpha: float,
    tol: float = GRAY_CONVERGENCE_TOL,
) -> ReconcileOutcome:
    """Send ``y = alpha c + m``, receive with the entangled partner."""
    key, codeword, partner = entangle_adaptive(
        w, wp, n, m.k, t_max, seed, CipherMode.GRAY, tol
    )
    cipher = encode_gray(m, codeword, alpha)
    decoding = decode_gray(cipher, partner, alpha)
    return ReconcileOutcome(
        key=key,
        cipher=cipher,
        codeword=codeword,
        partner=partner,
        t_used=key.t,
        orientation=decoding.orientation,
        mse=gray_mse(decoding, m),
        decoded=decoding.message,
    )


class SweepPoint(NamedTuple):
    alpha: float
    t_used: int
    mse: float
    orientation: int
    euclid_sq: float


def mse_stop_tolerance(alpha: float, k: int, mse_target: float) -> float:
    """Distance below which the decode error alpha^2 d / k meets ``mse_target``."""
    return mse_target * k / alpha**2


def reconcile_gray_sweep(
    m: GrayMessage,
    w: np.ndarray,
    wp: np.ndarray,
    n: int,
    t_max: int,
    seed: int,
    alphas: Sequence[float],
    mse_target: float = GRAY_MSE_TARGET,
) -> List[SweepPoint]:
    """Steps and decode error of the gray codec for each noise scale, on one pair.

    The pair is entangled once, until the largest ``alpha`` is served or
    ``t_max`` is reached. Each ``alpha`` stops at the first step whose
    distance is below ``mse_stop_tolerance``, so its row matches
    ``reconcile_gray`` run with that ``tol``. The tolerance shrinks as
    ``alpha`` grows, hence ``t_used`` never decreases with ``alpha``.
    """
    if not alphas:
        raise InputValidationError("alpha sweep needs at least one value")
    if any(not 0.0 < alpha < np.inf for alpha in alphas):
        raise InputValidationError(f"alphas must be positive, got {list(alphas)}")
    if not mse_target > 0.0:
        raise InputValidationError(f"mse_target must be positive, got {mse_target}")

    tightest = mse_stop_tolerance(max(alphas), m.k, mse_target)
    stop = partial(distance_settled, tol=tightest)
    steps = list(entangle_pair(w, wp, n, m.k, t_max, seed, stop=stop))
    distances = np.array([min(step.distances) for step in steps])
    points: List[SweepPoint] = []
    for alpha in alphas:
        tol = mse_stop_tolerance(alpha, m.k, mse_target)
        settled = np.flatnonzero(distances < tol)
        step = steps[int(settled[0]) if settled.size else len(steps) - 1]
        cipher = encode_gray(m, step.codeword, alpha)
        decoding = decode_gray(cipher, step.partner, alpha)
        points.append(
            SweepPoint(
                alpha=float(alpha),
                t_used=step.step,
                mse=gray_mse(decoding, m),
                orientation=decoding.orientation,
                euclid_sq=float(min(step.distances)),
            )
        )
        logger.debug("alpha=%g settled at step %d", alpha, step.step)
    logger.info(
        "Swept %d noise scales over %d steps (target mse %.3g)",
        len(points),
        len(steps),
        mse_target,
    )
    return points
