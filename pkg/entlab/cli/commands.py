"""Subcommand handlers.

Each handler receives the parsed argparse namespace, computes everything
first and writes its outputs last, so a validation failure leaves no
partial files behind. Handlers return the process exit code.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from entlab.cli.schemas import (
    BoostedEvent,
    CipherFile,
    DecompositionReport,
    ReconcileMetrics,
    RelativityReport,
    StatsReport,
    SweepReport,
    SweepRow,
)
from entlab.config import settings
from entlab.core import relativity
from entlab.core.constants import (
    EXIT_OK,
    INPUT_SALT,
    SWEEP_HEADER,
    CipherMode,
    PairClass,
)
from entlab.core.entangler import EntanglementKey, encode, project
from entlab.core.errors import DimensionError, InputValidationError
from entlab.core.labs import CohortSpec, export_3d, import_features, run_cohort, synth_pair
from entlab.core.lshstats import (
    BinomialModel,
    bernoulli_seq_likelihood,
    binomial_pmf,
    binomial_pmf_table,
    log2_sequence_likelihood,
    min_nll,
    mle_theta,
    nll_decomposition_check,
)
from entlab.core.reconciler import (
    BitMessage,
    CipherVector,
    GrayMessage,
    Message,
    adversary_attempt,
    bit_error_rate,
    decode_bits,
    decode_gray,
    disambiguate,
    encode_bits,
    encode_gray,
    entangle_adaptive,
    frame_with_pilot,
    gray_mse,
    reconcile_gray_sweep,
    strip_pilot,
)
from entlab.core.rngcore import derive_stream
from entlab.formats.keyfile import load_key, save_key
from entlab.formats.netpbm import load_image, save_image
from entlab.formats.tables import (
    export_features,
    write_export3d_csv,
    write_rows_csv,
    write_summary_json,
    write_trajectory_csv,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Input helpers
# ============================================================================


def random_vector(seed: int, dim: int) -> np.ndarray:
    """Standard-normal input vector for ``--random`` runs."""
    if dim < 1:
        raise DimensionError(f"--dim must be positive, got {dim}")
    return derive_stream(seed ^ INPUT_SALT, 0).normals(dim)


def read_vector(path: str, row: int) -> np.ndarray:
    vectors = import_features(path)
    if not 0 <= row < len(vectors):
        raise InputValidationError(f"{path} has {len(vectors)} vectors, no row {row}")
    return vectors[row]


def read_pair(
    args: argparse.Namespace, seed: int, default_dim: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Sender and receiver vectors from ``--pair`` (rows 0 and 1) or a synthetic pair."""
    if args.pair:
        vectors = import_features(args.pair)
        if len(vectors) < 2:
            raise InputValidationError(f"{args.pair} needs two vectors, found {len(vectors)}")
        return vectors[0], vectors[1]
    dim = args.dim if args.dim is not None else default_dim
    if dim is None:
        raise InputValidationError("give --pair FILE or --dim for a synthetic pair")
    pair = synth_pair(seed, 0, dim, PairClass(args.pair_class))
    return pair.w, pair.wp


def _write_json(path: str, payload: str) -> None:
    Path(path).write_text(payload + "\n", encoding="utf-8")


# ============================================================================
# encode / project
# ============================================================================


def cmd_encode(args: argparse.Namespace) -> int:
    """Encode an input vector; write the key file and the codeword CSV."""
    if args.random:
        w = random_vector(args.seed, args.dim)
    elif args.input:
        w = read_vector(args.input, args.row)
    else:
        raise InputValidationError("give --input FILE or --random --dim D")

    codewords, key = encode(w, args.n, args.k, args.t, args.seed)

    size = save_key(key, args.key_out)
    export_features((c.values for c in codewords), args.codewords_out)
    logger.info(
        "Wrote key (%d bytes) to %s and %d codewords to %s",
        size,
        args.key_out,
        len(codewords),
        args.codewords_out,
    )
    return EXIT_OK


def cmd_project(args: argparse.Namespace) -> int:
    """Project a second vector through a stored key."""
    key = load_key(args.key)
    if args.random:
        seed = args.seed if args.seed is not None else key.master_seed
        w = random_vector(seed, key.ell)
    elif args.input:
        w = read_vector(args.input, args.row)
    else:
        raise InputValidationError("give --input FILE or --random")

    projected = project(key, w)
    sign = -1.0 if args.negate else 1.0
    export_features((sign * c.values for c in projected), args.codewords_out)
    logger.info("Wrote %d projected codewords to %s", len(projected), args.codewords_out)
    return EXIT_OK


# ============================================================================
# cohort / export3d
# ============================================================================


def cmd_cohort(args: argparse.Namespace) -> int:
    """Run a synthetic cohort; write the trajectory CSV and summary JSON."""
    spec = CohortSpec(
        pair_count=args.pairs,
        ell=args.ell,
        n=args.n,
        k=args.k,
        t_max=args.t,
        inter_fraction=args.inter_fraction,
        intra_fraction=1.0 - args.inter_fraction,
        master_seed=args.seed,
        epsilon=args.epsilon,
    )
    result = run_cohort(spec, threads=args.threads)

    write_trajectory_csv(args.trajectory_out, result.rows)
    write_summary_json(args.summary_out, result.summary)
    final = result.summary.steps[-1]
    logger.info(
        "Step %d: converged %.3f (angle %.3f, distance %.3f), middle band %.3f",
        final.step,
        final.converged,
        final.angle_converged,
        final.distance_converged,
        final.middle_band,
    )
    return EXIT_OK


def cmd_export3d(args: argparse.Namespace) -> int:
    """Write per-step k = 3 codewords of one pair for external plotting."""
    w, wp = read_pair(args, args.seed)
    rows = export_3d(w, wp, args.n, args.t, args.seed)
    write_export3d_csv(args.out, rows)
    logger.info("Wrote %d steps to %s", len(rows), args.out)
    return EXIT_OK


# ============================================================================
# reconcile
# ============================================================================


def _load_message(path: str, mode: CipherMode) -> Message:
    message = load_image(path)
    expected = BitMessage if mode is CipherMode.BIT else GrayMessage
    if not isinstance(message, expected):
        kind = "PBM" if mode is CipherMode.BIT else "PGM"
        raise InputValidationError(f"{mode.value} mode needs a {kind} image: {path}")
    return message


def _reconcile_encode(args: argparse.Namespace, mode: CipherMode) -> int:
    message = _load_message(args.image, mode)
    payload: Message = message
    if isinstance(message, BitMessage):
        payload = frame_with_pilot(message, args.pilot_len)
    k = payload.k
    n = args.n if args.n is not None else k + settings.reconcile_margin
    w, wp = read_pair(args, args.seed)

    key: EntanglementKey
    if args.t is not None:
        codewords, key = encode(w, n, k, args.t, args.seed)
        codeword = codewords[-1]
    else:
        key, codeword, _ = entangle_adaptive(w, wp, n, k, args.t_max, args.seed, mode)

    cipher: CipherVector
    if isinstance(payload, BitMessage):
        cipher = encode_bits(payload, codeword)
    else:
        cipher = encode_gray(payload, codeword, args.alpha)
    document = CipherFile(
        mode=mode,
        alpha=cipher.alpha,
        width=message.width,
        height=message.height,
        pilot_len=args.pilot_len if mode is CipherMode.BIT else None,
        maxval=message.maxval if isinstance(message, GrayMessage) else None,
        values=[float(v) for v in cipher.values],
    )

    save_key(key, args.key_out)
    _write_json(args.cipher_out, document.model_dump_json(indent=2))
    logger.info("Encoded %d values with t=%d, n=%d", k, key.t, n)
    return EXIT_OK


def _reconcile_decode(args: argparse.Namespace, mode: CipherMode) -> int:
    key = load_key(args.key)
    raw_document = Path(args.cipher).read_bytes()
    try:
        document = CipherFile.model_validate_json(raw_document.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise InputValidationError(f"cipher file is not valid UTF-8: {e.reason}") from e
    if document.mode is not mode:
        raise InputValidationError(
            f"cipher was made in {document.mode.value} mode, not {mode.value}"
        )
    if len(document.values) != key.k:
        raise DimensionError(
            f"key reduces to k={key.k} but the cipher holds {len(document.values)} values"
        )
    reference = _load_message(args.reference, mode) if args.reference else None
    w, wp = read_pair(args, key.master_seed, default_dim=key.ell)
    codeword = project(key, w)[-1].values
    partner = project(key, wp)[-1].values

    cipher = CipherVector(
        values=np.asarray(document.values),
        mode=mode,
        width=document.width if mode is CipherMode.GRAY else key.k,
        height=document.height if mode is CipherMode.GRAY else 1,
        alpha=document.alpha,
    )
    metrics = ReconcileMetrics(mode=mode, t_used=key.t, orientation=1)
    decoded: Message
    if mode is CipherMode.BIT:
        assert document.pilot_len is not None
        raw = decode_bits(cipher, partner)
        resolved = disambiguate(raw, document.pilot_len)
        decoded = strip_pilot(resolved, document.pilot_len, document.width, document.height)
        metrics.orientation = 1 if resolved is raw else -1
        if reference is not None:
            assert isinstance(reference, BitMessage)
            metrics.ber = bit_error_rate(decoded, reference)
            if args.adversary:
                framed = frame_with_pilot(reference, document.pilot_len)
                metrics.adversary_ber = adversary_attempt(
                    cipher, key.n, key.k, key.t, args.adversary_seed, framed
                )
    else:
        assert document.alpha is not None
        decoding = decode_gray(cipher, partner, document.alpha)
        decoded = decoding.message
        metrics.orientation = decoding.orientation
        if reference is not None:
            assert isinstance(reference, GrayMessage)
            metrics.mse = gray_mse(decoding, reference)
    if args.adversary and metrics.adversary_ber is None:
        raise InputValidationError("--adversary needs bit mode and --reference")
    metrics.euclid_sq = float(np.sum((codeword - metrics.orientation * partner) ** 2))

    save_image(decoded, args.image_out, plain=args.plain, maxval=document.maxval)
    _write_json(args.metrics_out, metrics.model_dump_json(indent=2, exclude_none=True))
    logger.info(
        "Decoded with orientation %+d after t=%d", metrics.orientation, metrics.t_used
    )
    return EXIT_OK


def parse_alphas(text: str) -> List[float]:
    """Parse a comma-separated list of noise scales."""
    try:
        alphas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise InputValidationError(f"alphas must be numbers, got {text!r}") from e
    if not alphas:
        raise InputValidationError("--alphas needs at least one value")
    return alphas


def _reconcile_sweep(args: argparse.Namespace, mode: CipherMode) -> int:
    if mode is not CipherMode.GRAY:
        raise InputValidationError("the alpha sweep needs --mode gray")
    alphas = parse_alphas(args.alphas)
    message = _load_message(args.image, mode)
    assert isinstance(message, GrayMessage)
    n = args.n if args.n is not None else message.k + settings.reconcile_margin
    w, wp = read_pair(args, args.seed)
    points = reconcile_gray_sweep(
        message, w, wp, n, args.t_max, args.seed, alphas, args.mse_target
    )

    report = SweepReport(
        n=n,
        k=message.k,
        t_max=args.t_max,
        seed=args.seed,
        mse_target=args.mse_target,
        rows=[SweepRow(**point._asdict()) for point in points],
    )

    write_rows_csv(args.sweep_out, SWEEP_HEADER, points)
    if args.sweep_json:
        write_summary_json(args.sweep_json, report)
    logger.info("Wrote %d sweep rows to %s", len(points), args.sweep_out)
    return EXIT_OK


def cmd_reconcile(args: argparse.Namespace) -> int:
    """Encode an image into a cipher, decode a cipher, or sweep the gray noise scale."""
    mode = CipherMode(args.mode)
    if args.action == "encode":
        return _reconcile_encode(args, mode)
    if args.action == "sweep":
        return _reconcile_sweep(args, mode)
    return _reconcile_decode(args, mode)


# ============================================================================
# relativity / stats
# ============================================================================


def parse_event(text: str) -> relativity.Event:
    """Parse ``s,x[,y]``."""
    try:
        values: List[float] = [float(part) for part in text.split(",")]
    except ValueError as e:
        raise InputValidationError(f"event must be s,x[,y] numbers, got {text!r}") from e
    if len(values) not in (2, 3):
        raise InputValidationError(f"event must be s,x[,y], got {text!r}")
    return relativity.Event(*values)


def _event_model(e: relativity.Event) -> BoostedEvent:
    return BoostedEvent(s=e.s, x=e.x, y=e.y)


def cmd_relativity(args: argparse.Namespace) -> int:
    """Print boost, interval and dilation/contraction checks as JSON."""
    params = relativity.BoostParams(v_limit=args.slimit, v_boost=args.v)
    event = parse_event(args.event)
    boosted = relativity.lorentz_boost(event, params)
    dilated = relativity.time_dilation(args.ds, params)
    contracted = relativity.length_contraction(args.dx, params)
    report = RelativityReport(
        gamma=relativity.gamma(params),
        v_limit=params.v_limit,
        v_boost=params.v_boost,
        event=_event_model(event),
        boosted=_event_model(boosted),
        interval=relativity.interval(event, params.v_limit),
        boosted_interval=relativity.interval(boosted, params.v_limit),
        interval_residual=relativity.check_interval_invariance(event, params),
        interval_kind=relativity.classify_interval(event, params.v_limit).value,
        mixed_constant_interval=relativity.mixed_constant_interval(event, params),
        ds=args.ds,
        dilated_ds=dilated,
        dx=args.dx,
        contracted_dx=contracted,
        dilation_contraction_product=dilated * contracted,
    )
    sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    """Print binomial likelihood quantities as JSON."""
    theta = args.theta if args.theta is not None else mle_theta(args.n, args.k)
    model = BinomialModel(args.n, theta)
    model.check_count(args.k)
    decomposition = None
    if args.theta0 is not None:
        check = nll_decomposition_check(args.n, args.theta0, theta, args.samples, args.seed)
        decomposition = DecompositionReport(
            theta0=args.theta0, samples=args.samples, seed=args.seed, **check._asdict()
        )
    report = StatsReport(
        n=args.n,
        k=args.k,
        theta=theta,
        pmf=binomial_pmf(model, args.k),
        pmf_table=[float(p) for p in binomial_pmf_table(model)],
        sequence_likelihood=bernoulli_seq_likelihood(model, args.k),
        log2_sequence_likelihood=log2_sequence_likelihood(model, args.k),
        mle=mle_theta(args.n, args.k),
        min_nll=min_nll(args.n, args.k),
        decomposition=decomposition,
    )
    sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    return EXIT_OK
