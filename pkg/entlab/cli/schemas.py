"""Pydantic models for every JSON document the CLI reads or writes."""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from entlab.core.constants import MASK64, MIN_PILOT_LEN, NETPBM_MAX_MAXVAL, CipherMode
from entlab.core.labs import CohortSummary, StepSummary

__all__ = [
    "BoostedEvent",
    "CipherFile",
    "CohortSummary",
    "DecompositionReport",
    "ReconcileMetrics",
    "RelativityReport",
    "RunConfig",
    "StatsReport",
    "StepSummary",
    "SweepReport",
    "SweepRow",
]


class CipherFile(BaseModel):
    """Transmitted vector exchanged between ``reconcile encode`` and ``decode``."""

    mode: CipherMode = Field(description="Codec that produced the values")
    alpha: Optional[float] = Field(
        default=None, gt=0.0, description="Noise scale (gray mode only)"
    )
    width: int = Field(ge=1, description="Payload image width")
    height: int = Field(ge=1, description="Payload image height")
    pilot_len: Optional[int] = Field(
        default=None,
        ge=MIN_PILOT_LEN,
        description="Zero pilot bits prepended (bit mode only)",
    )
    maxval: Optional[int] = Field(
        default=None,
        ge=1,
        le=NETPBM_MAX_MAXVAL,
        description="Sample depth of the source graymap (gray mode only)",
    )
    values: List[float] = Field(description="Cipher vector y")

    @model_validator(mode="after")
    def _check_mode_fields(self) -> "CipherFile":
        if self.mode is CipherMode.GRAY:
            if self.alpha is None:
                raise ValueError("gray ciphers need alpha")
            expected = self.width * self.height
        else:
            if self.pilot_len is None:
                raise ValueError("bit ciphers need pilot_len")
            if any(v not in (0.0, 1.0) for v in self.values):
                raise ValueError("bit cipher values must be 0 or 1")
            expected = self.width * self.height + self.pilot_len
        if len(self.values) != expected:
            raise ValueError(
                f"cipher holds {len(self.values)} values, {expected} expected"
            )
        return self


class ReconcileMetrics(BaseModel):
    """Decode report; ``ber`` or ``mse`` is set when a reference image is given."""

    mode: CipherMode
    t_used: int = Field(description="Encoding iterations recorded in the key")
    orientation: Literal[1, -1] = Field(description="+1 message, -1 complement/negated")
    euclid_sq: Optional[float] = Field(
        default=None, description="|c - sigma c'|^2 at the final step"
    )
    ber: Optional[float] = Field(default=None, description="Bit error rate")
    mse: Optional[float] = Field(default=None, description="Mean squared error")
    adversary_ber: Optional[float] = Field(
        default=None, description="Complement-corrected BER of a keyless decode"
    )


class SweepRow(BaseModel):
    alpha: float
    t_used: int = Field(description="First step meeting the MSE target, or t_max")
    mse: float = Field(description="Gray decode error at t_used")
    orientation: Literal[1, -1]
    euclid_sq: float = Field(description="min(|c - c'|^2, |c + c'|^2) at t_used")


class SweepReport(BaseModel):
    """Iterations and decode error of the gray codec against the noise scale."""

    n: int
    k: int
    t_max: int
    seed: int
    mse_target: float
    rows: List[SweepRow]


class BoostedEvent(BaseModel):
    s: float
    x: float
    y: float


class RelativityReport(BaseModel):
    gamma: float
    v_limit: float
    v_boost: float
    event: BoostedEvent
    boosted: BoostedEvent
    interval: float
    boosted_interval: float
    interval_residual: float = Field(description="|interval - boosted interval|")
    interval_kind: str
    mixed_constant_interval: float = Field(
        description="Boosted interval with v_boost as the invariant speed (not invariant)"
    )
    ds: float
    dilated_ds: float
    dx: float
    contracted_dx: float
    dilation_contraction_product: float = Field(
        description="dilated_ds * contracted_dx, equal to ds * dx"
    )


class DecompositionReport(BaseModel):
    theta0: float
    samples: int
    seed: int
    empirical: float
    analytic: float
    kl: float
    entropy: float
    stderr: float


class StatsReport(BaseModel):
    n: int
    k: int
    theta: float
    pmf: float
    pmf_table: List[float]
    sequence_likelihood: float
    log2_sequence_likelihood: float
    mle: float
    min_nll: float
    decomposition: Optional[DecompositionReport] = None


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation."""

    command: str
    n: Optional[int] = Field(default=None, ge=1, description="Codeword length")
    k: Optional[int] = Field(default=None, ge=1, description="Reduced dimension")
    t: Optional[int] = Field(default=None, ge=1, description="Encoding iterations")
    seed: Optional[int] = Field(default=None, ge=0, le=MASK64, description="Master seed")
    alpha: Optional[float] = Field(default=None, gt=0.0, description="Gray noise scale")
    epsilon: Optional[float] = Field(
        default=None, gt=0.0, lt=0.5, description="Convergence threshold"
    )
    threads: Optional[int] = Field(default=None, ge=1, description="Cohort worker count")
    paths: Dict[str, str] = Field(default_factory=dict, description="Input/output files")

    @model_validator(mode="after")
    def _check_dimensions(self) -> "RunConfig":
        if self.n is not None and self.k is not None and self.k > self.n:
            raise ValueError("k must not exceed n")
        return self
