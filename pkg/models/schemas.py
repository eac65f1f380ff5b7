from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from typing import Optional

from lrs.primes import MAX_MODULUS, is_prime
from utils.errors import ConfigurationError

FORMAT_VERSION = "lrs-report v1"


class FieldParams(BaseModel):
    """Prime modulus p and vector dimension n.

    Standard mode enforces p >= 4n. ``relaxed=True`` lifts that bound for
    enumeration tests on tiny fields and is echoed in every artifact.
    """

    model_config = ConfigDict(frozen=True)

    p: int
    n: int
    relaxed: bool = False

    @field_validator("p")
    @classmethod
    def _check_prime(cls, p: int) -> int:
        if p < 3 or p >= MAX_MODULUS:
            raise ConfigurationError(f"modulus must satisfy 3 <= p < 2**64, got p={p}")
        if not is_prime(p):
            raise ConfigurationError(f"modulus p={p} is not prime")
        return p

    @field_validator("n")
    @classmethod
    def _check_dimension(cls, n: int) -> int:
        if n < 1:
            raise ConfigurationError(f"dimension must be >= 1, got n={n}")
        return n

    @model_validator(mode="after")
    def _check_regime(self) -> "FieldParams":
        if not self.relaxed and self.p < 4 * self.n:
            raise ConfigurationError(
                f"standard mode requires p >= 4n, got p={self.p} n={self.n} (use relaxed mode)"
            )
        return self

    @property
    def mode(self) -> str:
        return "relaxed" if self.relaxed else "standard"

    @property
    def coord_bits(self) -> int:
        return self.p.bit_length()


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int
    n: int
    seed: int = 0
    mode: str = "standard"
    trials: int = 1000
    restart_cap: int = 1000
    n_values: Optional[tuple[int, ...]] = None

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.mode not in ("standard", "relaxed"):
            raise ConfigurationError(f"mode must be standard or relaxed, got {self.mode!r}")
        if not 0 <= self.seed < (1 << 64):
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.restart_cap < 0:
            raise ConfigurationError(f"restart cap must be >= 0, got {self.restart_cap}")
        for n in self.dimensions():
            FieldParams(p=self.p, n=n, relaxed=self.relaxed)
        return self

    @property
    def relaxed(self) -> bool:
        return self.mode == "relaxed"

    def dimensions(self) -> tuple[int, ...]:
        return self.n_values if self.n_values else (self.n,)

    def params(self, n: Optional[int] = None) -> FieldParams:
        return FieldParams(p=self.p, n=self.n if n is None else n, relaxed=self.relaxed)

    def as_record(self) -> dict:
        record = {
            "config.p": self.p,
            "config.n": self.n,
            "config.seed": self.seed,
            "config.mode": self.mode,
            "config.trials": self.trials,
            "config.restart_cap": self.restart_cap,
        }
        if self.n_values:
            record["config.n_values"] = ",".join(str(n) for n in self.n_values)
        return record


class QueryRecord(BaseModel):
    index: int
    seq: int
    part: int
    descriptor: str
    width: int
    answer: Optional[str] = None
    refused: bool = False
    consumed: int


class RestartRateReport(BaseModel):
    p: int
    n: int
    attempts: int
    restarts: int
    rate: float
    ci_low: float
    ci_high: float
    bound: float
    passed: bool


class ScalingPoint(BaseModel):
    n: int
    trials: int
    mean_ops: float
    mean_attempts: float
    max_attempt_ops: int
    wall_time_s: Optional[float] = None


class ScalingReport(BaseModel):
    p: int
    points: list[ScalingPoint]
    slope: float
    intercept: float
    r2_linear: float
    r2_quadratic: float
    doubling_ratios: dict[str, float]
    per_attempt_bound_ok: bool


class Lemma2Report(BaseModel):
    p: int
    n: int
    L: tuple[int, ...]
    R: tuple[int, ...]
    raw_tuples: int
    accepted_tuples: int
    outcomes_refresh: int
    outcomes_reconstruct: int
    equal: bool
    first_discrepancy: Optional[str] = None


class MonteCarloLemma2Report(BaseModel):
    samples: int
    tv_full: float
    baseline_full: float
    marginal_tv: dict[str, float]
    marginal_baseline: dict[str, float]
    joint_tv: dict[str, float]
    joint_baseline: dict[str, float]
    passed: bool


class DistinguishingReport(BaseModel):
    samples: int
    lambda_bits: int
    lemma1_lambda: int
    estimate: float
    ci_low: float
    ci_high: float
