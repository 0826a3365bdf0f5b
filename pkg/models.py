import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from config import Config


class SignedLogValue(BaseModel):
    """A real number stored as sign * exp(log_magnitude)"""

    model_config = ConfigDict(frozen=True)

    log_magnitude: float = 0.0
    sign: int = 1

    @field_validator("sign")
    @classmethod
    def _check_sign(cls, value: int) -> int:
        if value not in (-1, 0, 1):
            raise ValueError("sign must be one of -1, 0, +1")
        return value

    @classmethod
    def zero(cls) -> "SignedLogValue":
        return cls(log_magnitude=float("-inf"), sign=0)

    @classmethod
    def one(cls) -> "SignedLogValue":
        return cls(log_magnitude=0.0, sign=1)

    @classmethod
    def from_float(cls, value: float) -> "SignedLogValue":
        if value == 0.0:
            return cls.zero()
        return cls(log_magnitude=math.log(abs(value)), sign=1 if value > 0 else -1)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(log_magnitude=self.log_magnitude + other.log_magnitude,
                              sign=self.sign * other.sign)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by an exact zero")
        if self.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(log_magnitude=self.log_magnitude - other.log_magnitude,
                              sign=self.sign * other.sign)

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(log_magnitude=self.log_magnitude, sign=-self.sign)

    def __add__(self, other: "SignedLogValue") -> "SignedLogValue":
        from signed_log import signed_logsumexp

        log_magnitude, sign = signed_logsumexp(
            [self.log_magnitude, other.log_magnitude], [self.sign, other.sign]
        )
        if sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(log_magnitude=log_magnitude, sign=sign)

    def __sub__(self, other: "SignedLogValue") -> "SignedLogValue":
        return self + (-other)

    def pow(self, exponent: float) -> "SignedLogValue":
        """Real power of a positive value"""
        if self.sign <= 0:
            raise ValueError("real powers are only taken of positive values")
        return SignedLogValue(log_magnitude=self.log_magnitude * exponent, sign=1)


class Partition(BaseModel):
    """Non-increasing tuple of positive integers"""

    model_config = ConfigDict(frozen=True)

    parts: Tuple[int, ...] = ()

    @field_validator("parts", mode="before")
    @classmethod
    def _coerce_parts(cls, value: Any) -> Tuple[int, ...]:
        return tuple(int(p) for p in value)

    @field_validator("parts")
    @classmethod
    def _check_parts(cls, parts: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(p < 1 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"partition parts must be non-increasing: {parts}")
        return parts

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, index: int) -> int:
        return self.parts[index]

    def __lt__(self, other: "Partition") -> bool:
        return self.parts < other.parts

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


class SpectralInput(BaseModel):
    """Eigenvalues standing for the matrix argument of a series"""

    model_config = ConfigDict(frozen=True)

    eigenvalues: Tuple[float, ...] = Field(..., min_length=1)

    @field_validator("eigenvalues", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Tuple[float, ...]:
        return tuple(float(v) for v in np.ravel(np.asarray(value, dtype=float)))

    @field_validator("eigenvalues")
    @classmethod
    def _finite(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not all(math.isfinite(v) for v in value):
            raise ValueError("eigenvalues must be finite")
        return value

    @property
    def m(self) -> int:
        return len(self.eigenvalues)

    @property
    def trace(self) -> float:
        return math.fsum(self.eigenvalues)

    def negated(self) -> "SpectralInput":
        return SpectralInput(eigenvalues=tuple(-v for v in self.eigenvalues))

    def scaled(self, alpha: float) -> "SpectralInput":
        return SpectralInput(eigenvalues=tuple(alpha * v for v in self.eigenvalues))

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.eigenvalues)


class TruncationPolicy(BaseModel):
    """How far a series is summed and when it is considered converged"""

    model_config = ConfigDict(frozen=True)

    max_degree: int = Field(default=Config.SERIES_MAX_DEGREE, ge=0)
    rel_tolerance: float = Field(default=Config.SERIES_REL_TOLERANCE, gt=0)
    consecutive_small_terms: int = Field(default=Config.SERIES_CONSECUTIVE_SMALL, ge=1)
    detect_termination: bool = True
    divergence_horizon: int = Field(default=Config.SERIES_DIVERGENCE_HORIZON, ge=0)

    @classmethod
    def from_config(cls, **overrides: Any) -> "TruncationPolicy":
        values = {k: v for k, v in overrides.items() if v is not None}
        return cls(**values)

    def with_max_degree(self, max_degree: int) -> "TruncationPolicy":
        return self.model_copy(update={"max_degree": max_degree})


class SeriesResult(BaseModel):
    """Value of a truncated or terminated series with its diagnostics"""

    model_config = ConfigDict(frozen=True)

    value: float
    log_value: SignedLogValue
    degree_used: int
    terminated_exactly: bool
    last_degree_contribution: float
    term_count: int
    converged: bool
    tail_estimate: float = 0.0

    def scaled(self, factor: SignedLogValue) -> "SeriesResult":
        """Multiply value and diagnostics by a constant factor"""
        magnitude = factor.to_float()
        log_value = self.log_value * factor
        return self.model_copy(update={
            "value": log_value.to_float(),
            "log_value": log_value,
            "last_degree_contribution": self.last_degree_contribution * magnitude,
            "tail_estimate": self.tail_estimate * abs(magnitude),
        })


class PearsonSeriesParams(BaseModel):
    """Parameters (a, c, b, d) of the Pearson VII series"""

    model_config = ConfigDict(frozen=True)

    a: float
    c: float
    b: float
    d: float


class VerificationReport(BaseModel):
    """Comparison of the two sides of an identity"""

    lhs: float
    rhs: float
    abs_diff: float
    rel_diff: float
    lhs_diagnostics: Optional[SeriesResult] = None
    rhs_diagnostics: Optional[SeriesResult] = None
    tail_estimate: float = 0.0
    standard_error: Optional[float] = None

    @classmethod
    def compare(cls, lhs: float, rhs: float, **extra: Any) -> "VerificationReport":
        abs_diff = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        rel_diff = abs_diff / scale if scale > 0 else 0.0
        return cls(lhs=lhs, rhs=rhs, abs_diff=abs_diff, rel_diff=rel_diff, **extra)

    def within(self, tolerance: float) -> bool:
        """Agreement up to a relative tolerance, ten times the reported tail,
        or (for Monte Carlo comparisons) three standard errors on top of the tail"""
        if self.rel_diff <= tolerance:
            return True
        allowance = 10.0 * self.tail_estimate
        if self.standard_error is not None:
            allowance += 3.0 * self.standard_error
        return self.abs_diff <= allowance


class MonteCarloEstimate(BaseModel):
    mean: float
    standard_error: float
    n_samples: int
    seed: int
    chunks: int
    retries: int = 0


class ArrayModel(BaseModel):
    """Base for records holding numpy matrices"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @staticmethod
    def _as_matrix(value: Any) -> np.ndarray:
        matrix = np.array(value, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        if matrix.ndim != 2:
            raise ValueError("expected a two-dimensional matrix")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("matrix entries must be finite")
        return matrix


class LandmarkSet(ArrayModel):
    """A figure: N landmarks in K dimensions"""

    points: np.ndarray

    @field_validator("points", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return cls._as_matrix(value)

    @model_validator(mode="after")
    def _check_counts(self) -> "LandmarkSet":
        if self.N - self.K - 1 < 1:
            raise ValueError(f"need N - K - 1 >= 1, got N={self.N}, K={self.K}")
        return self

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def K(self) -> int:
        return self.points.shape[1]

    @field_serializer("points")
    def _dump_points(self, points: np.ndarray) -> List[List[float]]:
        return points.tolist()


class ConfigurationModel(ArrayModel):
    """Pearson VII model (N, K, mu, Sigma, s, R) for configuration coordinates"""

    N: int
    K: int
    mu: np.ndarray
    Sigma: np.ndarray
    s: float
    R: float = Field(gt=0)

    @field_validator("mu", "Sigma", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return cls._as_matrix(value)

    @model_validator(mode="after")
    def _check_model(self) -> "ConfigurationModel":
        N, K = self.N, self.K
        if K < 1 or N - K - 1 < 1:
            raise ValueError(f"need K >= 1 and N - K - 1 >= 1, got N={N}, K={K}")
        if self.mu.shape != (N - 1, K):
            raise ValueError(f"mu must be {(N - 1, K)}, got {self.mu.shape}")
        if self.Sigma.shape != (N - 1, N - 1):
            raise ValueError(f"Sigma must be {(N - 1, N - 1)}, got {self.Sigma.shape}")
        if not np.allclose(self.Sigma, self.Sigma.T, rtol=1e-12, atol=1e-12):
            raise ValueError("Sigma must be symmetric")
        try:
            np.linalg.cholesky(self.Sigma)
        except np.linalg.LinAlgError as exc:
            raise ValueError("Sigma must be positive definite") from exc
        if not self.s > K * (N - 1) / 2.0:
            raise ValueError(f"need s > K(N-1)/2 = {K * (N - 1) / 2.0}, got s={self.s}")
        return self

    @property
    def b(self) -> float:
        return self.s - self.K * (self.N - 1) / 2.0

    def with_mu(self, mu: Any) -> "ConfigurationModel":
        return ConfigurationModel(N=self.N, K=self.K, mu=mu, Sigma=self.Sigma, s=self.s, R=self.R)

    @field_serializer("mu", "Sigma")
    def _dump_matrix(self, matrix: np.ndarray) -> List[List[float]]:
        return matrix.tolist()


class ConfigParams(BaseModel):
    """Assembled series parameters (A, a, c, b, d, X) of a configuration density"""

    model_config = ConfigDict(frozen=True)

    A: SignedLogValue
    a: float
    c: float
    b: float
    d: float
    x: SpectralInput

    def series_params(self) -> PearsonSeriesParams:
        return PearsonSeriesParams(a=self.a, c=self.c, b=self.b, d=self.d)


class Dataset(ArrayModel):
    """Configuration matrices sharing (N, K), each with an identity top block"""

    N: int
    K: int
    configurations: List[np.ndarray] = Field(default_factory=list)

    @field_validator("configurations", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> List[np.ndarray]:
        return [cls._as_matrix(u) for u in value]

    @model_validator(mode="after")
    def _check_members(self) -> "Dataset":
        identity = np.eye(self.K)
        for index, U in enumerate(self.configurations):
            if U.shape != (self.N - 1, self.K):
                raise ValueError(f"configuration {index} has shape {U.shape}, expected {(self.N - 1, self.K)}")
            if not np.allclose(U[: self.K], identity, atol=1e-9):
                raise ValueError(f"configuration {index} is not in canonical form")
        return self

    def __len__(self) -> int:
        return len(self.configurations)


class FitResult(ArrayModel):
    mu_hat: np.ndarray
    loglik: float
    iterations: int
    evaluations: int
    converged: bool
    optimizer_trace: List[Tuple[int, float]] = Field(default_factory=list)

    @field_serializer("mu_hat")
    def _dump_mu(self, matrix: np.ndarray) -> List[List[float]]:
        return matrix.tolist()


class DensityForm(str, Enum):
    SERIES = "series"
    POLYNOMIAL = "polynomial"


class VerifyKind(str, Enum):
    KUMMER = "kummer"
    PEARSON = "pearson"
    INTEGRAL = "integral"


class RunConfig(BaseModel):
    """Echo of a CLI invocation written into every output record"""

    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    input_paths: List[str] = Field(default_factory=list)
    output_path: Optional[str] = None
    seed: Optional[int] = None
    policy: Optional[TruncationPolicy] = None
    output_format: str = "json"
