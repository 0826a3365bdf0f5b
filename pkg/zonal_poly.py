"""
Zonal polynomials C_tau(X) in the monomial symmetric function basis.

Tables are built with the eigenfunction recurrence

    c[k, l] = sum_mu ((l_i + s) - (l_j - s)) c[k, mu] / (rho_k - rho_l)

over partitions mu obtained from l = (l_1, ..., l_m) by moving s boxes from
part j to an earlier part i, with rho_k = sum_i k_i (k_i - i). Only l
dominated by k carry nonzero coefficients. Rows are then rescaled so that
sum_k C_k(X) = (tr X)^t.

A table restricted to partitions of length <= m is exact for m x m
arguments: every partition entering the recurrence for l is no longer than l.
"""

import json
import logging
import math
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import field_serializer, field_validator

from config import Config
from errors import TableCeilingError
from models import ArrayModel, Partition, SpectralInput
from partition_core import partition_tuples

logger = logging.getLogger(__name__)

PartsTuple = Tuple[int, ...]


class ZonalTable(ArrayModel):
    """Coefficients of C_tau in the monomial basis m_lambda, for tau, lambda |- degree"""

    degree: int
    max_len: int
    partitions: List[PartsTuple]
    coefficients: np.ndarray

    @field_validator("coefficients", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return cls._as_matrix(value)

    @field_validator("partitions", mode="before")
    @classmethod
    def _coerce_parts(cls, value: Any) -> List[PartsTuple]:
        return [tuple(int(p) for p in parts) for parts in value]

    @field_serializer("coefficients")
    def _dump_coefficients(self, coefficients: np.ndarray) -> List[List[float]]:
        return coefficients.tolist()

    def index(self, parts: Sequence[int]) -> int:
        return self.partitions.index(tuple(parts))

    def coefficient(self, tau: Partition, lam: Partition) -> float:
        return float(self.coefficients[self.index(tau.parts), self.index(lam.parts)])

    def as_mapping(self) -> Dict[Tuple[PartsTuple, PartsTuple], float]:
        return {
            (tau, lam): float(self.coefficients[i, j])
            for i, tau in enumerate(self.partitions)
            for j, lam in enumerate(self.partitions)
            if self.coefficients[i, j] != 0.0
        }

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ZonalTable":
        return cls.model_validate(json.loads(text))


def _rho(parts: Sequence[int]) -> int:
    return sum(k * (k - i - 1) for i, k in enumerate(parts))


def _dominates(upper: Sequence[int], lower: Sequence[int]) -> bool:
    upper_sum = lower_sum = 0
    for i in range(max(len(upper), len(lower))):
        upper_sum += upper[i] if i < len(upper) else 0
        lower_sum += lower[i] if i < len(lower) else 0
        if upper_sum < lower_sum:
            return False
    return True


def _multinomial(t: int, parts: Sequence[int]) -> float:
    """Coefficient of m_lambda in (tr X)^t"""
    log_value = math.lgamma(t + 1) - math.fsum(math.lgamma(p + 1) for p in parts)
    return math.exp(log_value)


def _compute_table(t: int, max_len: int) -> ZonalTable:
    parts = partition_tuples(t, max_len)
    index = {p: i for i, p in enumerate(parts)}
    n = len(parts)
    raw = np.zeros((n, n))

    for ki, kappa in enumerate(parts):
        raw[ki, ki] = 1.0
        rho_kappa = _rho(kappa)
        for li in range(ki + 1, n):
            lam = parts[li]
            if not _dominates(kappa, lam):
                continue
            total = 0.0
            for j in range(1, len(lam)):
                for i in range(j):
                    for shift in range(1, lam[j] + 1):
                        mu = list(lam)
                        mu[i] += shift
                        mu[j] -= shift
                        mu_key = tuple(sorted((p for p in mu if p > 0), reverse=True))
                        c_mu = raw[ki, index[mu_key]]
                        if c_mu != 0.0:
                            total += (lam[i] - lam[j] + 2 * shift) * c_mu
            raw[ki, li] = total / (rho_kappa - _rho(lam))

    # sum_k alpha_k raw[k, l] must equal the multinomial coefficient of m_l in (tr X)^t
    alpha = np.zeros(n)
    for li, lam in enumerate(parts):
        alpha[li] = _multinomial(t, lam) - float(np.dot(alpha[:li], raw[:li, li]))

    return ZonalTable(degree=t, max_len=max_len, partitions=list(parts),
                      coefficients=alpha[:, None] * raw)


class ZonalTableCache:
    """Memoized zonal tables, optionally persisted as JSON files"""

    def __init__(self, cache_dir: Optional[str] = None, ceiling: Optional[int] = None):
        cache_dir = Config.ZONAL_CACHE_DIR if cache_dir is None else cache_dir
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.ceiling = Config.ZONAL_DEGREE_CEILING if ceiling is None else ceiling
        self._tables: Dict[Tuple[int, int], ZonalTable] = {}
        self._build_lock = threading.Lock()

    def _path(self, t: int, max_len: int) -> Path:
        return self.cache_dir / f"zonal_t{t}_m{max_len}.json"

    def _load(self, t: int, max_len: int) -> Optional[ZonalTable]:
        if self.cache_dir is None:
            return None
        path = self._path(t, max_len)
        if not path.exists():
            return None
        try:
            table = ZonalTable.from_json(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            logger.warning("Ignoring unreadable zonal table %s: %s", path, e)
            return None
        if table.degree != t or table.max_len != max_len:
            logger.warning("Ignoring mismatched zonal table %s", path)
            return None
        logger.debug("Loaded zonal table t=%d m=%d from %s", t, max_len, path)
        return table

    def _store(self, table: ZonalTable) -> None:
        if self.cache_dir is None:
            return
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            path = self._path(table.degree, table.max_len)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(table.to_json(), encoding="utf-8")
            tmp.replace(path)
        except OSError as e:
            logger.warning("Could not persist zonal table t=%d: %s", table.degree, e)

    def get(self, t: int, max_len: Optional[int] = None) -> ZonalTable:
        if t < 0:
            raise ValueError(f"degree must be non-negative, got {t}")
        if t > self.ceiling:
            raise TableCeilingError(f"degree {t} exceeds the zonal table ceiling {self.ceiling}")
        max_len = t if max_len is None else max_len
        key = (t, max(1, min(max_len, t)))

        table = self._tables.get(key)
        if table is not None:
            return table
        with self._build_lock:
            table = self._tables.get(key)
            if table is None:
                table = self._load(*key)
                if table is None:
                    logger.debug("Building zonal table t=%d m=%d", *key)
                    table = _compute_table(*key)
                    self._store(table)
                self._tables[key] = table
        return table

    def clear(self) -> None:
        with self._build_lock:
            self._tables.clear()


default_cache = ZonalTableCache()


def build_zonal_table(t: int, max_len: Optional[int] = None) -> ZonalTable:
    """Complete table for partitions of t (restricted to length <= max_len when given)"""
    return default_cache.get(t, max_len)


class MonomialEvaluator:
    """Evaluates monomial symmetric functions m_lambda at fixed eigenvalues.

    m_lambda(x_1..x_k) = m_lambda(x_1..x_{k-1}) + sum_e x_k^e m_{lambda - e}(x_1..x_{k-1}),
    e running over the distinct parts of lambda.

    Each eigenvalue may also be a numpy vector, one entry per point of a batch.
    """

    def __init__(self, x: Union[SpectralInput, Sequence[Any]]):
        values = x.eigenvalues if isinstance(x, SpectralInput) else x
        self.values = tuple(values)
        self.m = len(self.values)
        self.shape = np.shape(self.values[0])
        self._memo: Dict[Tuple[PartsTuple, int], Any] = {}

    def _eval(self, parts: PartsTuple, k: int) -> float:
        if not parts:
            return 1.0
        if len(parts) > k:
            return 0.0
        key = (parts, k)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        xk = self.values[k - 1]
        total = self._eval(parts, k - 1)
        if self.shape or xk != 0.0:
            seen = set()
            for pos, e in enumerate(parts):
                if e in seen:
                    continue
                seen.add(e)
                rest = parts[:pos] + parts[pos + 1:]
                # rebinding, not +=: memoized batch entries are arrays
                total = total + xk ** e * self._eval(rest, k - 1)
        self._memo[key] = total
        return total

    def monomial(self, parts: Sequence[int]) -> Any:
        return self._eval(tuple(parts), self.m)

    def zonal_values(self, t: int, cache: Optional[ZonalTableCache] = None) -> Tuple[List[PartsTuple], np.ndarray]:
        """C_tau(x) for every tau |- t with at most m parts (one row per tau)"""
        table = (cache or default_cache).get(t, self.m)
        monomials = np.array([np.broadcast_to(self.monomial(lam), self.shape) for lam in table.partitions])
        return table.partitions, np.tensordot(table.coefficients, monomials, axes=1)


def zonal_eval(tau: Partition, x: SpectralInput) -> float:
    """C_tau evaluated at the eigenvalues x"""
    if tau.length > x.m:
        return 0.0
    table = build_zonal_table(tau.weight, x.m)
    evaluator = MonomialEvaluator(x)
    row = table.coefficients[table.index(tau.parts)]
    monomials = np.array([evaluator.monomial(lam) for lam in table.partitions])
    return float(row @ monomials)
