"""
Partitions, Pochhammer symbols and the multivariate gamma function.

Everything here is returned in signed log form so that products of many
rising factorials stay representable. Exact zeros are found structurally:
a rising factorial (b)_t vanishes exactly when b is a non-positive integer
with -b < t, and that test is done on integers, never on a rounded product.
"""

import math
from functools import lru_cache
from typing import Iterator, List, Tuple

from scipy.special import gammaln, gammasgn

from errors import PoleError
from models import Partition, SignedLogValue

LOG_PI = math.log(math.pi)


def _is_nonpositive_integer(value: float) -> bool:
    return float(value).is_integer() and value <= 0


def _partitions(t: int, max_part: int, max_len: int) -> Iterator[Tuple[int, ...]]:
    if t == 0:
        yield ()
        return
    if max_len == 0:
        return
    for first in range(min(t, max_part), 0, -1):
        for rest in _partitions(t - first, first, max_len - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def partition_tuples(t: int, max_len: int) -> Tuple[Tuple[int, ...], ...]:
    """Raw partitions of t with at most max_len parts, reverse-lexicographic"""
    if t < 0 or max_len < 1:
        raise ValueError(f"need t >= 0 and max_len >= 1, got t={t}, max_len={max_len}")
    return tuple(_partitions(t, t, max_len))


def enumerate_partitions(t: int, max_len: int) -> List[Partition]:
    """Every partition of t with length <= max_len, in reverse-lexicographic order"""
    return [Partition(parts=p) for p in partition_tuples(t, max_len)]


@lru_cache(maxsize=65536)
def pochhammer_log(b: float, t: int) -> Tuple[float, int]:
    """(log|(b)_t|, sign) of the rising factorial b(b+1)...(b+t-1)"""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0:
        return 0.0, 1
    if _is_nonpositive_integer(b) and -b < t:
        return float("-inf"), 0
    factors = [b + i for i in range(t)]
    negatives = sum(1 for f in factors if f < 0)
    log_magnitude = math.fsum(math.log(abs(f)) for f in factors)
    return log_magnitude, -1 if negatives % 2 else 1


def pochhammer(b: float, t: int) -> SignedLogValue:
    log_magnitude, sign = pochhammer_log(float(b), int(t))
    if sign == 0:
        return SignedLogValue.zero()
    return SignedLogValue(log_magnitude=log_magnitude, sign=sign)


@lru_cache(maxsize=65536)
def gen_pochhammer_log(beta: float, parts: Tuple[int, ...]) -> Tuple[float, int]:
    """(log|(beta)_tau|, sign) with (beta)_tau = prod_i (beta - (i-1)/2)_{t_i}"""
    log_magnitude = 0.0
    sign = 1
    for i, part in enumerate(parts):
        term_log, term_sign = pochhammer_log(beta - i / 2.0, part)
        if term_sign == 0:
            return float("-inf"), 0
        log_magnitude += term_log
        sign *= term_sign
    return log_magnitude, sign


def gen_pochhammer(beta: float, tau: Partition) -> SignedLogValue:
    log_magnitude, sign = gen_pochhammer_log(float(beta), tuple(tau.parts))
    if sign == 0:
        return SignedLogValue.zero()
    return SignedLogValue(log_magnitude=log_magnitude, sign=sign)


def mv_gamma_ln(m: int, a: float) -> SignedLogValue:
    """Multivariate gamma pi^{m(m-1)/4} prod_i Gamma(a - (i-1)/2) in signed log form"""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    log_magnitude = m * (m - 1) / 4.0 * LOG_PI
    sign = 1
    for i in range(m):
        arg = a - i / 2.0
        if _is_nonpositive_integer(arg):
            raise PoleError(f"Gamma_{m}({a}) has a pole: Gamma({arg})")
        log_magnitude += float(gammaln(arg))
        sign *= int(gammasgn(arg))
    return SignedLogValue(log_magnitude=log_magnitude, sign=sign)
