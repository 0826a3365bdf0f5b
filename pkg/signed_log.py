"""
Signed log-domain summation.

Series terms in this project span hundreds of orders of magnitude and
alternate in sign, so sums are formed as sign * exp(log|x|) pairs.
"""

from typing import Iterable, Tuple

import numpy as np
from scipy.special import logsumexp

LOG_ZERO = float("-inf")


def signed_logsumexp(log_magnitudes: Iterable[float], signs: Iterable[int]) -> Tuple[float, int]:
    """Return (log|S|, sign(S)) for S = sum_i signs[i] * exp(log_magnitudes[i]).

    Entries with sign 0 are exact zeros and are skipped. An exactly
    cancelling sum comes back as (-inf, 0).
    """
    logs = np.fromiter(log_magnitudes, dtype=float)
    sg = np.fromiter(signs, dtype=int)
    keep = sg != 0
    if not np.any(keep):
        return LOG_ZERO, 0

    with np.errstate(divide="ignore", invalid="ignore"):
        log_magnitude, sign = logsumexp(logs[keep], b=sg[keep], return_sign=True)
    if sign == 0 or not log_magnitude > LOG_ZERO:
        return LOG_ZERO, 0
    return float(log_magnitude), int(sign)

