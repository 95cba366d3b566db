"""Standard normal CDF, survival function and quantile function.

The quantile starts from Acklam's rational approximation (relative error
about 1e-9) and is polished with two Halley steps against the CDF, worked in
the lower tail so that extreme probabilities such as 1 - 5e-8 keep their
accuracy.
"""
import math

from .errors import DomainError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def phi_cdf(x: float) -> float:
    """Phi(x).  Saturates to exactly 0 or 1 far in the tails."""
    return 0.5 * math.erfc(-x / _SQRT2)


def phi_sf(x: float) -> float:
    """Upper tail 1 - Phi(x), accurate in relative terms for large x."""
    return 0.5 * math.erfc(x / _SQRT2)


def _acklam_lower(t: float) -> float:
    # t in (0, 0.5]; returns an approximate Phi^{-1}(t) <= 0.
    if t < _P_LOW:
        q = math.sqrt(-2.0 * math.log(t))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = t - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def _lower_quantile(t: float) -> float:
    x = _acklam_lower(t)
    for _ in range(2):
        err = phi_cdf(x) - t
        u = err * _SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def phi_inv(q: float) -> float:
    """Phi^{-1}(q) for q strictly inside (0, 1)."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q!r}")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return _lower_quantile(q)
    return -_lower_quantile(1.0 - q)


def phi_inv_upper(tail: float) -> float:
    """Phi^{-1}(1 - tail) without forming 1 - tail, for tiny tail masses."""
    tail = float(tail)
    if not 0.0 < tail < 1.0:
        raise DomainError(f"tail mass must lie in (0, 1), got {tail!r}")
    if tail == 0.5:
        return 0.0
    if tail < 0.5:
        return -_lower_quantile(tail)
    return _lower_quantile(1.0 - tail)
