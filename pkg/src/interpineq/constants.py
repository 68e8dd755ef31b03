"""Explicit constants of the interpolation inequalities, evaluated in log space.

``C(p,q,n)**q = q/(q-p) + 2**(nq/p) + 2**(nq) Gamma(q+1) e**(a+q+1)`` with
``a = 1 / (2**(n/p') e)``; the Morrey constant replaces the last term by
``2**((n+1)q) Gamma(q+1) e**(b+q+1)`` with ``b = a / 2``.  The three addends
are combined by log-sum-exp before taking the q-th root, so q in the
thousands does not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LOG2 = math.log(2.0)
_EXP_LIMIT = math.log(1.7976931348623157e308)


@dataclass(frozen=True)
class ConstantReport:
    log_value: float
    terms: tuple[float, float, float]  # logs of the three addends before the q-th root

    @property
    def value(self) -> float:
        """``exp(log_value)``, or ``inf`` when that overflows a double."""
        if self.log_value > _EXP_LIMIT:
            return math.inf
        return math.exp(self.log_value)


def _check_triple(p: float, q: float, n: int) -> None:
    if not p >= 1:
        raise ValueError(f"need p >= 1, got p={p}")
    if not q > p or math.isinf(q):
        raise ValueError(f"need p < q < inf, got p={p}, q={q}")
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")


def conjugate_exponent(p: float) -> float:
    """Hölder conjugate ``p/(p-1)``; ``inf`` for ``p = 1``."""
    if not p >= 1:
        raise ValueError(f"need p >= 1, got {p}")
    if p == 1:
        return math.inf
    return p / (p - 1)


def _n_over_conjugate(p: float, n: int) -> float:
    # n/p' = n(1 - 1/p); equals 0 at p = 1 without a special case
    return n * (1.0 - 1.0 / p)


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def unit_ball_measure(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.exp(0.5 * n * math.log(math.pi) - log_gamma(0.5 * n + 1.0))


def jn_bound(cube_measure: float, lam: float, bmo: float, n: int) -> float:
    """John–Nirenberg tail bound ``e |Q| exp(-lam / (2**n e ||f||_BMO))``."""
    if not bmo > 0:
        raise ValueError(f"BMO norm must be positive, got {bmo}")
    return math.e * cube_measure * math.exp(-lam / (2.0**n * math.e * bmo))


def logsumexp(xs) -> float:
    xs = list(xs)
    top = max(xs)
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(math.exp(x - top) for x in xs))


def _embedding(p: float, q: float, n: int, morrey: bool) -> ConstantReport:
    _check_triple(p, q, n)
    extra = 1 if morrey else 0
    shift = math.exp(-_n_over_conjugate(p, n) * LOG2 - 1.0) / 2**extra
    terms = (
        math.log(q) - math.log(q - p),
        n * q / p * LOG2,
        (n + extra) * q * LOG2 + log_gamma(q + 1.0) + shift + q + 1.0,
    )
    return ConstantReport(logsumexp(terms) / q, terms)


def c_lebesgue(p: float, q: float, n: int) -> ConstantReport:
    """Constant in ``||f||_q <= C ||f||_p^(p/q) ||f||_BMO^(1-p/q)``."""
    return _embedding(p, q, n, morrey=False)


def c_morrey(p: float, q: float, n: int) -> ConstantReport:
    """Morrey-space analogue of :func:`c_lebesgue`."""
    return _embedding(p, q, n, morrey=True)


def c_weak(p: float, q: float) -> float:
    """``(q/(q-p))**(1/q)``, the weak-L^p / L^inf interpolation constant."""
    if not (p >= 1 and q > p):
        raise ValueError(f"need 1 <= p < q, got p={p}, q={q}")
    if math.isinf(q):
        return 1.0
    return math.exp((math.log(q) - math.log(q - p)) / q)


def growth_ratio(p: float, n: int, q: float, morrey: bool = False) -> float:
    """``C(p,q,n) / q`` computed as a difference of logs."""
    rep = _embedding(p, q, n, morrey)
    return math.exp(rep.log_value - math.log(q))
