"""Closed-form bounds on hitting and survival probabilities.

The hitting probability of the half-line process satisfies ``x >= h(x)`` for a
cubic ``h``; both cubics below vanish at ``x = 1`` and the hitting probability
is at least the remaining positive root (capped at 1). Survival of a
stationary particle at the origin is then at most ``(1 - root)^2``.

    cubic_f(x, p) = (1-p)/2 (1+x) + p x^3 - x                   (discrete)
                  = (x - 1)(p x^2 + p x - (1-p)/2)
    cubic_g(x, p) = (1-p)/2 (1+x) + (1-p) p x (1-x)/4 + p x^3 - x  (continuous)
                  = (x - 1)(p x^2 + (3p + p^2)/4 x - (1-p)/2)

Root and bound formulas are rationalised so that square roots only ever
appear in sums of positive terms; values near the thresholds keep full
relative precision and vanish exactly at them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ParameterError

LOWER_CONT = (math.sqrt(89.0) - 9.0) / 2.0  # root of p^2 + 9p - 2
LOWER_DISC = 0.2


def cubic_f(x, p):
    """Expanded discrete cubic; exact for ``Fraction`` arguments."""
    return (1 - p) / 2 * (1 + x) + p * x**3 - x


def cubic_f_factored(x, p):
    return (x - 1) * (p * x**2 + p * x - (1 - p) / 2)


def cubic_g(x, p):
    """Expanded continuous cubic; exact for ``Fraction`` arguments."""
    return (1 - p) / 2 * (1 + x) + (1 - p) * p * x * (1 - x) / 4 + p * x**3 - x


def cubic_g_factored(x, p):
    return (x - 1) * (p * x**2 + (3 * p + p**2) / 4 * x - (1 - p) / 2)


def _check(p) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    return p


def q_hat_lower(p) -> float:
    """``min((-p + sqrt(2p - p^2)) / 2p, 1)``; 1 at ``p = 0`` by continuity."""
    p = _check(p)
    if p <= LOWER_DISC:
        return 1.0
    return min((1.0 - p) / (p + math.sqrt(2.0 * p - p * p)), 1.0)


def _disc_cont(p: float) -> float:
    return 32.0 * p - 23.0 * p**2 + 6.0 * p**3 + p**4


def q_lower(p) -> float:
    """``min((-3p - p^2 + sqrt(32p - 23p^2 + 6p^3 + p^4)) / 8p, 1)``."""
    p = _check(p)
    if p <= LOWER_CONT:
        return 1.0
    return min(4.0 * (1.0 - p) / (3.0 * p + p * p + math.sqrt(_disc_cont(p))), 1.0)


def psi_upper(p) -> float:
    """``(4p + 1 - 3 sqrt(2p - p^2)) / 2p`` above 1/5, else 0."""
    p = _check(p)
    if p <= LOWER_DISC:
        return 0.0
    s = math.sqrt(2.0 * p - p * p)
    return (5.0 * p - 1.0) ** 2 / (2.0 * p * (4.0 * p + 1.0 + 3.0 * s))


def theta_upper(p) -> float:
    """``(16 + 49p + 14p^2 + p^3 - (11 + p) sqrt(D)) / 32p`` above the
    continuous threshold, else 0."""
    p = _check(p)
    if p <= LOWER_CONT:
        return 0.0
    a = 16.0 + 49.0 * p + 14.0 * p**2 + p**3
    b = (11.0 + p) * math.sqrt(_disc_cont(p))
    return 2.0 * (p * p + 9.0 * p - 2.0) ** 2 / (p * (a + b))


@dataclass(frozen=True)
class BoundPoint:
    p: float
    psi_upper: float
    theta_upper: float
    q_hat_lower: float
    q_lower: float


def bound_point(p) -> BoundPoint:
    return BoundPoint(float(p), psi_upper(p), theta_upper(p), q_hat_lower(p), q_lower(p))


@dataclass(frozen=True)
class ReferenceConstants:
    """Proven brackets and conjectured values of the critical probabilities."""

    lower_cont: float = LOWER_CONT
    lower_disc: float = LOWER_DISC
    upper_cont: float = 0.32803
    upper_disc: float = 0.287
    conjectured_cont: float = 0.25
    conjectured_disc: float = 0.245


def thresholds() -> ReferenceConstants:
    return ReferenceConstants()
