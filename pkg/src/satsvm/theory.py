"""Executable checks of the loss's statistical properties.

Two facts about the saturating loss are exercised numerically rather
than symbolically. First, classification calibration: the minimizer of
the conditional risk

    r(f) = L(1 - f) * P + L(1 + f) * (1 - P),

where P is the conditional probability of the +1 class, shares the sign
of the Bayes rule sign(P - 1/2). The minimizer has no closed form, so
:func:`calibration_check` locates it on a dense grid, the systematic
version of arguing from the risk curve's plot. Second, a generalization
bound: with confidence 1 - eps the gap between expected and empirical
risk of the trained classifier is at most

    4 * lam / sqrt(n * C) + sqrt(8 * ln(1/eps) / n).

The capacity machinery behind that bound is not re-derived or estimated
here; only the final bound value is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .loss import LossKind, LossSpec, loss_value


@dataclass(frozen=True)
class ConditionalRiskQuery:
    """A loss, a class-+1 probability, and the f-grid to search."""

    loss: LossSpec
    P: float
    f_lo: float = -3.0
    f_hi: float = 3.0
    f_step: float = 1e-3

    def __post_init__(self):
        if not 0.0 <= self.P <= 1.0:
            raise ParameterError(f"P must lie in [0, 1], got {self.P}")
        if not self.f_lo < self.f_hi:
            raise ParameterError(f"grid needs f_lo < f_hi, got [{self.f_lo}, {self.f_hi}]")
        if not self.f_step > 0:
            raise ParameterError(f"grid step must be > 0, got {self.f_step}")

    def grid(self) -> np.ndarray:
        count = int(round((self.f_hi - self.f_lo) / self.f_step)) + 1
        return self.f_lo + self.f_step * np.arange(count)


@dataclass(frozen=True)
class CalibrationResult:
    f_star: float
    sign_matches_bayes: bool | None
    degenerate: bool


def conditional_risk(q: ConditionalRiskQuery, f):
    """r(f) = L(1-f)*P + L(1+f)*(1-P); accepts scalar or array f."""
    scalar = np.ndim(f) == 0
    f = np.atleast_1d(np.asarray(f, dtype=float))
    out = loss_value(q.loss, 1.0 - f) * q.P + loss_value(q.loss, 1.0 + f) * (1.0 - q.P)
    return float(out[0]) if scalar else out


def conditional_risk_branches(q: ConditionalRiskQuery, f):
    """Same risk via its three-branch regional form (saturating loss only).

    With g1 = L(1-f) and g2 = L(1+f) the risk is g1*P for f <= -1,
    (g1 - g2)*P + g2 on (-1, 1), and g2*(1-P) for f >= 1, because one of
    the two losses vanishes outside the unit interval. Kept alongside
    the generic form so tests can cross-check the two.
    """
    if q.loss.kind is not LossKind.EXPSAT:
        raise ParameterError("the branch decomposition is specific to the saturating loss")
    scalar = np.ndim(f) == 0
    f = np.atleast_1d(np.asarray(f, dtype=float))
    g1 = loss_value(q.loss, 1.0 - f)
    g2 = loss_value(q.loss, 1.0 + f)
    mid = (g1 - g2) * q.P + g2
    out = np.where(f <= -1.0, g1 * q.P, np.where(f >= 1.0, g2 * (1.0 - q.P), mid))
    return float(out[0]) if scalar else out


def calibration_check(q: ConditionalRiskQuery) -> CalibrationResult:
    """Grid-minimize the conditional risk and compare the minimizer's
    sign to the Bayes sign. Ties resolve toward smallest |f|; P = 1/2 is
    flagged degenerate and asserts nothing."""
    if q.P in (0.0, 1.0):
        raise ParameterError("calibration check needs 0 < P < 1")
    f = q.grid()
    risk = conditional_risk(q, f)
    minimum = risk.min()
    candidates = np.flatnonzero(risk == minimum)
    f_star = float(f[candidates[np.argmin(np.abs(f[candidates]))]])
    if q.P == 0.5:
        return CalibrationResult(f_star=f_star, sign_matches_bayes=None, degenerate=True)
    bayes = 1.0 if q.P > 0.5 else -1.0
    matches = (f_star > 0 and bayes > 0) or (f_star < 0 and bayes < 0)
    return CalibrationResult(f_star=f_star, sign_matches_bayes=matches, degenerate=False)


def generalization_bound(lam: float, n: int, C: float, epsilon: float) -> float:
    """4*lam/sqrt(n*C) + sqrt(8*ln(1/eps)/n), the confidence-(1-eps)
    bound on the expected-minus-empirical risk gap."""
    if not lam > 0:
        raise ParameterError(f"lam must be > 0, got {lam}")
    if not n > 0:
        raise ParameterError(f"n must be > 0, got {n}")
    if not C > 0:
        raise ParameterError(f"C must be > 0, got {C}")
    if not 0.0 < epsilon < 1.0:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    return 4.0 * lam / math.sqrt(n * C) + math.sqrt(8.0 * math.log(1.0 / epsilon) / n)
