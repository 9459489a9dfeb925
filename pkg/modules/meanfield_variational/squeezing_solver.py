"""
Variational Squeezing Solver

Two-parameter squeezed-vacuum ansatz S_a(r)S_b(s)|0,0⟩ for the Z2
optomechanical model. The energy is a power series in w = γ²e^{2s}/(4η);
the stationarity conditions are iterated as a damped fixed point on
(e^{4r}, e^{4s}), with closed forms in the classical oscillator limit.

Version: 1.0
"""

import math
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from validation import (
    QptConfig, DivergenceSuspectedError, InvalidParameterError,
)

logger = logging.getLogger(__name__)

SeriesOrder = Union[int, str]

FINITE_ETA = 'finite_eta'
CLASSICAL_LIMIT = 'classical_limit'


@dataclass(frozen=True)
class SqueezingSolution:
    r: float
    s: float
    energy: float
    iterations: int
    residual: float
    series_order: SeriesOrder
    regime: str
    series_warning: bool = False


@dataclass(frozen=True)
class SeriesSums:
    """P, Q, R sums and the per-order terms they came from (index n = 0..n_max)"""

    w: float
    p_terms: np.ndarray
    q_terms: np.ndarray
    r_terms: np.ndarray

    @property
    def p(self) -> float:
        return float(self.p_terms.sum())

    @property
    def q(self) -> float:
        return float(self.q_terms.sum())

    @property
    def r(self) -> float:
        return float(self.r_terms.sum())


###############################################################################
# SERIES
###############################################################################

def _check_order(series_order: SeriesOrder) -> None:
    if series_order == 'full':
        return
    if isinstance(series_order, bool) or not isinstance(series_order, int) or series_order < 1:
        raise InvalidParameterError(
            f"series_order counts powers of gamma and must be an integer >= 1 or 'full', "
            f"got {series_order!r}")


def _keeps_q1(series_order: SeriesOrder) -> bool:
    return series_order == 'full' or series_order >= 4


def series_sums(gamma: float, eta: float, s: float, series_order: SeriesOrder) -> SeriesSums:
    """P_n = (1-2n)/8·wⁿ/n!, Q_n = (γ²/4)wⁿ/n!, R_n = n·wⁿ/n!.

    An integer order is the highest power of γ kept: P_n, R_n up to n = order/2
    and Q_n up to n = order/2 - 1. Every interaction term carries at least γ²,
    so order 1 keeps the leading term like order 2. 'full' sums to relative
    1e-16 or n = 40.
    """
    _check_order(series_order)
    if eta <= 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    w = gamma ** 2 * math.exp(2 * s) / (4 * eta)
    if not math.isfinite(w):
        raise DivergenceSuspectedError(f"series argument overflowed at s={s}")

    if series_order == 'full':
        n_max = QptConfig.FULL_SERIES_MAX_N
    else:
        n_max = max(1, series_order // 2)
    n = np.arange(n_max + 1)
    coefficients = np.concatenate(([1.0], np.cumprod(w / np.arange(1, n_max + 1))))

    if series_order == 'full':
        # drop the tail once it no longer moves the sums
        scale = np.cumsum(n * coefficients) + 1.0
        small = np.flatnonzero((n >= 1) & (n * coefficients < 1e-16 * scale))
        cut = int(small[0]) if small.size else n_max
        p_mask = (n >= 1) & (n <= cut)
        q_mask = n <= cut
    else:
        p_mask = (n >= 1) & (n <= n_max)
        q_mask = n <= n_max - 1

    p_terms = np.where(p_mask, (1 - 2 * n) / 8 * coefficients, 0.0)
    q_terms = np.where(q_mask, gamma ** 2 / 4 * coefficients, 0.0)
    r_terms = np.where(p_mask, n * coefficients, 0.0)
    return SeriesSums(w=w, p_terms=p_terms, q_terms=q_terms, r_terms=r_terms)


def variational_energy(r: float, s: float, gamma: float, eta: float,
                       series_order: SeriesOrder = QptConfig.DEFAULT_SERIES_ORDER) -> float:
    """Ẽ(r,s) = sinh²r + sinh²s/η + P(8sinh²r+4) + γ²/8 - Q e^{2r} - R sinh2r, in units of ω_c"""
    sums = series_sums(gamma, eta, s, series_order)
    if sums.w > 0.5:
        logger.warning(f"Series argument w={sums.w:.3f} exceeds 0.5; truncated energy is unreliable")
    sh2 = math.sinh(r) ** 2
    return (sh2 + math.sinh(s) ** 2 / eta + sums.p * (8 * sh2 + 4) + gamma ** 2 / 8
            - sums.q * math.exp(2 * r) - sums.r * math.sinh(2 * r))


###############################################################################
# FIXED-POINT EQUATIONS
###############################################################################

def _log_ratio(numerator: float, denominator: float, what: str) -> float:
    if denominator <= 0 or numerator <= 0 or not math.isfinite(numerator / denominator):
        raise DivergenceSuspectedError(
            f"{what} fixed point left its domain (numerator {numerator:.3e}, denominator {denominator:.3e})")
    return math.log(numerator / denominator)


def r_update(s: float, gamma: float, eta: float, series_order: SeriesOrder) -> float:
    """r from e^{4r} = (1 + 8P + 2R)/(1 + 8P - 4Q - 2R) at fixed s"""
    sums = series_sums(gamma, eta, s, series_order)
    p, q, rr = sums.p, sums.q, sums.r
    return 0.25 * _log_ratio(1 + 8 * p + 2 * rr, 1 + 8 * p - 4 * q - 2 * rr, 'r')


def _b_coefficient(r: float, gamma: float, keeps_q1: bool) -> float:
    value = math.sinh(r) ** 2 + 0.5 + math.sinh(2 * r)
    if keeps_q1:
        value += 0.25 * gamma ** 2 * math.exp(2 * r)
    return value


def s_update(r: float, s: float, gamma: float, eta: float, series_order: SeriesOrder) -> float:
    """s from e^{4s} = (1 + A₂)/(1 - γ²B(r)) with A₂ collecting the n ≥ 2 terms"""
    sums = series_sums(gamma, eta, s, series_order)
    n = np.arange(sums.p_terms.size)
    bracket = (sums.p_terms * (8 * math.sinh(r) ** 2 + 4) - sums.q_terms * math.exp(2 * r)
               - sums.r_terms * math.sinh(2 * r))
    higher = float(np.sum(np.where(n >= 2, 2 * n * bracket, 0.0)))
    a2 = -2 * eta * math.exp(2 * s) * higher
    b = _b_coefficient(r, gamma, _keeps_q1(series_order))
    return 0.25 * _log_ratio(1 + a2, 1 - gamma ** 2 * b, 's')


def _residual(r: float, s: float, gamma: float, eta: float, series_order: SeriesOrder) -> float:
    return max(abs(r_update(s, gamma, eta, series_order) - r),
               abs(s_update(r, s, gamma, eta, series_order) - s))


###############################################################################
# SOLVER
###############################################################################

def classical_limit(gamma: float, series_order: SeriesOrder = QptConfig.DEFAULT_SERIES_ORDER) -> Tuple[float, float]:
    """e^{4r} = 1/(1-γ²); e^{4s} = 1/(1-γ²B(r)); r does not depend on s"""
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be non-negative, got {gamma}")
    if gamma >= 1:
        raise DivergenceSuspectedError(f"cavity squeezing diverges at gamma={gamma} >= 1")
    r = 0.25 * _log_ratio(1.0, 1 - gamma ** 2, 'r')
    s = 0.25 * _log_ratio(1.0, 1 - gamma ** 2 * _b_coefficient(r, gamma, _keeps_q1(series_order)), 's')
    return r, s


def solve_squeezing(gamma: float, eta: float = math.inf,
                    series_order: SeriesOrder = QptConfig.DEFAULT_SERIES_ORDER,
                    regime: str = FINITE_ETA, r0: float = 0.0, s0: float = 0.0) -> SqueezingSolution:
    """Variational squeezing parameters (r, s).

    finite_eta iterates the coupled stationarity conditions with damping 0.5,
    halving the damping whenever the step grows; classical_limit uses the
    closed forms. Leaving the domain of either update, an s overflow or
    running out of iterations raises DivergenceSuspectedError.
    """
    _check_order(series_order)
    if regime not in QptConfig.ALLOWED_REGIMES:
        raise InvalidParameterError(f"Unknown regime {regime!r}")
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be non-negative, got {gamma}")

    if regime == CLASSICAL_LIMIT:
        r, s = classical_limit(gamma, series_order)
        energy = math.sinh(r) ** 2 + gamma ** 2 / 8 - gamma ** 2 / 4 * math.exp(2 * r)
        return SqueezingSolution(r, s, energy, 0, 0.0, series_order, regime)

    if not math.isfinite(eta) or eta <= 0:
        raise InvalidParameterError(f"finite_eta regime needs a finite positive eta, got {eta}")

    r, s = r0, s0
    damping = QptConfig.FIXED_POINT_DAMPING
    previous_step = math.inf
    for iteration in range(1, QptConfig.FIXED_POINT_MAX_ITER + 1):
        r_target = r_update(s, gamma, eta, series_order)
        s_target = s_update(r_target, s, gamma, eta, series_order)
        step = max(abs(r_target - r), abs(s_target - s))
        if step > previous_step and damping > 1.0 / 64:
            damping *= 0.5
            logger.debug(f"Fixed point step grew to {step:.3e}; damping now {damping}")
        previous_step = step
        r += damping * (r_target - r)
        s += damping * (s_target - s)
        if s > 50:
            raise DivergenceSuspectedError(f"mechanical squeezing s={s:.1f} is running away")
        if step < QptConfig.FIXED_POINT_TOL:
            residual = _residual(r, s, gamma, eta, series_order)
            sums = series_sums(gamma, eta, s, series_order)
            logger.debug(f"Fixed point converged after {iteration} iterations (residual {residual:.2e})")
            return SqueezingSolution(
                r=r, s=s, energy=variational_energy(r, s, gamma, eta, series_order),
                iterations=iteration, residual=residual, series_order=series_order,
                regime=regime, series_warning=sums.w > 0.5,
            )

    raise DivergenceSuspectedError(
        f"fixed point did not settle within {QptConfig.FIXED_POINT_MAX_ITER} iterations at gamma={gamma}")
