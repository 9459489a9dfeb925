"""
Analytic Phase Reference Layer

Closed-form excitation energies, critical lines and phase classification for
the optomechanical, squeezed-drive and hybrid light-atom models. Every
numeric module is tested against these formulas.

Version: 1.0
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from modules.model_builder.model_builder import ModelParams
from validation import (
    QptConfig, InvalidParameterError, InvalidRegimeError, UnsupportedDirectionError,
)

logger = logging.getLogger(__name__)


class Phase(Enum):
    NORMAL = 'Normal'
    SUPERRADIANT = 'Superradiant'


@dataclass(frozen=True)
class PhasePoint:
    mu: float
    gamma: float
    alpha_A2: float
    phase: Phase
    epsilon_minus: Optional[float]  # None: imaginary, beyond validity


@dataclass(frozen=True)
class DressedCavity:
    """Cavity renormalised by the optomechanical squeezing r = -¼ ln(1 + αμ² - γ²)"""

    r: float
    omega_tilde_c: float
    lambda_tilde: float
    offset: float
    delta_tilde: float


###############################################################################
# OPTOMECHANICAL EXCITATIONS
###############################################################################

def epsilon_np(gamma: float) -> Optional[float]:
    """½√(1-γ²) below criticality, None beyond"""
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be non-negative, got {gamma}")
    radicand = 0.25 * (1.0 - gamma ** 2)
    if radicand < -QptConfig.BOUNDARY_TOL:
        return None
    return math.sqrt(max(radicand, 0.0))


def _direction_sign(theta: float) -> float:
    wrapped = math.remainder(theta, 2 * math.pi)
    if abs(wrapped) <= QptConfig.BOUNDARY_TOL:
        return -1.0
    if abs(abs(wrapped) - math.pi) <= QptConfig.BOUNDARY_TOL:
        return 1.0
    raise UnsupportedDirectionError(f"theta={theta} is not 0 or pi")


def epsilon_squeezed(gamma: float, xi: float, theta: float) -> Optional[float]:
    """½√(1 - γ² e^{∓2ξ}); θ=0 weakens the coupling, θ=π strengthens it"""
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be non-negative, got {gamma}")
    sign = _direction_sign(theta)
    radicand = 0.25 * (1.0 - gamma ** 2 * math.exp(2 * sign * xi))
    if radicand < -QptConfig.BOUNDARY_TOL:
        return None
    return math.sqrt(max(radicand, 0.0))


def epsilon_matched_drive(gamma: float) -> Optional[float]:
    """θ=0 drive with ξ = 2 ln γ: ½√(1 - γ⁻²), real only for γ ≥ 1"""
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    return epsilon_squeezed(gamma, 2 * math.log(gamma), 0.0) if gamma >= 1 else None


def critical_gamma_squeezed(xi: float, theta: float) -> float:
    return math.exp(-_direction_sign(theta) * xi)


###############################################################################
# HYBRID SPECTRA
###############################################################################

def critical_margin(mu: float, gamma: float, alpha_A2: float) -> float:
    """μ²(1-α) + γ² - 1; positive on the superradiant side"""
    return mu ** 2 * (1.0 - alpha_A2) + gamma ** 2 - 1.0


def dressed_cavity(params: ModelParams) -> DressedCavity:
    stiffness = 1.0 + params.alpha_A2 * params.mu ** 2 - params.gamma ** 2
    if stiffness <= 0:
        raise InvalidRegimeError(f"1 + αμ² - γ² = {stiffness:.3e} leaves no normal-phase cavity")
    r = -0.25 * math.log(stiffness)
    omega_tilde = params.omega_c * math.exp(-2 * r)
    lambda_tilde = params.lam * math.exp(r)
    offset = 0.5 * params.omega_c * (math.exp(-2 * r) - 1.0) + params.g ** 2 / params.omega_m
    delta_tilde = 2 * lambda_tilde / math.sqrt(params.omega_a * omega_tilde)
    return DressedCavity(r, omega_tilde, lambda_tilde, offset, delta_tilde)


def _branches(a: float, b: float, discriminant: float, product: float) -> Tuple[float, Optional[float]]:
    # ε∓² = ½(A + B ∓ √D); ε₋² = 2·product/(A + B + √D) avoids the cancellation
    root = math.sqrt(discriminant)
    plus = math.sqrt(0.5 * (a + b + root))
    minus_sq = 2.0 * product / (a + b + root)
    if minus_sq < -QptConfig.BOUNDARY_TOL * (a + b):
        return plus, None
    return plus, math.sqrt(max(minus_sq, 0.0))


def hybrid_spectrum_np(params: ModelParams) -> Tuple[float, Optional[float]]:
    """Normal-phase polariton energies ε±; ε₋ is None when imaginary"""
    dressed = dressed_cavity(params)
    wt, wa, lt = dressed.omega_tilde_c, params.omega_a, dressed.lambda_tilde
    a, b = wt ** 2, wa ** 2
    discriminant = (a - b) ** 2 + 16 * lt ** 2 * wt * wa
    margin = -critical_margin(params.mu, params.gamma, params.alpha_A2)
    if abs(margin) <= QptConfig.BOUNDARY_TOL:
        margin = 0.0
    # ω̃ω_a - 4λ̃² = e^{2r} ω_c ω_a (1 - γ² - μ²(1-α))
    product = wt * wa * math.exp(2 * dressed.r) * params.omega_c * wa * margin
    return _branches(a, b, discriminant, product)


def hybrid_spectrum_sp(delta_tilde: float, omega_tilde_c: float, omega_a: float) -> Tuple[float, float]:
    """Superradiant-phase polariton energies for δ̃ ≥ 1"""
    if delta_tilde < 1.0 - QptConfig.BOUNDARY_TOL:
        raise InvalidRegimeError(f"delta_tilde={delta_tilde} is below the superradiant threshold")
    d4 = max(delta_tilde, 1.0) ** 4
    a, b = omega_tilde_c ** 2, d4 * omega_a ** 2
    discriminant = (a - b) ** 2 + 4 * omega_tilde_c ** 2 * omega_a ** 2
    product = omega_tilde_c ** 2 * omega_a ** 2 * (d4 - 1.0)
    plus, minus = _branches(a, b, discriminant, product)
    return plus, minus if minus is not None else 0.0


def hybrid_spectrum_np_dressed(omega_tilde_c: float, omega_a: float,
                               lambda_tilde: float) -> Tuple[float, Optional[float]]:
    """Normal-phase branches directly in dressed variables (continuity checks at δ̃ = 1)"""
    a, b = omega_tilde_c ** 2, omega_a ** 2
    discriminant = (a - b) ** 2 + 16 * lambda_tilde ** 2 * omega_tilde_c * omega_a
    product = omega_tilde_c * omega_a * (omega_tilde_c * omega_a - 4 * lambda_tilde ** 2)
    return _branches(a, b, discriminant, product)


def critical_gamma(mu: float, alpha_A2: float) -> Optional[float]:
    """γ_c = √(1 - μ²(1-α)), None when the boundary is unreachable along γ"""
    if mu < 0 or alpha_A2 < 0:
        raise InvalidParameterError('mu and alpha_A2 must be non-negative')
    radicand = 1.0 - mu ** 2 * (1.0 - alpha_A2)
    if radicand < 0:
        return None
    return math.sqrt(radicand)


def classify_point(mu: float, gamma: float, alpha_A2: float) -> PhasePoint:
    margin = critical_margin(mu, gamma, alpha_A2)
    phase = Phase.SUPERRADIANT if margin > QptConfig.BOUNDARY_TOL else Phase.NORMAL
    try:
        params = ModelParams.from_dimensionless(gamma=gamma, mu=mu, alpha_A2=alpha_A2)
        _, eps_minus = hybrid_spectrum_np(params)
    except InvalidRegimeError:
        eps_minus = None
    return PhasePoint(mu, gamma, alpha_A2, phase, eps_minus)


def classify_phase_grid(mu_range: Tuple[float, float], gamma_range: Tuple[float, float],
                        steps: int, alpha_A2: float) -> List[PhasePoint]:
    """Resonant (ω_c = ω_a) phase diagram on a steps × steps grid, μ-major"""
    if steps < 2:
        raise InvalidParameterError('phase grid needs at least 2 steps per axis')
    if min(mu_range) < 0 or min(gamma_range) < 0:
        raise InvalidParameterError('phase grid ranges must be non-negative')
    mus = np.linspace(mu_range[0], mu_range[1], steps)
    gammas = np.linspace(gamma_range[0], gamma_range[1], steps)
    return [classify_point(float(m), float(g), alpha_A2) for m in mus for g in gammas]


def phase_grid_frame(points: List[PhasePoint]) -> pd.DataFrame:
    return pd.DataFrame({
        'mu': [p.mu for p in points],
        'gamma': [p.gamma for p in points],
        'phase': [p.phase.value for p in points],
        'epsilon_minus': [np.nan if p.epsilon_minus is None else p.epsilon_minus for p in points],
    })


###############################################################################
# ANHARMONIC WELL-DEFINEDNESS
###############################################################################

def anharmonic_energy(n: float, x: float) -> float:
    """Anharmonic cavity level n - x²n² as a function of x = 1/κ"""
    return n - x ** 2 * n ** 2


def anharmonic_curvature(n: float) -> float:
    """d²/dx² of n - x²n²; negative for n > 0, so levels have maxima only"""
    return -2.0 * n ** 2


def vacuum_intersection(n: int) -> float:
    """x at which level n meets the vacuum; tends to 0 as n grows"""
    if n < 1:
        raise InvalidParameterError('level index must be at least 1')
    return 1.0 / math.sqrt(n)


def anharmonic_ground_level(x: float, n_max: int) -> int:
    """Lowest level in the flipped frame over 0..n_max"""
    levels = np.arange(n_max + 1, dtype=float)
    return int(np.argmin(-(levels - x ** 2 * levels ** 2)))
