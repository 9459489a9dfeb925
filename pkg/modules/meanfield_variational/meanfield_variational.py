"""
Mean-Field Landscapes

Coherent-state energy landscapes of the U(1) optomechanical model, the
quartic-stabilised Z2 model and the hybrid light-atom model, their closed-form
stationary points, a Hessian classifier and a brute-force grid + Nelder-Mead
oracle used to check every closed form.

Version: 1.0
"""

import math
import logging
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from modules.bosonic_algebra.bosonic_algebra import FockSpaceLayout, displacement, squeeze
from modules.model_builder.model_builder import ModelParams
from validation import (
    QptConfig, InvalidGridError, InvalidParameterError, NumericFailureError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeanFieldPoint:
    alpha_mag: float
    alpha_phase: float
    beta: float
    energy: float
    classification: str
    degenerate_ring: bool = False
    hessian_eigenvalues: Tuple[float, ...] = ()


@dataclass(frozen=True)
class HybridMeanField:
    zeta: float
    beta_spin: float
    energy: float
    delta_tilde: float


@dataclass(frozen=True)
class CurvatureScan:
    """Ē_G(κ) and its second derivative with the jump across κ = 1"""

    frame: pd.DataFrame
    jump: float
    jump_location: float = 1.0


@dataclass(frozen=True)
class OracleResult:
    x: np.ndarray
    value: float
    grid_best: np.ndarray


###############################################################################
# GENERIC TOOLS
###############################################################################

def numeric_gradient(fn: Callable[[np.ndarray], float], point: Sequence[float],
                     step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient"""
    x = np.asarray(point, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        grad[i] = (fn(x + e) - fn(x - e)) / (2 * step)
    return grad


def numeric_hessian(fn: Callable[[np.ndarray], float], point: Sequence[float],
                    step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian with per-coordinate steps scaled by max(1, |x_i|)"""
    x = np.asarray(point, dtype=float)
    h = step * np.maximum(1.0, np.abs(x))
    n = x.size
    hess = np.zeros((n, n))
    f0 = fn(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        hess[i, i] = (fn(x + ei) - 2 * f0 + fn(x - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            value = (fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)) / (4 * h[i] * h[j])
            hess[i, j] = hess[j, i] = value
    return hess


def classify_stationary(fn: Callable[[np.ndarray], float], point: Sequence[float],
                        tol: float = 1e-6) -> Tuple[str, np.ndarray]:
    """minimum / saddle / maximum from Hessian signs; flat directions (Goldstone modes) are allowed"""
    eigenvalues = np.linalg.eigvalsh(numeric_hessian(fn, point))
    scale = tol * max(1.0, float(np.max(np.abs(eigenvalues))))
    positive = bool(np.any(eigenvalues > scale))
    negative = bool(np.any(eigenvalues < -scale))
    if positive and negative:
        return 'saddle', eigenvalues
    if negative:
        return 'maximum', eigenvalues
    return 'minimum', eigenvalues


def landscape_oracle(fn: Callable[[np.ndarray], float], bounds: Sequence[Tuple[float, float]],
                     steps: int = QptConfig.ORACLE_GRID, seed: int = 0,
                     restarts: int = 3) -> OracleResult:
    """Brute-force grid scan followed by Nelder-Mead polish from the best cell and seeded jitters"""
    if steps < 2:
        raise InvalidGridError('oracle grid needs at least 2 points per axis')
    axes = [np.linspace(lo, hi, steps) for lo, hi in bounds]
    widths = np.array([(hi - lo) / (steps - 1) for lo, hi in bounds])
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing='ij')], axis=1)
    values = np.array([fn(p) for p in mesh])
    best = mesh[int(np.argmin(values))]

    rng = np.random.default_rng(seed)
    starts = [best] + [best + widths * rng.uniform(-1, 1, size=best.size) for _ in range(restarts)]
    fatol = 1e-14 * max(1.0, abs(float(np.min(values))))
    options = {'xatol': 1e-12, 'fatol': fatol, 'maxiter': 20_000, 'maxfev': 40_000}
    polished = [optimize.minimize(fn, s, method='Nelder-Mead', options=options) for s in starts]
    winner = min(polished, key=lambda res: res.fun)
    return OracleResult(x=np.asarray(winner.x), value=float(winner.fun), grid_best=best)


###############################################################################
# U(1) OPTOMECHANICAL LANDSCAPE
###############################################################################

def mf_energy_hom(alpha: complex, beta: complex, kappa: float, eta: float) -> float:
    """|α|² + |β|²/η - (|α|² + |α|⁴)/κ², depends on |α| only"""
    a2 = abs(alpha) ** 2
    return a2 + abs(beta) ** 2 / eta - (a2 + a2 ** 2) / kappa ** 2


def mf_energy_hom_frame(alpha: complex, beta: complex, kappa: float, eta: float,
                        frame: str = 'printed') -> float:
    """Landscape in the printed frame or the flipped frame where the photonic part changes sign"""
    if frame == 'printed':
        return mf_energy_hom(alpha, beta, kappa, eta)
    if frame == 'flipped':
        return -mf_energy_hom(alpha, 0.0, kappa, eta) + abs(beta) ** 2 / eta
    raise InvalidParameterError(f"Unknown frame {frame!r}")


def mean_field_ground_energy(kappa: float) -> float:
    """Ē_G = 0 for κ ≤ 1, ¼(κ² + κ⁻² - 2) beyond"""
    if kappa <= 1.0:
        return 0.0
    return 0.25 * (kappa ** 2 + kappa ** -2 - 2.0)


def _hom_flipped(kappa: float, eta: float) -> Callable[[np.ndarray], float]:
    return lambda v: mf_energy_hom_frame(complex(v[0], v[1]), complex(v[2], v[3]), kappa, eta, 'flipped')


def mf_minimize_hom(kappa: float, eta: float) -> MeanFieldPoint:
    """Minimum of the flipped landscape; the ring of broken-U(1) minima is reported at θ = 0"""
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    alpha_mag = math.sqrt((kappa ** 2 - 1) / 2) if kappa > 1 else 0.0
    classification, eigenvalues = classify_stationary(_hom_flipped(kappa, eta), [alpha_mag, 0.0, 0.0, 0.0])
    return MeanFieldPoint(
        alpha_mag=alpha_mag,
        alpha_phase=0.0,
        beta=0.0,
        energy=mf_energy_hom(alpha_mag, 0.0, kappa, eta),
        classification=classification,
        degenerate_ring=kappa > 1,
        hessian_eigenvalues=tuple(float(e) for e in eigenvalues),
    )


def hom_landscape_frame(kappa: float, eta: float, frame: str, bounds: Tuple[float, float],
                        steps: int) -> pd.DataFrame:
    """Landscape over (Re α, Im α) at β = 0"""
    axis = np.linspace(bounds[0], bounds[1], steps)
    re, im = np.meshgrid(axis, axis, indexing='ij')
    energy = [mf_energy_hom_frame(complex(x, y), 0.0, kappa, eta, frame)
              for x, y in zip(re.ravel(), im.ravel())]
    return pd.DataFrame({'re_alpha': re.ravel(), 'im_alpha': im.ravel(), 'energy': energy})


def mf_second_derivative_scan(kappa_range: Sequence[float], steps: int) -> CurvatureScan:
    """Second differences of Ē_G; the jump at κ = 1 extrapolates each branch linearly to the edge"""
    lo, hi = float(kappa_range[0]), float(kappa_range[1])
    if not lo < 1.0 < hi:
        raise InvalidGridError(f"kappa range [{lo}, {hi}] must straddle 1")
    kappas = np.linspace(lo, hi, steps)
    h = kappas[1] - kappas[0]
    energy = np.array([mean_field_ground_energy(k) for k in kappas])
    second = np.full(steps, np.nan)
    second[1:-1] = (energy[2:] - 2 * energy[1:-1] + energy[:-2]) / h ** 2

    interior = np.arange(1, steps - 1)
    left = [i for i in interior if kappas[i + 1] <= 1.0]
    right = [i for i in interior if kappas[i - 1] >= 1.0]
    if len(left) < QptConfig.MIN_BRANCH_POINTS or len(right) < QptConfig.MIN_BRANCH_POINTS:
        raise InvalidGridError(
            f"need {QptConfig.MIN_BRANCH_POINTS} clean points per side of kappa=1, "
            f"got {len(left)} and {len(right)}")

    def edge_value(indices):
        i, j = indices
        slope = (second[j] - second[i]) / (kappas[j] - kappas[i])
        return second[i] + slope * (1.0 - kappas[i])

    jump = edge_value(right[:2]) - edge_value(left[-2:])
    frame = pd.DataFrame({'kappa': kappas, 'energy': energy, 'second_derivative': second})
    return CurvatureScan(frame=frame, jump=float(jump))


###############################################################################
# QUARTIC-STABILISED Z2 LANDSCAPE
###############################################################################

def quartic_constraint(params: ModelParams) -> float:
    """ε1 = ε2 = (4ω_m²/ω_c)(γ⁶ - γ²) that makes the superradiant closed form consistent"""
    gamma = params.gamma
    return 4 * params.omega_m ** 2 / params.omega_c * (gamma ** 6 - gamma ** 2)


def with_quartic_constraint(params: ModelParams) -> ModelParams:
    value = quartic_constraint(params)
    return replace(params, eps1=value, eps2=value)


def mf_energy_hop(alpha: float, beta: float, params: ModelParams) -> float:
    """Coherent-state energy of H_op for real amplitudes"""
    n = params.N_factor
    a2 = alpha ** 2
    return (n * params.omega_c * a2 + params.omega_m * beta ** 2 + 8 * params.g * a2 * beta
            + 2 * n * params.g * beta + params.eps1 * a2 ** 2 / n ** 2 + params.eps2 * beta ** 4 / n ** 2)


def _normal_branch_beta(params: ModelParams) -> float:
    n = params.N_factor
    start = -params.g * n / params.omega_m
    if params.eps2 == 0:
        return start

    def slope(b):
        return 2 * params.omega_m * b + 2 * n * params.g + 4 * params.eps2 * b ** 3 / n ** 2

    def curvature(b):
        return 2 * params.omega_m + 12 * params.eps2 * b ** 2 / n ** 2

    return float(optimize.newton(slope, start, fprime=curvature, tol=1e-14, maxiter=200))


def _hop_point(alpha: float, beta: float, params: ModelParams) -> MeanFieldPoint:
    def landscape(v):
        return mf_energy_hop(v[0], v[1], params)

    classification, eigenvalues = classify_stationary(landscape, [alpha, beta])
    return MeanFieldPoint(alpha_mag=abs(alpha), alpha_phase=0.0, beta=beta,
                          energy=mf_energy_hop(alpha, beta, params),
                          classification=classification,
                          hessian_eigenvalues=tuple(float(e) for e in eigenvalues))


def hop_stationary_point(params: ModelParams) -> MeanFieldPoint:
    """Exact α ≠ 0 stationary point of the H_op landscape for any ε1 > 0.

    In a = α²/N, b = β/N the α-equation gives b = -(ω_c + 2ε1 a/N²)/(8g); the
    remaining β-equation is solved for a by Newton iteration.
    """
    n, g = params.N_factor, params.g
    if params.eps1 <= 0 or g <= 0:
        raise InvalidParameterError('the broken-parity branch needs eps1 > 0 and g > 0')

    def b_of(a):
        return -(params.omega_c + 2 * params.eps1 * a / n ** 2) / (8 * g)

    def residual(a):
        b = b_of(a)
        return 2 * params.omega_m * b + 8 * g * a + 2 * g + 4 * params.eps2 * b ** 3

    def slope(a):
        b = b_of(a)
        db = -2 * params.eps1 / (8 * g * n ** 2)
        return (2 * params.omega_m + 12 * params.eps2 * b ** 2) * db + 8 * g

    start = max((params.gamma ** 2 - 1) / 4, 1e-3)
    try:
        a = float(optimize.newton(residual, start, fprime=slope, tol=1e-15, maxiter=200))
    except RuntimeError as e:
        raise NumericFailureError(f"Failed to locate the H_op stationary point: {e}") from e
    if a < 0:
        raise InvalidParameterError(f"stationary photon density {a:.3e} is negative; no broken-parity branch")
    return _hop_point(math.sqrt(n * a), n * b_of(a), params)


def mf_minimize_hop(params: ModelParams) -> MeanFieldPoint:
    """Closed-form H_op mean field: α² = (N/4)(γ² - 1), β = -Nω_c/(8g) above γ = 1.

    The closed form needs ε1 = ε2 = quartic_constraint(params); any other
    quartic coefficients go through the numeric stationary-point solver.
    Classification comes from the Hessian of the landscape.
    """
    n = params.N_factor
    if params.gamma <= 1.0 + QptConfig.BOUNDARY_TOL:
        return _hop_point(0.0, _normal_branch_beta(params), params)

    target = quartic_constraint(params)
    consistent = all(math.isclose(e, target, rel_tol=1e-6, abs_tol=1e-300)
                     for e in (params.eps1, params.eps2))
    if not consistent:
        logger.warning(f"eps1={params.eps1}, eps2={params.eps2} differ from {target:.6g}; "
                       f"using the numeric stationary point")
        return hop_stationary_point(params)
    alpha = math.sqrt(n / 4 * (params.gamma ** 2 - 1))
    beta = -n * params.omega_c / (8 * params.g)
    return _hop_point(alpha, beta, params)


###############################################################################
# HYBRID LIGHT-ATOM MEAN FIELD
###############################################################################

def hybrid_energy(zeta: float, beta: float, delta_tilde: float, omega_a: float = 1.0,
                  omega_tilde_c: float = 1.0, n_atoms: float = 1.0) -> float:
    """N_a[ω_a β² + ω̃ ζ² + 4λ̃ ζ β √(1-β²) - ω_a/2] with λ̃ = δ̃ √(ω_a ω̃)/2"""
    if abs(beta) > 1.0:
        return math.inf
    lambda_tilde = 0.5 * delta_tilde * math.sqrt(omega_a * omega_tilde_c)
    return n_atoms * (omega_a * beta ** 2 + omega_tilde_c * zeta ** 2
                      + 4 * lambda_tilde * zeta * beta * math.sqrt(1.0 - beta ** 2)
                      - 0.5 * omega_a)


def hybrid_meanfield(delta_tilde: float, omega_a: float = 1.0, omega_tilde_c: float = 1.0,
                     n_atoms: float = 1.0) -> HybridMeanField:
    """Order parameters β = √(½(1-δ̃⁻²)), ζ = -sign(β)√(ω_a/4ω̃)√(δ̃² - δ̃⁻²) above δ̃ = 1"""
    if not delta_tilde > 0:
        raise InvalidParameterError(f"delta_tilde must be positive, got {delta_tilde}")
    if delta_tilde <= 1.0:
        beta, zeta = 0.0, 0.0
    else:
        beta = math.sqrt(0.5 * (1.0 - delta_tilde ** -2))
        zeta = -math.sqrt(omega_a / (4 * omega_tilde_c)) * math.sqrt(delta_tilde ** 2 - delta_tilde ** -2)
    energy = hybrid_energy(zeta, beta, delta_tilde, omega_a, omega_tilde_c, n_atoms)
    return HybridMeanField(zeta=zeta, beta_spin=beta, energy=energy, delta_tilde=delta_tilde)


###############################################################################
# TRIAL STATES
###############################################################################

def trial_state(layout: FockSpaceLayout, r: float, s: float = 0.0,
                alpha: float = 0.0, beta: float = 0.0) -> np.ndarray:
    """D_a(α)S_a(r) ⊗ D_b(β)S_b(s) |0,0⟩ on the first one or two modes"""
    def mode_state(dim, squeezing, amplitude):
        op = displacement(dim, -amplitude).entries @ squeeze(dim, squeezing).entries
        return op[:, 0]

    state = mode_state(layout.mode_dims[0], r, alpha)
    if layout.n_modes >= 2:
        state = np.kron(state, mode_state(layout.mode_dims[1], s, beta))
    for d in layout.mode_dims[2:]:
        vac = np.zeros(d, dtype=complex)
        vac[0] = 1.0
        state = np.kron(state, vac)
    return state
