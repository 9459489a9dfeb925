"""
Optomechanical Model Builder

Assembles every Hamiltonian of the cavity-optomechanics / hybrid light-atom
study as a dense OperatorMatrix in units of the cavity frequency (ω_c = 1).
ModelParams keeps the physical values for reporting; the dimensionless groups
are derived properties.

Version: 1.0
"""

import math
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from modules.bosonic_algebra.bosonic_algebra import (
    FockSpaceLayout, OperatorMatrix, ladder, quadrature, embed_product,
    matrix_exp, quadrature_extent,
)
from validation import (
    QptConfig, InvalidParameterError, LayoutMismatchError,
)

logger = logging.getLogger(__name__)


###############################################################################
# MODEL PARAMETERS
###############################################################################

@dataclass(frozen=True)
class ModelParams:
    """Physical model parameters; energies share the unit of omega_c"""

    omega_c: float = 1.0
    omega_m: float = 1.0
    g: float = 0.0
    omega_a: float = 1.0
    lam: float = 0.0
    N_a: int = 1
    alpha_A2: float = 0.0
    xi: float = 0.0
    theta: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    N_factor: float = 1.0

    def __post_init__(self):
        checks = [
            (self.omega_c > 0, 'omega_c must be positive'),
            (self.omega_m > 0, 'omega_m must be positive'),
            (self.omega_a > 0, 'omega_a must be positive'),
            (self.g >= 0, 'g must be non-negative'),
            (self.lam >= 0, 'lambda must be non-negative'),
            (int(self.N_a) >= 1, 'N_a must be at least 1'),
            (self.alpha_A2 >= 0, 'alpha_A2 must be non-negative'),
            (self.xi >= 0, 'xi must be non-negative'),
            (self.N_factor >= 1, 'N_factor must be at least 1'),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidParameterError(message)
        values = [self.omega_c, self.omega_m, self.g, self.omega_a, self.lam,
                  self.alpha_A2, self.xi, self.theta, self.eps1, self.eps2, self.N_factor]
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameterError('model parameters must be finite')
        object.__setattr__(self, 'N_a', int(self.N_a))

    # Dimensionless groups
    @property
    def eta(self) -> float:
        return self.omega_c / self.omega_m

    @property
    def kappa(self) -> float:
        return math.inf if self.g == 0 else math.sqrt(self.omega_c * self.omega_m) / (2 * self.g)

    @property
    def gamma(self) -> float:
        return 2 * math.sqrt(2) * self.g / math.sqrt(self.omega_c * self.omega_m)

    @property
    def mu(self) -> float:
        return 2 * self.lam / math.sqrt(self.omega_a * self.omega_c)

    @property
    def chi(self) -> float:
        return self.alpha_A2 * self.lam ** 2 / self.omega_a

    @classmethod
    def from_dimensionless(cls, gamma: Optional[float] = None, kappa: Optional[float] = None,
                           eta: float = 1.0, mu: float = 0.0, omega_c: float = 1.0,
                           omega_a: Optional[float] = None, **kwargs) -> 'ModelParams':
        """Build params from (γ or κ, η, μ) at the given cavity frequency"""
        if gamma is not None and kappa is not None:
            raise InvalidParameterError('give gamma or kappa, not both')
        if eta <= 0:
            raise InvalidParameterError('eta must be positive')
        omega_m = omega_c / eta
        omega_a = omega_c if omega_a is None else omega_a
        scale = math.sqrt(omega_c * omega_m)
        if kappa is not None:
            if kappa <= 0:
                raise InvalidParameterError('kappa must be positive')
            g = scale / (2 * kappa)
        else:
            g = (gamma or 0.0) * scale / (2 * math.sqrt(2))
        lam = mu * math.sqrt(omega_a * omega_c) / 2
        return cls(omega_c=omega_c, omega_m=omega_m, g=g, omega_a=omega_a, lam=lam, **kwargs)

    def with_control(self, name: str, value: float) -> 'ModelParams':
        """Sweep semantics: γ, κ move g; μ moves λ; η moves ω_m at fixed γ; ξ is set directly"""
        scale = math.sqrt(self.omega_c * self.omega_m)
        if name == 'gamma':
            if value < 0:
                raise InvalidParameterError('gamma must be non-negative')
            return replace(self, g=value * scale / (2 * math.sqrt(2)))
        if name == 'kappa':
            if value <= 0:
                raise InvalidParameterError('kappa must be positive')
            return replace(self, g=scale / (2 * value))
        if name == 'mu':
            if value < 0:
                raise InvalidParameterError('mu must be non-negative')
            return replace(self, lam=value * math.sqrt(self.omega_a * self.omega_c) / 2)
        if name == 'xi':
            return replace(self, xi=value)
        if name == 'eta':
            if value <= 0:
                raise InvalidParameterError('eta must be positive')
            omega_m = self.omega_c / value
            g = self.gamma * math.sqrt(self.omega_c * omega_m) / (2 * math.sqrt(2))
            return replace(self, omega_m=omega_m, g=g)
        raise InvalidParameterError(f"Unknown control parameter {name!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'omega_c': self.omega_c, 'omega_m': self.omega_m, 'g': self.g,
            'omega_a': self.omega_a, 'lambda': self.lam, 'N_a': self.N_a,
            'alpha_A2': self.alpha_A2, 'xi': self.xi, 'theta': self.theta,
            'eps1': self.eps1, 'eps2': self.eps2, 'N_factor': self.N_factor,
        }

    def in_cavity_units(self) -> 'ModelParams':
        """Same model with every energy divided by omega_c; dimensionless groups unchanged"""
        unit = self.omega_c
        return replace(self, omega_c=1.0, omega_m=self.omega_m / unit, g=self.g / unit,
                       omega_a=self.omega_a / unit, lam=self.lam / unit,
                       eps1=self.eps1 / unit, eps2=self.eps2 / unit)

    def derived(self) -> Dict[str, float]:
        return {'eta': self.eta, 'kappa': self.kappa, 'gamma': self.gamma,
                'mu': self.mu, 'chi': self.chi}


class HamiltonianKind(Enum):
    FULL_H = 'FullH'
    APPROX_HOM = 'ApproxHom'
    EFFECTIVE_HOM_TILDE = 'EffectiveHomTilde'
    DISPLACED_HBAR = 'DisplacedHbar'
    QUADRATIC_LIMIT = 'QuadraticLimitHbarF'
    SQUEEZED_DRIVE = 'SqueezedDrive'
    SQUEEZED_QUADRATIC_LIMIT = 'SqueezedQuadraticLimit'
    QUARTIC_HOP = 'QuarticHop'
    HYBRID_FULL_SPIN = 'HybridFullSpin'
    HYBRID_HP = 'HybridHP'

    @classmethod
    def parse(cls, name: str) -> 'HamiltonianKind':
        for kind in cls:
            if kind.value == name or kind.name == name:
                return kind
        raise InvalidParameterError(f"Unknown model {name!r}")


SINGLE_MODE_KINDS = frozenset({
    HamiltonianKind.EFFECTIVE_HOM_TILDE,
    HamiltonianKind.QUADRATIC_LIMIT,
    HamiltonianKind.SQUEEZED_QUADRATIC_LIMIT,
})
HYBRID_KINDS = frozenset({HamiltonianKind.HYBRID_FULL_SPIN, HamiltonianKind.HYBRID_HP})
# Kinds carrying the bare g(a+a†)²(b+b†) coupling
WINDOW_KINDS = frozenset({
    HamiltonianKind.FULL_H, HamiltonianKind.SQUEEZED_DRIVE,
    HamiltonianKind.HYBRID_FULL_SPIN, HamiltonianKind.HYBRID_HP,
})


###############################################################################
# SHARED PIECES
###############################################################################

def _require_modes(layout: FockSpaceLayout, count: int, what: str) -> None:
    if layout.n_modes != count:
        raise LayoutMismatchError(f"{what} needs {count} modes, layout has {layout.n_modes}")


def _n(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def _x_squared(dim: int) -> np.ndarray:
    x = quadrature(dim)
    return x @ x


def _wrap(layout: FockSpaceLayout, entries: np.ndarray) -> OperatorMatrix:
    # Hermitian part only; drops rounding asymmetry
    return OperatorMatrix(layout, 0.5 * (entries + entries.conj().T), hermitian_hint=True)


def _optomech_core(params: ModelParams, layout: FockSpaceLayout) -> np.ndarray:
    """a†a + b†b/η + (g/ω_c)(a+a†)²(b+b†) on the first two modes"""
    dc, dm = layout.mode_dims[0], layout.mode_dims[1]
    g = params.g / params.omega_c
    return (embed_product(layout, {0: _n(dc)})
            + embed_product(layout, {1: _n(dm) / params.eta})
            + g * embed_product(layout, {0: _x_squared(dc), 1: quadrature(dm)}))


###############################################################################
# OPTOMECHANICAL HAMILTONIANS
###############################################################################

def build_full_h(params: ModelParams, layout: FockSpaceLayout) -> OperatorMatrix:
    """H = ω_c a†a + ω_m b†b + g(a+a†)²(b+b†)"""
    _require_modes(layout, 2, 'FullH')
    return _wrap(layout, _optomech_core(params, layout))


def build_approx_hom(params: ModelParams, layout: FockSpaceLayout) -> OperatorMatrix:
    """H_om = ω_c a†a + ω_m b†b + 2g a†a(b+b†)"""
    _require_modes(layout, 2, 'ApproxHom')
    dc, dm = layout.mode_dims
    g = params.g / params.omega_c
    h = (embed_product(layout, {0: _n(dc)})
         + embed_product(layout, {1: _n(dm) / params.eta})
         + 2 * g * embed_product(layout, {0: _n(dc), 1: quadrature(dm)}))
    return _wrap(layout, h)


def build_effective_hom_tilde(kappa: float, dim: int) -> OperatorMatrix:
    """Single-mode anharmonic spectrum n - n²/κ²"""
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    layout = FockSpaceLayout((dim,), ('cavity',))
    n = np.arange(dim, dtype=float)
    return _wrap(layout, np.diag(n - n ** 2 / kappa ** 2))


def build_diagonal_hom(params: ModelParams, layout: FockSpaceLayout) -> OperatorMatrix:
    """Polaron-frame H̄_om = n - n²/κ² + k/η, diagonal in the Fock basis"""
    _require_modes(layout, 2, 'diagonal H_om')
    dc, dm = layout.mode_dims
    n = np.arange(dc, dtype=float)
    k = np.arange(dm, dtype=float)
    inv_k2 = 4 * params.g ** 2 / (params.omega_c * params.omega_m)
    diag = (n - inv_k2 * n ** 2)[:, None] + (k / params.eta)[None, :]
    return _wrap(layout, np.diag(diag.reshape(-1)))


def build_displaced_hbar(params: ModelParams, layout: FockSpaceLayout) -> OperatorMatrix:
    """Mechanically displaced H̄ = U1† H U1 with U1 = exp[-(g/ω_m)(b†-b)]"""
    _require_modes(layout, 2, 'DisplacedHbar')
    dc, dm = layout.mode_dims
    g = params.g / params.omega_c
    g2_over_wm = params.g ** 2 / (params.omega_m * params.omega_c)
    h = (_optomech_core(params, layout)
         - g * embed_product(layout, {1: quadrature(dm)})
         - 2 * g2_over_wm * embed_product(layout, {0: _x_squared(dc)})
         + g2_over_wm * np.eye(layout.total_dim))
    return _wrap(layout, h)


def build_quadratic_limit(gamma: float, dim: int) -> OperatorMatrix:
    """Classical-limit cavity Hamiltonian a†a - (γ²/4)(a+a†)² + γ²/8"""
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be non-negative, got {gamma}")
    layout = FockSpaceLayout((dim,), ('cavity',))
    h = _n(dim) - (gamma ** 2 / 4) * _x_squared(dim) + (gamma ** 2 / 8) * np.eye(dim)
    return _wrap(layout, h)


def _squeezed_cavity(dim: int, xi: float, theta: float) -> Tuple[np.ndarray, np.ndarray]:
    """S_ζ† a†a S_ζ and the conjugated quadrature Y = u a + u* a†"""
    a = ladder(dim)
    ad = a.conj().T
    phase = np.exp(1j * theta)
    cavity = (0.5 * np.cosh(2 * xi) * (2 * _n(dim) + np.eye(dim))
              - 0.5 * np.sinh(2 * xi) * (phase * (ad @ ad) + np.conj(phase) * (a @ a))
              - 0.5 * np.eye(dim))
    u = np.cosh(xi) - np.sinh(xi) * np.conj(phase)
    y = u * a + np.conj(u) * ad
    return cavity, y


def _check_direction(theta: float) -> None:
    wrapped = math.remainder(theta, 2 * math.pi)
    if min(abs(wrapped), abs(abs(wrapped) - math.pi)) > 1e-12:
        logger.warning(f"Squeezing direction theta={theta} is outside the validated set {{0, pi}}")


def squeezed_coupling_factor(xi: float, theta: float) -> float:
    """|u| = |coshξ - sinhξ e^{-iθ}|; e^{-ξ} at θ=0, e^{ξ} at θ=π"""
    return float(abs(np.cosh(xi) - np.sinh(xi) * np.exp(-1j * theta)))


def effective_coupling(kind: HamiltonianKind, params: ModelParams) -> float:
    """Radiation-pressure coupling the cavity sees, in units of ω_c"""
    g = params.g / params.omega_c
    if kind == HamiltonianKind.SQUEEZED_DRIVE:
        return g * squeezed_coupling_factor(params.xi, params.theta)
    return g


def build_squeezed_drive(params: ModelParams, layout: FockSpaceLayout,
                         drive_scale: Optional[float] = None) -> OperatorMatrix:
    """Squeezed-drive Hamiltonian H(θ,ξ) on the unsqueezed cavity.

    In the squeezed frame the radiation pressure acts through Y = u a + u* a†,
    so with the mechanical displacement fixed by the cavity vacuum the cavity
    stiffness drops to 1 - γ²|u|². Rotating the cavity back leaves the
    optomechanical form with coupling g|u| plus the bare drive
    ξ(a†²e^{-iθ} + a²e^{iθ}), weighted by `drive_scale` (default 1/η, the drive
    amplitude on the mechanical scale). Its classical limit is the squeezed
    quadratic limit with gap 2ε_ξ.
    """
    _require_modes(layout, 2, 'SqueezedDrive')
    _check_direction(params.theta)
    dc = layout.mode_dims[0]
    xi, theta = params.xi, params.theta
    weight = 1.0 / params.eta if drive_scale is None else drive_scale

    scaled = replace(params, g=params.g * squeezed_coupling_factor(xi, theta))
    h = _optomech_core(scaled, layout)
    if xi != 0.0 and weight != 0.0:
        a = ladder(dc)
        ad = a.conj().T
        drive = np.exp(-1j * theta) * (ad @ ad) + np.exp(1j * theta) * (a @ a)
        h = h + weight * xi * embed_product(layout, {0: drive})
    return _wrap(layout, h)


def build_squeezed_quadratic_limit(gamma: float, xi: float, theta: float, dim: int) -> OperatorMatrix:
    """Classical limit of the squeezed-drive model; gap 2ε_ξ with ε_ξ = ½√(1 - γ²|u|²)"""
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be non-negative, got {gamma}")
    _check_direction(theta)
    layout = FockSpaceLayout((dim,), ('cavity',))
    cavity, y = _squeezed_cavity(dim, xi, theta)
    u2 = squeezed_coupling_factor(xi, theta) ** 2
    h = cavity - (gamma ** 2 / 4) * u2 * (y @ y) + (gamma ** 2 / 8) * u2 ** 2 * np.eye(dim)
    return _wrap(layout, h)


def build_quartic_hop(params: ModelParams, layout: FockSpaceLayout) -> OperatorMatrix:
    """Quartic-stabilised H_op with macroscopic factor N"""
    _require_modes(layout, 2, 'QuarticHop')
    dc, dm = layout.mode_dims
    big_n = params.N_factor
    g = params.g / params.omega_c
    a = ladder(dc)
    b = ladder(dm)
    ad, bd = a.conj().T, b.conj().T
    pair = a @ a + ad @ ad + 2 * _n(dc)
    h = (big_n * embed_product(layout, {0: _n(dc)})
         + embed_product(layout, {1: _n(dm) / params.eta})
         + g * embed_product(layout, {0: pair, 1: quadrature(dm)})
         + big_n * g * embed_product(layout, {1: quadrature(dm)})
         + (params.eps1 / params.omega_c / big_n ** 2) * embed_product(layout, {0: ad @ ad @ a @ a})
         + (params.eps2 / params.omega_c / big_n ** 2) * embed_product(layout, {1: bd @ bd @ b @ b}))
    return _wrap(layout, h)


###############################################################################
# HYBRID LIGHT-ATOM-MECHANICS
###############################################################################

def spin_operators(n_atoms: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """J_z, J₊, J₋ for spin N_a/2 in the m-ascending basis (index k ↔ m = k - N_a/2)"""
    j = n_atoms / 2
    m = np.arange(n_atoms + 1, dtype=float) - j
    jz = np.diag(m).astype(complex)
    jp = np.diag(np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)), k=-1).astype(complex)
    return jz, jp, jp.conj().T


def holstein_primakoff_operators(n_atoms: int, dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """J_z = c†c - N_a/2, J₊ = c†√(N_a - c†c) with the root clamped at 0"""
    c = ladder(dim)
    occupation = np.arange(dim, dtype=float)
    root = np.diag(np.sqrt(np.clip(n_atoms - occupation, 0.0, None)))
    jz = np.diag(occupation - n_atoms / 2).astype(complex)
    jp = c.conj().T @ root
    return jz, jp, jp.conj().T


def hybrid_validity(params: ModelParams, layout: FockSpaceLayout) -> Dict[str, Any]:
    """HP validity flags - O(1) complexity"""
    warnings = []
    dim_hp = layout.mode_dims[2] if layout.n_modes == 3 else 0
    if dim_hp > params.N_a + 1:
        warnings.append(f'HP dim {dim_hp} exceeds the physical spin dimension {params.N_a + 1}')
    if params.N_a < 2 * max(dim_hp, 1):
        warnings.append(f'N_a={params.N_a} is small against the HP truncation; mapping is not in its bosonic limit')
    return {'valid': len(warnings) == 0, 'warnings': warnings}


def build_hybrid(params: ModelParams, layout: FockSpaceLayout,
                 representation: HamiltonianKind = HamiltonianKind.HYBRID_HP) -> OperatorMatrix:
    """H_h = H + ω_a J_z + (λ/√N_a)(a+a†)(J₊+J₋) + χ(a+a†)², χ = αλ²/ω_a"""
    _require_modes(layout, 3, 'hybrid model')
    dc, dm, ds = layout.mode_dims
    if representation == HamiltonianKind.HYBRID_FULL_SPIN:
        if ds != params.N_a + 1:
            raise LayoutMismatchError(f"Spin mode needs dim N_a+1={params.N_a + 1}, got {ds}")
        jz, jp, jm = spin_operators(params.N_a)
    elif representation == HamiltonianKind.HYBRID_HP:
        jz, jp, jm = holstein_primakoff_operators(params.N_a, ds)
        validity = hybrid_validity(params, layout)
        for message in validity['warnings']:
            logger.warning(message)
    else:
        raise InvalidParameterError(f"{representation} is not a hybrid representation")

    wc = params.omega_c
    coupling = params.lam / wc / math.sqrt(params.N_a)
    h = (_optomech_core(params, layout)
         + (params.omega_a / wc) * embed_product(layout, {2: jz})
         + coupling * embed_product(layout, {0: quadrature(dc), 2: jp + jm})
         + (params.chi / wc) * embed_product(layout, {0: _x_squared(dc)}))
    return _wrap(layout, h)


###############################################################################
# SYMMETRY OPERATORS
###############################################################################

def build_polaron_unitary(params: ModelParams, layout: FockSpaceLayout) -> OperatorMatrix:
    """U = exp[-(2g/ω_m) a†a (b†-b)]; U† H_om U = n - n²/κ² + k/η"""
    _require_modes(layout, 2, 'polaron unitary')
    dc, dm = layout.mode_dims
    b = ladder(dm)
    shift = 2 * params.g / params.omega_m
    generator = -shift * embed_product(layout, {0: _n(dc), 1: b.conj().T - b})
    return matrix_exp(OperatorMatrix(layout, generator))


def build_u1_conserved(params: ModelParams, layout: FockSpaceLayout, theta: float) -> OperatorMatrix:
    """Conserved U(1) operator of H_om: P = U exp(iθN̂) U†, N̂ = a†a + b†b"""
    u = build_polaron_unitary(params, layout)
    dc, dm = layout.mode_dims
    total = (np.arange(dc)[:, None] + np.arange(dm)[None, :]).reshape(-1)
    rotation = OperatorMatrix(layout, np.diag(np.exp(1j * theta * total)))
    return u @ rotation @ u.dagger()


def parity_diagonal(kind: HamiltonianKind, layout: FockSpaceLayout) -> np.ndarray:
    """±1 parity eigenvalues per basis state: photon parity, times atomic parity for hybrids"""
    occupation = np.zeros(layout.mode_dims, dtype=int)
    grids = np.meshgrid(*[np.arange(d) for d in layout.mode_dims], indexing='ij')
    occupation += grids[0]
    if kind in HYBRID_KINDS and layout.n_modes == 3:
        occupation += grids[2]
    return np.where(occupation.reshape(-1) % 2 == 0, 1.0, -1.0)


def truncation_stability(params: ModelParams, layout: FockSpaceLayout,
                         kind: HamiltonianKind = HamiltonianKind.FULL_H) -> Dict[str, Any]:
    """Cavity stiffness at the far end of the representable mechanical range: 1 - 4·g_eff·q_max"""
    if layout.n_modes < 2:
        return {'stable': True, 'margin': 1.0, 'q_max': 0.0}
    q_max = quadrature_extent(layout.mode_dims[1])
    margin = 1.0 - 4 * effective_coupling(kind, params) * q_max
    return {'stable': margin > 0, 'margin': margin, 'q_max': q_max}


def mechanical_window(kind: HamiltonianKind, params: ModelParams) -> Dict[str, Any]:
    """Mechanical truncation holding the normal-phase sector of a (a+a†)²(b+b†) model.

    The coupling is unbounded below in b+b†, so a truncated spectrum only
    describes the normal phase while the cavity stays stiff over the whole
    mechanical range. The window is the smallest dimension whose q_max reaches
    MECH_WINDOW_MARGIN zero-point widths past the vacuum radiation-pressure
    displacement 2·g_eff/ω_m. It is `representable` when the cavity stiffness
    at that edge is still positive.
    """
    g = effective_coupling(kind, params)
    reach = 2 * g * params.eta + QptConfig.MECH_WINDOW_MARGIN
    cap = max(QptConfig.MIN_MECH_DIM, QptConfig.MAX_TOTAL_DIM // 2)

    # q_max(n) < √(4n+2) bounds the scan from below
    dim = min(cap, max(QptConfig.MIN_MECH_DIM, int((reach ** 2 - 2) / 4)))
    while quadrature_extent(dim) < reach and dim < cap:
        dim += 1
    q_edge = quadrature_extent(dim)
    margin = 1.0 - 4 * g * q_edge
    return {
        'dim': dim,
        'reach': reach,
        'q_edge': q_edge,
        'margin': margin,
        'representable': margin > 0 and q_edge >= reach,
    }


###############################################################################
# DISPATCH
###############################################################################

def default_layout(kind: HamiltonianKind, params: ModelParams,
                   dims: Optional[Sequence[int]] = None) -> FockSpaceLayout:
    """Layout with the conventional labels for a model; dims default to (16, 40[, spin])"""
    if kind in SINGLE_MODE_KINDS:
        labels = ('cavity',)
        default = QptConfig.DEFAULT_DIMS[:1]
    elif kind == HamiltonianKind.HYBRID_FULL_SPIN:
        labels = ('cavity', 'mechanical', 'spin')
        default = QptConfig.DEFAULT_DIMS + (params.N_a + 1,)
    elif kind == HamiltonianKind.HYBRID_HP:
        labels = ('cavity', 'mechanical', 'atom-HP')
        default = QptConfig.DEFAULT_DIMS + (min(params.N_a + 1, QptConfig.DEFAULT_DIMS[0]),)
    else:
        labels = ('cavity', 'mechanical')
        default = QptConfig.DEFAULT_DIMS
    dims = tuple(dims) if dims is not None else default
    if len(dims) != len(labels):
        raise LayoutMismatchError(f"{kind.value} needs {len(labels)} dims, got {len(dims)}")
    return FockSpaceLayout(dims, labels)


def build_hamiltonian(kind: HamiltonianKind, params: ModelParams, layout: FockSpaceLayout,
                      **options) -> OperatorMatrix:
    """Route a HamiltonianKind to its builder"""
    if kind == HamiltonianKind.FULL_H:
        return build_full_h(params, layout)
    if kind == HamiltonianKind.APPROX_HOM:
        return build_approx_hom(params, layout)
    if kind == HamiltonianKind.EFFECTIVE_HOM_TILDE:
        _require_modes(layout, 1, kind.value)
        return build_effective_hom_tilde(params.kappa, layout.mode_dims[0])
    if kind == HamiltonianKind.DISPLACED_HBAR:
        return build_displaced_hbar(params, layout)
    if kind == HamiltonianKind.QUADRATIC_LIMIT:
        _require_modes(layout, 1, kind.value)
        return build_quadratic_limit(params.gamma, layout.mode_dims[0])
    if kind == HamiltonianKind.SQUEEZED_DRIVE:
        return build_squeezed_drive(params, layout, drive_scale=options.get('drive_scale'))
    if kind == HamiltonianKind.SQUEEZED_QUADRATIC_LIMIT:
        _require_modes(layout, 1, kind.value)
        return build_squeezed_quadratic_limit(params.gamma, params.xi, params.theta, layout.mode_dims[0])
    if kind == HamiltonianKind.QUARTIC_HOP:
        return build_quartic_hop(params, layout)
    if kind in HYBRID_KINDS:
        return build_hybrid(params, layout, representation=kind)
    raise InvalidParameterError(f"No builder for {kind}")
