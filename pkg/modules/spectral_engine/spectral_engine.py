"""
Spectral Engine

Diagonalises OperatorMatrix Hamiltonians, extracts ground-state observables,
checks truncation convergence by dimension doubling and scans the anharmonic
cavity spectrum for level crossings.

Version: 1.0
"""

import math
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, optimize

from modules.bosonic_algebra.bosonic_algebra import (
    FockSpaceLayout, OperatorMatrix, ladder, quadrature, embed_product, mode_expectation,
)
from modules.model_builder.model_builder import (
    WINDOW_KINDS, HamiltonianKind, ModelParams, build_hamiltonian, build_effective_hom_tilde,
    default_layout, mechanical_window, parity_diagonal, squeezed_coupling_factor,
)
from sweep_manager import sweep_manager
from validation import (
    QptConfig, InvalidParameterError, NumericFailureError, TruncationUnresolvedError,
)

logger = logging.getLogger(__name__)


###############################################################################
# RESULT TYPES
###############################################################################

@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenpairs of one Hamiltonian plus ground-state observables"""

    eigenvalues: np.ndarray
    ground_vector: np.ndarray
    eigenvectors: np.ndarray
    gap: float
    parity_gap: Optional[float]
    observables: Dict[str, Any]
    converged: bool
    dim_used: FockSpaceLayout

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    eigenvalue_shift: float
    photon_shift: float
    layout: FockSpaceLayout
    refined_layout: FockSpaceLayout
    result: SpectrumResult
    reason: str = ''


@dataclass
class CrossingReport:
    """Level crossings and the integer ground-state occupation along κ"""

    crossings: List[Tuple[float, Tuple[int, int]]] = field(default_factory=list)
    staircase: List[Tuple[float, int]] = field(default_factory=list)
    degenerate: List[bool] = field(default_factory=list)
    converged: List[bool] = field(default_factory=list)

    def staircase_frame(self) -> pd.DataFrame:
        kappas = [k for k, _ in self.staircase]
        return pd.DataFrame({
            'kappa': kappas,
            'n_ground': [n for _, n in self.staircase],
            'n_mean_field': [max(0.0, (k ** 2 - 1.0) / 2.0) for k in kappas],
            'degenerate': self.degenerate,
            'converged': self.converged,
        })

    def crossings_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'kappa': [k for k, _ in self.crossings],
            'lower_level': [pair[0] for _, pair in self.crossings],
            'upper_level': [pair[1] for _, pair in self.crossings],
        })


###############################################################################
# DIAGONALISATION
###############################################################################

def _mode_observables(state: np.ndarray, layout: FockSpaceLayout, mode_index: Optional[int],
                      prefix: str) -> Dict[str, Any]:
    if mode_index is None:
        # Absent mode reported as vacuum
        return {f'{prefix}_number': 0.0, f'coherence_{prefix[0]}': 0j,
                f'var_x_{prefix[0]}': 0.5, f'var_p_{prefix[0]}': 0.5}
    dim = layout.mode_dims[mode_index]
    a = ladder(dim)
    ad = a.conj().T
    x = (a + ad) / math.sqrt(2)
    p = 1j * (ad - a) / math.sqrt(2)

    def expect(op):
        return mode_expectation(state, layout, mode_index, op)

    mean_x, mean_p = expect(x).real, expect(p).real
    return {
        f'{prefix}_number': expect(ad @ a).real,
        f'coherence_{prefix[0]}': expect(a),
        f'var_x_{prefix[0]}': expect(x @ x).real - mean_x ** 2,
        f'var_p_{prefix[0]}': expect(p @ p).real - mean_p ** 2,
    }


def ground_observables(state: np.ndarray, layout: FockSpaceLayout) -> Dict[str, Any]:
    """Photon/phonon numbers, coherences, cavity parity and quadrature variances"""
    observables = _mode_observables(state, layout, 0, 'photon')
    observables.update(_mode_observables(state, layout, layout.index_of('mechanical'), 'phonon'))
    parity = np.diag((-1.0) ** np.arange(layout.mode_dims[0]))
    observables['parity_c'] = mode_expectation(state, layout, 0, parity).real
    return observables


def _lowest(matrix: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    try:
        return linalg.eigh(matrix, subset_by_index=[0, k - 1])
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericFailureError(f"Eigensolver failed: {e}") from e


def _parity_gap(entries: np.ndarray, parity: np.ndarray) -> Optional[float]:
    even = np.flatnonzero(parity > 0)
    odd = np.flatnonzero(parity < 0)
    if even.size == 0 or odd.size == 0:
        return None
    leak = np.max(np.abs(entries[np.ix_(even, odd)]))
    if leak > QptConfig.HERMITICITY_TOL:
        logger.warning(f"Hamiltonian mixes parity sectors (max coupling {leak:.2e}); no parity gap")
        return None
    e_even = _lowest(entries[np.ix_(even, even)], 1)[0][0]
    e_odd = _lowest(entries[np.ix_(odd, odd)], 1)[0][0]
    return float(abs(e_even - e_odd))


def eigendecompose(hamiltonian: OperatorMatrix, k_lowest: int = 6,
                   parity: Optional[np.ndarray] = None) -> SpectrumResult:
    """Lowest k eigenpairs of a Hermitian Hamiltonian.

    When a diagonal ±1 `parity` is given the parity gap (lowest level of the
    other sector minus E0) is obtained from the two blocks separately.
    """
    hamiltonian.check_hermitian(QptConfig.HERMITICITY_TOL)
    layout = hamiltonian.layout
    n = layout.total_dim
    k = max(2, min(int(k_lowest), n))
    entries = hamiltonian.entries

    values, vectors = _lowest(entries, k)
    if not np.all(np.isfinite(values)):
        raise NumericFailureError('Eigensolver returned non-finite eigenvalues')

    gap = float(values[1] - values[0])
    if gap <= QptConfig.DEGENERACY_TOL * max(1.0, abs(values[0])):
        gap = 0.0
    parity_gap = _parity_gap(entries, parity) if parity is not None else None

    ground = vectors[:, 0]
    return SpectrumResult(
        eigenvalues=values,
        ground_vector=ground,
        eigenvectors=vectors,
        gap=gap,
        parity_gap=parity_gap,
        observables=ground_observables(ground, layout),
        converged=False,
        dim_used=layout,
    )


def hamiltonian_in_frame(hamiltonian: OperatorMatrix, frame: str) -> OperatorMatrix:
    """'printed' leaves H alone; 'flipped' reports the sign-flipped spectrum"""
    if frame not in QptConfig.ALLOWED_FRAMES:
        raise InvalidParameterError(f"Unknown frame {frame!r}")
    return -hamiltonian if frame == 'flipped' else hamiltonian


def spectrum_in_frame(hamiltonian: OperatorMatrix, frame: str, k_lowest: int = 6,
                      parity: Optional[np.ndarray] = None) -> SpectrumResult:
    return eigendecompose(hamiltonian_in_frame(hamiltonian, frame), k_lowest, parity)


###############################################################################
# TRUNCATION CONVERGENCE
###############################################################################

def _refine_dims(layout: FockSpaceLayout, params: ModelParams,
                 kind: Optional[HamiltonianKind] = None) -> Tuple[int, ...]:
    dims = []
    for label, d in zip(layout.labels, layout.mode_dims):
        if label == 'spin':
            dims.append(d)
        elif label == 'mechanical' and kind in WINDOW_KINDS:
            # The mechanical window is fixed by mechanical_window
            dims.append(d)
        elif label == 'atom-HP':
            dims.append(min(2 * d, params.N_a + 1))
        else:
            dims.append(2 * d)
    return tuple(dims)


def _build(kind: HamiltonianKind, params: ModelParams, layout: FockSpaceLayout,
           **options) -> OperatorMatrix:
    h = build_hamiltonian(kind, params, layout, **options)
    # The anharmonic cavity is only bounded below in the flipped frame
    return -h if kind == HamiltonianKind.EFFECTIVE_HOM_TILDE else h


def solve(kind: HamiltonianKind, params: ModelParams, layout: FockSpaceLayout,
          k_lowest: int = 6, **options) -> SpectrumResult:
    """Build and diagonalise one model with its parity operator attached"""
    h = _build(kind, params, layout, **options)
    return eigendecompose(h, k_lowest, parity=parity_diagonal(kind, layout))


def _spectral_shift(kind: HamiltonianKind, base: SpectrumResult, refined: SpectrumResult) -> float:
    if kind in WINDOW_KINDS and base.parity_gap is not None and refined.parity_gap is not None:
        return abs(refined.parity_gap - base.parity_gap)
    k = min(len(base.eigenvalues), len(refined.eigenvalues))
    return float(np.max(np.abs(refined.eigenvalues[:k] - base.eigenvalues[:k])))


def convergence_check(kind: HamiltonianKind, params: ModelParams, base_layout: FockSpaceLayout,
                      **options) -> ConvergenceReport:
    """Double the truncatable modes and compare the spectrum and ⟨a†a⟩.

    Models with the bare (a+a†)²(b+b†) coupling keep their mechanical window
    and are judged on the parity gap; the others compare the lowest three levels.
    """
    base = solve(kind, params, base_layout, k_lowest=3, **options)
    refined_layout = base_layout.with_dims(_refine_dims(base_layout, params, kind))

    if refined_layout.mode_dims == base_layout.mode_dims:
        return ConvergenceReport(True, 0.0, 0.0, base_layout, refined_layout,
                                 replace(base, converged=True), 'all modes at physical dimension')
    if refined_layout.total_dim > QptConfig.MAX_TOTAL_DIM:
        logger.info(f"Refinement {refined_layout.mode_dims} exceeds cap {QptConfig.MAX_TOTAL_DIM}")
        return ConvergenceReport(False, math.inf, math.inf, base_layout, refined_layout, base,
                                 'dimension cap reached')

    refined = solve(kind, params, refined_layout, k_lowest=3, **options)
    eig_shift = _spectral_shift(kind, base, refined)
    photon_shift = abs(refined.observables['photon_number'] - base.observables['photon_number'])
    converged = (eig_shift < QptConfig.CONVERGENCE_EIG_TOL
                 and photon_shift < QptConfig.CONVERGENCE_PHOTON_TOL)
    reason = '' if converged else f'eigenvalue shift {eig_shift:.2e}, photon shift {photon_shift:.2e}'
    return ConvergenceReport(converged, eig_shift, photon_shift, base_layout, refined_layout,
                             replace(base, converged=converged), reason)


def _coupling_squared(kind: HamiltonianKind, params: ModelParams) -> float:
    factor = 1.0
    if kind in (HamiltonianKind.SQUEEZED_DRIVE, HamiltonianKind.SQUEEZED_QUADRATIC_LIMIT):
        factor = squeezed_coupling_factor(params.xi, params.theta)
    return (params.gamma * factor) ** 2


def auto_layout(kind: HamiltonianKind, params: ModelParams,
                **options) -> Tuple[FockSpaceLayout, ConvergenceReport]:
    """Default dims with a softness-scaled cavity, doubled until converged.

    Models with the bare (a+a†)²(b+b†) coupling take their mechanical dimension
    from mechanical_window and only grow the cavity (and HP atoms); a window
    the cavity cannot stay stiff over raises TruncationUnresolvedError.
    """
    layout = default_layout(kind, params)
    softness = 1.0 - min(_coupling_squared(kind, params), 0.99)
    if kind in WINDOW_KINDS:
        window = mechanical_window(kind, params)
        if not window['representable']:
            raise TruncationUnresolvedError(
                f"{kind.value}: cavity stiffness {window['margin']:.3g} at the edge of the "
                f"{window['dim']}-level normal-phase mechanical window")
        softness = window['margin']
        layout = layout.with_dims(layout.mode_dims[:1] + (window['dim'],) + layout.mode_dims[2:])
    if kind != HamiltonianKind.EFFECTIVE_HOM_TILDE:
        others = layout.total_dim // layout.mode_dims[0]
        cavity = min(int(math.ceil(layout.mode_dims[0] / softness)),
                     max(2, QptConfig.MAX_TOTAL_DIM // others))
        layout = layout.with_dims((cavity,) + layout.mode_dims[1:])

    while True:
        report = convergence_check(kind, params, layout, **options)
        if report.converged or report.reason == 'dimension cap reached':
            return layout, report
        logger.info(f"Escalating {kind.value} dims {layout.mode_dims} -> {report.refined_layout.mode_dims}")
        layout = report.refined_layout


###############################################################################
# LEVEL CROSSINGS
###############################################################################

def flipped_levels(kappa: float, dim: int) -> np.ndarray:
    """Anharmonic cavity levels in the flipped frame, n²/κ² - n"""
    return -np.diag(build_effective_hom_tilde(kappa, dim).entries).real


def level_crossing_scan(kappa_range: Sequence[float], steps: int, dim: int) -> CrossingReport:
    """Ground level of n²/κ² - n on a κ grid and the crossings E(n) = E(n+1) between points"""
    lo, hi = float(kappa_range[0]), float(kappa_range[1])
    if lo < 0 or hi < lo:
        raise InvalidParameterError(f"kappa range [{lo}, {hi}] must be ordered and non-negative")
    if steps < 2:
        raise InvalidParameterError('level crossing scan needs at least 2 steps')

    report = CrossingReport()
    previous: Optional[Tuple[float, int]] = None
    for kappa in np.linspace(lo, hi, steps):
        kappa = float(kappa)
        if kappa == 0.0:
            n_ground, degenerate, converged = 0, False, True
        else:
            levels = flipped_levels(kappa, dim)
            n_ground = int(np.argmin(levels))
            lowest_two = np.partition(levels, 1)[:2]
            degenerate = bool(lowest_two[1] - lowest_two[0]
                              <= QptConfig.DEGENERACY_TOL * max(1.0, abs(lowest_two[0])))
            converged = n_ground < dim - 1

        if previous is not None and n_ground > previous[1]:
            for n in range(previous[1], n_ground):
                report.crossings.append((_locate_crossing(n, previous[0], kappa, dim), (n, n + 1)))

        report.staircase.append((kappa, n_ground))
        report.degenerate.append(degenerate)
        report.converged.append(converged)
        previous = (kappa, n_ground)

    logger.info(f"Crossing scan over [{lo}, {hi}]: {len(report.crossings)} crossings")
    return report


def _locate_crossing(n: int, left: float, right: float, dim: int) -> float:
    def split(kappa: float) -> float:
        levels = flipped_levels(kappa, dim)
        return levels[n + 1] - levels[n]

    left = max(left, 1e-12)
    return float(optimize.brentq(split, left, right, xtol=1e-14))


###############################################################################
# SWEEPS AND DERIVED OBSERVABLES
###############################################################################

def gap_sweep(kind: HamiltonianKind, params: ModelParams, control: str, lo: float, hi: float,
              steps: int, layout: Optional[FockSpaceLayout] = None, check_convergence: bool = True,
              workers: Optional[int] = None, pinning: Optional[float] = None,
              **options) -> pd.DataFrame:
    """Gap, parity gap, photon number and cavity parity along one control parameter.

    Each point is convergence-checked (auto dims when `layout` is None).
    Per-point domain failures come back as flagged rows. A positive `pinning`
    adds the extrapolated |⟨a⟩| under that symmetry-breaking field.
    """
    if control not in QptConfig.ALLOWED_CONTROLS:
        raise InvalidParameterError(f"Unknown control {control!r}")
    if steps < 2 or hi < lo:
        raise InvalidParameterError('gap sweep needs steps >= 2 and hi >= lo')

    def point(value: float) -> Dict[str, Any]:
        p = params.with_control(control, value)
        if layout is None:
            _, report = auto_layout(kind, p, **options)
            result = report.result
        elif check_convergence:
            result = convergence_check(kind, p, layout, **options).result
        else:
            result = solve(kind, p, layout, **options)
        row = {
            'gap': result.gap,
            'parity_gap': np.nan if result.parity_gap is None else result.parity_gap,
            'photon_number': result.observables['photon_number'],
            'parity': result.observables['parity_c'],
            'converged': result.converged,
            'dims': 'x'.join(str(d) for d in result.dim_used.mode_dims),
        }
        if pinning:
            row['pinned_coherence'] = abs(pinned_coherence(kind, p, result.dim_used, pinning, **options))
        return row

    values = [float(v) for v in np.linspace(lo, hi, steps)]
    outcomes = sweep_manager.map_points(point, values, workers=workers)

    rows = []
    for outcome in outcomes:
        row = {control: outcome.control}
        if outcome.flagged:
            row.update({'gap': np.nan, 'parity_gap': np.nan, 'photon_number': np.nan,
                        'parity': np.nan, 'converged': False, 'dims': ''})
            if pinning:
                row['pinned_coherence'] = np.nan
            row['flag'] = outcome.error
        else:
            row.update(outcome.value)
            row['flag'] = '' if outcome.value['converged'] else 'unconverged'
        rows.append(row)
    return pd.DataFrame(rows)


def squeezing_extract(result: SpectrumResult) -> Tuple[float, float]:
    """r_eff, s_eff = ¼ ln(var_x/var_p) for the cavity and mechanical modes"""
    if not result.converged:
        raise TruncationUnresolvedError('squeezing extraction needs a convergence-checked spectrum')
    obs = result.observables
    r_eff = 0.25 * math.log(obs['var_x_a'] / obs['var_p_a'])
    s_eff = 0.25 * math.log(obs['var_x_b'] / obs['var_p_b'])
    return r_eff, s_eff


def pinned_coherence(kind: HamiltonianKind, params: ModelParams, layout: FockSpaceLayout,
                     delta: float = QptConfig.PINNING_FIELD, **options) -> complex:
    """⟨a⟩ under a small field δ(a+a†), Richardson-extrapolated as 2c(δ) - c(2δ)"""
    base = _build(kind, params, layout, **options)
    field_op = OperatorMatrix(layout, embed_product(layout, {0: quadrature(layout.mode_dims[0])}))

    def coherence(strength: float) -> complex:
        return eigendecompose(base + strength * field_op, k_lowest=2).observables['coherence_a']

    return 2 * coherence(delta) - coherence(2 * delta)
