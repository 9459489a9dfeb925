import math

import numpy as np
import pytest

from modules.analytic_phase.analytic_phase import (
    critical_gamma_squeezed, epsilon_np, epsilon_squeezed, hybrid_spectrum_np,
)
from modules.bosonic_algebra.bosonic_algebra import FockSpaceLayout, OperatorMatrix
from modules.model_builder.model_builder import (
    HamiltonianKind, ModelParams, build_full_h, build_quadratic_limit, default_layout,
    mechanical_window, parity_diagonal,
)
from modules.meanfield_variational.squeezing_solver import solve_squeezing
from modules.spectral_engine.spectral_engine import (
    eigendecompose, convergence_check, auto_layout, level_crossing_scan, flipped_levels,
    gap_sweep, squeezing_extract, pinned_coherence, solve, hamiltonian_in_frame,
)
from validation import (
    HermiticityViolationError, InvalidParameterError, TruncationUnresolvedError,
)


@pytest.fixture
def weak_params():
    return ModelParams(omega_m=0.5, g=0.02)


def test_number_operator_spectrum():
    layout = FockSpaceLayout((10,), ('cavity',))
    result = eigendecompose(OperatorMatrix(layout, np.diag(np.arange(10.0))), k_lowest=10)
    assert np.allclose(result.eigenvalues, np.arange(10.0))
    assert result.gap == pytest.approx(1.0)
    assert result.observables['photon_number'] == pytest.approx(0.0, abs=1e-14)
    assert result.converged is False


def test_eigenvectors_are_orthonormal(weak_params):
    layout = FockSpaceLayout((8, 12), ('cavity', 'mechanical'))
    result = eigendecompose(build_full_h(weak_params, layout), k_lowest=6)
    gram = result.eigenvectors.conj().T @ result.eigenvectors
    assert np.allclose(gram, np.eye(6), atol=1e-9)
    assert np.all(np.diff(result.eigenvalues) >= 0)


def test_non_hermitian_input_rejected():
    layout = FockSpaceLayout((3,))
    with pytest.raises(HermiticityViolationError):
        eigendecompose(OperatorMatrix(layout, np.triu(np.ones((3, 3)))))


@pytest.mark.parametrize('gamma', [0.2, 0.4, 0.6, 0.8])
def test_quadratic_limit_gap_matches_closed_form(gamma):
    result = eigendecompose(build_quadratic_limit(gamma, 200), k_lowest=3)
    assert result.gap == pytest.approx(2 * epsilon_np(gamma), abs=1e-6)


def test_quadratic_limit_observables_respect_uncertainty():
    obs = eigendecompose(build_quadratic_limit(0.8, 160)).observables
    assert obs['var_x_a'] * obs['var_p_a'] >= 0.25 - 1e-9
    assert -1 - 1e-9 <= obs['parity_c'] <= 1 + 1e-9
    assert obs['parity_c'] == pytest.approx(1.0, abs=1e-10)


def test_full_h_ground_state_has_definite_parity(weak_params):
    layout = default_layout(HamiltonianKind.FULL_H, weak_params)
    result = solve(HamiltonianKind.FULL_H, weak_params, layout)
    assert abs(result.observables['parity_c']) == pytest.approx(1.0, abs=1e-8)
    # plain gap is the phonon quantum, the odd sector starts one photon up
    assert result.gap == pytest.approx(0.5, abs=0.01)
    assert result.parity_gap == pytest.approx(1.0, abs=0.05)


def test_convergence_at_zero_coupling():
    params = ModelParams(omega_m=0.5, g=0.0)
    layout = FockSpaceLayout((4, 4), ('cavity', 'mechanical'))
    report = convergence_check(HamiltonianKind.FULL_H, params, layout)
    assert report.converged
    # cavity doubles, the mechanical window stays
    assert report.refined_layout.mode_dims == (8, 4)
    assert report.result.converged


def test_convergence_doubles_mechanics_in_displaced_frame():
    params = ModelParams(omega_m=0.5, g=0.0)
    layout = FockSpaceLayout((4, 4), ('cavity', 'mechanical'))
    report = convergence_check(HamiltonianKind.DISPLACED_HBAR, params, layout)
    assert report.converged
    assert report.refined_layout.mode_dims == (8, 8)


def test_effective_tilde_converges_in_flipped_frame():
    params = ModelParams.from_dimensionless(kappa=2.0)
    layout = default_layout(HamiltonianKind.EFFECTIVE_HOM_TILDE, params)
    report = convergence_check(HamiltonianKind.EFFECTIVE_HOM_TILDE, params, layout)
    assert report.converged
    assert report.result.ground_energy == pytest.approx(-1.0)


def test_squeezing_extract_quadratic_limit():
    params = ModelParams.from_dimensionless(gamma=0.6)
    layout = FockSpaceLayout((160,), ('cavity',))
    report = convergence_check(HamiltonianKind.QUADRATIC_LIMIT, params, layout)
    assert report.converged
    r_eff, s_eff = squeezing_extract(report.result)
    assert r_eff == pytest.approx(-0.25 * math.log(1 - 0.36), abs=1e-4)
    assert s_eff == 0.0


def test_squeezing_extract_vacuum():
    params = ModelParams.from_dimensionless(gamma=0.0)
    report = convergence_check(HamiltonianKind.QUADRATIC_LIMIT, params, FockSpaceLayout((8,), ('cavity',)))
    assert squeezing_extract(report.result)[0] == pytest.approx(0.0, abs=1e-12)


def test_squeezing_extract_refuses_unconverged():
    result = eigendecompose(build_quadratic_limit(0.5, 40))
    with pytest.raises(TruncationUnresolvedError):
        squeezing_extract(result)


def test_auto_layout_quadratic_limit():
    params = ModelParams.from_dimensionless(gamma=0.5)
    layout, report = auto_layout(HamiltonianKind.QUADRATIC_LIMIT, params)
    assert report.converged
    assert layout.mode_dims[0] >= 16
    assert report.result.gap == pytest.approx(2 * epsilon_np(0.5), abs=1e-6)


def test_staircase_matches_ceiling_rule():
    report = level_crossing_scan((0.5, 4.0), 500, 64)
    for kappa, n_ground in report.staircase:
        expected = math.ceil((kappa ** 2 - 1) / 2) if kappa > 1 else 0
        assert n_ground == expected
    assert all(report.converged)
    kappas = [k for k, _ in report.staircase]
    assert all(b > a for a, b in zip(kappas, kappas[1:]))


def test_crossings_at_odd_square_roots():
    report = level_crossing_scan((0.5, 4.0), 500, 64)
    assert [pair for _, pair in report.crossings] == [(n, n + 1) for n in range(8)]
    for kappa, (n, _) in report.crossings:
        assert kappa == pytest.approx(math.sqrt(2 * n + 1), abs=1e-9)


def test_staircase_spot_values():
    assert int(np.argmin(flipped_levels(2.1, 64))) == 2
    levels = flipped_levels(math.sqrt(3), 64)
    assert levels[1] == pytest.approx(levels[2], abs=1e-12)


def test_staircase_frame_golden_values():
    frame = level_crossing_scan((0.5, 2.5), 5, 64).staircase_frame()
    assert frame['n_ground'].tolist() == [0, 0, 1, 2, 3]
    assert frame['n_mean_field'].tolist() == [0.0, 0.0, 0.625, 1.5, 2.625]
    assert frame['degenerate'].tolist() == [False, True, False, False, False]


def test_level_crossing_scan_flags_small_dim():
    report = level_crossing_scan((3.0, 4.0), 3, 4)
    assert report.converged == [False, False, False]


def test_level_crossing_scan_rejects_bad_range():
    with pytest.raises(InvalidParameterError):
        level_crossing_scan((-1.0, 2.0), 10, 16)
    with pytest.raises(InvalidParameterError):
        level_crossing_scan((0.5, 2.0), 1, 16)


def test_gap_sweep_quadratic_limit_matches_curve():
    params = ModelParams.from_dimensionless(gamma=0.0)
    frame = gap_sweep(HamiltonianKind.QUADRATIC_LIMIT, params, 'gamma', 0.0, 0.9, 10,
                      layout=FockSpaceLayout((200,), ('cavity',)))
    expected = [2 * epsilon_np(g) for g in frame['gamma']]
    assert np.allclose(frame['gap'], expected, atol=1e-6)
    assert frame['converged'].all()
    assert np.allclose(frame['parity'], 1.0, atol=1e-9)
    assert list(frame.columns[:1]) == ['gamma']


def test_gap_sweep_flags_bad_points():
    params = ModelParams.from_dimensionless(gamma=0.5)
    frame = gap_sweep(HamiltonianKind.QUADRATIC_LIMIT, params, 'kappa', 0.0, 2.0, 3,
                      layout=FockSpaceLayout((40,), ('cavity',)), check_convergence=False)
    assert frame.loc[0, 'flag'] == 'invalid-parameter'
    assert math.isnan(frame.loc[0, 'gap'])
    assert frame.loc[2, 'flag'] == 'unconverged'


def test_gap_sweep_rejects_unknown_control():
    with pytest.raises(InvalidParameterError):
        gap_sweep(HamiltonianKind.QUADRATIC_LIMIT, ModelParams(), 'omega_c', 0.0, 1.0, 3)


def test_squeezed_quadratic_gap_matches_analytic():
    params = ModelParams.from_dimensionless(gamma=0.5, xi=0.5, theta=math.pi)
    layout = default_layout(HamiltonianKind.SQUEEZED_QUADRATIC_LIMIT, params, dims=(200,))
    result = solve(HamiltonianKind.SQUEEZED_QUADRATIC_LIMIT, params, layout)
    assert result.gap == pytest.approx(2 * epsilon_squeezed(0.5, 0.5, math.pi), abs=1e-5)


def _lower_polariton_gap(n_atoms: int, representation=HamiltonianKind.HYBRID_HP, atom_dim: int = 16):
    params = ModelParams.from_dimensionless(gamma=0.0, mu=0.9, N_a=n_atoms)
    layout = default_layout(representation, params, dims=(16, 2, atom_dim))
    return solve(representation, params, layout).parity_gap, hybrid_spectrum_np(params)[1]


def test_dicke_polariton_gap_from_holstein_primakoff():
    gap, eps_minus = _lower_polariton_gap(400)
    assert eps_minus == pytest.approx(math.sqrt(0.1))
    assert gap == pytest.approx(eps_minus, rel=0.03)


def test_holstein_primakoff_gap_at_forty_atoms():
    gap, eps_minus = _lower_polariton_gap(40)
    spin_gap, _ = _lower_polariton_gap(40, HamiltonianKind.HYBRID_FULL_SPIN, atom_dim=41)
    assert gap == pytest.approx(spin_gap, abs=1e-3)
    # the √(N_a - c†c) factor weakens the coupling, lifting the gap by O(1/N_a)
    large_n_gap, _ = _lower_polariton_gap(400)
    assert 0 < large_n_gap - eps_minus < gap - eps_minus < 0.25 * eps_minus


def test_a_squared_term_keeps_hybrid_gap_open():
    params = ModelParams.from_dimensionless(gamma=0.0, mu=2.0, alpha_A2=1.0, N_a=100)
    layout = default_layout(HamiltonianKind.HYBRID_HP, params, dims=(16, 2, 16))
    result = solve(HamiltonianKind.HYBRID_HP, params, layout)
    assert result.parity_gap > 0.3


def test_pinned_coherence_vanishes_in_symmetric_phase():
    params = ModelParams.from_dimensionless(gamma=0.6)
    layout = FockSpaceLayout((120,), ('cavity',))
    delta = 1e-4
    h = build_quadratic_limit(0.6, 120)
    x = OperatorMatrix(layout, np.diag(np.sqrt(np.arange(1, 120.0)), 1)
                       + np.diag(np.sqrt(np.arange(1, 120.0)), -1))
    responded = eigendecompose(h + delta * x).observables['coherence_a']
    assert responded.real == pytest.approx(-delta / 0.64, rel=1e-6)
    pinned = pinned_coherence(HamiltonianKind.QUADRATIC_LIMIT, params, layout, delta=delta)
    assert abs(pinned) < 1e-9


def test_flipped_frame_negates_spectrum():
    h = build_quadratic_limit(0.0, 6)
    flipped = hamiltonian_in_frame(h, 'flipped')
    assert np.allclose(flipped.entries, -h.entries)
    assert hamiltonian_in_frame(h, 'printed') is h
    with pytest.raises(InvalidParameterError):
        hamiltonian_in_frame(h, 'sideways')


def test_parity_blocks_match_full_spectrum(weak_params):
    layout = FockSpaceLayout((8, 10), ('cavity', 'mechanical'))
    h = build_full_h(weak_params, layout)
    parity = parity_diagonal(HamiltonianKind.FULL_H, layout)
    result = eigendecompose(h, k_lowest=40, parity=parity)
    overlaps = [np.vdot(v, parity * v).real for v in result.eigenvectors.T]
    first_odd = next(i for i, p in enumerate(overlaps) if p < 0)
    assert result.parity_gap == pytest.approx(result.eigenvalues[first_odd] - result.eigenvalues[0],
                                              abs=1e-10)


###############################################################################
# MECHANICAL WINDOW
###############################################################################

@pytest.fixture(scope='module')
def full_h_eta_500():
    params = ModelParams.from_dimensionless(gamma=0.6, eta=500.0)
    return auto_layout(HamiltonianKind.FULL_H, params)[1]


def test_full_h_gap_approaches_classical_limit_with_eta():
    gamma = 0.6
    margins = []
    for eta in (10.0, 50.0, 100.0, 500.0):
        params = ModelParams.from_dimensionless(gamma=gamma, eta=eta)
        window = mechanical_window(HamiltonianKind.FULL_H, params)
        layout, report = auto_layout(HamiltonianKind.FULL_H, params)
        assert report.converged
        assert layout.mode_dims[1] == window['dim']
        margins.append(window['margin'])
    # cavity stiffness at the window edge climbs toward 1 - γ²
    assert all(b > a for a, b in zip(margins, margins[1:]))
    assert 0.6 < margins[-1] < 1 - gamma ** 2
    assert report.result.parity_gap == pytest.approx(2 * epsilon_np(gamma), rel=0.05)


def test_full_h_ground_energy_near_closed_form(full_h_eta_500):
    closed_form = epsilon_np(0.6) - 0.5 + 0.6 ** 2 / 8
    assert closed_form == pytest.approx(-0.055)
    assert full_h_eta_500.result.ground_energy == pytest.approx(closed_form, rel=0.06)


def test_full_h_cavity_squeezing_tracks_variational(full_h_eta_500):
    r_eff, s_eff = squeezing_extract(full_h_eta_500.result)
    solution = solve_squeezing(0.6, 500.0)
    assert r_eff == pytest.approx(solution.r, rel=0.2)
    assert math.isfinite(s_eff)


def test_auto_layout_refuses_window_past_cavity_softening():
    params = ModelParams.from_dimensionless(gamma=1.1, eta=50.0)
    with pytest.raises(TruncationUnresolvedError):
        auto_layout(HamiltonianKind.FULL_H, params)


###############################################################################
# SQUEEZED DRIVE
###############################################################################

def test_squeezed_drive_direction_orders_gap():
    layout = FockSpaceLayout((60, 20), ('cavity', 'mechanical'))
    plain = ModelParams.from_dimensionless(gamma=0.5, eta=200.0)
    full_gap = solve(HamiltonianKind.FULL_H, plain, layout).parity_gap
    gaps = {}
    for theta in (0.0, math.pi):
        params = ModelParams.from_dimensionless(gamma=0.5, eta=200.0, xi=0.5, theta=theta)
        gaps[theta] = solve(HamiltonianKind.SQUEEZED_DRIVE, params, layout).parity_gap
    assert gaps[math.pi] < full_gap - 0.05
    assert gaps[0.0] > full_gap + 0.05


def test_squeezed_drive_gap_tracks_squeezed_classical_limit():
    params = ModelParams.from_dimensionless(gamma=0.3, eta=200.0, xi=0.5, theta=math.pi)
    _, report = auto_layout(HamiltonianKind.SQUEEZED_DRIVE, params)
    assert report.converged
    expected = 2 * epsilon_squeezed(0.3, 0.5, math.pi)
    assert report.result.parity_gap == pytest.approx(expected, rel=0.05)


def test_squeezed_drive_window_closes_at_critical_coupling():
    critical = critical_gamma_squeezed(0.5, math.pi)
    assert critical == pytest.approx(math.exp(-0.5))

    def window(gamma):
        params = ModelParams.from_dimensionless(gamma=gamma, eta=200.0, xi=0.5, theta=math.pi)
        return mechanical_window(HamiltonianKind.SQUEEZED_DRIVE, params)

    assert window(critical - 0.03)['representable']
    assert not window(critical + 5e-3)['representable']


def test_gap_sweep_flags_squeezed_drive_past_critical_coupling():
    params = ModelParams.from_dimensionless(eta=200.0, xi=0.5, theta=math.pi)
    frame = gap_sweep(HamiltonianKind.SQUEEZED_DRIVE, params, 'gamma', 0.62, 0.64, 2)
    assert frame['flag'].tolist() == ['truncation-unresolved'] * 2
    assert frame['gap'].isna().all()
