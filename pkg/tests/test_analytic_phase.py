import math

import numpy as np
import pytest

from modules.analytic_phase.analytic_phase import (
    Phase, epsilon_np, epsilon_squeezed, epsilon_matched_drive, critical_gamma_squeezed,
    critical_margin, critical_gamma, dressed_cavity, hybrid_spectrum_np, hybrid_spectrum_sp,
    hybrid_spectrum_np_dressed, classify_point, classify_phase_grid, phase_grid_frame,
    anharmonic_energy, anharmonic_curvature, vacuum_intersection, anharmonic_ground_level,
)
from modules.model_builder.model_builder import ModelParams
from validation import InvalidParameterError, InvalidRegimeError, UnsupportedDirectionError


GAMMAS = np.linspace(0.0, 0.99, 34)


@pytest.mark.parametrize('gamma,expected', [(0.0, 0.5), (0.6, 0.4), (1.0, 0.0)])
def test_epsilon_np_values(gamma, expected):
    assert epsilon_np(gamma) == pytest.approx(expected, abs=1e-12)


def test_epsilon_np_beyond_criticality():
    assert epsilon_np(1.2) is None
    with pytest.raises(InvalidParameterError):
        epsilon_np(-0.1)


def test_epsilon_squeezed_matched_drive():
    gamma = math.sqrt(2)
    assert epsilon_squeezed(gamma, 2 * math.log(gamma), 0.0) == pytest.approx(math.sqrt(1 / 8))
    assert epsilon_matched_drive(gamma) == pytest.approx(math.sqrt(1 / 8))
    assert epsilon_matched_drive(0.9) is None


def test_epsilon_squeezed_root_for_pi_direction():
    assert epsilon_squeezed(math.exp(-0.5), 0.5, math.pi) == pytest.approx(0.0, abs=1e-7)
    assert critical_gamma_squeezed(0.5, math.pi) == pytest.approx(0.606531, abs=1e-6)
    assert critical_gamma_squeezed(0.5, 0.0) == pytest.approx(math.exp(0.5))


@pytest.mark.parametrize('theta', [0.0, math.pi])
def test_epsilon_squeezed_reduces_without_squeezing(theta):
    for gamma in GAMMAS:
        assert epsilon_squeezed(gamma, 0.0, theta) == pytest.approx(epsilon_np(gamma), abs=1e-14)


def test_epsilon_squeezed_direction_checks():
    with pytest.raises(UnsupportedDirectionError):
        epsilon_squeezed(0.5, 0.3, math.pi / 2)
    assert epsilon_squeezed(0.5, 0.3, 2 * math.pi) == pytest.approx(epsilon_squeezed(0.5, 0.3, 0.0))


def test_critical_gamma_decreases_with_squeezing():
    values = [critical_gamma_squeezed(xi, math.pi) for xi in np.linspace(0.0, 2.0, 21)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_decoupled_hybrid_spectrum():
    plus, minus = hybrid_spectrum_np(ModelParams())
    assert plus == pytest.approx(1.0)
    assert minus == pytest.approx(1.0)


def test_hybrid_gap_closes_on_critical_line():
    params = ModelParams.from_dimensionless(gamma=0.8, mu=0.6)
    assert hybrid_spectrum_np(params)[1] == pytest.approx(0.0, abs=1e-6)


def test_a_squared_term_keeps_gap_open():
    params = ModelParams.from_dimensionless(gamma=0.5, mu=2.0, alpha_A2=1.0)
    _, minus = hybrid_spectrum_np(params)
    assert minus is not None and minus > 0


def test_dicke_polariton_closed_form():
    params = ModelParams.from_dimensionless(gamma=0.0, mu=0.9)
    assert hybrid_spectrum_np(params)[1] == pytest.approx(math.sqrt(0.1), abs=1e-12)


def test_hybrid_reduces_to_optomechanical_gap():
    for gamma in GAMMAS:
        _, minus = hybrid_spectrum_np(ModelParams.from_dimensionless(gamma=gamma))
        assert minus == pytest.approx(2 * epsilon_np(gamma), abs=1e-12)


def test_dressed_cavity_requires_normal_side():
    with pytest.raises(InvalidRegimeError):
        dressed_cavity(ModelParams.from_dimensionless(gamma=1.2))
    dressed = dressed_cavity(ModelParams.from_dimensionless(gamma=0.6))
    assert dressed.r == pytest.approx(-0.25 * math.log(0.64))
    assert dressed.omega_tilde_c == pytest.approx(0.8)


def test_spectrum_continuity_at_threshold():
    omega_tilde, omega_a = 1.3, 1.0
    lambda_tilde = math.sqrt(omega_a * omega_tilde) / 2
    normal = hybrid_spectrum_np_dressed(omega_tilde, omega_a, lambda_tilde)
    broken = hybrid_spectrum_sp(1.0, omega_tilde, omega_a)
    assert abs(normal[0] - broken[0]) < 1e-9
    assert abs(normal[1] - broken[1]) < 1e-9


def test_superradiant_spectrum():
    for d in np.linspace(1.01, 5.0, 40):
        plus, minus = hybrid_spectrum_sp(d, 1.0, 1.0)
        assert minus > 0 and plus > minus
    plus, _ = hybrid_spectrum_sp(50.0, 1.0, 1.0)
    assert plus == pytest.approx(50.0 ** 2, rel=1e-6)
    with pytest.raises(InvalidRegimeError):
        hybrid_spectrum_sp(0.9, 1.0, 1.0)


@pytest.mark.parametrize('mu,alpha,expected', [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (2.0, 1.0, 1.0)])
def test_critical_gamma(mu, alpha, expected):
    assert critical_gamma(mu, alpha) == pytest.approx(expected)


def test_critical_gamma_unreachable():
    assert critical_gamma(2.0, 0.0) is None
    with pytest.raises(InvalidParameterError):
        critical_gamma(-1.0, 0.0)


@pytest.mark.parametrize('mu,gamma,alpha,phase', [
    (0.3, 0.4, 0.0, Phase.NORMAL),
    (0.8, 0.8, 0.0, Phase.SUPERRADIANT),
    (2.0, 0.9, 1.0, Phase.NORMAL),
    (2.0, 1.1, 1.0, Phase.SUPERRADIANT),
])
def test_classify_point(mu, gamma, alpha, phase):
    assert classify_point(mu, gamma, alpha).phase == phase


@pytest.mark.parametrize('alpha', [0.0, 1.0])
def test_phase_boundary_matches_gap_closing(alpha):
    for point in classify_phase_grid((0.0, 1.5), (0.0, 1.5), 31, alpha):
        if abs(critical_margin(point.mu, point.gamma, alpha)) < 1e-9:
            continue
        if point.phase == Phase.NORMAL:
            assert point.epsilon_minus is not None and point.epsilon_minus > 0
        else:
            assert point.epsilon_minus is None


def test_phase_grid_frame_layout():
    points = classify_phase_grid((0.0, 1.0), (0.0, 1.0), 5, 0.0)
    frame = phase_grid_frame(points)
    assert len(frame) == 25
    assert list(frame.columns) == ['mu', 'gamma', 'phase', 'epsilon_minus']
    assert frame.loc[24, 'phase'] == 'Superradiant'
    assert frame['mu'].iloc[:5].eq(0.0).all()


def test_phase_grid_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        classify_phase_grid((0.0, 1.0), (0.0, 1.0), 1, 0.0)
    with pytest.raises(InvalidParameterError):
        classify_phase_grid((-0.5, 1.0), (0.0, 1.0), 5, 0.0)


def test_anharmonic_levels():
    assert anharmonic_energy(3, 0.0) == 3
    assert anharmonic_curvature(2) == -8.0
    for n in range(1, 10):
        assert anharmonic_energy(n, vacuum_intersection(n)) == pytest.approx(0.0, abs=1e-12)
    crossings = [vacuum_intersection(n) for n in range(1, 50)]
    assert all(b < a for a, b in zip(crossings, crossings[1:]))
    assert anharmonic_ground_level(0.5, 64) == 2
    with pytest.raises(InvalidParameterError):
        vacuum_intersection(0)
