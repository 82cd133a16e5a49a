import math

import numpy as np
import pytest
from scipy import integrate

from harmonic_euler import connection, domain, euler, harmonic

POINTS = [0.0, 0.25 + 0.1j, -0.5j, 0.6 - 0.3j, -0.8 + 0.1j]


@pytest.fixture(scope="module")
def poisson_ev():
    return connection.ConnectionEvaluator(harmonic.poisson_family())


@pytest.fixture(scope="module")
def mixture_ev():
    return connection.ConnectionEvaluator(harmonic.rotated_mixture([0.0, 0.31, 0.62], [0.5, 0.3, 0.2]))


def test_phi_at_origin_is_identity(poisson_ev):
    t = np.linspace(-0.3, 1.4, 18)
    assert np.max(np.abs(poisson_ev.phi(0.0, t) - t)) < 1e-12


@pytest.mark.parametrize("z", POINTS)
def test_phi_increment_matches_quadrature(poisson_ev, z):
    val, _ = integrate.quad(lambda s: float(harmonic.poisson(z, s)), 0.0, 0.25, limit=200)
    got = float(poisson_ev.phi(z, 0.25) - poisson_ev.phi(z, 0.0))
    assert abs(got - val) < 1e-9


@pytest.mark.parametrize("z", POINTS)
def test_phi_inverse_round_trip(poisson_ev, mixture_ev, z):
    theta = np.linspace(-0.2, 1.1, 27)
    for ev in (poisson_ev, mixture_ev):
        assert np.max(np.abs(ev.phi(z, ev.phi_inverse(z, theta)) - theta)) < 1e-9


def test_phi_has_degree_one(mixture_ev):
    t = np.linspace(0.0, 1.0, 11)
    z = 0.3 - 0.2j
    assert np.max(np.abs(mixture_ev.phi(z, t + 1) - mixture_ev.phi(z, t) - 1.0)) < 1e-12


def test_points_near_boundary_are_refused(poisson_ev):
    with pytest.raises(ValueError):
        poisson_ev.curvature_K(0.9995)


def test_curvature_of_poisson_family_is_minus_one(poisson_ev, rng):
    r = np.sqrt(rng.uniform(0.0, 0.9 ** 2, 25))
    z = r * np.exp(2j * np.pi * rng.uniform(size=25))
    for zz in z:
        assert abs(poisson_ev.curvature_K(zz) + 1.0) < 1e-6


def test_curvature_of_constant_family_vanishes():
    ev = connection.ConnectionEvaluator(harmonic.ConstantFamily())
    for z in POINTS:
        assert abs(ev.curvature_K(z)) < 1e-12


def test_curvature_of_mixture_is_strictly_inside(mixture_ev):
    for z in POINTS:
        k = mixture_ev.curvature_K(z)
        assert -1.0 < k <= 0.0 + 1e-12


def test_connection_vanishes_at_origin(poisson_ev):
    a1, a2 = poisson_ev.average_connection(0.0)
    assert abs(a1) < 1e-12 and abs(a2) < 1e-12


@pytest.mark.parametrize("z", POINTS[1:])
def test_connection_stable_under_node_doubling(poisson_ev, mixture_ev, z):
    for ev in (poisson_ev, mixture_ev):
        assert abs(ev.connection(z, 512) - ev.connection(z, 1024)) < 1e-8


@pytest.mark.parametrize("z", POINTS)
def test_omega_prime_matches_finite_difference(mixture_ev, z):
    theta = np.linspace(0.05, 0.95, 7)
    h = 1e-5
    fd = (mixture_ev.omega(z, theta + h) - mixture_ev.omega(z, theta - h)) / (2 * h)
    exact = mixture_ev.omega_prime(z, theta)
    assert np.max(np.abs(fd - exact)) < 1e-5 * (1.0 + np.max(np.abs(exact)))


@pytest.mark.parametrize("z", POINTS)
def test_poisson_omega_curve_is_round(poisson_ev, z):
    assert poisson_ev.circle_fit_residual(z) < 1e-8


def test_mixture_omega_curve_is_not_round(mixture_ev):
    assert mixture_ev.circle_fit_residual(0.3 + 0.2j) > 1e-4


def test_curvature_agrees_with_curl_of_connection(mixture_ev):
    z, h = 0.2 - 0.35j, 1e-4
    a = mixture_ev.connection
    curl = ((a(z + h).imag - a(z - h).imag) - (a(z + 1j * h).real - a(z - 1j * h).real)) / (2 * h)
    k = 0.5 * math.pi * (1 - abs(z) ** 2) ** 2 * curl
    assert abs(k - mixture_ev.curvature_K(z)) < 1e-5


def regular_polygon_area(circumradius, sides):
    # right triangle centre / edge midpoint / vertex: cosh R = cot(pi/n) cot(beta)
    beta = math.atan(1.0 / (math.tan(math.pi / sides) * math.cosh(circumradius)))
    return (sides - 2) * math.pi - 2 * sides * beta


@pytest.mark.parametrize("center", [0.0, 0.4 + 0.2j])
def test_small_loop_holonomy_is_minus_area_over_two_pi(poisson_ev, center):
    loop = connection.circle_loop(center, 0.05, 16)
    hol = connection.holonomy_translation(poisson_ev, loop)
    expected = -regular_polygon_area(0.05, 16) / (2 * math.pi)
    assert abs(hol - expected) < 1e-8


def test_holonomy_reversal_and_subdivision(poisson_ev):
    loop = connection.circle_loop(0.1 + 0.2j, 0.4, 6)
    fwd = connection.holonomy_translation(poisson_ev, loop)
    back = connection.holonomy_translation(poisson_ev, loop[::-1])
    fine = connection.holonomy_translation(poisson_ev, loop, max_length=0.1)
    assert abs(fwd + back) < 1e-9
    assert abs(fine - fwd) < 1e-8
    assert abs(fwd + regular_polygon_area(0.4, 6) / (2 * math.pi)) < 1e-8


def test_constant_family_is_flat():
    ev = connection.ConnectionEvaluator(harmonic.ConstantFamily())
    loop = connection.circle_loop(0.3, 0.3, 16)
    assert abs(connection.holonomy_translation(ev, loop)) < 1e-12


def test_too_coarse_step_is_reported(poisson_ev):
    with pytest.raises(connection.StepTooCoarse):
        connection.segment_integral(poisson_ev, -0.9 + 0.1j, 0.2 + 0.8j, steps=2, tol=1e-16, max_steps=4)


def test_extrapolation_of_geometric_sequence():
    seq = [1.0 + 0.5 ** k for k in range(1, 6)]
    assert abs(connection.extrapolate(seq) - 1.0) < 1e-12
    assert connection.monotone_toward(seq, 1.0)
    assert not connection.monotone_toward([1.1, 1.5, 1.2], 1.0)


@pytest.fixture(scope="module")
def genus2_report(presentations, fuchsian_reps):
    pres, rep = presentations["genus2"], fuchsian_reps["genus2"]
    ev = connection.ConnectionEvaluator(harmonic.poisson_family())
    dom = domain.truncated_domain(pres, 1, mesh_res=0.5)
    return connection.gauss_bonnet_report(ev, [dom], euler.seifert_data(rep), rep)


def test_gauss_bonnet_identity_holds_per_level(genus2_report):
    assert abs(genus2_report["residual"]) < 1e-6
    assert abs(genus2_report["euler_estimate"] + 2.0) < 1e-2


def test_gauss_bonnet_report_keys(genus2_report):
    for key in ("levels", "interior", "boundary", "residual", "stokes_residual", "euler_estimate",
                "euler_exact", "euler_error", "per_loop", "non_monotone"):
        assert key in genus2_report
    assert genus2_report["euler_exact"] == "-2"
