import numpy as np
import pytest
from scipy import integrate

from harmonic_euler import circle, euler, fuchsian, harmonic

POINTS = [0.0, 0.3 + 0.1j, -0.55j, 0.7 - 0.4j, -0.9 + 0.05j]


@pytest.mark.parametrize("z", POINTS)
def test_poisson_kernel_has_unit_mass(z):
    val, _ = integrate.quad(lambda s: float(harmonic.poisson(z, s)), 0.0, 1.0, limit=200)
    assert abs(val - 1.0) < 1e-10


@pytest.mark.parametrize("z", POINTS)
@pytest.mark.parametrize("m", [0.1, 0.5, 0.93, 1.7, -0.4])
def test_poisson_integral_matches_quadrature(z, m):
    val, _ = integrate.quad(lambda s: float(harmonic.poisson(z, s)), 0.0, m, limit=400)
    assert abs(float(harmonic.poisson_integral(z, m)) - val) < 1e-10


@pytest.mark.parametrize("z", POINTS)
def test_poisson_integral_inverse_round_trip(z):
    targets = np.linspace(-1.3, 2.2, 57)
    m = harmonic.poisson_integral_inverse(z, targets)
    assert np.max(np.abs(harmonic.poisson_integral(z, m) - targets)) < 1e-12


@pytest.mark.parametrize("z", POINTS)
def test_poisson_gradients_match_finite_differences(z):
    h = 1e-6
    m = np.linspace(0.0, 1.0, 13)
    for fn, grad in ((harmonic.poisson, harmonic.poisson_grad),
                     (harmonic.poisson_integral, harmonic.poisson_integral_grad)):
        dx = (fn(z + h, m) - fn(z - h, m)) / (2 * h)
        dy = (fn(z + 1j * h, m) - fn(z - 1j * h, m)) / (2 * h)
        g = grad(z, m)
        scale = 1.0 + np.max(np.abs(g))
        assert np.max(np.abs(g - (dx + 1j * dy))) < 1e-6 * scale


def test_points_on_boundary_are_refused():
    with pytest.raises(ValueError):
        harmonic.harnack_norm(harmonic.poisson_family(), 1.0 + 0j, 0.2)


def test_poisson_family_phi_is_degree_one():
    fam = harmonic.poisson_family()
    for z in POINTS:
        t = np.linspace(-0.5, 0.5, 11)
        assert np.max(np.abs(fam.phi(z, t + 1.0) - fam.phi(z, t) - 1.0)) < 1e-12
        assert abs(fam.mass(z) - 1.0) < 1e-12


def test_pl_boundary_family_has_unit_mass(rng):
    m = circle.random_pl_lift(rng, n=7, shift=0.0)
    # the pullback of Lebesgue measure under m makes m a collapse map
    nu = harmonic.CircleMeasure(m.xs, np.diff(m.ys) / np.diff(m.xs))
    fam = harmonic.poisson_family(m, nu)
    for z in POINTS:
        assert abs(fam.mass(z) - 1.0) < 1e-10
        t = np.linspace(0.0, 1.0, 9)
        back = fam.phi_inverse(z, fam.phi(z, t))
        assert np.max(np.abs(back - t)) < 1e-9


def test_constant_family():
    fam = harmonic.ConstantFamily()
    assert np.allclose(fam.density(0.4j, np.linspace(0, 1, 5)), 1.0)
    assert fam.phi(0.3, 0.25) == pytest.approx(0.25)


@pytest.mark.parametrize("z", POINTS)
def test_harnack_norm_of_poisson_kernel_is_one(z):
    t = np.linspace(0.0, 1.0, 17)
    vals = harmonic.harnack_norm(harmonic.poisson_family(), z, t)
    assert np.max(np.abs(vals - 1.0)) < 1e-12


def test_harnack_norm_of_mixture_below_one():
    fam = harmonic.rotated_mixture([0.0, 0.31, 0.62], [0.5, 0.3, 0.2])
    t = np.linspace(0.0, 1.0, 33)
    for z in POINTS:
        vals = harmonic.harnack_norm(fam, z, t)
        assert np.all(vals < 1.0 - 1e-4)
        assert np.all(vals > 0.0) or z == 0.0


def test_harnack_norm_of_antipodal_mixture_vanishes_at_origin():
    fam = harmonic.rotated_mixture([0.0, 0.5], [0.5, 0.5])
    assert harmonic.harnack_norm(fam, 0.0, 0.13) < 1e-12
    assert 0.0 < harmonic.harnack_norm(fam, 0.4 + 0.2j, 0.13) < 1.0


@pytest.mark.parametrize("z", [0.2, 0.5j, -0.6 + 0.2j])
def test_check_harmonic_small_for_families(z):
    for fam in (harmonic.poisson_family(), harmonic.rotated_mixture([0.1, 0.4], [0.7, 0.3])):
        assert harmonic.check_harmonic(fam, z, 0.37, 0.1) < 1e-12


def test_check_harmonic_detects_non_harmonic_function():
    bump = lambda w, t: np.abs(w) ** 2
    assert harmonic.check_harmonic(bump, 0.1, 0.0, 0.2) > 1e-2


def test_collapse_map_and_section():
    mu = harmonic.CircleMeasure(np.array([0.0, 0.3, 0.5, 1.0]), np.array([2.0, 0.0, 0.8]))
    psi = harmonic.collapse_map(mu)
    s = harmonic.quantile_section(psi)
    x = np.linspace(0.0, 0.99, 50)
    assert np.max(np.abs(psi(s(x)) - x)) < 1e-12
    assert psi(0.4) == pytest.approx(0.6)


def test_collapse_map_refuses_atoms():
    with pytest.raises(harmonic.AtomicMeasure):
        harmonic.collapse_map(harmonic.CircleMeasure.point_mass(0.2))


def test_measure_csv_masses_sum_to_one():
    mu = harmonic.CircleMeasure.from_samples([0.1, 0.1, 0.7, 0.95])
    lines = mu.to_csv(8).strip().splitlines()
    assert lines[0] == "left,right,mass"
    assert sum(float(r.split(",")[2]) for r in lines[1:]) == pytest.approx(1.0)


def test_circle_w1_known_values():
    assert harmonic.circle_w1([0.1], [0.3]) == pytest.approx(0.2)
    assert harmonic.circle_w1([0.05], [0.95]) == pytest.approx(0.1)
    assert harmonic.circle_w1([0.0, 0.5], [0.25, 0.75]) == pytest.approx(0.25)


def test_circle_w1_matches_uniform_limit(rng):
    x = rng.uniform(size=4000)
    grid = (np.arange(4000) + 0.5) / 4000
    assert harmonic.circle_w1(x, grid) < 0.02


def test_monte_carlo_is_deterministic(fuchsian_reps):
    rep = fuchsian_reps["genus2"]
    gens = rep.symmetric_generators()
    a = harmonic.random_word_endpoints(gens, 10, 5000, seed=7)
    b = harmonic.random_word_endpoints(gens, 10, 5000, seed=7)
    c = harmonic.random_word_endpoints(gens, 10, 5000, seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all((a >= 0.0) & (a < 1.0))


def test_block_layout_independent_of_sample_count(fuchsian_reps):
    gens = fuchsian_reps["genus2"].symmetric_generators()
    short = harmonic.random_word_endpoints(gens, 5, harmonic.MC_BLOCK, seed=3)
    long = harmonic.random_word_endpoints(gens, 5, harmonic.MC_BLOCK + 10, seed=3)
    assert np.array_equal(short, long[:harmonic.MC_BLOCK])


def test_rotation_rep_stationary_measure_is_nearly_invariant(rng):
    rep = euler.rotation_rep(fuchsian.OrbifoldSignature(2, (), 0), rng)
    x = harmonic.random_word_endpoints(rep.symmetric_generators(), 20, 4000, seed=1)
    w, noise = harmonic.equivariance_defect(rep, x, bootstrap=50)
    assert w <= 3 * noise + 1e-3


def test_closed_form_mixture_matches_generic_mixture():
    shifts, weights = [0.0, 0.31, 0.62], [0.5, 0.3, 0.2]
    fast = harmonic.rotated_mixture(shifts, weights)
    slow = harmonic.MixtureFamily([harmonic.PoissonFamily(circle.rotation(s)) for s in shifts], weights)
    t = np.linspace(-0.4, 1.3, 41)
    for z in POINTS:
        for name in ("density", "density_grad", "phi", "phi_grad", "grad_log_density"):
            assert np.max(np.abs(getattr(fast, name)(z, t) - getattr(slow, name)(z, t))) < 1e-12
        theta = np.linspace(0.0, 1.0, 21)
        assert np.max(np.abs(fast.phi_inverse(z, theta) - slow.phi_inverse(z, theta))) < 1e-10
