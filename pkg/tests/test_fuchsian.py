import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from harmonic_euler import circle as C
from harmonic_euler import fuchsian as F


def test_poisson_kernel_values():
    assert F.poisson_kernel(0.0, 0.37) == pytest.approx(1.0)
    assert F.poisson_kernel(0.5, 0.0) == pytest.approx(3.0)
    z = 0.7 * np.exp(1j * np.pi / 3)
    val, _ = quad(lambda t: F.poisson_kernel(z, t), 0, 1, epsabs=1e-12, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        F.poisson_kernel(1.0, 0.0)


def test_distance_and_area():
    assert F.poincare_distance(0.0, 0.5) == pytest.approx(2 * math.atanh(0.5))
    # ideal-ish triangle area approaches pi; equilateral with vertices r e^{2 pi i k/3}
    r = 0.5
    tri = [r * np.exp(2j * np.pi * k / 3) for k in range(3)]
    # oracle: angle at vertex from the hyperbolic law of cosines
    a = F.poincare_distance(tri[0], tri[1])
    cos_angle = (math.cosh(a) ** 2 - math.cosh(a)) / math.sinh(a) ** 2
    assert F.hyperbolic_area(tri) == pytest.approx(math.pi - 3 * math.acos(cos_angle), abs=1e-12)


@pytest.mark.parametrize("sig,chi", [((2, (), 0), Fraction(-2)), ((0, (2, 3), 1), Fraction(-1, 6)),
                                     ((0, (2, 3, 7), 0), Fraction(-1, 42)), ((1, (2,), 0), Fraction(-1, 2))])
def test_chi_orb(sig, chi):
    assert F.chi_orb(F.OrbifoldSignature(*sig)) == chi


def test_catalog_relators_and_traces(presentations):
    for name, pres in presentations.items():
        assert pres.relator_residual() < 1e-9, name
        for k, v in pres.trace_report().items():
            assert v < 1e-9, (name, k)
        for m in pres.generators.values():
            assert abs(np.linalg.det(m) - 1) < 1e-12


def test_boundary_lift_homomorphism_up_to_integer(presentations):
    pres = presentations["genus2"]
    ms = list(pres.generators.values())
    x = np.linspace(0, 1, 11)
    for m, n in zip(ms, ms[1:]):
        lhs = F.boundary_lift(m @ n)(x)
        rhs = C.compose(F.boundary_lift(m), F.boundary_lift(n))(x)
        k = np.round(lhs - rhs)
        assert np.all(k == k[0])
        assert np.max(np.abs(lhs - rhs - k)) < 1e-12


def test_elliptic_generators_have_finite_order(presentations):
    for name in ("modular", "triangle237", "torus2"):
        pres = presentations[name]
        for alpha, m in zip(pres.signature.cone_orders, pres.d):
            r = C.translation_number_finite_order(F.boundary_lift(m), alpha)
            beta = (r - math.floor(r)) * alpha
            assert beta.denominator == 1 and 0 <= beta < alpha


def test_presentation_round_trip(tmp_path, presentations):
    pres = presentations["triangle237"]
    path = tmp_path / "p.json"
    F.save_presentation(pres, path)
    back = F.load_presentation(path)
    for k, m in pres.generators.items():
        assert np.array_equal(back.generators[k], m)


def test_presentation_missing_generator():
    rec = F.presentation_to_record(F.catalog(F.OrbifoldSignature(2, (), 0)))
    del rec["generators"]["b2"]
    with pytest.raises(F.PresentationError):
        F.presentation_from_record(rec)


def test_unsupported_signature():
    with pytest.raises(F.UnsupportedSignature):
        F.catalog(F.OrbifoldSignature(3, (2,), 2))


def test_polygon_counterclockwise(presentations):
    for name in ("genus2", "modular", "triangle237"):
        v = np.asarray(presentations[name].polygon.vertices)
        x, y = v.real, v.imag
        assert np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0
