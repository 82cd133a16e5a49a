from fractions import Fraction

import numpy as np
import pytest

from harmonic_euler import circle, euler, fuchsian
from conftest import SIGNATURES

CATALOG_EULER = {
    "genus2": Fraction(-2),
    "modular": Fraction(-1, 6),
    "triangle237": Fraction(-1, 42),
    "torus2": Fraction(-1, 2),
}


@pytest.mark.parametrize("name", sorted(CATALOG_EULER))
def test_fuchsian_euler_equals_orbifold_characteristic(name, fuchsian_reps, presentations):
    e = euler.euler_number(fuchsian_reps[name])
    assert e.exact == CATALOG_EULER[name]
    assert e.exact == presentations[name].signature.chi


@pytest.mark.parametrize("name", sorted(CATALOG_EULER))
def test_reversed_rep_negates_euler(name, fuchsian_reps):
    e = euler.euler_number(euler.reversed_rep(fuchsian_reps[name]))
    assert e.exact == -CATALOG_EULER[name]


def test_modular_seifert_invariants(fuchsian_reps):
    sd = euler.seifert_data(fuchsian_reps["modular"])
    assert sd.beta0 == -1
    assert sd.pairs == ((2, 1), (3, 2))
    assert sd.cusp_tau[0].exact == 0


def test_triangle_seifert_invariants(fuchsian_reps):
    sd = euler.seifert_data(fuchsian_reps["triangle237"])
    assert sd.beta0 == -2
    assert all(0 <= b < a for a, b in sd.pairs)


def test_one_cone_torus_beyond_order_two():
    rep = euler.fuchsian_rep(fuchsian.catalog(fuchsian.OrbifoldSignature(1, (3,), 0)))
    assert euler.euler_number(rep).exact == Fraction(-2, 3)


def test_shifting_surface_lifts_keeps_euler(fuchsian_reps):
    rep = euler.shift_lifts(fuchsian_reps["genus2"], a_shifts=(3, -1), b_shifts=(2, 5))
    assert euler.euler_number(rep).exact == -2


@pytest.mark.parametrize("name", sorted(SIGNATURES))
def test_rotation_reps_have_small_euler(name, rng):
    sig = SIGNATURES[name]
    for _ in range(20):
        rep = euler.rotation_rep(sig, rng)
        e = euler.euler_number(rep).exact
        assert e is not None
        # rotations commute, so only the cone and cusp parts contribute
        assert abs(e) <= abs(sig.chi) + len(sig.cone_orders) + sig.cusps + 1
        if not sig.cone_orders and not sig.cusps:
            assert e == 0


def test_genus_two_rotation_rep_is_zero(rng):
    rep = euler.rotation_rep(SIGNATURES["genus2"], rng)
    assert euler.euler_number(rep).exact == 0


@pytest.mark.parametrize("name", sorted(CATALOG_EULER))
def test_pl_conjugation_preserves_euler(name, fuchsian_reps, rng):
    for _ in range(3):
        h = circle.random_pl_lift(rng, n=6)
        rep = euler.semiconjugate_deform(fuchsian_reps[name], h)
        assert euler.euler_number(rep).exact == CATALOG_EULER[name]


@pytest.mark.parametrize("name", ["genus2", "modular"])
def test_orbit_blowup_preserves_euler(name, fuchsian_reps):
    rep = fuchsian_reps[name]
    blow = euler.OrbitBlowup(rep, 0.123)
    deformed = euler.semiconjugate_deform(rep, blow)
    assert euler.euler_number(deformed).exact == CATALOG_EULER[name]


def test_blowup_semiconjugacy_relation(fuchsian_reps):
    rep = fuchsian_reps["genus2"]
    blow = euler.OrbitBlowup(rep, 0.3)
    deformed = euler.semiconjugate_deform(rep, blow)
    x = np.linspace(0.0, 1.0, 301)
    for f, g in zip(rep.generators.values(), deformed.generators.values()):
        assert np.max(np.abs(blow.psi(g(x)) - f(blow.psi(x)))) < 1e-9


def test_identity_semiconjugacy_returns_same_rep(fuchsian_reps):
    rep = fuchsian_reps["genus2"]
    assert euler.semiconjugate_deform(rep, circle.identity()) is rep


@pytest.mark.parametrize("sig", [fuchsian.OrbifoldSignature(0, (2, 3), 0),
                                 fuchsian.OrbifoldSignature(0, (), 2),
                                 fuchsian.OrbifoldSignature(0, (5,), 1)])
def test_degenerate_signature_rejected(sig):
    with pytest.raises(euler.DegenerateSignature):
        euler.check_signature(sig)


def test_broken_relator_is_reported(fuchsian_reps):
    rep = fuchsian_reps["genus2"]
    bent = euler.RepresentationSpec(rep.signature, (circle.rotation(Fraction(1, 7)),) + rep.a[1:],
                                    rep.b, rep.d, rep.c)
    with pytest.raises(euler.RelatorNotIdentity):
        euler.euler_number(bent)


def test_generator_count_checked():
    with pytest.raises(ValueError):
        euler.RepresentationSpec(SIGNATURES["genus2"], (circle.identity(),), (), (), ())


@pytest.mark.parametrize("name", sorted(CATALOG_EULER))
def test_record_round_trip(name, fuchsian_reps):
    rep = fuchsian_reps[name]
    back = euler.RepresentationSpec.from_record(rep.to_record())
    assert euler.euler_number(back).exact == CATALOG_EULER[name]
    x = np.linspace(-1.0, 2.0, 41)
    for f, g in zip(rep.generators.values(), back.generators.values()):
        assert np.max(np.abs(f(x) - g(x))) < 1e-12


def test_record_falls_back_to_presentation(presentations):
    pres = presentations["modular"]
    rec = {"generators": {"c1": circle.to_record(circle.rotation(Fraction(1, 3)))}}
    with pytest.raises(euler.RelatorNotIdentity):
        euler.euler_number(euler.RepresentationSpec.from_record(rec, pres))


def test_seifert_record_contents(fuchsian_reps):
    rec = euler.seifert_data(fuchsian_reps["modular"]).to_record()
    assert rec == {"genus": 0, "beta0": -1, "pairs": [[2, 1], [3, 2]],
                   "cusp_tau_dec": ["0"], "euler": "-1/6"}
