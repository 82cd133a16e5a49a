from fractions import Fraction

import pytest

from harmonic_euler import circle, euler, fuchsian, inequalities as ineq
from harmonic_euler.circle import DisplacementInterval, TranslationNumber
from conftest import SIGNATURES


def seifert(genus, pairs, beta0=0, cusp_tau=()):
    taus = tuple(TranslationNumber(float(t), 0.0, Fraction(t)) for t in cusp_tau)
    return euler.SeifertData(genus, beta0, tuple(pairs), taus)


@pytest.mark.parametrize("name", sorted(SIGNATURES))
def test_milnor_wood_is_sharp_for_fuchsian_reps(name, fuchsian_reps):
    rep = fuchsian_reps[name]
    rep_mw = ineq.milnor_wood_check(rep)
    assert rep_mw.holds and rep_mw.slack == 0.0 and rep_mw.left_equality
    rev = ineq.milnor_wood_check(euler.reversed_rep(rep))
    assert rev.holds and rev.right_equality
    assert rep_mw.hypothesis == "lattice"


def test_milnor_wood_for_rotation_reps(rng):
    for name, sig in SIGNATURES.items():
        for _ in range(10):
            report = ineq.milnor_wood_check(euler.rotation_rep(sig, rng))
            assert not report.violated


def test_milnor_wood_flags_violation(rng):
    sd = seifert(2, (), beta0=-3)
    report = ineq.milnor_wood_check(euler.rotation_rep(SIGNATURES["genus2"], rng), sd)
    assert report.holds is False and report.violated and report.slack == -1.0


def test_ehn_window_torus_with_one_cone():
    lo, hi = ineq.ehn_window(seifert(1, [(2, 1)]), Fraction(-1, 2))
    assert (lo, hi) == (Fraction(-1, 2), Fraction(1, 2))


def test_ehn_window_genus_zero_is_widened():
    sig = SIGNATURES["triangle237"]
    lo, hi = ineq.ehn_window(seifert(0, [(2, 1), (3, 2), (7, 6)]), fuchsian.chi_orb(sig))
    assert lo == fuchsian.chi_orb(sig) - 1
    assert hi == Fraction(1, 42) + 1 - Fraction(1, 3) - Fraction(5, 7)


@pytest.mark.parametrize("name", sorted(SIGNATURES))
def test_ehn_holds_for_catalog_reps(name, fuchsian_reps):
    for rep in (fuchsian_reps[name], euler.reversed_rep(fuchsian_reps[name])):
        report = ineq.check_ehn(rep)
        assert report.holds and not report.violated
        if rep.signature.genus == 0:
            assert report.kind == "ehn-genus0" and report.flags


@pytest.mark.parametrize("name", sorted(SIGNATURES))
def test_equality_diagnosis(name, fuchsian_reps):
    rep = fuchsian_reps[name]
    sd = euler.seifert_data(rep)
    diag = ineq.ehn_equality_diagnosis(ineq.check_ehn(rep, sd), sd)
    assert diag.verdict == "maximal negative" and diag.consistent
    rev = euler.reversed_rep(rep)
    sdr = euler.seifert_data(rev)
    diag = ineq.ehn_equality_diagnosis(ineq.check_ehn(rev, sdr), sdr)
    assert diag.verdict == "maximal positive" and diag.consistent


def test_torus_equality_uses_extreme_betas(fuchsian_reps):
    rep = fuchsian_reps["torus2"]
    sd = euler.seifert_data(rep)
    report = ineq.check_ehn(rep, sd)
    assert report.left_equality and sd.pairs == ((2, 1),)
    assert report.beta0_window == (-1, 0)
    assert report.beta0_window[0] <= report.beta0 <= report.beta0_window[1]


def test_trivial_cone_generator_is_not_applicable():
    sig = SIGNATURES["triangle237"]
    rep = euler.RepresentationSpec(sig, (), (), tuple(circle.identity() for _ in range(3)), ())
    report = ineq.check_ehn(rep)
    assert not report.applicable and not report.violated


def test_beta0_window_with_a_cusp():
    sd = seifert(1, [], beta0=0, cusp_tau=[Fraction(1, 3)])
    d = DisplacementInterval(0.1, 0.6, 1e-9, 0.1, 0.6)
    assert ineq.beta0_window(sd, [d]) == (-1, 0)
    report = ineq.ehn_bounds(sd, [d], chi=Fraction(-1))
    assert report.beta0_window == (-1, 0) and report.holds


def test_beta0_outside_window_is_a_violation():
    sd = seifert(1, [], beta0=3, cusp_tau=[Fraction(1, 3)])
    d = DisplacementInterval(0.1, 0.6, 1e-9, 0.1, 0.6)
    report = ineq.ehn_bounds(sd, [d], chi=Fraction(-1))
    assert report.violated and "beta_0 outside its window" in report.flags


def test_integer_translation_resolves_straddling_enclosure():
    d = DisplacementInterval(-1e-10, 0.0, 1e-9, 1e-10, 0.0)
    tau = Fraction(0)
    assert ineq._ceil_min(d, tau) == 0


def test_straddling_enclosure_is_inconclusive():
    sd = seifert(1, [], cusp_tau=[Fraction(1, 3)])
    d = DisplacementInterval(-0.001, 0.6, 1e-3, 0.001, 0.6)
    with pytest.raises(ineq.InconclusiveDisplacement):
        ineq.beta0_window(sd, [d])


def test_missing_displacements_rejected():
    with pytest.raises(ValueError):
        ineq.ehn_bounds(seifert(1, [], cusp_tau=[Fraction(0)]), [], chi=Fraction(-1))


def test_displacement_consistency():
    d = DisplacementInterval(0.1, 0.6, 1e-9, 0.1, 0.6)
    assert ineq.displacement_consistent(d, 0.3)
    assert not ineq.displacement_consistent(d, 2.5)


def test_report_record_is_json_ready(fuchsian_reps):
    rec = ineq.check_ehn(fuchsian_reps["torus2"]).to_record()
    assert rec["lower"] == "-1/2" and rec["euler"] == "-1/2"
    assert rec["beta0_window"] == [-1, 0]
