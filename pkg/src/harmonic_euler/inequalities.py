"""
Milnor-Wood and Eisenbud-Hirsch-Neumann bounds for Euler numbers of circle
actions of lattices, with the diagnosis of their equality cases.

The checkers accept any representation; the bounds are theorems only when
the group is a lattice, so every report carries that hypothesis label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .circle import DisplacementInterval, displacement_bounds
from .euler import (EulerNumber, RepresentationSpec, SeifertData, normalized_lifts,
                    seifert_data)
from .fuchsian import chi_orb

HYPOTHESIS = "lattice"
SNAP = 1e-12


class InconclusiveDisplacement(ArithmeticError):
    pass


@dataclass
class InequalityReport:
    kind: str                   # "milnor-wood", "ehn" or "ehn-genus0"
    lower: Fraction
    upper: Fraction
    euler: EulerNumber
    holds: bool | None
    slack: float
    left_equality: bool = False
    right_equality: bool = False
    flags: list = field(default_factory=list)
    beta0_window: tuple | None = None
    beta0: int | None = None
    hypothesis: str = HYPOTHESIS
    applicable: bool = True

    @property
    def violated(self) -> bool:
        return self.applicable and self.holds is False

    def to_record(self) -> dict:
        rec = {
            "kind": self.kind,
            "lower": str(self.lower),
            "upper": str(self.upper),
            "euler": str(self.euler),
            "holds": self.holds,
            "slack": self.slack,
            "left_equality": self.left_equality,
            "right_equality": self.right_equality,
            "flags": list(self.flags),
            "hypothesis": self.hypothesis,
            "applicable": self.applicable,
        }
        if self.beta0_window is not None:
            rec["beta0_window"] = [int(self.beta0_window[0]), int(self.beta0_window[1])]
            rec["beta0"] = self.beta0
        return rec


def _compare(e: EulerNumber, lower: Fraction, upper: Fraction):
    """(holds, slack, left equality, right equality).

    Slack is the distance from e to the nearer endpoint, negative when e lies
    outside.  With an inexact e the decision uses its error bar; an undecided
    comparison returns holds = None."""
    if e.exact is not None:
        x = e.exact
        slack = float(min(x - lower, upper - x))
        return x >= lower and x <= upper, slack, x == lower, x == upper
    x, err = e.estimate, e.error
    slack = min(x - float(lower), float(upper) - x)
    if slack - err >= 0:
        return True, slack, False, False
    if slack + err < 0:
        return False, slack, False, False
    return None, slack, abs(x - float(lower)) <= err, abs(float(upper) - x) <= err


def milnor_wood_check(rep: RepresentationSpec, seifert: SeifertData | None = None) -> InequalityReport:
    """|e(rho)| <= -chi_orb."""
    sd = seifert or seifert_data(rep)
    e = sd.euler
    bound = -chi_orb(rep.signature)
    holds, slack, left, right = _compare(e, -bound, bound)
    return InequalityReport("milnor-wood", -bound, bound, e, holds, slack, left, right)


def ehn_window(seifert: SeifertData, chi: Fraction) -> tuple[Fraction, Fraction]:
    """Window for e from the normalized Seifert invariants; genus 0 widens it by one on each side."""
    lo = chi + sum((Fraction(a - 1 - b, a) for a, b in seifert.pairs), Fraction(0))
    hi = -chi - sum((Fraction(b - 1, a) for a, b in seifert.pairs), Fraction(0))
    if seifert.genus == 0:
        lo, hi = lo - 1, hi + 1
    return lo, hi


def _ceil_min(d: DisplacementInterval, tau_exact) -> int:
    lo, hi = d.lower - SNAP, d.min_attained + SNAP
    if math.ceil(lo) == math.ceil(hi):
        return math.ceil(hi)
    # an exact integer translation number n forces min <= n < min + 1
    if tau_exact is not None and tau_exact.denominator == 1 and lo <= tau_exact <= hi:
        return int(tau_exact)
    raise InconclusiveDisplacement(f"minimum displacement enclosure [{lo}, {hi}] straddles an integer")


def _floor_max(d: DisplacementInterval, tau_exact) -> int:
    lo, hi = d.max_attained - SNAP, d.upper + SNAP
    if math.floor(lo) == math.floor(hi):
        return math.floor(lo)
    if tau_exact is not None and tau_exact.denominator == 1 and lo <= tau_exact <= hi:
        return int(tau_exact)
    raise InconclusiveDisplacement(f"maximum displacement enclosure [{lo}, {hi}] straddles an integer")


def beta0_window(seifert: SeifertData, holonomy_displacements, taus=None) -> tuple[int, int]:
    """Integer window for beta_0 from certified displacement enclosures of the cusp holonomies."""
    g, ell = seifert.genus, len(seifert.pairs)
    taus = list(taus) if taus is not None else [t.exact for t in seifert.cusp_tau]
    lo = 2 - 2 * g - ell - sum(_ceil_min(d, t) for d, t in zip(holonomy_displacements, taus))
    hi = 2 * g - 2 - sum(_floor_max(d, t) for d, t in zip(holonomy_displacements, taus))
    return lo, hi


def displacement_consistent(d: DisplacementInterval, tau: float, slack: float = 1e-9) -> bool:
    """ceil(max displacement) - 1 <= tau <= floor(min displacement) + 1."""
    return math.ceil(d.max_attained - slack) - 1 <= tau + slack and tau - slack <= math.floor(d.min_attained + slack) + 1


def ehn_bounds(seifert: SeifertData, holonomy_displacements=None, chi: Fraction | None = None,
               signature=None, tol: float = 1e-9) -> InequalityReport:
    """Window for e from the normalized Seifert invariants, and the beta_0
    window from the cusp holonomy displacements (one DisplacementInterval
    per cusp; required when there are cusps)."""
    if chi is None:
        if signature is None:
            raise ValueError("either chi or signature is required")
        chi = chi_orb(signature)
    lo, hi = ehn_window(seifert, chi)
    e = seifert.euler
    holds, slack, left, right = _compare(e, lo, hi)
    flags = []
    kind = "ehn"
    if seifert.genus == 0:
        kind = "ehn-genus0"
        flags.append("genus 0: weaker variant, may be wider than Milnor-Wood")
    trivial_cone = any(b == 0 for _, b in seifert.pairs)
    if trivial_cone:
        flags.append("some beta_i = 0 (cone generator acts trivially): outside the hypotheses")
    rep = InequalityReport(kind, lo, hi, e, holds, slack, left, right, flags, applicable=not trivial_cone)
    if seifert.genus >= 1:
        displ = list(holonomy_displacements or [])
        if len(displ) != len(seifert.cusp_tau):
            raise ValueError("one displacement interval per cusp is required")
        w = beta0_window(seifert, displ)
        rep.beta0_window = w
        rep.beta0 = seifert.beta0
        if not (w[0] <= seifert.beta0 <= w[1]):
            rep.holds = False
            rep.flags.append("beta_0 outside its window")
        for d, t in zip(displ, seifert.cusp_tau):
            if not displacement_consistent(d, t.value):
                rep.flags.append("cusp displacement inconsistent with its translation number")
    return rep


def cusp_displacements(rep: RepresentationSpec, tol: float = 1e-9) -> list[DisplacementInterval]:
    """Certified displacement enclosures of the normalized cusp lifts."""
    return [displacement_bounds(f, tol) for f in normalized_lifts(rep).c]


def check_ehn(rep: RepresentationSpec, seifert: SeifertData | None = None, tol: float = 1e-9) -> InequalityReport:
    sd = seifert or seifert_data(rep)
    displ = cusp_displacements(rep, tol) if sd.genus >= 1 else None
    return ehn_bounds(sd, displ, signature=rep.signature, tol=tol)


@dataclass
class EqualityDiagnosis:
    maximal_negative: bool      # e = chi_orb
    maximal_positive: bool      # e = -chi_orb
    left_equality: bool
    right_equality: bool
    all_beta_max: bool          # beta_i = alpha_i - 1 for every i
    all_beta_one: bool          # beta_i = 1 for every i
    consistent: bool
    verdict: str

    def to_record(self) -> dict:
        return dict(self.__dict__)


def ehn_equality_diagnosis(report: InequalityReport, seifert: SeifertData,
                           chi: Fraction | None = None) -> EqualityDiagnosis:
    """Check that e = chi_orb exactly when the left endpoint is attained with all
    beta_i = alpha_i - 1, and e = -chi_orb exactly when the right endpoint is
    attained with all beta_i = 1."""
    e = seifert.euler.exact
    beta_max = all(b == a - 1 for a, b in seifert.pairs)
    beta_one = all(b == 1 for a, b in seifert.pairs)
    if chi is None:
        chi = report.lower - sum((Fraction(a - 1 - b, a) for a, b in seifert.pairs), Fraction(0))
        if seifert.genus == 0:
            chi += 1
    neg = e is not None and e == chi
    pos = e is not None and e == -chi
    if seifert.genus >= 1:
        consistent = (neg == (report.left_equality and beta_max)) and (pos == (report.right_equality and beta_one))
    else:
        consistent = True
    if neg:
        verdict = "maximal negative"
    elif pos:
        verdict = "maximal positive"
    else:
        verdict = "no equality"
    return EqualityDiagnosis(neg, pos, report.left_equality, report.right_equality,
                             beta_max, beta_one, consistent, verdict)
