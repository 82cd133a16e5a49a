"""
Euler numbers of circle actions of orbifold groups.

The group has generators a_i, b_i (genus), d_i (cone points) and c_j
(cusps) with the single relation

    [a_1, b_1] ... [a_g, b_g] d_1 ... d_l c_1 ... c_m = 1.

Given lifts of the generator images, normalise the lifts of d_i and c_j so
that their translation numbers lie in [0, 1).  The relator then evaluates to
an integer translation k, and

    e = -beta_0 - sum beta_i/alpha_i - sum tau_dec(c_j),   beta_0 = -k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circle import (LiftedCircleMap, MobiusLift, Rotation, FunctionLift, as_pl, compose,
                     compose_all, displacement_bounds, from_record, inverse, reflect, rotation, to_record, translation_number,
                     translation_number_finite_order, fraction_to_str, NonMonotone)
from .fuchsian import LatticePresentation, OrbifoldSignature, boundary_lift

# beta_0 = BETA0_SIGN * (translation of the normalised relator lift).  Fixed
# once by requiring e = chi_orb on the genus-2 surface group; rotation
# representations (e = 0 for every sign) cannot detect it.
BETA0_SIGN = -1


class RelatorNotIdentity(ValueError):
    pass


class DegenerateSignature(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RepresentationSpec:
    signature: OrbifoldSignature
    a: tuple = ()
    b: tuple = ()
    d: tuple = ()
    c: tuple = ()
    label: str = ""

    def __post_init__(self):
        sig = self.signature
        counts = (len(self.a), len(self.b), len(self.d), len(self.c))
        if counts != (sig.genus, sig.genus, len(sig.cone_orders), sig.cusps):
            raise ValueError(f"generator counts {counts} do not match signature {sig}")

    @property
    def generators(self) -> dict:
        out = {}
        for name, maps in (("a", self.a), ("b", self.b), ("d", self.d), ("c", self.c)):
            for k, f in enumerate(maps, start=1):
                out[f"{name}{k}"] = f
        return out

    def symmetric_generators(self) -> list:
        out = []
        for f in self.generators.values():
            out.extend([f, inverse(f)])
        return out

    def map_generators(self, func, label: str | None = None) -> "RepresentationSpec":
        return RepresentationSpec(self.signature, tuple(map(func, self.a)), tuple(map(func, self.b)),
                                  tuple(map(func, self.d)), tuple(map(func, self.c)),
                                  self.label if label is None else label)

    def relator_lift(self, d=None, c=None) -> LiftedCircleMap:
        d = self.d if d is None else d
        c = self.c if c is None else c
        maps = []
        for ai, bi in zip(self.a, self.b):
            maps.extend([ai, bi, inverse(ai), inverse(bi)])
        maps.extend(d)
        maps.extend(c)
        return compose_all(maps)

    def to_record(self) -> dict:
        sig = self.signature
        return {
            "signature": {"genus": sig.genus, "cone_orders": list(sig.cone_orders), "cusps": sig.cusps},
            "generators": {k: to_record(f) for k, f in self.generators.items()},
        }

    @classmethod
    def from_record(cls, rec: dict, presentation: LatticePresentation | None = None):
        if "signature" in rec:
            s = rec["signature"]
            sig = OrbifoldSignature(int(s["genus"]), tuple(s.get("cone_orders", ())),
                                    int(s.get("cusps", 0)))
        elif presentation is not None:
            sig = presentation.signature
        else:
            raise ValueError("representation record needs a signature or a presentation")
        gens = dict(rec.get("generators", {}))
        fuchsian = fuchsian_rep(presentation).generators if presentation is not None else {}

        def get(name):
            if name in gens:
                return from_record(gens[name])
            if name in fuchsian:
                return fuchsian[name]
            raise ValueError(f"generator {name} missing")

        g, l, m = sig.genus, len(sig.cone_orders), sig.cusps
        return cls(sig, tuple(get(f"a{k}") for k in range(1, g + 1)),
                   tuple(get(f"b{k}") for k in range(1, g + 1)),
                   tuple(get(f"d{k}") for k in range(1, l + 1)),
                   tuple(get(f"c{k}") for k in range(1, m + 1)), rec.get("label", ""))


def check_signature(sig: OrbifoldSignature) -> None:
    if sig.genus == 0 and len(sig.cone_orders) + sig.cusps <= 2:
        raise DegenerateSignature(f"signature {sig} is not hyperbolic")


def integer_translation(f: LiftedCircleMap, tol: float = 1e-6, samples: int = 1024) -> int:
    """The integer k with f(x) = x + k, checked to ``tol``."""
    k = round(float(f(0.0)))
    if isinstance(f, (Rotation, MobiusLift)) or as_pl(f) is not None:
        db = displacement_bounds(f)
        dev = max(abs(db.lower - k), abs(db.upper - k))
    else:
        x = (np.arange(samples) + 0.5 * (math.sqrt(5) - 1)) / samples
        dev = float(np.max(np.abs(f(x) - x - k)))
    if dev > tol:
        raise RelatorNotIdentity(f"relator lift deviates from translation by {k} by {dev:.3g}")
    return k


@dataclass(frozen=True)
class EulerNumber:
    """Exact rational when every cusp translation number is certified."""

    exact: Fraction | None
    estimate: float
    error: float = 0.0

    @property
    def value(self):
        return self.exact if self.exact is not None else self.estimate

    def __str__(self):
        if self.exact is not None:
            return fraction_to_str(self.exact)
        return f"{self.estimate:.12g} +- {self.error:.3g}"


@dataclass(frozen=True)
class SeifertData:
    genus: int
    beta0: int
    pairs: tuple          # ((alpha_i, beta_i), ...) with 0 <= beta_i < alpha_i
    cusp_tau: tuple       # TranslationNumber values in [0, 1)
    relator_translation: int = 0

    @property
    def euler(self) -> EulerNumber:
        base = -Fraction(self.beta0) - sum((Fraction(b, a) for a, b in self.pairs), Fraction(0))
        if all(t.exact is not None for t in self.cusp_tau):
            ex = base - sum((t.exact for t in self.cusp_tau), Fraction(0))
            return EulerNumber(ex, float(ex), 0.0)
        est = float(base) - sum(t.estimate for t in self.cusp_tau)
        return EulerNumber(None, est, sum(t.error for t in self.cusp_tau))

    def to_record(self) -> dict:
        return {
            "genus": self.genus,
            "beta0": self.beta0,
            "pairs": [[a, b] for a, b in self.pairs],
            "cusp_tau_dec": [str(t.exact) if t.exact is not None else
                             {"estimate": t.estimate, "error": t.error} for t in self.cusp_tau],
            "euler": str(self.euler),
        }


@dataclass(frozen=True, eq=False)
class NormalizedLifts:
    d: tuple
    c: tuple
    d_tau: tuple          # Fractions beta_i/alpha_i
    c_tau: tuple          # TranslationNumbers in [0, 1)


def normalized_lifts(rep: RepresentationSpec, tol: float = 1e-6) -> NormalizedLifts:
    d_lifts, d_tau, c_lifts, c_tau = [], [], [], []
    for alpha, f in zip(rep.signature.cone_orders, rep.d):
        r = translation_number_finite_order(f, alpha, tol)
        n = math.floor(r)
        d_lifts.append(compose(rotation(-n), f))
        d_tau.append(r - n)
    for f in rep.c:
        tn = translation_number(f)
        if tn.exact is not None:
            n = math.floor(tn.exact)
        else:
            n = math.floor(tn.lower)
            if math.floor(tn.upper) != n:
                from .circle import AmbiguousLift
                raise AmbiguousLift(f"cusp translation number {tn} straddles an integer")
        c_lifts.append(compose(rotation(-n), f))
        c_tau.append(tn.shifted(-n))
    return NormalizedLifts(tuple(d_lifts), tuple(c_lifts), tuple(d_tau), tuple(c_tau))


def seifert_data(rep: RepresentationSpec, tol: float = 1e-6) -> SeifertData:
    """Normalised Seifert invariants (g; (1, beta_0), (alpha_i, beta_i)) of rep."""
    check_signature(rep.signature)
    norm = normalized_lifts(rep, tol)
    k = integer_translation(rep.relator_lift(norm.d, norm.c), tol)
    pairs = tuple((a, int(t * a)) for a, t in zip(rep.signature.cone_orders, norm.d_tau))
    return SeifertData(rep.signature.genus, BETA0_SIGN * k, pairs, norm.c_tau, k)


def euler_number(rep: RepresentationSpec, tol: float = 1e-6) -> EulerNumber:
    return seifert_data(rep, tol).euler


# --------------------------------------------------------------------------
# representation families

def fuchsian_rep(pres: LatticePresentation) -> RepresentationSpec:
    """Boundary action of a catalog lattice."""
    lift = lambda ms: tuple(boundary_lift(m) for m in ms)
    return RepresentationSpec(pres.signature, lift(pres.a), lift(pres.b), lift(pres.d),
                              lift(pres.c), f"fuchsian{pres.signature}")


def reversed_rep(rep: RepresentationSpec) -> RepresentationSpec:
    """Conjugate every generator image by x -> -x."""
    return rep.map_generators(reflect, f"reversed({rep.label})")


def shift_lifts(rep: RepresentationSpec, a_shifts=(), b_shifts=()) -> RepresentationSpec:
    """Replace the lifts of a_i, b_i by integer translates."""
    a = tuple(compose(rotation(int(s)), f) for f, s in zip(rep.a, list(a_shifts) + [0] * rep.signature.genus))
    b = tuple(compose(rotation(int(s)), f) for f, s in zip(rep.b, list(b_shifts) + [0] * rep.signature.genus))
    return RepresentationSpec(rep.signature, a, b, rep.d, rep.c, rep.label)


def rotation_rep(sig: OrbifoldSignature, rng: np.random.Generator,
                 denominator: int = 60) -> RepresentationSpec:
    """Random representation by rational rotations.

    a_i, b_i and all but the last d or c are random rotations; the last one is
    chosen so the relator holds.  Each d_i rotates by a multiple of 1/alpha_i.
    """
    g, cones, m = sig.genus, sig.cone_orders, sig.cusps
    rnd = lambda: Fraction(int(rng.integers(-3 * denominator, 3 * denominator)), denominator)
    a = tuple(rotation(rnd()) for _ in range(g))
    b = tuple(rotation(rnd()) for _ in range(g))
    d = [Fraction(int(rng.integers(0, al)), al) + int(rng.integers(-2, 3)) for al in cones]
    c = [rnd() for _ in range(m)]
    total = sum(d, Fraction(0)) + sum(c, Fraction(0))
    if m:
        c[-1] -= total - round(total)
    else:
        # adjust cone rotations until the sum is an integer, if possible
        target = _closing_cone_choice(cones, rng)
        if target is None:
            d = [Fraction(0)] * len(cones)
        else:
            d = [t + int(rng.integers(-2, 3)) for t in target]
    return RepresentationSpec(sig, a, b, tuple(rotation(x) for x in d),
                              tuple(rotation(x) for x in c), "rotations")


def _closing_cone_choice(cones, rng):
    """Random beta_i/alpha_i with integer sum, or None if only zeros work."""
    choices = []
    for _ in range(200):
        fr = [Fraction(int(rng.integers(0, al)), al) for al in cones]
        if sum(fr, Fraction(0)).denominator == 1:
            choices.append(fr)
            if any(fr):
                return fr
    return choices[0] if choices else None


def conjugate_rep(rep: RepresentationSpec, h: LiftedCircleMap) -> RepresentationSpec:
    """rho'(g) = h^-1 o rho(g) o h, so that h o rho' = rho o h."""
    hinv = inverse(h)
    return rep.map_generators(lambda f: compose(hinv, compose(f, h)), f"conj({rep.label})")


# --------------------------------------------------------------------------
# semiconjugacies

def relation_excursion(sig: OrbifoldSignature) -> int:
    """Half the length of the longest defining relation (surface relator or d^alpha)."""
    rel = 4 * sig.genus + len(sig.cone_orders) + sig.cusps
    return max([math.ceil(rel / 2)] + [math.ceil(a / 2) for a in sig.cone_orders])


class OrbitBlowup:
    """Denjoy-style blow up of one orbit of a representation.

    Every point o = rho(w)(x0) with reduced word length |w| <= ``length`` is
    replaced by a plateau of width eps * ratio^|w|.  ``psi`` collapses the
    plateaus again (it is the collapse map of the gap measure), and
    :meth:`lift` builds rho'(g) with psi o rho'(g) = rho(g) o psi.  Plateaus
    are carried affinely onto the plateau of the image point; a plateau whose
    image point was not blown up collapses to that point.  The relations of
    rho' therefore hold up to about eps * ratio^(length - r + 1), where r is
    half the length of the longest relation (see relation_excursion); the
    default length is r + 2.  Rounding adds about ulp / ratio^r, which is why
    the ratio is not taken smaller.
    """

    def __init__(self, rep: RepresentationSpec, x0: float, length: int | None = None,
                 eps: float = 0.05, ratio: float = 0.02, eta: float = 1e-12,
                 merge_tol: float = 1e-10):
        from .harmonic import CircleMeasure, collapse_map

        if length is None:
            length = relation_excursion(rep.signature) + 2
        self.length, self.eps, self.ratio, self.eta = length, eps, ratio, eta
        gens = rep.symmetric_generators()
        pts, lev = [np.array([float(x0)])], [np.array([0])]
        frontier = pts[0]
        for n in range(1, length + 1):
            frontier = np.concatenate([np.ravel(g(frontier)) for g in gens])
            pts.append(frontier)
            lev.append(np.full(frontier.size, n))
        p = np.mod(np.concatenate(pts), 1.0)
        lv = np.concatenate(lev)
        order = np.lexsort((lv, p))
        p, lv = p[order], lv[order]
        keep = np.concatenate([[True], np.diff(p) > merge_tol])
        # merged points keep the smallest level in their cluster
        group = np.cumsum(keep) - 1
        level = np.full(group[-1] + 1, length + 1)
        np.minimum.at(level, group, lv)
        if abs(p[keep][0] + 1.0 - p[keep][-1]) <= merge_tol and keep.sum() > 1:
            level[0] = min(level[0], level[-1])
            level = level[:-1]
            keep[np.flatnonzero(keep)[-1]] = False
        self.points = p[keep]
        self.levels = level
        self.widths = eps * ratio ** self.levels.astype(float)
        self.gap = float(self.widths.sum())
        if self.gap >= 0.5:
            raise ValueError("plateaus cover too much of the circle; lower eps or ratio")
        before = np.concatenate([[0.0], np.cumsum(self.widths)[:-1]])
        self.starts = (1.0 - self.gap) * self.points + before
        edges = np.concatenate([[0.0], np.ravel(np.column_stack([self.starts, self.starts + self.widths])), [1.0]])
        dens = np.tile([1.0 / (1.0 - self.gap), 0.0], len(self.points))
        dens = np.concatenate([dens, [1.0 / (1.0 - self.gap)]])
        self.psi = collapse_map(CircleMeasure(edges, dens))
        self.merge_tol = merge_tol

    def section(self, x):
        """s(x) = (1 - G) x + (plateau widths below x); smoothed across each
        plateau over a window of half-width eta so images stay continuous."""
        x = np.asarray(x, dtype=float)
        n = np.floor(x)
        r = x - n
        cum = np.concatenate([[0.0], np.cumsum(self.widths)])
        k = np.searchsorted(self.points, r, side="left")
        base = (1.0 - self.gap) * r + cum[k]
        # smoothing window around the nearest orbit point
        j = np.clip(np.searchsorted(self.points, r) - 1, 0, len(self.points) - 1)
        out = base
        for jj in (j, np.minimum(j + 1, len(self.points) - 1)):
            dist = r - self.points[jj]
            inside = np.abs(dist) < self.eta
            frac = np.clip((dist + self.eta) / (2 * self.eta), 0.0, 1.0)
            val = self.starts[jj] + (1.0 - self.gap) * dist + self.widths[jj] * frac
            out = np.where(inside, val, out)
        return out + n

    def _locate(self, x):
        """Index of the orbit point equal to x mod 1, or -1, and the integer part."""
        x = np.asarray(x, dtype=float)
        n = np.floor(x + self.merge_tol)
        r = x - n
        k = np.clip(np.searchsorted(self.points, r), 0, len(self.points) - 1)
        best = np.full(r.shape, -1)
        for kk in (k - 1, k):
            kk = np.mod(kk, len(self.points))
            hit = np.abs(self.points[kk] - r) <= self.merge_tol
            best = np.where(hit & (best < 0), kk, best)
        return best, n

    def lift(self, f: LiftedCircleMap) -> FunctionLift:
        target, shift = self._locate(f(self.points))
        finv = inverse(f)
        return FunctionLift(self._make(f, target, shift), "blowup", True,
                            self._make(finv, *self._locate(finv(self.points))))

    def _make(self, f, target, shift):
        starts, widths = self.starts, self.widths
        npts = len(self.points)

        def g(y):
            y = np.asarray(y, dtype=float)
            n = np.floor(y)
            r = y - n
            k = np.clip(np.searchsorted(starts, r, side="right") - 1, 0, npts - 1)
            on = (r >= starts[k]) & (r < starts[k] + widths[k])
            out = self.section(f(self.psi(y)))
            kt = target[k]
            carried = on & (kt >= 0)
            u = (r - starts[k]) / widths[k]
            moved = starts[kt] + shift[k] + n + u * widths[kt]
            return np.where(carried, moved, out)

        return g


def semiconjugate_deform(rep: RepresentationSpec, monotone_map) -> RepresentationSpec:
    """A representation rho' with m o rho'(g) = rho(g) o m.

    ``monotone_map`` is either an invertible lift (rho' is the conjugate
    m^-1 rho m) or an :class:`OrbitBlowup`, whose collapse map carries the
    section used to build rho'.
    """
    if isinstance(monotone_map, OrbitBlowup):
        return rep.map_generators(monotone_map.lift, f"blowup({rep.label})")
    if isinstance(monotone_map, Rotation) and monotone_map.shift == 0:
        return rep
    if not isinstance(monotone_map, LiftedCircleMap) or not monotone_map.strict:
        raise NonMonotone("non-invertible maps must be supplied as an OrbitBlowup")
    return conjugate_rep(rep, monotone_map)
