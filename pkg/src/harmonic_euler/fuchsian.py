"""
Hyperbolic geometry in the unit disk and a small catalog of explicit lattices.

Matrices are stored in SL(2,R) acting on the upper half plane and moved to
the disk with the Cayley transform z -> (z - i)/(z + i) whenever a disk
picture is needed.  Disk matrices are complex 2x2 arrays of the form
[[u, v], [conj v, conj u]].
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circle import CAYLEY, CAYLEY_INV, MobiusLift, NotFiniteOrder, translation_number_finite_order


class UnsupportedSignature(ValueError):
    pass


class PresentationError(ValueError):
    pass


# --------------------------------------------------------------------------
# disk geometry

def disk_matrix(m) -> np.ndarray:
    return CAYLEY @ np.asarray(m, dtype=float) @ CAYLEY_INV


def plane_matrix(d) -> np.ndarray:
    m = CAYLEY_INV @ np.asarray(d, dtype=complex) @ CAYLEY
    if np.max(np.abs(m.imag)) > 1e-9 * max(1.0, np.max(np.abs(m))):
        raise PresentationError("disk matrix does not come from SL(2,R)")
    return m.real.copy()


def disk_rotation(angle: float) -> np.ndarray:
    """z -> e^{i angle} z, in half-plane form (rotation about i)."""
    h = 0.5 * angle
    return plane_matrix(np.diag([np.exp(1j * h), np.exp(-1j * h)]))


def disk_translation(a: complex) -> np.ndarray:
    """z -> (z + a)/(1 + conj(a) z), moving 0 to a."""
    a = complex(a)
    s = 1.0 / math.sqrt(1.0 - abs(a) ** 2)
    return plane_matrix(s * np.array([[1.0, a], [np.conj(a), 1.0]]))


def rotation_about(p: complex, angle: float) -> np.ndarray:
    """Elliptic element rotating by ``angle`` (counterclockwise) about disk point p."""
    t = disk_translation(p)
    return t @ disk_rotation(angle) @ np.linalg.inv(t)


def act_disk(m, z):
    """Action of a half-plane matrix on disk points."""
    d = disk_matrix(m)
    z = np.asarray(z, dtype=complex)
    return (d[0, 0] * z + d[0, 1]) / (d[1, 0] * z + d[1, 1])


def act_plane(m, z):
    m = np.asarray(m, dtype=float)
    z = np.asarray(z, dtype=complex)
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def to_disk_point(w):
    w = np.asarray(w, dtype=complex)
    return (w - 1j) / (w + 1j)


def to_plane_point(z):
    z = np.asarray(z, dtype=complex)
    return 1j * (1 + z) / (1 - z)


def _check_disk(z):
    if np.any(np.abs(np.asarray(z)) >= 1.0):
        raise ValueError("points must lie in the open unit disk")


def poisson_kernel(z, t):
    """(1 - |z|^2)/|e^{2 pi i t} - z|^2, normalised to mean 1 over a turn."""
    _check_disk(z)
    z = np.asarray(z, dtype=complex)
    e = np.exp(2j * np.pi * np.asarray(t, dtype=float))
    return (1.0 - np.abs(z) ** 2) / np.abs(e - z) ** 2


def poincare_distance(z, w):
    _check_disk(z)
    _check_disk(w)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return 2.0 * np.arctanh(np.abs((z - w) / (1.0 - np.conj(w) * z)))


def vertex_angle(v, p, q):
    """Interior angle at v of the geodesic triangle (v, p, q)."""
    v = np.asarray(v, dtype=complex)
    mp = (p - v) / (1.0 - np.conj(v) * p)
    mq = (q - v) / (1.0 - np.conj(v) * q)
    return np.abs(np.angle(mp / mq))


def hyperbolic_area(triangle) -> float | np.ndarray:
    """Area pi - (sum of angles) of geodesic triangles in the disk.

    ``triangle`` is a length-3 sequence of points, or an (n, 3) array.
    """
    t = np.asarray(triangle, dtype=complex)
    _check_disk(t)
    a, b, c = t[..., 0], t[..., 1], t[..., 2]
    s = vertex_angle(a, b, c) + vertex_angle(b, c, a) + vertex_angle(c, a, b)
    return np.pi - s


# --------------------------------------------------------------------------
# signatures

@dataclass(frozen=True)
class OrbifoldSignature:
    genus: int
    cone_orders: tuple = ()
    cusps: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cone_orders", tuple(int(a) for a in self.cone_orders))
        if self.genus < 0 or self.cusps < 0:
            raise ValueError("genus and cusps must be non-negative")
        if any(a < 2 for a in self.cone_orders):
            raise ValueError("cone orders must be >= 2")

    @property
    def chi(self) -> Fraction:
        return chi_orb(self)

    @property
    def is_hyperbolic(self) -> bool:
        return self.chi < 0

    def __str__(self):
        return f"({self.genus}; {list(self.cone_orders)}; {self.cusps})"


def chi_orb(sig: OrbifoldSignature) -> Fraction:
    """2 - 2g - m - sum (alpha_i - 1)/alpha_i."""
    return (Fraction(2 - 2 * sig.genus - sig.cusps)
            - sum((Fraction(a - 1, a) for a in sig.cone_orders), Fraction(0)))


# --------------------------------------------------------------------------
# presentations

def boundary_lift(matrix, branch: int = 0) -> MobiusLift:
    """Boundary circle action of a half-plane matrix, canonical branch f(0) in [0,1)."""
    return MobiusLift(np.asarray(matrix, dtype=float), branch)


def mirror(m) -> np.ndarray:
    """Conjugate by the reflection z -> -conj(z) of the half plane."""
    m = np.asarray(m, dtype=float)
    return np.array([[m[0, 0], -m[0, 1]], [-m[1, 0], m[1, 1]]])


def commutator(a, b) -> np.ndarray:
    return a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)


def projective_residual(m) -> float:
    """Distance of m from +I or -I."""
    m = np.asarray(m, dtype=float)
    eye = np.eye(2)
    return float(min(np.max(np.abs(m - eye)), np.max(np.abs(m + eye))))


@dataclass(frozen=True)
class FundamentalPolygon:
    """A fundamental polygon in the disk.

    ``kinds[k]`` is ("regular",), ("cone", i) or ("cusp", j) for vertex k.
    Cusp vertices lie on the unit circle.  ``base_point`` is an interior
    regular point around which a small disk is removed.
    """

    vertices: tuple
    kinds: tuple
    base_point: complex = 0j


@dataclass(frozen=True, eq=False)
class LatticePresentation:
    signature: OrbifoldSignature
    a: tuple = ()
    b: tuple = ()
    d: tuple = ()
    c: tuple = ()
    status: str = "catalog"
    polygon: FundamentalPolygon | None = None

    @property
    def generators(self) -> dict:
        out = {}
        for name, mats in (("a", self.a), ("b", self.b), ("d", self.d), ("c", self.c)):
            for k, m in enumerate(mats, start=1):
                out[f"{name}{k}"] = np.asarray(m, dtype=float)
        return out

    def relator(self) -> np.ndarray:
        m = np.eye(2)
        for ai, bi in zip(self.a, self.b):
            m = m @ commutator(np.asarray(ai), np.asarray(bi))
        for x in tuple(self.d) + tuple(self.c):
            m = m @ np.asarray(x)
        return m

    def relator_residual(self) -> float:
        return projective_residual(self.relator())

    def trace_report(self) -> dict:
        out = {}
        for k, (alpha, m) in enumerate(zip(self.signature.cone_orders, self.d), start=1):
            out[f"d{k}"] = abs(abs(np.trace(m)) - 2 * math.cos(math.pi / alpha))
        for k, m in enumerate(self.c, start=1):
            out[f"c{k}"] = abs(abs(np.trace(m)) - 2.0)
        return out


def rotation_fraction(matrix, alpha: int) -> Fraction:
    """tau_dec of the boundary lift of an elliptic element of order alpha."""
    f = boundary_lift(matrix)
    return translation_number_finite_order(f, alpha) % 1


def _clockwise(matrix, alpha: int) -> bool:
    try:
        return rotation_fraction(matrix, alpha) == Fraction(alpha - 1, alpha)
    except NotFiniteOrder:
        return False


def surface_group(genus: int) -> LatticePresentation:
    """Side pairings of the regular 4g-gon with all angles 2 pi/(4g)."""
    if genus < 2:
        raise UnsupportedSignature("closed surface groups need genus >= 2")
    n = 4 * genus
    r_mid = math.acosh(1.0 / math.tan(math.pi / n))
    r_vert = math.acosh(1.0 / math.tan(math.pi / n) ** 2)
    m0 = math.tanh(r_mid / 2)
    half_turn = rotation_about(m0, math.pi)

    def pairing(i, j):
        # maps side j onto side i, with the polygon landing across side i
        return disk_rotation(2 * math.pi * i / n) @ half_turn @ disk_rotation(-2 * math.pi * j / n)

    rv = math.tanh(r_vert / 2)
    verts = tuple(complex(rv * np.exp(1j * (2 * math.pi * k / n + math.pi / n))) for k in range(n))
    poly = FundamentalPolygon(verts, tuple(("regular",) for _ in range(n)), 0j)
    base = []
    for k in range(genus):
        base.append((pairing(4 * k, 4 * k + 2), pairing(4 * k + 1, 4 * k + 3)))
    for flips in itertools.product((False, True), repeat=2 * genus):
        a, b = [], []
        for k, (ak, bk) in enumerate(base):
            a.append(np.linalg.inv(ak) if flips[2 * k] else ak)
            b.append(np.linalg.inv(bk) if flips[2 * k + 1] else bk)
        # The mirror image (conjugation by z -> -conj z) is the orientation
        # whose boundary action has Euler number chi_orb under the conventions
        # shared with the cone-point entries (see the calibration tests).
        a, b = [mirror(x) for x in a], [mirror(x) for x in b]
        pres = LatticePresentation(OrbifoldSignature(genus), tuple(a), tuple(b), (), (),
                                   "catalog", poly)
        if pres.relator_residual() < 1e-9:
            return pres
    raise PresentationError("no side pairing choice satisfies the relator")


def modular_group() -> LatticePresentation:
    """(0; 2, 3; 1 cusp): d1 = S, d2 of order 3, c parabolic, d1 d2 c = 1."""
    s = np.array([[0.0, -1.0], [1.0, 0.0]])
    t = np.array([[1.0, 1.0], [0.0, 1.0]])
    w = np.exp(2j * np.pi / 3)
    verts_plane = [w, 1j, w + 1]
    for d2 in (s @ t, np.linalg.inv(s @ t), t @ s, np.linalg.inv(t @ s)):
        if not _clockwise(d2, 3):
            continue
        c = np.linalg.inv(s @ d2)
        if abs(abs(np.trace(c)) - 2.0) > 1e-12:
            continue
        # label polygon vertices by which generator fixes them
        fixed2 = _fixed_point_plane(d2)
        kinds = []
        for v in verts_plane:
            if abs(v - 1j) < 1e-12:
                kinds.append(("cone", 0))
            elif abs(v - fixed2) < 1e-9 or abs(act_plane(t, fixed2) - v) < 1e-9 \
                    or abs(act_plane(np.linalg.inv(t), fixed2) - v) < 1e-9:
                kinds.append(("cone", 1))
            else:
                raise PresentationError("unexpected vertex in modular domain")
        verts = tuple(complex(to_disk_point(v)) for v in verts_plane) + (1.0 + 0j,)
        kinds.append(("cusp", 0))
        poly = FundamentalPolygon(verts, tuple(kinds), complex(to_disk_point(2j)))
        return LatticePresentation(OrbifoldSignature(0, (2, 3), 1), (), (), (s, d2), (c,),
                                   "catalog", poly)
    raise PresentationError("no clockwise order-3 generator found")


def _fixed_point_plane(m) -> complex:
    """Fixed point in the upper half plane of an elliptic matrix."""
    a, b, c, d = np.asarray(m, dtype=float).ravel()
    disc = complex((d - a) ** 2 + 4 * b * c)
    roots = [((a - d) + s * np.sqrt(disc)) / (2 * c) for s in (1, -1)]
    return complex(max(roots, key=lambda r: r.imag))


def triangle_group(p: int, q: int, r: int) -> LatticePresentation:
    """(0; p, q, r) with 1/p + 1/q + 1/r < 1, generated by vertex rotations."""
    if Fraction(1, p) + Fraction(1, q) + Fraction(1, r) >= 1:
        raise UnsupportedSignature("triangle group is not hyperbolic")
    al, be, ga = math.pi / p, math.pi / q, math.pi / r
    side_pq = math.acosh((math.cos(ga) + math.cos(al) * math.cos(be)) / (math.sin(al) * math.sin(be)))
    side_pr = math.acosh((math.cos(be) + math.cos(al) * math.cos(ga)) / (math.sin(al) * math.sin(ga)))
    for sgn in (1.0, -1.0):
        P = 0j
        Q = sgn * math.tanh(side_pq / 2) + 0j
        x = rotation_about(P, -2 * al)
        y = rotation_about(Q, -2 * be)
        z = np.linalg.inv(x @ y)
        if abs(abs(np.trace(z)) - 2 * math.cos(ga)) > 1e-9 or not _clockwise(z, r):
            continue
        if not (_clockwise(x, p) and _clockwise(y, q)):
            continue
        rr = math.tanh(side_pr / 2)
        R1 = complex(sgn * rr * np.exp(1j * al))
        R2 = complex(sgn * rr * np.exp(-1j * al))
        verts = (P, R1, Q, R2)
        kinds = (("cone", 0), ("cone", 2), ("cone", 1), ("cone", 2))
        x_, y_ = np.real(verts), np.imag(verts)
        if np.sum(x_ * np.roll(y_, -1) - np.roll(x_, -1) * y_) < 0:
            verts = (P, R2, Q, R1)
        # base point: a regular point inside the quadrilateral
        base = complex(0.5 * Q)
        poly = FundamentalPolygon(verts, kinds, base)
        return LatticePresentation(OrbifoldSignature(0, (p, q, r), 0), (), (), (x, y, z), (),
                                   "catalog", poly)
    raise PresentationError("triangle group construction failed")


def one_cone_torus_trace(s: float) -> float:
    a = np.diag([math.exp(s), math.exp(-s)])
    b = np.array([[math.cosh(s), math.sinh(s)], [math.sinh(s), math.cosh(s)]])
    return float(np.trace(commutator(a, b)))


def one_cone_torus(alpha: int) -> LatticePresentation:
    """(1; [alpha]; 0): hyperbolic A, B with tr[A, B] = -2 cos(pi/alpha), d = [A, B]^-1.

    Both generators have the same translation length 2s; s is found by a
    bracketed root solve of the commutator trace.
    """
    from scipy.optimize import brentq

    target = -2.0 * math.cos(math.pi / alpha)
    s = brentq(lambda u: one_cone_torus_trace(u) - target, 1e-6, 5.0, xtol=1e-15, rtol=1e-15)
    a = np.diag([math.exp(s), math.exp(-s)])
    b = np.array([[math.cosh(s), math.sinh(s)], [math.sinh(s), math.cosh(s)]])
    # for alpha >= 3 only the order (b, a) makes d rotate clockwise; alpha = 2
    # uses the same order so the family is continuous in alpha
    for x, y in ((b, a), (a, b)):
        d = np.linalg.inv(commutator(x, y))
        if _clockwise(d, alpha):
            return LatticePresentation(OrbifoldSignature(1, (alpha,), 0), (x,), (y,), (d,), (),
                                       "relator-exact, discreteness unverified", None)
    raise PresentationError("no clockwise cone generator for the one-cone torus")


def catalog(sig: OrbifoldSignature) -> LatticePresentation:
    g, cones, m = sig.genus, tuple(sig.cone_orders), sig.cusps
    if not cones and m == 0 and g >= 2:
        return surface_group(g)
    if g == 0 and sorted(cones) == [2, 3] and m == 1 and cones == (2, 3):
        return modular_group()
    if g == 0 and len(cones) == 3 and m == 0:
        return triangle_group(*cones)
    if g == 1 and len(cones) == 1 and m == 0:
        return one_cone_torus(cones[0])
    raise UnsupportedSignature(f"no catalog entry for signature {sig}")


# --------------------------------------------------------------------------
# presentation files

def presentation_to_record(pres: LatticePresentation) -> dict:
    sig = pres.signature
    return {
        "signature": {"genus": sig.genus, "cone_orders": list(sig.cone_orders), "cusps": sig.cusps},
        "status": pres.status,
        "generators": {k: [[repr(float(v)) for v in row] for row in m]
                       for k, m in pres.generators.items()},
    }


def presentation_from_record(rec: dict) -> LatticePresentation:
    s = rec["signature"]
    sig = OrbifoldSignature(int(s["genus"]), tuple(s.get("cone_orders", ())), int(s.get("cusps", 0)))
    gens = {k: np.array([[float(v) for v in row] for row in m]) for k, m in rec["generators"].items()}

    def collect(prefix, count):
        try:
            return tuple(gens[f"{prefix}{k}"] for k in range(1, count + 1))
        except KeyError as exc:
            raise PresentationError(f"missing generator {exc.args[0]}") from None

    pres = LatticePresentation(sig, collect("a", sig.genus), collect("b", sig.genus),
                               collect("d", len(sig.cone_orders)), collect("c", sig.cusps),
                               rec.get("status", "user supplied"), None)
    for name, m in pres.generators.items():
        if abs(np.linalg.det(m) - 1.0) > 1e-9:
            raise PresentationError(f"generator {name} does not have determinant 1")
    return pres


def save_presentation(pres: LatticePresentation, path) -> None:
    with open(path, "w") as fh:
        json.dump(presentation_to_record(pres), fh, indent=2, sort_keys=True)


def load_presentation(path) -> LatticePresentation:
    with open(path) as fh:
        return presentation_from_record(json.load(fh))
