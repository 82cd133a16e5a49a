"""
Truncated fundamental domains and their triangle meshes.

The polygon of a catalog lattice is cut near every cone vertex by a small
geodesic polygon of hyperbolic radius r_s, near every cusp by geodesic chords
of a horocycle whose segment inside the polygon has length L_s, and a small
geodesic polygon around a regular base point is removed.  All three radii
halve at every step of the schedule.

Meshing happens in the Klein model, where geodesics are straight segments:
the cut polygon is triangulated by a constrained Delaunay triangulation and
every triangle is bisected across its longest side (at the Klein midpoint)
until its hyperbolic side lengths fall below ``mesh_res``.  Triangle areas come from the angle defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import (LatticePresentation, UnsupportedSignature, act_disk, hyperbolic_area,
                       poincare_distance, to_plane_point)


class MeshFailure(RuntimeError):
    pass


MAX_RADIUS = 0.999


def to_klein(z):
    z = np.asarray(z, dtype=complex)
    return 2 * z / (1 + np.abs(z) ** 2)


def to_poincare(k):
    k = np.asarray(k, dtype=complex)
    return k / (1 + np.sqrt(np.maximum(0.0, 1 - np.abs(k) ** 2)))


def move_to_origin(p, z):
    """Mobius map of the disk sending p to 0."""
    return (z - p) / (1 - np.conj(p) * z)


def move_from_origin(p, w):
    return (w + p) / (1 + np.conj(p) * w)


def geodesic_point(z0, z1, s):
    """Point at parameter s in [0, 1] along the geodesic from z0 to z1
    (linear in the Klein model)."""
    k0, k1 = to_klein(z0), to_klein(z1)
    return to_poincare(k0 + np.asarray(s, dtype=float) * (k1 - k0))


def point_at_distance(v, w, r):
    """Point on the geodesic ray from v towards w at hyperbolic distance r."""
    u = move_to_origin(v, w)
    return complex(move_from_origin(v, math.tanh(r / 2) * u / abs(u)))


def _signed_area(poly):
    x, y = np.real(poly), np.imag(poly)
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


# --------------------------------------------------------------------------
# side pairings and vertex cycles

@dataclass(frozen=True)
class SidePairing:
    """Generator ``name``**``sign`` maps side ``source`` onto side ``target``."""

    target: int
    source: int
    name: str
    sign: int
    matrix: np.ndarray = field(repr=False, compare=False)


def _same_point(a, b, tol=1e-7):
    return abs(complex(a) - complex(b)) < tol


def side_pairings(pres: LatticePresentation, verts) -> dict:
    """For every side k = [V_k, V_k+1] find g with g(side j) = side k, reversed."""
    n = len(verts)
    cands = []
    for name, m in pres.generators.items():
        cands.append((name, 1, m))
        cands.append((name, -1, np.linalg.inv(m)))
    out = {}
    for k in range(n):
        a, b = verts[k], verts[(k + 1) % n]
        for j in range(n):
            if j == k and n > 2:
                continue
            c, d = verts[j], verts[(j + 1) % n]
            for name, sgn, m in cands:
                if _same_point(act_disk(m, d), a) and _same_point(act_disk(m, c), b):
                    out[k] = SidePairing(k, j, name, sgn, m)
                    break
            if k in out:
                break
        if k not in out:
            raise MeshFailure(f"side {k} of the fundamental polygon is not paired by a generator")
    return out


def vertex_cycles(pairings: dict, n: int) -> list[list[int]]:
    """Cycles of polygon vertices; the step k -> source(k) + 1 follows the
    boundary loop around the vertex (incoming side of the next vertex)."""
    seen, cycles = set(), []
    for k in range(n):
        if k in seen:
            continue
        cyc, v = [], k
        while v not in seen:
            seen.add(v)
            cyc.append(v)
            v = (pairings[v].source + 1) % n
        if v != k:
            raise MeshFailure("inconsistent side pairing")
        cycles.append(cyc)
    return cycles


# --------------------------------------------------------------------------
# truncation

@dataclass(frozen=True, eq=False)
class LoopPiece:
    """A geodesic polyline followed (optionally) by a side identification.

    After the last point q the loop continues at g^-1(q) in the polygon,
    where g is the pairing ``jump`` (None for loops inside the chart)."""

    points: np.ndarray
    jump: SidePairing | None = None


@dataclass(frozen=True, eq=False)
class BoundaryLoop:
    kind: str            # "cone", "cusp", "regular" or "base"
    index: int
    pieces: tuple
    vertices: tuple = ()


@dataclass(frozen=True, eq=False)
class TruncatedDomain:
    presentation: LatticePresentation
    step: int
    cone_radius: float
    base_radius: float
    horocycle_length: float
    mesh_res: float
    triangles: np.ndarray        # (n, 3) complex, Poincare disk
    areas: np.ndarray
    centroids: np.ndarray
    outer: np.ndarray            # closed polyline, counterclockwise
    hole: np.ndarray             # closed polyline around the base point, clockwise
    loops: tuple
    pairings: dict = field(repr=False)

    @property
    def area(self) -> float:
        return float(np.sum(self.areas))

    @property
    def max_abs(self) -> float:
        pts = np.concatenate([self.triangles.ravel(), self.outer])
        return float(np.max(np.abs(pts)))

    def to_csv(self) -> str:
        lines = ["x1,y1,x2,y2,x3,y3,area"]
        for tri, a in zip(self.triangles, self.areas):
            vals = [v for z in tri for v in (z.real, z.imag)] + [a]
            lines.append(",".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"


def _corner(verts, kinds, k, r, L, n_arc_unit=math.pi / 12, n_horo=8):
    """Boundary path around vertex k, from side k-1 to side k."""
    n = len(verts)
    v, prev, nxt = verts[k], verts[k - 1], verts[(k + 1) % n]
    kind = kinds[k][0]
    if kind == "regular":
        return np.array([v])
    if kind == "cone":
        a_in = np.angle(move_to_origin(v, prev))
        a_out = np.angle(move_to_origin(v, nxt))
        beta = (a_in - a_out) % (2 * math.pi)
        m = max(2, math.ceil(beta / n_arc_unit))
        ang = a_in - beta * np.linspace(0.0, 1.0, m + 1)
        return move_from_origin(v, math.tanh(r / 2) * np.exp(1j * ang))
    if kind == "cusp":
        frame = lambda z: to_plane_point(np.conj(v) * z)
        unframe = lambda w: v * (w - 1j) / (w + 1j)
        p_in, p_out = frame(prev), frame(nxt)
        x_in, x_out = p_in.real, p_out.real
        width = x_in - x_out
        if width <= 0:
            raise MeshFailure("cusp sides are not ordered as expected")
        height = width / L
        if height <= max(p_in.imag, p_out.imag):
            raise MeshFailure("horocycle truncation does not clear the neighbouring vertices")
        xs = np.linspace(x_in, x_out, n_horo + 1)
        return unframe(xs + 1j * height)
    raise MeshFailure(f"unknown vertex kind {kind}")


def _regular_polygon(center, r, sides):
    ang = 2 * math.pi * np.arange(sides) / sides
    return move_from_origin(center, math.tanh(r / 2) * np.exp(1j * ang))


def truncation_parameters(step: int, cone_radius0: float = 0.4, horocycle_length0: float = 0.25,
                          base_radius0: float = 0.005):
    if step < 1:
        raise ValueError("truncation step must be >= 1 (s = 0 is the empty truncation)")
    f = 2.0 ** (-step)
    return cone_radius0 * f, horocycle_length0 * f, base_radius0 * f


def _klein_side_lengths(tri_k):
    p = to_poincare(tri_k)
    a, b, c = p[:, 0], p[:, 1], p[:, 2]
    return np.stack([poincare_distance(a, b), poincare_distance(b, c), poincare_distance(c, a)], axis=1)


def _refine(tri_k, mesh_res, max_triangles=2_000_000):
    """Bisect triangles (Klein coordinates) across their longest side until
    every hyperbolic side is at most ``mesh_res``."""
    done = []
    todo = tri_k
    total = 0
    while len(todo):
        sides = _klein_side_lengths(todo)
        long_side = sides.max(axis=1) > mesh_res
        done.append(todo[~long_side])
        total += int(np.sum(~long_side))
        big, sides = todo[long_side], sides[long_side]
        if not len(big):
            break
        # rotate so that the longest side is (a, b)
        k = np.argmax(sides, axis=1)
        idx = (k[:, None] + np.arange(3)[None, :]) % 3
        big = np.take_along_axis(big, idx, axis=1)
        a, b, c = big[:, 0], big[:, 1], big[:, 2]
        m = (a + b) / 2
        todo = np.concatenate([np.stack((a, m, c), axis=1), np.stack((m, b, c), axis=1)])
        if total + len(todo) > max_triangles:
            raise MeshFailure("mesh refinement exceeds the triangle budget; increase mesh_res")
    return np.concatenate(done) if done else np.zeros((0, 3), complex)


def _triangulate(outer_k, hole_k):
    import shapely
    from shapely.geometry import Polygon

    ring = [(z.real, z.imag) for z in outer_k]
    hole = [(z.real, z.imag) for z in hole_k]
    poly = Polygon(ring, [hole])
    if not poly.is_valid:
        raise MeshFailure(f"truncated polygon is not simple: {shapely.is_valid_reason(poly)}")
    tris = shapely.get_parts(shapely.constrained_delaunay_triangles(poly))
    out = np.empty((len(tris), 3), dtype=complex)
    for i, t in enumerate(tris):
        xy = np.asarray(t.exterior.coords)[:3]
        out[i] = xy[:, 0] + 1j * xy[:, 1]
    covered = np.sum(np.abs(_signed_area_rows(out)))
    if abs(covered - poly.area) > 1e-9 * max(1.0, poly.area):
        raise MeshFailure("triangulation does not cover the truncated polygon")
    return out


def _signed_area_rows(tri):
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    return 0.5 * np.imag(np.conj(b - a) * (c - a))


def _dedupe(path, tol=1e-13):
    keep = [path[0]]
    for z in path[1:]:
        if abs(z - keep[-1]) > tol:
            keep.append(z)
    if len(keep) > 1 and abs(keep[0] - keep[-1]) <= tol:
        keep.pop()
    return np.array(keep)


def truncated_domain(pres: LatticePresentation, step: int, mesh_res: float = 0.25,
                     cone_radius0: float | None = None, horocycle_length0: float = 0.25,
                     base_radius0: float = 0.005, base_sides: int = 16) -> TruncatedDomain:
    """Cut the fundamental polygon of ``pres`` at truncation step ``step``
    and mesh it.  The base point is enclosed by a small removed polygon."""
    if pres.polygon is None:
        raise UnsupportedSignature(
            f"no fundamental polygon is available for {pres.signature}; "
            "curvature integrals need one of the polygon catalog entries")
    poly = pres.polygon
    verts = np.asarray(poly.vertices, dtype=complex)
    kinds = poly.kinds
    n = len(verts)
    if cone_radius0 is None:
        nxt = np.roll(verts, -1)
        inside = (np.abs(verts) < 1 - 1e-12) & (np.abs(nxt) < 1 - 1e-12)
        finite = poincare_distance(verts[inside], nxt[inside])
        cone_radius0 = min(0.4, 0.5 * float(finite.min())) if len(finite) else 0.4
    r, L, rb = truncation_parameters(step, cone_radius0, horocycle_length0, base_radius0)
    if _signed_area(verts) <= 0:
        raise MeshFailure("fundamental polygon must be counterclockwise")
    pairings = side_pairings(pres, verts)
    cycles = vertex_cycles(pairings, n)

    corners = [_corner(verts, kinds, k, r, L) for k in range(n)]
    outer = _dedupe(np.concatenate(corners))
    if np.max(np.abs(outer)) > MAX_RADIUS:
        raise MeshFailure("truncated polygon reaches beyond |z| = %.3f; use a coarser step" % MAX_RADIUS)
    base = complex(poly.base_point)
    hole = _regular_polygon(base, rb, base_sides)[::-1]     # clockwise

    tri_k = _refine(_triangulate(to_klein(outer), to_klein(hole)), mesh_res)
    tri_k = np.where((_signed_area_rows(tri_k) < 0)[:, None], tri_k[:, ::-1], tri_k)
    tris = to_poincare(tri_k)
    areas = np.asarray(hyperbolic_area(tris), dtype=float)
    cents = to_poincare(tri_k.mean(axis=1))

    loops = []
    for idx, cyc in enumerate(cycles):
        kind = kinds[cyc[0]][0]
        if kind == "cusp" and len(cyc) > 1:
            raise UnsupportedSignature("cusp cycles with several polygon vertices are not supported")
        pieces = tuple(LoopPiece(corners[k], pairings[k]) for k in cyc)
        label = kinds[cyc[0]][1] if len(kinds[cyc[0]]) > 1 else idx
        loops.append(BoundaryLoop(kind, label, pieces, tuple(cyc)))
    loops.append(BoundaryLoop("base", 0, (LoopPiece(np.append(hole[::-1], hole[-1]), None),)))
    return TruncatedDomain(pres, step, r, rb, L, mesh_res, tris, areas, cents,
                           np.append(outer, outer[0]), np.append(hole, hole[0]), tuple(loops), pairings)


def truncated_area_exact(dom: TruncatedDomain) -> float:
    """Area of the cut polygon from angle defects of its boundary polylines,
    an independent check of the triangle sum."""
    def polygon_area(p):
        p = p[:-1]
        m = len(p)
        ang = sum(float(vertex_angle_ccw(p[i], p[(i + 1) % m], p[i - 1])) for i in range(m))
        return (m - 2) * math.pi - ang
    return polygon_area(dom.outer) - polygon_area(dom.hole[::-1])


def vertex_angle_ccw(v, nxt, prev):
    """Interior angle at v of a counterclockwise polygon (may exceed pi)."""
    a = np.angle(move_to_origin(v, nxt))
    b = np.angle(move_to_origin(v, prev))
    return (b - a) % (2 * math.pi)
