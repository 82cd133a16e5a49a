import math

import numpy as np
import pytest

from harmonic_euler import domain as D
from harmonic_euler import fuchsian as F


def test_genus2_area_every_step(presentations):
    for s in (1, 2, 3, 5):
        dom = D.truncated_domain(presentations["genus2"], s)
        assert abs(dom.area - 4 * math.pi) < 1e-4


def test_modular_areas_increase_to_pi_over_3(presentations):
    areas = [D.truncated_domain(presentations["modular"], s).area for s in range(1, 6)]
    assert all(b > a for a, b in zip(areas, areas[1:]))
    gaps = [math.pi / 3 - a for a in areas]
    assert all(g > 0 for g in gaps)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.01


def test_triangle_areas_converge(presentations):
    target = -2 * math.pi * float(F.chi_orb(presentations["triangle237"].signature))
    gaps = [target - D.truncated_domain(presentations["triangle237"], s).area for s in range(1, 6)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_step_zero_rejected(presentations):
    with pytest.raises(ValueError):
        D.truncated_domain(presentations["genus2"], 0)


def test_polygonless_presentation_rejected(presentations):
    with pytest.raises(F.UnsupportedSignature):
        D.truncated_domain(presentations["torus2"], 1)


def test_mesh_sum_matches_boundary_angle_defect(presentations):
    for name in ("genus2", "modular", "triangle237"):
        dom = D.truncated_domain(presentations[name], 2)
        assert dom.area == pytest.approx(D.truncated_area_exact(dom), abs=1e-10)


def test_mesh_resolution_and_radius(presentations):
    dom = D.truncated_domain(presentations["modular"], 3, mesh_res=0.3)
    t = dom.triangles
    sides = np.stack([F.poincare_distance(t[:, i], t[:, (i + 1) % 3]) for i in range(3)], axis=1)
    assert sides.max() <= 0.3 + 1e-12
    assert dom.max_abs <= D.MAX_RADIUS
    assert np.all(dom.areas > 0)


def test_side_pairings_and_cycles(presentations):
    pres = presentations["genus2"]
    verts = np.asarray(pres.polygon.vertices)
    pairs = D.side_pairings(pres, verts)
    assert sorted(p.source for p in pairs.values()) == list(range(8))
    assert D.vertex_cycles(pairs, 8) == [[0, 3, 2, 1, 4, 7, 6, 5]]
    pres = presentations["modular"]
    pairs = D.side_pairings(pres, np.asarray(pres.polygon.vertices))
    assert sorted(map(sorted, D.vertex_cycles(pairs, 4))) == [[0, 2], [1], [3]]


def test_klein_round_trip():
    z = np.array([0.0, 0.3 + 0.4j, -0.9j])
    assert np.allclose(D.to_poincare(D.to_klein(z)), z)


def test_csv_rows(presentations):
    dom = D.truncated_domain(presentations["triangle237"], 1)
    lines = dom.to_csv().strip().split("\n")
    assert lines[0] == "x1,y1,x2,y2,x3,y3,area"
    assert len(lines) == len(dom.triangles) + 1
