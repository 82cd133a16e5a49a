"""
The averaged circle connection of a harmonic family and its curvature.

A harmonic family gives fibre coordinates theta = phi(z, t), the cumulative
fibre measure.  Horizontal transport for the fibrewise-averaged connection
moves theta by the line integral of A = (A_1, A_2), where A_j(z) is the mean
over theta of omega_j(z, theta) = d phi / d x_j at t = tau(z, theta) and tau is
the inverse of phi(z, .).  All fibre quantities are measured in turns.

The curvature density K(z) is read off from the signed area enclosed by the
curve theta -> (omega_1, omega_2); with the orientation used here a single
Poisson kernel gives K = -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import inverse
from .harmonic import HarmonicFamily

K_SIGN = -1.0


class StepTooCoarse(RuntimeError):
    pass


class ConnectionEvaluator:
    """Fibre quadrature for a harmonic family.

    ``n_theta`` is the starting number of theta nodes; it is doubled until
    the omega-curve area (or the mean connection) changes by less than
    ``theta_tol``.
    """

    def __init__(self, family: HarmonicFamily, n_theta: int = 512, theta_tol: float = 1e-8,
                 max_theta: int = 1 << 14, max_radius: float = 0.999):
        self.family = family
        self.n_theta = int(n_theta)
        self.theta_tol = float(theta_tol)
        self.max_theta = int(max_theta)
        self.max_radius = float(max_radius)

    def _check(self, z):
        z = complex(z)
        if abs(z) > self.max_radius:
            raise ValueError(f"|z| = {abs(z):.6f} exceeds the evaluation radius {self.max_radius}")
        return z

    # Fibre coordinates are centred: theta = phi_0(z, t) - c(z) where phi_0
    # integrates the density from t = 0 and c(z) is the mean of phi_0(z, t) - t
    # over a turn.  The centring is an exact gauge change (it adds a gradient
    # to A), it leaves phi(z, t + 1) - phi(z, t) = 1 intact and makes the
    # coordinates equivariant under rotations about the origin.

    def _fibre(self, z, n):
        """Gauge constant c, its gradient and base-gauge samples on n nodes."""
        theta = np.arange(n) / n
        t = self.family.phi_inverse(z, theta)
        h = self.family.density(z, t)
        grad = self.family.phi_grad(z, t)
        c = float(np.mean((theta - t) / h))
        dc = complex(np.mean(grad / h))
        return c, dc, t, grad

    def gauge(self, z, n=None) -> tuple[float, complex]:
        z = self._check(z)
        n = n or self.n_theta
        prev = None
        while True:
            c, dc, _, _ = self._fibre(z, n)
            if prev is not None and abs(c - prev[0]) + abs(dc - prev[1]) < self.theta_tol:
                return c, dc
            if n >= self.max_theta:
                return c, dc
            prev, n = (c, dc), 2 * n

    def phi(self, z, t):
        z = self._check(z)
        return self.family.phi(z, t) - self.gauge(z)[0]

    def phi_inverse(self, z, theta):
        z = self._check(z)
        return self.family.phi_inverse(z, np.asarray(theta, dtype=float) + self.gauge(z)[0])

    def omega(self, z, theta):
        """(omega_1, omega_2) at fibre coordinates ``theta``, as a complex array."""
        z = self._check(z)
        c, dc = self.gauge(z)
        t = self.family.phi_inverse(z, np.asarray(theta, dtype=float) + c)
        return self.family.phi_grad(z, t) - dc

    def omega_prime(self, z, theta):
        """Theta-derivative of omega, equal to grad log h at t = tau(z, theta)."""
        z = self._check(z)
        t = self.phi_inverse(z, theta)
        return self.family.grad_log_density(z, t)

    def curve_area(self, z, n=None):
        """Signed area (turn units) enclosed by theta -> omega(z, theta)."""
        z = self._check(z)
        n = n or self.n_theta
        prev = None
        while True:
            theta = np.arange(n) / n
            t = self.family.phi_inverse(z, theta)
            w, wp = self.family.phi_grad(z, t), self.family.grad_log_density(z, t)
            w = w - np.mean(w)
            area = 0.5 * float(np.mean(np.imag(np.conj(w) * wp)))
            if prev is not None and abs(area - prev) < self.theta_tol:
                return area
            if n >= self.max_theta:
                return area
            prev, n = area, 2 * n

    def curvature_K(self, z) -> float:
        z = self._check(z)
        return K_SIGN * math.pi * (1 - abs(z) ** 2) ** 2 * self.curve_area(z)

    def average_connection(self, z, n=None) -> tuple[float, float]:
        """(A_1, A_2): theta-average of omega at z."""
        a = self.connection(z, n)
        return a.real, a.imag

    def connection(self, z, n=None) -> complex:
        """A_1 + i A_2 at z."""
        z = self._check(z)
        n = n or self.n_theta
        prev = None
        while True:
            _, dc, _, grad = self._fibre(z, n)
            a = complex(np.mean(grad)) - dc
            if prev is not None and abs(a - prev) < self.theta_tol:
                return a
            if n >= self.max_theta:
                return a
            prev, n = a, 2 * n

    def circle_fit_residual(self, z, n=None) -> float:
        """Relative RMS deviation of the omega-curve from its best-fit circle."""
        n = n or self.n_theta
        w = self.omega(z, np.arange(n) / n)
        a = np.column_stack([w.real, w.imag, np.ones(len(w))])
        rhs = np.abs(w) ** 2
        sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
        c = 0.5 * (sol[0] + 1j * sol[1])
        r2 = sol[2] + abs(c) ** 2
        if r2 <= 0:
            return float("inf")
        r = math.sqrt(r2)
        if r < 1e-300:
            return 0.0
        return float(np.sqrt(np.mean((np.abs(w - c) - r) ** 2)) / r)


# --------------------------------------------------------------------------
# line integrals and holonomy

def _segment(z0, z1, s):
    """Geodesic from z0 to z1 at parameters s in [0, 1] with its s-derivative."""
    w1 = (z1 - z0) / (1 - np.conj(z0) * z1)
    den = 1 + np.conj(z0) * s * w1
    return (s * w1 + z0) / den, w1 * (1 - abs(z0) ** 2) / den ** 2


def _simpson_sum(f, n):
    return float((f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum()) / (3 * n))


def segment_integral(ev: ConnectionEvaluator, z0, z1, steps: int = 8, tol: float = 1e-9,
                     max_steps: int = 1024) -> float:
    """Integral of A_1 dx + A_2 dy along the geodesic segment [z0, z1].

    Composite Simpson with step doubling; the Richardson estimate
    |S_2n - S_n| / 15 must fall below ``tol``."""
    z0, z1 = complex(z0), complex(z1)
    if z0 == z1:
        return 0.0

    def integrand(s):
        z, dz = _segment(z0, z1, s)
        a = np.array([ev.connection(p) for p in np.atleast_1d(z)])
        return np.real(np.conj(a) * dz)

    n = max(2, steps + steps % 2)
    f = integrand(np.linspace(0.0, 1.0, n + 1))
    coarse = _simpson_sum(f, n)
    while True:
        mid = integrand((np.arange(n) + 0.5) / n)
        g = np.empty(2 * n + 1)
        g[0::2], g[1::2] = f, mid
        f, n = g, 2 * n
        fine = _simpson_sum(f, n)
        err = abs(fine - coarse) / 15
        if err < tol:
            return fine + (fine - coarse) / 15
        if n >= max_steps:
            raise StepTooCoarse(f"segment integral not resolved: Richardson estimate {err:.2e} > {tol:.2e}")
        coarse = fine


def holonomy_translation(ev: ConnectionEvaluator, curve, steps: int = 8, tol: float = 1e-9,
                         max_length: float = 0.5) -> float:
    """Fibre displacement (turns) of horizontal transport along a polyline of
    geodesic segments; a closed loop must repeat its first point at the end.
    Segments longer than ``max_length`` (hyperbolic) are integrated piecewise."""
    pts = np.asarray(curve, dtype=complex)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        for p, q in _split_segment(complex(a), complex(b), max_length):
            total += segment_integral(ev, p, q, steps, tol)
    return float(total)


def _split_segment(z0, z1, max_length):
    """Cut a geodesic segment into pieces of hyperbolic length <= max_length."""
    if z0 == z1:
        return []
    w = (z1 - z0) / (1 - np.conj(z0) * z1)
    length = 2 * math.atanh(abs(w))
    m = max(1, math.ceil(length / max_length))
    d = np.tanh(length * np.arange(m + 1) / m / 2) * (w / abs(w))
    pts = (d + z0) / (1 + np.conj(z0) * d)
    pts[0], pts[-1] = z0, z1
    return list(zip(pts[:-1], pts[1:]))


def circle_loop(center, radius: float, sides: int = 64):
    """Counterclockwise geodesic polygon inscribed in the hyperbolic circle."""
    ang = 2 * np.pi * np.arange(sides + 1) / sides
    w = math.tanh(radius / 2) * np.exp(1j * ang)
    return (w + center) / (1 + np.conj(center) * w)


# --------------------------------------------------------------------------
# loops on the truncated orbifold

def generator_lifts(rep) -> dict:
    """Lifts used for side identifications: the representation's lifts of
    a_i, b_i and the normalized lifts of d_i, c_j."""
    from .euler import normalized_lifts

    lifts = dict(rep.generators)
    norm = normalized_lifts(rep)
    for k, f in enumerate(norm.d, start=1):
        lifts[f"d{k}"] = f
    for k, f in enumerate(norm.c, start=1):
        lifts[f"c{k}"] = f
    return lifts


def _jump(ev, lifts, pairing, q, theta):
    """Move (q, theta) from side ``target`` to the paired point on side ``source``."""
    from .fuchsian import act_disk

    f = lifts[pairing.name]
    g_inv = inverse(f) if pairing.sign > 0 else f
    t = ev.phi_inverse(q, theta)
    t2 = float(g_inv(np.array([float(t)]))[0])
    q2 = complex(act_disk(np.linalg.inv(pairing.matrix), q))
    return q2, float(ev.phi(q2, t2))


def loop_holonomy(ev: ConnectionEvaluator, loop, lifts: dict, theta0: float = 0.0,
                  steps: int = 8, tol: float = 1e-9) -> float:
    """Fibre displacement of horizontal transport once around a boundary loop,
    starting from fibre coordinate ``theta0`` at its first point."""
    theta = float(theta0)
    pieces = loop.pieces
    for i, piece in enumerate(pieces):
        pts = np.asarray(piece.points, dtype=complex)
        if len(pts) > 1:
            theta += holonomy_translation(ev, pts, steps, tol)
        if piece.jump is not None:
            q2, theta = _jump(ev, lifts, piece.jump, pts[-1], theta)
            nxt = complex(pieces[(i + 1) % len(pieces)].points[0])
            if abs(q2 - nxt) > 1e-7:
                raise RuntimeError("side identification does not land on the next loop piece")
    return theta - theta0


# --------------------------------------------------------------------------
# curvature fields and the Gauss-Bonnet comparison

def _curvature_chunk(args):
    family, n_theta, theta_tol, pts = args
    ev = ConnectionEvaluator(family, n_theta, theta_tol)
    return [ev.curvature_K(z) for z in pts]


@dataclass(eq=False)
class CurvatureField:
    points: np.ndarray
    K: np.ndarray
    areas: np.ndarray
    omega_samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def integral(self) -> float:
        """(1/2 pi) times the integral of K over the mesh."""
        return float(np.sum(self.K * self.areas) / (2 * math.pi))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.K))) if len(self.K) else 0.0

    def to_csv(self) -> str:
        lines = ["x,y,K,area"]
        for z, k, a in zip(self.points, self.K, self.areas):
            lines.append(f"{float(z.real)!r},{float(z.imag)!r},{float(k)!r},{float(a)!r}")
        return "\n".join(lines) + "\n"


def curvature_field(ev: ConnectionEvaluator, domain, workers: int = 1,
                    omega_nodes: int = 0) -> CurvatureField:
    """K at every triangle centroid of a truncated domain.  With
    ``workers > 1`` the centroids are split into contiguous chunks and
    evaluated in worker processes; the result does not depend on ``workers``."""
    pts = np.asarray(domain.centroids, dtype=complex)
    if workers > 1 and len(pts) > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunks = np.array_split(pts, workers)
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_curvature_chunk,
                             [(ev.family, ev.n_theta, ev.theta_tol, c) for c in chunks])
            K = np.concatenate([np.asarray(p, dtype=float) for p in parts])
    else:
        K = np.array([ev.curvature_K(z) for z in pts], dtype=float)
    samples = None
    if omega_nodes:
        theta = np.arange(omega_nodes) / omega_nodes
        samples = np.array([ev.omega(z, theta) for z in pts])
    return CurvatureField(pts, K, np.asarray(domain.areas, dtype=float), samples)


def _nearest_rep(x: float, lo: float) -> tuple[float, int]:
    """Shift x by an integer into [lo, lo + 1); return the value and the shift."""
    n = -math.floor(x - lo)
    return x + n, n


def extrapolate(values) -> float:
    """Aitken extrapolation of the last three terms of a sequence converging
    geometrically; falls back to the last term."""
    v = [float(x) for x in values]
    if len(v) < 3:
        return v[-1]
    a, b, c = v[-3:]
    den = (c - b) - (b - a)
    if abs(den) < 1e-14 or abs(c - b) >= abs(b - a):
        return c
    return c - (c - b) ** 2 / den


def monotone_toward(values, target) -> bool:
    d = [abs(float(v) - float(target)) for v in values[-3:]]
    return all(x >= y - 1e-12 for x, y in zip(d, d[1:]))


def gauss_bonnet_level(ev: ConnectionEvaluator, domain, lifts: dict, beta0: int,
                       field_: CurvatureField | None = None, steps: int = 8,
                       tol: float = 1e-9) -> dict:
    """Interior curvature integral versus boundary holonomy at one truncation level."""
    cf = field_ or curvature_field(ev, domain)
    interior = cf.integral
    chart = holonomy_translation(ev, domain.outer, steps, tol) + holonomy_translation(ev, domain.hole, steps, tol)
    per_loop = []
    boundary = 0.0
    for loop in domain.loops:
        if loop.kind == "base":
            value = holonomy_translation(ev, loop.pieces[0].points, steps, tol) + beta0
            boundary -= value
        else:
            walk = loop_holonomy(ev, loop, lifts, 0.0, steps, tol)
            if loop.kind == "cone":
                value, _ = _nearest_rep(-walk, 0.0)
                boundary -= value
            elif loop.kind == "cusp":
                value, _ = _nearest_rep(walk, -0.5)
                boundary += value
            else:
                value = walk
        per_loop.append({"kind": loop.kind, "index": int(loop.index), "holonomy": float(value)})
    return {"step": int(domain.step), "area": float(domain.area), "triangles": int(len(domain.triangles)),
            "interior": float(interior), "chart": float(chart), "boundary": float(boundary),
            "stokes_residual": float(abs(interior - chart)), "residual": float(abs(interior - boundary)),
            "max_abs_K": cf.max_abs, "per_loop": per_loop}


def loop_targets(seifert) -> dict:
    """Limits of the per-loop holonomies: beta_0 for the base loop,
    beta_i / alpha_i for cone loops and -tau of the cusp lifts."""
    out = {("base", 0): float(seifert.beta0)}
    for i, (a, b) in enumerate(seifert.pairs):
        out[("cone", i)] = b / a
    for j, t in enumerate(seifert.cusp_tau):
        out[("cusp", j)] = -float(t.value)
    return out


def gauss_bonnet_report(ev: ConnectionEvaluator, domains, seifert, rep, steps: int = 8,
                        tol: float = 1e-9, workers: int = 1) -> dict:
    """Gauss-Bonnet comparison across a truncation schedule.

    ``domains`` is one TruncatedDomain or a sequence of them with increasing
    step.  Returns the level reports, the extrapolated Euler number estimate,
    and per-loop holonomy sequences with their targets and a flag that is
    set when they do not approach the target monotonically over the last
    three levels."""
    from .domain import TruncatedDomain

    if isinstance(domains, TruncatedDomain):
        domains = [domains]
    lifts = generator_lifts(rep)
    levels = [gauss_bonnet_level(ev, d, lifts, seifert.beta0,
                                 curvature_field(ev, d, workers=workers), steps, tol)
              for d in domains]
    interiors = [lv["interior"] for lv in levels]
    exact = seifert.euler
    targets = loop_targets(seifert)
    loops = {}
    for lv in levels:
        for item in lv["per_loop"]:
            loops.setdefault((item["kind"], item["index"]), []).append(item["holonomy"])
    per_loop = []
    non_monotone = False
    for key in sorted(loops, key=lambda k: (k[0], k[1])):
        seq = loops[key]
        target = targets.get(key)
        entry = {"kind": key[0], "index": key[1], "values": seq, "target": target}
        if target is not None:
            mono = monotone_toward(seq, target)
            entry["monotone"] = mono
            entry["error"] = abs(seq[-1] - target)
            non_monotone |= not mono
        per_loop.append(entry)
    e_est = extrapolate(interiors)
    return {
        "levels": levels,
        "interior": interiors[-1],
        "boundary": levels[-1]["boundary"],
        "residual": max(lv["residual"] for lv in levels),
        "stokes_residual": max(lv["stokes_residual"] for lv in levels),
        "euler_estimate": e_est,
        "euler_exact": str(exact.exact) if exact.exact is not None else None,
        "euler_error": abs(e_est - exact.estimate),
        "per_loop": per_loop,
        "non_monotone": non_monotone,
    }
