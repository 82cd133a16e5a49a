"""
Harmonic fibre densities over the disk, collapse maps of circle measures,
Harnack diagnostics and Monte Carlo stationary measures.

A family assigns to every disk point z a measure mu_z(dt) = h(z, t) nu(dt)
on the circle (t in turns).  Every family here is a finite combination of
Poisson kernels, so h(., t) is harmonic with a closed form gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circle import PLMap, Rotation, as_pl


class AtomicMeasure(ValueError):
    pass


# --------------------------------------------------------------------------
# circle measures

@dataclass(frozen=True, eq=False)
class CircleMeasure:
    """Atoms plus a step density on [0, 1).

    ``edges`` runs from 0 to 1; ``density[k]`` is the constant density on
    [edges[k], edges[k+1]).  Step densities keep the collapse map exactly PL.
    """

    edges: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))
    density: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    atoms: tuple = ()

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if e.ndim != 1 or d.shape != (len(e) - 1,):
            raise ValueError("density needs one value per cell")
        if abs(e[0]) > 1e-15 or abs(e[-1] - 1.0) > 1e-15 or np.any(np.diff(e) < 0):
            raise ValueError("edges must increase from 0 to 1")
        if np.any(d < 0) or any(m < 0 for _, m in self.atoms):
            raise ValueError("measures are non-negative")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "atoms", tuple((float(p) % 1.0, float(m)) for p, m in self.atoms))

    @property
    def continuous_mass(self) -> float:
        return float(np.sum(self.density * np.diff(self.edges)))

    @property
    def mass(self) -> float:
        return self.continuous_mass + sum(m for _, m in self.atoms)

    def cdf(self, t):
        """mu([0, t)) for the continuous part, extended by t -> t + 1."""
        t = np.asarray(t, dtype=float)
        n = np.floor(t)
        cum = np.concatenate([[0.0], np.cumsum(self.density * np.diff(self.edges))])
        return np.interp(t - n, self.edges, cum) + n * cum[-1]

    def bins(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Masses of n equal bins (atoms included)."""
        grid = np.linspace(0.0, 1.0, n + 1)
        masses = np.diff(self.cdf(grid))
        for p, m in self.atoms:
            masses[min(int(p * n), n - 1)] += m
        return grid, masses

    def to_csv(self, n: int = 256) -> str:
        grid, masses = self.bins(n)
        lines = ["left,right,mass"]
        lines += [f"{float(a)!r},{float(b)!r},{float(m)!r}" for a, b, m in zip(grid[:-1], grid[1:], masses)]
        return "\n".join(lines) + "\n"

    @classmethod
    def lebesgue(cls) -> "CircleMeasure":
        return cls()

    @classmethod
    def point_mass(cls, x: float, mass: float = 1.0) -> "CircleMeasure":
        return cls(np.array([0.0, 1.0]), np.array([0.0]), ((x, mass),))

    @classmethod
    def from_samples(cls, x, bins: int | None = None) -> "CircleMeasure":
        """Empirical measure: atoms at the samples, or a histogram if ``bins``."""
        x = np.mod(np.asarray(x, dtype=float), 1.0)
        if bins is None:
            vals, counts = np.unique(x, return_counts=True)
            return cls(np.array([0.0, 1.0]), np.array([0.0]),
                       tuple(zip(vals.tolist(), (counts / len(x)).tolist())))
        counts, edges = np.histogram(x, bins=bins, range=(0.0, 1.0))
        return cls(edges, counts / len(x) * bins)


def collapse_map(mu: CircleMeasure) -> PLMap:
    """psi(t) = mu([0, t)): monotone degree-one lift pushing mu to Lebesgue."""
    if any(m > 0 for _, m in mu.atoms):
        raise AtomicMeasure("collapse maps need an atomless measure")
    if abs(mu.continuous_mass - 1.0) > 1e-9:
        raise ValueError(f"measure must have total mass 1, got {mu.continuous_mass}")
    keep = np.concatenate([[True], np.diff(mu.edges) > 0])
    xs = mu.edges[keep]
    ys = mu.cdf(xs)
    ys[-1] = 1.0
    return PLMap(xs, ys, allow_flat=True)


def quantile_section(psi: PLMap):
    """Right-continuous section s of psi: psi(s(x)) = x."""
    xs, ys = psi.xs, psi.ys

    def s(x):
        x = np.asarray(x, dtype=float)
        n = np.floor(x - ys[0])
        r = x - n
        k = np.clip(np.searchsorted(ys, r, side="right") - 1, 0, len(ys) - 2)
        dy = ys[k + 1] - ys[k]
        frac = np.where(dy > 0, (r - ys[k]) / np.where(dy > 0, dy, 1.0), 1.0)
        return xs[k] + frac * (xs[k + 1] - xs[k]) + n

    return s


# --------------------------------------------------------------------------
# Poisson kernel building blocks (t and boundary positions in turns)

def _check_z(z):
    if np.any(np.abs(np.asarray(z)) >= 1.0):
        raise ValueError("points must lie in the open unit disk")


def poisson(z, m):
    z = np.asarray(z, dtype=complex)
    e = np.exp(2j * np.pi * np.asarray(m, dtype=float))
    return (1.0 - np.abs(z) ** 2) / np.abs(e - z) ** 2


def poisson_grad(z, m):
    """Gradient (d/dx + i d/dy) of P(z, m) in z = x + iy."""
    z = np.asarray(z, dtype=complex)
    e = np.exp(2j * np.pi * np.asarray(m, dtype=float))
    p = (1.0 - np.abs(z) ** 2) / np.abs(e - z) ** 2
    return p * (-2.0 * z / (1.0 - np.abs(z) ** 2) + 2.0 * (e - z) / np.abs(e - z) ** 2)


def poisson_integral(z, m):
    """int_0^m P(z, s) ds in closed form (continuous in m)."""
    z = complex(z)
    u = np.exp(-2j * np.pi * np.asarray(m, dtype=float))
    return np.asarray(m, dtype=float) + (np.angle(1.0 - z * u) - np.angle(1.0 - z)) / np.pi


def poisson_integral_grad(z, m):
    """Gradient in z of :func:`poisson_integral`."""
    z = complex(z)
    u = np.exp(-2j * np.pi * np.asarray(m, dtype=float))
    w = -u / (1.0 - z * u)
    w0 = -1.0 / (1.0 - z)
    return ((w.imag - w0.imag) + 1j * (w.real - w0.real)) / np.pi


def poisson_integral_inverse(z, target):
    """Solve poisson_integral(z, m) = target for m.

    The integral is the boundary angle (in turns) of the Mobius map
    w -> (w - z)/(1 - conj(z) w), so its inverse comes from the inverse map;
    the integer ambiguity is settled by evaluating, then one Newton step.
    """
    z = complex(z)
    target = np.asarray(target, dtype=float)
    a0 = np.angle((1.0 - z) / (1.0 - np.conj(z))) / (2 * np.pi)
    w = np.exp(2j * np.pi * (target + a0))
    m0 = np.angle((w + z) / (1.0 + np.conj(z) * w)) / (2 * np.pi)
    n = np.round(target - m0)
    best = m0 + n
    err = np.abs(poisson_integral(z, best) - target)
    for dn in (-1.0, 1.0):
        cand = m0 + n + dn
        e = np.abs(poisson_integral(z, cand) - target)
        best = np.where(e < err, cand, best)
        err = np.minimum(e, err)
    best = best - (poisson_integral(z, best) - target) / poisson(z, best)
    return best


# --------------------------------------------------------------------------
# harmonic families

class HarmonicFamily:
    """Fibre densities h(z, t) with respect to a circle measure ``nu``.

    Subclasses give h, its z-gradient, the fibre integral
    phi(z, t) = int_0^t h(z, s) nu(ds), the z-gradient of phi, and the
    inverse of phi(z, .).  ``z`` is a single disk point for the phi methods.
    """

    kind = "abstract"

    def density(self, z, t):
        raise NotImplementedError

    def density_grad(self, z, t):
        raise NotImplementedError

    def grad_log_density(self, z, t):
        return self.density_grad(z, t) / self.density(z, t)

    def phi(self, z, t):
        raise NotImplementedError

    def phi_grad(self, z, t):
        raise NotImplementedError

    def mass(self, z) -> float:
        return float(self.phi(z, 1.0) - self.phi(z, 0.0))

    def phi_inverse(self, z, theta, grid: int = 64):
        """Newton's method started from inverse interpolation on a grid and
        kept inside the grid cell that brackets the root; bisection finishes
        any point where Newton stalls (for instance where h vanishes)."""
        _check_z(z)
        theta = np.asarray(theta, dtype=float)
        mass = self.mass(z)
        n = np.floor(theta / mass)
        r = theta - n * mass
        tg = np.linspace(0.0, 1.0, grid + 1)
        vals = self.phi(z, tg)
        k = np.clip(np.searchsorted(vals, r, side="right") - 1, 0, grid - 1)
        lo, hi = tg[k], tg[k + 1]
        t = np.clip(np.interp(r, vals, tg), lo, hi)
        for _ in range(12):
            f = self.phi(z, t) - r
            h = self.density(z, t)
            lo = np.where(f < 0, t, lo)
            hi = np.where(f > 0, t, hi)
            step = np.where(h > 0, f / np.where(h > 0, h, 1.0), np.inf)
            t = np.where(np.isfinite(step), t - step, 0.5 * (lo + hi))
            t = np.where((t < lo) | (t > hi), 0.5 * (lo + hi), t)
        bad = np.abs(self.phi(z, t) - r) > 1e-13
        if np.any(bad):
            blo, bhi = lo[bad], hi[bad]
            for _ in range(60):
                mid = 0.5 * (blo + bhi)
                below = self.phi(z, mid) < r[bad]
                blo = np.where(below, mid, blo)
                bhi = np.where(below, bhi, mid)
            t[bad] = 0.5 * (blo + bhi)
        return t + n

    def describe(self) -> dict:
        return {"kind": self.kind}


class ConstantFamily(HarmonicFamily):
    """h = 1 against Lebesgue measure: the flat trivial connection."""

    kind = "constant"
    nu = CircleMeasure()

    def density(self, z, t):
        return np.ones(np.broadcast(np.asarray(z), np.asarray(t)).shape)

    def density_grad(self, z, t):
        return np.zeros(np.broadcast(np.asarray(z), np.asarray(t)).shape, dtype=complex)

    def phi(self, z, t):
        return np.asarray(t, dtype=float) + 0.0

    def phi_grad(self, z, t):
        return np.zeros(np.shape(t), dtype=complex)

    def phi_inverse(self, z, theta):
        return np.asarray(theta, dtype=float) + 0.0

    def mass(self, z) -> float:
        return 1.0


def _as_pl_map(m) -> PLMap:
    if m is None:
        return PLMap([0.0, 1.0], [0.0, 1.0])
    if isinstance(m, Rotation):
        s = float(m.shift)
        return PLMap([0.0, 1.0], [s, s + 1.0])
    pl = as_pl(m)
    if pl is None:
        raise TypeError("boundary maps must be PL lifts or rotations")
    return pl


class PoissonFamily(HarmonicFamily):
    """h(z, t) = P(z, m(t)) against nu, for a monotone degree-one PL lift m.

    With nu the collapse data of m (m_* nu = Lebesgue) the fibre mass is 1
    at every z.  On a piece where m has slope b and nu has density c the
    fibre integral is (c/b) times a difference of ``poisson_integral``; on a
    flat piece of m it is c * P * length.
    """

    kind = "poisson"

    def __init__(self, boundary_map=None, nu: CircleMeasure | None = None):
        self.boundary_map = _as_pl_map(boundary_map)
        self.nu = CircleMeasure() if nu is None else nu
        m = self.boundary_map
        knots = np.mod(m.xs, 1.0)
        atom_pos = [p for p, a in self.nu.atoms if a > 0]
        x = np.unique(np.concatenate([[0.0, 1.0], knots, self.nu.edges, atom_pos]))
        x = x[(x >= 0.0) & (x <= 1.0)]
        self.x = x
        self.m = m(x)
        self.slope = np.diff(self.m) / np.diff(x)
        mid = 0.5 * (x[:-1] + x[1:])
        cell = np.clip(np.searchsorted(self.nu.edges, mid, side="right") - 1, 0,
                       len(self.nu.density) - 1)
        self.c = self.nu.density[cell]
        self.atoms = np.zeros(len(x))
        for p, a in self.nu.atoms:
            self.atoms[np.argmin(np.abs(x - p))] += a
        self.atoms[-1] = 0.0
        self._cache = {}

    def describe(self) -> dict:
        return {"kind": self.kind, "pieces": int(len(self.x) - 1)}

    def _map(self, t):
        return self.boundary_map(t)

    def density(self, z, t):
        return poisson(z, self._map(t))

    def density_grad(self, z, t):
        return poisson_grad(z, self._map(t))

    def _nodes(self, z):
        key = complex(z)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        _check_z(z)
        b, c, dx = self.slope, self.c, np.diff(self.x)
        m0, m1 = self.m[:-1], self.m[1:]
        flat = b <= 0
        bsafe = np.where(flat, 1.0, b)
        val = np.where(flat, c * poisson(z, m0) * dx,
                       c / bsafe * (poisson_integral(z, m1) - poisson_integral(z, m0)))
        grd = np.where(flat, c * poisson_grad(z, m0) * dx,
                       c / bsafe * (poisson_integral_grad(z, m1) - poisson_integral_grad(z, m0)))
        jump = self.atoms * poisson(z, self.m)
        jump_g = self.atoms * poisson_grad(z, self.m)
        left = np.zeros(len(self.x))
        left_g = np.zeros(len(self.x), dtype=complex)
        left[1:] = np.cumsum(val + jump[:-1])
        left_g[1:] = np.cumsum(grd + jump_g[:-1])
        out = (left, left + jump, left_g, left_g + jump_g)
        if len(self._cache) > 64:
            self._cache.clear()
        self._cache[key] = out
        return out

    def mass(self, z) -> float:
        left, _, _, _ = self._nodes(z)
        return float(left[-1])

    def _partial(self, z, k, r, grad: bool):
        b, c = self.slope[k], self.c[k]
        m0 = self.m[k]
        mr = m0 + b * (r - self.x[k])
        flat = b <= 0
        bsafe = np.where(flat, 1.0, b)
        if grad:
            return np.where(flat, c * poisson_grad(z, m0) * (r - self.x[k]),
                            c / bsafe * (poisson_integral_grad(z, mr) - poisson_integral_grad(z, m0)))
        return np.where(flat, c * poisson(z, m0) * (r - self.x[k]),
                        c / bsafe * (poisson_integral(z, mr) - poisson_integral(z, m0)))

    def _split(self, t):
        t = np.asarray(t, dtype=float)
        n = np.floor(t)
        r = t - n
        k = np.clip(np.searchsorted(self.x, r, side="right") - 1, 0, len(self.x) - 2)
        return n, r, k

    def phi(self, z, t):
        left, right, _, _ = self._nodes(z)
        n, r, k = self._split(t)
        inner = np.where(r > self.x[k], right[k] + self._partial(z, k, r, False), left[k])
        return inner + n * left[-1]

    def phi_grad(self, z, t):
        _, _, left_g, right_g = self._nodes(z)
        n, r, k = self._split(t)
        inner = np.where(r > self.x[k], right_g[k] + self._partial(z, k, r, True), left_g[k])
        return inner + n * left_g[-1]

    def phi_inverse(self, z, theta):
        left, right, _, _ = self._nodes(z)
        mass = left[-1]
        theta = np.asarray(theta, dtype=float)
        n = np.floor(theta / mass)
        r = theta - n * mass
        k = np.clip(np.searchsorted(left, r, side="right") - 1, 0, len(self.x) - 2)
        s = r - right[k]
        b, c, m0 = self.slope[k], self.c[k], self.m[k]
        flat = b <= 0
        live = c > 0
        csafe = np.where(live, c, 1.0)
        bsafe = np.where(flat, 1.0, b)
        target = poisson_integral(z, m0) + s * bsafe / csafe
        mm = poisson_integral_inverse(z, target)
        x_slope = self.x[k] + (mm - m0) / bsafe
        x_flat = self.x[k] + s / (csafe * poisson(z, m0))
        x = np.where(flat, x_flat, x_slope)
        x = np.where((s <= 0) | ~live, self.x[k], x)
        x = np.clip(x, self.x[k], self.x[k + 1])
        return x + n


class MixtureFamily(HarmonicFamily):
    """Convex combination of families sharing Lebesgue measure as nu."""

    kind = "mixture"

    def __init__(self, families: Sequence[HarmonicFamily], weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if len(families) != len(w) or len(w) == 0 or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("need matching non-negative weights")
        self.families = tuple(families)
        self.weights = w / w.sum()
        self.nu = CircleMeasure()

    def describe(self) -> dict:
        return {"kind": self.kind, "weights": self.weights.tolist(),
                "components": [f.describe() for f in self.families]}

    def _sum(self, name, *args):
        return sum(w * getattr(f, name)(*args) for w, f in zip(self.weights, self.families))

    def density(self, z, t):
        return self._sum("density", z, t)

    def density_grad(self, z, t):
        return self._sum("density_grad", z, t)

    def phi(self, z, t):
        return self._sum("phi", z, t)

    def phi_grad(self, z, t):
        return self._sum("phi_grad", z, t)

    def mass(self, z) -> float:
        return float(sum(w * f.mass(z) for w, f in zip(self.weights, self.families)))


def poisson_family(boundary_map=None, nu: CircleMeasure | None = None) -> PoissonFamily:
    return PoissonFamily(boundary_map, nu)


class RotatedPoissonMixture(MixtureFamily):
    """h(z, t) = sum w_k P(z, t + s_k), evaluated in closed form."""

    def __init__(self, shifts: Sequence[float], weights: Sequence[float]):
        super().__init__([PoissonFamily(Rotation(float(s))) for s in shifts], weights)
        self.shifts = np.asarray(shifts, dtype=float)

    def _cols(self, z, t):
        """z and t broadcast together, with a trailing axis for the kernels."""
        z, t = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(t, dtype=float))
        return z[..., None], t[..., None] + self.shifts

    def density(self, z, t):
        z, u = self._cols(z, t)
        return poisson(z, u) @ self.weights

    def density_grad(self, z, t):
        z, u = self._cols(z, t)
        return poisson_grad(z, u) @ self.weights

    def phi(self, z, t):
        base = poisson_integral(z, self.shifts) @ self.weights
        return poisson_integral(z, np.asarray(t, dtype=float)[..., None] + self.shifts) @ self.weights - base

    def phi_grad(self, z, t):
        base = poisson_integral_grad(z, self.shifts) @ self.weights
        return poisson_integral_grad(z, np.asarray(t, dtype=float)[..., None] + self.shifts) @ self.weights - base

    def mass(self, z) -> float:
        return 1.0


def rotated_mixture(shifts: Sequence[float], weights: Sequence[float]) -> MixtureFamily:
    """h(z, t) = sum w_k P(z, t + s_k)."""
    if len(shifts) != len(weights):
        raise ValueError("need matching non-negative weights")
    return RotatedPoissonMixture(shifts, weights)


def harnack_norm(family, z, t):
    """((1 - |z|^2)/2) |grad_z log h(z, t)|; at most 1 for positive harmonic h."""
    _check_z(z)
    z = np.asarray(z, dtype=complex)
    return 0.5 * (1.0 - np.abs(z) ** 2) * np.abs(family.grad_log_density(z, t))


def check_harmonic(family, z, t, radius: float, nodes: int = 256) -> float:
    """|mean of h over the circle |w - z| = radius  -  h(z, t)|.

    ``family`` may be a HarmonicFamily or any callable h(z, t).
    """
    z = complex(z)
    if abs(z) + radius >= 1.0:
        raise ValueError("the test circle must lie inside the disk")
    h = family.density if isinstance(family, HarmonicFamily) else family
    w = z + radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    return float(abs(np.mean(h(w, t)) - h(z, t)))


# --------------------------------------------------------------------------
# Monte Carlo stationary measures

MC_BLOCK = 4096


def random_word_endpoints(generators: Sequence, word_length: int, samples: int,
                          seed: int, x0: float = 0.0) -> np.ndarray:
    """Positions w(x0) mod 1 for random words of the given length.

    Steps are uniform over ``generators``.  Samples come in fixed blocks with
    seeds spawned from one SeedSequence, so the output depends only on the
    seed, never on how blocks are scheduled.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    nblocks = -(-samples // MC_BLOCK)
    seqs = np.random.SeedSequence(seed).spawn(nblocks)
    out = []
    for b, ss in enumerate(seqs):
        size = min(MC_BLOCK, samples - b * MC_BLOCK)
        rng = np.random.default_rng(ss)
        steps = rng.integers(0, len(generators), size=(word_length, size))
        x = np.full(size, float(x0))
        for row in steps:
            for gi, g in enumerate(generators):
                sel = row == gi
                if np.any(sel):
                    x[sel] = g(x[sel])
            x = np.mod(x, 1.0)
        out.append(x)
    return np.concatenate(out)


def stationary_measure_mc(rep, word_length: int, samples: int, seed: int,
                          x0: float = 0.0) -> CircleMeasure:
    """Empirical law of w(x0) under the symmetric random walk on the generators."""
    x = random_word_endpoints(rep.symmetric_generators(), word_length, samples, seed, x0)
    return CircleMeasure.from_samples(x)


def circle_w1(x, y, wx=None, wy=None) -> float:
    """Wasserstein-1 distance on R/Z between two weighted point clouds.

    Uses W1 = min_c int_0^1 |F(t) - G(t) - c| dt with the minimising c a
    weighted median of F - G.
    """
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    y = np.mod(np.asarray(y, dtype=float), 1.0)
    wx = np.full(x.size, 1.0 / x.size) if wx is None else np.asarray(wx, dtype=float) / np.sum(wx)
    wy = np.full(y.size, 1.0 / y.size) if wy is None else np.asarray(wy, dtype=float) / np.sum(wy)
    pts = np.concatenate([x, y, [0.0, 1.0]])
    wts = np.concatenate([wx, -wy, [0.0, 0.0]])
    order = np.argsort(pts, kind="stable")
    pts, wts = pts[order], wts[order]
    d = np.cumsum(wts)[:-1]
    lengths = np.diff(pts)
    keep = lengths > 0
    d, lengths = d[keep], lengths[keep]
    o = np.argsort(d)
    cum = np.cumsum(lengths[o])
    c = d[o][np.searchsorted(cum, 0.5 * cum[-1])]
    return float(np.sum(np.abs(d - c) * lengths))


def equivariance_defect(rep, x, bootstrap: int = 200, seed: int = 0,
                        level: float = 0.99) -> tuple[float, float]:
    """W1 between the sample measure and the average generator pushforward,
    together with a bootstrap bound for the sampling noise of W1."""
    gens = rep.symmetric_generators()
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    pushed = np.concatenate([np.mod(g(x), 1.0) for g in gens])
    w = circle_w1(x, pushed)
    rng = np.random.default_rng(seed)
    noise = []
    for _ in range(bootstrap):
        a = rng.choice(x, size=x.size, replace=True)
        b = rng.choice(x, size=x.size, replace=True)
        noise.append(circle_w1(a, b))
    return w, float(np.quantile(noise, level))
