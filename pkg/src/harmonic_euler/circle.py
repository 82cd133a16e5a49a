"""
Lifts of orientation preserving circle homeomorphisms to the real line.

All angles are measured in turns, so a lift f satisfies f(x + 1) = f(x) + 1.
Four concrete kinds are provided:

    Rotation      x -> x + theta
    MobiusLift    boundary action of an SL(2,R) matrix on the unit disk
    PLMap         piecewise linear lift given by breakpoints over one period
    Composition   an ordered product, maps[0] applied last

Translation numbers are certified in two ways: iterating gives an estimate
with error < 1/n, and a rational candidate p/q is accepted when the
displacement range of f^q provably contains the integer p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


class CircleMapError(ValueError):
    pass


class NonMonotone(CircleMapError):
    pass


class NotFiniteOrder(CircleMapError):
    pass


class AmbiguousLift(CircleMapError):
    pass


# Cayley transform z -> (z - i)/(z + i), upper half plane to disk.
CAYLEY = np.array([[1.0, -1.0j], [1.0, 1.0j]])
CAYLEY_INV = np.array([[1.0j, 1.0j], [-1.0, 1.0]]) / 2.0j


def to_disk(matrix) -> tuple[complex, complex]:
    """Return (u, v) with C M C^-1 = [[u, v], [conj v, conj u]]."""
    m = np.asarray(matrix, dtype=float).reshape(2, 2)
    d = CAYLEY @ m @ CAYLEY_INV
    return complex(d[0, 0]), complex(d[0, 1])


def from_disk(u: complex, v: complex) -> np.ndarray:
    d = np.array([[u, v], [np.conj(v), np.conj(u)]])
    m = CAYLEY_INV @ d @ CAYLEY
    return np.real(m)


class LiftedCircleMap:
    """Base class; subclasses implement ``__call__`` on float arrays."""

    def __call__(self, x):
        raise NotImplementedError

    @property
    def strict(self) -> bool:
        return True


@dataclass(frozen=True)
class Rotation(LiftedCircleMap):
    shift: Fraction | float = Fraction(0)

    def __call__(self, x):
        return np.asarray(x, dtype=float) + float(self.shift)

    @property
    def is_integer(self) -> bool:
        return float(self.shift).is_integer()


IDENTITY = Rotation(Fraction(0))


def rotation(theta) -> Rotation:
    if isinstance(theta, int):
        theta = Fraction(theta)
    return Rotation(theta)


@dataclass(frozen=True, eq=False)
class MobiusLift(LiftedCircleMap):
    """Lift of the boundary action of ``matrix`` (half-plane SL(2,R) form).

    ``branch = 0`` is the canonical lift with f(0) in [0, 1).
    """

    matrix: tuple
    branch: int = 0
    _u: complex = field(init=False, repr=False)
    _v: complex = field(init=False, repr=False)
    _offset: float = field(init=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(2, 2)
        det = float(np.linalg.det(m))
        if abs(det - 1.0) > 1e-8:
            raise CircleMapError(f"matrix determinant {det} != 1")
        object.__setattr__(self, "matrix", tuple(map(tuple, m.tolist())))
        u, v = to_disk(m)
        object.__setattr__(self, "_u", u)
        object.__setattr__(self, "_v", v)
        raw0 = self._raw(np.zeros(1))[0]
        object.__setattr__(self, "_offset", -math.floor(raw0))
        # guard the floor against rounding right at an integer
        if raw0 + self._offset >= 1.0:
            object.__setattr__(self, "_offset", self._offset - 1)

    def _raw(self, x):
        x = np.asarray(x, dtype=float)
        w = np.exp(-2j * np.pi * x)
        a = np.angle(self._u) + np.angle(1.0 + (self._v / self._u) * w)
        return x + a / np.pi

    def __call__(self, x):
        return self._raw(x) + (self._offset + self.branch)

    @property
    def disk(self) -> tuple[complex, complex]:
        return self._u, self._v

    @property
    def trace(self) -> float:
        m = self.matrix
        return m[0][0] + m[1][1]

    def __eq__(self, other):
        return (isinstance(other, MobiusLift) and self.branch == other.branch
                and np.allclose(self.matrix, other.matrix, atol=1e-12))

    def __hash__(self):
        return hash((self.branch, tuple(np.round(np.ravel(self.matrix), 9))))


@dataclass(frozen=True, eq=False)
class PLMap(LiftedCircleMap):
    """Piecewise linear lift with knots (xs[k], ys[k]), xs[-1] = xs[0] + 1.

    Flat pieces are allowed only with ``allow_flat`` (collapse maps); such a
    map is monotone but not invertible.
    """

    xs: np.ndarray
    ys: np.ndarray
    allow_flat: bool = False

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
            raise CircleMapError("breakpoints must be two equal 1-d arrays")
        if not math.isclose(xs[-1] - xs[0], 1.0, abs_tol=1e-12):
            raise CircleMapError("breakpoints must cover exactly one period")
        if not math.isclose(ys[-1] - ys[0], 1.0, abs_tol=1e-9):
            raise NonMonotone("lift must satisfy f(x + 1) = f(x) + 1")
        xs[-1] = xs[0] + 1.0
        ys[-1] = ys[0] + 1.0
        dx, dy = np.diff(xs), np.diff(ys)
        if np.any(dx <= 0):
            raise CircleMapError("breakpoint abscissae must increase")
        if np.any(dy < 0) or (not self.allow_flat and np.any(dy <= 0)):
            raise NonMonotone("piecewise linear lift is not increasing")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x - self.xs[0])
        return np.interp(x - k, self.xs, self.ys) + k

    def inverse_eval(self, y):
        y = np.asarray(y, dtype=float)
        k = np.floor(y - self.ys[0])
        return np.interp(y - k, self.ys, self.xs) + k

    @property
    def strict(self) -> bool:
        return bool(np.all(np.diff(self.ys) > 0))

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.ys) / np.diff(self.xs)

    def __eq__(self, other):
        return (isinstance(other, PLMap) and self.xs.shape == other.xs.shape
                and np.array_equal(self.xs, other.xs)
                and np.array_equal(self.ys, other.ys))

    def __hash__(self):
        return hash((self.xs.tobytes(), self.ys.tobytes()))


@dataclass(frozen=True)
class Composition(LiftedCircleMap):
    """maps[0] o maps[1] o ... o maps[-1]."""

    maps: tuple

    def __call__(self, x):
        y = np.asarray(x, dtype=float)
        for f in reversed(self.maps):
            y = f(y)
        return y

    @property
    def strict(self) -> bool:
        return all(f.strict for f in self.maps)


@dataclass(frozen=True, eq=False)
class FunctionLift(LiftedCircleMap):
    """Wrap a vectorized callable already known to be a monotone lift."""

    func: Callable
    label: str = "function"
    is_strict: bool = True
    inverse_func: Callable | None = None

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    @property
    def strict(self) -> bool:
        return self.is_strict


def evaluate(f: LiftedCircleMap, x):
    """Evaluate ``f`` at ``x`` (scalar or array, in turns)."""
    y = f(x)
    return float(y) if np.ndim(y) == 0 else y


def identity() -> Rotation:
    return IDENTITY


def _pl_shift(f: PLMap, k: float) -> PLMap:
    return PLMap(f.xs, f.ys + k, f.allow_flat)


def _pl_compose(f: PLMap, g: PLMap) -> PLMap:
    """Exact f o g for piecewise linear lifts."""
    x0 = g.xs[0]
    lo, hi = g.ys[0], g.ys[-1]
    # breakpoints of f translated into [lo, hi)
    shifts = np.arange(math.floor(lo - f.xs[-1]) - 1, math.ceil(hi - f.xs[0]) + 2)
    fb = (f.xs[None, :-1] + shifts[:, None]).ravel()
    fb = fb[(fb > lo) & (fb < hi)]
    if g.strict:
        pre = g.inverse_eval(fb)
    else:
        # on a plateau of g, f o g is constant: any preimage will do
        pre = np.interp(fb, g.ys, g.xs)
    pts = np.unique(np.concatenate([g.xs[:-1], pre]))
    pts = pts[(pts >= x0) & (pts < x0 + 1.0)]
    xs = np.append(pts, x0 + 1.0)
    ys = f(g(xs))
    ys[-1] = ys[0] + 1.0
    # drop knots that coincide after rounding
    keep = np.concatenate([[True], np.diff(xs) > 1e-15])
    xs, ys = xs[keep], ys[keep]
    ys = np.maximum.accumulate(ys)
    return PLMap(xs, ys, allow_flat=f.allow_flat or g.allow_flat or not np.all(np.diff(ys) > 0))


def _flatten(maps) -> list:
    out = []
    for m in maps:
        if isinstance(m, Composition):
            out.extend(m.maps)
        elif isinstance(m, Rotation) and m.shift == 0:
            continue
        else:
            out.append(m)
    return out


def compose(f: LiftedCircleMap, g: LiftedCircleMap) -> LiftedCircleMap:
    """Return f o g, simplified where an exact closed form exists."""
    if isinstance(f, Rotation) and f.shift == 0:
        return g
    if isinstance(g, Rotation) and g.shift == 0:
        return f
    if isinstance(f, Rotation) and isinstance(g, Rotation):
        return Rotation(f.shift + g.shift)
    if isinstance(f, Rotation):
        if isinstance(g, PLMap):
            return _pl_shift(g, float(f.shift))
        if isinstance(g, MobiusLift) and f.is_integer:
            return MobiusLift(g.matrix, g.branch + int(float(f.shift)))
    if isinstance(g, Rotation):
        if isinstance(f, PLMap):
            s = float(g.shift)
            return PLMap(f.xs - s, f.ys, f.allow_flat)
        if isinstance(f, MobiusLift) and g.is_integer:
            return MobiusLift(f.matrix, f.branch + int(float(g.shift)))
    if isinstance(f, PLMap) and isinstance(g, PLMap):
        return _pl_compose(f, g)
    if isinstance(f, MobiusLift) and isinstance(g, MobiusLift):
        m = np.asarray(f.matrix) @ np.asarray(g.matrix)
        h = MobiusLift(tuple(map(tuple, m)))
        target = float(f(g(0.0)))
        return MobiusLift(h.matrix, int(round(target - float(h(0.0)))))
    maps = _flatten([f, g])
    if len(maps) == 1:
        return maps[0]
    return Composition(tuple(maps))


def compose_all(maps: Sequence[LiftedCircleMap]) -> LiftedCircleMap:
    """maps[0] o maps[1] o ... ; the empty product is the identity."""
    out: LiftedCircleMap = IDENTITY
    for m in reversed(list(maps)):
        out = compose(m, out)
    return out


def inverse(f: LiftedCircleMap) -> LiftedCircleMap:
    if isinstance(f, Rotation):
        return Rotation(-f.shift)
    if isinstance(f, PLMap):
        if not f.strict:
            raise NonMonotone("collapse maps have no inverse")
        return PLMap(f.ys, f.xs)
    if isinstance(f, MobiusLift):
        m = np.linalg.inv(np.asarray(f.matrix))
        g = MobiusLift(tuple(map(tuple, m)))
        # g(f(0)) must be 0
        return MobiusLift(g.matrix, int(round(-float(g(f(0.0))))))
    if isinstance(f, Composition):
        return Composition(tuple(inverse(m) for m in reversed(f.maps)))
    if isinstance(f, FunctionLift):
        if f.inverse_func is not None:
            return FunctionLift(f.inverse_func, f"inverse({f.label})", f.is_strict, f.func)
        return FunctionLift(lambda y: _bisect_inverse(f, y), f"inverse({f.label})")
    raise TypeError(type(f))


def _bisect_inverse(f, y, iters: int = 64):
    y = np.asarray(y, dtype=float)
    lo = y - 1.0 - np.abs(f(np.zeros(1))[0]) - 1.0
    hi = y + 1.0 + np.abs(f(np.zeros(1))[0]) + 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = f(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def power(f: LiftedCircleMap, n: int) -> LiftedCircleMap:
    """f^n by repeated squaring."""
    if n == 0:
        return IDENTITY
    if n < 0:
        return power(inverse(f), -n)
    if isinstance(f, Rotation):
        return Rotation(f.shift * n)
    result: LiftedCircleMap = IDENTITY
    base = f
    while n:
        if n & 1:
            result = compose(base, result)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def conjugate(f: LiftedCircleMap, h: LiftedCircleMap) -> LiftedCircleMap:
    """h o f o h^-1."""
    return compose(h, compose(f, inverse(h)))


def reflect(f: LiftedCircleMap) -> LiftedCircleMap:
    """Conjugate by the orientation reversal x -> -x."""
    if isinstance(f, Rotation):
        return Rotation(-f.shift)
    if isinstance(f, PLMap):
        xs, ys = -f.xs[::-1], -f.ys[::-1]
        return PLMap(xs, ys, f.allow_flat)
    if isinstance(f, MobiusLift):
        (a, b), (c, d) = f.matrix
        g = MobiusLift(((a, -b), (-c, d)))
        return MobiusLift(g.matrix, int(round(-float(f(0.0)) - float(g(0.0)))))
    if isinstance(f, Composition):
        return Composition(tuple(reflect(m) for m in f.maps))
    return FunctionLift(lambda x: -f(-np.asarray(x)), f"reflect({getattr(f, 'label', '')})",
                        f.strict)


def translate(k) -> Rotation:
    return rotation(k)


def pl_from_function(func: Callable, n: int = 4096, x0: float = 0.0) -> PLMap:
    """Sample a lift on a uniform grid of ``n`` pieces."""
    xs = x0 + np.linspace(0.0, 1.0, n + 1)
    ys = np.asarray(func(xs), dtype=float)
    ys[-1] = ys[0] + 1.0
    return PLMap(xs, ys)


def random_pl_lift(rng: np.random.Generator, n: int = 8, jitter: float = 0.8,
                   shift: float | None = None) -> PLMap:
    """Random increasing PL lift with ``n`` pieces."""
    xs = np.sort(rng.uniform(0.0, 1.0, n - 1))
    xs = np.concatenate([[0.0], xs, [1.0]])
    w = rng.uniform(1.0 - jitter, 1.0 + jitter, n)
    ys = np.concatenate([[0.0], np.cumsum(w / w.sum())])
    y0 = rng.uniform(-0.5, 0.5) if shift is None else shift
    return PLMap(xs, ys + y0)


# --------------------------------------------------------------------------
# displacement bounds

@dataclass(frozen=True)
class DisplacementInterval:
    """Outer enclosure of the displacement range of a lift.

    The true minimum of f(x) - x lies in [lower, min_attained] and the true
    maximum in [max_attained, upper]; both widths are at most ``tolerance``.
    """

    lower: float
    upper: float
    tolerance: float
    min_attained: float
    max_attained: float

    @property
    def min_enclosure(self) -> tuple[float, float]:
        return self.lower, self.min_attained

    @property
    def max_enclosure(self) -> tuple[float, float]:
        return self.max_attained, self.upper


def as_pl(f: LiftedCircleMap) -> PLMap | None:
    """Exact PL form of ``f`` when it is built from PL maps and rotations."""
    if isinstance(f, PLMap):
        return f
    if isinstance(f, Composition) and all(isinstance(m, (PLMap, Rotation)) for m in f.maps):
        out = compose_all(f.maps)
        return out if isinstance(out, PLMap) else None
    return None


def _bnb_extreme(f, tol: float, sign: float, n0: int, max_rounds: int,
                 target: float = math.inf, max_intervals: int = 1 << 17):
    # maximise sign * (f(x) - x) over one period; returns (attained, bound)
    w = 1.0 / n0
    a = np.arange(n0) * w
    fa, fb = f(a), f(a + w)
    best = float(np.max(sign * np.concatenate([fa - a, fb - a - w])))
    top = math.inf
    done_top = -math.inf
    for _ in range(max_rounds):
        bound = fb - a if sign > 0 else -(fa - a - w)
        top = max(float(np.max(bound)), done_top)
        if top - best <= tol or best >= target:
            break
        live = bound > best + tol
        if np.any(~live & (bound >= best)):
            done_top = max(done_top, float(np.max(bound[~live & (bound >= best)])))
        a = a[live]
        if 2 * a.size > max_intervals:
            break
        w *= 0.5
        a = np.concatenate([a, a + w])
        fa, fb = f(a), f(a + w)
        best = max(best, float(np.max(sign * np.concatenate([fa - a, fb - a - w]))))
    return best, top


def displacement_bounds(f: LiftedCircleMap, tol: float = 1e-9, n0: int = 4096,
                        max_rounds: int = 60) -> DisplacementInterval:
    """Certified enclosure of min and max of f(x) - x.

    Exact for rotations and PL maps (extremes sit at breakpoints). Otherwise a
    branch and bound over subintervals [a, b], using monotonicity:
    f(x) - x lies in [f(a) - b, f(b) - a].
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(f, Rotation):
        s = float(f.shift)
        return DisplacementInterval(s, s, 0.0, s, s)
    if isinstance(f, MobiusLift):
        r = abs(f._v / f._u)
        centre = float(f(0.0)) - float(np.angle(1.0 + f._v / f._u)) / math.pi
        spread = math.asin(min(r, 1.0)) / math.pi
        return DisplacementInterval(centre - spread, centre + spread, 0.0,
                                    centre - spread, centre + spread)
    pl = as_pl(f)
    if pl is not None:
        d = pl.ys - pl.xs
        lo, hi = float(d.min()), float(d.max())
        return DisplacementInterval(lo, hi, 0.0, lo, hi)
    max_att, upper = _bnb_extreme(f, tol, 1.0, n0, max_rounds)
    neg_min_att, neg_lower = _bnb_extreme(f, tol, -1.0, n0, max_rounds)
    return DisplacementInterval(-neg_lower, upper, max(upper - max_att, neg_lower - neg_min_att),
                                -neg_min_att, max_att)


# --------------------------------------------------------------------------
# translation numbers

@dataclass(frozen=True)
class TranslationNumber:
    """tau(f) either as an exact rational or as estimate +- error."""

    estimate: float
    error: float
    exact: Fraction | None = None
    iterations: int = 0

    @property
    def value(self):
        return self.exact if self.exact is not None else self.estimate

    @property
    def lower(self) -> float:
        return float(self.exact) if self.exact is not None else self.estimate - self.error

    @property
    def upper(self) -> float:
        return float(self.exact) if self.exact is not None else self.estimate + self.error

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def certified(self, tol: float) -> bool:
        return self.exact is not None or self.error <= tol

    def shifted(self, k: int) -> "TranslationNumber":
        ex = None if self.exact is None else self.exact + k
        return TranslationNumber(self.estimate + k, self.error, ex, self.iterations)

    def __str__(self):
        if self.exact is not None:
            return str(self.exact)
        return f"{self.estimate:.12g} +- {self.error:.3g}"


@njit(cache=True)
def _pl_orbit(xs, ys, x, n):
    x0 = xs[0]
    m = xs.shape[0]
    for _ in range(n):
        k = math.floor(x - x0)
        r = x - k
        i = np.searchsorted(xs, r, side="right") - 1
        if i > m - 2:
            i = m - 2
        if i < 0:
            i = 0
        t = (r - xs[i]) / (xs[i + 1] - xs[i])
        x = ys[i] + t * (ys[i + 1] - ys[i]) + k
    return x


def orbit_point(f: LiftedCircleMap, x: float, n: int) -> float:
    """f^n(x)."""
    if isinstance(f, Rotation):
        return x + n * float(f.shift)
    pl = as_pl(f)
    if pl is not None:
        return float(_pl_orbit(np.ascontiguousarray(pl.xs), np.ascontiguousarray(pl.ys),
                               float(x), int(n)))
    if isinstance(f, MobiusLift):
        return float(power(f, n)(x))
    y = np.array([float(x)])
    for _ in range(n):
        y = f(y)
    return float(y[0])


def _has_periodic_point(f, p: int, q: int, tol: float) -> bool:
    """True when f^q(x) - x - p changes sign (so tau(f) = p/q)."""
    if isinstance(f, (MobiusLift, Rotation)) or as_pl(f) is not None:
        fq = power(f, q)
        if isinstance(fq, (MobiusLift, Rotation)) or as_pl(fq) is not None:
            db = displacement_bounds(fq)
            return db.min_attained <= p + tol and db.max_attained >= p - tol
    else:
        fq = _iterate_callable(f, q)
    hi, _ = _bnb_extreme(fq, tol / 4, 1.0, 1024, 60, target=p - tol)
    if hi < p - tol:
        return False
    neg_lo, _ = _bnb_extreme(fq, tol / 4, -1.0, 1024, 60, target=-(p + tol))
    return -neg_lo <= p + tol


def _iterate_callable(f, q: int):
    def fq(x):
        y = np.asarray(x, dtype=float)
        for _ in range(q):
            y = f(y)
        return y
    return fq


def _rational_candidates(est: float, err: float, max_q: int):
    seen = set()
    for q in range(1, max_q + 1):
        for p in (math.floor(est * q), math.ceil(est * q)):
            if abs(est - p / q) <= err and Fraction(p, q) not in seen:
                seen.add(Fraction(p, q))
                yield Fraction(p, q)


def translation_number(f: LiftedCircleMap, max_iter: int = 10_000, tol: float = 1e-9,
                       max_q: int = 64, max_candidates: int = 8) -> TranslationNumber:
    """tau(f) = lim f^n(x)/n, in turns.

    The estimate f^n(0)/n has error < 1/n. A rational p/q (q <= max_q) is
    returned exactly when f^q - p is shown to have a zero.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if isinstance(f, Rotation):
        if isinstance(f.shift, Fraction):
            return TranslationNumber(float(f.shift), 0.0, f.shift, 0)
        return TranslationNumber(float(f.shift), 0.0, None, 0)
    tried: set = set()
    n_done, y = 0, 0.0
    for n in sorted({min(max_iter, 1000), max_iter}):
        y = orbit_point(f, y, n - n_done)
        n_done = n
        est, err = y / n, 1.0 / n
        budget = max_candidates
        for c in _rational_candidates(est, err, max_q):
            if c in tried:
                continue
            if budget == 0:
                break
            budget -= 1
            tried.add(c)
            if _has_periodic_point(f, c.numerator, c.denominator, tol):
                return TranslationNumber(float(c), 0.0, c, n)
    return TranslationNumber(est, err, None, n_done)


def translation_number_finite_order(f: LiftedCircleMap, alpha: int,
                                    tol: float = 1e-6, samples: int = 257) -> Fraction:
    """k/alpha when f^alpha is translation by the integer k.

    The integer is read off at 0 and the identity f^alpha(x) = x + k is then
    checked on a uniform grid (exactly, for rotations and Mobius lifts).
    """
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    fa = power(f, alpha)
    k = round(float(fa(0.0)))
    if isinstance(fa, (Rotation, MobiusLift)) or as_pl(fa) is not None:
        db = displacement_bounds(fa, tol=tol / 10)
        dev = max(abs(db.lower - k), abs(db.upper - k))
    else:
        x = np.linspace(0.0, 1.0, samples)
        dev = float(np.max(np.abs(fa(x) - x - k)))
    if dev > tol:
        raise NotFiniteOrder(f"f^{alpha} deviates from translation by {k} by {dev:.3g}")
    return Fraction(k, alpha)


def _integer_part(tn: TranslationNumber) -> int:
    if tn.exact is not None:
        return math.floor(tn.exact)
    lo, hi = math.floor(tn.lower), math.floor(tn.upper)
    if lo != hi:
        raise AmbiguousLift(f"translation number {tn} straddles the integer {hi}")
    return lo


def normalize_lift(f: LiftedCircleMap, tn: TranslationNumber | None = None) -> LiftedCircleMap:
    """Shift ``f`` by an integer so that its translation number lies in [0, 1)."""
    tn = translation_number(f) if tn is None else tn
    n = _integer_part(tn)
    return compose(rotation(-n), f)


def tau_dec(f: LiftedCircleMap, tn: TranslationNumber | None = None) -> TranslationNumber:
    """Fractional part of the translation number of any lift of f."""
    tn = translation_number(f) if tn is None else tn
    return tn.shifted(-_integer_part(tn))


@dataclass(frozen=True)
class TrBounds:
    lower: int
    upper: int
    holds: bool


def translation_integer_bounds(f: LiftedCircleMap, tn: TranslationNumber | None = None,
                               tol: float = 1e-9) -> TrBounds:
    """ceil(max disp) - 1 <= tau(f) <= floor(min disp) + 1.

    Uses attained displacement values, which only weakens the integer bounds,
    so the returned pair is always valid.
    """
    db = displacement_bounds(f, tol=tol)
    tn = translation_number(f) if tn is None else tn
    lo = math.ceil(db.max_attained - 1e-12) - 1
    hi = math.floor(db.min_attained + 1e-12) + 1
    holds = lo <= tn.lower + 1e-12 and tn.upper <= hi + 1e-12
    return TrBounds(lo, hi, holds)


# --------------------------------------------------------------------------
# JSON records

def fraction_to_str(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def parse_number(x):
    """Accept ints, floats or strings such as "3/5"; strings stay exact."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool):
        raise CircleMapError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def to_record(f: LiftedCircleMap) -> dict:
    if isinstance(f, Rotation):
        return {"kind": "rotation", "theta": fraction_to_str(f.shift)}
    if isinstance(f, MobiusLift):
        m = [[float(v) for v in row] for row in np.asarray(f.matrix, dtype=float)]
        return {"kind": "mobius", "matrix": m, "branch": int(f.branch)}
    if isinstance(f, PLMap):
        return {"kind": "pl", "breakpoints": [[float(x), float(y)] for x, y in zip(f.xs, f.ys)]}
    if isinstance(f, Composition):
        return {"kind": "compose", "maps": [to_record(m) for m in f.maps]}
    raise CircleMapError(f"cannot serialise {type(f).__name__}")


def from_record(rec: dict) -> LiftedCircleMap:
    kind = rec.get("kind")
    if kind == "rotation":
        return rotation(parse_number(rec["theta"]))
    if kind == "mobius":
        m = np.array([[float(parse_number(v)) for v in row] for row in rec["matrix"]])
        if m.shape != (2, 2):
            raise CircleMapError("mobius matrix must be 2x2")
        det = float(np.linalg.det(m))
        if abs(det - 1.0) > 1e-8:
            raise CircleMapError(f"mobius matrix must have determinant 1, got {det}")
        return MobiusLift(m, int(rec.get("branch", 0)))
    if kind == "pl":
        pts = np.array([[float(parse_number(v)) for v in p] for p in rec["breakpoints"]])
        return PLMap(pts[:, 0], pts[:, 1])
    if kind == "compose":
        return compose_all([from_record(r) for r in rec["maps"]])
    raise CircleMapError(f"unknown map kind {kind!r}")
