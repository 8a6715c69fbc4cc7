"""SL2 acting on the projective line, tuple complexes, and the cross-ratio chart.

The chart sends a tuple of distinct points (x0, ..., xn) to
⟨φ(x0,x1,x2)⟩ [φ(x0,x1,x3)/φ(x0,x1,x2), ...], where φ is the three-point
function below; its inverse on representatives is [z1..zm] ↦ (0, ∞, 1, z1..zm).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .fields import FieldError, SquareClass, is_tower, sort_key, square_class
from .squares import GroupRingElement, ONE
from .tower import TowerElement, sqrt_positive

# induced d1 on R_F[Z_1] equals D1_SIGN * lambda1, generator by generator
D1_SIGN = -1

NO_SL2_WITNESS = "NO_SL2_WITNESS"


class ConfigurationError(ValueError):
    pass


class ProjPoint:
    """A point (x : 1) or ∞ = (1 : 0) of the projective line."""

    __slots__ = ("value",)

    def __init__(self, value=None):
        if isinstance(value, int):
            value = Fraction(value)
        object.__setattr__(self, "value", value)

    def __setattr__(self, *_):
        raise AttributeError("ProjPoint is immutable")

    @classmethod
    def from_homogeneous(cls, a, b) -> "ProjPoint":
        if b == 0:
            if a == 0:
                raise ConfigurationError("(0 : 0) is not a projective point")
            return INFINITY
        return cls(a / b)

    @property
    def is_inf(self) -> bool:
        return self.value is None

    def homogeneous(self):
        return (1, 0) if self.value is None else (self.value, 1)

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        if self.value is None or other.value is None:
            return self.value is None and other.value is None
        return self.value == other.value

    def __hash__(self):
        return hash(None) if self.value is None else hash(self.value)

    def sort_key(self):
        return (1,) if self.value is None else (0, sort_key(self.value))

    def __repr__(self):
        return "∞" if self.value is None else str(self.value)


INFINITY = ProjPoint(None)


def point(v) -> ProjPoint:
    if isinstance(v, ProjPoint):
        return v
    if v is None or (isinstance(v, str) and v in ("inf", "oo", "∞")):
        return INFINITY
    return ProjPoint(v)


@dataclass(frozen=True)
class SL2Matrix:
    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if isinstance(v, int):
                object.__setattr__(self, name, Fraction(v))
        if self.a * self.d - self.b * self.c != 1:
            raise ConfigurationError("matrix determinant is not 1")

    def __matmul__(self, o: "SL2Matrix") -> "SL2Matrix":
        return SL2Matrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                         self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def inverse(self) -> "SL2Matrix":
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    @classmethod
    def identity(cls, like=Fraction(1)) -> "SL2Matrix":
        one = like / like
        return cls(one, one - one, one - one, one)

    def in_T(self) -> bool:
        """Diagonal subgroup: the stabilizer of the pair (∞, 0)."""
        return self.b == 0 and self.c == 0

    def in_B(self) -> bool:
        """Upper triangular subgroup: the stabilizer of ∞."""
        return self.c == 0


OMEGA = SL2Matrix(0, -1, 1, 0)


def moebius_apply(g: SL2Matrix, p) -> ProjPoint:
    p = point(p)
    x, y = p.homogeneous()
    return ProjPoint.from_homogeneous(g.a * x + g.b * y, g.c * x + g.d * y)


def pair_witness(p0, p1) -> SL2Matrix:
    """g in SL2 with g(p0) = ∞ and g(p1) = 0."""
    p0, p1 = point(p0), point(p1)
    if p0 == p1:
        raise ConfigurationError("pair_witness needs distinct points")
    if p0.is_inf:
        q = p1.value
        g = SL2Matrix(q / q, -q, q - q, q / q) if q != 0 else SL2Matrix.identity()
    elif p1.is_inf:
        q = p0.value
        one = (q + 1) / (q + 1) if q != -1 else (q - 1) / (q - 1)
        g = SL2Matrix(one - one, -one, one, -q)
    else:
        x0, x1 = p0.value, p1.value
        one = (x1 - x0) / (x1 - x0)
        c = one / (x1 - x0)
        g = SL2Matrix(one, -x1, c, -c * x0)
    if moebius_apply(g, p0) != INFINITY or moebius_apply(g, p1) != point(0):
        raise AssertionError("internal error: pair witness failed its post-check")
    return g


def triple_witness(p0, p1, p2):
    """g in SL2 with g(p0, p1, p2) = (0, ∞, 1), or NO_SL2_WITNESS.

    The unique projective map has determinant φ(p0,p1,p2) times a square, so an
    SL2 representative exists exactly when that class is trivial.
    """
    pts = [point(p) for p in (p0, p1, p2)]
    if len(set(pts)) != 3:
        raise ConfigurationError("triple_witness needs distinct points")
    (x0, y0), (x1, y1), (x2, y2) = (p.homogeneous() for p in pts)
    u = y1 * x2 - x1 * y2
    v = y0 * x2 - x0 * y2
    m = [u * y0, -u * x0, v * y1, -v * x1]
    det = m[0] * m[3] - m[1] * m[2]
    if any(is_tower(e) for e in m):
        if det.sign() < 0:
            return NO_SL2_WITNESS
        s, _ = sqrt_positive(det)
    else:
        det = Fraction(det)
        if det < 0:
            return NO_SL2_WITNESS
        from math import isqrt

        rn, rd = isqrt(det.numerator), isqrt(det.denominator)
        if rn * rn != det.numerator or rd * rd != det.denominator:
            return NO_SL2_WITNESS
        s = Fraction(rn, rd)
    g = SL2Matrix(*(e / s for e in m))
    if [moebius_apply(g, p) for p in pts] != [point(0), INFINITY, point(1)]:
        raise AssertionError("internal error: triple witness failed its post-check")
    return g


def phi(x, y, z):
    """(z-x)(x-y)/(z-y), with the three branches at ∞."""
    x, y, z = point(x), point(y), point(z)
    if x == y or y == z or x == z:
        raise ConfigurationError("phi needs pairwise distinct points")
    if x.is_inf:
        return 1 / (y.value - z.value)
    if y.is_inf:
        return z.value - x.value
    if z.is_inf:
        return x.value - y.value
    return (z.value - x.value) * (x.value - y.value) / (z.value - y.value)


def config_tuple(points) -> tuple:
    pts = tuple(point(p) for p in points)
    if len(set(pts)) != len(pts):
        raise ConfigurationError("configuration tuples need pairwise distinct points")
    return pts


def z_tuple(values) -> tuple:
    zs = tuple(Fraction(v) if isinstance(v, int) else v for v in values)
    for v in zs:
        if v == 0 or v == 1:
            raise ConfigurationError("Z-tuple entries must avoid 0 and 1")
    if len(set(zs)) != len(zs):
        raise ConfigurationError("Z-tuple entries must be distinct")
    return zs


def canonicalize(t):
    """(⟨φ(t0,t1,t2)⟩, [φ(t0,t1,ti)/φ(t0,t1,t2) for i >= 3])."""
    t = config_tuple(t)
    if len(t) < 3:
        raise ConfigurationError("canonicalize needs at least three points")
    p2 = phi(t[0], t[1], t[2])
    return square_class(p2), tuple(phi(t[0], t[1], p) / p2 for p in t[3:])


def representative(z) -> tuple:
    """The tuple (0, ∞, 1, z1, ..., zm) lying over [z1, ..., zm]."""
    z = z_tuple(z)
    like = z[0] if z else Fraction(1)
    zero = like - like
    return config_tuple((zero, INFINITY, zero + 1) + z)


# ---------------------------------------------------------------------------
# chains


class Chain:
    """Finite Z-combination of configuration tuples."""

    def __init__(self, terms=None):
        self.terms = {}
        for t, n in (terms or {}).items():
            if n:
                t = config_tuple(t)
                self.terms[t] = self.terms.get(t, 0) + n
        self.terms = {t: n for t, n in self.terms.items() if n}

    @classmethod
    def of(cls, *points) -> "Chain":
        return cls({config_tuple(points): 1})

    def __add__(self, other):
        out = dict(self.terms)
        for t, n in other.terms.items():
            out[t] = out.get(t, 0) + n
        return Chain(out)

    def __neg__(self):
        return Chain({t: -n for t, n in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n: int):
        return Chain({t: n * v for t, v in self.terms.items()})

    def act(self, g: SL2Matrix) -> "Chain":
        return Chain({tuple(moebius_apply(g, p) for p in t): n for t, n in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return isinstance(other, Chain) and self.terms == other.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: [p.sort_key() for p in kv[0]])

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{n}{t}" for t, n in self.items())


def boundary(c) -> Chain:
    """d(x0..xn) = Σ (-1)^i (x0..x̂i..xn)."""
    if not isinstance(c, Chain):
        c = Chain.of(*c)
    lengths = {len(t) for t in c.terms}
    if len(lengths) > 1:
        raise ConfigurationError("boundary needs tuples of one length")
    out = {}
    for t, n in c.terms.items():
        for i in range(len(t)):
            face = t[:i] + t[i + 1:]
            out[face] = out.get(face, 0) + (-1) ** i * n
    return Chain(out)


class RFModuleElement:
    """Element of R_F[Z_m]: Z-tuples with group-ring coefficients (stored flat)."""

    def __init__(self, flat=None):
        self.flat = {k: n for k, n in (flat or {}).items() if n}

    @classmethod
    def gen(cls, z, coeff=ONE) -> "RFModuleElement":
        z = z_tuple(z)
        return cls({(z, c): n for c, n in coeff.terms.items()})

    def __add__(self, other):
        out = dict(self.flat)
        for k, n in other.flat.items():
            out[k] = out.get(k, 0) + n
        return RFModuleElement(out)

    def __neg__(self):
        return RFModuleElement({k: -n for k, n in self.flat.items()})

    def __sub__(self, other):
        return self + (-other)

    def coefficient(self, z=()) -> GroupRingElement:
        z = tuple(z)
        return GroupRingElement({c: n for (t, c), n in self.flat.items() if t == z})

    def is_zero(self):
        return not self.flat

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return isinstance(other, RFModuleElement) and self.flat == other.flat

    def by_tuple(self):
        out = {}
        for (t, c), n in self.flat.items():
            out.setdefault(t, {})[c] = n
        return [(t, GroupRingElement(v)) for t, v in sorted(out.items(), key=lambda kv: [sort_key(x) for x in kv[0]])]

    def __repr__(self):
        if not self.flat:
            return "0"
        return " + ".join(f"({r!r}){list(t)}" for t, r in self.by_tuple())


def induced_d1(e: RFModuleElement) -> RFModuleElement:
    """Lift to representatives, take the boundary, re-canonicalize every face."""
    out = {}
    for (z, c), n in e.flat.items():
        for face, s in boundary(Chain.of(*representative(z))).terms.items():
            if len(face) < 3:
                raise ConfigurationError("induced d1 needs source tuples of length at least 1")
            k, w = canonicalize(face)
            key = (w, c * k)
            out[key] = out.get(key, 0) + s * n
    return RFModuleElement(out)


def rf_from_group_ring(r: GroupRingElement, z=()) -> RFModuleElement:
    return RFModuleElement({(tuple(z), c): n for c, n in r.terms.items()})


__all__ = [
    "D1_SIGN", "NO_SL2_WITNESS", "ConfigurationError", "ProjPoint", "INFINITY", "point", "SL2Matrix",
    "OMEGA", "moebius_apply", "pair_witness", "triple_witness", "phi", "config_tuple", "z_tuple",
    "canonicalize", "representative", "Chain", "boundary", "RFModuleElement", "induced_d1",
    "rf_from_group_ring", "SquareClass", "TowerElement", "FieldError",
]
