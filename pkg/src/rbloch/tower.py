"""Exact constructible reals: iterated quadratic extensions of Q.

A :class:`TowerContext` is an immutable tuple of radicands ``r_1, ..., r_k``;
``r_i`` is a positive non-square of ``F_{i-1}`` and ``F_i = F_{i-1}(sqrt(r_i))``.
Radicands are stored as integral coefficient vectors over ``F_{i-1}``.

A :class:`TowerElement` of ``F_k`` is a vector of ``2**k`` integer numerators
over one positive common denominator.  Bit ``i`` of an index selects the
factor ``sqrt(r_{i+1})``; so the upper half of the vector is the coefficient
of the newest radical.  Because every radicand is verified to be a non-square
when adjoined, the monomials form a basis and zero testing is coefficient-wise.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from sympy import factorint

DEFAULT_DEPTH_CAP = 8
_START_BITS = 64


class TowerError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# integer vector kernels (vectors are tuples of ints of length 2**k)


def _vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def _vscale(u, c):
    return tuple(a * c for a in u)


def _is_zero(u):
    return not any(u)


def _vmul(u, v, rads, k):
    """Product of two level-k integer vectors."""
    if k == 0:
        return (u[0] * v[0],)
    h = 1 << (k - 1)
    u0, u1, v0, v1 = u[:h], u[h:], v[:h], v[h:]
    z1 = _is_zero(u1)
    if z1 and _is_zero(v1):
        return _vmul(u0, v0, rads, k - 1) + (0,) * h
    if z1:
        return _vmul(u0, v0, rads, k - 1) + _vmul(u0, v1, rads, k - 1)
    if _is_zero(v1):
        return _vmul(u0, v0, rads, k - 1) + _vmul(u1, v0, rads, k - 1)
    p0 = _vmul(u0, v0, rads, k - 1)
    p1 = _vmul(u1, v1, rads, k - 1)
    p2 = _vmul(_vadd(u0, u1), _vadd(v0, v1), rads, k - 1)
    lo = _vadd(p0, _vmul(p1, rads[k - 1], rads, k - 1))
    hi = _vsub(_vsub(p2, p0), p1)
    return lo + hi


def _vinv(u, rads, k):
    """Return (w, d) with integer vector w and nonzero integer d, u*w = d."""
    if k == 0:
        return (1,), u[0]
    h = 1 << (k - 1)
    u0, u1 = u[:h], u[h:]
    if _is_zero(u1):
        w, d = _vinv(u0, rads, k - 1)
        return w + (0,) * h, d
    norm = _vsub(_vmul(u0, u0, rads, k - 1),
                 _vmul(_vmul(u1, u1, rads, k - 1), rads[k - 1], rads, k - 1))
    m, d = _vinv(norm, rads, k - 1)
    return _vmul(u0, m, rads, k - 1) + _vscale(_vmul(u1, m, rads, k - 1), -1), d


def _level(u):
    """Smallest k such that only the first 2**k entries can be nonzero."""
    last = 0
    for i in range(len(u) - 1, -1, -1):
        if u[i]:
            last = i
            break
    return last.bit_length()


def _normalize(nums, den):
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if den < 0:
        nums, den = tuple(-a for a in nums), -den
    g = den
    for a in nums:
        if g == 1:
            break
        g = gcd(g, a)
    if g != 1:
        nums, den = tuple(a // g for a in nums), den // g
    return nums, den


# ---------------------------------------------------------------------------


class TowerContext:
    """Immutable, hashable description of a quadratic tower."""

    __slots__ = ("radicands", "_hash")

    def __init__(self, radicands=()):
        rads = tuple(tuple(int(c) for c in r) for r in radicands)
        for i, r in enumerate(rads):
            if len(r) != 1 << i:
                raise TowerError(f"radicand {i + 1} has wrong length {len(r)}")
        object.__setattr__(self, "radicands", rads)
        object.__setattr__(self, "_hash", hash(rads))

    def __setattr__(self, *_):
        raise AttributeError("TowerContext is immutable")

    @classmethod
    def base(cls) -> "TowerContext":
        return _BASE

    def __len__(self):
        return len(self.radicands)

    def __eq__(self, other):
        return isinstance(other, TowerContext) and self.radicands == other.radicands

    def __hash__(self):
        return self._hash

    def prefix(self, k: int) -> "TowerContext":
        return TowerContext(self.radicands[:k])

    def is_prefix_of(self, other: "TowerContext") -> bool:
        return other.radicands[: len(self)] == self.radicands

    def extend(self, radicand: tuple) -> "TowerContext":
        return TowerContext(self.radicands + (tuple(radicand),))

    def radicand(self, i: int) -> "TowerElement":
        """Radicand ``r_{i+1}`` as an element of the sub-tower below it."""
        return TowerElement(self.prefix(i), self.radicands[i], 1)

    def rational_radicands(self):
        return [(i, r[0]) for i, r in enumerate(self.radicands) if _level(r) == 0]

    def to_json(self):
        return [[str(c) for c in r] for r in self.radicands]

    @classmethod
    def from_json(cls, data) -> "TowerContext":
        return cls(tuple(int(c) for c in r) for r in data)

    def __repr__(self):
        return "TowerContext(" + ", ".join(self.radicand(i).to_infix() for i in range(len(self))) + ")"


_BASE = TowerContext()


# ---------------------------------------------------------------------------
# interval evaluation for signs


@lru_cache(maxsize=4096)
def _root_interval(rads: tuple, k: int, bits: int):
    """Interval [lo, hi] * 2**-bits containing sqrt(r_{k+1})."""
    lo, hi = _interval(rads[k], rads, k, bits)
    lo = max(lo, 0)
    return isqrt(lo << bits), isqrt(hi << bits) + 1


def _interval(u, rads, k, bits):
    """Interval [lo, hi] * 2**-bits containing the level-k integer vector u."""
    if k == 0:
        v = u[0] << bits
        return v, v
    h = 1 << (k - 1)
    l0, h0 = _interval(u[:h], rads, k - 1, bits)
    if _is_zero(u[h:]):
        return l0, h0
    l1, h1 = _interval(u[h:], rads, k - 1, bits)
    sl, sh = _root_interval(rads, k - 1, bits)
    prods = (l1 * sl, l1 * sh, h1 * sl, h1 * sh)
    return l0 + (min(prods) >> bits), h0 + -((-max(prods)) >> bits)


def _vsign(u, rads, k):
    if _is_zero(u):
        return 0
    k = min(k, _level(u))
    u = u[: 1 << k]
    if k == 0:
        return (u[0] > 0) - (u[0] < 0)
    bits = _START_BITS
    while True:
        lo, hi = _interval(u, rads, k, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


# ---------------------------------------------------------------------------


def _coerce_fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return None


class TowerElement:
    """Exact element of a quadratic tower.  Immutable."""

    __slots__ = ("ctx", "nums", "den", "_sign")

    def __init__(self, ctx: TowerContext, nums, den: int = 1):
        nums = tuple(int(a) for a in nums)
        if len(nums) != 1 << len(ctx):
            raise TowerError(f"expected {1 << len(ctx)} coefficients, got {len(nums)}")
        nums, den = _normalize(nums, int(den))
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "nums", nums)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_sign", None)

    def __setattr__(self, *_):
        raise AttributeError("TowerElement is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def rational(cls, q, ctx: TowerContext | None = None) -> "TowerElement":
        q = Fraction(q)
        ctx = ctx or _BASE
        return cls(ctx, (q.numerator,) + (0,) * ((1 << len(ctx)) - 1), q.denominator)

    @classmethod
    def radical(cls, ctx: TowerContext, i: int) -> "TowerElement":
        """The element ``sqrt(r_{i+1})`` of ``ctx``."""
        nums = [0] * (1 << len(ctx))
        nums[1 << i] = 1
        return cls(ctx, nums, 1)

    @classmethod
    def from_coefficients(cls, ctx: TowerContext, coeffs) -> "TowerElement":
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for c in fr:
            den = den * c.denominator // gcd(den, c.denominator)
        return cls(ctx, [c.numerator * (den // c.denominator) for c in fr], den)

    # -- structure ----------------------------------------------------------

    def level(self) -> int:
        return _level(self.nums)

    def is_zero(self) -> bool:
        return _is_zero(self.nums)

    def coefficients(self):
        return [Fraction(a, self.den) for a in self.nums]

    def rational_value(self) -> Fraction:
        if self.level() != 0:
            raise TowerError("element is not rational")
        return Fraction(self.nums[0], self.den)

    def trimmed(self) -> "TowerElement":
        k = self.level()
        if k == len(self.ctx):
            return self
        return TowerElement(self.ctx.prefix(k), self.nums[: 1 << k], self.den)

    def key(self):
        k = self.level()
        return (self.ctx.radicands[:k], self.nums[: 1 << k], self.den)

    def key_repr(self):
        return self.key()

    def promote(self, ctx: TowerContext) -> "TowerElement":
        if ctx == self.ctx:
            return self
        k = self.level()
        if ctx.radicands[:k] != self.ctx.radicands[:k]:
            raise TowerError("context mismatch: cannot promote element into an unrelated tower")
        nums = self.nums[: 1 << k] + (0,) * ((1 << len(ctx)) - (1 << k))
        return TowerElement(ctx, nums, self.den)

    # -- arithmetic ---------------------------------------------------------

    def _unify(self, other):
        if isinstance(other, TowerElement):
            if other.ctx == self.ctx:
                return self, other
            big = self.ctx if len(self.ctx) >= len(other.ctx) else other.ctx
            return self.promote(big), other.promote(big)
        q = _coerce_fraction(other)
        if q is None:
            return None
        return self, TowerElement.rational(q, self.ctx)

    def __add__(self, other):
        pair = self._unify(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return TowerElement(a.ctx, _vadd(_vscale(a.nums, b.den), _vscale(b.nums, a.den)), a.den * b.den)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.ctx, _vscale(self.nums, -1), self.den)

    def __sub__(self, other):
        pair = self._unify(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return TowerElement(a.ctx, _vsub(_vscale(a.nums, b.den), _vscale(b.nums, a.den)), a.den * b.den)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._unify(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        k = max(a.level(), b.level())
        n = 1 << k
        prod = _vmul(a.nums[:n], b.nums[:n], a.ctx.radicands, k)
        return TowerElement(a.ctx, prod + (0,) * (len(a.nums) - n), a.den * b.den)

    __rmul__ = __mul__

    def inverse(self) -> "TowerElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a tower")
        k = self.level()
        n = 1 << k
        w, d = _vinv(self.nums[:n], self.ctx.radicands, k)
        return TowerElement(self.ctx, _vscale(w, self.den) + (0,) * (len(self.nums) - n), d)

    def __truediv__(self, other):
        pair = self._unify(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        base = self if e >= 0 else self.inverse()
        e = abs(e)
        out = TowerElement.rational(1, self.ctx)
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- order --------------------------------------------------------------

    def sign(self) -> int:
        s = self._sign
        if s is None:
            s = _vsign(self.nums, self.ctx.radicands, len(self.ctx))
            object.__setattr__(self, "_sign", s)
        return s

    def interval(self, bits: int = 128):
        """Dyadic enclosure (lo, hi) of the value, as Fractions."""
        k = self.level()
        lo, hi = _interval(self.nums[: 1 << k], self.ctx.radicands, k, bits)
        return Fraction(lo, self.den << bits), Fraction(hi, self.den << bits)

    def __float__(self):
        lo, hi = self.interval(80)
        return float((lo + hi) / 2)

    def _cmp(self, other):
        d = self - other
        if d is NotImplemented:
            return NotImplemented
        return d.sign()

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return not self.is_zero()

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, TowerElement):
            a, b = self.key(), other.key()
            if a == b:
                return True
            ra, rb = a[0], b[0]
            k = min(len(ra), len(rb))
            if ra[:k] != rb[:k]:
                # canonical forms are only comparable inside one tower
                raise TowerError("context mismatch")
            return False
        q = _coerce_fraction(other)
        if q is None:
            return NotImplemented
        return self.level() == 0 and Fraction(self.nums[0], self.den) == q

    def __hash__(self):
        if self.level() == 0:
            return hash(Fraction(self.nums[0], self.den))
        return hash(self.key())

    # -- text ---------------------------------------------------------------

    def to_infix(self) -> str:
        k = self.level()
        parts = []
        for idx in range(1 << k):
            c = Fraction(self.nums[idx], self.den)
            if not c:
                continue
            mono = "*".join(
                f"sqrt({self.ctx.radicand(i).to_infix()})" for i in range(k) if idx >> i & 1
            )
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            elif mag.denominator == 1:
                body = f"{mag}*{mono}"
            elif mag.numerator == 1:
                body = f"{mono}/{mag.denominator}"
            else:
                body = f"{mag.numerator}*{mono}/{mag.denominator}"
            parts.append(("-" if c < 0 else "+", body))
        if not parts:
            return "0"
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, body in parts[1:]:
            out += f" {s} {body}"
        return out

    def __str__(self):
        return self.to_infix()

    def __repr__(self):
        return f"TowerElement({self.to_infix()})"

    def to_json(self):
        t = self.trimmed()
        return {
            "tower": {
                "radicands": t.ctx.to_json(),
                "coefficients": [str(c) for c in t.coefficients()],
            }
        }

    @classmethod
    def from_json(cls, data) -> "TowerElement":
        body = data["tower"]
        return cls.from_coefficients(TowerContext.from_json(body["radicands"]), body["coefficients"])


# ---------------------------------------------------------------------------
# square roots


def _sqrt_rational(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _sqrt_in(x: TowerElement, k: int):
    """A square root of x inside the level-k sub-tower of x.ctx, or None.

    x must have level <= k.  Returned element lives in ``x.ctx.prefix(k)``.
    """
    ctx = x.ctx.prefix(k)
    if k == 0:
        r = _sqrt_rational(Fraction(x.nums[0], x.den))
        return None if r is None else TowerElement.rational(r)
    h = 1 << (k - 1)
    sub = x.ctx.prefix(k - 1)
    a = TowerElement(sub, x.nums[:h], x.den)
    b = TowerElement(sub, x.nums[h: 2 * h], x.den)
    r = ctx.radicand(k - 1)
    if b.is_zero():
        c = _sqrt_in(a, k - 1)
        if c is not None:
            return TowerElement(ctx, c.nums + (0,) * h, c.den)
        c = _sqrt_in(a / r, k - 1)
        if c is not None:
            return TowerElement(ctx, (0,) * h + c.nums, c.den)
        return None
    norm = a * a - b * b * r
    if norm.sign() < 0:
        return None
    s = _sqrt_in(norm, k - 1)
    if s is None:
        return None
    target = x.promote(ctx)
    for t in ((a + s) / 2, (a - s) / 2):
        if t.is_zero() or t.sign() < 0:
            continue
        c = _sqrt_in(t, k - 1)
        if c is None:
            continue
        d = b / (c * 2)
        y = TowerElement(ctx, _vscale(c.nums, d.den) + _vscale(d.nums, c.den), c.den * d.den)
        if y * y == target:
            return y
    return None


def is_square(x: TowerElement) -> bool:
    return x.sign() >= 0 and (x.is_zero() or _sqrt_in(x, len(x.ctx)) is not None)


def _square_part(n: int):
    """n = s**2 * m with m squarefree; returns (s, m)."""
    s, m = 1, 1
    for p, e in factorint(n).items():
        s *= p ** (e // 2)
        m *= p ** (e % 2)
    return s, m


def sqrt_positive(x, ctx: TowerContext | None = None, depth_cap: int = DEFAULT_DEPTH_CAP):
    """Positive square root of a positive element.

    Returns ``(root, context)``.  The context is ``ctx`` (default: the element's
    own context) when the root already exists there; otherwise it is extended
    by one normalized radicand.
    """
    if not isinstance(x, TowerElement):
        x = TowerElement.rational(Fraction(x))
    ctx = ctx if ctx is not None else x.ctx
    if len(x.ctx) > len(ctx):
        ctx = x.ctx
    x = x.promote(ctx)
    if x.sign() <= 0:
        raise TowerError(f"sqrt_positive needs a positive argument, got {x}")
    k = len(ctx)
    y = _sqrt_in(x, k)
    if y is not None:
        return (-y if y.sign() < 0 else y), ctx
    if k >= depth_cap:
        raise TowerError(f"tower depth cap {depth_cap} reached while adjoining sqrt({x})")
    # sqrt(X/D) = sqrt(X*D)/D ; strip the square part of the integer content
    lvl = x.level()
    vec = _vscale(x.nums[: 1 << lvl], x.den)
    content = 0
    for c in vec:
        content = gcd(content, c)
    s, m = _square_part(content)
    vec = tuple(c // (s * s) for c in vec)
    mult = Fraction(s, x.den)
    # a rational radicand may shrink by dividing out existing rational radicands
    extra = []
    if lvl == 0:
        m = vec[0]
        improved = True
        while improved:
            improved = False
            for i, q in ctx.rational_radicands():
                g = gcd(m, q)
                m2 = m * q // (g * g)
                if m2 < m:
                    # sqrt(m) = g*sqrt(m2)*sqrt(q)/q
                    mult *= Fraction(g, q)
                    extra.append(i)
                    m = m2
                    improved = True
        vec = (m,)
    new = ctx.extend(vec + (0,) * ((1 << k) - len(vec)))
    root = TowerElement.radical(new, k) * mult
    for i in extra:
        root = root * TowerElement.radical(new, i)
    if root * root != x.promote(new):
        raise TowerError("internal error: adjoined root failed verification")
    return root, new


def common_context(elements) -> TowerContext:
    """Smallest context among the elements' contexts that contains all of them."""
    best = _BASE
    for e in elements:
        if isinstance(e, TowerElement):
            c = e.ctx.prefix(e.level())
            if len(c) > len(best):
                if not best.is_prefix_of(c):
                    raise TowerError("context mismatch")
                best = c
            elif not c.is_prefix_of(best):
                raise TowerError("context mismatch")
    return best
