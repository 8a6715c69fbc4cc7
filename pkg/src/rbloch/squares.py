"""The group ring of square classes and the pair forms S^2 and wedge^2.

``GroupRingElement`` is an element of Z[F^x/(F^x)^2].  ``SymSquareElement`` and
``WedgeElement`` are coordinates of x∘y and x∧y over a multiplicative basis
whose index 0 is always -1.  Because -1 has order two, every coordinate that
involves index 0 (and every diagonal S^2 coordinate) lives in Z/2; the others
are integers.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from sympy import factorint, primepi, prime

from .fields import ONE_CLASS, FieldError, SquareClass, class_descriptor, class_from_descriptor, square_class
from .tower import TowerElement, TowerError, common_context, sqrt_positive


class GroupRingElement:
    """Finite Z-combination of square classes; treated as immutable."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        for c, n in (terms or {}).items():
            if n:
                clean[c] = clean.get(c, 0) + n
        self.terms = {c: n for c, n in clean.items() if n}
        self._hash = None

    @classmethod
    def unit(cls, c: SquareClass = ONE_CLASS, n: int = 1) -> "GroupRingElement":
        return cls({c: n})

    @classmethod
    def of(cls, x) -> "GroupRingElement":
        """The class ⟨x⟩ of a nonzero field element."""
        return cls({square_class(x): 1})

    def __add__(self, other):
        other = _as_gr(other)
        out = dict(self.terms)
        for c, n in other.terms.items():
            out[c] = out.get(c, 0) + n
        return GroupRingElement(out)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement({c: -n for c, n in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_gr(other))

    def __rsub__(self, other):
        return _as_gr(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement({c: n * other for c, n in self.terms.items()})
        if not isinstance(other, (GroupRingElement, SquareClass)):
            return NotImplemented
        other = _as_gr(other)
        out = {}
        for c1, n1 in self.terms.items():
            for c2, n2 in other.terms.items():
                c = c1 * c2
                out[c] = out.get(c, 0) + n1 * n2
        return GroupRingElement(out)

    __rmul__ = __mul__

    def shift(self, c: SquareClass) -> "GroupRingElement":
        """Multiply by the group element c."""
        return GroupRingElement({c * k: n for k, n in self.terms.items()})

    def epsilon(self) -> int:
        return sum(self.terms.values())

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = GroupRingElement.unit(n=other) if other else GroupRingElement()
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def to_json(self, tower: bool = False):
        return [[class_descriptor(c, tower), str(n)] for c, n in self.items()]

    @classmethod
    def from_json(cls, data) -> "GroupRingElement":
        if isinstance(data, (int, str)):
            return cls.unit(n=int(data))
        return cls({class_from_descriptor(d): int(n) for d, n in data})

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{n}{c!r}" for c, n in self.items())


def _as_gr(v) -> GroupRingElement:
    if isinstance(v, GroupRingElement):
        return v
    if isinstance(v, int):
        return GroupRingElement.unit(n=v)
    if isinstance(v, SquareClass):
        return GroupRingElement.unit(v)
    raise TypeError(f"not a group-ring element: {v!r}")


ZERO = GroupRingElement()
ONE = GroupRingElement.unit()


def epsilon(r: GroupRingElement) -> int:
    return r.epsilon()


def bracket(x) -> GroupRingElement:
    """⟨⟨x⟩⟩ = ⟨x⟩ - 1."""
    return GroupRingElement.of(x) - ONE


def class_bracket(c: SquareClass) -> GroupRingElement:
    return GroupRingElement.unit(c) - ONE


# ---------------------------------------------------------------------------
# I^2 membership


def _f2_basis(classes):
    """Greedy F_2-basis of the subgroup spanned by the classes, plus a decomposer."""
    basis = []  # list of (pivot bit key, class)

    def vec(c):
        return frozenset(c.primes | ({-1} if c.negative else set()))

    rows = []  # (vector, class, combination-of-basis-indices)
    for c in classes:
        v, combo = vec(c), set()
        for pv, bv, bi in rows:
            if pv in v:
                v = v ^ bv
                combo ^= bi
        if v:
            pivot = min(v, key=lambda p: (p != -1, p))
            idx = len(basis)
            basis.append(c)
            rows.append((pivot, v, combo | {idx}))
    return basis, rows


def i2_witness(r: GroupRingElement):
    """Witness that r lies in I^2, or None.

    Returns a list of ``(n, a, b)`` with square classes a, b such that
    ``sum n * ⟨⟨a⟩⟩⟨⟨b⟩⟩ == r``.  The result is verified by expansion.
    """
    if r.epsilon() != 0:
        return None
    basis, rows = _f2_basis([c for c in r.terms if not c.is_trivial])

    def decompose(c):
        v = frozenset(c.primes | ({-1} if c.negative else set()))
        combo = set()
        for pv, bv, bi in rows:
            if pv in v:
                v = v ^ bv
                combo ^= bi
        return sorted(combo)

    lin = {}
    quad = []  # (n, a, b)
    for c, n in r.terms.items():
        if c.is_trivial:
            continue
        idx = decompose(c)
        # ⟨⟨b1 h⟩⟩ = ⟨⟨b1⟩⟩ + ⟨⟨h⟩⟩ + ⟨⟨b1⟩⟩⟨⟨h⟩⟩, peeled one basis factor at a time
        rest = c
        for pos, i in enumerate(idx):
            lin[i] = lin.get(i, 0) + n
            if pos < len(idx) - 1:
                rest = rest * basis[i]
                quad.append((n, basis[i], rest))
    for i, n in lin.items():
        if n % 2:
            return None
        # n ⟨⟨b⟩⟩ = -(n/2) ⟨⟨b⟩⟩^2
        if n:
            quad.append((-n // 2, basis[i], basis[i]))
    check = ZERO
    for n, a, b in quad:
        check = check + class_bracket(a) * class_bracket(b) * n
    if check != r:
        raise AssertionError("internal error: I^2 witness failed verification")
    return quad


def in_I2(r: GroupRingElement) -> bool:
    return i2_witness(r) is not None


# ---------------------------------------------------------------------------
# multiplicative bases


class PrimeBasis:
    """Default basis of Q^x: index 0 is -1, index i >= 1 is the i-th prime."""

    torsion = frozenset({0})
    name = "primes"

    def exponents(self, x) -> dict:
        if isinstance(x, TowerElement):
            if x.level():
                raise FieldError(f"{x} does not factor over the prime basis")
            x = x.rational_value()
        q = Fraction(x)
        if q == 0:
            raise FieldError("cannot factor zero")
        out = {0: 1} if q < 0 else {}
        for p, e in factorint(abs(q.numerator)).items():
            out[int(primepi(p))] = e
        for p, e in factorint(q.denominator).items():
            out[int(primepi(p))] = -e
        return out

    def label(self, i: int) -> str:
        return "-1" if i == 0 else str(prime(i))

    def key(self):
        return ("primes",)

    def __eq__(self, other):
        return isinstance(other, PrimeBasis)

    def __hash__(self):
        return hash(self.key())


PRIMES = PrimeBasis()

_RANK_TOL = 1e-9
_MAX_EXPONENT = 64


def _relative_norms(x: TowerElement, depth: int | None = None):
    """x, N(x), N(N(x)), ... down to Q, one norm per tower level."""
    depth = len(x.ctx) if depth is None else depth
    out = [x]
    cur = x
    for k in range(depth, 0, -1):
        h = 1 << (k - 1)
        sub = cur.ctx.prefix(k - 1)
        a = TowerElement(sub, cur.nums[:h], cur.den)
        b = TowerElement(sub, cur.nums[h:], cur.den)
        cur = a * a - b * b * cur.ctx.radicand(k - 1)
        out.append(cur)
    return out


def _log_abs(x) -> float:
    if isinstance(x, TowerElement):
        lo, hi = x.interval(96)
        v = (lo + hi) / 2
    else:
        v = Fraction(x)
    v = abs(v)
    return math.log(v.numerator) - math.log(v.denominator)


class TowerBasis:
    """Declared multiplicatively independent tower elements, with -1 at index 0."""

    torsion = frozenset({0})
    name = "tower"

    def __init__(self, elements, ctx=None):
        elems = [e if isinstance(e, TowerElement) else TowerElement.rational(Fraction(e)) for e in elements]
        elems = [e for e in elems if e != -1]
        for e in elems:
            if e.is_zero() or e == 1:
                raise FieldError("basis elements must be nonzero and different from 1")
        self.elements = [TowerElement.rational(-1)] + elems
        self.ctx = common_context(self.elements) if ctx is None else ctx
        self._primes = sorted({p for e in elems for p in _norm_primes(e)})
        self._matrix = np.array([self._features(e) for e in elems], dtype=float).T if elems else None
        # numpy's default tolerance is near machine epsilon and misses float noise in the log features
        if elems and np.linalg.matrix_rank(self._matrix, tol=_RANK_TOL * np.abs(self._matrix).max()) < len(elems):
            raise FieldError("basis elements are multiplicatively dependent")

    def _features(self, x):
        norms = _relative_norms(x.promote(self.ctx))
        feats = [_log_abs(n) for n in norms]
        q = norms[-1].rational_value() if isinstance(norms[-1], TowerElement) else Fraction(norms[-1])
        for p in self._primes:
            feats.append(float(_valuation(q, p)))
        return feats

    def exponents(self, x) -> dict:
        if not isinstance(x, TowerElement):
            x = TowerElement.rational(Fraction(x))
        if x.is_zero():
            raise FieldError("cannot factor zero")
        out = {0: 1} if x.sign() < 0 else {}
        ax = abs(x)
        if len(self.elements) > 1:
            ax = ax.promote(self.ctx)
            if set(_norm_primes(ax)) - set(self._primes):
                raise FieldError(f"{x} does not factor over the declared basis")
            target = np.array(self._features(ax), dtype=float)
            sol, *_ = np.linalg.lstsq(self._matrix, target, rcond=None)
            exps = [int(round(s)) for s in sol]
            if any(abs(e) > _MAX_EXPONENT for e in exps):
                raise FieldError(f"exponent bound {_MAX_EXPONENT} exceeded factoring {x}")
            prod = TowerElement.rational(1)
            for e, b in zip(exps, self.elements[1:]):
                if e:
                    prod = prod * (abs(b) ** e)
            if prod != ax:
                raise FieldError(f"{x} does not factor over the declared basis")
            for i, e in enumerate(exps, start=1):
                if e:
                    out[i] = e
            # negative basis elements contribute to the sign exponent
            neg = sum(e for i, e in out.items() if i and self.elements[i].sign() < 0) % 2
            if neg:
                out[0] = (out.get(0, 0) + 1) % 2
                if not out[0]:
                    del out[0]
        elif ax != 1:
            raise FieldError(f"{x} does not factor over the declared basis")
        return out

    def rational_exponents(self, x, bound: int = _MAX_EXPONENT) -> list:
        """Fractions e with |x| = prod |b_i|^e_i, checked exactly after clearing denominators."""
        if not isinstance(x, TowerElement):
            x = TowerElement.rational(Fraction(x))
        ctx = common_context([*self.elements, x, TowerElement.rational(1, self.ctx)])
        if ctx != self.ctx:
            # features depend on the tower height, so re-root the basis first
            return TowerBasis(self.elements[1:], ctx).rational_exponents(x, bound)
        ax = abs(x).promote(ctx)
        if len(self.elements) == 1:
            if ax != 1:
                raise FieldError(f"{x} does not factor over the declared basis")
            return []
        if set(_norm_primes(ax)) - set(self._primes):
            raise FieldError(f"{x} does not factor over the declared basis")
        target = np.array(self._features(ax), dtype=float)
        sol, *_ = np.linalg.lstsq(self._matrix, target, rcond=None)
        scale = 1.0 + float(np.abs(target).max())
        if float(np.abs(self._matrix @ sol - target).max()) > 1e-6 * scale:
            # clearly outside the span; the exact check below would fail anyway
            raise FieldError(f"{x} does not factor over the declared basis")
        exps = [Fraction(float(v)).limit_denominator(bound) for v in sol]
        k = math.lcm(*(e.denominator for e in exps))
        if k > bound or any(abs(e * k) > bound * bound for e in exps):
            raise FieldError(f"exponent bound exceeded factoring {x}")
        prod = TowerElement.rational(1)
        for e, b in zip(exps, self.elements[1:]):
            if e:
                prod = prod * abs(b) ** int(e * k)
        if prod != ax ** k:
            raise FieldError(f"{x} does not factor over the declared basis")
        return exps

    def label(self, i: int) -> str:
        return str(self.elements[i])

    def key(self):
        return ("tower",) + tuple(e.key() for e in self.elements)

    def __eq__(self, other):
        return isinstance(other, TowerBasis) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def _valuation(q: Fraction, p: int) -> int:
    v, n, d = 0, abs(q.numerator), q.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _norm_primes(x):
    q = _relative_norms(x)[-1].rational_value()
    return set(factorint(abs(q.numerator))) | set(factorint(q.denominator))


# ---------------------------------------------------------------------------
# pair forms


class _PairForm:
    diagonal = True

    def __init__(self, basis, coeffs=None):
        self.basis = basis
        out = {}
        for (i, j), n in (coeffs or {}).items():
            if i > j:
                i, j, n = j, i, -n
            if i == j and not self.diagonal:
                continue
            if i == j or i in basis.torsion or j in basis.torsion:
                n %= 2
            if n:
                out[(i, j)] = n
        self.coeffs = out

    @classmethod
    def from_exponents(cls, basis, a: dict, c: dict):
        out = {}
        for i, ai in a.items():
            for j, cj in c.items():
                out[(i, j)] = out.get((i, j), 0) + ai * cj
        merged = {}
        for (i, j), n in out.items():
            if i > j:
                i, j, n = j, i, -n
            merged[(i, j)] = merged.get((i, j), 0) + n
        return cls(basis, merged)

    def _check(self, other):
        if type(other) is not type(self) or other.basis != self.basis:
            raise FieldError("pair forms over different bases")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        out = dict(self.coeffs)
        for k, n in other.coeffs.items():
            out[k] = out.get(k, 0) + n
        return type(self)(self.basis, out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)(self.basis, {k: -n for k, n in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, n: int):
        return type(self)(self.basis, {k: v * n for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if type(other) is not type(self):
            return NotImplemented
        return self.basis == other.basis and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((type(self).__name__, frozenset(self.coeffs.items())))

    def to_json(self):
        return [[i, j, str(n)] for (i, j), n in sorted(self.coeffs.items())]

    def __repr__(self):
        sym = "∘" if self.diagonal else "∧"
        if not self.coeffs:
            return "0"
        return " + ".join(
            f"{n}({self.basis.label(i)}{sym}{self.basis.label(j)})" for (i, j), n in sorted(self.coeffs.items())
        )


class SymSquareElement(_PairForm):
    """Coordinates in S^2_Z of a free module plus the order-two element -1."""

    diagonal = True


class WedgeElement(_PairForm):
    diagonal = False


def expand_sym(x, y, basis=PRIMES) -> SymSquareElement:
    """x∘y over the basis, by bilinearity."""
    return SymSquareElement.from_exponents(basis, _exps(basis, x), _exps(basis, y))


def expand_wedge(x, y, basis=PRIMES) -> WedgeElement:
    return WedgeElement.from_exponents(basis, _exps(basis, x), _exps(basis, y))


def _exps(basis, x):
    try:
        return basis.exponents(x)
    except (TowerError, FieldError) as exc:
        raise FieldError(f"factorization of {x} over the basis failed: {exc}") from None


def halve_wedge(x, y):
    """w with 2w = x∧y in the wedge square of a real quadratically closed field.

    Writes x = ±u², y = ±v² with u, v > 0 (adjoining roots as needed).  Since
    2(-1 ∧ z) = 0, x∧y = 4(u∧v), so w = 2(u∧v).  Returns ``(w, basis)``; the
    basis is [-1, u, v] with repeated or trivial entries dropped.
    """
    x = x if isinstance(x, TowerElement) else TowerElement.rational(Fraction(x))
    y = y if isinstance(y, TowerElement) else TowerElement.rational(Fraction(y))
    if x.is_zero() or y.is_zero():
        raise FieldError("halve_wedge needs nonzero arguments")
    ctx = common_context([x, y])
    u, ctx = sqrt_positive(abs(x), ctx)
    v, ctx = sqrt_positive(abs(y), ctx)
    u, v = u.promote(ctx), v.promote(ctx)
    g = _common_root(u, v)
    if g is not None:
        # u, v are powers of one element, so u∧v = 0
        basis = TowerBasis([g] if g != 1 else [])
        return WedgeElement(basis, {}), basis
    basis = TowerBasis([u, v])
    return expand_wedge(u, v, basis) * 2, basis


def _common_root(u, v, bound: int = _MAX_EXPONENT):
    """g with u = g^p and v = g^q for coprime p, q, if such exact relation exists."""
    if u == 1 or v == 1 or u == v:
        return u if v == 1 else v
    lu, lv = _log_abs(u), _log_abs(v)
    if lv == 0:
        return None
    r = Fraction(lu / lv).limit_denominator(bound)
    p, q = r.numerator, r.denominator
    if p == 0 or abs(p) > bound:
        return None
    if u ** q != v ** p:
        return None
    # Bezout: t p + s q = 1, then g = u^t v^s
    s_, t_ = _bezout(q, p)
    return u ** t_ * v ** s_


def _bezout(a, b):
    """(s, t) with s a + t b = gcd(a, b) = 1."""
    old_r, r, old_s, s, old_t, t = a, b, 1, 0, 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
        old_t, t = t, old_t - k * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


__all__ = [
    "GroupRingElement", "ZERO", "ONE", "epsilon", "bracket", "class_bracket", "i2_witness", "in_I2",
    "PrimeBasis", "PRIMES", "TowerBasis", "SymSquareElement", "WedgeElement", "expand_sym",
    "expand_wedge", "halve_wedge",
]
