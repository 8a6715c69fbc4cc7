"""Free precursors of the (refined) pre-Bloch groups and the maps out of them.

An :class:`RPElement` is stored flat, as ``{(generator, square class): int}``.
That is the coordinate system of the free R_F-module on symbols [x], and it is
also the one the certifier solves in.  The symbol [1] is dropped on entry.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

from .expr import to_node
from .tower import TowerElement, TowerError, common_context
from .fields import MINUS_CLASS, ONE_CLASS, FieldError, SquareClass, is_tower, sort_key, square_class
from .squares import (
    ONE,
    PRIMES,
    ZERO,
    GroupRingElement,
    SymSquareElement,
    TowerBasis,
    bracket,
    expand_sym,
    in_I2,
)


class RelationError(ValueError):
    """Arguments outside the domain of a relation or distinguished element."""


def _check_pair(x, y):
    if x == 0 or y == 0 or x == 1 or y == 1:
        raise RelationError(f"relation arguments must avoid 0 and 1, got ({x}, {y})")
    if x == y:
        raise RelationError(f"relation arguments must differ, got ({x}, {y})")


def _one_like(x):
    return x / x


class RPElement:
    """Element of the free R_F-module on [x], x in F^x, modulo [1] = 0."""

    __slots__ = ("flat", "_hash")

    def __init__(self, flat=None):
        self.flat = {k: n for k, n in (flat or {}).items() if n and k[0] != 1}
        self._hash = None

    @classmethod
    def gen(cls, x, coeff=ONE) -> "RPElement":
        """coeff·[x]."""
        if x == 0:
            raise FieldError("[0] is not a generator")
        if x == 1:
            return cls()
        coeff = _gr(coeff)
        return cls({(x, c): n for c, n in coeff.terms.items()})

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        out = dict(self.flat)
        for k, n in other.flat.items():
            v = out.get(k, 0) + n
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return RPElement(out)

    __radd__ = __add__

    def __neg__(self):
        return RPElement({k: -n for k, n in self.flat.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, r):
        """Left action of R_F (or of Z, or of one square class)."""
        if isinstance(r, int):
            return RPElement({k: n * r for k, n in self.flat.items()})
        r = _gr(r)
        out = {}
        for c, m in r.terms.items():
            for (g, k), n in self.flat.items():
                key = (g, c * k)
                out[key] = out.get(key, 0) + m * n
        return RPElement(out)

    __mul__ = __rmul__

    def shift(self, c: SquareClass) -> "RPElement":
        return RPElement({(g, c * k): n for (g, k), n in self.flat.items()})

    def coefficient(self, x) -> GroupRingElement:
        return GroupRingElement({k: n for (g, k), n in self.flat.items() if g == x})

    def support(self):
        return sorted({g for g, _ in self.flat}, key=sort_key)

    def by_generator(self):
        out = {}
        for (g, k), n in self.flat.items():
            out.setdefault(g, {})[k] = n
        return [(g, GroupRingElement(out[g])) for g in sorted(out, key=sort_key)]

    def is_zero(self) -> bool:
        return not self.flat

    def __bool__(self):
        return bool(self.flat)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, RPElement):
            return NotImplemented
        return self.flat == other.flat

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.flat.items()))
        return self._hash

    def __len__(self):
        return len(self.flat)

    def to_json(self):
        tower = any(is_tower(g) for g, _ in self.flat)
        return [[to_node(g), r.to_json(tower)] for g, r in self.by_generator()]

    @classmethod
    def from_json(cls, data, backend="rational") -> "RPElement":
        from .expr import evaluate

        out = cls()
        for node, coeff in data:
            out = out + cls.gen(evaluate(node, backend), GroupRingElement.from_json(coeff))
        return out

    def __repr__(self):
        if not self.flat:
            return "0"
        return " + ".join(f"({r!r})[{g}]" for g, r in self.by_generator())


class PElement:
    """Element of the free abelian group on [x], modulo [1] = 0."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {g: n for g, n in (coeffs or {}).items() if n and g != 1}

    @classmethod
    def gen(cls, x, n: int = 1) -> "PElement":
        if x == 0:
            raise FieldError("[0] is not a generator")
        return cls({x: n})

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        out = dict(self.coeffs)
        for g, n in other.coeffs.items():
            out[g] = out.get(g, 0) + n
        return PElement(out)

    __radd__ = __add__

    def __neg__(self):
        return PElement({g: -n for g, n in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n: int):
        return PElement({g: n * v for g, v in self.coeffs.items()})

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, PElement):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __len__(self):
        return len(self.coeffs)

    def to_json(self):
        return [[to_node(g), str(self.coeffs[g])] for g in sorted(self.coeffs, key=sort_key)]

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{self.coeffs[g]}[{g}]" for g in sorted(self.coeffs, key=sort_key))


def _gr(r) -> GroupRingElement:
    if isinstance(r, GroupRingElement):
        return r
    if isinstance(r, SquareClass):
        return GroupRingElement.unit(r)
    if isinstance(r, int):
        return GroupRingElement.unit(n=r)
    raise TypeError(f"not a group-ring coefficient: {r!r}")


def gen(x, coeff=ONE) -> RPElement:
    return RPElement.gen(x, coeff)


def cls(x) -> SquareClass:
    return square_class(x)


# ---------------------------------------------------------------------------
# five-term relations


def s_terms(x, y):
    """The five signed, class-decorated symbols of S_{x,y} as (sign, class, generator)."""
    _check_pair(x, y)
    one = _one_like(x)
    xi, yi = one / x, one / y
    return (
        (1, ONE_CLASS, x),
        (-1, ONE_CLASS, y),
        (1, square_class(x), y / x),
        (-1, square_class(xi - one), (one - xi) / (one - yi)),
        (1, square_class(one - x), (one - x) / (one - y)),
    )


def s_relation(x, y) -> RPElement:
    """S_{x,y} = [x] - [y] + ⟨x⟩[y/x] - ⟨x⁻¹-1⟩[(1-x⁻¹)/(1-y⁻¹)] + ⟨1-x⟩[(1-x)/(1-y)]."""
    if type(x) is Fraction and type(y) is Fraction:
        # rational instances recur across certificates; tower ones carry their context and are not shared
        return _s_relation_rational(x, y)
    return _s_relation(x, y)


@functools.lru_cache(maxsize=1 << 16)
def _s_relation_rational(x, y) -> RPElement:
    return _s_relation(x, y)


def _s_relation(x, y) -> RPElement:
    flat = {}
    for s, c, g in s_terms(x, y):
        if g == 1:
            continue
        flat[(g, c)] = flat.get((g, c), 0) + s
    return RPElement(flat)


def r_relation(x, y) -> PElement:
    """The classical five-term relation R_{x,y} with all [1] removed."""
    out = PElement()
    for s, _, g in s_terms(x, y):
        if g != 1:
            out = out + PElement.gen(g, s)
    return out


def coinvariants(e: RPElement) -> PElement:
    out = {}
    for (g, _), n in e.flat.items():
        out[g] = out.get(g, 0) + n
    return PElement(out)


# ---------------------------------------------------------------------------
# lambda maps


def lambda1(e: RPElement) -> GroupRingElement:
    """R_F-linear extension of [x] ↦ ⟨⟨1-x⟩⟩⟨⟨x⟩⟩."""
    out = {}
    for g, r in e.by_generator():
        one = _one_like(g)
        img = r * bracket(one - g) * bracket(g)
        for c, n in img.terms.items():
            out[c] = out.get(c, 0) + n
    return GroupRingElement(out)


def lambda_classical(p: PElement, basis=PRIMES) -> SymSquareElement:
    """[x] ↦ (1-x)∘x, extended linearly."""
    out = SymSquareElement(basis)
    for g, n in p.coeffs.items():
        out = out + expand_sym(_one_like(g) - g, g, basis) * n
    return out


def lambda2(e, basis=PRIMES) -> SymSquareElement:
    """λ on coinvariants; accepts an RPElement or a PElement."""
    if isinstance(e, RPElement):
        e = coinvariants(e)
    return lambda_classical(e, basis)


def lambda2_real(e) -> tuple:
    """λ₂ over a real quadratically closed field, as ``(t, w)``.

    There S²_Z(R^×) = Z/2·(−1∘−1) ⊕ ∧²(R_{>0}) and the second summand is
    torsion-free, so it embeds in rational coordinates.  ``t`` is the
    (−1∘−1) coefficient mod 2 and ``w`` maps index pairs (i, j), i < j, of
    ``basis.elements`` to Fraction coefficients.  Returns ``(t, w, basis)``;
    raises FieldError when no basis for the occurring elements is found.
    """
    if isinstance(e, RPElement):
        e = coinvariants(e)
    pairs = []
    for g, n in e.coeffs.items():
        g = g if is_tower(g) else TowerElement.rational(Fraction(g))
        pairs.append((n, _one_like(g) - g, g))
    try:
        ctx = common_context([v for _, a, b in pairs for v in (a, b)])
    except TowerError as exc:
        raise FieldError(str(exc)) from None
    pairs = [(n, a.promote(ctx), b.promote(ctx)) for n, a, b in pairs]
    basis = _span_basis([abs(v) for _, a, b in pairs for v in (a, b)])
    t, w = 0, {}
    for n, a, b in pairs:
        if a.sign() < 0 and b.sign() < 0:
            t += n
        ea, eb = basis.rational_exponents(a), basis.rational_exponents(b)
        for i in range(len(ea)):
            for j in range(i + 1, len(ea)):
                c = n * (ea[i] * eb[j] - ea[j] * eb[i])
                if c:
                    w[(i + 1, j + 1)] = w.get((i + 1, j + 1), 0) + c
    return t % 2, {k: v for k, v in w.items() if v}, basis


def _span_basis(values) -> TowerBasis:
    # greedy: keep an element only if it does not already factor over the basis
    basis = TowerBasis([])
    for v in values:
        if v == 1:
            continue
        try:
            basis.rational_exponents(v)
            continue
        except FieldError:
            pass
        basis = TowerBasis(basis.elements[1:] + [v])
    return basis


@dataclass(frozen=True)
class LambdaTarget:
    first: GroupRingElement
    second: SymSquareElement | None

    def is_zero(self) -> bool:
        return self.first.is_zero() and (self.second is None or self.second.is_zero())

    @property
    def first_in_I2(self) -> bool:
        return in_I2(self.first)


def big_lambda(e: RPElement, basis=PRIMES) -> LambdaTarget:
    """Λ = (λ₁, λ₂)."""
    return LambdaTarget(lambda1(e), lambda2(e, basis))


# ---------------------------------------------------------------------------
# distinguished elements


def psi1(x) -> RPElement:
    """ψ₁(x) = [x] + ⟨-1⟩[x⁻¹]."""
    if x == 0:
        raise RelationError("psi1 needs x != 0")
    return gen(x) + gen(_one_like(x) / x, MINUS_CLASS)


def psi2(x) -> RPElement:
    """ψ₂(x) = ⟨x⁻¹-1⟩[x] + ⟨1-x⟩[x⁻¹], and ψ₂(1) = 0."""
    if x == 0:
        raise RelationError("psi2 needs x != 0")
    if x == 1:
        return RPElement()
    one = _one_like(x)
    xi = one / x
    return gen(x, square_class(xi - one)) + gen(xi, square_class(one - x))


PSI = {1: psi1, 2: psi2}


def c_element(x) -> RPElement:
    """[x] + ⟨-1⟩[1-x] + ⟨⟨1-x⟩⟩ψ₁(x)."""
    if x == 0 or x == 1:
        raise RelationError("c_element needs x outside {0, 1}")
    one = _one_like(x)
    return gen(x) + gen(one - x, MINUS_CLASS) + bracket(one - x) * psi1(x)


def as_field(x):
    """Integers become Fractions; everything else passes through."""
    if isinstance(x, int):
        return Fraction(x)
    return x


__all__ = [
    "RPElement", "PElement", "RelationError", "LambdaTarget", "gen", "s_relation", "s_terms",
    "r_relation", "coinvariants", "lambda1", "lambda2", "lambda_classical", "big_lambda",
    "psi1", "psi2", "PSI", "c_element", "ZERO",
]
