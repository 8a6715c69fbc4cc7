"""Milnor K-symbols over a real quadratically closed field.

Every positive entry is a square there, so a symbol with a positive entry is
twice another symbol.  Pulling signs out with {-a, rest} = {-1, rest} + {a, rest}
leaves {-1, ..., -1} as the only survivor modulo 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .fields import FieldError, sort_key
from .tower import TowerElement, common_context, sqrt_positive


def _tower(v) -> TowerElement:
    if isinstance(v, TowerElement):
        return v
    return TowerElement.rational(Fraction(v))


def symbol(*entries) -> tuple:
    out = tuple(Fraction(e) if isinstance(e, int) else e for e in entries)
    if any(e == 0 for e in out):
        raise FieldError("Milnor symbols need nonzero entries")
    return out


class KMElement:
    """Homogeneous Z-combination of symbols."""

    def __init__(self, terms=None, degree: int | None = None):
        clean = {}
        for s, n in (terms or {}).items():
            s = symbol(*s)
            clean[s] = clean.get(s, 0) + n
        self.terms = {s: n for s, n in clean.items() if n}
        degrees = {len(s) for s in self.terms}
        if len(degrees) > 1:
            raise FieldError("KMElement must be homogeneous")
        self.degree = degrees.pop() if degrees else degree

    @classmethod
    def of(cls, *entries) -> "KMElement":
        return cls({symbol(*entries): 1})

    @classmethod
    def unit(cls) -> "KMElement":
        return cls({(): 1})

    def __add__(self, other):
        out = dict(self.terms)
        for s, n in other.terms.items():
            out[s] = out.get(s, 0) + n
        return KMElement(out)

    def __neg__(self):
        return KMElement({s: -n for s, n in self.terms.items()}, self.degree)

    def __rmul__(self, n: int):
        return KMElement({s: n * v for s, v in self.terms.items()}, self.degree)

    def __mul__(self, other):
        if isinstance(other, int):
            return other * self
        return product(self, other)

    def __eq__(self, other):
        return isinstance(other, KMElement) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda kv: [sort_key(e) for e in kv[0]])
        return " + ".join(f"{n}{{{', '.join(map(str, s))}}}" for s, n in items)


def product(s: KMElement, t: KMElement) -> KMElement:
    """Concatenation of symbols, extended bilinearly."""
    out = {}
    for a, m in s.terms.items():
        for b, n in t.terms.items():
            out[a + b] = out.get(a + b, 0) + m * n
    return KMElement(out)


@dataclass(frozen=True)
class Mod2NormalForm:
    """ZERO, or the class of {-1, ..., -1} in the given degree."""

    degree: int
    minus_ones: bool

    def __repr__(self):
        if not self.minus_ones:
            return "ZERO"
        return "{" + ", ".join(["-1"] * self.degree) + "}"

    def to_json(self):
        return "ZERO" if not self.minus_ones else ["-1"] * self.degree


def mod2_reduce(s) -> Mod2NormalForm:
    entries = symbol(*s)
    signs = [_tower(e).sign() for e in entries]
    return Mod2NormalForm(len(entries), all(v < 0 for v in signs))


def halve_positive_symbol(s) -> KMElement:
    """w with 2w = s for a symbol with positive entries: replace x1 by sqrt(x1)."""
    entries = [_tower(e) for e in symbol(*s)]
    if not entries:
        raise FieldError("the degree-0 unit cannot be halved")
    if any(e.sign() <= 0 for e in entries):
        raise FieldError("halve_positive_symbol needs positive entries")
    ctx = common_context(entries)
    root, ctx = sqrt_positive(entries[0], ctx)
    return KMElement.of(root, *(e.promote(ctx) for e in entries[1:]))


def steinberg_trivial(s) -> bool:
    """Syntactic test: an entry equal to 1, or adjacent entries a, 1-a."""
    entries = symbol(*s)
    if any(e == 1 for e in entries):
        return True
    return any(a + b == 1 for a, b in zip(entries, entries[1:]))


def expand_symbol(s, basis) -> dict:
    """Multilinear coordinates of a symbol in the tensor power of F^x over a basis.

    Index tuples touching the torsion index 0 carry coefficients mod 2.
    """
    out = {(): 1}
    for e in symbol(*s):
        exps = basis.exponents(e)
        nxt = {}
        for idx, n in out.items():
            for i, m in exps.items():
                key = idx + (i,)
                nxt[key] = nxt.get(key, 0) + n * m
        out = nxt
    return _reduce_torsion(out, basis)


def expand_km(x: KMElement, basis) -> dict:
    out = {}
    for s, n in x.terms.items():
        for k, v in expand_symbol(s, basis).items():
            out[k] = out.get(k, 0) + n * v
    return _reduce_torsion(out, basis)


def _reduce_torsion(d, basis):
    out = {}
    for k, v in d.items():
        if any(i in basis.torsion for i in k):
            v %= 2
        if v:
            out[k] = v
    return out
