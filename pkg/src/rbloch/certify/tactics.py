"""Certificate-producing tactics for the ψ identities, C-constancy and the trivial ⟨−1⟩-action.

Every tactic returns ``(IdentityClaim, Certificate)`` and every certificate
has passed :func:`check_certificate` before it is returned.  A claim is
proved in this order:

1. a zero target gets the empty certificate;
2. composed claims are assembled from other claims (see ``_COMPOSED``);
3. a shipped template is replayed and kernel-checked;
4. otherwise a direct search over points derived from the arguments runs.

Anything that still fails raises :class:`CertificationFailed` with the search
diagnostics attached.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..bloch import RelationError
from ..fields import MINUS_CLASS, RATIONAL, TOWER, FieldError, sign, square_class
from ..squares import GroupRingElement
from ..tower import TowerElement, TowerError, sqrt_positive
from .kernel import Certificate, IdentityClaim, check_certificate
from .library import CLAIMS, Degenerate, claim_target, instantiate, load_templates
from .pool import DEFAULT_MAX_POINTS
from .search import NotFound, direct_search

# spare points for the C(x) = C(z) = C(y) detour when a template degenerates at (x, y)
PIVOTS = (Fraction(7, 3), Fraction(-5, 13), Fraction(11, 5), Fraction(-17, 7), Fraction(23, 19))


class CertificationFailed(RuntimeError):
    def __init__(self, claim: IdentityClaim, outcome: NotFound):
        super().__init__(f"{claim.label}: {outcome.reason}")
        self.claim = claim
        self.outcome = outcome


class Prover:
    """Proves named claims, caching certificates per (name, arguments)."""

    def __init__(self, backend=RATIONAL, depth: int = 3, max_points: int = DEFAULT_MAX_POINTS,
                 templates: dict | None = None, use_templates: bool = True):
        self.backend = backend
        self.depth = depth
        self.max_points = max_points
        self.templates = (load_templates() if templates is None else templates) if use_templates else {}
        self.cache: dict = {}
        self.log: list = []
        self._active: set = set()

    def element(self, v):
        return v if isinstance(v, TowerElement) else self.backend.element(v)

    def prove(self, name: str, args) -> tuple:
        if name not in CLAIMS:
            raise ValueError(f"unknown claim {name!r}")
        args = [self.element(a) for a in args]
        key = (name, tuple(args))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        label = f"{name}({', '.join(map(str, args))})"
        claim = IdentityClaim(claim_target(name, args), label)
        if claim.target.is_zero():
            out = (claim, Certificate([]))
        else:
            if key in self._active:
                # a detour came back to a claim it is already proving
                raise CertificationFailed(claim, NotFound("circular detour"))
            self._active.add(key)
            try:
                out = (claim, self._certify(name, args, claim))
            finally:
                self._active.discard(key)
        self.cache[key] = out
        return out

    def _certify(self, name, args, claim) -> Certificate:
        composed = _COMPOSED.get(re.sub(r"_[12]$", "", name))
        if composed is not None:
            cert = composed(self, name, args)
            if cert is not None and check_certificate(claim, cert):
                self.log.append((claim.label, "composed"))
                return cert
        cert = self._from_template(name, args, claim)
        if cert is not None:
            self.log.append((claim.label, "template"))
            return cert
        if name in ("c_constant", "c_symmetric"):
            detour = self._c_constant_detour if name == "c_constant" else self._c_symmetric_detour
            cert = detour(args, claim)
            if cert is not None:
                self.log.append((claim.label, "detour"))
                return cert
        res = direct_search(claim, args, depth=self.depth, max_points=self.max_points)
        if isinstance(res, NotFound):
            raise CertificationFailed(claim, res)
        self.log.append((claim.label, "search"))
        return res

    def _from_template(self, name, args, claim):
        t = self.templates.get(name)
        if t is None:
            return None
        try:
            cert = instantiate(t, args, self.backend, lemma_prover=self.prove)
            if check_certificate(claim, cert):
                return cert
        except (Degenerate, CertificationFailed, RelationError, FieldError, ZeroDivisionError):
            pass
        return None

    def _c_constant_detour(self, args, claim):
        x, y = args
        for z in PIVOTS:
            z = self.element(z)
            if z in (x, y):
                continue
            parts = []
            for a, b in ((x, z), (z, y)):
                t = self.templates.get("c_constant")
                sub = IdentityClaim(claim_target("c_constant", [a, b]))
                cert = None
                if t is not None:
                    try:
                        cert = instantiate(t, [a, b], self.backend, lemma_prover=self.prove)
                        if not check_certificate(sub, cert):
                            cert = None
                    except (Degenerate, CertificationFailed, RelationError, FieldError, ZeroDivisionError):
                        cert = None
                if cert is None:
                    break
                parts.append((1, cert))
            else:
                cert = Certificate.combine(parts)
                if check_certificate(claim, cert):
                    return cert
        return None


    def _c_symmetric_detour(self, args, claim):
        # ⟨−1⟩C(x) − C(x) = (⟨−1⟩C(z) − C(z)) + (⟨−1⟩ − 1)(C(x) − C(z))
        (x,) = args
        shift = GroupRingElement.unit(MINUS_CLASS) - 1
        for z in PIVOTS:
            z = self.element(z)
            if z == x:
                continue
            try:
                _, at_z = self.prove("c_symmetric", [z])
                _, move = self.prove("c_constant", [x, z])
            except CertificationFailed:
                continue
            cert = Certificate.combine([(1, at_z), (shift, move)])
            if check_certificate(claim, cert):
                return cert
        return None


# ---------------------------------------------------------------------------
# composed claims


def _index(name):
    return name[-1]


def _square2(prover, name, args):
    # 2ψ(x²) = 2(ψ(x²) − ⟨⟨x⟩⟩ψ(−1)) + ⟨⟨x⟩⟩ · 2ψ(−1)
    (x,) = args
    i = _index(name)
    _, sq = prover.prove(f"psi_square_{i}", [x])
    _, o2 = prover.prove(f"psi_order2_{i}", [-(x / x)])
    return Certificate.combine([(2, sq), (GroupRingElement.of(x) - 1, o2)])


def _vanish(prover, name, args):
    # x = a² with a > 0, so ⟨⟨a⟩⟩ = 0 and ψ(x) is the ψ(a²) − ⟨⟨a⟩⟩ψ(−1) claim itself
    (x,) = args
    _require_positive_tower(x)
    a, _ = sqrt_positive(x, depth_cap=getattr(prover.backend, "depth_cap", 8))
    _, cert = prover.prove(f"psi_square_{_index(name)}", [a])
    return cert


def _trivial_action(prover, name, args):
    (x,) = args
    if not isinstance(x, TowerElement):
        raise ValueError("the trivial action claim needs the tower backend")
    one = x / x
    if sign(x) > 0:
        # ⟨−1⟩[x] − [x] = ⟨−1⟩⟨1−x⟩ψ₂(x) − ψ₁(x), both ψ terms vanishing
        _, v1 = prover.prove("psi_vanish_1", [x])
        _, v2 = prover.prove("psi_vanish_2", [x])
        m = GroupRingElement.unit(MINUS_CLASS * square_class(one - x))
        return Certificate.combine([(m, v2), (-1, v1)])
    # x < 0: ⟨−1⟩C(x) − C(x) = (⟨−1⟩[x] − [x]) − (⟨−1⟩[1−x] − [1−x]) and 1 − x > 0
    _, sym = prover.prove("c_symmetric", [x])
    _, pos = prover.prove("trivial_action", [one - x])
    return Certificate.combine([(1, sym), (1, pos)])


def _require_positive_tower(x):
    if not isinstance(x, TowerElement):
        raise ValueError("this claim needs the tower backend")
    if sign(x) <= 0:
        raise ValueError(f"expected a positive element, got {x}")


_COMPOSED = {
    "psi_square2": _square2,
    "psi_vanish": _vanish,
    "trivial_action": _trivial_action,
}


# ---------------------------------------------------------------------------
# public tactics


def _prover_for(args, prover):
    if prover is not None:
        return prover
    tower = any(isinstance(a, TowerElement) for a in args)
    return Prover(TOWER if tower else RATIONAL)


def tactic_psi_additivity(x, y, i: int = 1, prover=None):
    """ψ_i(xy) = ⟨x⟩ψ_i(y) + ψ_i(x)."""
    return _prover_for([x, y], prover).prove(f"psi_mult_{i}", [x, y])


def tactic_psi_swap(x, y, i: int = 1, prover=None):
    """⟨⟨x⟩⟩ψ_i(y) = ⟨⟨y⟩⟩ψ_i(x)."""
    return _prover_for([x, y], prover).prove(f"psi_swap_{i}", [x, y])


def tactic_psi_order2(i: int = 1, prover=None):
    """2ψ_i(−1) = 0."""
    p = _prover_for([], prover)
    return p.prove(f"psi_order2_{i}", [p.element(-1)])


def tactic_psi_square(x, i: int = 1, prover=None):
    """ψ_i(x²) = ⟨⟨x⟩⟩ψ_i(−1)."""
    return _prover_for([x], prover).prove(f"psi_square_{i}", [x])


def tactic_psi_double_square(x, i: int = 1, prover=None):
    """2ψ_i(x²) = 0, composed from the order-2 and square identities."""
    return _prover_for([x], prover).prove(f"psi_square2_{i}", [x])


def tactic_psi_vanish_positive(x, i: int = 1, prover=None):
    """ψ_i(x) = 0 for x > 0 in the tower."""
    p = prover or Prover(TOWER)
    x = p.element(x)
    if x == 1:
        return p.prove(f"psi_vanish_{i}", [x])
    _require_positive_tower(x)
    return p.prove(f"psi_vanish_{i}", [x])


def tactic_trivial_action(x, prover=None):
    """⟨−1⟩[x] = [x] in the tower."""
    p = prover or Prover(TOWER)
    x = p.element(x)
    if x == 0 or x == 1:
        raise ValueError("the trivial action claim needs x outside {0, 1}")
    return p.prove("trivial_action", [x])


def tactic_c_constant(x, y, prover=None):
    """C(x) = C(y)."""
    p = _prover_for([x, y], prover)
    x, y = p.element(x), p.element(y)
    for v in (x, y):
        if v == 0 or v == 1:
            raise ValueError("C(x) needs x outside {0, 1}")
    return p.prove("c_constant", [x, y])


def tactic_c_symmetric(x, prover=None):
    """⟨−1⟩C(x) = C(x)."""
    p = _prover_for([x], prover)
    x = p.element(x)
    if x == 0 or x == 1:
        raise ValueError("C(x) needs x outside {0, 1}")
    return p.prove("c_symmetric", [x])


__all__ = [
    "Prover", "CertificationFailed", "tactic_psi_additivity", "tactic_psi_swap", "tactic_psi_order2",
    "tactic_psi_square", "tactic_psi_double_square", "tactic_psi_vanish_positive",
    "tactic_trivial_action", "tactic_c_constant", "tactic_c_symmetric", "TowerError",
]
