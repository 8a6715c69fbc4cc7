"""The trusted kernel: a certificate is checked by re-expanding S_{x,y} and comparing.

Nothing else is trusted.  Templates, lemma reuse and search only produce
candidate certificates; every one of them passes through :func:`check_certificate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..bloch import RPElement, RelationError, s_relation
from ..expr import as_node, evaluate, to_node
from ..fields import is_tower, sort_key
from ..squares import GroupRingElement


@dataclass(frozen=True)
class IdentityClaim:
    """The assertion ``target = 0`` in RP(F)."""

    target: RPElement
    label: str = ""

    def to_json(self):
        return {"target": self.target.to_json(), "label": self.label}

    @classmethod
    def from_json(cls, data, backend="rational") -> "IdentityClaim":
        return cls(RPElement.from_json(data["target"], backend), data.get("label", ""))


@dataclass
class Certificate:
    """``terms``: list of (group-ring coefficient, (x, y)) meaning Σ r · S_{x,y}."""

    terms: list = field(default_factory=list)

    @classmethod
    def combine(cls, parts) -> "Certificate":
        """Sum of (multiplier, certificate) parts, merged per instance."""
        merged: dict = {}
        order = []
        for mult, cert in parts:
            mult = _as_gr(mult)
            for r, xy in cert.terms:
                if xy not in merged:
                    merged[xy] = GroupRingElement()
                    order.append(xy)
                merged[xy] = merged[xy] + mult * r
        return cls([(merged[xy], xy) for xy in order if merged[xy]])

    def scaled(self, mult) -> "Certificate":
        return Certificate.combine([(mult, self)])

    def __add__(self, other):
        return Certificate.combine([(1, self), (1, other)])

    def __sub__(self, other):
        return Certificate.combine([(1, self), (-1, other)])

    def __len__(self):
        return len(self.terms)

    def size(self) -> int:
        """Number of (class, instance) monomials."""
        return sum(len(r.terms) for r, _ in self.terms)

    def sorted_terms(self):
        return sorted(self.terms, key=lambda t: (sort_key(t[1][0]), sort_key(t[1][1])))

    def to_json(self):
        tower = any(is_tower(x) for _, xy in self.terms for x in xy)
        return [
            {"coefficient": r.to_json(tower), "x": to_node(x), "y": to_node(y)}
            for r, (x, y) in self.sorted_terms()
        ]

    @classmethod
    def from_json(cls, data, backend="rational") -> "Certificate":
        terms = []
        for t in data:
            x = evaluate(as_node(t["x"]), backend)
            y = evaluate(as_node(t["y"]), backend)
            terms.append((GroupRingElement.from_json(t["coefficient"]), (x, y)))
        return cls(terms)


def _as_gr(m):
    if isinstance(m, GroupRingElement):
        return m
    return GroupRingElement.unit(n=m) if isinstance(m, int) else GroupRingElement.unit(m)


def expand(cert: Certificate) -> RPElement:
    """Σ r · S_{x,y}, in the free module.  Malformed instances raise RelationError."""
    flat: dict = {}
    for r, (x, y) in cert.terms:
        s = s_relation(x, y)
        for c, m in r.terms.items():
            for (g, k), n in s.flat.items():
                key = (g, c * k)
                v = flat.get(key, 0) + m * n
                if v:
                    flat[key] = v
                else:
                    flat.pop(key, None)
    return RPElement(flat)


def check_certificate(claim, cert: Certificate) -> bool:
    """True iff the certificate expands exactly to the claim's target."""
    target = claim.target if isinstance(claim, IdentityClaim) else claim
    for _, (x, y) in cert.terms:
        if x == 0 or y == 0 or x == 1 or y == 1 or x == y:
            raise RelationError(f"malformed relation instance ({x}, {y})")
    return expand(cert) == target
