"""Claims by name, and frozen certificate templates.

A template is a certificate found once at generic arguments and stored in
terms of its point expressions, so it can be replayed at other arguments:

* ``points``: text expressions in the claim variables (0, ∞, 1 are implicit
  and occupy indices 0, 1, 2);
* ``generators``: expressions whose square classes generate the multipliers;
* ``terms``: ``[n, exponents, [i0..i4]]`` meaning n·⟨∏ g^e⟩ times the relation
  instance of the 5-tuple of points (⟨φ⟩ S_{z1,z2} in canonical form);
* ``lemmas``: ``[n, exponents, name, [arg expressions]]`` meaning n·⟨∏ g^e⟩
  times a certificate of another named claim.

A replayed template is only a candidate.  The prover kernel-checks it and
falls back to direct search if it is degenerate or fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..bloch import PSI, RPElement, c_element, gen
from ..configurations import INFINITY, ConfigurationError, canonicalize, phi, point
from ..expr import Evaluator
from ..fields import MINUS_CLASS, ONE_CLASS, FieldError, square_class
from ..squares import GroupRingElement, bracket
from .kernel import Certificate

FIXTURE_DIR = Path(__file__).with_name("fixtures")


def _one(x):
    return x / x


# ---------------------------------------------------------------------------
# named claims: name -> (arity, target builder)


def _psi_mult(i):
    return lambda x, y: PSI[i](x * y) - PSI[i](y).shift(square_class(x)) - PSI[i](x)


def _psi_swap(i):
    return lambda x, y: bracket(x) * PSI[i](y) - bracket(y) * PSI[i](x)


def _psi_order2(i):
    return lambda m1: 2 * PSI[i](m1)


def _psi_square(i):
    return lambda x: PSI[i](x * x) - bracket(x) * PSI[i](-_one(x))


def _psi_square2(i):
    return lambda x: 2 * PSI[i](x * x)


def _psi_vanish(i):
    return lambda x: PSI[i](x)


CLAIMS = {}
for _i in (1, 2):
    CLAIMS[f"psi_mult_{_i}"] = (2, _psi_mult(_i))
    CLAIMS[f"psi_swap_{_i}"] = (2, _psi_swap(_i))
    CLAIMS[f"psi_order2_{_i}"] = (1, _psi_order2(_i))
    CLAIMS[f"psi_square_{_i}"] = (1, _psi_square(_i))
    CLAIMS[f"psi_square2_{_i}"] = (1, _psi_square2(_i))
    CLAIMS[f"psi_vanish_{_i}"] = (1, _psi_vanish(_i))
CLAIMS["c_inverse"] = (1, lambda x: c_element(x) - c_element(_one(x) / x))
CLAIMS["c_reflect"] = (1, lambda x: c_element(x) - c_element(_one(x) - x))
CLAIMS["c_symmetric"] = (1, lambda x: c_element(x).shift(MINUS_CLASS) - c_element(x))
CLAIMS["c_constant"] = (2, lambda x, y: c_element(x) - c_element(y) if x != y else RPElement())
CLAIMS["trivial_action"] = (1, lambda x: gen(x, MINUS_CLASS) - gen(x))


def claim_target(name: str, args) -> RPElement:
    arity, build = CLAIMS[name]
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} argument(s)")
    return build(*args)


# ---------------------------------------------------------------------------
# templates


@dataclass
class Template:
    name: str
    variables: list
    points: list
    generators: list = field(default_factory=list)
    terms: list = field(default_factory=list)
    lemmas: list = field(default_factory=list)
    discovered_at: dict = field(default_factory=dict)
    notes: str = ""

    @classmethod
    def from_json(cls, data) -> "Template":
        return cls(
            name=data["name"],
            variables=list(data["variables"]),
            points=list(data["points"]),
            generators=list(data.get("generators", [])),
            terms=[list(t) for t in data.get("terms", [])],
            lemmas=[list(t) for t in data.get("lemmas", [])],
            discovered_at=dict(data.get("discovered_at", {})),
            notes=data.get("notes", ""),
        )

    def to_json(self):
        return {
            "name": self.name,
            "variables": self.variables,
            "discovered_at": self.discovered_at,
            "notes": self.notes,
            "points": self.points,
            "generators": self.generators,
            "terms": self.terms,
            "lemmas": self.lemmas,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"


class Degenerate(ValueError):
    """A template cannot be replayed at these arguments (points collide)."""


def load_templates(directory: Path | None = None) -> dict:
    out = {}
    if directory is None:
        files = [f for f in resources.files(__package__).joinpath("fixtures").iterdir() if f.name.endswith(".json")]
    else:
        files = sorted(Path(directory).glob("*.json"))
    for f in sorted(files, key=lambda f: f.name):
        data = json.loads(f.read_text())
        t = Template.from_json(data)
        out[t.name] = t
    return out


def instantiate(t: Template, args, backend, lemma_prover=None) -> Certificate:
    """Replay a template.  Raises Degenerate if points collide at these arguments."""
    env = dict(zip(t.variables, args))
    ev = Evaluator(backend, env, ctx=_context_of(args))
    like = args[0] if args else backend.element(1)
    one = _one(like)
    pts = [point(one - one), INFINITY, point(one)]
    try:
        for text in t.points:
            pts.append(point(ev(_node(text))))
        gens = [ev(_node(g)) for g in t.generators]
    except (FieldError, ZeroDivisionError) as exc:
        raise Degenerate(f"template {t.name}: {exc}") from None
    if len(set(pts)) != len(pts):
        raise Degenerate(f"template {t.name}: points collide at these arguments")
    if any(g == 0 for g in gens):
        raise Degenerate(f"template {t.name}: a multiplier generator vanishes")
    gclass = [square_class(g) for g in gens]

    def mult(exps):
        c = ONE_CLASS
        for e, g in zip(exps, gclass):
            if e % 2:
                c = c * g
        return c

    phis = {}

    def phi_at(i, j, k):
        v = phis.get((i, j, k))
        if v is None:
            v = phis[i, j, k] = phi(pts[i], pts[j], pts[k])
        return v

    merged: dict = {}
    order = []
    for n, exps, idx in t.terms:
        i, j, k, a, b = idx
        p2 = phi_at(i, j, k)
        c = square_class(p2) * mult(exps)
        xy = (phi_at(i, j, a) / p2, phi_at(i, j, b) / p2)
        if xy not in merged:
            merged[xy] = {}
            order.append(xy)
        merged[xy][c] = merged[xy].get(c, 0) + int(n)
    cert = Certificate([(GroupRingElement(merged[xy]), xy) for xy in order])
    cert = Certificate([(r, xy) for r, xy in cert.terms if r])
    parts = [(1, cert)]
    for n, exps, name, arg_texts in t.lemmas:
        if lemma_prover is None:
            raise ValueError(f"template {t.name} needs a lemma prover")
        try:
            largs = [ev(_node(a)) for a in arg_texts]
        except (FieldError, ZeroDivisionError) as exc:
            raise Degenerate(f"template {t.name}: lemma argument: {exc}") from None
        _, sub = lemma_prover(name, largs)
        parts.append((GroupRingElement.unit(mult(exps), int(n)), sub))
    return Certificate.combine(parts)


def _context_of(args):
    from ..tower import TowerElement, common_context

    if any(isinstance(a, TowerElement) for a in args):
        return common_context(args)
    return None


def _node(text):
    from ..expr import as_node

    return as_node(text)


def canonical_triple(points5):
    """(class, z1, z2) of a 5-tuple; exposed for discovery."""
    c, z = canonicalize(points5)
    return c, z[0], z[1]


__all__ = [
    "CLAIMS", "claim_target", "Template", "Degenerate", "load_templates", "instantiate",
    "FIXTURE_DIR", "canonical_triple", "ConfigurationError",
]
