"""Offline discovery of certificate templates.

Each entry of :data:`SPECS` names a claim, generic rational arguments, the
point set to search over and (optionally) multiplier generators and lemma
families.  :func:`discover` runs the integer search once and records the
answer in the point-index form understood by :func:`library.instantiate`.
The output is checked by replaying it before it is written.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path

from ..expr import Evaluator, as_node
from ..fields import RATIONAL, square_class
from .kernel import IdentityClaim, check_certificate
from .library import FIXTURE_DIR, Template, claim_target, instantiate
from .pool import InstancePool
from .search import NotFound, solve_in_pool

GENERIC = {"x": Fraction(1009, 331), "y": Fraction(-2741, 5003)}
ORBIT = ["x", "1/x", "1-x", "1/(1-x)", "x/(x-1)", "(x-1)/x"]
V = ["x", "y", "1-x", "1-y", "1/x", "1/y"]


@dataclass
class Spec:
    name: str
    variables: list
    points: list
    generators: list = field(default_factory=list)
    lemma_names: list = field(default_factory=list)
    lemma_args: list = field(default_factory=list)  # list of arg-expression lists
    values: dict | None = None
    notes: str = ""


def _lemma_family():
    fam = []
    for a in V:
        for b in V:
            for i in (1, 2):
                fam.append((f"psi_mult_{i}", [a, b]))
                fam.append((f"psi_swap_{i}", [a, b]))
    for a in V:
        fam.append(("c_reflect", [a]))
        fam.append(("c_inverse", [a]))
    return fam


SPECS = {}
for _i in (1, 2):
    SPECS[f"psi_mult_{_i}"] = Spec(f"psi_mult_{_i}", ["x", "y"], ["x", "y", "x*y"])
    SPECS[f"psi_swap_{_i}"] = Spec(f"psi_swap_{_i}", ["x", "y"], ["x", "y", "x*y"])
    SPECS[f"psi_square_{_i}"] = Spec(f"psi_square_{_i}", ["x"], ["-1", "x", "-x", "x*x"])
    SPECS[f"psi_order2_{_i}"] = Spec(f"psi_order2_{_i}", ["m"], ["m", "2", "1/2", "-2"],
                                     values={"m": Fraction(-1)},
                                     notes="used only at m = -1")
SPECS["c_inverse"] = Spec("c_inverse", ["x"], ORBIT, generators=["-1", "x", "1-x"])
SPECS["c_reflect"] = Spec("c_reflect", ["x"], ORBIT, generators=["-1", "x", "1-x"])
SPECS["c_symmetric"] = Spec("c_symmetric", ["x"], ORBIT, generators=["-1", "x", "1-x"])
SPECS["c_constant"] = Spec(
    "c_constant", ["x", "y"], ["x", "y"],
    generators=["-1", "x", "1-x", "y", "1-y"],
    lemma_names=[n for n, _ in _lemma_family()],
    lemma_args=[a for _, a in _lemma_family()],
    notes="S instances over {0, inf, 1, x, y} plus reuse of the psi and C(a) = C(1-a), C(a) = C(1/a) templates",
)


def _eval(text, env):
    return Evaluator(RATIONAL, env)(as_node(text))


def discover(spec: Spec, log=print) -> Template | NotFound:
    env = dict(spec.values or {v: GENERIC[v] for v in spec.variables})
    args = [env[v] for v in spec.variables]
    target = claim_target(spec.name, args)
    vals = [_eval(p, env) for p in spec.points]
    gens = [_eval(g, env) for g in spec.generators]
    gclass = [square_class(g) for g in gens]
    exps_of = {}
    for exps in product((0, 1), repeat=len(gens)):
        c = square_class(Fraction(1))
        for e, g in zip(exps, gclass):
            if e:
                c = c * g
        exps_of.setdefault(c, list(exps))
    mults = tuple(exps_of) if gens else None
    kw = {"multipliers": mults} if mults else {}
    kw["max_columns"] = 10**7
    pool = InstancePool.from_values(vals, like=Fraction(1), **kw)
    if len(pool.points) != len(vals) + 3:
        raise ValueError(f"{spec.name}: generic points collide")
    extra = []
    for name, arg_texts in zip(spec.lemma_names, spec.lemma_args):
        largs = [_eval(a, env) for a in arg_texts]
        try:
            vec = claim_target(name, largs)
        except (ValueError, ZeroDivisionError):
            continue
        if vec.is_zero():
            continue
        for c, exps in exps_of.items():
            extra.append(((name, arg_texts, exps), vec.shift(c).flat))
    t0 = time.time()
    out = solve_in_pool(target.flat, pool, extra=extra)
    if isinstance(out, NotFound):
        log(f"{spec.name}: {out.reason}")
        return out
    keys = pool.keys()
    origins = pool.origins()
    index = {k: i for i, k in enumerate(keys)}
    terms = []
    for r, (z1, z2) in out.certificate.terms:
        for c, n in r.items():
            t, m = origins[index[(c, z1, z2)]]
            exps = exps_of[mults[m]] if mults else []
            terms.append([n, exps, list(t)])
    terms.sort(key=lambda t: (t[2], t[1], t[0]))
    lemmas = sorted([n, lab[2], lab[0], lab[1]] for n, lab in out.extra_uses)
    tpl = Template(
        name=spec.name,
        variables=spec.variables,
        points=spec.points,
        generators=spec.generators,
        terms=terms,
        lemmas=lemmas,
        discovered_at={v: str(env[v]) for v in spec.variables},
        notes=spec.notes,
    )
    log(f"{spec.name}: {len(terms)} terms, {len(lemmas)} lemma uses, {time.time() - t0:.1f}s")
    return tpl


# generic points where every template must replay; degenerate ones are skipped
VALIDATION = {
    1: [(Fraction(11, 5),), (Fraction(-17, 7),), (Fraction(29, 11),), (Fraction(-3),)],
    2: [(Fraction(11, 5), Fraction(-17, 7)), (Fraction(29, 11), Fraction(5, 3)), (Fraction(-3), Fraction(4))],
}
ORDER = [
    "psi_order2_1", "psi_order2_2", "psi_mult_1", "psi_mult_2", "psi_swap_1", "psi_swap_2",
    "psi_square_1", "psi_square_2", "c_inverse", "c_reflect", "c_symmetric", "c_constant",
]


def validate(tpl: Template, prover) -> list:
    """Replay results at the validation points: True, False or 'degenerate'."""
    from .library import Degenerate

    if tpl.name.startswith("psi_order2"):
        points = [(Fraction(-1),)]
    else:
        points = VALIDATION[len(tpl.variables)]
    out = []
    for args in points:
        claim = IdentityClaim(claim_target(tpl.name, list(args)), tpl.name)
        try:
            cert = instantiate(tpl, list(args), RATIONAL, lemma_prover=prover.prove)
        except Degenerate:
            out.append("degenerate")
            continue
        out.append(check_certificate(claim, cert))
    return out


def discover_all(names=None, directory: Path = FIXTURE_DIR, log=print) -> bool:
    """Discover, validate and write templates in dependency order.  True iff all succeed."""
    from .tactics import Prover

    names = ORDER if not names else [n for n in ORDER if n in names]
    ok = True
    for name in names:
        tpl = discover(SPECS[name], log=log)
        if isinstance(tpl, NotFound):
            ok = False
            continue
        prover = Prover(RATIONAL, templates={**_load(directory), name: tpl})
        res = validate(tpl, prover)
        log(f"{name}: validation {res}")
        if False in res:
            ok = False
            continue
        write_template(tpl, directory)
    return ok


def _load(directory):
    from .library import load_templates

    return load_templates(directory) if Path(directory).exists() else {}


def write_template(tpl: Template, directory: Path = FIXTURE_DIR) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{tpl.name}.json"
    path.write_text(tpl.dumps())
    return path
