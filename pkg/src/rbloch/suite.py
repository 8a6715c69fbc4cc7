"""The verification suite: every in-scope result re-checked, one report entry each.

Entries are either property checks (status CHECKED, or REFUTED with a
counterexample) or certified identities (PROVED, or NOT_FOUND with search
diagnostics).  Entries bound to the tower backend are SKIPPED when the run
uses the rational backend.

Randomness: each entry draws from ``random.Random(f"{seed}/{label}")``, so an
entry's samples depend only on the seed and its own label, not on worker
scheduling or on which other entries ran.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import bloch, configurations as cfg, milnor, squares
from .certify.kernel import check_certificate
from .certify.tactics import CertificationFailed, Prover
from .expr import Evaluator, as_node
from .fields import MINUS_CLASS, RATIONAL, FieldError, get_backend, sign, square_class
from .tower import TowerElement, common_context

SCHEMA = "rbloch-suite/1"
PROVED, REFUTED, CHECKED, NOT_FOUND, SKIPPED = "PROVED", "REFUTED", "CHECKED", "NOT_FOUND", "SKIPPED"

PROP_POINTS = [(2, 3), (2, 2), (-1, 2)]
C_PAIRS = [("2", "3"), ("2", "-1"), ("3", "-5/7"), ("1/2", "5"), ("-2", "-3")]
C_SYM_POINTS = ["2", "-1", "3", "-5/7"]


@dataclass(frozen=True)
class RunConfig:
    """Suite parameters.  ``samples`` drives the tactic sample counts; property checks use 5x."""

    backend: str = "tower"
    seed: int = 0
    samples: int = 20
    pool_depth: int = 3
    tower_depth: int = 8
    format: str = "text"
    workers: int = 1
    timings: bool = False
    cert_dir: str | None = None

    def validate(self):
        if self.backend not in ("rational", "tower"):
            raise ValueError(f"backend must be rational or tower, not {self.backend!r}")
        if self.format not in ("text", "json"):
            raise ValueError(f"format must be text or json, not {self.format!r}")
        for name in ("samples", "pool_depth", "tower_depth", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        return self

    def report_view(self):
        # workers, format, timings and cert_dir do not affect results
        return {"backend": self.backend, "seed": self.seed, "samples": self.samples,
                "pool_depth": self.pool_depth, "tower_depth": self.tower_depth}


@dataclass
class Outcome:
    status: str
    detail: dict = field(default_factory=dict)
    certificates: list = field(default_factory=list)  # (claim, certificate)


class _Refuted(Exception):
    def __init__(self, **detail):
        super().__init__(detail)
        self.detail = detail


def _expect(ok, **detail):
    if not ok:
        raise _Refuted(**{k: str(v) for k, v in detail.items()})


# ---------------------------------------------------------------------------
# property checks


def _tower_depth(c):
    return min(4, c.tower_depth)


def field_axioms(c: RunConfig, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        if backend.is_tower:
            ctx = backend.random_context(rng, rng.randint(0, _tower_depth(c)))
            a, b, d = (backend.random_element(rng, ctx=ctx) for _ in range(3))
        else:
            a, b, d = (backend.random_element(rng) for _ in range(3))
        _expect((a + b) + d == a + (b + d) and (a * b) * d == a * (b * d), a=a, b=b, d=d)
        _expect(a * (b + d) == a * b + a * d, a=a, b=b, d=d)
        _expect(a * (1 / a) == 1 and a - a == 0, a=a)
        if backend.is_tower:
            s = abs(a)
            root = backend.sqrt(s)
            _expect(root * root == s and root.sign() > 0, a=a)
            lo, hi = a.interval(128)
            _expect((lo > 0 and a.sign() > 0) or (hi < 0 and a.sign() < 0) or lo <= 0 <= hi, a=a)
    return {"elements": n}


def two_square_classes(c, rng, backend):
    n = 5 * c.samples
    seen = set()
    for _ in range(n):
        x = backend.random_element(rng, depth=rng.randint(0, _tower_depth(c)))
        y = backend.random_element(rng, depth=rng.randint(0, _tower_depth(c)), ctx=x.ctx)
        seen.add(square_class(x))
        _expect(square_class(x * y) == square_class(x) * square_class(y), x=x, y=y)
    _expect(seen == {square_class(Fraction(1)), MINUS_CLASS}, classes=sorted(map(repr, seen)))
    return {"elements": n, "classes": len(seen)}


def bracket_identities(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        x, y = _pair(rng, backend, c)
        bx, by = squares.bracket(x), squares.bracket(y)
        _expect(squares.bracket(x * y) == bx + by + bx * by, x=x, y=y)
        _expect(bx * bx == -2 * bx and bx.epsilon() == 0, x=x)
        _expect(squares.in_I2(bx * by), x=x, y=y)
    return {"pairs": n}


def wedge_halving(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        x, y = _pair(rng, backend, c)
        w, basis = squares.halve_wedge(x, y)
        _expect(w * 2 == squares.expand_wedge(x, y, basis), x=x, y=y)
    return {"pairs": n}


def lambda_well_defined(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        x, y = _rational_pair(rng)
        _expect(bloch.lambda_classical(bloch.r_relation(x, y)).is_zero(), x=x, y=y)
    return {"pairs": n, "basis": "primes"}


def big_lambda_well_defined(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        x, y = _pair(rng, backend, c)
        s = bloch.s_relation(x, y)
        _expect(bloch.lambda1(s).is_zero(), x=x, y=y)
        _expect(bloch.coinvariants(s) == bloch.r_relation(x, y), x=x, y=y)
        if not backend.is_tower:
            _expect(bloch.big_lambda(s).is_zero(), x=x, y=y)
    return {"pairs": n}


def c_in_refined_bloch(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        x = _rational_point(rng)
        e = bloch.c_element(x)
        _expect(bloch.big_lambda(e).is_zero(), x=x)
        _expect(bloch.coinvariants(e) == bloch.coinvariants(bloch.gen(x) + bloch.gen(1 - x)), x=x)
    return {"points": n}


def lambda1_vanishes_tower(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        x = _point(rng, backend, c)
        _expect(bloch.lambda1(bloch.gen(x)).is_zero(), x=x)
    return {"points": n}


def g_invariance(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        g = _random_sl2(rng, backend)
        length = rng.randint(3, 6)
        pts = _distinct_points(rng, backend, c, length)
        moved = [cfg.moebius_apply(g, p) for p in pts]
        _expect(cfg.canonicalize(moved) == cfg.canonicalize(pts), g=g, points=pts)
        z = cfg.canonicalize(pts)[1]
        if z:
            _expect(cfg.canonicalize(cfg.representative(z)) == (square_class(Fraction(1)), z), z=z)
    return {"matrices": n}


def boundary_squared(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        pts = _distinct_points(rng, backend, c, 5)
        _expect(cfg.boundary(cfg.boundary(cfg.Chain.of(*pts))).is_zero(), points=pts)
        z = cfg.canonicalize(pts)[1]
        e = cfg.RFModuleElement.gen(z, squares.GroupRingElement.unit(square_class(_point(rng, backend, c))))
        _expect(cfg.induced_d1(cfg.induced_d1(e)).is_zero(), z=z)
    return {"tuples": n}


def d1_matches_lambda1(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        z = _rational_point(rng)
        lhs = cfg.induced_d1(cfg.RFModuleElement.gen((z,)))
        rhs = cfg.rf_from_group_ring(bloch.lambda1(bloch.gen(z)) * cfg.D1_SIGN)
        _expect(lhs == rhs, z=z)
    return {"points": n, "sign": cfg.D1_SIGN}


def d1_worked_example(c, rng, backend):
    two = Fraction(2)
    got = cfg.induced_d1(cfg.RFModuleElement.gen((two,))).coefficient()
    want = squares.GroupRingElement({MINUS_CLASS: 1, square_class(Fraction(-2)): -1,
                                     square_class(two): 1, square_class(Fraction(1)): -1})
    _expect(got == want, got=got, want=want)
    return {"value": repr(got)}


def steinberg_mod2(c, rng, backend):
    n = 5 * c.samples
    for _ in range(n):
        x = _point(rng, backend, c)
        s = (x, 1 - x)
        _expect(milnor.steinberg_trivial(s) and milnor.mod2_reduce(s).to_json() == "ZERO", x=x)
    return {"symbols": n}


def sign_extraction(c, rng, backend):
    got = milnor.mod2_reduce((backend.element(-2), backend.element(-3))).to_json()
    _expect(got == ["-1", "-1"], got=got)
    for k in range(1, 5):
        for pattern in range(1 << k):
            s = [backend.element(-(i + 2) if pattern >> i & 1 else i + 2) for i in range(k)]
            nf = milnor.mod2_reduce(s).to_json()
            _expect(nf == (["-1"] * k if pattern == (1 << k) - 1 else "ZERO"), symbol=s)
    return {"degrees": [1, 2, 3, 4]}


def symbol_halving(c, rng, backend):
    n = 5 * c.samples
    done = 0
    while done < n:
        k = rng.randint(1, 3)
        ctx = backend.random_context(rng, rng.randint(0, 2))
        entries = []
        while len(entries) < k:
            e = abs(backend.random_element(rng, ctx=ctx))
            if e != 1:
                entries.append(e)
        w = milnor.halve_positive_symbol(entries)
        basis = _independent_basis([next(iter(w.terms))[0], *entries[1:]])
        if basis is None:
            continue  # resample: the entries are multiplicatively dependent
        doubled = {key: 2 * v for key, v in milnor.expand_km(w, basis).items()}
        _expect(doubled == milnor.expand_km(milnor.KMElement.of(*entries), basis), symbol=entries)
        done += 1
    return {"symbols": n}


def _independent_basis(elements):
    ctx = common_context(elements)
    elems = []
    for e in elements:
        e = e.promote(ctx)
        if all(e != f for f in elems):
            elems.append(e)
    try:
        return squares.TowerBasis(elems)
    except FieldError:
        return None


# ---------------------------------------------------------------------------
# certified identities


def _prover(c, backend):
    return Prover(backend, depth=c.pool_depth)


def _prove_all(prover, items):
    certs = []
    for name, args in items:
        claim, cert = prover.prove(name, args)
        if not check_certificate(claim, cert):
            raise AssertionError(f"{claim.label}: certificate failed the kernel check")
        certs.append((claim, cert))
    return certs


def _prop_items(kind, backend):
    items = []
    for i in (1, 2):
        if kind == "order_two":
            items.append((f"psi_order2_{i}", [backend.element(-1)]))
            continue
        for x, y in PROP_POINTS:
            x, y = backend.element(x), backend.element(y)
            if kind == "additivity":
                items.append((f"psi_mult_{i}", [x, y]))
            elif kind == "swap":
                items.append((f"psi_swap_{i}", [x, y]))
            elif kind == "square":
                items.extend([(f"psi_square_{i}", [x]), (f"psi_square_{i}", [y])])
            elif kind == "double_square":
                items.extend([(f"psi_square2_{i}", [x]), (f"psi_square2_{i}", [y])])
    seen, out = set(), []
    for name, args in items:
        if (name, tuple(args)) not in seen:
            seen.add((name, tuple(args)))
            out.append((name, args))
    return out


def _psi_entry(kind):
    def run(c, rng, backend):
        return _prove_all(_prover(c, backend), _prop_items(kind, backend))
    return run


def c_constant(c, rng, backend):
    p = _prover(c, backend)
    items = []
    for xs, ys in C_PAIRS:
        ev = Evaluator(backend)
        items.append(("c_constant", [ev(as_node(xs)), ev(as_node(ys))]))
    return _prove_all(p, items)


def c_symmetric(c, rng, backend):
    p = _prover(c, backend)
    return _prove_all(p, [("c_symmetric", [Evaluator(backend)(as_node(x))]) for x in C_SYM_POINTS])


def psi_vanish_positive(c, rng, backend):
    p = _prover(c, backend)
    xs = _signed_samples(rng, backend, c, c.samples, positive=True)
    return _prove_all(p, [(f"psi_vanish_{i}", [x]) for x in xs for i in (1, 2)])


def trivial_action(positive):
    def run(c, rng, backend):
        p = _prover(c, backend)
        xs = _signed_samples(rng, backend, c, c.samples, positive=positive)
        if not positive:
            xs[0] = backend.element(-1)
        return _prove_all(p, [("trivial_action", [x]) for x in xs])
    return run


def c_two_term(c, rng, backend):
    # for x < 0, C(x) − ([x] + [1−x]) = ⟨−1⟩[1−x] − [1−x], which is the trivial-action claim at 1 − x
    p = _prover(c, backend)
    out = []
    for x in _signed_samples(rng, backend, c, max(1, c.samples // 4), positive=False):
        claim, cert = p.prove("trivial_action", [1 - x])
        diff = bloch.c_element(x) - bloch.gen(x) - bloch.gen(1 - x)
        if diff != claim.target:
            raise _Refuted(x=str(x), reason="difference is not the trivial-action target")
        out.append((claim, cert))
    return out


# ---------------------------------------------------------------------------
# registry: label -> (kind, runner, backend requirement)

ENTRIES = {
    "field.arithmetic_and_sign": ("check", field_axioms, None),
    "squares.two_classes": ("check", two_square_classes, "tower"),
    "squares.group_ring_identities": ("check", bracket_identities, None),
    "squares.wedge_two_divisible": ("check", wedge_halving, "tower"),
    "bloch.lambda_well_defined": ("check", lambda_well_defined, "rational"),
    "bloch.big_lambda_well_defined": ("check", big_lambda_well_defined, None),
    "bloch.c_in_refined_bloch": ("check", c_in_refined_bloch, "rational"),
    "psi.additivity": ("prove", _psi_entry("additivity"), None),
    "psi.swap": ("prove", _psi_entry("swap"), None),
    "psi.order_two": ("prove", _psi_entry("order_two"), None),
    "psi.square": ("prove", _psi_entry("square"), None),
    "psi.double_square": ("prove", _psi_entry("double_square"), None),
    "c.constant": ("prove", c_constant, None),
    "c.symmetric": ("prove", c_symmetric, None),
    "real.lambda1_vanishes": ("check", lambda1_vanishes_tower, "tower"),
    "real.psi_vanish_positive": ("prove", psi_vanish_positive, "tower"),
    "real.trivial_action_positive": ("prove", trivial_action(True), "tower"),
    "real.trivial_action_negative": ("prove", trivial_action(False), "tower"),
    "real.c_two_term_form": ("prove", c_two_term, "tower"),
    "config.g_invariance_round_trip": ("check", g_invariance, None),
    "config.boundary_squared_zero": ("check", boundary_squared, None),
    "config.d1_matches_lambda1": ("check", d1_matches_lambda1, "rational"),
    "config.d1_worked_example": ("check", d1_worked_example, "rational"),
    "milnor.steinberg_mod2": ("check", steinberg_mod2, "tower"),
    "milnor.sign_extraction": ("check", sign_extraction, "tower"),
    "milnor.two_divisible": ("check", symbol_halving, "tower"),
}


def run_entry(label: str, config: RunConfig) -> dict:
    kind, runner, needs = ENTRIES[label]
    entry = {"label": label}
    t0 = time.perf_counter()
    if needs == "tower" and config.backend != "tower":
        entry.update(status=SKIPPED, detail={"reason": "needs the tower backend"})
    else:
        backend = get_backend(needs or config.backend, config.tower_depth)
        rng = random.Random(f"{config.seed}/{label}")
        try:
            res = runner(config, rng, backend)
            if kind == "check":
                entry.update(status=CHECKED, detail=res)
            else:
                entry.update(status=PROVED, **_cert_summary(label, res, config))
        except _Refuted as exc:
            entry.update(status=REFUTED, detail=exc.detail)
        except CertificationFailed as exc:
            entry.update(status=NOT_FOUND, detail={"claim": exc.claim.label, **exc.outcome.to_json()})
        if needs:
            entry.setdefault("detail", {})["backend"] = needs
    if config.timings:
        entry["elapsed"] = round(time.perf_counter() - t0, 3)
    return entry


def _cert_summary(label, certs, config):
    data = [{"claim": claim.to_json(), "certificate": cert.to_json()} for claim, cert in certs]
    blob = json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    ref = "sha256:" + hashlib.sha256(blob).hexdigest()[:16]
    if config.cert_dir:
        out = Path(config.cert_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{label}.json").write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")
    return {
        "certificate": ref,
        "detail": {
            "claims": len(certs),
            "instances": sum(len(cert) for _, cert in certs),
            "terms": sum(cert.size() for _, cert in certs),
        },
    }


def run_suite(config: RunConfig, labels=None) -> dict:
    config.validate()
    labels = sorted(labels or ENTRIES)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            entries = list(pool.map(run_entry, labels, [config] * len(labels)))
    else:
        entries = [run_entry(label, config) for label in labels]
    entries.sort(key=lambda e: e["label"])
    summary = {}
    for e in entries:
        summary[e["status"]] = summary.get(e["status"], 0) + 1
    ok = not any(e["status"] in (REFUTED, NOT_FOUND) for e in entries)
    return {"schema": SCHEMA, "config": config.report_view(), "entries": entries,
            "summary": summary, "ok": ok}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines = [f"{SCHEMA}  backend={report['config']['backend']} seed={report['config']['seed']}"]
    for e in report["entries"]:
        extra = e.get("certificate", "")
        t = f"  {e['elapsed']:.2f}s" if "elapsed" in e else ""
        lines.append(f"{e['status']:<9} {e['label']:<34} {extra}{t}".rstrip())
    lines.append(" ".join(f"{k}={v}" for k, v in sorted(report["summary"].items())))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sampling helpers


def _rational_point(rng):
    while True:
        x = Fraction(rng.randint(-60, 60), rng.randint(1, 30))
        if x not in (0, 1):
            return x


def _rational_pair(rng):
    while True:
        x, y = _rational_point(rng), _rational_point(rng)
        if x != y:
            return x, y


def _point(rng, backend, c, ctx=None):
    while True:
        if backend.is_tower:
            x = backend.random_element(rng, depth=rng.randint(0, min(2, c.tower_depth)), ctx=ctx)
        else:
            x = backend.random_element(rng)
        if x != 0 and x != 1:
            return x


def _pair(rng, backend, c):
    while True:
        x = _point(rng, backend, c)
        y = _point(rng, backend, c, ctx=x.ctx if isinstance(x, TowerElement) else None)
        if x != y:
            return x, y


def _signed_samples(rng, backend, c, n, positive):
    # samples live in unrelated towers, so duplicates are detected by canonical key
    out, seen = [], set()
    while len(out) < n:
        x = _point(rng, backend, c)
        key = x.key() if isinstance(x, TowerElement) else x
        if (sign(x) > 0) == positive and key not in seen:
            seen.add(key)
            out.append(x)
    return out


def _distinct_points(rng, backend, c, k):
    ctx = backend.random_context(rng, rng.randint(0, 1)) if backend.is_tower else None
    pts = []
    while len(pts) < k:
        if rng.random() < 0.15 and cfg.INFINITY not in pts:
            p = cfg.INFINITY
        else:
            x = backend.random_element(rng, ctx=ctx) if backend.is_tower else backend.random_element(rng)
            p = cfg.point(x if rng.random() < 0.9 else x - x)
        if p not in pts:
            pts.append(p)
    return pts


def _random_sl2(rng, backend):
    while True:
        a, b, c = (Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3))
        if a != 0:
            d = (1 + b * c) / a
            one = backend.element(1)
            return cfg.SL2Matrix(one * a, one * b, one * c, one * d)


__all__ = ["RunConfig", "run_suite", "run_entry", "render", "ENTRIES", "SCHEMA",
           "PROVED", "REFUTED", "CHECKED", "NOT_FOUND", "SKIPPED", "RATIONAL", "asdict"]
