"""``rbloch`` command-line interface.

Global flags may be given before or after the verb.  Each one falls back to
an environment variable of the same name upper-cased (``--pool-depth`` reads
``POOL_DEPTH``) and then to the built-in default.

Exit codes: 0 when everything is green, 1 on refutation or failure, 2 on
usage and parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bloch import RelationError
from .certify.kernel import Certificate, IdentityClaim, check_certificate
from .certify.search import PROVED, REFUTED, refute_via_invariants
from .certify.tactics import (
    CertificationFailed,
    Prover,
    tactic_c_constant,
    tactic_c_symmetric,
    tactic_psi_additivity,
    tactic_psi_double_square,
    tactic_psi_order2,
    tactic_psi_square,
    tactic_psi_swap,
    tactic_psi_vanish_positive,
    tactic_trivial_action,
)
from .configurations import (
    INFINITY,
    ConfigurationError,
    RFModuleElement,
    boundary,
    canonicalize,
    config_tuple,
    induced_d1,
)
from .expr import Evaluator, ParseError, as_node, to_node, to_text
from .fields import FieldError, class_descriptor, get_backend, is_tower
from .milnor import KMElement, halve_positive_symbol, mod2_reduce
from .suite import RunConfig, render, run_suite
from .tower import TowerError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GLOBALS = {
    # flag: (type, default)
    "backend": (str, "tower"),
    "seed": (int, 0),
    "samples": (int, 20),
    "pool_depth": (int, 3),
    "tower_depth": (int, 8),
    "format": (str, "text"),
    "workers": (int, 1),
}

CLAIMS = {
    "psi-vanish": ("x",),
    "psi-additivity": ("x", "y"),
    "psi-swap": ("x", "y"),
    "psi-order2": (),
    "psi-square": ("x",),
    "psi-double-square": ("x",),
    "trivial-action": ("x",),
    "c-constant": ("x", "y"),
    "c-symmetric": ("x",),
}


class UsageError(Exception):
    pass


def _global_flags(parser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--backend", choices=("rational", "tower"), default=default)
    g.add_argument("--seed", type=int, default=default)
    g.add_argument("--samples", type=int, default=default)
    g.add_argument("--pool-depth", type=int, default=default)
    g.add_argument("--tower-depth", type=int, default=default)
    g.add_argument("--format", choices=("text", "json"), default=default)
    g.add_argument("--workers", type=int, default=default)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rbloch", description="Exact refined Bloch group workbench.")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name, help_):
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        return sp

    sp = verb("eval", "evaluate a field expression")
    sp.add_argument("expr")

    sp = verb("certify", "prove a named identity and print its certificate")
    sp.add_argument("claim", choices=sorted(CLAIMS))
    sp.add_argument("--x")
    sp.add_argument("--y")
    sp.add_argument("--index", type=int, choices=(1, 2), default=1, help="which psi (1 or 2)")
    sp.add_argument("--claim-out", type=Path, help="write the claim JSON here")
    sp.add_argument("--cert-out", type=Path, help="write the certificate JSON here")

    sp = verb("check-cert", "kernel-check a certificate against a claim")
    sp.add_argument("claim_file", type=Path)
    sp.add_argument("cert_file", type=Path)

    sp = verb("refute", "try to refute a claim with the lambda invariants")
    sp.add_argument("claim_file", type=Path)

    sp = verb("canonicalize", "canonical form of a configuration tuple")
    sp.add_argument("points", nargs="+", help="expressions or 'inf'")

    sp = verb("boundary", "alternating face boundary of a configuration tuple")
    sp.add_argument("points", nargs="+", help="expressions or 'inf'")

    sp = verb("d1", "induced d1 on a generator of R_F[Z_m]")
    sp.add_argument("z", nargs="+")

    sp = verb("km-reduce", "mod-2 normal form of a Milnor symbol")
    sp.add_argument("entries", nargs="+")

    sp = verb("km-halve", "halve a Milnor symbol with positive entries")
    sp.add_argument("entries", nargs="+")

    sp = verb("run-suite", "re-verify every in-scope identity and print a report")
    sp.add_argument("--timings", action="store_true", help="include elapsed seconds per entry")
    sp.add_argument("--out", type=Path, help="also write the report here")
    sp.add_argument("--cert-dir", type=Path, help="dump certificates per entry")
    sp.add_argument("--only", action="append", metavar="LABEL", help="run only these entries")

    sp = verb("discover-templates", "rediscover and validate the shipped certificate templates")
    sp.add_argument("names", nargs="*")
    sp.add_argument("--dir", type=Path, help="output directory (default: the package fixtures)")
    return p


def resolve_globals(ns, environ=None) -> dict:
    """flag > environment > default."""
    environ = os.environ if environ is None else environ
    out = {}
    for name, (typ, default) in GLOBALS.items():
        value = getattr(ns, name, None)
        if value is None:
            raw = environ.get(name.upper())
            if raw is not None:
                try:
                    value = typ(raw)
                except ValueError:
                    raise UsageError(f"environment variable {name.upper()}={raw!r} is not a valid {typ.__name__}")
            else:
                value = default
        out[name] = value
    if out["backend"] not in ("rational", "tower"):
        raise UsageError(f"unknown backend {out['backend']!r}")
    if out["format"] not in ("text", "json"):
        raise UsageError(f"unknown format {out['format']!r}")
    return out


# ---------------------------------------------------------------------------
# helpers


def _emit(g, data, text):
    if g["format"] == "json":
        print(json.dumps(data, sort_keys=True, indent=2))
    else:
        print(text)


def _evaluator(g):
    return Evaluator(get_backend(g["backend"], g["tower_depth"]))


def _points(ev, texts):
    return [INFINITY if t.strip() in ("inf", "oo", "∞") else ev(as_node(t)) for t in texts]


def _point_json(p):
    return {"inf": True} if getattr(p, "is_inf", False) else to_node(getattr(p, "value", p))


def _read_json(path: Path):
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}")


# ---------------------------------------------------------------------------
# verbs


def cmd_eval(args, g):
    value = _evaluator(g)(as_node(args.expr))
    _emit(g, {"value": to_node(value), "text": to_text(value)}, to_text(value))
    return EXIT_OK


def cmd_certify(args, g):
    backend = get_backend(g["backend"], g["tower_depth"])
    ev = Evaluator(backend)
    needed = CLAIMS[args.claim]
    vals = {}
    for name in needed:
        text = getattr(args, name)
        if text is None:
            raise UsageError(f"certify {args.claim} needs --{name}")
        vals[name] = ev(as_node(text))
    prover = Prover(backend, depth=g["pool_depth"])
    i = args.index
    dispatch = {
        "psi-vanish": lambda: tactic_psi_vanish_positive(vals["x"], i, prover=prover),
        "psi-additivity": lambda: tactic_psi_additivity(vals["x"], vals["y"], i, prover=prover),
        "psi-swap": lambda: tactic_psi_swap(vals["x"], vals["y"], i, prover=prover),
        "psi-order2": lambda: tactic_psi_order2(i, prover=prover),
        "psi-square": lambda: tactic_psi_square(vals["x"], i, prover=prover),
        "psi-double-square": lambda: tactic_psi_double_square(vals["x"], i, prover=prover),
        "trivial-action": lambda: tactic_trivial_action(vals["x"], prover=prover),
        "c-constant": lambda: tactic_c_constant(vals["x"], vals["y"], prover=prover),
        "c-symmetric": lambda: tactic_c_symmetric(vals["x"], prover=prover),
    }
    try:
        claim, cert = dispatch[args.claim]()
    except CertificationFailed as exc:
        _emit(g, {"status": "NOT_FOUND", "claim": exc.claim.label, **exc.outcome.to_json()},
              f"NOT_FOUND {exc.claim.label}: {exc.outcome.reason}")
        return EXIT_FAIL
    except ValueError as exc:
        # out-of-domain arguments (x in {0, 1}, non-positive x for psi-vanish, ...)
        raise UsageError(str(exc))
    if args.claim_out:
        args.claim_out.write_text(json.dumps(claim.to_json(), sort_keys=True, indent=1) + "\n")
    if args.cert_out:
        args.cert_out.write_text(json.dumps(cert.to_json(), sort_keys=True, indent=1) + "\n")
    data = {"status": PROVED, "claim": claim.to_json(), "certificate": cert.to_json()}
    if g["format"] == "json":
        _emit(g, data, "")
    else:
        print(json.dumps(cert.to_json(), sort_keys=True))
        print(f"PROVED {claim.label} ({len(cert)} instances)")
    return EXIT_OK


def cmd_check_cert(args, g):
    backend = get_backend(g["backend"], g["tower_depth"])
    claim = IdentityClaim.from_json(_read_json(args.claim_file), backend)
    cert = Certificate.from_json(_read_json(args.cert_file), backend)
    ok = check_certificate(claim, cert)
    status = PROVED if ok else "FAIL"
    _emit(g, {"status": status, "label": claim.label}, f"{status} {claim.label}".rstrip())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_refute(args, g):
    backend = get_backend(g["backend"], g["tower_depth"])
    claim = IdentityClaim.from_json(_read_json(args.claim_file), backend)
    status = refute_via_invariants(claim)
    _emit(g, {"status": status, "label": claim.label}, f"{status} {claim.label}".rstrip())
    return EXIT_FAIL if status == REFUTED else EXIT_OK


def cmd_canonicalize(args, g):
    pts = config_tuple(_points(_evaluator(g), args.points))
    cls, zs = canonicalize(pts)
    tower = any(is_tower(p.value) for p in pts if not p.is_inf)
    data = {"class": class_descriptor(cls, tower), "z": [to_node(z) for z in zs]}
    _emit(g, data, f"{cls!r} [{', '.join(to_text(z) for z in zs)}]")
    return EXIT_OK


def cmd_boundary(args, g):
    chain = boundary(config_tuple(_points(_evaluator(g), args.points)))
    items = chain.items()
    data = [[n, [_point_json(p) for p in t]] for t, n in items]
    text = "\n".join(f"{n:+d} ({', '.join(map(repr, t))})" for t, n in items) or "0"
    _emit(g, data, text)
    return EXIT_OK


def cmd_d1(args, g):
    ev = _evaluator(g)
    z = [ev(as_node(t)) for t in args.z]
    out = induced_d1(RFModuleElement.gen(z))
    tower = any(is_tower(v) for v in z)
    data = [[[to_node(v) for v in t], r.to_json(tower)] for t, r in out.by_tuple()]
    _emit(g, data, repr(out))
    return EXIT_OK


def _tower_entries(g, texts):
    ev = Evaluator(get_backend("tower", g["tower_depth"]))
    return [ev(as_node(t)) for t in texts]


def cmd_km_reduce(args, g):
    nf = mod2_reduce(_tower_entries(g, args.entries))
    _emit(g, nf.to_json(), repr(nf))
    return EXIT_OK


def cmd_km_halve(args, g):
    w: KMElement = halve_positive_symbol(_tower_entries(g, args.entries))
    data = [[n, [to_node(e) for e in s]] for s, n in sorted(w.terms.items(), key=lambda kv: repr(kv[0]))]
    text = " + ".join(f"{n}{{{', '.join(to_text(e) for e in s)}}}" for s, n in w.terms.items())
    _emit(g, data, text)
    return EXIT_OK


def cmd_run_suite(args, g):
    config = RunConfig(
        backend=g["backend"], seed=g["seed"], samples=g["samples"], pool_depth=g["pool_depth"],
        tower_depth=g["tower_depth"], format=g["format"], workers=g["workers"],
        timings=args.timings, cert_dir=str(args.cert_dir) if args.cert_dir else None,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.only:
        from .suite import ENTRIES

        unknown = [x for x in args.only if x not in ENTRIES]
        if unknown:
            raise UsageError(f"unknown suite entries: {', '.join(unknown)}")
    report = run_suite(config, labels=args.only)
    text = render(report, config.format)
    sys.stdout.write(text)
    if args.out:
        args.out.write_text(render(report, "json") if args.out.suffix == ".json" else text)
    return EXIT_OK if report["ok"] else EXIT_FAIL


def cmd_discover_templates(args, g):
    from .certify.discover import ORDER, discover_all
    from .certify.library import FIXTURE_DIR

    unknown = [n for n in args.names if n not in ORDER]
    if unknown:
        raise UsageError(f"unknown templates: {', '.join(unknown)}")
    ok = discover_all(args.names or None, directory=args.dir or FIXTURE_DIR,
                      log=lambda m: print(m, flush=True))
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "eval": cmd_eval,
    "certify": cmd_certify,
    "check-cert": cmd_check_cert,
    "refute": cmd_refute,
    "canonicalize": cmd_canonicalize,
    "boundary": cmd_boundary,
    "d1": cmd_d1,
    "km-reduce": cmd_km_reduce,
    "km-halve": cmd_km_halve,
    "run-suite": cmd_run_suite,
    "discover-templates": cmd_discover_templates,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        g = resolve_globals(ns)
        return COMMANDS[ns.verb](ns, g)
    except UsageError as exc:
        print(f"rbloch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"rbloch: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FieldError, TowerError, ConfigurationError, RelationError, ZeroDivisionError,
            KeyError, TypeError) as exc:
        print(f"rbloch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
