"""Acceptance criteria, each timed against its budget and reported on a single PASS/FAIL line.

The checks are written against the library directly with their own sampling, so they do not
share code paths with the suite runner (criterion 11 exercises the runner through the CLI).
"""

import contextlib
import json
import random
import subprocess
import sys
import time
from fractions import Fraction as Q

import frozen
from conftest import mutate_certificate, rejected, to_mpf
from rbloch import milnor
from rbloch.bloch import big_lambda, gen, lambda1, lambda_classical, r_relation, s_relation
from rbloch.certify.discover import validate
from rbloch.certify.kernel import Certificate, IdentityClaim, check_certificate
from rbloch.certify.library import load_templates
from rbloch.certify.tactics import (
    Prover,
    tactic_c_constant,
    tactic_psi_additivity,
    tactic_psi_double_square,
    tactic_psi_order2,
    tactic_psi_square,
    tactic_psi_swap,
    tactic_psi_vanish_positive,
    tactic_trivial_action,
)
from rbloch.configurations import (
    D1_SIGN,
    INFINITY,
    Chain,
    RFModuleElement,
    SL2Matrix,
    boundary,
    canonicalize,
    induced_d1,
    moebius_apply,
    point,
    representative,
    rf_from_group_ring,
)
from rbloch.fields import MINUS_CLASS, ONE_CLASS, RATIONAL, TOWER, FieldError, square_class
from rbloch.squares import GroupRingElement, TowerBasis, expand_wedge, halve_wedge


@contextlib.contextmanager
def criterion(capsys, number, title, budget=None):
    t0 = time.perf_counter()
    verdict = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - t0
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
        verdict = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        limit = f" (< {budget}s)" if budget is not None else ""
        with capsys.disabled():
            print(f"\nAC{number:<2} {verdict} {elapsed:7.2f}s{limit}  {title}")


def rational(rng):
    while True:
        x = Q(rng.randint(-99, 99), rng.randint(1, 40))
        if x not in (0, 1):
            return x


def tower_point(rng, ctx=None, depth=2):
    while True:
        x = TOWER.random_element(rng, depth=rng.randint(0, depth), ctx=ctx)
        if x != 1:
            return x


def tower_pair(rng):
    x = tower_point(rng)
    while True:
        y = tower_point(rng, ctx=x.ctx)
        if y != x:
            return x, y


def distinct_samples(rng, n, positive):
    out, keys = [], set()
    while len(out) < n:
        x = tower_point(rng)
        if (x.sign() > 0) == positive and x.key() not in keys:
            keys.add(x.key())
            out.append(x)
    return out


def random_sl2(rng):
    g = SL2Matrix.identity()
    for _ in range(rng.randint(1, 5)):
        t = Q(rng.randint(-9, 9), rng.randint(1, 5))
        g = g @ (SL2Matrix(1, t, 0, 1) if rng.random() < 0.5 else SL2Matrix(1, 0, t, 1))
    return g


def test_ac01_field_kernel(capsys):
    with criterion(capsys, 1, "field axioms, sqrt^2 and sign vs interval on 200 tower elements", 10):
        rng = random.Random(1)
        for _ in range(200):
            ctx = TOWER.random_context(rng, rng.randint(0, 4))
            a, b, c = (TOWER.random_element(rng, ctx=ctx) for _ in range(3))
            assert (a + b) + c == a + (b + c) and a + b == b + a
            assert (a * b) * c == a * (b * c) and a * b == b * a
            assert a * (b + c) == a * b + a * c
            assert a * (1 / a) == 1 and a - a == 0 and a + 0 == a and a * 1 == a
            r = TOWER.sqrt(abs(a))
            assert r * r == abs(a) and r.sign() > 0
            lo, hi = a.interval(96)
            assert lo <= hi
            if lo > 0 or hi < 0:
                assert a.sign() == (1 if lo > 0 else -1)
            # independent numeric route from the raw coefficients
            assert a.sign() == (1 if to_mpf(a) > 0 else -1)


def test_ac02_two_square_classes(capsys):
    with criterion(capsys, 2, "tower has exactly two square classes, class is multiplicative", 5):
        rng = random.Random(2)
        seen, failures = set(), 0
        for _ in range(500):
            x = tower_point(rng, depth=3)
            y = tower_point(rng, ctx=x.ctx)
            cx, cy = square_class(x), square_class(y)
            seen.add(cx)
            assert cx == (MINUS_CLASS if to_mpf(x) < 0 else ONE_CLASS)
            failures += square_class(x * y) != cx * cy
        assert seen == {ONE_CLASS, MINUS_CLASS}
        assert failures == 0


def test_ac03_wedge_two_divisible(capsys):
    with criterion(capsys, 3, "2 * halve_wedge(x, y) == x ^ y on 100 tower pairs", 10):
        rng = random.Random(3)
        for _ in range(100):
            x, y = tower_pair(rng)
            w, basis = halve_wedge(x, y)
            assert w * 2 == expand_wedge(x, y, basis)


def test_ac04_lambda_well_defined(capsys):
    with criterion(capsys, 4, "lambda(R_xy) == 0 on 100 rational pairs over the prime basis", 10):
        rng = random.Random(4)
        for _ in range(100):
            x, y = rational(rng), rational(rng)
            while y == x:
                y = rational(rng)
            assert lambda_classical(r_relation(x, y)).is_zero()


def test_ac05_refined_lambda_well_defined(capsys):
    with criterion(capsys, 5, "lambda1(S_xy) == 0 on 100 pairs per backend", 10):
        rng = random.Random(5)
        for _ in range(100):
            x, y = rational(rng), rational(rng)
            while y == x:
                y = rational(rng)
            s = s_relation(x, y)
            assert lambda1(s).is_zero()
            assert big_lambda(s).is_zero()
        for _ in range(100):
            x, y = tower_pair(rng)
            assert lambda1(s_relation(x, y)).is_zero()


def test_ac06_lambda1_vanishes_on_tower(capsys):
    with criterion(capsys, 6, "lambda1([x]) == 0 on 100 tower points", 5):
        rng = random.Random(6)
        for _ in range(100):
            assert lambda1(gen(tower_point(rng, depth=3))).is_zero()


def test_ac07_certifier_soundness(capsys):
    with criterion(capsys, 7, "50 mutated certificates rejected, shipped certificates verify", 10):
        prover = Prover(RATIONAL)
        proved = [tactic_psi_additivity(Q(2), Q(3), 1, prover=prover),
                  tactic_psi_swap(Q(2), Q(-1), 2, prover=prover),
                  tactic_c_constant(Q(2), Q(-1), prover=prover)]
        rng = random.Random(7)
        for k in range(50):
            claim, cert = proved[k % len(proved)]
            assert check_certificate(claim, cert)
            assert rejected(claim, mutate_certificate(cert, rng))
        for name, tpl in load_templates().items():
            outcomes = validate(tpl, prover)
            assert False not in outcomes and True in outcomes, name
        for item in json.loads(frozen.FROZEN.read_text()):
            claim = IdentityClaim.from_json(item["claim"], item["backend"])
            assert check_certificate(claim, Certificate.from_json(item["certificate"], item["backend"]))


def test_ac08_proofs_as_certificates(capsys):
    with criterion(capsys, 8, "identity tactics return kernel-checked certificates at pool depth 3", 120):
        prover = Prover(TOWER, depth=3)
        results = []
        for x, y in [(2, 3), (2, 2), (-1, 2)]:
            x, y = TOWER.element(x), TOWER.element(y)
            for i in (1, 2):
                results += [tactic_psi_additivity(x, y, i, prover=prover),
                            tactic_psi_swap(x, y, i, prover=prover),
                            tactic_psi_order2(i, prover=prover),
                            tactic_psi_square(x, i, prover=prover),
                            tactic_psi_double_square(x, i, prover=prover)]
        rng = random.Random(8)
        for x in distinct_samples(rng, 20, positive=True):
            results += [tactic_psi_vanish_positive(x, i, prover=prover) for i in (1, 2)]
        for positive in (True, False):
            for x in distinct_samples(rng, 20, positive):
                results.append(tactic_trivial_action(x, prover=prover))
        for xs, ys in [("2", "3"), ("2", "-1"), ("3", "-5/7"), ("1/2", "5"), ("-2", "-3")]:
            results.append(tactic_c_constant(TOWER.element(Q(xs)), TOWER.element(Q(ys)), prover=prover))
        for claim, cert in results:
            assert check_certificate(claim, cert), claim.label
        assert len(results) >= 30 + 40 + 40 + 5


def test_ac09_configurations(capsys):
    with criterion(capsys, 9, "canonicalize invariance and round trip, dd = 0, d1 = -lambda1, worked d1", 20):
        rng = random.Random(9)
        for _ in range(50):
            g = random_sl2(rng)
            pts, k = [], rng.randint(5, 6)
            while len(pts) < k:
                p = INFINITY if rng.random() < 0.1 else point(rational(rng) - rng.randint(0, 1))
                if p not in pts:
                    pts.append(p)
            cls, z = canonicalize(pts)
            assert canonicalize([moebius_apply(g, p) for p in pts]) == (cls, z)
            assert canonicalize(representative(z)) == (ONE_CLASS, z)
            assert boundary(boundary(Chain.of(*pts))).is_zero()
            e = RFModuleElement.gen(z, GroupRingElement.unit(square_class(rational(rng))))
            assert induced_d1(induced_d1(e)).is_zero()
        assert D1_SIGN in (1, -1)
        for _ in range(100):
            z = rational(rng)
            got = induced_d1(RFModuleElement.gen((z,)))
            assert got == rf_from_group_ring(lambda1(gen(z)) * D1_SIGN)
        worked = induced_d1(RFModuleElement.gen((Q(2),))).coefficient()
        assert worked == GroupRingElement({MINUS_CLASS: 1, square_class(Q(-2)): -1,
                                           square_class(Q(2)): 1, ONE_CLASS: -1})


def test_ac10_milnor(capsys):
    with criterion(capsys, 10, "Steinberg symbols vanish mod 2, sign extraction, symbol halving", 10):
        rng = random.Random(10)
        signs = set()
        for _ in range(100):
            x = tower_point(rng)
            signs.add((x.sign(), (1 - x).sign()))
            assert milnor.mod2_reduce((x, 1 - x)).to_json() == "ZERO"
        assert len(signs) >= 2
        assert milnor.mod2_reduce((Q(-2), Q(-3))).to_json() == ["-1", "-1"]
        done = 0
        while done < 50:
            ctx = TOWER.random_context(rng, rng.randint(0, 2))
            entries, k = [], rng.randint(1, 3)
            while len(entries) < k:
                e = abs(TOWER.random_element(rng, ctx=ctx))
                if e != 1:
                    entries.append(e)
            w = milnor.halve_positive_symbol(entries)
            try:
                basis = TowerBasis([next(iter(w.terms))[0], *entries[1:]])
            except FieldError:
                continue  # dependent entries: no free coordinates to compare, draw again
            doubled = {k: 2 * v for k, v in milnor.expand_km(w, basis).items()}
            assert doubled == milnor.expand_km(milnor.KMElement.of(*entries), basis)
            done += 1


def test_ac11_run_suite_deterministic(capsys, tmp_path):
    with criterion(capsys, 11, "two same-seed run-suite JSON reports are byte-identical"):
        cmd = [sys.executable, "-m", "rbloch.cli", "--seed", "11", "--format", "json", "run-suite"]
        procs = [subprocess.Popen(cmd + ["--out", str(tmp_path / f"r{k}.json")], stdout=subprocess.PIPE)
                 for k in (0, 1)]
        outs = [p.communicate()[0] for p in procs]
        assert [p.returncode for p in procs] == [0, 0]
        a, b = (tmp_path / "r0.json").read_bytes(), (tmp_path / "r1.json").read_bytes()
        assert a == b and outs[0] == outs[1]
        assert json.loads(a)["ok"]
