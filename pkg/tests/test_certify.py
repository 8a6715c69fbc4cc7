"""Certificate kernel, search, shipped templates and proof tactics."""

import json
import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

import frozen
from conftest import mutate_certificate, rejected
from rbloch.bloch import RelationError, gen, psi1, s_relation
from rbloch.certify.discover import validate
from rbloch.certify.kernel import Certificate, IdentityClaim, check_certificate, expand
from rbloch.certify.library import CLAIMS, FIXTURE_DIR, Template, claim_target, load_templates
from rbloch.certify.search import REFUTED, UNKNOWN, NotFound, direct_search, refute_via_invariants
from rbloch.certify.tactics import (
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
from rbloch.fields import MINUS_CLASS, RATIONAL, TOWER, square_class
from rbloch.squares import GroupRingElement

ONE = GroupRingElement.unit()


@pytest.fixture(scope="module")
def rational_prover():
    return Prover(RATIONAL)


@pytest.fixture(scope="module")
def tower_prover():
    return Prover(TOWER)


# -- kernel -----------------------------------------------------------------------


def test_single_relation_certificate():
    claim = IdentityClaim(s_relation(Q(2), Q(3)), "S(2,3)")
    assert check_certificate(claim, Certificate([(ONE, (Q(2), Q(3)))]))
    assert not check_certificate(claim, Certificate([(ONE * 2, (Q(2), Q(3)))]))
    assert not check_certificate(claim, Certificate([]))


def test_group_ring_multiplier_in_certificate():
    r = GroupRingElement({MINUS_CLASS: 3, square_class(Q(5)): -1})
    claim = IdentityClaim(r * s_relation(Q(-2), Q(7)))
    assert check_certificate(claim, Certificate([(r, (Q(-2), Q(7)))]))


def test_malformed_instances_raise():
    claim = IdentityClaim(gen(Q(2)))
    for xy in [(Q(1), Q(2)), (Q(0), Q(3)), (Q(2), Q(2))]:
        with pytest.raises(RelationError):
            check_certificate(claim, Certificate([(ONE, xy)]))


def test_empty_certificate_proves_zero_only():
    assert check_certificate(IdentityClaim(gen(Q(1))), Certificate([]))
    assert not check_certificate(IdentityClaim(gen(Q(2))), Certificate([]))


def test_combine_merges_instances():
    a = Certificate([(ONE, (Q(2), Q(3)))])
    b = Certificate([(GroupRingElement.unit(MINUS_CLASS), (Q(2), Q(3)))])
    c = Certificate.combine([(2, a), (-1, b)])
    assert len(c) == 1
    assert expand(c) == 2 * s_relation(Q(2), Q(3)) - s_relation(Q(2), Q(3)).shift(MINUS_CLASS)


# -- mutation soundness --------------------------------------------------------------


@pytest.fixture(scope="module")
def proved(rational_prover):
    items = [("psi_mult_1", [Q(2), Q(3)]), ("psi_swap_2", [Q(2), Q(-1)]), ("c_reflect", [Q(5, 3)]),
             ("c_constant", [Q(2), Q(-1)])]
    return [rational_prover.prove(n, a) for n, a in items]


@given(st.integers(0, 10**9))
def test_mutated_certificates_are_rejected(proved, seed):
    rng = random.Random(seed)
    claim, cert = proved[seed % len(proved)]
    assert check_certificate(claim, cert)
    assert rejected(claim, mutate_certificate(cert, rng))


def test_fifty_mutations_rejected(proved):
    rng = random.Random(50)
    for k in range(50):
        claim, cert = proved[k % len(proved)]
        assert rejected(claim, mutate_certificate(cert, rng))


def test_certificate_for_wrong_claim_rejected(proved):
    (_, a), (claim_b, _) = proved[0], proved[1]
    assert rejected(claim_b, a)


# -- shipped templates ---------------------------------------------------------------


def test_every_template_replays_at_generic_points(rational_prover):
    templates = load_templates()
    assert len(templates) == 12
    for name, tpl in templates.items():
        res = validate(tpl, rational_prover)
        assert False not in res, name
        assert True in res, name


def test_template_files_are_canonical_json():
    for path in sorted(FIXTURE_DIR.glob("*.json")):
        tpl = Template.from_json(json.loads(path.read_text()))
        assert tpl.dumps() == path.read_text(), path.name


def test_templates_are_not_trusted_without_the_kernel(rational_prover):
    # corrupt one stored coefficient: replay must no longer certify the claim
    tpl = load_templates()["psi_mult_1"]
    bad = Template.from_json(json.loads(tpl.dumps()))
    bad.terms[0][0] += 1
    p = Prover(RATIONAL, templates={"psi_mult_1": bad})
    args = [Q(11, 5), Q(-17, 7)]
    assert p._from_template("psi_mult_1", args, IdentityClaim(claim_target("psi_mult_1", args))) is None


def test_frozen_certificates_replay_bit_exact():
    assert frozen.build() == frozen.FROZEN.read_text()


def test_frozen_certificates_check_from_json():
    for item in json.loads(frozen.FROZEN.read_text()):
        claim = IdentityClaim.from_json(item["claim"], item["backend"])
        cert = Certificate.from_json(item["certificate"], item["backend"])
        assert check_certificate(claim, cert), claim.label


# -- search and refutation -------------------------------------------------------------


def test_direct_search_finds_relation_multiple():
    claim = IdentityClaim(s_relation(Q(2), Q(3)).shift(MINUS_CLASS))
    cert = direct_search(claim, [Q(2), Q(3)], depth=1)
    assert not isinstance(cert, NotFound)
    assert check_certificate(claim, cert)


def test_direct_search_reports_not_found():
    claim = IdentityClaim(gen(Q(2)))
    res = direct_search(claim, [Q(2)], depth=1, max_points=6)
    assert isinstance(res, NotFound)
    assert res.to_json()["status"] == "NOT_FOUND"


def test_refute_false_claim_rational():
    assert refute_via_invariants(IdentityClaim(gen(Q(2)))) == REFUTED
    assert refute_via_invariants(IdentityClaim(gen(Q(2)) + gen(Q(-1)))) == REFUTED


def test_refute_false_claim_tower():
    three = TOWER.element(3)
    assert refute_via_invariants(IdentityClaim(gen(three))) == REFUTED


def test_refute_never_contradicts_a_proof(proved, tower_prover):
    claims = [c for c, _ in proved]
    claims += [tower_prover.prove("psi_vanish_1", [TOWER.element(2)])[0]]
    claims += [tower_prover.prove("trivial_action", [TOWER.element(-1)])[0]]
    for claim in claims:
        assert refute_via_invariants(claim) == UNKNOWN, claim.label


def test_tower_psi_is_invisible_to_lambda():
    # ψ₁(2) is nonzero over Q but vanishes in the tower, and Λ agrees in both settings
    assert refute_via_invariants(IdentityClaim(psi1(Q(2)))) == REFUTED
    assert refute_via_invariants(IdentityClaim(psi1(TOWER.element(2)))) == UNKNOWN


# -- tactics ------------------------------------------------------------------------


@pytest.mark.parametrize("x, y", [(2, 3), (2, 2), (-1, 2)])
@pytest.mark.parametrize("i", [1, 2])
def test_psi_identities_at_fixed_points(rational_prover, x, y, i):
    x, y = Q(x), Q(y)
    for claim, cert in [
        tactic_psi_additivity(x, y, i, prover=rational_prover),
        tactic_psi_swap(x, y, i, prover=rational_prover),
        tactic_psi_order2(i, prover=rational_prover),
        tactic_psi_square(x, i, prover=rational_prover),
        tactic_psi_double_square(x, i, prover=rational_prover),
    ]:
        assert check_certificate(claim, cert), claim.label


def test_claim_targets_by_hand():
    x, y = Q(2), Q(3)
    assert claim_target("psi_mult_1", [x, y]) == psi1(x * y) - psi1(y).shift(square_class(x)) - psi1(x)
    assert claim_target("c_constant", [x, x]).is_zero()
    assert set(CLAIMS) >= {"psi_vanish_1", "trivial_action", "c_symmetric", "c_inverse"}


def test_psi_vanish_positive(tower_prover):
    ev = lambda t: __import__("rbloch.expr", fromlist=["evaluate"]).evaluate(t, "tower")
    for t in ("2", "3/7", "sqrt(2)", "2 + sqrt(3)"):
        for i in (1, 2):
            claim, cert = tactic_psi_vanish_positive(ev(t), i, prover=tower_prover)
            assert check_certificate(claim, cert)
    claim, cert = tactic_psi_vanish_positive(1)
    assert len(cert) == 0
    with pytest.raises(ValueError):
        tactic_psi_vanish_positive(-2, prover=tower_prover)


@pytest.mark.parametrize("x", ["-1", "2", "1/2", "-3", "5/7", "-2/9"])
def test_trivial_action(tower_prover, x):
    a = TOWER.element(Q(x))
    claim, cert = tactic_trivial_action(a, prover=tower_prover)
    assert claim.target == gen(a, MINUS_CLASS) - gen(a)
    assert check_certificate(claim, cert)


def test_trivial_action_domain():
    with pytest.raises(ValueError):
        tactic_trivial_action(1)


@pytest.mark.parametrize("x, y", [("2", "3"), ("2", "-1"), ("3", "-5/7"), ("1/2", "5"), ("-2", "-3")])
def test_c_constant_pairs(rational_prover, x, y):
    claim, cert = tactic_c_constant(Q(x), Q(y), prover=rational_prover)
    assert check_certificate(claim, cert)


def test_c_constant_same_point_is_empty():
    claim, cert = tactic_c_constant(Q(5), Q(5))
    assert claim.target.is_zero() and len(cert) == 0


def test_c_symmetric(rational_prover):
    for x in (Q(2), Q(-1), Q(-5, 7)):
        claim, cert = tactic_c_symmetric(x, prover=rational_prover)
        assert check_certificate(claim, cert)
    with pytest.raises(ValueError):
        tactic_c_symmetric(Q(0))


def test_detours_without_templates():
    # with no shipped templates the prover must fall back to search and still be sound
    p = Prover(RATIONAL, use_templates=False)
    claim, cert = p.prove("psi_swap_1", [Q(2), Q(3)])
    assert check_certificate(claim, cert)
    assert ("psi_swap_1(2, 3)", "search") in p.log
