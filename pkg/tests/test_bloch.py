"""Pre-Bloch modules: relations, λ maps and the distinguished elements ψ and C."""

import random
from fractions import Fraction as Q

import pytest
from hypothesis import assume, given, strategies as st
from sympy import factorint

from conftest import generic_fractions
from rbloch.bloch import (
    PElement,
    RelationError,
    RPElement,
    big_lambda,
    c_element,
    coinvariants,
    gen,
    lambda1,
    lambda2,
    lambda2_real,
    lambda_classical,
    psi1,
    psi2,
    r_relation,
    s_relation,
)
from rbloch.fields import MINUS_CLASS, ONE_CLASS, TOWER, SquareClass, square_class
from rbloch.squares import GroupRingElement


def cl(n):
    return square_class(Q(n))


def test_s_relation_by_hand():
    # [2] - [3] + <2>[3/2] - <-1/2>[(1/2)/(2/3)] + <-1>[(-1)/(-2)]
    want = (gen(Q(2)) - gen(Q(3)) + gen(Q(3, 2), cl(2)) - gen(Q(3, 4), cl(-2)) + gen(Q(1, 2), MINUS_CLASS))
    assert s_relation(Q(2), Q(3)) == want


def test_r_relation_is_coinvariant_image():
    want = PElement({Q(2): 1, Q(3): -1, Q(3, 2): 1, Q(3, 4): -1, Q(1, 2): 1})
    assert r_relation(Q(2), Q(3)) == want
    assert coinvariants(s_relation(Q(2), Q(3))) == want


def test_relation_domain():
    for x, y in [(0, 2), (1, 2), (2, 2), (2, 1)]:
        with pytest.raises(RelationError):
            s_relation(Q(x), Q(y))


def test_generator_one_is_zero():
    assert gen(Q(1)).is_zero()
    assert psi1(Q(1)).is_zero()
    assert psi2(Q(1)).is_zero()


def test_lambda1_of_two():
    # <<1-2>><<2>> = (<-1> - 1)(<2> - 1)
    want = GroupRingElement({cl(-2): 1, cl(-1): -1, cl(2): -1, ONE_CLASS: 1})
    assert lambda1(gen(Q(2))) == want


def test_lambda2_examples():
    assert lambda2(PElement({Q(5, 7): 1, Q(2, 7): 1})).is_zero()  # [x] + [1-x]
    # [-1] -> 2∘(-1): only the (sign, prime 2) coordinate, mod 2
    assert lambda2(PElement({Q(-1): 1})).coeffs == {(0, 1): 1}


def _valuations(q):
    out = {p: e for p, e in factorint(abs(q.numerator)).items()}
    for p, e in factorint(q.denominator).items():
        out[p] = out.get(p, 0) - e
    return out


def _omega(p, q, a, b):
    va, vb = _valuations(a), _valuations(b)
    return va.get(p, 0) * vb.get(q, 0) - va.get(q, 0) * vb.get(p, 0)


@given(generic_fractions, generic_fractions)
def test_lambda_kills_five_term_relation(x, y):
    assume(x != y)
    r = r_relation(x, y)
    assert lambda_classical(r).is_zero()
    # second route: every alternating valuation functional vanishes on Σ (1-g)∘g
    primes = sorted({p for g in r.coeffs for v in (g, 1 - g) for p in _valuations(v)})
    for i, p in enumerate(primes):
        for q in primes[i + 1:]:
            assert sum(n * _omega(p, q, 1 - g, g) for g, n in r.coeffs.items()) == 0


@given(generic_fractions, generic_fractions)
def test_lambda1_kills_refined_relation_rational(x, y):
    assume(x != y)
    assert lambda1(s_relation(x, y)).is_zero()
    assert big_lambda(s_relation(x, y)).is_zero()


@given(st.integers(0, 10**9))
def test_lambda1_kills_refined_relation_tower(seed):
    rng = random.Random(seed)
    ctx = TOWER.random_context(rng, rng.randint(0, 2))
    x, y = TOWER.random_element(rng, ctx=ctx), TOWER.random_element(rng, ctx=ctx)
    assume(x != y and x != 1 and y != 1)
    assert lambda1(s_relation(x, y)).is_zero()


@given(st.integers(0, 10**9))
def test_lambda1_vanishes_on_tower_generators(seed):
    rng = random.Random(seed)
    x = TOWER.random_element(rng, depth=rng.randint(0, 3))
    assume(x != 1)
    assert lambda1(gen(x)).is_zero()


def test_c_element_in_refined_bloch():
    for x in (Q(2), Q(-3), Q(5, 7)):
        assert big_lambda(c_element(x)).is_zero()
    b = big_lambda(gen(Q(2)))
    assert not b.first.is_zero() and not b.second.is_zero()
    assert big_lambda(RPElement()).is_zero()


def test_c_element_definition():
    x = Q(3)
    want = gen(x) + gen(1 - x, MINUS_CLASS) + (GroupRingElement.of(1 - x) - 1) * psi1(x)
    assert c_element(x) == want
    with pytest.raises(RelationError):
        c_element(Q(1))


def test_psi_definitions():
    x = Q(5)
    assert psi1(x) == gen(x) + gen(Q(1, 5), MINUS_CLASS)
    assert psi2(x) == gen(x, square_class(Q(1, 5) - 1)) + gen(Q(1, 5), square_class(1 - x))


def test_group_ring_action_is_linear():
    e = gen(Q(2)) + gen(Q(-3), cl(5))
    r = GroupRingElement({cl(-1): 2, cl(3): -1})
    assert r * e == gen(Q(2), r) + gen(Q(-3), r * GroupRingElement.unit(cl(5)))
    assert (r * e).shift(cl(-1)) == GroupRingElement.unit(cl(-1)) * (r * e)


@given(st.lists(st.tuples(generic_fractions, st.sampled_from([1, -1, 2, -6]), st.integers(-3, 3)), max_size=5))
def test_rp_json_round_trip(items):
    e = RPElement()
    for g, c, n in items:
        e = e + gen(g, GroupRingElement.unit(cl(c), n))
    assert RPElement.from_json(e.to_json()) == e


# -- λ₂ over the real quadratically closed model ------------------------------------


def test_lambda2_real_psi_vanishes_for_positive():
    for text in ("2", "7/3", "sqrt(2)", "1 + sqrt(3)"):
        from rbloch.expr import evaluate

        x = evaluate(text, "tower")
        t, w, _ = lambda2_real(psi1(x))
        assert t == 0 and not w


def test_lambda2_real_detects_nonzero():
    t, w, basis = lambda2_real(gen(Q(3)))
    # (1-3)∘3 = (-2)∘3 and only |2| ∧ |3| survives
    assert t == 0
    assert len(w) == 1 and abs(next(iter(w.values()))) == 1


@given(st.lists(st.tuples(generic_fractions, st.integers(-3, 3)), min_size=1, max_size=4))
def test_lambda2_real_agrees_with_off_diagonal_prime_part(items):
    # over positive rationals ∧² injects into the real model, diagonal and sign parts die
    p = PElement()
    for g, n in items:
        p = p + PElement({g: n})
    rational = lambda_classical(p)
    off = {k: v for k, v in rational.coeffs.items() if k[0] != 0 and k[0] != k[1]}
    t, w, _ = lambda2_real(p)
    assert t == 0  # 1-x and x are never both negative
    assert bool(w) == bool(off)
