"""Milnor K-symbols: mod-2 shadow, Steinberg detection and halving of positive symbols."""

import itertools
import random
from fractions import Fraction as Q

import pytest
from hypothesis import assume, given, strategies as st

from conftest import generic_fractions
from rbloch.fields import TOWER, FieldError
from rbloch.milnor import (
    KMElement,
    expand_km,
    halve_positive_symbol,
    mod2_reduce,
    product,
    steinberg_trivial,
)
from rbloch.squares import TowerBasis


def test_sign_extraction_example():
    assert mod2_reduce((Q(-2), Q(-3))).to_json() == ["-1", "-1"]
    assert repr(mod2_reduce((Q(-2), Q(-3)))) == "{-1, -1}"


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_every_sign_pattern(k):
    for signs in itertools.product((1, -1), repeat=k):
        s = [Q(sg * (i + 2)) for i, sg in enumerate(signs)]
        want = ["-1"] * k if all(sg < 0 for sg in signs) else "ZERO"
        assert mod2_reduce(s).to_json() == want


@given(generic_fractions)
def test_steinberg_symbols_reduce_to_zero(x):
    s = (x, 1 - x)
    assert steinberg_trivial(s)
    assert mod2_reduce(s).to_json() == "ZERO"


@given(st.integers(0, 10**9))
def test_steinberg_over_tower(seed):
    x = TOWER.random_element(random.Random(seed), depth=2)
    assume(x != 1)
    assert mod2_reduce((x, 1 - x)).to_json() == "ZERO"


def test_steinberg_is_syntactic():
    assert steinberg_trivial((Q(3), Q(1), Q(5)))
    assert steinberg_trivial((Q(7), Q(2), Q(-1)))  # 2 + (-1) = 1 adjacent
    assert not steinberg_trivial((Q(2), Q(3), Q(-1)))


@given(st.lists(generic_fractions, min_size=1, max_size=3), st.lists(generic_fractions, min_size=1, max_size=3))
def test_reduction_is_multiplicative_in_signs(a, b):
    # the shadow of a concatenation depends only on the shadows of the parts
    ra, rb, rab = mod2_reduce(a), mod2_reduce(b), mod2_reduce(a + b)
    assert rab.minus_ones == (ra.minus_ones and rb.minus_ones)
    assert rab.degree == len(a) + len(b)


def test_halve_by_hand():
    w = halve_positive_symbol((Q(4), Q(3)))
    assert w == KMElement.of(Q(2), Q(3))


def test_halve_irrational():
    w = halve_positive_symbol((Q(2), Q(3)))
    (s,) = w.terms
    assert s[0] * s[0] == 2 and s[1] == 3
    basis = TowerBasis([s[0], Q(3)])
    doubled = {k: 2 * v for k, v in expand_km(w, basis).items()}
    assert doubled == expand_km(KMElement.of(Q(2), Q(3)), basis)


def test_halve_rejects_nonpositive():
    with pytest.raises(FieldError):
        halve_positive_symbol((Q(2), Q(-3)))
    with pytest.raises(FieldError):
        halve_positive_symbol(())


@given(st.integers(0, 10**9))
def test_halving_doubles_back(seed):
    rng = random.Random(seed)
    ctx = TOWER.random_context(rng, rng.randint(0, 2))
    k, entries = rng.randint(1, 3), []
    while len(entries) < k:
        e = abs(TOWER.random_element(rng, ctx=ctx))
        if e != 1:
            entries.append(e)
    w = halve_positive_symbol(entries)
    root = next(iter(w.terms))[0]
    try:
        basis = TowerBasis([root, *entries[1:]])
    except FieldError:
        assume(False)  # dependent entries have no free coordinates to compare
    doubled = {k: 2 * v for k, v in expand_km(w, basis).items()}
    assert doubled == expand_km(KMElement.of(*entries), basis)


def test_product_concatenates():
    a, b = KMElement.of(Q(2)), KMElement.of(Q(3), Q(5))
    assert product(a, b) == KMElement.of(Q(2), Q(3), Q(5))
    assert (a * b).degree == 3
    with pytest.raises(FieldError):
        KMElement.of(Q(2)) + KMElement.of(Q(2), Q(3))
