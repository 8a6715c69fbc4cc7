import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from rbloch.bloch import RelationError
from rbloch.certify.kernel import Certificate, check_certificate
from rbloch.squares import GroupRingElement
from rbloch.tower import TowerElement

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

mpmath.mp.dps = 60


def to_mpf(x):
    """Independent numeric value of a field element, rebuilt from coefficients and radicands."""
    if not isinstance(x, TowerElement):
        q = Fraction(x)
        return mpmath.mpf(q.numerator) / q.denominator
    ctx = x.ctx
    roots = [mpmath.sqrt(to_mpf(ctx.radicand(i))) for i in range(len(ctx))]
    total = mpmath.mpf(0)
    for mask, c in enumerate(x.coefficients()):
        if c:
            term = to_mpf(c)
            for i, r in enumerate(roots):
                if mask >> i & 1:
                    term *= r
            total += term
    return total


nonzero_fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40).filter(lambda q: q != 0)
generic_fractions = nonzero_fractions.filter(lambda q: q != 1)


@pytest.fixture
def rng():
    return random.Random(20261016)


def rejected(claim, cert) -> bool:
    """True when the kernel refuses the certificate, either by answer or by malformed instance."""
    try:
        return not check_certificate(claim, cert)
    except RelationError:
        return True


def mutate_certificate(cert: Certificate, rng: random.Random) -> Certificate:
    terms = list(cert.terms)
    i = rng.randrange(len(terms))
    r, (x, y) = terms[i]
    kind = rng.choice(["coefficient", "instance", "delete"])
    if kind == "delete":
        del terms[i]
    elif kind == "coefficient":
        c = rng.choice(list(r.terms))
        terms[i] = (r + GroupRingElement.unit(c, rng.choice([1, -1, 2])), (x, y))
    else:
        terms[i] = (r, (x, y + rng.choice([1, -1, 2]) * (y / y)))
    return Certificate(terms)
