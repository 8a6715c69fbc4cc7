"""Certificate search by exact integer linear algebra, and refutation by Λ."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..bloch import big_lambda, coinvariants, lambda1, lambda2_real, lambda_classical
from ..fields import FieldError, is_tower, square_class
from ..squares import PRIMES, GroupRingElement
from . import zlinear
from .kernel import Certificate, IdentityClaim, check_certificate
from .pool import DEFAULT_MAX_POINTS, InstancePool, PoolTooLarge, candidate_points

PROVED = "PROVED"
REFUTED = "REFUTED"
UNKNOWN = "UNKNOWN"
NOT_FOUND = "NOT_FOUND"


@dataclass
class NotFound:
    """Inconclusive search outcome (never a refutation)."""

    reason: str
    diagnostics: list = field(default_factory=list)

    def __bool__(self):
        return False

    def to_json(self):
        return {"status": NOT_FOUND, "reason": self.reason, "diagnostics": self.diagnostics}


@dataclass
class Solution:
    """Raw search output: S terms plus uses of extra (lemma) columns."""

    certificate: Certificate
    extra_uses: list  # (n, label)


def solve_in_pool(target_flat, pool: InstancePool, extra=(), extra_weight: int = 1):
    """Integer solve over the pool's columns plus optional labelled extra columns.

    ``extra`` is a list of (label, flat vector).  Returns a :class:`Solution`
    or a :class:`NotFound` whose reason distinguishes modular and integral
    obstructions.
    """
    keys = pool.keys()
    cols = pool.columns()
    n_s = len(cols)
    cols = cols + [vec for _, vec in extra]
    live = zlinear.prune(cols, target_flat)
    info = {"pool": pool.describe(), "columns": len(cols), "live_columns": len(live)}
    if not zlinear.feasible_mod_p(cols, target_flat, live):
        return NotFound("no solution modulo a large prime over this pool", [info])
    sub = [cols[j] for j in live]
    weight = [0 if j < n_s else extra_weight for j in live]
    sol = zlinear.solve(sub, target_flat, weight)
    if sol is None:
        return NotFound("solvable modulo a prime but not over the integers in this pool", [info])
    terms = {}
    order = []
    uses = []
    for jj, n in sorted(sol.items()):
        j = live[jj]
        if j < n_s:
            c, z1, z2 = keys[j]
            if (z1, z2) not in terms:
                terms[z1, z2] = GroupRingElement()
                order.append((z1, z2))
            terms[z1, z2] = terms[z1, z2] + GroupRingElement.unit(c, n)
        else:
            uses.append((n, extra[j - n_s][0]))
    cert = Certificate([(terms[xy], xy) for xy in order if terms[xy]])
    return Solution(cert, uses)


def search_certificate(claim: IdentityClaim, pool: InstancePool):
    """A kernel-checked certificate for the claim within the pool, or NotFound."""
    if claim.target.is_zero():
        return Certificate([])
    try:
        out = solve_in_pool(claim.target.flat, pool)
    except PoolTooLarge as exc:
        return NotFound(str(exc), [pool.describe()])
    if isinstance(out, NotFound):
        return out
    if not check_certificate(claim, out.certificate):
        raise AssertionError("internal error: solver output failed the kernel check")
    return out.certificate


def direct_search(claim: IdentityClaim, seeds, depth: int = 3, max_points: int = DEFAULT_MAX_POINTS,
                  max_columns: int | None = None):
    """Search over growing point sets drawn from the seeds, up to the given depth.

    Pools are grown one candidate point at a time (priority order from
    :func:`candidate_points`), so small certificates are found on small pools.
    """
    if claim.target.is_zero():
        return Certificate([])
    seeds = list(seeds) + [g for g in claim.target.support()]
    kw = {} if max_columns is None else {"max_columns": max_columns}
    # candidate lists are nested: the depth-d list is a prefix of the depth-(d+1) list
    levels = [len(candidate_points(seeds, d)) for d in range(1, depth + 1)]
    cands = candidate_points(seeds, depth)
    tried = []
    for k in range(2, len(cands) + 1):
        if k + 3 > max_points:
            tried.append({"stopped": f"point bound {max_points} reached"})
            break
        d = next(i + 1 for i, n in enumerate(levels) if n >= k)
        pool = InstancePool.from_values(cands[:k], depth=d, **kw)
        res = search_certificate(claim, pool)
        if not isinstance(res, NotFound):
            return res
        tried.append({"depth": d, "points": len(pool.points), "reason": res.reason})
    return NotFound(f"no certificate up to depth {depth} with at most {max_points} points", tried)


def refute_via_invariants(claim: IdentityClaim, basis=PRIMES) -> str:
    """REFUTED if Λ is nonzero on the target, else UNKNOWN.

    Rational targets expand λ₂ over ``basis``; tower targets use the
    real-closed model of S²_Z, where squares of positive elements vanish.
    """
    target = claim.target
    if not lambda1(target).is_zero():
        return REFUTED
    tower = any(is_tower(g) for g, _ in target.flat)
    try:
        if tower:
            t, w, _ = lambda2_real(target)
            nonzero = bool(t or w)
        else:
            nonzero = not lambda_classical(coinvariants(target), basis).is_zero()
    except FieldError:
        return UNKNOWN
    return REFUTED if nonzero else UNKNOWN


__all__ = [
    "PROVED", "REFUTED", "UNKNOWN", "NOT_FOUND", "NotFound", "Solution", "solve_in_pool",
    "search_certificate", "direct_search", "refute_via_invariants", "big_lambda", "square_class",
]
