"""Sparse exact integer linear algebra: find n in Z^J with sum_j n_j col_j = b.

Columns and the right-hand side are sparse dicts ``row -> int``.  The solver
eliminates along unit pivots first (a unimodular substitution, so integrality
is preserved), choosing the sparsest row via a heap.  Whatever is left has no
unit entries and goes to a column-wise Hermite reduction with gcd steps.

A modular rank test is provided as a cheap, rigorous infeasibility filter: if
the system has no solution mod p it has none over Z.  The converse fails (a
2-torsion obstruction is invisible mod an odd prime), so a modular success is
only ever used to decide whether the integer solve is worth running.
"""

from __future__ import annotations

import heapq

MODULUS = (1 << 61) - 1


def index_rows(cols, b):
    """Relabel row keys as consecutive ints (first-seen order) for cheap comparisons."""
    ids: dict = {}
    new_cols = []
    for c in cols:
        new_cols.append({ids.setdefault(r, len(ids)): v for r, v in c.items()})
    new_b = {ids.setdefault(r, len(ids)): v for r, v in b.items()}
    return new_cols, new_b


def prune(cols, b) -> list[int]:
    """Indices of columns that can appear in a solution.

    A row absent from b and touched by a single live column forces that
    column's coefficient to zero; repeat until stable.
    """
    live = set(range(len(cols)))
    touching: dict = {}
    for j, c in enumerate(cols):
        for r in c:
            touching.setdefault(r, set()).add(j)
    stack = [r for r, s in touching.items() if len(s) == 1 and r not in b]
    while stack:
        r = stack.pop()
        s = touching[r]
        if len(s) != 1 or r in b:
            continue
        j = next(iter(s))
        live.discard(j)
        for r2 in cols[j]:
            touching[r2].discard(j)
            if len(touching[r2]) == 1 and r2 not in b:
                stack.append(r2)
    return sorted(live)


def feasible_mod_p(cols, b, idx=None, p: int = MODULUS) -> bool:
    """Whether the system is solvable modulo the prime p."""
    idx = range(len(cols)) if idx is None else idx
    cols, b = index_rows(cols, b)
    rows: dict = {}
    for j in idx:
        for r, v in cols[j].items():
            if v % p:
                rows.setdefault(r, {})[j] = v % p
    for r, v in b.items():
        if r not in rows and v % p:
            return False
    rhs = {r: b.get(r, 0) % p for r in rows}
    colrows: dict = {}
    for r, d in rows.items():
        for j in d:
            colrows.setdefault(j, set()).add(r)
    heap = [(len(d), r) for r, d in rows.items()]
    heapq.heapify(heap)
    done = set()
    while heap:
        n, r = heapq.heappop(heap)
        if r in done:
            continue
        d = rows[r]
        if len(d) != n:
            heapq.heappush(heap, (len(d), r))
            continue
        done.add(r)
        if not d:
            if rhs[r]:
                return False
            continue
        j = min(d, key=lambda k: len(colrows[k]))
        inv = pow(d[j], p - 2, p)
        d = {k: v * inv % p for k, v in d.items()}
        rr = rhs[r] * inv % p
        for k in d:
            colrows[k].discard(r)
        for r2 in list(colrows[j]):
            d2 = rows[r2]
            f = d2[j]
            for k, v in d.items():
                nv = (d2.get(k, 0) - f * v) % p
                if nv:
                    if k not in d2:
                        colrows[k].add(r2)
                    d2[k] = nv
                elif k in d2:
                    del d2[k]
                    colrows[k].discard(r2)
            rhs[r2] = (rhs[r2] - f * rr) % p
            heapq.heappush(heap, (len(d2), r2))
        colrows[j] = set()
    return True


def solve(cols, b, weight=None):
    """Integer solution ``{j: n_j}`` of ``sum n_j cols[j] = b``, or None.

    ``weight`` (optional list) biases unit-pivot selection: columns with a
    larger weight are eliminated later, so they tend to stay out of the answer.
    """
    cols, b = index_rows(cols, b)
    rows: dict = {}
    for j, c in enumerate(cols):
        for r, v in c.items():
            if v:
                rows.setdefault(r, {})[j] = v
    for r, v in b.items():
        if v and r not in rows:
            return None
    rhs = {r: b.get(r, 0) for r in rows}
    colrows: dict = {}
    for r, d in rows.items():
        for j in d:
            colrows.setdefault(j, set()).add(r)

    subs = []  # (j, {k: coef}, const): n_j = const + sum coef * n_k
    live = set(rows)
    heap = [(len(rows[r]), r) for r in live]
    heapq.heapify(heap)
    while heap:
        n, r = heapq.heappop(heap)
        if r not in live:
            continue
        d = rows[r]
        if len(d) != n:
            heapq.heappush(heap, (len(d), r))
            continue
        if not d:
            continue
        units = [j for j, v in d.items() if v in (1, -1)]
        if not units:
            continue
        j = min(units, key=lambda k: ((weight[k] if weight else 0), len(colrows[k])))
        d = rows.pop(r)
        live.discard(r)
        s = d[j]
        c0 = rhs.pop(r) * s
        expr = {k: -v * s for k, v in d.items() if k != j}
        for k in d:
            colrows[k].discard(r)
        for r2 in list(colrows[j]):
            d2 = rows[r2]
            f = d2.pop(j)
            for k, v in expr.items():
                nv = d2.get(k, 0) + f * v
                if nv:
                    if k not in d2:
                        colrows[k].add(r2)
                    d2[k] = nv
                else:
                    d2.pop(k, None)
                    colrows[k].discard(r2)
            rhs[r2] -= f * c0
            heapq.heappush(heap, (len(d2), r2))
        colrows[j] = set()
        subs.append((j, expr, c0))

    sol: dict = {}
    residual = []
    for r in sorted(live):
        if not rows[r]:
            if rhs[r]:
                return None
        else:
            residual.append(r)
    if residual:
        part = _hermite([(r, rows[r]) for r in residual], {r: rhs[r] for r in residual})
        if part is None:
            return None
        sol.update(part)
    for j, expr, c0 in reversed(subs):
        v = c0 + sum(c * sol.get(k, 0) for k, c in expr.items())
        if v:
            sol[j] = v
    return sol


def _hermite(eqs, rhs):
    """Column-style integer echelon for the residual (unit-free) system."""
    colmap: dict = {}
    for r, d in eqs:
        for j, v in d.items():
            colmap.setdefault(j, {})[r] = v
    cols = [(dict(v), {j: 1}) for j, v in sorted(colmap.items())]
    b = {r: v for r, v in rhs.items() if v}
    comb: dict = {}
    active = list(range(len(cols)))
    for r, _ in eqs:
        js = [i for i in active if cols[i][0].get(r)]
        if not js:
            if b.get(r):
                return None
            continue
        while len(js) > 1:
            js.sort(key=lambda i: abs(cols[i][0][r]))
            p = js[0]
            pv = cols[p][0][r]
            keep = [p]
            for i in js[1:]:
                q = cols[i][0][r] // pv
                _axpy(cols[i][0], cols[p][0], -q)
                _axpy(cols[i][1], cols[p][1], -q)
                if cols[i][0].get(r):
                    keep.append(i)
            js = keep
        p = js[0]
        pv = cols[p][0][r]
        br = b.get(r, 0)
        if br % pv:
            return None
        q = br // pv
        if q:
            _axpy(b, cols[p][0], -q)
            _axpy(comb, cols[p][1], q)
        active.remove(p)
    if b:
        return None
    return {k: v for k, v in comb.items() if v}


def _axpy(y: dict, x: dict, a: int):
    for k, w in x.items():
        nv = y.get(k, 0) + a * w
        if nv:
            y[k] = nv
        else:
            y.pop(k, None)
