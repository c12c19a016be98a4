"""Independent brute-force evaluators used as test oracles.

Everything here re-derives the constraint families directly from their
set-quantified definitions with plain itertools enumeration, without
touching the library's sorted fast paths or descriptor generators.
Intended for K <= 6.
"""

import itertools
import math


def sign_sets(values):
    """(superiors, inferiors, losses), 0-based, ties in neither set."""
    k = len(values)
    sup = [
        sorted(j for j in range(k) if j != i and values[i][j] < 0.5) for i in range(k)
    ]
    inf_ = [
        sorted(j for j in range(k) if j != i and values[i][j] > 0.5) for i in range(k)
    ]
    losses = [len(s) for s in sup]
    return sup, inf_, losses


def _pair(a, b):
    return (a, b) if a > b else (b, a)


def cw_pair_sets(values, i1):
    """Every P_IS of the full family for 0-based winner candidate i1."""
    sup, inf_, losses = sign_sets(values)
    k = len(values)
    ordered = sorted(losses)
    if k < 2:
        return []
    out = []
    for i2 in range(k):
        if i2 == i1:
            continue
        source = [j for j in sup[i2] if j != i1]
        for level in range(max(0, ordered[0] - 1), ordered[1] + 1):
            need_i = level + 1 - losses[i1]
            if need_i < 0:
                continue
            for iset in itertools.combinations(inf_[i1], need_i):
                need_s = max(0, losses[i2] - level - (1 if i2 in iset else 0))
                if need_s > len(source):
                    continue
                for sset in itertools.combinations(source, need_s):
                    pairs = {_pair(i1, j) for j in iset} | {_pair(i2, j) for j in sset}
                    out.append(frozenset(pairs))
    return out


def ecw_pair_sets(values, i1):
    """(pin pairs, subset-constraint pair sets) of the relaxed family."""
    sup, inf_, losses = sign_sets(values)
    k = len(values)
    pins = [_pair(i1, j) for j in inf_[i1]]
    out = []
    for i2 in range(k):
        if i2 == i1:
            continue
        need = losses[i2] - losses[i1] + 1
        source = [j for j in sup[i2] if j != i1]
        if need > len(source):
            continue
        for sset in itertools.combinations(source, need):
            out.append(frozenset(_pair(i2, j) for j in sset))
    return pins, out


def min_lhs_brute(pair_sets, weights):
    """Minimum constraint left side over explicit pair sets, +inf if none."""
    best = math.inf
    for pairs in pair_sets:
        lhs = sum(weights[i][j] for i, j in pairs)
        if lhs < best:
            best = lhs
    return best


def feasible_brute(values, i1, weights, kind, tol=1e-12):
    """Brute-force membership test matching check_feasible's one-sided reading."""
    if kind == "cw":
        low = min_lhs_brute(cw_pair_sets(values, i1), weights)
    else:
        pins, sets = ecw_pair_sets(values, i1)
        low = min(
            min_lhs_brute(sets, weights),
            min((weights[i][j] for i, j in pins), default=math.inf),
        )
    return low >= 1.0 - tol


def subset_lp_rows(n, slack):
    """Constraint rows of the enumerated subset program: every (n-slack)-subset."""
    rows = []
    for subset in itertools.combinations(range(n), n - slack):
        row = [0.0] * n
        for j in subset:
            row[j] = 1.0
        rows.append(row)
    return rows


def subset_solution_feasible(y, slack, tol=1e-9):
    """Every (n - slack)-subset of y sums to at least 1."""
    n = len(y)
    return all(
        sum(y[j] for j in subset) >= 1.0 - tol
        for subset in itertools.combinations(range(n), n - slack)
    )
