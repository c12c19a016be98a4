"""Optimal exploration rates and asymptotic regret constants.

The relaxed ("ecw") program decomposes per rival and each piece reduces
to: minimize sum c_j y_j subject to every (n-k)-subset of y summing to
at least 1.  After sorting costs ascending an optimal solution is a
prefix block y_1..y_h = 1/(h-k) for some h > k, so scanning the at most
n-k candidates solves it exactly.

The full ("cw") program is a linear program over all enumerated family
constraints plus per-pair box bounds; it is solved exactly by the dense
in-house simplex below (Bland's rule, deterministic).  The LP is gated
at K_max arms because the constraint count grows exponentially; the
relaxed program has no size limit.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .constraints import (
    RateVector,
    _iter_cw_descriptors,
    iter_pairs,
    pair_count,
    pair_index,
)
from .core import PreferenceMatrix, _copeland_sets, gap_divergence, kl_bernoulli
from .errors import (
    NotAWinnerError,
    NumericalInstabilityError,
    TiedPreferenceError,
    TooLargeError,
    ValidationError,
)

_K_MAX_ENV = "DUELBENCH_KMAX"
DEFAULT_K_MAX = 8


def default_k_max() -> int:
    """Exact-LP size gate; override with the DUELBENCH_KMAX environment variable."""
    return int(os.environ.get(_K_MAX_ENV, DEFAULT_K_MAX))


@dataclass(frozen=True)
class SubproblemInstance:
    """Cost vector over an index set plus the slack k of the subset constraints."""

    costs: tuple
    slack: int

    def __post_init__(self):
        if len(self.costs) < 1:
            raise ValidationError("subproblem needs at least one element")
        if self.slack < 0:
            raise ValidationError(f"slack must be nonnegative, got {self.slack}")
        if any(not math.isfinite(c) or c < 0 for c in self.costs):
            raise ValidationError("costs must be finite and nonnegative")


@dataclass(frozen=True)
class OptimalExploration:
    """Optimal rates and the induced logarithmic regret constant for one winner."""

    winner: int
    rates: RateVector
    constant: float
    exactness: str

    def to_json_dict(self) -> dict:
        return {
            "winner": self.winner,
            "constant": self.constant,
            "exactness": self.exactness,
            "rates": self.rates.to_map(),
        }


def _prefix_solution(costs, slack):
    """Best prefix-block solution: (values list, objective, block length h).

    Ties between equal-objective block lengths resolve to the smallest h.
    """
    n = len(costs)
    order = sorted(range(n), key=lambda idx: (costs[idx], idx))
    y = [0.0] * n
    if slack >= n:
        return y, 0.0, 0
    acc = 0.0
    prefix = [0.0]
    for idx in order:
        acc += costs[idx]
        prefix.append(acc)
    best_h, best_obj = -1, math.inf
    for h in range(slack + 1, n + 1):
        obj = prefix[h] / (h - slack)
        if obj < best_obj:
            best_h, best_obj = h, obj
    level = 1.0 / (best_h - slack)
    for idx in order[:best_h]:
        y[idx] = level
    return y, best_obj, best_h


def solve_subproblem(instance: SubproblemInstance):
    """Exact minimizer of the sorted-prefix subset program.

    Returns (y, objective) with y per element of the instance.  A slack
    of at least the set size means the constraint family is empty; the
    all-zero solution is returned with objective 0.
    """
    y, obj, _ = _prefix_solution(list(instance.costs), instance.slack)
    if instance.slack >= len(instance.costs):
        return np.zeros(len(instance.costs)), 0.0
    return np.asarray(y), float(obj)


# ---------------------------------------------------------------------------
# dense simplex (exact LP engine)


def simplex_solve(costs, constraints, upper_bounds):
    """Minimize costs . x subject to row . x >= 1 per row and 0 <= x <= u.

    All row coefficients must be nonnegative and the box point x = u must
    satisfy every row (it does for divergence families, where u is the
    per-pair budget cap).  Substituting x = u - z turns the box point into
    the slack-basis origin of an equivalent maximization, so no phase-one
    is needed.  Deterministic: Bland's rule for entering and leaving.

    Returns (x, value) with x an optimal vertex.
    """
    c = np.asarray(costs, dtype=float)
    u = np.asarray(upper_bounds, dtype=float)
    n = c.shape[0]
    if u.shape != (n,):
        raise ValidationError("objective and box sizes differ")
    if (u < 0).any() or not np.isfinite(u).all():
        raise ValidationError("box bounds must be finite and nonnegative")
    rows = np.asarray(constraints, dtype=float).reshape(-1, n) if len(constraints) else np.zeros((0, n))
    if (rows < 0).any():
        raise ValidationError("constraint coefficients must be nonnegative")
    r = rows.shape[0]
    b = rows @ u - 1.0
    if (b < -1e-9).any():
        bad = int(np.argmin(b))
        raise ValidationError(f"constraint row {bad} is violated even at the box point")
    b = np.maximum(b, 0.0)

    m = r + n
    tab = np.zeros((m + 1, n + m + 1))
    tab[:r, :n] = rows
    tab[r:m, :n] = np.eye(n)
    tab[:m, n : n + m] = np.eye(m)
    tab[:r, -1] = b
    tab[r:m, -1] = u
    tab[m, :n] = c  # reduced costs of max c.z
    basis = list(range(n, n + m))

    while True:
        entering = np.flatnonzero(tab[m, :-1] > 1e-9)
        if entering.size == 0:
            break
        j = int(entering[0])
        col = tab[:m, j]
        usable = col > 1e-11
        if not usable.any():
            raise NumericalInstabilityError(
                "no pivot above 1e-11 available in entering column"
            )
        ratios = np.where(usable, tab[:m, -1] / np.where(usable, col, 1.0), np.inf)
        low = ratios.min()
        tied = np.flatnonzero(ratios <= low + 1e-12)
        i = int(min(tied, key=lambda idx: basis[idx]))
        prow = tab[i] / tab[i, j]
        colv = tab[:, j].copy()
        colv[i] = 0.0
        tab -= np.outer(colv, prow)
        tab[i] = prow
        basis[i] = j

    z = np.zeros(n)
    for i, bv in enumerate(basis):
        if bv < n:
            z[bv] = tab[i, -1]
    x = np.clip(u - z, 0.0, u)
    return x, float(c @ x)


# ---------------------------------------------------------------------------
# internal planners shared with the bandit (0-based sets, tie-tolerant safe)


def _regret_nums(losses):
    low = min(losses)
    return [[li + lj - 2 * low for lj in losses] for li in losses]


def _ecw_plan(div, sup, inf_sets, losses, i1):
    """Closed-form relaxed rates: (q as K x K list, constant).

    div is the pairwise gap divergence; tied pairs (div 0) never appear in
    the given sets and receive no rate.
    """
    k = len(losses)
    denom = 2.0 * (k - 1) if k > 1 else 1.0
    rnum = _regret_nums(losses)
    q = [[0.0] * k for _ in range(k)]
    constant = 0.0
    for j in inf_sets[i1]:
        rate = 1.0 / div[i1][j]
        q[i1][j] = rate
        q[j][i1] = rate
        constant += (rnum[i1][j] / denom) * rate
    li1 = losses[i1]
    for i2 in range(k):
        if i2 == i1:
            continue
        need = losses[i2] - li1 + 1
        cand = [j for j in sup[i2] if j != i1]
        if need > len(cand):
            continue
        costs = [(rnum[j][i2] / denom) / div[j][i2] for j in cand]
        y, _, _ = _prefix_solution(costs, len(cand) - need)
        for j, yj in zip(cand, y):
            if yj > 0.0:
                # pair roles are disjoint by construction: pins touch i1,
                # and each subproblem only sets the losing side of i2
                assert q[j][i2] == 0.0
                rate = yj / div[j][i2]
                q[j][i2] = rate
                q[i2][j] = rate
                constant += (rnum[j][i2] / denom) * rate
    return q, constant


def _cw_lp(div, sup, inf_sets, losses, i1):
    """Exact full-family LP: (q as K x K list, constant)."""
    k = len(losses)
    npairs = pair_count(k)
    if npairs == 0:
        return [[0.0]], 0.0
    denom = 2.0 * (k - 1)
    rnum = _regret_nums(losses)
    c = np.array([rnum[i][j] / denom for i, j in iter_pairs(k)])
    u = np.array([1.0 / div[i][j] if div[i][j] > 0.0 else 0.0 for i, j in iter_pairs(k)])
    seen = {}
    for i2, _l, iset, sset in _iter_cw_descriptors(sup, inf_sets, losses, i1):
        idxs = frozenset(
            [pair_index(max(i1, j), min(i1, j)) for j in iset]
            + [pair_index(max(i2, j), min(i2, j)) for j in sset]
        )
        if idxs not in seen:
            seen[idxs] = True
    divs = [div[i][j] for i, j in iter_pairs(k)]
    rows = np.zeros((len(seen), npairs))
    for rix, idxs in enumerate(seen):
        for p in idxs:
            rows[rix, p] = divs[p]
    x, value = simplex_solve(c, rows, u)
    q = [[0.0] * k for _ in range(k)]
    for (i, j), rate in zip(iter_pairs(k), x):
        q[i][j] = q[j][i] = float(rate)
    return q, value


def _checked_sets(matrix: PreferenceMatrix, i1: int):
    if not 1 <= i1 <= matrix.k:
        raise ValidationError(f"arm index {i1} out of range for K={matrix.k}")
    if matrix.has_ties:
        raise TiedPreferenceError("exploration programs require strict gaps")
    sup, inf_sets, losses = _copeland_sets(matrix.values, False)
    if losses[i1 - 1] > min(losses):
        raise NotAWinnerError(f"arm {i1} is not a Copeland winner")
    return sup, inf_sets, losses


def _rates_from_matrix(k, q):
    vals = np.array([q[i][j] for i, j in iter_pairs(k)]) if k > 1 else np.zeros(0)
    return RateVector(k, vals)


def ecw_optimal(matrix: PreferenceMatrix, i1: int) -> OptimalExploration:
    """Closed-form optimal rates of the relaxed program for winner i1 (1-based)."""
    sup, inf_sets, losses = _checked_sets(matrix, i1)
    div = gap_divergence(matrix.values).tolist()
    q, constant = _ecw_plan(div, sup, inf_sets, losses, i1 - 1)
    return OptimalExploration(
        winner=i1,
        rates=_rates_from_matrix(matrix.k, q),
        constant=float(constant),
        exactness="ecw_closed_form",
    )


def lp_cw_optimal(matrix: PreferenceMatrix, i1: int, k_max: int | None = None) -> OptimalExploration:
    """Exact optimum of the full program for winner i1, via enumerated LP.

    Raises TooLargeError beyond K_max arms (constraint count is
    exponential in K).
    """
    gate = default_k_max() if k_max is None else k_max
    if matrix.k > gate:
        raise TooLargeError(f"exact LP gated at K_max={gate}, matrix has K={matrix.k}")
    sup, inf_sets, losses = _checked_sets(matrix, i1)
    div = gap_divergence(matrix.values).tolist()
    q, constant = _cw_lp(div, sup, inf_sets, losses, i1 - 1)
    return OptimalExploration(
        winner=i1,
        rates=_rates_from_matrix(matrix.k, q),
        constant=float(constant),
        exactness="lp_exact",
    )


def lower_bound(matrix: PreferenceMatrix, k_max: int | None = None):
    """Exact asymptotic constant: min over winners of the full program.

    Returns (constant, winner); ties resolve to the smallest arm index.
    """
    if matrix.has_ties:
        raise TiedPreferenceError("exploration programs require strict gaps")
    _, _, losses = _copeland_sets(matrix.values, False)
    low = min(losses)
    best_c, best_w = math.inf, -1
    for i1 in range(1, matrix.k + 1):
        if losses[i1 - 1] != low:
            continue
        val = lp_cw_optimal(matrix, i1, k_max=k_max).constant
        if val < best_c:
            best_c, best_w = val, i1
    return best_c, best_w


def ecw_constant(matrix: PreferenceMatrix) -> float:
    """Leading regret constant of the relaxed program: min over winners."""
    sup, inf_sets, losses = _copeland_sets(matrix.values, False)
    div = gap_divergence(matrix.values).tolist()
    low = min(losses)
    best = math.inf
    for i1 in range(matrix.k):
        if losses[i1] != low:
            continue
        _, constant = _ecw_plan(div, sup, inf_sets, losses, i1)
        best = min(best, constant)
    return float(best)


# ---------------------------------------------------------------------------
# closed-form bounds


def _min_gap(matrix: PreferenceMatrix) -> float:
    if matrix.k < 2:
        raise ValidationError("gap undefined for a single arm")
    vals = matrix.values
    off = ~np.eye(matrix.k, dtype=bool)
    delta = float(np.min(np.abs(vals[off] - 0.5)))
    if delta == 0.0:
        raise TiedPreferenceError("bounds require strict gaps")
    return delta


def ccb_bound(matrix: PreferenceMatrix) -> float:
    """Confidence-bound style constant 2K(C + L_min + 1) / Delta^2."""
    _, _, losses = _copeland_sets(matrix.values, False)
    low = min(losses)
    c = sum(1 for li in losses if li == low)
    delta = _min_gap(matrix)
    return 2.0 * matrix.k * (c + low + 1) / (delta * delta)


def ecw_explicit_bound(matrix: PreferenceMatrix, i1: int) -> float:
    """Feasible-point upper bound on the relaxed constant for winner i1."""
    _, _, losses = _checked_sets(matrix, i1)
    delta = _min_gap(matrix)
    d = kl_bernoulli(0.5 + delta, 0.5)
    low = min(losses)
    total = 0.0
    for i2 in range(matrix.k):
        if i2 == i1 - 1:
            continue
        total += 1.0 + losses[i2] / (losses[i2] - low + 1.0)
    return total / d


def ecw_worstcase_bound(matrix: PreferenceMatrix) -> float:
    """Loss-profile-free upper bound (K / d) ((L_min + 3)/2 + L_min^2 / K)."""
    _, _, losses = _copeland_sets(matrix.values, False)
    delta = _min_gap(matrix)
    d = kl_bernoulli(0.5 + delta, 0.5)
    low = min(losses)
    k = matrix.k
    return (k / d) * ((low + 3.0) / 2.0 + low * low / k)
