"""Sequential pair-selection algorithms driven by binary duel feedback.

Two divergence-based variants share one state machine and differ only
in which constraint family gates exploitation and where optimal rates
come from: "cw" solves the exact LP on the empirical matrix, "ecw" uses
the closed form.  "random" draws uniform pairs and keeps counts only.

Every round is either a guard round (some pair is under-sampled or too
close to a tie: draw it immediately) or a loop round (draw the next
pair of the current list L_C, then re-plan).  Small-t conventions: the
near-tie threshold is +inf through round 16, sqrt(ln t) uses ln t
directly (zero at t=1), and normalized counts divide by ln(max(t, 2)).

Planning work is cached between rounds that change nothing but t
(self-pair draws), which makes the converged regime O(K^2) per round
for the guard scan and O(1) for the feasibility test.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, log, sqrt

import numpy as np

from .constraints import FEASIBILITY_TOL, min_lhs_cw, min_lhs_ecw
from .core import gap_divergence
from .errors import InternalInconsistencyError, TooLargeError, ValidationError
from .solvers import _cw_lp, _ecw_plan, default_k_max

DEFAULT_ALPHA = 3.0
DEFAULT_BETA = 0.01
VARIANTS = ("cw", "ecw", "random")

#: Rounds during which the near-tie guard is treated as +inf (ceil of e^e).
BOOTSTRAP_ROUNDS = 16


@dataclass(frozen=True)
class AlgorithmConfig:
    variant: str = "ecw"
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    seed: int = 0
    k_max: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.alpha > 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha!r}")
        if self.beta < 0:
            raise ValidationError(f"beta must be nonnegative, got {self.beta!r}")


def check_size(config: AlgorithmConfig, k: int) -> None:
    """The cw variant needs the exact LP every planning event, so it is size-gated."""
    if config.variant == "cw":
        gate = default_k_max() if config.k_max is None else config.k_max
        if k > gate:
            raise TooLargeError(f"cw variant gated at K_max={gate}, got K={k}")


class RmedState:
    """Mutable per-run state: counts, win tallies, pair lists, caches."""

    __slots__ = (
        "k",
        "t",
        "counts",
        "wins",
        "muhat",
        "lc",
        "lr",
        "ln_next",
        "cursor",
        "ihat",
        "_pairs",
        "_dirty",
        "_sets",
        "_weights",
        "_div",
        "_budgets",
        "_plan",
    )

    def __init__(self, k: int):
        if k < 2:
            raise ValidationError(f"need at least two arms, got K={k}")
        self.k = k
        self.t = 1
        self.counts = [[0] * k for _ in range(k)]
        self.wins = [[0] * k for _ in range(k)]
        self.muhat = [[0.5] * k for _ in range(k)]
        self._pairs = [(i, j) for i in range(k) for j in range(i)]
        self.lc = list(self._pairs)
        self.lr = set(self._pairs)
        self.ln_next = set()
        self.cursor = 0
        self.ihat = None  # 1-based once a candidate has been identified
        self._dirty = True
        self._sets = None
        self._weights = None
        self._div = None
        self._budgets = {}
        self._plan = None

    # -- refreshed lazily after any feedback ------------------------------

    def _refresh(self):
        vals = np.array(self.muhat)
        beats_me = vals < 0.5
        i_beat = vals > 0.5
        k = self.k
        sup = [np.flatnonzero(beats_me[i]).tolist() for i in range(k)]
        inf_sets = [np.flatnonzero(i_beat[i]).tolist() for i in range(k)]
        losses = [len(s) for s in sup]
        low = min(losses)
        winners = [i for i in range(k) if losses[i] == low]
        div = gap_divergence(vals)
        self._div = div.tolist()
        self._weights = (np.array(self.counts, dtype=float) * div).tolist()
        self._sets = (sup, inf_sets, losses, winners)
        self._budgets = {}
        self._plan = None
        self._dirty = False

    def _budget(self, i1: int, variant: str) -> float:
        cached = self._budgets.get(i1)
        if cached is None:
            sup, inf_sets, losses, _ = self._sets
            if variant == "cw":
                cached = min_lhs_cw(sup, inf_sets, losses, i1, self._weights)
            else:
                cached = min_lhs_ecw(sup, inf_sets, losses, i1, self._weights)
            self._budgets[i1] = cached
        return cached


def _first_guarded(state: RmedState, config: AlgorithmConfig):
    """First lexicographic pair failing a guard, or None."""
    t = state.t
    need = config.alpha * sqrt(log(t)) if t > 1 else 0.0
    near = inf if t <= BOOTSTRAP_ROUNDS else config.beta / log(log(t))
    counts = state.counts
    muhat = state.muhat
    for i, j in state._pairs:
        if counts[i][j] < need or abs(muhat[i][j] - 0.5) < near:
            return i, j
    return None


def select_pair(state: RmedState, config: AlgorithmConfig):
    """Next pair to draw, 1-based.  Guard rounds preempt the loop."""
    guarded = _first_guarded(state, config)
    if guarded is not None:
        return guarded[0] + 1, guarded[1] + 1
    i, j = state.lc[state.cursor]
    return i + 1, j + 1


def random_baseline_select(rng: np.random.Generator, k: int):
    """Uniform draw over the K(K-1)/2 unordered distinct pairs, 1-based."""
    if k < 2:
        raise ValidationError(f"need at least two arms, got K={k}")
    idx = int(rng.integers(k * (k - 1) // 2))
    # invert the lexicographic pair index
    i = 1
    while (i + 1) * i // 2 <= idx:
        i += 1
    j = idx - i * (i - 1) // 2
    return i + 1, j + 1


def _compute_plan(state: RmedState, config: AlgorithmConfig):
    """argmin-winner plan on the empirical matrix: (ihat0, rate matrix)."""
    sup, inf_sets, losses, winners = state._sets
    best_i, best_c, best_q = -1, inf, None
    for i1 in winners:
        if config.variant == "cw":
            q, constant = _cw_lp(state._div, sup, inf_sets, losses, i1)
        else:
            q, constant = _ecw_plan(state._div, sup, inf_sets, losses, i1)
        if constant < best_c:
            best_i, best_c, best_q = i1, constant, q
    return best_i, best_q


def _plan_step(state: RmedState, config: AlgorithmConfig, pair):
    t = state.t
    logt = log(t) if t >= 2 else log(2.0)
    if state._dirty:
        state._refresh()
    winners = state._sets[3]
    if not winners:
        raise InternalInconsistencyError("empirical winner set is empty")

    threshold = (1.0 - FEASIBILITY_TOL) * logt
    ihat = None
    for i1 in winners:
        if state._budget(i1, config.variant) >= threshold:
            ihat = i1
            break

    if ihat is not None:
        candidates = {(ihat, ihat)}
    else:
        plan = state._plan
        if plan is None:
            plan = _compute_plan(state, config)
            state._plan = plan
        ihat, qmat = plan
        counts = state.counts
        candidates = set()
        for i, j in state._pairs:
            if qmat[i][j] > counts[i][j] / logt:
                candidates.add((i, j))
        candidates.add((ihat, ihat))
    state.ihat = ihat + 1

    # loop bookkeeping: drop the drawn pair, merge newly required pairs
    state.lr.discard(pair)
    for p in candidates:
        if p not in state.lr:
            state.ln_next.add(p)
    state.cursor += 1
    if state.cursor >= len(state.lc):
        state.lc = sorted(state.ln_next)
        state.lr = set(state.lc)
        state.ln_next = set()
        state.cursor = 0


def update_and_plan(state: RmedState, config: AlgorithmConfig, pair, outcome) -> RmedState:
    """Consume one draw: update tallies, then re-plan if this was a loop round.

    ``pair`` is 1-based and must be the pair select_pair chose (or any
    pair for the random variant); ``outcome`` is 1 if the first arm won,
    0 otherwise, and ignored for self-pairs.
    """
    l, m = pair[0] - 1, pair[1] - 1
    if not (0 <= l < state.k and 0 <= m < state.k):
        raise ValidationError(f"pair {pair} out of range for K={state.k}")
    # phase is decided on the pre-update state, exactly as select_pair saw it
    loop_round = config.variant != "random" and _first_guarded(state, config) is None

    if l != m:
        if outcome not in (0, 1, True, False):
            raise ValidationError(f"binary outcome required for pair {pair}, got {outcome!r}")
        state.counts[l][m] += 1
        state.counts[m][l] += 1
        if outcome:
            state.wins[l][m] += 1
        else:
            state.wins[m][l] += 1
        p = state.wins[l][m] / state.counts[l][m]
        state.muhat[l][m] = p
        state.muhat[m][l] = 1.0 - p
        state._dirty = True
    else:
        state.counts[l][l] += 1

    if loop_round:
        _plan_step(state, config, (l, m))
    state.t += 1
    return state
