"""Batch MAP decoding for the two-state model.

All arithmetic is log-domain max-plus with a ``-inf`` sentinel for zero
probability, so decisions never underflow even for sequences of length 10^6.

Tie-break convention
    Among likelihood maximizers the *canonical* alignment is the
    lexicographically smallest when paths are read as strings with a < b.
    ``decode_batch`` realizes it with two passes: a backward sweep computing
    the best achievable suffix score per state, then a forward greedy sweep
    that keeps state ``a`` whenever doing so still attains the maximum.  When
    no exact ties occur this is the unique maximizer, i.e. ordinary
    backpointer Viterbi.  ``decode_brute_force`` enumerates all paths in
    lexicographic order and keeps the first maximizer, which makes the two
    routines comparable bit for bit.

Argmax decisions use exact floating-point comparisons.  Separately, a
decision whose two operands agree within ``TIE_RTOL`` relative is *flagged*
as a tie (``Alignment.tie_count``) so callers can tell when the canonical
rule actually fired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .errors import EmptyLength, ImpossibleObservation, TooLong
from .model import STATE_A, STATE_B, STATE_CHARS, TwoStateHmm, _log

TIE_RTOL = 1e-12
BRUTE_FORCE_MAX_LEN = 24

_NEG_INF = -math.inf


def is_tie(x: float, y: float, rtol: float = TIE_RTOL) -> bool:
    """True when two log-domain quantities agree within rtol relative."""
    if x == y:
        return True
    if math.isinf(x) or math.isinf(y):
        return False
    return abs(x - y) <= rtol * max(abs(x), abs(y))


@dataclass(frozen=True)
class ScorePair:
    """Log-domain score pair at one time step (1-based ``time``).

    ``log_delta_a``/``log_delta_b`` are the maxima of the path log-likelihood
    over all prefixes ending in the respective state; never both ``-inf``.
    """

    time: int
    log_delta_a: float
    log_delta_b: float


@dataclass(frozen=True)
class Alignment:
    """Decoded state path and its joint log-likelihood.

    ``tie_count`` counts decisions that were within the tie tolerance while
    decoding (for the brute-force oracle: the number of co-maximizers beyond
    the reported one).
    """

    states: str
    log_likelihood: float
    tie_count: int = 0


def _log_init(model: TwoStateHmm, initial) -> tuple[float, float]:
    if initial is None:
        return model.log_initial
    return (_log(initial[0]), _log(initial[1]))


def _log_emissions(model: TwoStateHmm, observations: Sequence) -> tuple[list, list]:
    """Per-step emission log-densities; rejects observations outside both supports."""
    emit_a, emit_b = model.emit_a, model.emit_b
    lfa = [emit_a.log_density(x) for x in observations]
    lfb = [emit_b.log_density(x) for x in observations]
    for i, (fa, fb) in enumerate(zip(lfa, lfb)):
        if fa == _NEG_INF and fb == _NEG_INF:
            raise ImpossibleObservation(i + 1, observations[i])
    return lfa, lfb


def score_forward(model: TwoStateHmm, observations: Sequence, initial=None):
    """Run the score recursion, returning score pairs and backpointers.

    ``backpointers[u]`` (u >= 1, 0-based) is the pair of argmax predecessor
    states feeding time u+1, ties broken toward ``a``; entry 0 is None.
    Raises ImpossibleObservation when both scores vanish at some step.
    """
    if not observations:
        raise EmptyLength("observations must be nonempty")
    lfa, lfb = _log_emissions(model, observations)
    lq_a, lq_b = _log_init(model, initial)
    lpaa, lpab, lpba, lpbb = model.log_transitions

    la = lq_a + lfa[0]
    lb = lq_b + lfb[0]
    if la == _NEG_INF and lb == _NEG_INF:
        raise ImpossibleObservation(1, observations[0])
    pairs = [ScorePair(1, la, lb)]
    backpointers: list = [None]
    for i in range(1, len(observations)):
        from_a = la + lpaa
        from_b = lb + lpba
        if from_a >= from_b:
            na, bp_a = from_a + lfa[i], STATE_A
        else:
            na, bp_a = from_b + lfa[i], STATE_B
        from_a = la + lpab
        from_b = lb + lpbb
        if from_a >= from_b:
            nb, bp_b = from_a + lfb[i], STATE_A
        else:
            nb, bp_b = from_b + lfb[i], STATE_B
        la, lb = na, nb
        pairs.append(ScorePair(i + 1, la, lb))
        backpointers.append((bp_a, bp_b))
    return pairs, backpointers


def _lex_decode(lfa: Sequence[float], lfb: Sequence[float],
                lq: tuple[float, float],
                log_trans: tuple[float, float, float, float],
                terminal: int | None = None):
    """Lexicographically-smallest maximizer via suffix scores + greedy prefix.

    Returns (states as list of ints, path log-likelihood, tie count).
    ``terminal`` constrains the final state when given.
    """
    n = len(lfa)
    lpaa, lpab, lpba, lpbb = log_trans

    mu_a = [0.0] * n
    mu_b = [0.0] * n
    if terminal == STATE_A:
        mu_b[n - 1] = _NEG_INF
    elif terminal == STATE_B:
        mu_a[n - 1] = _NEG_INF
    for i in range(n - 2, -1, -1):
        step_a = lfa[i + 1] + mu_a[i + 1]
        step_b = lfb[i + 1] + mu_b[i + 1]
        va = lpaa + step_a
        vb = lpab + step_b
        mu_a[i] = va if va >= vb else vb
        va = lpba + step_a
        vb = lpbb + step_b
        mu_b[i] = va if va >= vb else vb

    states = [STATE_A] * n
    ties = 0
    cand_a = lq[0] + lfa[0]
    cand_b = lq[1] + lfb[0]
    total_a = cand_a + mu_a[0]
    total_b = cand_b + mu_b[0]
    if total_a == _NEG_INF and total_b == _NEG_INF:
        raise ImpossibleObservation(1)
    if is_tie(total_a, total_b):
        ties += 1
    if total_a >= total_b:
        level = cand_a
    else:
        states[0] = STATE_B
        level = cand_b
    for i in range(1, n):
        if states[i - 1] == STATE_A:
            cand_a = (level + lpaa) + lfa[i]
            cand_b = (level + lpab) + lfb[i]
        else:
            cand_a = (level + lpba) + lfa[i]
            cand_b = (level + lpbb) + lfb[i]
        total_a = cand_a + mu_a[i]
        total_b = cand_b + mu_b[i]
        if is_tie(total_a, total_b):
            ties += 1
        if total_a >= total_b:
            level = cand_a
        else:
            states[i] = STATE_B
            level = cand_b
    return states, level, ties


def decode_batch(model: TwoStateHmm, observations: Sequence, initial=None) -> Alignment:
    """Canonical MAP alignment of the observation sequence.

    Raises EmptyLength for empty input and propagates ImpossibleObservation.
    """
    if not observations:
        raise EmptyLength("observations must be nonempty")
    lfa, lfb = _log_emissions(model, observations)
    states, ll, ties = _lex_decode(lfa, lfb, _log_init(model, initial),
                                   model.log_transitions)
    return Alignment("".join(STATE_CHARS[s] for s in states), ll, ties)


def path_log_likelihood(model: TwoStateHmm, states: str, observations: Sequence,
                        initial=None) -> float:
    """Joint log-likelihood of a fixed state path and the observations."""
    if len(states) != len(observations):
        raise ValueError("states and observations must have equal length")
    lq = _log_init(model, initial)
    lpaa, lpab, lpba, lpbb = model.log_transitions
    lp = ((lpaa, lpab), (lpba, lpbb))
    emit = (model.emit_a.log_density, model.emit_b.log_density)
    prev = STATE_CHARS.index(states[0])
    ll = lq[prev] + emit[prev](observations[0])
    for i in range(1, len(states)):
        cur = STATE_CHARS.index(states[i])
        ll = (ll + lp[prev][cur]) + emit[cur](observations[i])
        prev = cur
    return ll


def decode_brute_force(model: TwoStateHmm, observations: Sequence,
                       initial=None) -> Alignment:
    """Exhaustive MAP oracle: first maximizer in lexicographic path order.

    Only feasible for short sequences; raises TooLong above 24 observations.
    """
    n = len(observations)
    if n == 0:
        raise EmptyLength("observations must be nonempty")
    if n > BRUTE_FORCE_MAX_LEN:
        raise TooLong(f"brute force limited to {BRUTE_FORCE_MAX_LEN}, got {n}")
    lfa, lfb = _log_emissions(model, observations)
    lf = (lfa, lfb)
    lq = _log_init(model, initial)
    lpaa, lpab, lpba, lpbb = model.log_transitions
    lp = ((lpaa, lpab), (lpba, lpbb))

    best_ll = _NEG_INF
    best_path = None
    co_maximizers = 0
    for path in product((STATE_A, STATE_B), repeat=n):
        prev = path[0]
        ll = lq[prev] + lf[prev][0]
        for i in range(1, n):
            cur = path[i]
            ll = (ll + lp[prev][cur]) + lf[cur][i]
            prev = cur
        if ll > best_ll or best_path is None:
            best_ll = ll
            best_path = path
            co_maximizers = 0
        elif ll == best_ll:
            co_maximizers += 1
    if best_ll == _NEG_INF:
        raise ImpossibleObservation(n)
    return Alignment("".join(STATE_CHARS[s] for s in best_path), best_ll,
                     co_maximizers)


def _brute_max(lq: tuple[float, float], lfa, lfb, lp, terminal=None) -> float:
    """Max path log-likelihood by enumeration (value only)."""
    n = len(lfa)
    lf = (lfa, lfb)
    best = _NEG_INF
    for path in product((STATE_A, STATE_B), repeat=n):
        if terminal is not None and path[-1] != terminal:
            continue
        prev = path[0]
        ll = lq[prev] + lf[prev][0]
        for i in range(1, n):
            cur = path[i]
            ll = (ll + lp[prev][cur]) + lf[cur][i]
            prev = cur
        if ll > best:
            best = ll
    return best


def decomposition_check(model: TwoStateHmm, observations: Sequence, u: int,
                        rtol: float = 1e-9) -> bool:
    """Structural self-test of the prefix/suffix likelihood decomposition.

    Verifies, by enumeration on both sides, that the overall maximum equals
    ``max over l of score_u(l) * best suffix likelihood restarted from the
    transition row of l``, split at time ``u`` (1 <= u < n, n <= 24).
    """
    n = len(observations)
    if not 1 <= u < n:
        raise ValueError(f"split must satisfy 1 <= u < n, got u={u}, n={n}")
    if n > BRUTE_FORCE_MAX_LEN:
        raise TooLong(f"decomposition check limited to {BRUTE_FORCE_MAX_LEN}")
    lfa, lfb = _log_emissions(model, observations)
    lq = _log_init(model, None)
    lpaa, lpab, lpba, lpbb = model.log_transitions
    lp = ((lpaa, lpab), (lpba, lpbb))

    full = _brute_max(lq, lfa, lfb, lp)
    split = _NEG_INF
    for state, row in ((STATE_A, (lpaa, lpab)), (STATE_B, (lpba, lpbb))):
        delta = _brute_max(lq, lfa[:u], lfb[:u], lp, terminal=state)
        suffix = _brute_max(row, lfa[u:], lfb[u:], lp)
        split = max(split, delta + suffix)
    if full == split:
        return True
    if math.isinf(full) or math.isinf(split):
        return False
    return abs(full - split) <= rtol * max(abs(full), abs(split), 1.0)


def state_after_extension(model: TwoStateHmm, log_delta_a: float, log_delta_b: float,
                          continuation: Sequence) -> int:
    """State at the split time once the scores are extended by ``continuation``.

    Given the score pair of some prefix at time u and further observations,
    runs the recursion over the continuation only, then backtracks from the
    terminal argmax (ties toward ``a``).  Used as the fast oracle for
    node future-invariance: at a strong node every maximizer shares the split
    state, so the backtracked state is decisive there.
    """
    lfa, lfb = _log_emissions(model, continuation)
    lpaa, lpab, lpba, lpbb = model.log_transitions
    la, lb = log_delta_a, log_delta_b
    bps = []
    for i in range(len(continuation)):
        from_a = la + lpaa
        from_b = lb + lpba
        if from_a >= from_b:
            na, bp_a = from_a + lfa[i], STATE_A
        else:
            na, bp_a = from_b + lfa[i], STATE_B
        from_a = la + lpab
        from_b = lb + lpbb
        if from_a >= from_b:
            nb, bp_b = from_a + lfb[i], STATE_A
        else:
            nb, bp_b = from_b + lfb[i], STATE_B
        la, lb = na, nb
        if la == _NEG_INF and lb == _NEG_INF:
            raise ImpossibleObservation(i + 1, continuation[i])
        bps.append((bp_a, bp_b))
    state = STATE_A if la >= lb else STATE_B
    for bp in reversed(bps):
        state = bp[state]
    return state
