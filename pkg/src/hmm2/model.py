"""Two-state hidden Markov model: definition, validation, sampling.

States are indexed 0 (``a``) and 1 (``b``) internally and rendered as the
characters ``a``/``b`` at every external boundary (paths are plain strings
like ``"aabba"``).  All probability work downstream of validation happens in
log domain; a zero probability maps to ``-inf``.

Instances are immutable after validation and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    BAD_EMISSION,
    BAD_INITIAL,
    INDISTINGUISHABLE_EMISSIONS,
    NON_POSITIVE_TRANSITION,
    ROW_SUM_VIOLATION,
    EmptyLength,
    ModelValidationError,
)
from .rng import SplitMix64

STATE_A = 0
STATE_B = 1
STATE_CHARS = "ab"

ROW_SUM_TOL = 1e-9
CASE_TOL = 1e-12  # |p_aa - p_ba| at or below this is treated as equality

_LOG_2PI = math.log(2.0 * math.pi)


def _log(p: float) -> float:
    """log with the 0 -> -inf convention used throughout."""
    return math.log(p) if p > 0.0 else -math.inf


@dataclass(frozen=True)
class CategoricalEmission:
    """Finite-alphabet emission distribution (counting reference measure)."""

    alphabet: tuple[str, ...]
    probs: tuple[float, ...]

    def violations(self) -> list[tuple[str, str]]:
        out = []
        if not self.alphabet:
            out.append((BAD_EMISSION, "alphabet is empty"))
        if len(set(self.alphabet)) != len(self.alphabet):
            out.append((BAD_EMISSION, "alphabet symbols are not distinct"))
        for sym in self.alphabet:
            if not sym or any(ch.isspace() for ch in sym):
                out.append((BAD_EMISSION, f"symbol {sym!r} is empty or has whitespace"))
        if len(self.probs) != len(self.alphabet):
            out.append((BAD_EMISSION, "probs length does not match alphabet"))
            return out
        if any(p < 0.0 for p in self.probs):
            out.append((BAD_EMISSION, "negative symbol probability"))
        elif self.probs and abs(sum(self.probs) - 1.0) > ROW_SUM_TOL:
            out.append((BAD_EMISSION, f"probs sum to {sum(self.probs)!r}, expected 1"))
        return out

    @cached_property
    def _index(self) -> dict[str, int]:
        return {sym: i for i, sym in enumerate(self.alphabet)}

    @cached_property
    def _log_probs(self) -> tuple[float, ...]:
        return tuple(_log(p) for p in self.probs)

    @cached_property
    def _cdf(self) -> tuple[float, ...]:
        acc, out = 0.0, []
        for p in self.probs:
            acc += p
            out.append(acc)
        return tuple(out)

    def log_density(self, x) -> float:
        i = self._index.get(x)
        return -math.inf if i is None else self._log_probs[i]

    def sample(self, rng: SplitMix64) -> str:
        return self.alphabet[rng.index_from_cdf(self._cdf)]


@dataclass(frozen=True)
class GaussianEmission:
    """Scalar Gaussian emission (Lebesgue reference measure)."""

    mean: float
    variance: float

    def violations(self) -> list[tuple[str, str]]:
        if not (self.variance > 0.0) or not math.isfinite(self.variance):
            return [(BAD_EMISSION, f"variance {self.variance!r} is not positive")]
        if not math.isfinite(self.mean):
            return [(BAD_EMISSION, f"mean {self.mean!r} is not finite")]
        return []

    @cached_property
    def _log_norm(self) -> float:
        return -0.5 * (_LOG_2PI + math.log(self.variance))

    @cached_property
    def _inv_2var(self) -> float:
        return 0.5 / self.variance

    def log_density(self, x) -> float:
        d = x - self.mean
        return self._log_norm - d * d * self._inv_2var

    def sample(self, rng: SplitMix64) -> float:
        return rng.gauss(self.mean, math.sqrt(self.variance))


EmissionModel = Union[CategoricalEmission, GaussianEmission]


def emissions_distinguishable(emit_a: EmissionModel, emit_b: EmissionModel) -> bool:
    """True iff the densities differ on a set of positive reference measure.

    Categorical: some symbol has different probabilities (exact comparison).
    Gaussian: the parameter pairs differ (two distinct Gaussian densities can
    agree on at most two points, a Lebesgue-null set).
    """
    if isinstance(emit_a, CategoricalEmission) and isinstance(emit_b, CategoricalEmission):
        if emit_a.alphabet != emit_b.alphabet:
            return True
        return any(pa != pb for pa, pb in zip(emit_a.probs, emit_b.probs))
    if isinstance(emit_a, GaussianEmission) and isinstance(emit_b, GaussianEmission):
        return emit_a.mean != emit_b.mean or emit_a.variance != emit_b.variance
    return True


class CaseLabel:
    """Transition-matrix regime; exactly one label applies to a valid model."""

    CASE1 = "case1"  # p_aa > p_ba: state changes only at nodes
    CASE2 = "case2"  # p_aa < p_ba: state repeats only at nodes
    CASE3 = "case3"  # p_aa = p_ba: i.i.d. mixture, every step is a node

    ALL = (CASE1, CASE2, CASE3)


@dataclass(frozen=True)
class TwoStateHmm:
    """Validated two-state HMM.

    ``transitions[i][j]`` is the probability of moving from state i to state
    j; every entry must be strictly positive and rows sum to 1.  ``initial``
    is an explicit start distribution or None for the stationary one.
    Construction raises :class:`ModelValidationError` listing every violated
    invariant.
    """

    transitions: tuple[tuple[float, float], tuple[float, float]]
    emit_a: EmissionModel
    emit_b: EmissionModel
    initial: tuple[float, float] | None = None

    def __post_init__(self):
        violations = []
        rows = self.transitions
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ModelValidationError([(ROW_SUM_VIOLATION, "transition matrix must be 2x2")])
        for i, row in enumerate(rows):
            for j, p in enumerate(row):
                if not (p > 0.0) or not math.isfinite(p):
                    violations.append(
                        (NON_POSITIVE_TRANSITION,
                         f"p[{STATE_CHARS[i]}{STATE_CHARS[j]}]={p!r} must be > 0")
                    )
            if abs(sum(row) - 1.0) > ROW_SUM_TOL:
                violations.append(
                    (ROW_SUM_VIOLATION, f"row {STATE_CHARS[i]} sums to {sum(row)!r}")
                )
        if self.initial is not None:
            q = self.initial
            if len(q) != 2 or any(not math.isfinite(v) or v < 0.0 for v in q):
                violations.append((BAD_INITIAL, f"initial {q!r} must be two nonnegative reals"))
            elif abs(q[0] + q[1] - 1.0) > ROW_SUM_TOL:
                violations.append((BAD_INITIAL, f"initial sums to {q[0] + q[1]!r}"))
        violations.extend(self.emit_a.violations())
        violations.extend(self.emit_b.violations())
        if isinstance(self.emit_a, CategoricalEmission) != isinstance(self.emit_b, CategoricalEmission):
            violations.append((BAD_EMISSION, "both states must use the same emission family"))
        elif (isinstance(self.emit_a, CategoricalEmission)
              and isinstance(self.emit_b, CategoricalEmission)
              and self.emit_a.alphabet != self.emit_b.alphabet):
            violations.append((BAD_EMISSION, "emission alphabets differ between states"))
        elif not violations and not emissions_distinguishable(self.emit_a, self.emit_b):
            violations.append(
                (INDISTINGUISHABLE_EMISSIONS, "emission densities are identical")
            )
        if violations:
            raise ModelValidationError(violations)

    # Named transition entries.
    @property
    def p_aa(self) -> float:
        return self.transitions[0][0]

    @property
    def p_ab(self) -> float:
        return self.transitions[0][1]

    @property
    def p_ba(self) -> float:
        return self.transitions[1][0]

    @property
    def p_bb(self) -> float:
        return self.transitions[1][1]

    @cached_property
    def stationary(self) -> tuple[float, float]:
        """Unique solution of pi = pi P (positivity guarantees uniqueness)."""
        total = self.p_ab + self.p_ba
        return (self.p_ba / total, self.p_ab / total)

    @cached_property
    def initial_dist(self) -> tuple[float, float]:
        return self.initial if self.initial is not None else self.stationary

    @cached_property
    def log_transitions(self) -> tuple[float, float, float, float]:
        """(log p_aa, log p_ab, log p_ba, log p_bb)."""
        return (_log(self.p_aa), _log(self.p_ab), _log(self.p_ba), _log(self.p_bb))

    @cached_property
    def log_initial(self) -> tuple[float, float]:
        q = self.initial_dist
        return (_log(q[0]), _log(q[1]))

    def emission(self, state: int) -> EmissionModel:
        return self.emit_a if state == STATE_A else self.emit_b

    @cached_property
    def case(self) -> str:
        return classify_case(self)


def stationary(model: TwoStateHmm) -> tuple[float, float]:
    """Stationary distribution of the hidden chain."""
    return model.stationary


def classify_case(model: TwoStateHmm, tol: float = CASE_TOL) -> str:
    """Label the transition regime; |p_aa - p_ba| <= tol counts as equality."""
    diff = model.p_aa - model.p_ba
    if diff > tol:
        return CaseLabel.CASE1
    if diff < -tol:
        return CaseLabel.CASE2
    return CaseLabel.CASE3


def sample_realization(model: TwoStateHmm, n: int, seed: int):
    """Draw (hidden path, observations) of length n >= 1.

    The hidden path starts from the model's initial distribution and follows
    the transition matrix; observation i is drawn from the emission model of
    the hidden state at i.  Identical (model, n, seed) give identical output.
    Returns ``(states, observations)`` with ``states`` a string over {a, b}.
    """
    if n < 1:
        raise EmptyLength(f"realization length must be >= 1, got {n}")
    rng = SplitMix64(seed)
    q_a = model.initial_dist[0]
    p_aa, p_ba = model.p_aa, model.p_ba
    emit_a, emit_b = model.emit_a, model.emit_b
    states = []
    obs = []
    state = STATE_A if rng.random() < q_a else STATE_B
    for _ in range(n):
        states.append(state)
        obs.append((emit_a if state == STATE_A else emit_b).sample(rng))
        stay_a = p_aa if state == STATE_A else p_ba
        state = STATE_A if rng.random() < stay_a else STATE_B
    return "".join(STATE_CHARS[s] for s in states), obs


# ---------------------------------------------------------------------------
# Model file format (JSON) and observation files.
# ---------------------------------------------------------------------------

def _parse_emissions(raw: Mapping, violations: list) -> tuple[EmissionModel, EmissionModel]:
    kind = raw.get("type")
    if kind == "categorical":
        alphabet = tuple(str(s) for s in raw.get("alphabet", ()))
        probs_a = tuple(float(p) for p in raw.get("probs_a", ()))
        probs_b = tuple(float(p) for p in raw.get("probs_b", ()))
        return (CategoricalEmission(alphabet, probs_a),
                CategoricalEmission(alphabet, probs_b))
    if kind == "gaussian":
        def gauss(side: str) -> GaussianEmission:
            params = raw.get(side, {})
            return GaussianEmission(float(params.get("mean", math.nan)),
                                    float(params.get("variance", math.nan)))
        return gauss("a"), gauss("b")
    violations.append((BAD_EMISSION, f"unknown emission type {kind!r}"))
    return (CategoricalEmission(("?",), (1.0,)), CategoricalEmission(("?",), (1.0,)))


def validate_model(raw: Mapping) -> TwoStateHmm:
    """Build a validated model from a parsed model document.

    Expected shape::

        {"transitions": [[p_aa, p_ab], [p_ba, p_bb]],
         "initial": "stationary" | [q_a, q_b],          # optional
         "emissions": {"type": "categorical", "alphabet": [...],
                       "probs_a": [...], "probs_b": [...]}
                      | {"type": "gaussian", "a": {"mean": m, "variance": v},
                                             "b": {"mean": m, "variance": v}}}

    Raises :class:`ModelValidationError` naming every violated invariant.
    """
    violations: list[tuple[str, str]] = []
    try:
        rows = raw["transitions"]
        transitions = tuple(tuple(float(p) for p in row) for row in rows)
        if len(transitions) != 2 or any(len(r) != 2 for r in transitions):
            raise ValueError
    except (KeyError, TypeError, ValueError):
        raise ModelValidationError(
            [(ROW_SUM_VIOLATION, "transitions must be a 2x2 matrix of reals")]
        ) from None

    initial_raw = raw.get("initial", "stationary")
    initial: tuple[float, float] | None
    if initial_raw == "stationary" or initial_raw is None:
        initial = None
    else:
        try:
            initial = (float(initial_raw[0]), float(initial_raw[1]))
            if len(initial_raw) != 2:
                raise ValueError
        except (TypeError, ValueError, IndexError):
            violations.append((BAD_INITIAL, f"initial {initial_raw!r} not understood"))
            initial = None

    emissions_raw = raw.get("emissions")
    if not isinstance(emissions_raw, Mapping):
        violations.append((BAD_EMISSION, "missing emissions section"))
        raise ModelValidationError(violations)
    emit_a, emit_b = _parse_emissions(emissions_raw, violations)
    if violations:
        # Still run the full structural check so the error lists everything.
        try:
            TwoStateHmm(transitions, emit_a, emit_b, initial)
        except ModelValidationError as exc:
            violations.extend(exc.violations)
        raise ModelValidationError(violations)
    return TwoStateHmm(transitions, emit_a, emit_b, initial)


def model_to_dict(model: TwoStateHmm) -> dict:
    """Model document for the validated model (validate_model round-trips)."""
    if isinstance(model.emit_a, CategoricalEmission):
        emissions = {
            "type": "categorical",
            "alphabet": list(model.emit_a.alphabet),
            "probs_a": list(model.emit_a.probs),
            "probs_b": list(model.emit_b.probs),
        }
    else:
        emissions = {
            "type": "gaussian",
            "a": {"mean": model.emit_a.mean, "variance": model.emit_a.variance},
            "b": {"mean": model.emit_b.mean, "variance": model.emit_b.variance},
        }
    return {
        "transitions": [list(row) for row in model.transitions],
        "initial": "stationary" if model.initial is None else list(model.initial),
        "emissions": emissions,
    }


def load_model(path) -> TwoStateHmm:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_model(json.load(fh))


def read_observations(path, model: TwoStateHmm) -> list:
    """One token per line: symbols for categorical, decimal reals for Gaussian."""
    categorical = isinstance(model.emit_a, CategoricalEmission)
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            token = line.strip()
            if not token:
                continue
            out.append(token if categorical else float(token))
    return out


def write_observations(path, observations: Iterable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x in observations:
            fh.write(f"{x!r}\n" if isinstance(x, float) else f"{x}\n")


# ---------------------------------------------------------------------------
# Convenience constructors (used heavily by tests and the simulation lab).
# ---------------------------------------------------------------------------

def categorical_model(transitions, probs_a: Sequence[float], probs_b: Sequence[float],
                      alphabet: Sequence[str] | None = None,
                      initial=None) -> TwoStateHmm:
    if alphabet is None:
        alphabet = tuple(str(i) for i in range(len(probs_a)))
    trans = tuple(tuple(float(p) for p in row) for row in transitions)
    init = None if initial is None else (float(initial[0]), float(initial[1]))
    return TwoStateHmm(
        trans,
        CategoricalEmission(tuple(str(s) for s in alphabet), tuple(float(p) for p in probs_a)),
        CategoricalEmission(tuple(str(s) for s in alphabet), tuple(float(p) for p in probs_b)),
        init,
    )


def gaussian_model(transitions, mean_a: float, var_a: float,
                   mean_b: float, var_b: float, initial=None) -> TwoStateHmm:
    trans = tuple(tuple(float(p) for p in row) for row in transitions)
    init = None if initial is None else (float(initial[0]), float(initial[1]))
    return TwoStateHmm(
        trans, GaussianEmission(mean_a, var_a), GaussianEmission(mean_b, var_b), init
    )


def random_model(rng: SplitMix64, case: str | None = None,
                 family: str | None = None) -> TwoStateHmm:
    """Random valid model, optionally pinned to a case label or emission family.

    Transition entries are kept inside [0.05, 0.95] so that node statistics
    stay informative; case3 models get exactly equal stay columns.
    """
    if family is None:
        family = "categorical" if rng.random() < 0.5 else "gaussian"
    if case is None:
        case = CaseLabel.ALL[rng.next_uint64() % 3]

    def stay() -> float:
        return 0.05 + 0.9 * rng.random()

    p_aa, p_ba = stay(), stay()
    if case == CaseLabel.CASE1:
        if p_aa <= p_ba:
            p_aa, p_ba = p_ba, p_aa
        if p_aa == p_ba:  # astronomically unlikely; force strictness
            p_aa = min(0.99, p_aa + 0.01)
    elif case == CaseLabel.CASE2:
        if p_aa >= p_ba:
            p_aa, p_ba = p_ba, p_aa
        if p_aa == p_ba:
            p_ba = min(0.99, p_ba + 0.01)
    else:
        p_ba = p_aa
    transitions = ((p_aa, 1.0 - p_aa), (p_ba, 1.0 - p_ba))

    if family == "categorical":
        size = 2 + rng.next_uint64() % 4
        while True:
            raw_a = [0.05 + rng.random() for _ in range(size)]
            raw_b = [0.05 + rng.random() for _ in range(size)]
            probs_a = tuple(p / sum(raw_a) for p in raw_a)
            probs_b = tuple(p / sum(raw_b) for p in raw_b)
            if probs_a != probs_b:
                return categorical_model(transitions, probs_a, probs_b)
    while True:
        mean_a = -2.0 + 4.0 * rng.random()
        mean_b = -2.0 + 4.0 * rng.random()
        var_a = 0.3 + 2.0 * rng.random()
        var_b = 0.3 + 2.0 * rng.random()
        if (mean_a, var_a) != (mean_b, var_b):
            return gaussian_model(transitions, mean_a, var_a, mean_b, var_b)
