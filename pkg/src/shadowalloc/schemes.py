"""Measurement-setting generators.

Three schemes share one mutable :class:`SchemeState` (Hamiltonian, emitted
settings, running counts, RNG):

* ShadowGrouping: greedy; visits terms by descending weight and copies each
  compatible one into the idle qubits of the setting under construction.
* random Paulis: every qubit basis drawn uniformly from X, Y, Z.
* brute force: scores all 3^n full-support settings and keeps the best one.

The ``ShadowGrouping``/``RandomPauli``/``BruteForce`` classes wrap these in the
scikit-learn estimator protocol (``fit``, ``get_params``, ``set_params``).
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_budget, check_delta, check_hamiltonian, check_indicator, check_rng, check_weight
from .exceptions import ConfigurationError, ResourceCapError
from .guarantees import (
    AllocationCounts,
    GuaranteeReport,
    count_compatible,
    default_alpha,
    derandomization_weights,
    epsilon_guarantee,
    shadowgrouping_weights,
    truncated_guarantee,
    truncation_mask,
)
from .hamiltonian import WeightedHamiltonian
from .pauli import PauliString, compatibility_mask

logger = logging.getLogger(__name__)

SCHEMES = ("shadowgrouping", "random", "bruteforce")
BRUTE_FORCE_MAX_QUBITS = 8


@dataclass
class SchemeConfig:
    weight: str = "bernstein"
    indicator: str = "qwc"
    alpha: float | None = None  # None -> default_alpha(h)
    epsilon: float | None = None  # required for derandomization weights
    seed: int | None = 0
    max_brute_force_qubits: int = BRUTE_FORCE_MAX_QUBITS


@dataclass
class SchemeState:
    hamiltonian: WeightedHamiltonian
    weight_kind: str
    indicator_kind: str
    alpha: float
    epsilon: float | None
    seed: int | None
    max_brute_force_qubits: int = BRUTE_FORCE_MAX_QUBITS
    settings: list = field(default_factory=list)
    counts: AllocationCounts = None
    rng: np.random.Generator = None

    def __post_init__(self):
        check_hamiltonian(self.hamiltonian)
        check_weight(self.weight_kind)
        check_indicator(self.indicator_kind)
        if self.counts is None:
            self.counts = AllocationCounts(self.hamiltonian, self.indicator_kind)
        if self.rng is None:
            self.rng = check_rng(self.seed)
        if self.weight_kind == "derandomization" and self.epsilon is None:
            raise ConfigurationError("derandomization weights need an epsilon")
        # fail early on a bad alpha
        if self.weight_kind == "bernstein":
            shadowgrouping_weights(self.hamiltonian, self.counts, self.alpha)
        # bitmask form of each observable for the greedy scan
        self._masks = [(p.x, p.z) for p in self.hamiltonian.observables]

    @classmethod
    def new(cls, h: WeightedHamiltonian, config: SchemeConfig | None = None) -> "SchemeState":
        config = config or SchemeConfig()
        alpha = default_alpha(h) if config.alpha is None else float(config.alpha)
        return cls(
            hamiltonian=h,
            weight_kind=config.weight,
            indicator_kind=config.indicator,
            alpha=alpha,
            epsilon=config.epsilon,
            seed=config.seed,
            max_brute_force_qubits=config.max_brute_force_qubits,
        )

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    def weights(self) -> np.ndarray:
        if self.weight_kind == "bernstein":
            return shadowgrouping_weights(self.hamiltonian, self.counts, self.alpha)
        return derandomization_weights(self.hamiltonian, self.counts, self.epsilon)

    def append(self, setting: PauliString) -> PauliString:
        self.counts.append(setting)
        self.settings.append(setting)
        return setting


def shadow_grouping_next(state: SchemeState) -> PauliString:
    """Build, record and return the next ShadowGrouping setting."""
    n = state.n_qubits
    full = (1 << n) - 1
    w = state.weights()
    order = np.argsort(-w, kind="stable")  # ties keep canonical term order
    general = state.indicator_kind == "general"
    qx = qz = 0
    for j in order:
        used = qx | qz
        if used == full:
            break
        ox, oz = state._masks[j]
        clash = ((ox & qz) ^ (oz & qx)).bit_count()
        if clash == 0 or (general and clash % 2 == 0):
            idle = ~used
            qx |= ox & idle
            qz |= oz & idle
    # qubits no observable claimed are measured in Z
    qz |= full & ~(qx | qz)
    return state.append(PauliString(n, qx, qz))


def random_pauli_next(state: SchemeState) -> PauliString:
    codes = state.rng.integers(1, 4, size=state.n_qubits)
    return state.append(PauliString.from_codes(codes))


@lru_cache(maxsize=16)
def _all_settings(n: int) -> np.ndarray:
    # lexicographic order over X < Y < Z
    return np.array(list(itertools.product((1, 2, 3), repeat=n)), dtype=np.uint8)


def allocation_objective(abs_coeffs, counts, alpha) -> np.ndarray:
    """``sum_i |h_i| phi(N_i)`` with ``phi(0) = alpha`` and ``phi(k) = 1/sqrt(k)``, over the last axis.

    Addends are sorted before summing so equal multisets give bit-identical totals.
    """
    N = np.asarray(counts, dtype=float)
    phi = np.where(N > 0, 1.0 / np.sqrt(np.maximum(N, 1.0)), alpha)
    return np.sort(phi * abs_coeffs, axis=-1).sum(axis=-1)


def candidate_objectives(state: SchemeState, chunk: int = 2048):
    """Objective after hypothetically appending each of the 3^n settings."""
    n = state.n_qubits
    if n > state.max_brute_force_qubits:
        raise ResourceCapError(
            f"brute force enumerates 3^n settings and is capped at n <= {state.max_brute_force_qubits} qubits; got n = {n}"
        )
    cands = _all_settings(n)
    h = state.hamiltonian
    a = h.abs_coeffs
    base = state.counts.counts
    out = np.empty(len(cands))
    for start in range(0, len(cands), chunk):
        block = cands[start : start + chunk]
        hit = compatibility_mask(h.codes[None, :, :], block[:, None, :], state.indicator_kind)
        out[start : start + chunk] = allocation_objective(a, base[None, :] + hit, state.alpha)
    return cands, out


def setting_index(setting: PauliString) -> int:
    """Position of a full-support setting in the brute-force enumeration order."""
    idx = 0
    for c in setting.codes:
        idx = 3 * idx + (c - 1)
    return idx


def brute_force_next(state: SchemeState, delta: float | None = None) -> PauliString:
    """Exhaustively pick the setting that lowers the allocation objective most.

    ``delta`` is only validated: the objective's ranking does not depend on it.
    Ties go to the lexicographically smallest setting.
    """
    if delta is not None:
        check_delta(delta)
    cands, f = candidate_objectives(state)
    best = int(np.argmin(f))
    return state.append(PauliString.from_codes(cands[best]))


_NEXT = {
    "shadowgrouping": shadow_grouping_next,
    "random": random_pauli_next,
    "bruteforce": brute_force_next,
}


def next_setting(scheme_kind: str, state: SchemeState) -> PauliString:
    try:
        step = _NEXT[scheme_kind]
    except KeyError:
        raise ConfigurationError(f"unknown scheme {scheme_kind!r}; expected one of {SCHEMES}") from None
    return step(state)


def generate_settings(scheme_kind: str, h: WeightedHamiltonian, budget: int, config: SchemeConfig | None = None):
    budget = check_budget(budget)
    state = SchemeState.new(h, config)
    for _ in range(budget):
        next_setting(scheme_kind, state)
    return state.settings


def truncated_pipeline(h: WeightedHamiltonian, budget: int, delta: float, config: SchemeConfig | None = None):
    """ShadowGrouping, truncation, then ShadowGrouping again on the surviving terms.

    Returns ``(settings, report)`` for whichever phase has the smaller truncated
    guarantee, so the result never does worse than the first pass.
    """
    budget = check_budget(budget)
    delta = check_delta(delta)
    config = config or SchemeConfig()
    state1 = SchemeState.new(h, config)
    for _ in range(budget):
        shadow_grouping_next(state1)
    report1 = truncated_guarantee(h, state1.counts, delta)
    keep1 = truncation_mask(h, state1.counts, delta)
    if not keep1.any():
        logger.debug("all %d terms truncated after phase 1", h.n_terms)
        return state1.settings, report1

    sub = h.subset(keep1)
    # alpha is re-derived for the smaller term set unless the caller fixed it
    state2 = SchemeState.new(sub, config)
    for _ in range(budget):
        shadow_grouping_next(state2)
    full_counts = AllocationCounts(h, config.indicator)
    for s in state2.settings:
        full_counts.append(s)
    keep2 = keep1 & truncation_mask(h, full_counts, delta)
    report2 = epsilon_guarantee(h, full_counts, delta, keep=keep2)
    if report2.epsilon_total <= report1.epsilon_total:
        logger.debug("phase 2 improves %.6g -> %.6g", report1.epsilon_total, report2.epsilon_total)
        return state2.settings, report2
    return state1.settings, report1


def _continue_pipeline(h, settings, budget, delta, config):
    """Extend ``settings`` to ``budget`` with ShadowGrouping on the terms they already keep."""
    counts = AllocationCounts(h, config.indicator)
    for s in settings:
        counts.append(s)
    keep = truncation_mask(h, counts, delta)
    if not keep.any():
        return None
    state = SchemeState.new(h.subset(keep), config)
    for s in settings:
        state.append(s)
    for _ in range(budget - len(settings)):
        shadow_grouping_next(state)
    return state.settings, truncated_guarantee(h, count_compatible(h, state.settings, config.indicator), delta)


def guarantee_curve(h: WeightedHamiltonian, checkpoints, delta: float, config: SchemeConfig | None = None):
    """Truncated guarantee of the two-phase pipeline at each budget checkpoint.

    Each checkpoint keeps the better of a fresh pipeline run and the previous
    checkpoint's list continued with ShadowGrouping on its kept terms. The
    continuation only adds counts, so ``epsilon_total`` never increases with
    the budget. Returns a list of ``(budget, GuaranteeReport)``.
    """
    delta = check_delta(delta)
    config = config or SchemeConfig()
    rows, prev = [], None
    for budget in sorted({check_budget(b) for b in checkpoints}):
        settings, report = truncated_pipeline(h, budget, delta, config)
        if prev is not None:
            cont = _continue_pipeline(h, prev, budget, delta, config)
            if cont is not None and cont[1].epsilon_total < report.epsilon_total:
                settings, report = cont
        rows.append((budget, report))
        prev = settings
    return rows


# scikit-learn style wrappers


class _SchemeEstimator(BaseEstimator):
    _scheme = None

    def _config(self):
        raise NotImplementedError

    def fit(self, hamiltonian, y=None):
        """Generate ``budget`` settings for ``hamiltonian``."""
        check_hamiltonian(hamiltonian)
        budget = check_budget(self.budget)
        self.state_ = SchemeState.new(hamiltonian, self._config())
        for _ in range(budget):
            next_setting(self._scheme, self.state_)
        self.hamiltonian_ = hamiltonian
        return self

    def partial_fit(self, hamiltonian, y=None, n_settings=1):
        """Append ``n_settings`` more settings, starting fresh if not fitted yet."""
        if not hasattr(self, "state_") or self.hamiltonian_ != hamiltonian:
            self.state_ = SchemeState.new(check_hamiltonian(hamiltonian), self._config())
            self.hamiltonian_ = hamiltonian
        for _ in range(check_budget(n_settings)):
            next_setting(self._scheme, self.state_)
        return self

    @property
    def settings_(self):
        return self.state_.settings

    @property
    def counts_(self):
        return self.state_.counts.counts

    def guarantee(self, delta=0.02, truncate=True) -> GuaranteeReport:
        if truncate:
            return truncated_guarantee(self.hamiltonian_, self.state_.counts, delta)
        return epsilon_guarantee(self.hamiltonian_, self.state_.counts, delta)


class ShadowGrouping(_SchemeEstimator):
    """Greedy tail-bound-driven setting generator.

    Parameters
    ----------
    budget : int
        Number of settings produced by ``fit``.
    weight : {'bernstein', 'derandomization'}
    indicator : {'qwc', 'general'}
    alpha : float or None
        Weight multiplier for terms without any compatible setting yet.
        Defaults to ``max(2, (h_max/h_min)**2)``.
    epsilon : float or None
        Accuracy parameter of the derandomization weights.
    truncate_delta : float or None
        If set, ``fit`` runs the truncate-and-rerun pipeline at this confidence
        and stores its report in ``guarantee_``; ``kept_mask_`` marks the terms
        the estimator should use.
    """

    _scheme = "shadowgrouping"

    def __init__(self, budget=1000, weight="bernstein", indicator="qwc", alpha=None, epsilon=None, truncate_delta=None):
        self.budget = budget
        self.weight = weight
        self.indicator = indicator
        self.alpha = alpha
        self.epsilon = epsilon
        self.truncate_delta = truncate_delta

    def _config(self):
        return SchemeConfig(weight=self.weight, indicator=self.indicator, alpha=self.alpha, epsilon=self.epsilon)

    def fit(self, hamiltonian, y=None):
        if self.truncate_delta is None:
            super().fit(hamiltonian)
            self.kept_mask_ = np.ones(hamiltonian.n_terms, dtype=bool)
            return self
        settings, report = truncated_pipeline(hamiltonian, self.budget, self.truncate_delta, self._config())
        self.hamiltonian_ = hamiltonian
        self.state_ = SchemeState.new(hamiltonian, self._config())
        for s in settings:
            self.state_.append(s)
        self.guarantee_ = report
        self.kept_mask_ = np.ones(hamiltonian.n_terms, dtype=bool)
        self.kept_mask_[report.truncated_indices] = False
        return self


class RandomPauli(_SchemeEstimator):
    """Uniformly random single-qubit Pauli bases (classical shadows)."""

    _scheme = "random"

    def __init__(self, budget=1000, indicator="qwc", random_state=None):
        self.budget = budget
        self.indicator = indicator
        self.random_state = random_state

    def _config(self):
        return SchemeConfig(indicator=self.indicator, seed=self.random_state)


class BruteForce(_SchemeEstimator):
    """Sequential exhaustive search over all 3^n settings (small n only)."""

    _scheme = "bruteforce"

    def __init__(self, budget=1000, indicator="qwc", alpha=None, max_qubits=BRUTE_FORCE_MAX_QUBITS):
        self.budget = budget
        self.indicator = indicator
        self.alpha = alpha
        self.max_qubits = max_qubits

    def _config(self):
        return SchemeConfig(indicator=self.indicator, alpha=self.alpha, max_brute_force_qubits=self.max_qubits)


def scheme_is_deterministic(scheme_kind: str) -> bool:
    return scheme_kind in ("shadowgrouping", "bruteforce")


def format_settings(settings, header: dict | None = None) -> str:
    """Settings file text: ``# key=value`` header lines, then one Pauli word per line."""
    lines = [f"# {k}={v}" for k, v in (header or {}).items()]
    lines += [str(s) for s in settings]
    return "\n".join(lines) + "\n"


def parse_settings(text: str):
    """Inverse of :func:`format_settings`; returns ``(settings, header)``."""
    from .exceptions import FormatError

    header, settings, n = {}, [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        try:
            s = PauliString.from_label(line)
        except FormatError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        if n is not None and s.n != n:
            raise FormatError(f"line {lineno}: setting has {s.n} qubits, earlier lines have {n}")
        if not s.is_full_support():
            raise FormatError(f"line {lineno}: setting {line} is not full support")
        n = s.n
        settings.append(s)
    return settings, header
