"""Tail bounds, accuracy guarantees and per-term weight functions.

Everything here is a pure function of a Hamiltonian and a vector of
compatible-measurement counts ``N_i``. The central quantities are

* ``h'_i = |h_i| / sqrt(N_i)`` and ``h''_i = |h_i| / N_i``;
* ``alpha_delta = 4 sqrt(ln(1/delta)) + 2``, so that with probability at least
  ``1 - delta`` the grouped mean estimate is within ``alpha_delta * ||h'||_1``
  of the true energy.

Logarithms are natural throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_delta, check_indicator
from .exceptions import BoundUndefinedError, ConfigurationError, ContractViolation, DomainError
from .hamiltonian import WeightedHamiltonian, norms
from .pauli import PauliString, compatibility_mask, format_pauli


class AllocationCounts:
    """Per-term compatible-setting counts ``N_i`` for a growing settings list."""

    def __init__(self, hamiltonian: WeightedHamiltonian, indicator_kind: str = "qwc", counts=None):
        self.indicator_kind = check_indicator(indicator_kind)
        self._codes = hamiltonian.codes
        self._n = hamiltonian.n_qubits
        if counts is None:
            self.counts = np.zeros(hamiltonian.n_terms, dtype=np.int64)
        else:
            self.counts = np.array(counts, dtype=np.int64)
            if self.counts.shape != (hamiltonian.n_terms,):
                raise ContractViolation("one count per Hamiltonian term required")

    def compatible(self, setting: PauliString) -> np.ndarray:
        if setting.n != self._n:
            raise ContractViolation(f"setting {setting} has {setting.n} qubits, Hamiltonian has {self._n}")
        if not setting.is_full_support():
            raise ContractViolation(f"setting {format_pauli(setting)} is not full support")
        return compatibility_mask(self._codes, setting.to_array(), self.indicator_kind)

    def append(self, setting: PauliString) -> np.ndarray:
        """Count one more setting in place; returns the mask of terms it covers."""
        hit = self.compatible(setting)
        self.counts += hit
        return hit

    def copy(self) -> "AllocationCounts":
        new = object.__new__(AllocationCounts)
        new.indicator_kind = self.indicator_kind
        new._codes = self._codes
        new._n = self._n
        new.counts = self.counts.copy()
        return new

    def __array__(self, dtype=None, copy=None):
        return self.counts if dtype is None else self.counts.astype(dtype)

    def __len__(self):
        return len(self.counts)

    def __repr__(self):
        return f"AllocationCounts({self.counts.tolist()}, indicator_kind={self.indicator_kind!r})"


def count_compatible(h: WeightedHamiltonian, settings, kind: str = "qwc") -> AllocationCounts:
    counts = AllocationCounts(h, kind)
    for s in settings:
        counts.append(s)
    return counts


def _as_counts(counts) -> np.ndarray:
    return np.asarray(counts.counts if isinstance(counts, AllocationCounts) else counts, dtype=np.int64)


def alpha_delta(delta: float) -> float:
    delta = check_delta(delta)
    return 4.0 * math.sqrt(math.log(1.0 / delta)) + 2.0


def truncation_threshold(delta: float) -> int:
    """Smallest integer count at which a term is worth measuring, ceil(alpha_delta^2)."""
    return math.ceil(alpha_delta(delta) ** 2)


def _h_prime_norms(h: WeightedHamiltonian, N: np.ndarray):
    a = h.abs_coeffs
    return float(np.sum(a / np.sqrt(N))), float(np.sum(a / N))


def bound_window(h: WeightedHamiltonian, counts):
    """Interval ``[2||h'||_1, 2||h'||_1 (1 + 2||h'||_1/||h''||_1)]`` on which the tail bound is informative."""
    N = _as_counts(counts)
    if np.any(N < 1):
        raise BoundUndefinedError(
            f"terms {np.flatnonzero(N < 1).tolist()} have no compatible setting; truncate them first"
        )
    hp, hpp = _h_prime_norms(h, N)
    return 2 * hp, 2 * hp * (1 + 2 * hp / hpp)


def failure_probability_bound(h: WeightedHamiltonian, counts, epsilon: float) -> float:
    """Upper bound on P[|E_hat - E| >= epsilon] for any grouped empirical mean estimator.

    Returns 1 below the window's lower edge, where the bound carries no information.
    """
    shift, cap = bound_window(h, counts)
    if not 0 <= epsilon <= cap:
        raise DomainError(f"epsilon={epsilon} outside the validity window [0, {cap}]")
    if epsilon < shift:
        return 1.0
    return min(1.0, math.exp(-0.25 * (epsilon / shift - 1.0) ** 2))


@dataclass
class GuaranteeReport:
    epsilon_stat: float
    epsilon_sys: float
    epsilon_total: float
    delta: float
    truncated_indices: list
    counts: list
    # 6 ln(1/delta) ||h'||_1 over the measured terms; at least epsilon_stat once delta <= 1/e
    epsilon_stat_loose: float = field(default=0.0)

    def to_dict(self) -> dict:
        return {
            "epsilon_stat": self.epsilon_stat,
            "epsilon_sys": self.epsilon_sys,
            "epsilon_total": self.epsilon_total,
            "delta": self.delta,
            "truncated_indices": list(self.truncated_indices),
            "counts": list(self.counts),
            "epsilon_stat_loose": self.epsilon_stat_loose,
        }


def epsilon_guarantee(h: WeightedHamiltonian, counts, delta: float, keep=None) -> GuaranteeReport:
    """Accuracy achieved with confidence ``1 - delta`` by the given counts.

    Terms with ``N_i = 0`` (or excluded by ``keep``) are estimated as zero and
    contribute their full ``|h_i|`` as systematic error.
    """
    delta = check_delta(delta)
    N = _as_counts(counts)
    a = h.abs_coeffs
    measured = N >= 1
    if keep is not None:
        measured &= np.asarray(keep, dtype=bool)
    hp = float(np.sum(a[measured] / np.sqrt(N[measured])))
    eps_stat = alpha_delta(delta) * hp
    eps_sys = float(np.sum(a[~measured]))
    return GuaranteeReport(
        epsilon_stat=eps_stat,
        epsilon_sys=eps_sys,
        epsilon_total=eps_stat + eps_sys,
        delta=delta,
        truncated_indices=np.flatnonzero(~measured).tolist(),
        counts=N.tolist(),
        epsilon_stat_loose=6.0 * math.log(1.0 / delta) * hp,
    )


def truncation_mask(h: WeightedHamiltonian, counts, delta: float) -> np.ndarray:
    """True for terms worth keeping: ``N_i >= ceil(alpha_delta^2)``."""
    N = _as_counts(counts)
    if len(N) != h.n_terms:
        raise ContractViolation("one count per Hamiltonian term required")
    return N >= truncation_threshold(delta)


def truncated_guarantee(h: WeightedHamiltonian, counts, delta: float) -> GuaranteeReport:
    return epsilon_guarantee(h, counts, delta, keep=truncation_mask(h, counts, delta))


def default_alpha(h: WeightedHamiltonian) -> float:
    """``max(2, (h_max/h_min)^2)``; always strictly above ``h_max/h_min``."""
    _, _, hmin, hmax = norms(h)
    return max(2.0, (hmax / hmin) ** 2)


def shadowgrouping_weights(h: WeightedHamiltonian, counts, alpha: float) -> np.ndarray:
    """Decrease of ``|h_i|/sqrt(N_i)`` from one more compatible setting; ``alpha |h_i|`` if unmeasured."""
    _, _, hmin, hmax = norms(h)
    if not alpha > hmax / hmin:
        raise ConfigurationError(
            f"alpha={alpha} must exceed h_max/h_min={hmax / hmin} so unmeasured terms come first"
        )
    N = _as_counts(counts).astype(float)
    a = h.abs_coeffs
    w = alpha * a
    seen = N >= 1
    Ns = N[seen]
    w[seen] = a[seen] * (np.sqrt(Ns + 1) - np.sqrt(Ns)) / np.sqrt(Ns * (Ns + 1))
    return w


def derandomization_weights(h: WeightedHamiltonian, counts, epsilon: float) -> np.ndarray:
    """Per-term drop ``c^N (1 - c)`` of the Hoeffding union bound, ``c = exp(-eps^2 / (2 h_i^2))``."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    N = _as_counts(counts)
    c = np.exp(-(epsilon**2) / (2.0 * h.coeffs**2))
    return c**N * (1.0 - c)


def worst_case_budget(h: WeightedHamiltonian, epsilon_target: float, delta: float):
    """Total budget range between the all-commuting and the all-incompatible extremes.

    The incompatible end assumes the budget is split evenly over the ``M`` terms.
    """
    if not epsilon_target > 0:
        raise DomainError("epsilon_target must be positive")
    a2 = alpha_delta(delta) ** 2
    l1 = norms(h)[0]
    base = a2 * l1**2 / epsilon_target**2
    return math.ceil(base), math.ceil(base * h.n_terms)


def single_shot_budget(h, epsilon: float, delta: float) -> int:
    """Rounds needed by the importance-sampled single-term estimator (Hoeffding)."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    delta = check_delta(delta)
    l1 = h if isinstance(h, (int, float)) else norms(h)[0]
    return math.ceil(2.0 * l1**2 / epsilon**2 * math.log(2.0 / delta))
