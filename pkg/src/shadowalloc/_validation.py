"""Input validation helpers shared by the estimators and the CLI."""
import numbers

import numpy as np

from .exceptions import DomainError

INDICATORS = ("qwc", "general")
WEIGHTS = ("bernstein", "derandomization")
RNG_ALGORITHM = "numpy.random.PCG64 seeded via SeedSequence"


def check_delta(delta):
    delta = float(delta)
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta={delta} must lie in the open interval (0, 1/2)")
    return delta


def check_budget(budget):
    if isinstance(budget, bool) or not isinstance(budget, numbers.Integral) or budget < 1:
        raise DomainError(f"budget must be a positive integer, got {budget!r}")
    return int(budget)


def check_indicator(kind):
    if kind not in INDICATORS:
        raise DomainError(f"indicator must be one of {INDICATORS}, got {kind!r}")
    return kind


def check_weight(kind):
    if kind not in WEIGHTS:
        raise DomainError(f"weight must be one of {WEIGHTS}, got {kind!r}")
    return kind


def check_rng(seed):
    """Turn None, an int or a Generator into a PCG64-backed Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if seed is None or isinstance(seed, numbers.Integral):
        return np.random.Generator(np.random.PCG64(seed))
    raise DomainError(f"cannot build a random generator from {seed!r}")


def check_hamiltonian(h):
    from .hamiltonian import WeightedHamiltonian

    if not isinstance(h, WeightedHamiltonian):
        raise TypeError(f"expected a WeightedHamiltonian, got {type(h).__name__}")
    return h
