"""Energy estimators and the RMSE benchmark harness."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import RNG_ALGORITHM, check_budget, check_delta, check_hamiltonian, check_indicator, check_rng
from .exceptions import DomainError, StructuralError, UnsupportedEstimationError
from .guarantees import AllocationCounts, epsilon_guarantee
from .hamiltonian import WeightedHamiltonian, norms
from .pauli import PauliString, qwc_mask
from .schemes import SchemeConfig, generate_settings, scheme_is_deterministic, truncated_pipeline
from .simulator import QuantumState, Sampler, energy, ground_state

logger = logging.getLogger(__name__)


@dataclass
class EstimateReport:
    energy_estimate: float
    per_term_estimates: np.ndarray
    per_term_counts: AllocationCounts
    zeroed_terms: list
    identity_offset_applied: float


def _records_to_arrays(records, n):
    if not records:
        return np.zeros((0, n), dtype=np.uint8), np.zeros((0, n), dtype=np.int8)
    codes, outs = [], []
    for r in records:
        if r.setting.n != n or len(r.outcome) != n:
            raise StructuralError(f"record {r.setting} does not match the {n}-qubit Hamiltonian")
        codes.append(r.setting.codes)
        outs.append(r.outcome)
    return np.array(codes, dtype=np.uint8), np.array(outs, dtype=np.int8)


def term_means(h: WeightedHamiltonian, setting_codes, outcomes):
    """Grouped empirical means of every term.

    ``outcomes`` has shape ``(..., R, n)``; leading axes are independent
    repetitions over the same ``R`` settings. Returns ``(means, counts)`` with
    means of shape ``(..., M)`` (zero where a term has no compatible record).
    """
    setting_codes = np.asarray(setting_codes, dtype=np.uint8)
    outcomes = np.asarray(outcomes)
    hit = qwc_mask(h.codes[:, None, :], setting_codes[None, :, :])  # (M, R)
    counts = hit.sum(axis=1)
    means = np.zeros(outcomes.shape[:-2] + (h.n_terms,))
    for i, obs in enumerate(h.codes):
        if counts[i] == 0:
            continue
        supp = np.flatnonzero(obs)
        sel = outcomes[..., hit[i], :][..., supp]
        means[..., i] = np.prod(sel, axis=-1, dtype=np.int64).mean(axis=-1)
    return means, counts


def grouped_mean_estimate(h: WeightedHamiltonian, records, indicator_kind="qwc", keep=None) -> EstimateReport:
    """Grouped empirical mean energy estimate with shot reuse.

    Every record contributes to each term it is QWC-compatible with. Terms
    without a compatible record, or excluded by ``keep``, are set to zero.
    """
    check_indicator(indicator_kind)
    if indicator_kind != "qwc":
        raise UnsupportedEstimationError(
            "outcome products only estimate observables that commute qubit-wise with the setting; use indicator 'qwc'"
        )
    codes, outs = _records_to_arrays(list(records), h.n_qubits)
    return _report_from_arrays(h, codes, outs, keep)


def _report_from_arrays(h, codes, outs, keep=None):
    means, counts = term_means(h, codes, outs)
    zeroed = counts == 0
    if keep is not None:
        zeroed |= ~np.asarray(keep, dtype=bool)
        means = np.where(zeroed, 0.0, means)
    alloc = AllocationCounts(h, "qwc", counts)
    return EstimateReport(
        energy_estimate=float(h.identity_offset + h.coeffs @ means),
        per_term_estimates=means,
        per_term_counts=alloc,
        zeroed_terms=np.flatnonzero(zeroed).tolist(),
        identity_offset_applied=h.identity_offset,
    )


def grouped_mean_energies(h, settings, outcomes, keep=None) -> np.ndarray:
    """Vectorised energies for a batch of outcome arrays of shape ``(T, R, n)``."""
    codes = np.array([s.codes for s in settings], dtype=np.uint8)
    means, _ = term_means(h, codes, outcomes)
    coeffs = h.coeffs if keep is None else np.where(keep, h.coeffs, 0.0)
    return h.identity_offset + means @ coeffs


def _readout_setting(obs: PauliString) -> PauliString:
    # idle qubits are read out in Z; they do not enter the product
    full = (1 << obs.n) - 1
    return PauliString(obs.n, obs.x, obs.z | (full & ~(obs.x | obs.z)))


def single_shot_rounds(h: WeightedHamiltonian, state: QuantumState, n_rounds, rng, sampler=None) -> np.ndarray:
    """Per-round values ``sign(h_k) * o_k * ||h||_1`` with ``k ~ |h_k| / ||h||_1`` (no offset)."""
    rng = check_rng(rng)
    sampler = sampler or Sampler(state)
    l1 = norms(h)[0]
    p = h.abs_coeffs / l1
    ks = rng.choice(h.n_terms, size=n_rounds, p=p)
    vals = np.empty(n_rounds)
    for k in np.unique(ks):
        pos = np.flatnonzero(ks == k)
        obs = h.observables[k]
        outs = sampler.sample([_readout_setting(obs)], rng, repeats=len(pos))[:, 0, :]
        supp = np.flatnonzero(h.codes[k])
        vals[pos] = np.sign(h.coeffs[k]) * np.prod(outs[:, supp], axis=-1) * l1
    return vals


def single_shot_estimate(h: WeightedHamiltonian, state: QuantumState, budget, rng=None) -> float:
    """Importance-sampled single-term estimator averaged over ``budget`` rounds."""
    budget = check_budget(budget)
    return float(h.identity_offset + single_shot_rounds(h, state, budget, rng).mean())


def rmse(estimates, true_energy, n_boot=10_000, seed=0):
    """Root-mean-square error and its bootstrap standard error."""
    e = np.asarray(estimates, dtype=float)
    if e.size == 0:
        raise DomainError("rmse needs at least one estimate")
    sq = (e - true_energy) ** 2
    value = float(np.sqrt(sq.mean()))
    if e.size == 1:
        return value, 0.0
    rng = check_rng(seed)
    idx = rng.integers(0, e.size, size=(n_boot, e.size))
    boot = np.sqrt(sq[idx].mean(axis=1))
    return value, float(boot.std(ddof=1))


class GroupedMeanEstimator(BaseEstimator):
    """scikit-learn style wrapper: ``fit(records)`` then read ``energy_``.

    ``keep`` optionally masks terms (e.g. after truncation); masked terms are
    estimated as zero.
    """

    def __init__(self, hamiltonian=None, indicator="qwc", keep=None):
        self.hamiltonian = hamiltonian
        self.indicator = indicator
        self.keep = keep

    def fit(self, records, y=None):
        h = check_hamiltonian(self.hamiltonian)
        self.report_ = grouped_mean_estimate(h, records, self.indicator, self.keep)
        self.energy_ = self.report_.energy_estimate
        return self

    def predict(self, records):
        h = check_hamiltonian(self.hamiltonian)
        return grouped_mean_estimate(h, records, self.indicator, self.keep).energy_estimate


@dataclass
class BenchmarkConfig:
    scheme: str = "shadowgrouping"  # or random, bruteforce, singleshot
    weight: str = "bernstein"
    indicator: str = "qwc"
    alpha: float | None = None
    epsilon: float | None = None
    truncate: bool = False
    delta: float = 0.02


@dataclass
class BenchmarkReport:
    hamiltonian_hash: str
    scheme: str
    budget: int
    n_runs: int
    seed: int
    rmse: float
    rmse_err: float
    estimates: list
    guarantee: dict | None
    runtime_s: float
    true_energy: float
    config: dict = field(default_factory=dict)
    rng: str = RNG_ALGORITHM
    settings_per_run: str = "regenerated"

    def to_dict(self):
        return asdict(self)


def _threads():
    try:
        return max(1, int(os.environ.get("SHADOWALLOC_THREADS", "1")))
    except ValueError:
        return 1


def run_benchmark(h: WeightedHamiltonian, scheme_config=None, budget=1000, n_runs=100, seed=0, true_state=None):
    """Estimate the ground-state energy ``n_runs`` times and report the RMSE.

    Per-run randomness comes from ``SeedSequence(seed).spawn(n_runs)``.
    Deterministic schemes produce the same list every run, so it is generated
    once and reused.
    """
    start = time.perf_counter()
    cfg = scheme_config or BenchmarkConfig()
    if isinstance(cfg, dict):
        cfg = BenchmarkConfig(**cfg)
    budget = check_budget(budget)
    n_runs = check_budget(n_runs)
    check_delta(cfg.delta)
    if cfg.scheme != "singleshot" and cfg.indicator != "qwc":
        raise UnsupportedEstimationError("benchmarks estimate with QWC outcome products; use indicator 'qwc'")
    if true_state is None:
        true_energy, state = ground_state(h)
    else:
        state = true_state
        true_energy = energy(state, h)
    sampler = Sampler(state)
    children = np.random.SeedSequence(seed).spawn(n_runs)

    def make_settings(child):
        scfg = SchemeConfig(
            weight=cfg.weight,
            indicator=cfg.indicator,
            alpha=cfg.alpha,
            epsilon=cfg.epsilon,
            seed=int(child.generate_state(1, dtype=np.uint64)[0]),
        )
        if cfg.truncate:
            settings, report = truncated_pipeline(h, budget, cfg.delta, scfg)
            keep = np.ones(h.n_terms, dtype=bool)
            keep[report.truncated_indices] = False
            return settings, keep, report
        settings = generate_settings(cfg.scheme, h, budget, scfg)
        counts = AllocationCounts(h, "qwc")
        for s in settings:
            counts.append(s)
        return settings, None, epsilon_guarantee(h, counts, cfg.delta)

    if cfg.truncate and cfg.scheme != "shadowgrouping":
        raise DomainError("truncation is only defined for the shadowgrouping scheme")

    guarantee = None
    cached = None
    if cfg.scheme != "singleshot" and scheme_is_deterministic(cfg.scheme):
        cached = make_settings(children[0].spawn(1)[0])
        guarantee = cached[2].to_dict()

    def one_run(child):
        scheme_child, sample_child = child.spawn(2)
        rng = check_rng(sample_child)
        if cfg.scheme == "singleshot":
            return float(h.identity_offset + single_shot_rounds(h, state, budget, rng, sampler).mean()), None
        settings, keep, report = cached if cached is not None else make_settings(scheme_child)
        outs = sampler.sample(settings, rng)
        return float(grouped_mean_energies(h, settings, outs, keep)[0]), report

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one_run, children))
    else:
        results = [one_run(c) for c in children]
    estimates = [r[0] for r in results]
    if guarantee is None and results[0][1] is not None:
        guarantee = results[0][1].to_dict()
    value, err = rmse(estimates, true_energy, seed=seed)
    return BenchmarkReport(
        hamiltonian_hash=h.content_hash(),
        scheme=cfg.scheme + ("-truncated" if cfg.truncate else ""),
        budget=budget,
        n_runs=n_runs,
        seed=seed,
        rmse=value,
        rmse_err=err,
        estimates=estimates,
        guarantee=guarantee,
        runtime_s=time.perf_counter() - start,
        true_energy=true_energy,
        config=asdict(cfg),
        settings_per_run="reused (deterministic scheme)" if cached is not None else "regenerated",
    )
