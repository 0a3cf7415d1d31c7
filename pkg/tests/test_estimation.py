import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hamiltonians
from shadowalloc import (
    DomainError,
    GroupedMeanEstimator,
    MeasurementRecord,
    PauliString,
    QuantumState,
    SchemeConfig,
    StructuralError,
    UnsupportedEstimationError,
    WeightedHamiltonian,
    generate_settings,
    grouped_mean_estimate,
    norms,
    rmse,
    run_benchmark,
    single_shot_estimate,
)
from shadowalloc.estimation import BenchmarkConfig, grouped_mean_energies, single_shot_rounds
from shadowalloc.simulator import Sampler

P = PauliString.from_label


def rec(w, *outs):
    return MeasurementRecord(P(w), tuple(outs))


def test_grouped_mean_hand_example():
    h = WeightedHamiltonian.from_terms([(0.5, "ZI"), (0.25, "IZ"), (1.0, "ZZ")])
    r = grouped_mean_estimate(h, [rec("ZZ", 1, -1), rec("ZZ", 1, 1)])
    est = {str(p): v for p, v in zip(h.observables, r.per_term_estimates)}
    assert est == {"ZI": 1.0, "IZ": 0.0, "ZZ": 0.0}
    assert r.energy_estimate == 0.5
    assert r.per_term_counts.counts.tolist() == [2, 2, 2]
    assert r.zeroed_terms == []


def test_grouped_mean_empty_and_incompatible():
    h = WeightedHamiltonian.from_terms([(1.0, "ZZ")], identity_offset=0.3)
    r = grouped_mean_estimate(h, [])
    assert r.energy_estimate == 0.3 and r.zeroed_terms == [0]
    r = grouped_mean_estimate(WeightedHamiltonian.from_terms([(1.0, "ZZ")]), [rec("XX", 1, 1)])
    assert r.energy_estimate == 0.0 and r.zeroed_terms == [0]


def test_grouped_mean_errors():
    h = WeightedHamiltonian.from_terms([(1.0, "ZZ")])
    with pytest.raises(UnsupportedEstimationError):
        grouped_mean_estimate(h, [rec("ZZ", 1, 1)], "general")
    with pytest.raises(StructuralError):
        grouped_mean_estimate(h, [rec("ZZZ", 1, 1, 1)])


@settings(max_examples=30, deadline=None)
@given(hamiltonians(n_max=3), st.integers(1, 20), st.integers(0, 1000))
def test_report_invariants_and_batch_path(h, budget, seed):
    rng = np.random.default_rng(seed)
    state = QuantumState.random(h.n_qubits, rng)
    s = generate_settings("random", h, budget, SchemeConfig(seed=seed))
    outs = Sampler(state).sample(s, rng, repeats=2)
    records = [MeasurementRecord(p, tuple(o)) for p, o in zip(s, outs[0])]
    r = grouped_mean_estimate(h, records)
    assert r.energy_estimate == pytest.approx(h.identity_offset + h.coeffs @ r.per_term_estimates, abs=1e-12)
    assert r.zeroed_terms == np.flatnonzero(r.per_term_counts.counts == 0).tolist()
    assert np.all(r.per_term_estimates[r.zeroed_terms] == 0)
    assert np.all(np.abs(r.per_term_estimates) <= 1)
    batch = grouped_mean_energies(h, s, outs)
    assert batch[0] == pytest.approx(r.energy_estimate, abs=1e-12)


def test_keep_mask_zeroes_terms():
    h = WeightedHamiltonian.from_terms([(0.5, "ZI"), (0.25, "IZ")])
    r = grouped_mean_estimate(h, [rec("ZZ", 1, 1)], keep=[True, False])
    assert r.energy_estimate == 0.5 and r.zeroed_terms == [1]


def test_sklearn_estimator_wrapper():
    h = WeightedHamiltonian.from_terms([(0.5, "ZI"), (0.25, "IZ"), (1.0, "ZZ")])
    records = [rec("ZZ", 1, -1), rec("ZZ", 1, 1)]
    est = GroupedMeanEstimator(hamiltonian=h).fit(records)
    assert est.energy_ == 0.5 == est.predict(records)
    assert est.get_params()["indicator"] == "qwc"


def test_single_shot_examples():
    h = WeightedHamiltonian.from_terms([(1.0, "Z")])
    assert single_shot_estimate(h, QuantumState.zero(1), 100, 0) == 1.0
    h = WeightedHamiltonian.from_terms([(1.0, "X")])
    vals = single_shot_rounds(h, QuantumState.zero(1), 100_000, 1)
    assert abs(vals.mean()) <= 5 / np.sqrt(100_000)


def test_single_shot_magnitude_is_l1(h2):
    vals = single_shot_rounds(h2, QuantumState.random(4, 0), 500, 3)
    assert np.allclose(np.abs(vals), norms(h2)[0], rtol=0, atol=0)


def test_rmse_examples():
    assert rmse([2.0, 2.0, 2.0], 2.0)[0] == 0.0
    assert rmse([3.0, 1.0], 2.0)[0] == 1.0
    assert rmse([1.5], 2.0) == (0.5, 0.0)
    with pytest.raises(DomainError):
        rmse([], 0.0)
    v, err = rmse(np.random.default_rng(0).normal(size=400), 0.0)
    assert 0.9 < v < 1.1 and 0 < err < 0.1


def test_benchmark_single_run_and_determinism(h2):
    r = run_benchmark(h2, {"scheme": "shadowgrouping"}, budget=100, n_runs=1, seed=4)
    assert len(r.estimates) == 1
    assert r.rmse == abs(r.estimates[0] - r.true_energy)
    cfg = BenchmarkConfig(scheme="random")
    a = run_benchmark(h2, cfg, budget=50, n_runs=5, seed=9)
    b = run_benchmark(h2, cfg, budget=50, n_runs=5, seed=9)
    assert a.estimates == b.estimates and a.rmse == b.rmse
    assert a.settings_per_run == "regenerated"
    assert set(a.to_dict()) >= {
        "hamiltonian_hash", "scheme", "budget", "n_runs", "seed", "rmse", "rmse_err", "estimates", "guarantee", "runtime_s"
    }


def test_benchmark_parallel_matches_serial(h2, monkeypatch):
    cfg = BenchmarkConfig(scheme="random")
    serial = run_benchmark(h2, cfg, budget=40, n_runs=6, seed=2)
    monkeypatch.setenv("SHADOWALLOC_THREADS", "3")
    parallel = run_benchmark(h2, cfg, budget=40, n_runs=6, seed=2)
    assert serial.estimates == parallel.estimates


def test_benchmark_rejects_general_indicator(h2):
    with pytest.raises(UnsupportedEstimationError):
        run_benchmark(h2, {"indicator": "general"}, budget=10, n_runs=1)
    with pytest.raises(DomainError):
        run_benchmark(h2, {"scheme": "random", "truncate": True}, budget=10, n_runs=1)


def test_truncated_benchmark_reports_guarantee(h2):
    r = run_benchmark(h2, BenchmarkConfig(truncate=True), budget=300, n_runs=3, seed=0)
    assert r.scheme == "shadowgrouping-truncated"
    assert r.guarantee["epsilon_total"] <= norms(h2)[0]


def test_shadow_grouping_beats_random_on_h2(h2):
    sg = run_benchmark(h2, {"scheme": "shadowgrouping"}, budget=1000, n_runs=40, seed=1)
    rp = run_benchmark(h2, {"scheme": "random"}, budget=1000, n_runs=40, seed=1)
    assert sg.rmse < rp.rmse
