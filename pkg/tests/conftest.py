"""Shared fixtures and independent oracles (dense Kronecker-product matrices)."""
import sys
from functools import reduce
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from shadowalloc import PauliString, WeightedHamiltonian, read_hamiltonian

DATA = Path(__file__).parent / "data"
FIXTURES = ["h2_sto3g_jw.txt", "tfim_6.txt", "heisenberg_4.txt", "random_3.txt"]

_PAULI_2X2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(label: str) -> np.ndarray:
    """Kronecker product with qubit 0 as the leftmost (most significant) factor."""
    return reduce(np.kron, [_PAULI_2X2[c] for c in label])


def dense_hamiltonian(h: WeightedHamiltonian) -> np.ndarray:
    dim = 2**h.n_qubits
    m = h.identity_offset * np.eye(dim, dtype=complex)
    for c, p in zip(h.coeffs, h.observables):
        m += c * dense_pauli(str(p))
    return m


def random_hamiltonian(rng, n, m, offset=0.0) -> WeightedHamiltonian:
    m = min(m, 4**n - 1)
    words = set()
    while len(words) < m:
        w = "".join(rng.choice(list("IXYZ"), n))
        if w != "I" * n:
            words.add(w)
    coeffs = rng.uniform(0.1, 1.0, m) * rng.choice([-1, 1], m)
    return WeightedHamiltonian.from_terms(list(zip(coeffs, sorted(words))), identity_offset=offset)


def pauli_words(n_min=1, n_max=5):
    return st.integers(n_min, n_max).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def pauli_pairs(n_min=1, n_max=5):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))
    )


@st.composite
def hamiltonians(draw, n_max=4, m_max=8):
    n = draw(st.integers(1, n_max))
    words = draw(
        st.lists(
            st.text("IXYZ", min_size=n, max_size=n).filter(lambda w: set(w) != {"I"}),
            min_size=1,
            max_size=min(m_max, 4**n - 1),
            unique=True,
        )
    )
    coeffs = draw(
        st.lists(
            st.floats(0.05, 2.0).flatmap(lambda a: st.sampled_from([a, -a])),
            min_size=len(words),
            max_size=len(words),
        )
    )
    return WeightedHamiltonian.from_terms(list(zip(coeffs, words)))


@pytest.fixture(params=FIXTURES)
def fixture_h(request):
    return read_hamiltonian(DATA / request.param)


@pytest.fixture
def h2():
    return read_hamiltonian(DATA / "h2_sto3g_jw.txt")


@pytest.fixture
def P():
    return PauliString.from_label


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[number])
