"""Dense state-vector backend for desk-scale benchmarks.

Basis index convention: qubit 0 is the most significant bit of the amplitude
index, and a measured bit 0 is reported as outcome +1, bit 1 as -1.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from ._validation import check_rng
from .exceptions import ContractViolation, FormatError, NonConvergenceError, ResourceCapError, StructuralError
from .hamiltonian import WeightedHamiltonian, norms
from .pauli import PauliString, format_pauli, qwc

MAX_QUBITS = 14

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SDAG = np.diag([1, -1j])
# rotation applied before a computational-basis readout, keyed by label code
BASIS_CHANGE = {1: _HADAMARD, 2: _HADAMARD @ _SDAG}


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n,):
            raise StructuralError(f"expected {2**self.n} amplitudes for {self.n} qubits, got {amps.shape}")
        if self.n > MAX_QUBITS:
            raise ResourceCapError(f"simulator is capped at {MAX_QUBITS} qubits, got {self.n}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-10:
            raise ContractViolation(f"state is not normalised (norm^2 = {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, normalize=True):
        vec = np.asarray(vec, dtype=complex)
        n = int(round(np.log2(len(vec))))
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(vec, n)

    @classmethod
    def zero(cls, n):
        v = np.zeros(2**n, dtype=complex)
        v[0] = 1
        return cls(v, n)

    @classmethod
    def random(cls, n, rng=None):
        rng = check_rng(rng)
        v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        return cls.from_vector(v)


@dataclass(frozen=True)
class MeasurementRecord:
    setting: PauliString
    outcome: tuple

    def __post_init__(self):
        if len(self.outcome) != self.setting.n:
            raise StructuralError("outcome length differs from setting length")


def _bit_positions(mask: int, n: int) -> int:
    # PauliString bit j is qubit j; amplitude index bit (n-1-j) is qubit j
    out = 0
    for j in range(n):
        if (mask >> j) & 1:
            out |= 1 << (n - 1 - j)
    return out


class PauliAction:
    """Matrix-free action of a single Pauli string on state vectors."""

    def __init__(self, p: PauliString):
        n = p.n
        idx = np.arange(2**n, dtype=np.int64)
        xm = _bit_positions(p.x, n)
        zm = _bit_positions(p.z, n)
        n_y = (p.x & p.z).bit_count()
        sign = 1 - 2 * (np.bitwise_count(idx & zm) & 1).astype(np.int8)
        # P|b> = i^{#Y} (-1)^{b.z} |b xor x>
        self.phase = (1j**n_y) * sign
        self.target = idx ^ xm

    def apply(self, vec):
        out = np.empty_like(vec, dtype=complex)
        out[self.target] = self.phase * vec
        return out


def pauli_matrix(p: PauliString) -> np.ndarray:
    act = PauliAction(p)
    dim = len(act.target)
    m = np.zeros((dim, dim), dtype=complex)
    m[act.target, np.arange(dim)] = act.phase
    return m


class HamiltonianOperator(LinearOperator):
    """``H v`` without materialising the 2^n x 2^n matrix."""

    def __init__(self, h: WeightedHamiltonian):
        n = h.n_qubits
        if n > MAX_QUBITS:
            raise ResourceCapError(f"simulator is capped at {MAX_QUBITS} qubits, got {n}")
        self.h = h
        self.actions = [PauliAction(p) for p in h.observables]
        super().__init__(dtype=complex, shape=(2**n, 2**n))

    def _matvec(self, v):
        v = np.ravel(v)
        out = self.h.identity_offset * v.astype(complex)
        for c, act in zip(self.h.coeffs, self.actions):
            out[act.target] += c * act.phase * v
        return out

    def _adjoint(self):
        return self


def ground_state(h: WeightedHamiltonian, tol_factor=1e-8, seed=1234):
    """Lowest eigenpair (energy includes the identity offset).

    Lanczos iteration (ARPACK) on the matrix-free operator; the residual
    ``||Hv - Ev||`` is checked against ``tol_factor * ||h||_1``.
    """
    op = HamiltonianOperator(h)
    dim = op.shape[0]
    l1 = norms(h)[0]
    v0 = check_rng(seed).normal(size=dim).astype(complex)
    residual = np.inf
    for ncv in (20, 60, dim):
        if dim <= 3:
            # too small for ARPACK (needs k < ncv <= dim); solve from the operator's columns
            cols = np.column_stack([op.matvec(e) for e in np.eye(dim, dtype=complex)])
            vals, vecs = np.linalg.eigh(cols)
        else:
            try:
                vals, vecs = eigsh(op, k=1, which="SA", v0=v0, ncv=min(ncv, dim), tol=1e-14, maxiter=100 * dim)
            except ArpackNoConvergence:
                continue
        vec = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
        hv = op.matvec(vec)
        energy = float(np.vdot(vec, hv).real)
        residual = float(np.linalg.norm(hv - energy * vec))
        if residual <= tol_factor * l1:
            return energy, QuantumState(vec, h.n_qubits)
    raise NonConvergenceError(f"ground state did not converge (residual {residual:.3e})", residual)


def expectation(state: QuantumState, obs: PauliString) -> float:
    if obs.n != state.n:
        raise StructuralError(f"observable has {obs.n} qubits, state has {state.n}")
    psi = state.amplitudes
    return float(np.vdot(psi, PauliAction(obs).apply(psi)).real)


def energy(state: QuantumState, h: WeightedHamiltonian) -> float:
    psi = state.amplitudes
    return float(np.vdot(psi, HamiltonianOperator(h).matvec(psi)).real)


def rotate_to_basis(state: QuantumState, setting: PauliString) -> np.ndarray:
    """Amplitudes after the per-qubit change of basis that maps ``setting`` onto Z...Z."""
    n = state.n
    psi = state.amplitudes.reshape((2,) * n)
    for q, code in enumerate(setting.codes):
        if code in BASIS_CHANGE:
            psi = np.moveaxis(np.tensordot(BASIS_CHANGE[code], psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


def outcome_probabilities(state: QuantumState, setting: PauliString) -> np.ndarray:
    if setting.n != state.n:
        raise StructuralError(f"setting has {setting.n} qubits, state has {state.n}")
    if not setting.is_full_support():
        raise ContractViolation(f"setting {format_pauli(setting)} is not full support")
    p = np.abs(rotate_to_basis(state, setting)) ** 2
    return p / p.sum()


def index_to_outcomes(indices, n) -> np.ndarray:
    """Map basis indices to rows of +/-1 outcomes, qubit 0 first."""
    shifts = np.arange(n - 1, -1, -1)
    bits = (np.asarray(indices, dtype=np.int64)[:, None] >> shifts) & 1
    return (1 - 2 * bits).astype(np.int8)


def sample_indices(probs, size, rng) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(size), side="right")


def sample_outcome(state: QuantumState, setting: PauliString, rng=None) -> MeasurementRecord:
    """One Born-rule measurement of every qubit in the basis given by ``setting``."""
    rng = check_rng(rng)
    idx = sample_indices(outcome_probabilities(state, setting), 1, rng)
    return MeasurementRecord(setting, tuple(int(v) for v in index_to_outcomes(idx, state.n)[0]))


class Sampler:
    """Batch sampler that caches outcome distributions per distinct setting."""

    def __init__(self, state: QuantumState):
        self.state = state
        self._cache = {}

    def probabilities(self, setting: PauliString):
        p = self._cache.get(setting)
        if p is None:
            p = self._cache[setting] = outcome_probabilities(self.state, setting)
        return p

    def sample(self, settings, rng, repeats=1) -> np.ndarray:
        """Outcomes of shape ``(repeats, len(settings), n)``; row order follows ``settings``."""
        n = self.state.n
        out = np.empty((repeats, len(settings), n), dtype=np.int8)
        groups = {}
        for k, s in enumerate(settings):
            groups.setdefault(s, []).append(k)
        for s in sorted(groups):
            pos = groups[s]
            idx = sample_indices(self.probabilities(s), repeats * len(pos), rng)
            out[:, pos, :] = index_to_outcomes(idx, n).reshape(repeats, len(pos), n)
        return out


def save_state(state: QuantumState, path):
    """Text format: a ``# n=<n>`` header, then one ``<re> <im>`` line per amplitude."""
    lines = [f"# n={state.n}"] + [f"{a.real:.17g} {a.imag:.17g}" for a in state.amplitudes]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_state(path) -> QuantumState:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("# n="):
        raise FormatError("state file must start with '# n=<qubits>'")
    n = int(text[0][4:])
    rows = [ln.split() for ln in text[1:] if ln.strip()]
    if len(rows) != 2**n:
        raise FormatError(f"expected {2**n} amplitude lines, found {len(rows)}")
    amps = np.array([complex(float(r[0]), float(r[1])) for r in rows])
    return QuantumState(amps, n)


def is_measurable(obs: PauliString, setting: PauliString) -> bool:
    return qwc(obs, setting)
