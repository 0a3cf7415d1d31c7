"""Weighted Pauli decompositions and their text format.

File format (UTF-8): one term per line, ``<coefficient> <pauli-word>``.
``#`` starts a comment that runs to the end of the line; blank lines are
ignored. Qubit 0 is the leftmost character of every word. Repeated words have
their coefficients summed, exact zeros are dropped and an all-identity word is
moved to ``identity_offset``. Terms are kept in canonical order: descending
``|h_i|``, ties broken lexicographically (I < X < Y < Z).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import EmptyHamiltonianError, FormatError, StructuralError
from .pauli import format_pauli, parse_pauli


@dataclass(frozen=True, eq=False)
class WeightedHamiltonian:
    """H = identity_offset + sum_i coeffs[i] * observables[i]."""

    coeffs: np.ndarray
    observables: tuple
    identity_offset: float = 0.0
    codes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        obs = tuple(self.observables)
        if coeffs.ndim != 1 or len(coeffs) != len(obs):
            raise StructuralError("need exactly one coefficient per observable")
        if not obs:
            raise EmptyHamiltonianError("Hamiltonian has no non-identity terms", self.identity_offset)
        n = obs[0].n
        for p in obs:
            if p.n != n:
                raise StructuralError(f"observable {p} has {p.n} qubits, expected {n}")
            if p.nonidentity_mask == 0:
                raise StructuralError("identity terms belong in identity_offset")
        if len(set(obs)) != len(obs):
            raise StructuralError("duplicate observables; merge them first")
        if not np.all(np.isfinite(coeffs)) or np.any(coeffs == 0):
            raise StructuralError("coefficients must be finite and nonzero")
        order = sorted(range(len(obs)), key=lambda i: (-abs(coeffs[i]), obs[i].codes))
        coeffs = coeffs[order]
        coeffs.setflags(write=False)
        obs = tuple(obs[i] for i in order)
        codes = np.array([p.codes for p in obs], dtype=np.uint8)
        codes.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "identity_offset", float(self.identity_offset))
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_terms(cls, terms, identity_offset=0.0):
        """Build from ``(coefficient, word-or-PauliString)`` pairs, merging as the parser does."""
        merged = {}
        offset = float(identity_offset)
        for c, p in terms:
            p = parse_pauli(p) if isinstance(p, str) else p
            if p.nonidentity_mask == 0:
                offset += float(c)
            else:
                merged[p] = merged.get(p, 0.0) + float(c)
        kept = [(c, p) for p, c in merged.items() if c != 0.0]
        if not kept:
            raise EmptyHamiltonianError(
                f"no non-identity terms left after merging (identity offset {offset!r})", offset
            )
        return cls(np.array([c for c, _ in kept]), tuple(p for _, p in kept), offset)

    @property
    def n_qubits(self) -> int:
        return self.observables[0].n

    @property
    def n_terms(self) -> int:
        return len(self.observables)

    @property
    def abs_coeffs(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def subset(self, keep) -> "WeightedHamiltonian":
        """Hamiltonian restricted to the terms where ``keep`` is true (offset preserved)."""
        keep = np.asarray(keep, dtype=bool)
        idx = np.flatnonzero(keep)
        return WeightedHamiltonian(self.coeffs[idx], tuple(self.observables[i] for i in idx), self.identity_offset)

    def terms(self):
        return list(zip(self.coeffs.tolist(), self.observables))

    def to_text(self) -> str:
        lines = []
        if self.identity_offset != 0.0:
            lines.append(f"{self.identity_offset:.17g} {'I' * self.n_qubits}")
        lines += [f"{c:.17g} {format_pauli(p)}" for c, p in self.terms()]
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; only meant for small test systems."""
        from .simulator import pauli_matrix

        dim = 2**self.n_qubits
        H = self.identity_offset * np.eye(dim, dtype=complex)
        for c, p in self.terms():
            H += c * pauli_matrix(p)
        return H

    def __eq__(self, other):
        if not isinstance(other, WeightedHamiltonian):
            return NotImplemented
        return (
            self.observables == other.observables
            and np.array_equal(self.coeffs, other.coeffs)
            and self.identity_offset == other.identity_offset
        )

    def __hash__(self):
        return hash((self.observables, self.coeffs.tobytes(), self.identity_offset))

    def __repr__(self):
        return f"WeightedHamiltonian(n_qubits={self.n_qubits}, n_terms={self.n_terms}, offset={self.identity_offset})"


def parse_hamiltonian(text: str) -> WeightedHamiltonian:
    terms = []
    first_len = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected '<coefficient> <pauli-word>', got {raw.strip()!r}")
        try:
            c = float(parts[0])
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse coefficient {parts[0]!r}") from None
        if not math.isfinite(c):
            raise FormatError(f"line {lineno}: coefficient must be finite")
        try:
            p = parse_pauli(parts[1])
        except FormatError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        if first_len is None:
            first_len = (lineno, p.n)
        elif p.n != first_len[1]:
            raise FormatError(
                f"line {lineno}: word length {p.n} differs from length {first_len[1]} on line {first_len[0]}"
            )
        terms.append((c, p))
    if not terms:
        raise EmptyHamiltonianError("no terms found", 0.0)
    return WeightedHamiltonian.from_terms(terms)


def read_hamiltonian(path) -> WeightedHamiltonian:
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"))


def serialize_hamiltonian(h: WeightedHamiltonian) -> str:
    return h.to_text()


def norms(h: WeightedHamiltonian):
    """Return ``(l1, l2, h_min, h_max)`` of the coefficient vector."""
    a = h.abs_coeffs
    return float(a.sum()), float(np.sqrt(np.sum(a * a))), float(a.min()), float(a.max())
