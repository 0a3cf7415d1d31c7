"""Pauli strings stored as a pair of bitmasks.

Bit ``j`` of ``x``/``z`` describes qubit ``j``, which is the ``j``-th character
of the text form (qubit 0 is leftmost). The single-qubit labels map to
``(x, z)`` as I=(0,0), X=(1,0), Y=(1,1), Z=(0,1). Phases are never tracked.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .exceptions import ContractViolation, FormatError, StructuralError

LABELS = "IXYZ"
# label code -> (x bit, z bit)
_XZ = {0: (0, 0), 1: (1, 0), 2: (1, 1), 3: (0, 1)}
_CODE = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_WORD = re.compile(r"[IXYZ]+")


@total_ordering
@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word without phase.

    Compare with ``==``; ``<`` is lexicographic over labels with I < X < Y < Z.
    """

    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 1:
            raise StructuralError("a Pauli string needs at least one qubit")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise StructuralError(f"bitmask wider than {self.n} qubits")

    @classmethod
    def from_label(cls, text: str) -> "PauliString":
        return parse_pauli(text)

    @classmethod
    def from_codes(cls, codes) -> "PauliString":
        x = z = 0
        for j, c in enumerate(codes):
            xb, zb = _XZ[int(c)]
            x |= xb << j
            z |= zb << j
        return cls(len(codes), x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @property
    def codes(self) -> tuple:
        return tuple(_CODE[((self.x >> j) & 1, (self.z >> j) & 1)] for j in range(self.n))

    @property
    def nonidentity_mask(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_full_support(self) -> bool:
        return self.nonidentity_mask == (1 << self.n) - 1

    def to_array(self) -> np.ndarray:
        return np.array(self.codes, dtype=np.uint8)

    def __len__(self):
        return self.n

    def __str__(self):
        return format_pauli(self)

    def __repr__(self):
        return f"PauliString('{format_pauli(self)}')"

    def __lt__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return self.codes < other.codes


def parse_pauli(text: str) -> PauliString:
    """Parse an uppercase word over ``IXYZ``; qubit 0 is the first character."""
    if not isinstance(text, str) or not text:
        raise FormatError("empty Pauli word")
    if not _WORD.fullmatch(text):
        pos = next(i for i, ch in enumerate(text) if ch not in LABELS)
        raise FormatError(f"illegal character {text[pos]!r} at position {pos} in Pauli word {text!r}")
    return PauliString.from_codes([LABELS.index(ch) for ch in text])


def format_pauli(p: PauliString) -> str:
    return "".join(LABELS[c] for c in p.codes)


def _check_lengths(p: PauliString, q: PauliString):
    if p.n != q.n:
        raise StructuralError(f"length mismatch: {p.n} vs {q.n} qubits")


def _clash_mask(p: PauliString, q: PauliString) -> int:
    # positions where both labels are non-identity and differ, i.e. locally anticommuting
    return (p.x & q.z) ^ (p.z & q.x)


def commutes(p: PauliString, q: PauliString) -> bool:
    """General commutation: an even number of locally anticommuting positions."""
    _check_lengths(p, q)
    return _clash_mask(p, q).bit_count() % 2 == 0


def qwc(p: PauliString, q: PauliString) -> bool:
    """Qubit-wise commutation: labels agree wherever both act non-trivially."""
    _check_lengths(p, q)
    return _clash_mask(p, q) == 0


def support(p: PauliString) -> frozenset:
    m = p.nonidentity_mask
    return frozenset(j for j in range(p.n) if (m >> j) & 1)


def merge_idle(setting: PauliString, obs: PauliString) -> PauliString:
    """Copy ``obs`` into the idle (identity) positions of ``setting``.

    Requires the two to commute qubit-wise, so positions already set are left
    untouched and the result is QWC-compatible with both inputs.
    """
    if not qwc(setting, obs):
        raise ContractViolation(f"{setting} and {obs} do not commute qubit-wise")
    idle = ~setting.nonidentity_mask
    return PauliString(setting.n, setting.x | (obs.x & idle), setting.z | (obs.z & idle))


# Vectorised forms over label-code arrays (shape (..., n), dtype uint8).


def qwc_mask(obs_codes: np.ndarray, setting_codes: np.ndarray) -> np.ndarray:
    """Row-wise QWC test of each observable against one setting (or broadcastable batch)."""
    return np.all((obs_codes == 0) | (setting_codes == 0) | (obs_codes == setting_codes), axis=-1)


def commute_mask(obs_codes: np.ndarray, setting_codes: np.ndarray) -> np.ndarray:
    clash = (obs_codes != 0) & (setting_codes != 0) & (obs_codes != setting_codes)
    return np.count_nonzero(clash, axis=-1) % 2 == 0


def compatibility_mask(obs_codes, setting_codes, kind: str) -> np.ndarray:
    if kind == "qwc":
        return qwc_mask(obs_codes, setting_codes)
    if kind == "general":
        return commute_mask(obs_codes, setting_codes)
    raise ValueError(f"unknown indicator kind {kind!r}; expected 'qwc' or 'general'")
