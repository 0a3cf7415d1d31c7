import itertools

import numpy as np
import pytest
from hypothesis import given

from conftest import dense_pauli, pauli_pairs, pauli_words
from shadowalloc import (
    ContractViolation,
    FormatError,
    PauliString,
    StructuralError,
    commutes,
    format_pauli,
    merge_idle,
    parse_pauli,
    qwc,
    support,
)
from shadowalloc.pauli import commute_mask, qwc_mask

P = PauliString.from_label


def matrix_commutes(a: str, b: str) -> bool:
    ma, mb = dense_pauli(a), dense_pauli(b)
    return np.allclose(ma @ mb, mb @ ma)


@pytest.mark.parametrize(
    "a,b,expected",
    [("XX", "YY", True), ("X", "X", True), ("XZ", "ZX", True), ("XZ", "ZZ", False)],
)
def test_commutes_examples(a, b, expected):
    assert commutes(P(a), P(b)) is expected


@pytest.mark.parametrize("a,b,expected", [("XX", "YY", False), ("XI", "IY", True)])
def test_qwc_examples(a, b, expected):
    assert qwc(P(a), P(b)) is expected


@pytest.mark.parametrize("fn", [commutes, qwc])
def test_length_mismatch_is_structural(fn):
    with pytest.raises(StructuralError):
        fn(P("XX"), P("XXX"))


@pytest.mark.parametrize("n", [1, 2])
def test_commutes_matches_matrix_commutator_exhaustively(n):
    words = ["".join(w) for w in itertools.product("IXYZ", repeat=n)]
    for a, b in itertools.product(words, repeat=2):
        assert commutes(P(a), P(b)) == matrix_commutes(a, b), (a, b)


@given(pauli_pairs(1, 4))
def test_commutes_oracle_property(pair):
    a, b = pair
    assert commutes(P(a), P(b)) == matrix_commutes(a, b)


@given(pauli_pairs(1, 6))
def test_qwc_definition_and_implication(pair):
    a, b = pair
    by_qubit = all(x == "I" or y == "I" or x == y for x, y in zip(a, b))
    assert qwc(P(a), P(b)) == by_qubit
    if by_qubit:
        assert commutes(P(a), P(b))


@given(pauli_words())
def test_reflexive_and_roundtrip(w):
    p = parse_pauli(w)
    assert qwc(p, p) and commutes(p, p)
    assert format_pauli(p) == w
    assert len(p) == len(w)
    assert PauliString.from_codes(p.codes) == p


@given(pauli_pairs())
def test_symmetry(pair):
    p, q = P(pair[0]), P(pair[1])
    assert commutes(p, q) == commutes(q, p)
    assert qwc(p, q) == qwc(q, p)


def test_support_examples():
    assert support(P("XIZ")) == {0, 2}
    assert support(P("III")) == frozenset()
    assert support(P("XYZ")) == {0, 1, 2}
    assert P("XYZ").is_full_support() and not P("XIZ").is_full_support()


@pytest.mark.parametrize("setting,obs,expected", [("IY", "XI", "XY"), ("XYZ", "XII", "XYZ"), ("III", "IZI", "IZI")])
def test_merge_idle_examples(setting, obs, expected):
    assert merge_idle(P(setting), P(obs)) == P(expected)


def test_merge_idle_rejects_non_qwc():
    with pytest.raises(ContractViolation):
        merge_idle(P("XI"), P("ZI"))


@given(pauli_pairs())
def test_merge_idle_covers_both(pair):
    p, q = P(pair[0]), P(pair[1])
    if not qwc(p, q):
        return
    m = merge_idle(p, q)
    assert qwc(m, p) and qwc(m, q)
    assert support(m) == support(p) | support(q)


def test_parse_examples_and_errors():
    assert P("XIZ").codes == (1, 0, 3)
    assert format_pauli(parse_pauli("ZZZZ")) == "ZZZZ"
    with pytest.raises(FormatError, match="position 0"):
        parse_pauli("xyz")
    with pytest.raises(FormatError, match="position 2"):
        parse_pauli("XZA")
    with pytest.raises(FormatError):
        parse_pauli("")


def test_ordering_is_lexicographic_with_i_first():
    words = ["ZI", "XY", "IZ", "YY", "II", "XX"]
    assert [str(p) for p in sorted(map(P, words))] == sorted(words, key=lambda w: ["IXYZ".index(c) for c in w])


def test_label_equality_and_hash():
    assert P("XYZ") == P("XYZ") and hash(P("XYZ")) == hash(P("XYZ"))
    assert P("XYZ") != P("XYI")


@given(pauli_pairs(1, 4))
def test_vectorised_masks_agree(pair):
    p, q = P(pair[0]), P(pair[1])
    a, b = p.to_array()[None, :], q.to_array()[None, :]
    assert bool(qwc_mask(a, b)[0]) == qwc(p, q)
    assert bool(commute_mask(a, b)[0]) == commutes(p, q)
