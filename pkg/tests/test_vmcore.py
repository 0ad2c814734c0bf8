import random
from dataclasses import replace

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from morsecensus.vmcore import (
    Kind,
    ParseError,
    canonical_key,
    exact_det,
    from_key,
    int_det,
    make_state,
    parse,
    reflect,
    serialize,
    trivial_invariant,
    validate,
)

from conftest import SEED_R, isolated_state


def test_seed_is_valid(seed_a, seed_b):
    assert validate(seed_a) == []
    assert validate(seed_b) == []
    assert seed_a.r == SEED_R
    assert seed_a.q == 4


def test_asymmetric_matrix_reported(seed_a):
    A = [list(row) for row in seed_a.matrix]
    A[0][1] = 5
    assert "asymmetric matrix" in validate(replace(seed_a, matrix=tuple(map(tuple, A))))


def test_neg_count_out_of_range(seed_a):
    assert "neg_count out of range" in validate(seed_a.with_q(8))


def test_pair_adjacency_and_euler_violations(seed_a):
    kinds = list(seed_a.kinds)
    kinds[6], kinds[7] = kinds[7], kinds[6]
    assert "complex pair members not adjacent" in validate(replace(seed_a, kinds=tuple(kinds)))
    kinds = list(seed_a.kinds)
    kinds[0] = Kind.SADDLE
    assert "Euler number mismatch" in validate(replace(seed_a, kinds=tuple(kinds)))


def unimodular_oracle(A, m, c):
    """Reflection as the congruence P A P^T with P = I + a e_m e_c^T."""
    n = len(A)
    a = A[m][c]
    P = sympy.eye(n)
    P[m, c] = a
    return P * sympy.Matrix(A) * P.T


def test_reflect_example(seed_a):
    out = reflect(seed_a, 0, 4)
    assert out.matrix[0] == (-2, 0, 1, 0, -1, 0, 1, 0, 0)
    assert out.r[0] == 0
    assert sympy.Matrix(out.matrix) == unimodular_oracle(seed_a.matrix, 0, 4)


def test_reflect_zero_entry_is_identity(seed_a):
    assert seed_a.matrix[0][1] == 0
    assert reflect(seed_a, 0, 1) == seed_a


def test_reflect_same_position_rejected(seed_a):
    with pytest.raises(ValueError):
        reflect(seed_a, 2, 2)


def test_trivial_invariant(seed_a):
    assert trivial_invariant(seed_a) == (7, 4, 3, 0)
    assert trivial_invariant(isolated_state()) == (9, 5, 4, 0)
    two = isolated_state(kinds=(0, 0, 0, 1, 1, 1, 1, 1, 1), ptype="x9two")
    assert validate(two) == []


def test_canonical_key_examples(seed_a, seed_b):
    assert canonical_key(seed_a) == canonical_key(seed_a)
    assert canonical_key(seed_a) != canonical_key(seed_b)
    assert canonical_key(seed_a) != canonical_key(reflect(seed_a, 0, 4))
    assert from_key(canonical_key(seed_a)) == seed_a


def test_key_wide_entries_round_trip(seed_a):
    A = [list(row) for row in seed_a.matrix]
    A[0][4] = A[4][0] = 40000
    vm = replace(seed_a, matrix=tuple(map(tuple, A)))
    assert from_key(canonical_key(vm)) == vm


def test_serialize_round_trip(seed_a):
    assert parse(serialize(seed_a)) == seed_a


def test_parse_wrong_matrix_size(seed_a):
    text = serialize(seed_a)
    import json

    obj = json.loads(text)
    obj["matrix"] = [row[:8] for row in obj["matrix"][:8]]
    with pytest.raises(ParseError, match="matrix size"):
        parse(json.dumps(obj))


def test_parse_negative_q_is_semantic(seed_a):
    import json

    obj = json.loads(serialize(seed_a))
    obj["q"] = -1
    vm = parse(json.dumps(obj))
    assert "neg_count out of range" in validate(vm)


def test_parse_reports_field():
    with pytest.raises(ParseError, match="kinds\\[0\\]"):
        parse('{"mu":1,"ptype":"x9plus","q":0,"kinds":["blob"],"matrix":[[-2]],"r":[0]}')
    with pytest.raises(ParseError, match="line"):
        parse("{not json")


def test_det_helpers_agree():
    rng = random.Random(4)
    for _ in range(200):
        n = rng.randint(1, 7)
        M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        assert int_det(M) == exact_det(M) == sympy.Matrix(M).det()


def test_seed_lattice_rank(seed_a, seed_b):
    for vm in (seed_a, seed_b):
        ev = np.linalg.eigvalsh(np.array(vm.matrix, dtype=float))
        assert int_det(vm.matrix) == 0
        assert sum(abs(e) < 1e-9 for e in ev) == 2
        assert all(e < 1e-9 for e in ev)


# random valid states built by reflections from the seeds

def _random_state(seed_a, seed_b, rnd: random.Random, steps: int):
    vm = seed_a if rnd.random() < 0.5 else seed_b
    for _ in range(steps):
        m, c = rnd.sample(range(9), 2)
        out = reflect(vm, m, c)
        if max(abs(x) for row in out.matrix for x in row) <= 50:
            vm = out
    return vm


def _inertia(M):
    ev = np.linalg.eigvalsh(np.array(M, dtype=float))
    scale = max(1.0, float(np.abs(ev).max()))
    return tuple(sorted(int(np.sign(e)) if abs(e) > 1e-8 * scale else 0 for e in ev))


def test_reflect_involution_isometry_randomized(seed_a, seed_b):
    rnd = random.Random(20240)
    checked = 0
    while checked < 10_000:
        vm = _random_state(seed_a, seed_b, rnd, rnd.randint(0, 6))
        m, c = rnd.sample(range(9), 2)
        out = reflect(vm, m, c)
        assert reflect(out, m, c) == vm
        assert validate(out) == validate(vm)
        assert int_det(out.matrix) == int_det(vm.matrix)
        if checked % 50 == 0:
            assert _inertia(out.matrix) == _inertia(vm.matrix)
        checked += 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), max_size=8), st.integers(0, 7))
def test_reflection_words_preserve_det_and_round_trip(word, q):
    from morsecensus.acampo import load_fixture

    vm = load_fixture("x9plus-m7-a").with_q(q)
    for m, c in word:
        if m != c:
            vm = reflect(vm, m, c)
    assert int_det(vm.matrix) == 0
    assert parse(serialize(vm)) == vm
    assert from_key(canonical_key(vm)) == vm
