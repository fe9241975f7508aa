import random

import pytest
from hypothesis import given, strategies as st

from orthosig.fields import (
    FieldError,
    LevelMismatch,
    bar,
    factorint,
    field_arith,
    fq_context,
    make_tower,
    smallest_irreducible,
    split_prime_power,
    trace_to_base,
)


def test_factorint():
    assert factorint(1) == {}
    assert factorint(1440) == {2: 5, 3: 2, 5: 1}
    assert split_prime_power(9) == (3, 2)
    with pytest.raises(FieldError):
        split_prime_power(12)


def test_smallest_irreducible_low_degree_first():
    # over F_3 the first monic irreducible quadratic in low-degree-first
    # lexicographic order is x^2 + 1
    assert smallest_irreducible(3, 2) == (1, 0, 1)
    assert smallest_irreducible(3, 1) == (0, 1)


def test_tower_deterministic_constants():
    t = make_tower(3, 1, 1)
    assert t.top.modulus == (1, 0, 1)
    assert t.top.coeffs(t.alpha) == (1, 1)  # alpha = x + 1
    assert t.top.element_order(t.alpha) == 8


def test_tower_f81_alpha_order():
    t = make_tower(3, 1, 2)
    assert t.top.element_order(t.alpha) == 80


def test_tower_rejects_bad_parameters():
    with pytest.raises(FieldError):
        make_tower(2, 1, 1)
    with pytest.raises(FieldError):
        make_tower(9, 1, 1)
    with pytest.raises(FieldError):
        make_tower(3, 0, 1)
    with pytest.raises(FieldError):
        make_tower(3, 1, 0)


def test_field_arith_examples():
    t = make_tower(3, 1, 2)
    one = t.one(3)
    assert field_arith("inv", one) == one
    # in F_9 with modulus x^2 + 1: x * x = 2
    x9 = t.fe(2, (0, 1))
    assert field_arith("mul", x9, x9) == t.fe(2, (2, 0))
    # Lagrange: x^(q-1) = 1 for x in F_q*
    fq = t.fe(1, (2,))
    assert field_arith("pow", fq, 2) == t.one(1)


def test_field_arith_errors():
    t = make_tower(3, 1, 2)
    with pytest.raises(FieldError):
        field_arith("inv", t.zero(3))
    with pytest.raises(LevelMismatch):
        field_arith("add", t.one(1), t.one(2))


def test_trace_examples():
    t = make_tower(3, 1, 2)
    assert trace_to_base(t.zero(2)) == t.zero(1)
    # tr_{F9/F3}(1) = 1 + 1^3 = 2
    assert trace_to_base(t.one(2)) == t.fe(1, (2,))
    # tr(x) = x + x^3 = 0 with modulus x^2 + 1
    assert trace_to_base(t.fe(2, (0, 1))) == t.zero(1)


def test_bar_examples():
    t = make_tower(3, 1, 2)
    a = t.alpha_fe()
    assert bar(bar(a)) == a
    # subfield elements are fixed
    c = t.project(t.embed(t.fe(2, (1, 2))), 3)
    assert bar(c) == c
    # norm alpha * bar(alpha) lands in F_9
    prod = field_arith("mul", a, bar(a))
    t.project(t.embed(prod), 2)  # no LevelMismatch


def test_bulk_ring_axioms_seeded():
    t = make_tower(3, 1, 2)
    top = t.top
    rng = random.Random(99)
    for _ in range(1100):
        a, b, c = (rng.randrange(top.order) for _ in range(3))
        assert top.mul(a, b) == top.mul(b, a)
        assert top.add(a, b) == top.add(b, a)
        assert top.mul(a, top.add(b, c)) == top.add(top.mul(a, b), top.mul(a, c))
        assert top.mul(top.mul(a, b), c) == top.mul(a, top.mul(b, c))


def test_trace_linearity_and_bar_automorphism():
    t = make_tower(3, 1, 2)
    top = t.top
    rng = random.Random(5)
    qm = 9
    for _ in range(200):
        x, y = rng.randrange(top.order), rng.randrange(top.order)
        assert top.add(t.bar_code(x), t.bar_code(y)) == t.bar_code(top.add(x, y))
        assert top.mul(t.bar_code(x), t.bar_code(y)) == t.bar_code(top.mul(x, y))
    # F_q-linearity of the trace on the middle level
    sub = [t.embed(t.fe(2, (i, j))) for i in range(3) for j in range(3)]
    lams = [t.fq_code_to_top(c) for c in range(3)]
    for _ in range(300):
        x, y = rng.choice(sub), rng.choice(sub)
        lam = rng.choice(lams)
        lhs = t.trace_code(top.add(top.mul(lam, x), y), 2)
        rhs = top.add(top.mul(lam, t.trace_code(x, 2)), t.trace_code(y, 2))
        assert lhs == rhs


@given(st.integers(min_value=0, max_value=80), st.integers(min_value=0, max_value=80))
def test_hypothesis_add_mul_closed_in_levels(a, b):
    t = make_tower(3, 1, 2)
    top = t.top
    s = top.add(a, b)
    m = top.mul(a, b)
    assert 0 <= s < 81 and 0 <= m < 81
    if a and b:
        assert top.mul(m, top.inv(b)) == a


def test_serialization_roundtrip():
    t = make_tower(5, 1, 2)
    d = t.to_json()
    assert d["p"] == 5 and d["e"] == 1 and d["m"] == 2
    x = t.fe(2, (3, 1))
    assert x.to_json() == {"level": 2, "coeffs": [3, 1]}


def test_e2_tower():
    t = make_tower(3, 2, 1)
    assert t.q == 9
    assert t.top.order == 81
    assert t.top.element_order(t.alpha) == 80
    v = t.top_to_vec(t.alpha)
    assert t.vec_to_top(v) == t.alpha


def test_fq_context_tables():
    fq = fq_context(3, 1)
    assert fq.mul(2, 2) == 1
    assert fq.inv(2) == 2
    fq9 = fq_context(3, 2)
    for a in range(1, 9):
        assert fq9.mul(a, fq9.inv(a)) == 1
