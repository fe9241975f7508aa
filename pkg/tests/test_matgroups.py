import random

import numpy as np
import pytest

from orthosig.fields import FieldError, fq_context, make_tower
from orthosig.forms import build_space, is_isometry
from orthosig.matgroups import (
    GroupDescriptor,
    Mat,
    OrderNotFound,
    descriptor,
    element_order,
    field_norm_to_fq,
    group_order,
    identity,
    mat_arith,
    mulclose,
    mult_matrix,
    neg_identity,
    order_gl,
    order_sp,
    singer_generator,
    standard_generators,
)


def test_mat_arith_basics():
    fq = fq_context(3, 1)
    I4 = identity(fq, 4)
    assert mat_arith("inv", I4) == I4
    Z = Mat(fq, np.zeros((4, 4), dtype=np.int16))
    assert mat_arith("rank", Z) == 0
    A = Mat(fq, np.array([[1, 1], [0, 2]], dtype=np.int16))
    assert mat_arith("det", A) == 2
    assert mat_arith("transpose_inv", A) == A.transpose().inv()


def test_mat_errors():
    fq = fq_context(3, 1)
    Z = Mat(fq, np.zeros((2, 2), dtype=np.int16))
    with pytest.raises(FieldError):
        Z.inv()


def test_mult_matrix_identity_and_homomorphism():
    t = make_tower(3, 1, 2)
    assert mult_matrix(1, t) == identity(t.fq, 4)
    rng = random.Random(11)
    for _ in range(1000):
        s1 = rng.randrange(1, t.top.order)
        s2 = rng.randrange(1, t.top.order)
        assert mult_matrix(s1, t) * mult_matrix(s2, t) == mult_matrix(t.top.mul(s1, s2), t)
    with pytest.raises(ValueError):
        mult_matrix(0, t)


def test_mult_matrix_determinant_is_norm():
    t = make_tower(3, 1, 2)
    rng = random.Random(4)
    for _ in range(20):
        s = rng.randrange(1, t.top.order)
        assert mult_matrix(s, t).det() == field_norm_to_fq(t, s)


def test_singer_generator():
    fq = fq_context(3, 1)
    s1 = singer_generator(1, fq)
    assert s1.a.tolist() == [[2]]
    assert element_order(s1, 2) == 2
    s2 = singer_generator(2, fq)
    assert element_order(s2, 8) == 8
    assert s2.pow(8) == identity(fq, 2)
    fq5 = fq_context(5, 1)
    s25 = singer_generator(2, fq5)
    assert element_order(s25, 24) == 24


def test_element_order():
    fq = fq_context(3, 1)
    assert element_order(identity(fq, 3), 5) == 1
    assert element_order(neg_identity(fq, 3), 5) == 2
    with pytest.raises(OrderNotFound):
        element_order(singer_generator(2, fq), 7)


def test_group_orders():
    assert order_gl(2, 3) == 48
    assert order_sp(2, 3) == 24
    assert order_sp(2, 5) == 120
    assert group_order(descriptor("O-", 3, n=4)) == 1440
    assert group_order(descriptor("O+", 3, n=4)) == 1152
    assert group_order(descriptor("Oodd", 3, n=3)) == 48
    assert group_order(descriptor("SO-", 3, n=4)) == 720
    assert group_order(descriptor("PSO-", 3, n=4)) == 360
    assert group_order(descriptor("O-", 3, n=6)) == 26127360
    assert group_order(descriptor("Oodd", 3, n=1)) == 2


def test_descriptor_validation():
    with pytest.raises(ValueError):
        GroupDescriptor("O-", 4, 4)
    with pytest.raises(ValueError):
        GroupDescriptor("O-", 3, 3)
    with pytest.raises(ValueError):
        GroupDescriptor("Oodd", 3, 4)
    d = descriptor("SOodd", 3, m=1)
    assert d.n == 3 and d.kind == "odd" and d.base_family() == "SO"


def test_standard_generator_orders_minus():
    # order of the a block is q^m + 1 = 10
    space = build_space("minus", make_tower(3, 1, 2))
    a, b, notes = standard_generators(descriptor("O-", 3, n=4), space)
    assert element_order(a, 11) == 10
    assert is_isometry(space, a) and is_isometry(space, b)


def test_standard_generator_orders_plus():
    # order of the b block is q^m - 1 = 8
    space = build_space("plus", make_tower(3, 1, 2))
    a, b, notes = standard_generators(descriptor("O+", 3, n=4), space)
    assert element_order(b, 9) == 8
    assert element_order(a, 5) == 4  # q^{m-1} + 1
    assert is_isometry(space, a)


def test_standard_generator_orders_odd():
    # order of the a block is q^m + 1 = 4
    space = build_space("odd", make_tower(3, 1, 1))
    a, b, notes = standard_generators(descriptor("Oodd", 3, n=3), space)
    assert element_order(a, 5) == 4


def test_mulclose_dihedral():
    space = build_space("minus", make_tower(3, 1, 1))
    from orthosig.forms import reflections

    els = mulclose(reflections(space))
    assert len(els) == 8  # dihedral of order 2(q+1)


def test_mat_serialization_roundtrip():
    fq = fq_context(3, 2)
    rng = random.Random(3)
    A = Mat(fq, np.array([[rng.randrange(9) for _ in range(3)] for _ in range(3)], dtype=np.int16))
    assert Mat.from_json(fq, A.to_json()) == A


def test_matrix_arithmetic_over_f9():
    # the gather-table path (e > 1) agrees with scalar field arithmetic
    fq = fq_context(3, 2)
    gf = fq.gf
    A = Mat(fq, np.array([[4, 1], [0, 2]], dtype=np.int16))
    B = Mat(fq, np.array([[3, 5], [7, 1]], dtype=np.int16))
    C = A * B
    for i in range(2):
        for j in range(2):
            manual = gf.add(gf.mul(int(A.a[i, 0]), int(B.a[0, j])),
                            gf.mul(int(A.a[i, 1]), int(B.a[1, j])))
            assert int(C.a[i, j]) == manual
    if A.det() != 0:
        assert A * A.inv() == identity(fq, 2)
