import numpy as np
import pytest

from orthosig.fields import make_tower
from orthosig.forms import _projective_reps, build_space, enumerate_isotropic_points
from orthosig.matgroups import descriptor, identity, standard_generators
from orthosig.spreads import (
    NotAPartialSpread,
    PartialSpread,
    classical_spread,
    act_subspace,
    orbit_partial_spread,
    span_points,
    subspace,
    subspace_contains,
    verify_partition,
)


def all_points(fq, n):
    return list(_projective_reps(fq, n))


def test_classical_spread_31():
    t = make_tower(3, 1, 1)
    sp = classical_spread(t)
    assert len(sp) == 4  # q^m + 1
    covered = set()
    for m in sp.members:
        for v in span_points(t.fq, m):
            covered.add(v.tobytes())
    # 4 lines, 2 nonzero vectors each, covering all 8 = all 4 points of P(F_9)
    assert len(covered) == 4
    rep = verify_partition(sp, all_points(t.fq, 2), t.fq)
    assert rep["ok"] and rep["points_per_member"] == 1


def test_classical_spread_w0_is_subfield():
    t = make_tower(3, 1, 2)
    sp = classical_spread(t)
    assert len(sp) == 10
    w0 = sp.members[0]
    # the first member is F_{q^m} itself: contains the vector of 1
    one = t.top_to_vec(1)
    assert subspace_contains(t.fq, w0, one)


@pytest.mark.parametrize("p,e,m", [(3, 1, 1), (3, 1, 2), (3, 1, 3), (5, 1, 1), (5, 1, 2), (7, 1, 1), (3, 2, 1)])
def test_classical_spread_partitions_V(p, e, m):
    t = make_tower(p, e, m)
    sp = classical_spread(t)
    assert len(sp) == t.q ** m + 1
    rep = verify_partition(sp, all_points(t.fq, 2 * m), t.fq)
    assert rep["ok"]


def test_orbit_partial_spread_identity():
    t = make_tower(3, 1, 2)
    s = build_space("minus", t)
    W0 = subspace(s.fq, [s.e_vec(0)])
    sp, sharp = orbit_partial_spread([identity(s.fq, 4)], W0)
    assert len(sp) == 1 and sharp
    assert sp.members[0].key == W0.key


def test_orbit_partial_spread_minus_torus_collapses():
    # the cyclic block of order 10 only reaches 5 distinct images: its
    # fifth power is -I, which fixes every subspace
    t = make_tower(3, 1, 2)
    s = build_space("minus", t)
    a, b, _ = standard_generators(descriptor("O-", 3, n=4), s)
    W0 = None
    for v in enumerate_isotropic_points(s):
        W0 = subspace(s.fq, [v])
        break
    A = [a.pow(i) for i in range(10)]
    sp, sharp = orbit_partial_spread(A, W0)
    assert len(sp) == 5
    assert sharp is False


def test_orbit_partial_spread_plus_sharp():
    # the plus-type block of order q^{m-1}+1 = 4 is sharply transitive on
    # the 4-line system through a compatible base
    from orthosig.lscore import canonical_ls

    ls = canonical_ls(descriptor("O+", 3, n=4))
    assert ls.meta["shape"] == "literal"
    plan = ls.plan
    layer = plan.layers[0]
    gen, size, _, _ = layer[1]
    W0 = plan.sp.W0
    A = [gen.pow(i) for i in range(size)]
    sp, sharp = orbit_partial_spread(A, W0)
    assert len(sp) == 4 and sharp


def test_overlapping_members_raise():
    t = make_tower(3, 1, 2)
    s = build_space("plus", t)
    W1 = subspace(s.fq, [s.e_vec(0), s.e_vec(1)])
    W2 = subspace(s.fq, [s.e_vec(0), s.f_vec(1)])
    sp = PartialSpread([W1, W2], s.fq)
    with pytest.raises(NotAPartialSpread):
        sp.check_pairwise()


def test_duplicate_member_violation():
    t = make_tower(3, 1, 2)
    s = build_space("plus", t)
    W1 = subspace(s.fq, [s.e_vec(0), s.e_vec(1)])
    with pytest.raises(NotAPartialSpread):
        PartialSpread([W1, W1], s.fq)


def test_partition_violation_report():
    # a member list missing part of L yields an uncovered violation
    t = make_tower(3, 1, 2)
    s = build_space("minus", t)
    pts = enumerate_isotropic_points(s)
    members = [subspace(s.fq, [v]) for v in pts[:8]]
    rep = verify_partition(PartialSpread(members, s.fq), pts, s.fq)
    assert not rep["ok"]
    assert rep["uncovered"] == 2
    assert any(v["kind"] == "uncovered" for v in rep["violations"])


def test_act_subspace():
    t = make_tower(3, 1, 2)
    s = build_space("plus", t)
    W = subspace(s.fq, [s.e_vec(0), s.e_vec(1)])
    g = identity(s.fq, 4)
    assert act_subspace(g, W).key == W.key
