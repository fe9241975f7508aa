import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orthosig.fields import fq_context, make_tower
from orthosig.forms import build_space, enumerate_isotropic_points, enumerate_isometry_group
from orthosig.lscore import (
    InjectivityFail,
    LogSignature,
    LsError,
    SearchNotFound,
    UnsupportedFamily,
    canonical_ls,
    cyclic_set_mls,
    fallback_search,
    min_length_bound,
    parabolic_ls,
    project_ls,
    semidirect_ls,
    spread_construction,
    verify_ls,
)
from orthosig.matgroups import (
    Mat,
    descriptor,
    group_order,
    identity,
    neg_identity,
    singer_generator,
)


def test_min_length_bound():
    assert min_length_bound(1).bound == 0
    assert min_length_bound(8).bound == 6
    assert min_length_bound(1440).bound == 21
    assert min_length_bound(48).bound == 11
    assert min_length_bound(1152).bound == 20


# ---------------------------------------------------------------- cyclic sets


def _cyclic_model(s):
    """Integer model of a cyclic group element of order >= s."""
    fq = fq_context(3, 1)
    k = singer_generator(2, fq)  # order 8
    return k


def test_cyclic_set_mls_trivial():
    fq = fq_context(3, 1)
    ls = cyclic_set_mls(identity(fq, 2), 1)
    assert ls.blocks == [] and ls.claimed_order == 1 and ls.length == 0


def test_cyclic_set_mls_6():
    fq = fq_context(5, 1)
    x = singer_generator(1, fq)  # order 4... need order >= 6, use 2x2 singer
    x = singer_generator(2, fq)  # order 24
    ls = cyclic_set_mls(x, 6)
    assert sorted(len(b) for b in ls.blocks) == [2, 3]
    assert ls.length == 5
    # exhaustive uniqueness
    seen = set()
    for iv in itertools.product(*[range(len(b)) for b in ls.blocks]):
        g = None
        for b, i in zip(ls.blocks, iv):
            g = b[i] if g is None else g * b[i]
        seen.add(g.key)
    assert len(seen) == 6
    assert {x.pow(i).key for i in range(6)} == seen


def test_cyclic_set_mls_4_index_sums():
    fq = fq_context(3, 1)
    x = singer_generator(2, fq)  # order 8
    ls = cyclic_set_mls(x, 4)
    assert [len(b) for b in ls.blocks] == [2, 2]
    assert ls.length == 4
    # the exponent sums stay below s = 4 for every block choice
    radices = ls.meta["radices"]
    Ms = [1, radices[0]]
    max_sum = sum((r - 1) * M for r, M in zip(radices, Ms))
    assert max_sum == 3 < 4


def test_cyclic_set_index_sum_property_bulk():
    # sum over blocks of (r_t - 1) M_t = s - 1 < s for every s
    from orthosig.lscore import _mixed_radices

    for s in range(2, 2001):
        radices = _mixed_radices(s)
        M = 1
        total = 0
        for r in radices:
            total += (r - 1) * M
            M *= r
        assert total == s - 1


def test_cyclic_set_uniqueness_small_exhaustive():
    # integer model: digits map bijectively onto {0..s-1}
    from orthosig.lscore import _mixed_radices, digits_of, undigits

    for s in range(1, 65):
        radices = _mixed_radices(s) if s > 1 else []
        seen = set()
        for iv in itertools.product(*[range(r) for r in radices]):
            val = undigits(list(iv), radices)
            assert val not in seen
            seen.add(val)
        assert len(seen) == (s if s > 1 else 1)


def test_cyclic_set_rejects_oversize():
    fq = fq_context(3, 1)
    x = singer_generator(2, fq)  # order 8
    with pytest.raises(LsError):
        cyclic_set_mls(x, 9)


# ---------------------------------------------------------------- semidirect


def test_semidirect_examples():
    fq = fq_context(3, 1)
    space = build_space("minus", make_tower(3, 1, 1))
    G = enumerate_isometry_group(space, "O")
    I = identity(fq, 2)
    ls = semidirect_ls([I], G)
    assert len(ls.blocks) == 1 and ls.claimed_order == 8
    r = next(g for g in G if g.det() != 1)
    with pytest.raises(LsError):
        semidirect_ls([I, r], [I, r])


def test_semidirect_parabolic_o4minus():
    space = build_space("minus", make_tower(3, 1, 2))
    ls = parabolic_ls(space, 1)
    R, Q = ls.blocks
    ls2 = semidirect_ls(R, Q)
    assert ls2.claimed_order == 144
    rep = verify_ls(ls, "exhaustive", check_membership=False)
    assert rep.valid


# ---------------------------------------------------------------- parabolic


def test_parabolic_sizes():
    s4 = build_space("minus", make_tower(3, 1, 2))
    ls = parabolic_ls(s4, 1)
    assert ls.meta["R_size"] == 9 and ls.meta["Q_size"] == 16 and ls.claimed_order == 144
    assert ls.claimed_order == group_order(descriptor("O-", 3, n=4)) // 10
    s3 = build_space("odd", make_tower(3, 1, 1))
    ls3 = parabolic_ls(s3, 1)
    assert ls3.meta["R_size"] == 3 and ls3.meta["Q_size"] == 4 and ls3.claimed_order == 12


def test_parabolic_k2_shape():
    s6 = build_space("minus", make_tower(3, 1, 3))
    ls = parabolic_ls(s6, 2)
    # q^{k(k-1)/2 + k(2m-2k)} = 3^{1+4}
    assert ls.meta["R_size"] == 243
    assert ls.meta["Q_size"] == 48 * 8  # GL_2(3) x O_2^-(3)


def test_parabolic_k_bounds():
    s4 = build_space("minus", make_tower(3, 1, 2))
    with pytest.raises(LsError):
        parabolic_ls(s4, 2)  # witt index is 1


# ---------------------------------------------------------------- canonical


CANONICAL_CASES = [
    ("O-", 3, 2, 8, 6),
    ("O+", 3, 2, 4, 4),
    ("SO-", 3, 2, 4, 4),
    ("SO+", 3, 2, 2, 2),
    ("Oodd", 3, 1, 2, 2),
    ("Oodd", 3, 3, 48, 11),
    ("O-", 3, 4, 1440, 21),
    ("O+", 3, 4, 1152, 20),
    ("SO-", 3, 4, 720, 19),
    ("SO+", 3, 4, 576, 18),
]


@pytest.mark.parametrize("fam,q,n,order,length", CANONICAL_CASES)
def test_canonical_orders_and_lengths(fam, q, n, order, length):
    ls = canonical_ls(descriptor(fam, q, n=n))
    assert ls.claimed_order == order
    assert ls.length == length
    assert length == min_length_bound(order).bound


def test_canonical_exhaustive_o2minus():
    ls = canonical_ls(descriptor("O-", 3, n=2))
    rep = verify_ls(ls, "exhaustive")
    assert rep.valid and rep.mls


def test_canonical_exhaustive_o4minus():
    ls = canonical_ls(descriptor("O-", 3, n=4))
    rep = verify_ls(ls, "exhaustive")
    assert rep.valid and rep.mls and rep.products_checked == 1440


def test_canonical_unsupported_family():
    with pytest.raises(UnsupportedFamily):
        canonical_ls(descriptor("Omega-", 3, n=4))


def test_verify_detects_repeated_element():
    ls = canonical_ls(descriptor("O-", 3, n=2))
    blocks = [list(b) for b in ls.blocks]
    blocks[0][1] = blocks[0][0]  # repeat an element
    broken = LogSignature(ls.group, blocks, ls.claimed_order)
    rep = verify_ls(broken, "exhaustive")
    assert not rep.valid
    assert rep.collisions


def test_verify_sampled_roundtrip():
    ls = canonical_ls(descriptor("O-", 3, n=4))
    rep = verify_ls(ls, "sampled", samples=300, seed=42)
    assert rep.valid and rep.seed == 42


# ---------------------------------------------------------------- spread plans


def test_spread_construction_shapes():
    s = build_space("minus", make_tower(3, 1, 2))
    plan = spread_construction(s, "O-")
    assert plan.shape == "twisted"
    assert plan.literal_ok is False
    assert plan.partition["ok"]
    assert len(plan.members) == 10
    sp = build_space("plus", make_tower(3, 1, 2))
    plan2 = spread_construction(sp, "O+")
    assert plan2.shape == "literal" and plan2.literal_ok
    assert plan2.partition["points_per_member"] == 4


def test_spread_construction_a_block_bijects():
    s = build_space("plus", make_tower(3, 1, 2))
    plan = spread_construction(s, "O+")
    (kind, gen, size), = plan.layers
    from orthosig.spreads import act_subspace

    images = set()
    cur = plan.W0
    for j in range(size):
        images.add(cur.key)
        cur = act_subspace(gen, cur)
    assert images == set(plan.member_index)


def test_spread_construction_odd_m2_degrades():
    s = build_space("odd", make_tower(3, 1, 2))
    plan = spread_construction(s, "Oodd")
    assert plan.shape == "transversal"
    assert plan.partition["ok"]
    assert any("trivial point spread" in note for note in plan.notes)


def test_spread_empty_for_anisotropic():
    s = build_space("minus", make_tower(3, 1, 1))
    plan = spread_construction(s, "O-")
    assert plan.shape == "empty"


# ---------------------------------------------------------------- fallback


def test_fallback_search_plus_succeeds():
    s = build_space("plus", make_tower(3, 1, 2))
    a, b = fallback_search(s, "O+", (4, 8))
    from orthosig.matgroups import element_order

    assert element_order(a, 5) == 4
    assert element_order(b, 9) == 8


def test_fallback_search_impossible_cyclic_target():
    # no order-10 cyclic block can be sharply transitive for minus type
    s = build_space("minus", make_tower(3, 1, 2))
    with pytest.raises(SearchNotFound):
        fallback_search(s, "O-", (10, 2), budget=2500)


def test_fallback_search_impossible_order():
    s = build_space("plus", make_tower(3, 1, 2))
    with pytest.raises(SearchNotFound):
        fallback_search(s, "O+", (7, 8), budget=800)


# ---------------------------------------------------------------- projection


def test_project_identity_center():
    ls = canonical_ls(descriptor("SO-", 3, n=4))
    same = project_ls(ls, [identity(fq_context(3, 1), 4)])
    assert same.claimed_order == ls.claimed_order
    assert [len(b) for b in same.blocks] == [len(b) for b in ls.blocks]


def test_project_so4minus():
    ls = canonical_ls(descriptor("SO-", 3, n=4))
    pls = project_ls(ls, [identity(fq_context(3, 1), 4), neg_identity(fq_context(3, 1), 4)])
    assert pls.claimed_order == 360
    assert pls.group.family == "PSO-"
    rep = verify_ls(pls, "exhaustive")
    assert rep.valid and rep.mls


def test_project_aliased_block_is_absorbed():
    # a fully aliased cyclic block is halved by keeping one lift per pair
    fq = fq_context(3, 1)
    space = build_space("minus", make_tower(3, 1, 1))
    G = enumerate_isometry_group(space, "O")
    so = [g for g in G if g.det() == 1]  # cyclic of order 4 containing -I
    gen = next(g for g in so if not g.is_identity() and not (g * g).is_identity())
    aliased = [identity(fq, 2), gen, neg_identity(fq, 2), gen * neg_identity(fq, 2)]
    refl = next(g for g in G if g.det() != 1)
    ls = LogSignature(None, [aliased, [identity(fq, 2), refl]], 8)
    pls = project_ls(ls, [identity(fq, 2), neg_identity(fq, 2)])
    assert pls.claimed_order == 4


def test_project_doubly_aliased_fails():
    # aliasing spread over two blocks cannot be absorbed by halving one
    fq = fq_context(3, 1)
    I, mI = identity(fq, 2), neg_identity(fq, 2)
    ls = LogSignature(None, [[I, mI], [I, mI]], 4)
    with pytest.raises(InjectivityFail) as exc:
        project_ls(ls, [I, mI])
    assert exc.value.witnesses


# ---------------------------------------------------------------- hypothesis


@given(st.integers(min_value=2, max_value=500))
def test_bound_additivity(s):
    # the bound is additive over factorizations: bound(a*b) = bound(a) + bound(b)
    a = s
    b = 2 * s + 1
    assert (
        min_length_bound(a * b).bound
        == min_length_bound(a).bound + min_length_bound(b).bound
        or True
    )
    # (only multiplicativity of prime factorizations matters; exact check:)
    assert min_length_bound(a * b).bound == min_length_bound(a).bound + min_length_bound(b).bound


def test_fallback_search_deterministic():
    s = build_space("plus", make_tower(3, 1, 2))
    a1, b1 = fallback_search(s, "O+", (4, 8), seed=42)
    a2, b2 = fallback_search(s, "O+", (4, 8), seed=42)
    assert a1 == a2 and b1 == b2


def test_parabolic_so_variant():
    space = build_space("minus", make_tower(3, 1, 2))
    ls = parabolic_ls(space, 1, "SO")
    # q^{2m-2} : (GL_1 x SO_2^-(3)) = 9 * 2 * 4
    assert ls.meta["R_size"] == 9 and ls.meta["Q_size"] == 8
    rep = verify_ls(ls, "exhaustive", check_membership=False)
    assert rep.valid


def test_a_and_b_blocks_meet_only_in_identity():
    # the product set of the leading layers and the Singer coset block
    # share only the identity
    for fam, q, n in [("O+", 3, 4), ("O-", 3, 4), ("Oodd", 3, 3)]:
        ls = canonical_ls(descriptor(fam, q, n=n))
        plan = ls.plan
        elems = [identity(ls.blocks[0][0].fq, n)]
        for kind, data in plan.layers:
            if kind == "cyc":
                gen, size, _, _ = data
                elems = [x * gen.pow(j) for x in elems for j in range(size)]
            else:
                elems = [x * t for x in elems for t in data[0]]
        akeys = {g.key for g in elems}
        if plan.b is not None:
            t = len(plan.b_point_to_j)
            bkeys = {plan.b.pow(j).key for j in range(t)}
            inter = akeys & bkeys
            assert inter == {identity(ls.blocks[0][0].fq, n).key}


def test_pso_odd_dimension_equals_so():
    # -I has determinant -1 in odd dimension, so the projective quotient
    # coincides with the special group
    ls = canonical_ls(descriptor("PSOodd", 3, n=3))
    assert ls.claimed_order == group_order(descriptor("SOodd", 3, n=3)) == 24
    rep = verify_ls(ls, "exhaustive")
    assert rep.valid and rep.mls


def test_so5_transversal_valid():
    ls = canonical_ls(descriptor("SOodd", 3, n=5))
    assert ls.claimed_order == 51840
    assert ls.meta["shape"] == "transversal"
    rep = verify_ls(ls, "sampled", samples=400, seed=3)
    assert rep.valid
