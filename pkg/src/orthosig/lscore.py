"""Logarithmic signatures: the data type, the minimal-length bound, cyclic
set refinement, the geometric block constructions for the orthogonal
families, projection to projective quotients, and verification.

A canonical signature for O/SO is assembled stage by stage: a block A
mapping a base totally singular subspace onto the members of a verified
partial spread that partitions the singular points, a Singer coset block B
acting on the base subspace, and the point stabilizer expanded as
[Siegel p-blocks, GL1 block, recursive sub-signature].  Every stage is
verified at construction time; when a literal cyclic block fails its
sharp-transitivity assertions the construction falls back, first to a
twisted torus layering and finally to a Schreier transversal over the
point set (always valid and tame, no longer minimal).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .fields import factorint, fq_context, make_tower
from .matgroups import (
    ConstructionMismatch,
    GroupDescriptor,
    Mat,
    block_diag,
    descriptor,
    element_order,
    group_order,
    identity,
    mulclose,
    neg_identity,
    singer_generator,
    standard_generators,
)
from . import forms
from .forms import QuadraticSpace, build_line_space, build_space
from . import spreads as spr
from .spreads import PartialSpread, Subspace, act_subspace, subspace


class LsError(RuntimeError):
    pass


class InjectivityFail(LsError):
    def __init__(self, msg, witnesses=None):
        super().__init__(msg)
        self.witnesses = witnesses or []


class SearchNotFound(LsError):
    pass


class UnsupportedFamily(LsError):
    pass


# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LengthBound:
    order: int
    bound: int


def min_length_bound(order: int) -> LengthBound:
    """Sum of a_j * p_j over the prime factorization of the order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return LengthBound(order, sum(a * p for p, a in factorint(order).items()) if order > 1 else 0)


@dataclass
class LogSignature:
    """Ordered blocks of group elements with unique-product coverage."""

    group: GroupDescriptor | None
    blocks: list
    claimed_order: int
    meta: dict = dc_field(default_factory=dict)
    plan: object = None  # decoder, not serialized

    def __post_init__(self):
        prod = 1
        for b in self.blocks:
            if not b:
                raise LsError("empty block")
            prod *= len(b)
        if prod != self.claimed_order:
            raise LsError(f"block sizes multiply to {prod}, claimed {self.claimed_order}")

    @property
    def length(self):
        return sum(len(b) for b in self.blocks)

    def block_sizes(self):
        return [len(b) for b in self.blocks]

    def to_json(self):
        return {
            "group": self.group.to_json() if self.group else None,
            "claimed_order": self.claimed_order,
            "blocks": [[m.to_json() for m in b] for b in self.blocks],
            "meta": {k: v for k, v in self.meta.items() if _jsonable(v)},
        }


def _jsonable(v):
    return isinstance(v, (str, int, float, bool, list, dict, type(None)))


# ----------------------------------------------------------------------
# cyclic sets


def _mixed_radices(s: int) -> list[int]:
    out = []
    for p, a in sorted(factorint(s).items()):
        out.extend([p] * a)
    return out


def cyclic_blocks(x: Mat, s: int) -> tuple[list, list[int]]:
    """Prime-size blocks {x^(j*M_t)} realizing the cyclic set {x^i : i < s}."""
    if s <= 0:
        raise LsError("cyclic set size must be positive")
    if s == 1:
        return [], []
    radices = _mixed_radices(s)
    blocks = []
    M = 1
    for r in radices:
        step = x.pow(M)
        blocks.append([step.pow(j) for j in range(r)])
        M *= r
    return blocks, radices


def cyclic_set_mls(x: Mat, s: int) -> LogSignature:
    """A minimal signature of the cyclic set {x^i : 0 <= i < s}.

    Index sums over any block choice stay below s, so products never wrap:
    the set is covered uniquely.
    """
    cap = s if s > 0 else 1
    ord_x = element_order(x, max(cap, 1) * 4 + 4)
    if s > ord_x:
        raise LsError(f"cyclic set size {s} exceeds element order {ord_x}")
    blocks, radices = cyclic_blocks(x, s)
    return LogSignature(None, blocks, s, meta={"set": "cyclic", "radices": radices})


def digits_of(j: int, radices) -> list[int]:
    out = []
    for r in radices:
        out.append(j % r)
        j //= r
    return out


def undigits(digs, radices) -> int:
    j = 0
    M = 1
    for d, r in zip(digs, radices):
        j += d * M
        M *= r
    return j


# ----------------------------------------------------------------------


def semidirect_ls(A: list[Mat], B: list[Mat]) -> LogSignature:
    """Two-block signature [A, B] for a product with A and B meeting in 1."""
    akeys = {a.key for a in A}
    bkeys = {b.key for b in B}
    inter = akeys & bkeys
    ident = identity(A[0].fq, A[0].n) if A else identity(B[0].fq, B[0].n)
    if inter - {ident.key}:
        raise LsError("blocks share a nonidentity element")
    prods = set()
    for a in A:
        for b in B:
            prods.add((a * b).key)
    if len(prods) != len(A) * len(B):
        raise LsError("product set collapses; not a semidirect factorization")
    blocks = [blk for blk in (list(A), list(B)) if len(blk) > 1]
    if not blocks:
        blocks = [[ident]]
        return LogSignature(None, blocks, 1, meta={"set": "semidirect"})
    return LogSignature(None, blocks, len(A) * len(B), meta={"set": "semidirect"})


# ----------------------------------------------------------------------
# stabilizer machinery (working coordinates, standard Witt frame)


def _siegel_np(fq, gram, R, u):
    """Siegel unipotent for the pair (unit_0, unit_R) of a standard frame."""
    n = gram.shape[0]
    u = np.asarray(u, dtype=np.int16)
    qu = fq.quad(gram, u)
    cols = []
    e1 = np.zeros(n, dtype=np.int16)
    e1[0] = 1
    for j in range(n):
        b = np.zeros(n, dtype=np.int16)
        b[j] = 1
        fbe = fq.bil(gram, b, e1)
        img = fq.v_add(b, fq.v_scale(fbe, u))
        img = fq.v_add(img, fq.v_scale(fq.neg(fq.bil(gram, b, u)), e1))
        img = fq.v_add(img, fq.v_scale(fq.neg(fq.mul(qu, fbe)), e1))
        cols.append(img)
    return np.ascontiguousarray(np.array(cols, dtype=np.int16).T)


def _gl1_np(fq, n, R, lam):
    m = fq.identity(n)
    m[0, 0] = lam
    m[R, R] = fq.inv(lam)
    return np.ascontiguousarray(m)


# ----------------------------------------------------------------------
# the construction ladder for the A part


@dataclass
class SpreadPlan:
    shape: str                   # empty | literal | cyclic | twisted | transversal
    W0: Subspace | None
    members: PartialSpread | None
    layers: list                 # [("cyc", Mat gen, size)] or [("trans", [Mat])]
    member_index: dict           # member key -> coarse index tuple
    point_member: dict           # point key -> member key
    literal_ok: bool
    notes: list
    partition: dict | None


def _default_w0(space: QuadraticSpace, r: int) -> Subspace:
    rows = [space.e_vec(i) for i in range(r)]
    return subspace(space.fq, rows)


@lru_cache(maxsize=None)
def _ts_orbit_cached(space_id, r, det1):
    space = forms._SPACES[space_id]
    gens = forms.so_generators(space) if det1 else forms.o_generators(space)
    W0 = _default_w0(space, r)
    reps = spr.schreier_transversal(W0, gens, act_subspace, lambda s: s.key)
    return reps


def ts_subspace_transporters(space, r, det1):
    """Transporters from the default base to every totally singular r-space
    reachable in the chosen group (all of them, by Witt transitivity)."""
    return _ts_orbit_cached(forms._space_id(space), r, det1)


def _orbit_of(space, g, W0, cap):
    out = [W0]
    seen = {W0.key}
    cur = W0
    for _ in range(cap):
        cur = act_subspace(g, cur)
        if cur.key in seen:
            break
        seen.add(cur.key)
        out.append(cur)
    return out


def _try_partition(space, members, L):
    try:
        sp = PartialSpread(list(members), space.fq)
        sp.check_pairwise()
    except spr.NotAPartialSpread:
        return None, None
    rep = spr.verify_partition(sp, L, space.fq)
    if not rep["ok"]:
        return None, None
    return sp, rep


def _try_cyclic(space, g, M, W0, L):
    orbit = _orbit_of(space, g, W0, M + 1)
    if len(orbit) != M:
        return None
    sp, rep = _try_partition(space, orbit, L)
    if sp is None:
        return None
    member_index = {s.key: (j,) for j, s in enumerate(orbit)}
    return SpreadPlan("cyclic", W0, sp, [("cyc", g, M)], member_index, {},
                      False, [], rep)


def _try_twisted(space, a, M, W0, L, transporters):
    orbit1 = _orbit_of(space, a, W0, M + 1)
    s = len(orbit1)
    if s == 0 or 2 * s != M:
        return None
    keys1 = {o.key for o in orbit1}
    try:
        sp1 = PartialSpread(list(orbit1), space.fq)
        sp1.check_pairwise()
    except spr.NotAPartialSpread:
        return None
    Lkeys = {v.tobytes() for v in L}
    covered = set()
    for memb in orbit1:
        for v in spr.span_points(space.fq, memb):
            k = v.tobytes()
            if k in Lkeys:
                covered.add(k)
    uncovered = Lkeys - covered
    for xkey in transporters:
        if xkey in keys1:
            continue
        X = Subspace(tuple(tuple(int(c) for c in row) for row in
                           np.frombuffer(xkey, dtype=np.int16).reshape(-1, space.n)), xkey)
        xpts = {v.tobytes() for v in spr.span_points(space.fq, X)} & Lkeys
        if not xpts <= uncovered:
            continue
        orbit2 = _orbit_of(space, a, X, M + 1)
        if len(orbit2) != s:
            continue
        if {o.key for o in orbit2} & keys1:
            continue
        sp, rep = _try_partition(space, orbit1 + orbit2, L)
        if sp is None:
            continue
        kappa = transporters[xkey]
        member_index = {}
        for j, o in enumerate(orbit1):
            member_index[o.key] = (j, 0)
        for j, o in enumerate(orbit2):
            member_index[o.key] = (j, 1)
        layers = [("cyc", a, s), ("cyc", kappa, 2)]
        return SpreadPlan("twisted", W0, sp, layers, member_index, {},
                          False, [], rep)
    return None


def _try_transversal(space, L, det1):
    fq = space.fq
    gens = forms.so_generators(space) if det1 else forms.o_generators(space)
    w0 = L[0]
    reps = spr.schreier_transversal(
        w0, gens, lambda g, v: space.canon(g.act(v)), lambda v: v.tobytes()
    )
    keys = [v.tobytes() for v in L]
    if set(keys) != set(reps):
        raise LsError("group is not transitive on the singular points")
    order_keys = [w0.tobytes()] + [k for k in keys if k != w0.tobytes()]
    elems = [reps[k] for k in order_keys]
    members = [subspace(fq, [np.frombuffer(k, dtype=np.int16)]) for k in order_keys]
    sp = PartialSpread(members, fq)
    rep = spr.verify_partition(sp, L, fq)
    member_index = {m.key: (j,) for j, m in enumerate(members)}
    W0 = members[0]
    return SpreadPlan("transversal", W0, sp, [("trans", elems)], member_index,
                      {}, False, [], rep)


_ELEMENT_SCAN_CAP = 2500


def _scan_for_cyclic(space, M, W0cands, L, det1, notes):
    if M > 32:
        return None
    gens = forms.so_generators(space) if det1 else forms.o_generators(space)
    if not gens:
        return None
    count = 0
    seen = {identity(space.fq, space.n).key}
    frontier = [identity(space.fq, space.n)]
    while frontier and count < _ELEMENT_SCAN_CAP:
        new = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y.key in seen:
                    continue
                seen.add(y.key)
                new.append(y)
                count += 1
                for W0 in W0cands:
                    plan = _try_cyclic(space, y, M, W0, L)
                    if plan:
                        notes.append("sharply transitive cyclic block found by element scan")
                        return plan
                if count >= _ELEMENT_SCAN_CAP:
                    break
            if count >= _ELEMENT_SCAN_CAP:
                break
        frontier = new
    return None


_SPREAD_CACHE: dict = {}


def spread_construction(space: QuadraticSpace, family: str) -> SpreadPlan:
    """Verified partial-spread layer for the given family on this space.

    Tries the literal cyclic block first, then a cyclic block found by a
    bounded deterministic scan, then the twisted half-orbit layering, and
    finally the always-valid transversal over the trivial point spread.
    """
    cache_key = (id(space), family.startswith("SO"))
    if cache_key in _SPREAD_CACHE:
        return _SPREAD_CACHE[cache_key]
    plan = _spread_construction(space, family)
    _SPREAD_CACHE[cache_key] = plan
    return plan


def _spread_construction(space: QuadraticSpace, family: str) -> SpreadPlan:
    kind = space.kind
    q, m = space.q, space.m
    L = space.isotropic_points()
    det1 = family.startswith("SO")
    notes = []
    if not L:
        return SpreadPlan("empty", None, None, [], {}, {}, True, notes, None)
    r = {"minus": m - 1, "plus": m, "odd": m}[kind]
    lit = None
    if r >= 1 and space.n >= 3:
        try:
            fam_tag = {"minus": "-", "plus": "+", "odd": "odd"}[kind]
            desc = descriptor(("SO" if det1 else "O") + fam_tag, q, n=space.n)
            lit_a, _lit_b, gnotes = standard_generators(desc, space)
            notes.extend(gnotes)
            lit = lit_a
        except ConstructionMismatch as exc:
            notes.append(f"literal generator construction failed: {exc}")
    elif r >= 1:
        notes.append("no literal cyclic recipe applies at this rank; block found by search")
    plan = None
    if r >= 1:
        M = len(L) * (q - 1) // (q ** r - 1)
        transporters = ts_subspace_transporters(space, r, det1)
        W0cands = [_default_w0(space, r)]
        for key in transporters:
            if key != W0cands[0].key:
                W0cands.append(Subspace(
                    tuple(tuple(int(c) for c in row) for row in
                          np.frombuffer(key, dtype=np.int16).reshape(-1, space.n)), key))
        if lit is not None:
            for W0 in W0cands:
                plan = _try_cyclic(space, lit, M, W0, L)
                if plan:
                    plan.shape = "literal"
                    plan.literal_ok = True
                    break
            if plan is None:
                notes.append(
                    "literal cyclic block is not sharply transitive on any "
                    "totally singular base orbit (construction mismatch)"
                )
        if plan is None:
            plan = _scan_for_cyclic(space, M, W0cands[:2], L, det1, notes)
        if plan is None and lit is not None:
            for W0 in W0cands:
                plan = _try_twisted(space, lit, M, W0, L, transporters)
                if plan:
                    notes.append(
                        "using twisted layering: half torus orbit times an "
                        "orbit-moving twist element"
                    )
                    break
        if plan is None:
            notes.append(
                f"no {M}-member spread of {r}-dimensional totally singular "
                "subspaces admits a layered block here; degrading to the "
                "trivial point spread with a transversal block"
            )
    if plan is None:
        plan = _try_transversal(space, L, det1)
    plan.notes = notes + plan.notes
    plan.point_member = _point_member_map(space, plan)
    return plan


def _point_member_map(space, plan):
    out = {}
    if plan.members is None:
        return out
    Lkeys = {v.tobytes() for v in space.isotropic_points()}
    for memb in plan.members.members:
        for v in spr.span_points(space.fq, memb):
            k = v.tobytes()
            if k in Lkeys:
                out[k] = memb.key
    return out


# ----------------------------------------------------------------------
# frame adaptation


def _witt_with_prescribed(fq, G, prescribed):
    """Witt frame whose leading e-slots span the prescribed totally singular
    rows; returns the basis matrix (columns)."""
    n = G.shape[0]
    comp = [np.eye(n, dtype=np.int16)[i] for i in range(n)]
    pres = [np.array(v, dtype=np.int16, copy=True) for v in prescribed]

    def bil(u, v):
        return fq.bil(G, u, v)

    def quad(v):
        return fq.quad(G, v)

    pairs = []
    while True:
        k = len(comp)
        if pres:
            sing = pres.pop(0)
            if quad(sing) != 0:
                raise LsError("prescribed vector is not singular")
        else:
            sing = None
            for coeffs in forms._canonical_coeffs(fq.q, k):
                v = forms._combo(fq, coeffs, comp)
                if quad(v) == 0:
                    sing = v
                    break
            if sing is None:
                break
        partner = None
        for coeffs in forms._canonical_coeffs(fq.q, k):
            u = forms._combo(fq, coeffs, comp)
            if bil(sing, u) != 0:
                partner = u
                break
        if partner is None:
            raise LsError("cannot complete hyperbolic pair")
        s = fq.inv(bil(sing, partner))
        partner = fq.v_scale(s, partner)
        qq = quad(partner)
        if qq:
            partner = fq.v_add(partner, fq.v_scale(fq.neg(qq), sing))
        pairs.append((sing, partner))
        new_comp = []
        for w in comp:
            w2 = fq.v_add(w, fq.v_scale(fq.neg(bil(w, partner)), sing))
            w2 = fq.v_add(w2, fq.v_scale(fq.neg(bil(w2, sing)), partner))
            new_comp.append(w2)
        R, piv = fq.rref(np.array(new_comp, dtype=np.int16))
        comp = [R[i] for i in range(len(piv))]
        new_pres = []
        for w in pres:
            w2 = fq.v_add(w, fq.v_scale(fq.neg(bil(w, partner)), sing))
            w2 = fq.v_add(w2, fq.v_scale(fq.neg(bil(w2, sing)), partner))
            new_pres.append(w2)
        pres = new_pres
    R = len(pairs)
    cols = [p[0] for p in pairs] + [p[1] for p in pairs] + comp
    T = np.ascontiguousarray(np.array(cols, dtype=np.int16).T)
    if fq.rank(T) != n:
        raise LsError("adapted frame is degenerate")  # pragma: no cover
    return T, R


# ----------------------------------------------------------------------
# canonical signatures


class _TablePlan:
    """Base-case decoder: full product table (tiny groups only)."""

    def __init__(self, blocks, fq, quotient=False):
        self.blocks = blocks
        self.fq = fq
        self.table = {}
        sizes = [len(b) for b in blocks]
        for iv in itertools.product(*[range(s) for s in sizes]):
            g = None
            for b, i in zip(blocks, iv):
                g = b[i] if g is None else g * b[i]
            if g is None:
                continue
            key = g.key
            if key in self.table:
                raise LsError("base-case products collide")
            self.table[key] = list(iv)
        if not blocks:
            self.table[identity(fq, 1).key] = []

    def decode(self, g: Mat, stats=None):
        if stats is not None:
            stats["lookups"] = stats.get("lookups", 0) + 1
        try:
            return list(self.table[g.key])
        except KeyError:
            raise LsError("element is not covered by this signature")


class _StagePlan:
    """Decoder for one geometric stage plus its recursive tail."""

    def __init__(self, space, desc, sp_plan, stage):
        self.space = space
        self.desc = desc
        self.fq = space.fq
        self.sp = sp_plan
        for k, v in stage.items():
            setattr(self, k, v)

    def decode(self, g: Mat, stats=None):
        fq = self.fq
        if stats is not None:
            stats["mults"] = stats.get("mults", 0)
        out = []
        h = g
        pt = self.space.canon(g.act(self.w_gl))
        mk = self.sp.point_member.get(pt.tobytes())
        if mk is None:
            raise LsError("element does not move the base point inside the singular set")
        coarse = self.sp.member_index[mk]
        for (layer, idx) in zip(self.layers, coarse):
            kind, data = layer
            if kind == "cyc":
                gen, size, radices, inv_pows = data
                out.extend(digits_of(idx, radices))
                h = inv_pows[idx] * h
            else:
                elems, invs = data
                out.append(idx)
                h = invs[idx] * h
            if stats is not None:
                stats["mults"] += 1
        if self.b is not None:
            ptb = self.space.canon(h.act(self.w_gl))
            j = self.b_point_to_j.get(ptb.tobytes())
            if j is None:
                raise LsError("stripped element leaves the base subspace")
            out.extend(digits_of(j, self.b_radices))
            h = self.b_inv_pows[j] * h
            if stats is not None:
                stats["mults"] += 1
        hw = h.a if self.T is None else fq.mat_mul(fq.mat_mul(self.Tinv, h.a), self.T)
        n, R = self.space.n, self.Rwork
        lam = int(hw[0, 0])
        if lam == 0:
            raise LsError("element does not stabilize the base point")
        col0 = np.zeros(n, dtype=np.int16)
        col0[0] = lam
        if not np.array_equal(hw[:, 0], col0):
            raise LsError("element does not stabilize the base point")
        gidx = self.gl1_dlog[lam]
        y0 = fq.v_scale(lam, np.ascontiguousarray(hw[:, R]))
        u = np.zeros(n, dtype=np.int16)
        for pos in self.SP:
            u[pos] = y0[pos]
        for pos in self.SP:
            out.extend(self.fq.gf.coeffs(int(u[pos])))
        out.extend(digits_of(gidx, self.gl1_radices))
        rho_inv = _siegel_np(fq, self.work_gram, R, fq.v_neg(u))
        d_inv = _gl1_np(fq, n, R, fq.inv(lam))
        yw = fq.mat_mul(d_inv, fq.mat_mul(rho_inv, hw))
        if stats is not None:
            stats["mults"] += 3
        unit_rows = np.zeros(n, dtype=np.int16)
        for probe in (0, R):
            col = np.zeros(n, dtype=np.int16)
            col[probe] = 1
            if not np.array_equal(yw[:, probe], col) or not np.array_equal(yw[probe, :], col):
                raise LsError("stabilizer residue is not block diagonal")
        ysub = np.ascontiguousarray(yw[np.ix_(self.SP, self.SP)])
        ymodel = fq.mat_mul(fq.mat_mul(self.phi_inv, ysub), self.phi)
        out.extend(self.sub.plan.decode(Mat(fq, ymodel), stats))
        return out


_CANONICAL_CACHE: dict = {}


def space_for(desc: GroupDescriptor) -> QuadraticSpace:
    if desc.n == 1:
        return build_line_space(desc.p, desc.e)
    m_tower = desc.m if desc.kind != "odd" else (desc.n - 1) // 2
    m_tower = max(m_tower, 1)
    return build_space(desc.kind, make_tower(desc.p, desc.e, m_tower))


def canonical_ls(desc: GroupDescriptor) -> LogSignature:
    """The canonical tame signature for the descriptor.

    Supports the O and SO families directly and the PSO families through
    projection.  Minimal length is achieved whenever the layered spread
    construction succeeds; the transversal fallback stays valid and tame
    but leaves one unrefined block (reported in meta).
    """
    key = (desc.family, desc.q, desc.n)
    if key in _CANONICAL_CACHE:
        return _CANONICAL_CACHE[key]
    base = desc.base_family()
    if base == "PSO":
        inner = canonical_ls(descriptor("SO" + desc.family[3:], desc.q, n=desc.n))
        fqc = fq_context(desc.p, desc.e)
        center = [identity(fqc, desc.n)]
        if desc.n % 2 == 0:
            # -I lies in SO only in even dimension
            center.append(neg_identity(fqc, desc.n))
        ls = project_ls(inner, center)
        if desc.n % 2 == 1:
            ls = LogSignature(descriptor("P" + inner.group.family, desc.q, n=desc.n),
                              ls.blocks, ls.claimed_order, meta=dict(ls.meta))
            ls.plan = inner.plan
        _CANONICAL_CACHE[key] = ls
        return ls
    if base not in ("O", "SO"):
        raise UnsupportedFamily(
            f"canonical construction covers O, SO and PSO families, not {desc.family}"
        )
    if desc.n <= 2:
        ls = _base_case_ls(desc)
    else:
        ls = _staged_ls(desc)
    if ls.claimed_order != group_order(desc):
        raise LsError("constructed signature does not match the group order")  # pragma: no cover
    _CANONICAL_CACHE[key] = ls
    return ls


def _base_case_ls(desc: GroupDescriptor) -> LogSignature:
    space = space_for(desc)
    fq = space.fq
    base = desc.base_family()
    if desc.n == 1:
        blocks = [[identity(fq, 1), neg_identity(fq, 1)]] if base == "O" else []
        claimed = 2 if base == "O" else 1
        ls = LogSignature(desc, blocks, claimed, meta={"shape": "base", "kind": desc.kind, "minimal": True})
        ls.plan = _TablePlan(blocks, fq)
        return ls
    els = forms.enumerate_isometry_group(space, "O")
    so = [g for g in els if g.det() == 1]
    target = len(so)
    gen = None
    for g in sorted(so, key=lambda x: x.key):
        try:
            if element_order(g, target) == target:
                gen = g
                break
        except Exception:
            continue
    if gen is None:
        raise LsError("rank-1 special orthogonal group is not cyclic here")  # pragma: no cover
    cyc, radices = cyclic_blocks(gen, target)
    blocks = list(cyc)
    if base == "O":
        refl = sorted((g for g in els if g.det() != 1), key=lambda x: x.key)
        blocks = blocks + [[identity(fq, 2), refl[0]]]
    claimed = target * (2 if base == "O" else 1)
    ls = LogSignature(desc, blocks, claimed, meta={"shape": "base", "kind": desc.kind, "minimal": True})
    ls.plan = _TablePlan(blocks, fq)
    return ls


def _staged_ls(desc: GroupDescriptor) -> LogSignature:
    space = space_for(desc)
    fq = space.fq
    base = desc.base_family()
    sp_plan = spread_construction(space, base + {"minus": "-", "plus": "+", "odd": "odd"}[desc.kind])
    notes = list(sp_plan.notes)
    blocks: list = []
    layers_meta = []

    # A layers
    stage_layers = []
    for layer in sp_plan.layers:
        if layer[0] == "cyc":
            _, gen, size = layer
            cyc, radices = cyclic_blocks(gen, size)
            blocks.extend(cyc)
            inv_pows = [gen.pow(-j) for j in range(size)]
            stage_layers.append(("cyc", (gen, size, radices, inv_pows)))
            layers_meta.append({"type": "cyclic", "size": size, "radices": radices})
        else:
            _, elems = layer
            blocks.append(list(elems))
            invs = [g.inv() for g in elems]
            stage_layers.append(("trans", (elems, invs)))
            layers_meta.append({"type": "transversal", "size": len(elems)})

    # adapted frame
    W0 = sp_plan.W0
    T0, Rw = _witt_with_prescribed(fq, space.gram, [np.asarray(r, dtype=np.int16) for r in W0.rows])
    if Rw != space.witt_index:
        raise LsError("adapted frame lost hyperbolic pairs")  # pragma: no cover
    T, Tinv = T0, fq.mat_inv(T0)
    work_gram = fq.mat_mul(fq.mat_mul(np.ascontiguousarray(T0.T), space.gram), T0)
    Rwork = space.witt_index
    n = space.n

    def globalize(mw):
        if T is None:
            return Mat(fq, mw)
        return Mat(fq, fq.mat_mul(fq.mat_mul(T, mw), Tinv))

    w_gl = np.asarray(W0.rows[0], dtype=np.int16)

    # B block: Singer coset representatives acting on W0
    r_dim = W0.dim
    t = (space.q ** r_dim - 1) // (space.q - 1)
    b_gl = None
    b_radices = []
    b_inv_pows = []
    b_point_to_j = {}
    if t > 1:
        D = singer_generator(r_dim, fq)
        bw = fq.identity(n)
        Dti = D.transpose_inv()
        bw[:r_dim, :r_dim] = D.a
        bw[Rwork:Rwork + r_dim, Rwork:Rwork + r_dim] = Dti.a
        bw = np.ascontiguousarray(bw)
        if not np.array_equal(
            fq.mat_mul(fq.mat_mul(np.ascontiguousarray(bw.T), work_gram), bw), work_gram
        ):
            raise LsError("Singer block is not an isometry of the working frame")
        b_gl = globalize(bw)
        if element_order(b_gl, space.q ** r_dim) != space.q ** r_dim - 1:
            raise LsError("Singer block has the wrong order")
        cycb, b_radices = cyclic_blocks(b_gl, t)
        blocks.extend(cycb)
        b_inv_pows = [b_gl.pow(-j) for j in range(t)]
        cur = w_gl
        for j in range(t):
            keyp = space.canon(cur).tobytes()
            if keyp in b_point_to_j:
                raise LsError("Singer coset block is not sharply transitive")
            b_point_to_j[keyp] = j
            cur = b_gl.act(cur)
        wpts = {v.tobytes() for v in spr.span_points(fq, W0)}
        if set(b_point_to_j) != wpts:
            raise LsError("Singer coset block misses points of the base subspace")
    else:
        b_point_to_j = {space.canon(w_gl).tobytes(): 0}

    # Siegel blocks
    SP = list(range(1, Rwork)) + list(range(Rwork + 1, 2 * Rwork)) + list(range(2 * Rwork, n))
    theta_codes = [fq.gf.from_coeffs([0] * i + [1]) for i in range(fq.e)]
    for pos in SP:
        for th in theta_codes:
            blk = []
            for c in range(fq.p):
                u = np.zeros(n, dtype=np.int16)
                u[pos] = fq.mul(c % fq.q, th)
                blk.append(globalize(_siegel_np(fq, work_gram, Rwork, u)))
            blocks.append(blk)

    # GL1 block
    mu = fq.generator
    d_mu = globalize(_gl1_np(fq, n, Rwork, mu))
    gcyc, gl1_radices = cyclic_blocks(d_mu, space.q - 1)
    blocks.extend(gcyc)
    gl1_dlog = {}
    cur = 1
    for k in range(space.q - 1):
        gl1_dlog[cur] = k
        cur = fq.mul(cur, mu)

    # recursive tail on the model space of dimension n - 2
    sub_desc = descriptor(desc.family, desc.q, n=desc.n - 2)
    sub_ls = canonical_ls(sub_desc)
    sub_space = space_for(sub_desc)
    sub_gram = np.ascontiguousarray(work_gram[np.ix_(SP, SP)])
    phi, lam = forms.align_spaces(sub_space, sub_gram, fq)
    phi_inv = fq.mat_inv(phi)
    for blk in sub_ls.blocks:
        emb = []
        for x in blk:
            xs = fq.mat_mul(fq.mat_mul(phi, x.a), phi_inv)
            full = fq.identity(n)
            full[np.ix_(SP, SP)] = xs
            emb.append(globalize(np.ascontiguousarray(full)))
        blocks.append(emb)

    claimed = 1
    for b in blocks:
        claimed *= len(b)
    expected = group_order(desc)
    if claimed != expected:
        raise LsError(f"stage sizes multiply to {claimed}, group order is {expected}")

    ls = LogSignature(desc, blocks, claimed, meta={
        "shape": sp_plan.shape,
        "literal_block_ok": sp_plan.literal_ok,
        "notes": notes,
        "a_layers": layers_meta,
        "similarity_scale": int(lam),
        "minimal": sp_plan.shape != "transversal" and bool(sub_ls.meta.get("minimal")),
    })
    stage = dict(
        layers=stage_layers,
        w_gl=w_gl,
        b=b_gl,
        b_radices=b_radices,
        b_inv_pows=b_inv_pows,
        b_point_to_j=b_point_to_j,
        T=T,
        Tinv=Tinv,
        work_gram=work_gram,
        Rwork=Rwork,
        SP=SP,
        gl1_dlog=gl1_dlog,
        gl1_radices=gl1_radices,
        phi=phi,
        phi_inv=phi_inv,
        sub=sub_ls,
    )
    ls.plan = _StagePlan(space, desc, sp_plan, stage)
    return ls


# ----------------------------------------------------------------------
# parabolic subgroups


def parabolic_ls(space: QuadraticSpace, k: int, family: str = "O") -> LogSignature:
    """[R, Q]: unipotent radical and Levi blocks of the stabilizer of a
    totally singular k-space.
    """
    if not 1 <= k <= space.witt_index:
        raise LsError(f"k = {k} exceeds the Witt index {space.witt_index}")
    fq = space.fq
    n, R = space.n, space.witt_index
    q = space.q
    # unipotent radical: closure of pairwise Eichler maps
    gens = []
    mid_pos = list(range(k, R)) + list(range(R + k, 2 * R)) + list(range(2 * R, n))
    for i in range(k):
        upos = [j for j in range(k) if j != i] + mid_pos
        for pos in upos:
            for th in [fq.gf.from_coeffs([0] * t + [1]) for t in range(fq.e)]:
                u = np.zeros(n, dtype=np.int16)
                u[pos] = th
                gens.append(Mat(fq, _siegel_pair_np(fq, space.gram, R, i, u)))
    Rgrp = mulclose(gens) if gens else [identity(fq, n)]
    expected_R = q ** (k * (k - 1) // 2 + k * (n - 2 * k))
    if len(Rgrp) != expected_R:
        raise LsError(f"unipotent radical has size {len(Rgrp)}, expected {expected_R}")
    # Levi: GL_k x O(middle)
    gl = _all_gl(fq, k)
    mid_gram = np.ascontiguousarray(space.gram[np.ix_(mid_pos, mid_pos)])
    mid_space = QuadraticSpace(space.kind, space.tower, fq, mid_gram) if len(mid_pos) >= 2 else None
    if len(mid_pos) == 0:
        mids = [fq.identity(0)]
        mid_mats = [identity(fq, n)]
    else:
        if mid_space is not None:
            mid_els = forms.enumerate_isometry_group(mid_space, "O")
        else:
            mid_els = [identity(fq, 1), neg_identity(fq, 1)]
        if family.startswith("SO"):
            mid_els = [g for g in mid_els if g.det() == 1]
        mid_mats = []
        for g in mid_els:
            full = fq.identity(n)
            full[np.ix_(mid_pos, mid_pos)] = g.a
            mid_mats.append(Mat(fq, np.ascontiguousarray(full)))
    Qblk = []
    for D in gl:
        Dti = Mat(fq, fq.mat_inv(np.ascontiguousarray(D.T)))
        DM = fq.identity(n)
        DM[:k, :k] = D
        DM[R:R + k, R:R + k] = Dti.a
        DMm = Mat(fq, np.ascontiguousarray(DM))
        for mm in mid_mats:
            Qblk.append(DMm * mm)
    rk = {g.key for g in Rgrp}
    qk = {g.key for g in Qblk}
    inter = rk & qk
    if inter != {identity(fq, n).key}:
        raise LsError("R and Q overlap beyond the identity")
    ls = LogSignature(None, [list(Rgrp), Qblk], len(Rgrp) * len(Qblk),
                      meta={"shape": "parabolic", "k": k, "family": family,
                            "R_size": len(Rgrp), "Q_size": len(Qblk)})
    return ls


def _siegel_pair_np(fq, gram, R, i, u):
    """Eichler map for the pair (unit_i, unit_{R+i})."""
    n = gram.shape[0]
    u = np.asarray(u, dtype=np.int16)
    ei = np.zeros(n, dtype=np.int16)
    ei[i] = 1
    qu = fq.quad(gram, u)
    cols = []
    for j in range(n):
        b = np.zeros(n, dtype=np.int16)
        b[j] = 1
        fbe = fq.bil(gram, b, ei)
        img = fq.v_add(b, fq.v_scale(fbe, u))
        img = fq.v_add(img, fq.v_scale(fq.neg(fq.bil(gram, b, u)), ei))
        img = fq.v_add(img, fq.v_scale(fq.neg(fq.mul(qu, fbe)), ei))
        cols.append(img)
    return np.ascontiguousarray(np.array(cols, dtype=np.int16).T)


def _all_gl(fq, k):
    out = []
    for entries in itertools.product(range(fq.q), repeat=k * k):
        D = np.array(entries, dtype=np.int16).reshape(k, k)
        if fq.det(D) != 0:
            out.append(D)
    return out


# ----------------------------------------------------------------------
# projection to projective quotients


def canonical_lift(g: Mat) -> Mat:
    h = neg_identity(g.fq, g.n) * g
    return g if g.key <= h.key else h


def project_ls(ls: LogSignature, center: list[Mat]) -> LogSignature:
    """Blockwise image under the quotient by a central subgroup of order
    at most two, with one block halved so sizes match the quotient order.
    """
    if len(center) == 1:
        out = LogSignature(ls.group, [list(b) for b in ls.blocks], ls.claimed_order,
                           meta=dict(ls.meta))
        out.plan = ls.plan
        return out
    if len(center) != 2:
        raise LsError("only central subgroups of order <= 2 are supported")
    fq = ls.blocks[0][0].fq
    n = ls.blocks[0][0].n
    minus = neg_identity(fq, n)
    if not any(c.key == minus.key for c in center):
        raise LsError("center must be {I, -I}")
    target = ls.claimed_order // 2

    aliased = []
    for t, blk in enumerate(ls.blocks):
        keys = {g.key for g in blk}
        pairs = [(g, minus * g) for g in blk if (minus * g).key in keys and g.key < (minus * g).key]
        if pairs:
            aliased.append((t, pairs))
    if len(aliased) > 1:
        raise InjectivityFail(
            "multiple blocks identify elements across the center",
            witnesses=[(t, [p[0].to_json() for p in pairs]) for t, pairs in aliased],
        )

    candidates = []
    if len(aliased) == 1:
        t, pairs = aliased[0]
        drop = {p[1].key for p in pairs}
        half = [g for g in ls.blocks[t] if g.key not in drop]
        if len(half) * 2 != len(ls.blocks[t]):
            raise InjectivityFail(
                "aliased block cannot be halved cleanly",
                witnesses=[(t, [p[0].to_json() for p in pairs])],
            )
        candidates.append((t, half))
    else:
        for t in range(len(ls.blocks) - 1, -1, -1):
            sz = len(ls.blocks[t])
            if sz % 2 == 0:
                candidates.append((t, ls.blocks[t][: sz // 2]))

    for t, half in candidates:
        blocks2 = [list(b) for b in ls.blocks]
        blocks2[t] = list(half)
        blocks2 = _fold_singletons(blocks2, fq, n)
        seen = {}
        ok = True
        sizes = [len(b) for b in blocks2]
        for iv in itertools.product(*[range(s) for s in sizes]):
            g = None
            for b, i in zip(blocks2, iv):
                g = b[i] if g is None else g * b[i]
            key = canonical_lift(g).key
            if key in seen:
                ok = False
                break
            seen[key] = iv
        if ok and len(seen) == target:
            qblocks = [[canonical_lift(g) for g in b] for b in blocks2]
            fam = ls.group.family if ls.group else None
            qdesc = None
            if fam and fam.startswith("SO"):
                qdesc = descriptor("P" + fam, ls.group.q, n=ls.group.n)
            meta = dict(ls.meta)
            meta.update({"projected": True, "halved_block": t,
                         "minimal": ls.meta.get("minimal", False)})
            return LogSignature(qdesc, qblocks, target, meta=meta)
    raise InjectivityFail("no single-block halving yields a transversal of the center")


def _fold_singletons(blocks, fq, n):
    """Remove size-1 blocks; a nonidentity singleton folds into a neighbor
    (left translation), which preserves the unique-product property."""
    out = []
    carry = None  # element to left-multiply into the next block
    for blk in blocks:
        if carry is not None:
            blk = [carry * g for g in blk]
            carry = None
        if len(blk) == 1:
            if blk[0].is_identity():
                continue
            carry = blk[0]
            continue
        out.append(blk)
    if carry is not None:
        if out:
            out[-1] = [g * carry for g in out[-1]]
        else:
            out.append([carry])
    return out


# ----------------------------------------------------------------------
# verification


@dataclass
class VerifyReport:
    valid: bool
    mode: str
    length: int
    bound: int
    mls: bool
    claimed_order: int
    products_checked: int
    collisions: list
    not_in_group: int
    seed: int | None
    notes: list

    def to_json(self):
        return {
            "valid": self.valid,
            "mode": self.mode,
            "length": self.length,
            "bound": self.bound,
            "mls": self.mls,
            "claimed_order": self.claimed_order,
            "products_checked": self.products_checked,
            "collisions": self.collisions[:3],
            "not_in_group": self.not_in_group,
            "seed": self.seed,
            "notes": self.notes,
        }


def verify_ls(ls: LogSignature, mode="exhaustive", samples=10_000, seed=42,
              budget=1_000_000, check_membership=True) -> VerifyReport:
    """Exhaustive: every index-vector product is distinct, lies in the
    group, and the count equals the claimed order.  Sampled: random index
    vectors round-trip through tame factorization.
    """
    bound = min_length_bound(ls.claimed_order).bound
    length = ls.length
    notes = []
    projective = bool(ls.group and ls.group.family.startswith(("PSO", "POmega")))
    space = None
    fam = None
    if check_membership and ls.group is not None:
        try:
            space = space_for(ls.group)
            fam = ls.group.family
        except Exception:
            notes.append("membership space unavailable; skipping membership checks")
    if mode == "exhaustive":
        if ls.claimed_order > budget:
            raise LsError(f"exhaustive verification needs claimed_order <= {budget}")
        sizes = [len(b) for b in ls.blocks]
        if ls.blocks:
            ident = identity(ls.blocks[0][0].fq, ls.blocks[0][0].n)
        elif ls.group is not None:
            ident = identity(fq_context(ls.group.p, ls.group.e), ls.group.n)
        else:
            raise LsError("cannot verify an empty signature without a descriptor")
        seen = {}
        collisions = []
        bad = 0
        count = 0
        iv = [0] * len(sizes)
        done = False
        while not done:
            g = None
            for b, i in zip(ls.blocks, iv):
                g = b[i] if g is None else g * b[i]
            if g is None:
                g = ident
            key = canonical_lift(g).key if projective else g.key
            count += 1
            if key in seen:
                collisions.append({"iv": list(iv), "other": list(seen[key])})
            else:
                seen[key] = list(iv)
            if space is not None and fam is not None:
                if not forms.membership(space, g, fam):
                    bad += 1
            for pos in range(len(sizes) - 1, -1, -1):
                iv[pos] += 1
                if iv[pos] < sizes[pos]:
                    break
                iv[pos] = 0
            else:
                done = True
            if not sizes:
                done = True
        valid = not collisions and bad == 0 and len(seen) == ls.claimed_order
        return VerifyReport(valid, mode, length, bound, valid and length == bound,
                            ls.claimed_order, count, collisions, bad, None, notes)
    if mode == "sampled":
        if ls.plan is None:
            raise LsError("sampled verification needs a decodable plan")
        rng = random.Random(seed)
        sizes = [len(b) for b in ls.blocks]
        failures = []
        for _ in range(samples):
            iv = [rng.randrange(s) for s in sizes]
            g = None
            for b, i in zip(ls.blocks, iv):
                g = b[i] if g is None else g * b[i]
            got = ls.plan.decode(g)
            if got != iv:
                failures.append({"iv": iv, "got": got})
                if len(failures) > 5:
                    break
        valid = not failures
        return VerifyReport(valid, mode, length, bound, valid and length == bound,
                            ls.claimed_order, samples, failures, 0, seed, notes)
    raise LsError(f"unknown mode {mode!r}")


# ----------------------------------------------------------------------
# strict fallback search (cyclic targets only)


def fallback_search(space: QuadraticSpace, family: str, target_orders,
                    seed=42, budget=4000):
    """Search for a literal cyclic pair (a, b) with the given orders and
    sharp actions.  Raises SearchNotFound when the budget is exhausted;
    the layered construction in spread_construction is the general
    recovery path.
    """
    ta, tb = target_orders
    L = space.isotropic_points()
    if not L:
        raise SearchNotFound("no singular points to act on")
    det1 = family.startswith("SO")
    kind = space.kind
    r = {"minus": space.m - 1, "plus": space.m, "odd": space.m}[kind]
    M = len(L) * (space.q - 1) // (space.q ** r - 1)
    gens = forms.so_generators(space) if det1 else forms.o_generators(space)
    W0 = _default_w0(space, r)
    a_found = None
    b_found = None
    count = 0
    seen = {identity(space.fq, space.n).key}
    frontier = [identity(space.fq, space.n)]
    t = (space.q ** r - 1) // (space.q - 1)
    while frontier and count < budget and (a_found is None or b_found is None):
        new = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y.key in seen:
                    continue
                seen.add(y.key)
                new.append(y)
                count += 1
                try:
                    o = element_order(y, max(ta, tb))
                except Exception:
                    o = -1
                if a_found is None and o == ta and M == ta:
                    if _try_cyclic(space, y, M, W0, L):
                        a_found = y
                if b_found is None and o == tb:
                    if _sharp_on_base(space, y, W0, t):
                        b_found = y
                if count >= budget:
                    break
            if count >= budget:
                break
        frontier = new
    if a_found is None or b_found is None:
        missing = "a" if a_found is None else "b"
        raise SearchNotFound(
            f"no cyclic {missing}-block with target orders {target_orders} "
            f"within budget {budget}"
        )
    return a_found, b_found


def _sharp_on_base(space, g, W0, t):
    if act_subspace(g, W0).key != W0.key:
        return False
    w = np.asarray(W0.rows[0], dtype=np.int16)
    seenp = set()
    cur = w
    for _ in range(t):
        k = space.canon(cur).tobytes()
        if k in seenp:
            return False
        seenp.add(k)
        cur = g.act(cur)
    wpts = {v.tobytes() for v in spr.span_points(space.fq, W0)}
    return seenp == wpts
