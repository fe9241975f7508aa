"""Subspaces in canonical echelon form, classical field spreads, orbit
partial spreads and partition verification against point sets."""

from __future__ import annotations

from dataclasses import dataclass, field
import itertools

import numpy as np

from .fields import FieldTower, FqContext
from .matgroups import Mat


class NotAPartialSpread(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class Subspace:
    """Row span in reduced echelon form; equal subspaces have equal keys."""

    rows: tuple  # tuple of tuples of int codes
    key: bytes = field(compare=False, repr=False)

    @property
    def dim(self):
        return len(self.rows)

    def basis(self):
        return np.array(self.rows, dtype=np.int16)

    def to_json(self):
        return [list(r) for r in self.rows]


def subspace(fq: FqContext, vectors) -> Subspace:
    A = np.atleast_2d(np.asarray(vectors, dtype=np.int16))
    R, piv = fq.rref(A)
    rows = tuple(tuple(int(c) for c in R[i]) for i in range(len(piv)))
    return Subspace(rows, np.array(rows, dtype=np.int16).tobytes())


def act_subspace(g: Mat, S: Subspace) -> Subspace:
    imgs = [g.act(np.asarray(r, dtype=np.int16)) for r in S.rows]
    return subspace(g.fq, imgs)


def subspace_contains(fq: FqContext, S: Subspace, v) -> bool:
    v = np.array(v, dtype=np.int16, copy=True)
    for row in S.rows:
        lead = next(i for i, c in enumerate(row) if c)
        if v[lead]:
            v = fq.v_add(v, fq.v_scale(fq.neg(int(v[lead])), np.asarray(row, dtype=np.int16)))
    return not v.any()


def span_points(fq: FqContext, S: Subspace):
    """Canonical reps of all projective points inside the subspace."""
    B = S.basis()
    out = []
    for lead in range(S.dim):
        for tail in itertools.product(range(fq.q), repeat=S.dim - lead - 1):
            coeffs = (0,) * lead + (1,) + tail
            v = np.zeros(B.shape[1], dtype=np.int16)
            for c, row in zip(coeffs, B):
                if c:
                    v = fq.v_add(v, fq.v_scale(c, row))
            nz = np.nonzero(v)[0][0]
            v = fq.v_scale(fq.inv(int(v[nz])), v)
            out.append(np.ascontiguousarray(v))
    return out


def intersect_trivially(fq: FqContext, A: Subspace, B: Subspace) -> bool:
    stacked = np.concatenate([A.basis(), B.basis()], axis=0)
    return fq.rank(stacked) == A.dim + B.dim


@dataclass
class PartialSpread:
    members: list  # list of Subspace
    fq: FqContext

    def __post_init__(self):
        self.index = {s.key: i for i, s in enumerate(self.members)}
        if len(self.index) != len(self.members):
            dup = [s.key for s in self.members]
            raise NotAPartialSpread("duplicate members", witness=dup)

    def __len__(self):
        return len(self.members)

    def check_pairwise(self):
        for i in range(len(self.members)):
            for j in range(i + 1, len(self.members)):
                if not intersect_trivially(self.fq, self.members[i], self.members[j]):
                    raise NotAPartialSpread(
                        f"members {i} and {j} intersect nontrivially",
                        witness=(i, j),
                    )

    def to_json(self):
        return [m.to_json() for m in self.members]


def classical_spread(tower: FieldTower) -> PartialSpread:
    """The q^m + 1 multiplicative translates of W = F_{q^m} inside F_{q^2m},
    one per coset of F_{q^m}^* (representatives 1, a, .., a^{q^m}).

    Partitions the nonzero vectors of V.
    """
    fq = tower.fq
    m, top = tower.m, tower.top
    theta2 = tower._theta[2]
    wbasis = [top.pow(theta2, i) for i in range(tower.level_degree[2])]
    members = []
    for i in range(tower.q ** m + 1):
        rep = top.pow(tower.alpha, i)
        vecs = [tower.top_to_vec(top.mul(wb, rep)) for wb in wbasis]
        members.append(subspace(fq, vecs))
    sp = PartialSpread(members, fq)
    sp.check_pairwise()
    return sp


def orbit_partial_spread(A, W0: Subspace):
    """Deduplicated orbit {a(W0) : a in A}; raises NotAPartialSpread when two
    distinct members intersect nontrivially.  Also reports sharpness, i.e.
    whether |orbit| equals |A|.
    """
    members = []
    seen = {}
    for a in A:
        S = act_subspace(a, W0)
        if S.key not in seen:
            seen[S.key] = len(members)
            members.append(S)
    sp = PartialSpread(members, A[0].fq if A else W0 and None)
    sp.check_pairwise()
    sharp = len(members) == len(A)
    return sp, sharp


def verify_partition(spread: PartialSpread, points, fq: FqContext):
    """Checks every point lies in exactly one member and the members carry
    equally many points.  Violations are report content, not exceptions.
    """
    point_keys = [np.asarray(p, dtype=np.int16).tobytes() for p in points]
    pt_set = set(point_keys)
    owner: dict[bytes, int] = {}
    counts = [0] * len(spread.members)
    violations = []
    for i, memb in enumerate(spread.members):
        for v in span_points(fq, memb):
            k = v.tobytes()
            if k not in pt_set:
                continue
            if k in owner:
                violations.append({"kind": "double_cover", "point": v.tolist(), "members": [owner[k], i]})
            else:
                owner[k] = i
                counts[i] += 1
    uncovered = len(pt_set) - len(owner)
    if uncovered:
        for k in point_keys:
            if k not in owner:
                violations.append({"kind": "uncovered", "point": np.frombuffer(k, dtype=np.int16).tolist()})
                break
    nonempty = [c for c in counts]
    equal = len(set(nonempty)) <= 1 and (not counts or counts[0] > 0)
    ok = not violations and equal and uncovered == 0
    return {
        "ok": bool(ok),
        "members": len(spread.members),
        "points": len(pt_set),
        "points_per_member": counts[0] if counts and equal else counts,
        "uncovered": uncovered,
        "violations": violations[:5],
    }


def schreier_transversal(start, gens, act, key, cap=200_000):
    """BFS transversal for a transitive action: returns {key: transporter}
    with transporter(start) = node.  Deterministic for fixed generator order.
    """
    I = gens[0].fq if gens else None
    from .matgroups import identity as _id

    reps = {key(start): _id(gens[0].fq, gens[0].n)}
    frontier = [(key(start), start)]
    while frontier:
        new = []
        for k, node in frontier:
            g0 = reps[k]
            for g in gens:
                nxt = act(g, node)
                nk = key(nxt)
                if nk not in reps:
                    reps[nk] = g * g0
                    new.append((nk, nxt))
                    if len(reps) > cap:
                        raise RuntimeError("transversal exceeded cap")
        frontier = new
    return reps
