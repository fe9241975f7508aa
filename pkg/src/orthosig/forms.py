"""Trace-defined quadratic geometries of minus, plus and odd kind, point
classification, Witt bases, reflections, Siegel unipotents and the
isometry / special / commutator-subgroup membership tests.

Working coordinates: every space carries a deterministic Witt basis and
group elements are stored in Witt coordinates, where the polar form has
the standard block shape [[0, I, 0], [I, 0, 0], [0, 0, A]] with A the
anisotropic block.  Q(v) = f(v, v) / 2 throughout (odd characteristic).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .fields import FieldError, FieldTower, FqContext, fq_context, make_tower
from .matgroups import (
    Mat,
    derived_subgroup,
    identity,
    isotropic_point_count,
    mulclose,
    neg_identity,
)


class GeometryError(ValueError):
    pass


KINDS = ("minus", "plus", "odd")


class QuadraticSpace:
    """A non-singular quadratic space with a fixed Witt frame."""

    def __init__(self, kind, tower, fq, gram_model):
        self.kind = kind
        self.tower = tower
        self.fq: FqContext = fq
        self.gram_model = np.ascontiguousarray(gram_model, dtype=np.int16)
        self.n = self.gram_model.shape[0]
        self.p, self.e, self.q = fq.p, fq.e, fq.q
        if fq.rank(self.gram_model) != self.n:
            raise GeometryError("bilinear form is singular")
        C, R, anis = _witt_decompose(fq, self.gram_model)
        self.C = C  # columns: witt vectors in model coordinates
        self.Cinv = fq.mat_inv(C)
        self.gram = fq.mat_mul(fq.mat_mul(np.ascontiguousarray(C.T), self.gram_model), C)
        self.witt_index = R
        self.anis_dim = self.n - 2 * R
        self.anis_gram = np.ascontiguousarray(self.gram[2 * R:, 2 * R:])
        expected = {"minus": (self.n - 2) // 2, "plus": self.n // 2, "odd": (self.n - 1) // 2}
        if kind in expected and R != expected[kind]:
            raise GeometryError(f"witt index {R} does not match kind {kind}")
        self._points = None
        self._isotropic = None

    @property
    def m(self):
        if self.kind == "odd":
            return (self.n - 1) // 2
        return self.n // 2

    # -- forms in witt coordinates

    def Q(self, v):
        return self.fq.quad(self.gram, np.asarray(v, dtype=np.int16))

    def f(self, u, v):
        return self.fq.bil(self.gram, np.asarray(u, dtype=np.int16), np.asarray(v, dtype=np.int16))

    def Q_model(self, v):
        return self.fq.quad(self.gram_model, np.asarray(v, dtype=np.int16))

    def e_vec(self, i):
        v = np.zeros(self.n, dtype=np.int16)
        v[i] = 1
        return v

    def f_vec(self, i):
        v = np.zeros(self.n, dtype=np.int16)
        v[self.witt_index + i] = 1
        return v

    def model_to_witt(self, g: Mat) -> Mat:
        fq = self.fq
        return Mat(fq, fq.mat_mul(fq.mat_mul(self.Cinv, g.a), self.C))

    def witt_to_model(self, g: Mat) -> Mat:
        fq = self.fq
        return Mat(fq, fq.mat_mul(fq.mat_mul(self.C, g.a), self.Cinv))

    # -- projective points (canonical reps: first nonzero coordinate is 1)

    def canon(self, v):
        v = np.asarray(v, dtype=np.int16)
        nz = np.nonzero(v)[0]
        if len(nz) == 0:
            raise GeometryError("zero vector has no projective point")
        s = self.fq.inv(int(v[nz[0]]))
        return np.ascontiguousarray(self.fq.v_scale(s, v))

    def point_key(self, v):
        return self.canon(v).tobytes()

    def points(self):
        if self._points is None:
            check_enumeration_budget(self.q, self.n)
            self._points = list(_projective_reps(self.fq, self.n))
        return self._points

    def isotropic_points(self):
        """All singular projective points, canonical reps, deterministic order."""
        if self._isotropic is None:
            self._isotropic = [v for v in self.points() if self.Q(v) == 0]
        return self._isotropic

    def serialize(self):
        return {
            "kind": self.kind,
            "tower": self.tower.to_json() if self.tower else None,
            "n": self.n,
            "gram_model": self.gram_model.tolist(),
            "witt_basis": self.C.tolist(),
            "witt_index": self.witt_index,
        }


ENUM_BUDGET = 10 ** 8


def check_enumeration_budget(q, n):
    if q ** n > ENUM_BUDGET:
        raise GeometryError(
            f"point enumeration budget exceeded: q^n = {q ** n} > {ENUM_BUDGET}"
        )


def _projective_reps(fq, n):
    q = fq.q
    for lead in range(n):
        free = n - lead - 1
        for tail in itertools.product(range(q), repeat=free):
            v = np.zeros(n, dtype=np.int16)
            v[lead] = 1
            for i, c in enumerate(tail):
                v[lead + 1 + i] = c
            yield v


def _witt_decompose(fq, G):
    """Greedy hyperbolic-pair extraction; returns (C, witt_index, anis_rows)."""
    n = G.shape[0]
    comp = [np.eye(n, dtype=np.int16)[i] for i in range(n)]
    pairs = []

    def bil(u, v):
        return fq.bil(G, u, v)

    def quad(v):
        return fq.quad(G, v)

    while True:
        k = len(comp)
        sing = None
        for coeffs in _canonical_coeffs(fq.q, k):
            v = _combo(fq, coeffs, comp)
            if quad(v) == 0:
                sing = v
                break
        if sing is None:
            break
        partner = None
        for coeffs in _canonical_coeffs(fq.q, k):
            u = _combo(fq, coeffs, comp)
            if bil(sing, u) != 0:
                partner = u
                break
        if partner is None:
            raise GeometryError("degenerate complement during Witt decomposition")
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
    R = len(pairs)
    cols = [p[0] for p in pairs] + [p[1] for p in pairs] + comp
    C = np.ascontiguousarray(np.array(cols, dtype=np.int16).T)
    if fq.rank(C) != n:
        raise GeometryError("witt basis is not a basis")  # pragma: no cover
    return C, R, comp


def _canonical_coeffs(q, k):
    for lead in range(k):
        for tail in itertools.product(range(q), repeat=k - lead - 1):
            yield (0,) * lead + (1,) + tail


def _combo(fq, coeffs, basis):
    v = np.zeros(len(basis[0]), dtype=np.int16)
    for c, b in zip(coeffs, basis):
        if c:
            v = fq.v_add(v, fq.v_scale(c, b))
    return v


# ----------------------------------------------------------------------
# space constructors


@lru_cache(maxsize=None)
def build_space(kind: str, tower: FieldTower) -> QuadraticSpace:
    """The trace-defined geometry of the given kind on the tower's top field.

    minus: f(x,y) = tr(x ybar + xbar y), Q(x) = tr(x xbar) on F_{q^2m}.
    plus:  with b = alpha^{q^m - 1}, coordinates x = x1 + x2 b over F_{q^m},
           f(x,y) = tr(x1 y2 + x2 y1), Q(x) = tr(x1 x2).
    odd:   the minus geometry of rank 2m orthogonally extended by an
           anisotropic line with Q(z) = 1 (dimension 2m + 1).
    """
    if kind not in KINDS:
        raise GeometryError(f"unknown kind {kind!r}")
    fq = tower.fq
    n2m = 2 * tower.m
    if kind == "minus":
        gram = _minus_gram(tower)
        space = QuadraticSpace(kind, tower, fq, gram)
    elif kind == "plus":
        gram = _plus_gram(tower)
        space = QuadraticSpace(kind, tower, fq, gram)
    else:
        gm = _minus_gram(tower)
        gram = np.zeros((n2m + 1, n2m + 1), dtype=np.int16)
        gram[:n2m, :n2m] = gm
        gram[n2m, n2m] = 2 % fq.q
        space = QuadraticSpace(kind, tower, fq, gram)
    _spot_check_quadratic_law(space)
    return space


def build_line_space(p: int, e: int) -> QuadraticSpace:
    """The 1-dimensional space with Q(z) = z^2 (for the O_1 base case)."""
    fq = fq_context(p, e)
    return QuadraticSpace("odd", None, fq, np.array([[2 % fq.q]], dtype=np.int16))


def _minus_gram(tower: FieldTower):
    n = 2 * tower.m
    top = tower.top
    basis = [top.pow(tower.alpha, j) for j in range(n)]
    G = np.zeros((n, n), dtype=np.int16)
    for i in range(n):
        for j in range(i, n):
            x, y = basis[i], basis[j]
            v = top.add(top.mul(x, tower.bar_code(y)), top.mul(tower.bar_code(x), y))
            code = tower.top_to_fq_code(tower.trace_code(v, 2) if tower.m > 1 else v)
            G[i, j] = G[j, i] = code
    return G


def _plus_gram(tower: FieldTower):
    n = 2 * tower.m
    top = tower.top
    p = tower.p
    beta = top.pow(tower.alpha, tower.q ** tower.m - 1)
    theta2 = tower._theta[2]
    # F_p basis: theta2^i and theta2^i * beta
    cols = []
    for i in range(tower.level_degree[2]):
        cols.append(top.digits[top.pow(theta2, i)])
    for i in range(tower.level_degree[2]):
        cols.append(top.digits[top.mul(top.pow(theta2, i), beta)])
    B = np.array(cols, dtype=np.int16).T
    fp = fq_context(p, 1)
    if fp.rank(B) != tower.dtop:
        raise GeometryError("beta decomposition is degenerate")

    def split(code):
        sol = fp.solve(B, np.asarray(top.digits[code], dtype=np.int16))
        d = tower.level_degree[2]
        x1 = 0
        for i in range(d):
            if sol[i]:
                x1 = top.add(x1, top.mul(int(sol[i]), top.pow(theta2, i)))
        x2 = 0
        for i in range(d):
            if sol[d + i]:
                x2 = top.add(x2, top.mul(int(sol[d + i]), top.pow(theta2, i)))
        return x1, x2

    basis = [top.pow(tower.alpha, j) for j in range(n)]
    parts = [split(b) for b in basis]
    G = np.zeros((n, n), dtype=np.int16)
    for i in range(n):
        for j in range(i, n):
            x1, x2 = parts[i]
            y1, y2 = parts[j]
            v = top.add(top.mul(x1, y2), top.mul(x2, y1))
            code = tower.top_to_fq_code(tower.trace_code(v, 2)) if tower.m > 1 else tower.top_to_fq_code(v)
            G[i, j] = G[j, i] = code
    return G


def _spot_check_quadratic_law(space):
    rng = np.random.default_rng(7)
    fq = space.fq
    for _ in range(6):
        u = np.asarray(rng.integers(0, fq.q, space.n), dtype=np.int16)
        v = np.asarray(rng.integers(0, fq.q, space.n), dtype=np.int16)
        lam = int(rng.integers(0, fq.q))
        lhs = space.Q(fq.v_add(fq.v_scale(lam, u), v))
        rhs = fq.add(
            fq.add(fq.mul(fq.mul(lam, lam), space.Q(u)), fq.mul(lam, space.f(u, v))),
            space.Q(v),
        )
        if lhs != rhs:
            raise GeometryError("quadratic form law failed")  # pragma: no cover


# ----------------------------------------------------------------------
# classification and membership


def classify_point(space: QuadraticSpace, v) -> dict:
    v = np.asarray(v, dtype=np.int16)
    if not v.any():
        raise GeometryError("zero vector")
    return {
        "isotropic": space.f(v, v) == 0,
        "singular": space.Q(v) == 0,
    }


def enumerate_isotropic_points(space: QuadraticSpace, check_count=True):
    pts = space.isotropic_points()
    if check_count and space.kind in KINDS and space.n >= 2 and space.tower is not None:
        expected = isotropic_point_count(space.kind, space.q, space.m)
        if len(pts) != expected:
            raise GeometryError(
                f"isotropic point count {len(pts)} != closed form {expected}"
            )  # pragma: no cover
    return pts


def is_isometry(space: QuadraticSpace, g: Mat, frame="witt") -> bool:
    G = space.gram if frame == "witt" else space.gram_model
    fq = space.fq
    lhs = fq.mat_mul(fq.mat_mul(np.ascontiguousarray(g.a.T), G), g.a)
    return bool(np.array_equal(lhs, G))


def omega_rank_criterion(space: QuadraticSpace, g: Mat) -> bool:
    """Even-rank test for membership in the commutator subgroup."""
    fq = space.fq
    s = fq.v_add(fq.identity(space.n), g.a)
    return fq.rank(np.ascontiguousarray(s)) % 2 == 0


def membership(space: QuadraticSpace, g: Mat, family: str) -> bool:
    base = family
    for pre in ("POmega", "PSO", "SO", "Omega", "O"):
        if family.startswith(pre):
            base = pre
            break
    projective = base in ("PSO", "POmega")
    if projective:
        return membership(space, g, family[1:]) or membership(
            space, neg_identity(space.fq, space.n) * g, family[1:]
        )
    if not is_isometry(space, g):
        return False
    if base == "O":
        return True
    if g.det() != 1:
        return False
    if base == "SO":
        return True
    # Omega via the even-rank criterion; audits compare it with the
    # commutator-closure oracle, see omega_audit.
    return omega_rank_criterion(space, g)


def reflection(space: QuadraticSpace, v) -> Mat:
    """r_v(u) = u - f(u,v)/Q(v) * v; needs Q(v) != 0."""
    v = np.asarray(v, dtype=np.int16)
    qv = space.Q(v)
    if qv == 0:
        raise GeometryError("reflection in a singular vector divides by zero")
    fq = space.fq
    qinv = fq.inv(qv)
    cols = []
    for j in range(space.n):
        b = np.zeros(space.n, dtype=np.int16)
        b[j] = 1
        coef = fq.mul(space.f(b, v), qinv)
        cols.append(fq.v_add(b, fq.v_scale(fq.neg(coef), v)))
    return Mat(fq, np.array(cols, dtype=np.int16).T)


def siegel_unipotent(space: QuadraticSpace, u) -> Mat:
    """v -> v + f(v,e1) u - f(v,u) e1 - Q(u) f(v,e1) e1 for u in <e1,f1>-perp."""
    u = np.asarray(u, dtype=np.int16)
    fq = space.fq
    e1 = space.e_vec(0)
    f1 = space.f_vec(0)
    if space.f(u, e1) != 0 or space.f(u, f1) != 0:
        raise GeometryError("u must be orthogonal to the first hyperbolic pair")
    qu = space.Q(u)
    cols = []
    for j in range(space.n):
        b = np.zeros(space.n, dtype=np.int16)
        b[j] = 1
        fbe = space.f(b, e1)
        img = fq.v_add(b, fq.v_scale(fbe, u))
        img = fq.v_add(img, fq.v_scale(fq.neg(space.f(b, u)), e1))
        img = fq.v_add(img, fq.v_scale(fq.neg(fq.mul(qu, fbe)), e1))
        cols.append(img)
    return Mat(fq, np.array(cols, dtype=np.int16).T)


def witt_basis(space: QuadraticSpace):
    """Witt frame data: (basis matrix columns, witt index, anisotropic gram)."""
    return space.C, space.witt_index, space.anis_gram


# ----------------------------------------------------------------------
# isometry group generators and oracles


@lru_cache(maxsize=None)
def _reflections_cached(space_id):
    space = _SPACES[space_id]
    out = []
    for v in space.points():
        if space.Q(v) != 0:
            out.append(reflection(space, v))
    return out


_SPACES: dict[int, QuadraticSpace] = {}


def _space_id(space):
    sid = id(space)
    _SPACES[sid] = space
    return sid


def reflections(space: QuadraticSpace):
    """All reflections, one per non-singular projective point."""
    return _reflections_cached(_space_id(space))


def o_generators(space: QuadraticSpace):
    return reflections(space)


def so_generators(space: QuadraticSpace):
    refl = reflections(space)
    if len(refl) < 2:
        return []
    r0 = refl[0]
    return [r0 * r for r in refl[1:]]


@lru_cache(maxsize=None)
def _o_group_cached(space_id):
    space = _SPACES[space_id]
    return mulclose(reflections(space))


def enumerate_isometry_group(space: QuadraticSpace, family="O"):
    """Full enumeration by closure (desk scale only)."""
    els = _o_group_cached(_space_id(space))
    if family == "O":
        return els
    if family == "SO":
        return [g for g in els if g.det() == 1]
    raise ValueError(family)


@lru_cache(maxsize=None)
def _omega_oracle_cached(space_id):
    space = _SPACES[space_id]
    els = derived_subgroup(o_generators(space))
    return {g.key for g in els}, els


def omega_oracle(space: QuadraticSpace):
    """Key set and elements of the commutator subgroup of the full isometry
    group, computed as a normal closure of generator commutators."""
    return _omega_oracle_cached(_space_id(space))


def omega_audit(space: QuadraticSpace):
    """Element-by-element comparison of the even-rank criterion with the
    commutator-closure oracle over the special isometry group."""
    keys, _ = omega_oracle(space)
    so = enumerate_isometry_group(space, "SO")
    disagreements = []
    for g in so:
        crit = omega_rank_criterion(space, g)
        truth = g.key in keys
        if crit != truth:
            disagreements.append({
                "matrix": g.to_json(),
                "rank_criterion": bool(crit),
                "commutator_oracle": bool(truth),
            })
    return {
        "group_size": len(so),
        "omega_size": len(keys),
        "agreement": not disagreements,
        "disagreements": disagreements,
    }


# ----------------------------------------------------------------------
# subspace helpers used by the generator constructions


def find_anisotropic_plane(space: QuadraticSpace):
    """First 2-dimensional subspace (by the deterministic scan order) on
    which Q has no nonzero singular vector; rows are witt coordinates."""
    fq = space.fq
    pts = space.points()
    nonsing = [v for v in pts if space.Q(v) != 0]
    for v1 in nonsing:
        for v2 in nonsing:
            if space.f(v1, v2) != 0:
                continue
            rows = np.array([v1, v2], dtype=np.int16)
            if fq.rank(rows) != 2:
                continue
            if _plane_is_anisotropic(space, v1, v2):
                return rows
    raise GeometryError("no anisotropic plane found")


def _plane_is_anisotropic(space, v1, v2):
    fq = space.fq
    for c in range(fq.q):
        w = fq.v_add(v1, fq.v_scale(c, v2))
        if space.Q(w) == 0:
            return False
    if space.Q(v2) == 0:
        return False
    return True


def perp_basis(space: QuadraticSpace, rows):
    """Reduced basis (rows) of the orthogonal complement of the row span."""
    fq = space.fq
    M = fq.mat_mul(np.ascontiguousarray(np.atleast_2d(rows)), space.gram)
    return nullspace(fq, M)


def nullspace(fq: FqContext, M):
    rows, cols = M.shape
    R, piv = fq.rref(M)
    free = [c for c in range(cols) if c not in piv]
    base = []
    for fcol in free:
        v = np.zeros(cols, dtype=np.int16)
        v[fcol] = 1
        for i, pc in enumerate(piv):
            v[pc] = fq.neg(int(R[i, fcol]))
        base.append(v)
    if not base:
        return np.zeros((0, cols), dtype=np.int16)
    B, piv2 = fq.rref(np.array(base, dtype=np.int16))
    return np.ascontiguousarray(B[: len(piv2)])


def gram_restriction(space: QuadraticSpace, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int16))
    k = rows.shape[0]
    G = np.zeros((k, k), dtype=np.int16)
    for i in range(k):
        for j in range(k):
            G[i, j] = space.f(rows[i], rows[j])
    return G


def align_spaces(model: QuadraticSpace, gram_target, fq: FqContext):
    """A similarity phi with phi^T G_target phi = lam * model.gram.

    Both sides are first Witt-decomposed; the hyperbolic parts align by
    construction and the anisotropic blocks are matched by a small scan.
    Returns (phi, lam).
    """
    gram_target = np.ascontiguousarray(gram_target, dtype=np.int16)
    Ct, R, anis_rows = _witt_decompose(fq, gram_target)
    std = fq.mat_mul(fq.mat_mul(np.ascontiguousarray(Ct.T), gram_target), Ct)
    At = np.ascontiguousarray(std[2 * R:, 2 * R:])
    Am = model.anis_gram
    if R != model.witt_index or At.shape != Am.shape:
        raise GeometryError("spaces have different Witt invariants")
    ad = At.shape[0]
    lam_M = _match_anisotropic(fq, At, Am, ad)
    if lam_M is None:
        raise GeometryError("anisotropic parts are not similar")
    lam, Mson = lam_M
    n = model.n
    D = np.zeros((n, n), dtype=np.int16)
    for i in range(R):
        D[i, i] = 1
        D[R + i, R + i] = lam
    if ad:
        D[2 * R:, 2 * R:] = Mson
    phi = fq.mat_mul(Ct, D)
    return np.ascontiguousarray(phi), lam


def _match_anisotropic(fq, At, Am, ad):
    if ad == 0:
        return 1, np.zeros((0, 0), dtype=np.int16)
    for lam in [1] + list(range(2, fq.q)):
        target = fq.MUL[lam, Am] if not fq.fast else (lam * Am) % fq.p
        if ad == 1:
            for c in range(1, fq.q):
                if fq.mul(fq.mul(c, c), int(At[0, 0])) == int(target[0, 0]):
                    return lam, np.array([[c]], dtype=np.int16)
            continue
        for entries in itertools.product(range(fq.q), repeat=ad * ad):
            M = np.array(entries, dtype=np.int16).reshape(ad, ad)
            got = fq.mat_mul(fq.mat_mul(np.ascontiguousarray(M.T), At), M)
            if np.array_equal(got, target):
                if fq.det(M) != 0:
                    return lam, M
    return None
