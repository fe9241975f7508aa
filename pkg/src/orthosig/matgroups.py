"""Dense matrices over F_q, multiplication-operator matrices, Singer cycles,
and the block generators used by the signature constructions.

All matrices are immutable value objects hashed on their entry bytes, so
they can key dictionaries during closure enumeration and tame decoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
import math

import numpy as np

from .fields import FieldError, FieldTower, FqContext, factorint, fq_context, make_tower, split_prime_power


class ConstructionMismatch(RuntimeError):
    """A literal generator recipe failed its isometry or order assertion."""


class OrderNotFound(RuntimeError):
    pass


FAMILIES = (
    "O-", "O+", "Oodd",
    "SO-", "SO+", "SOodd",
    "Omega-", "Omega+", "Omegaodd",
    "PSO-", "PSO+", "PSOodd",
    "POmega-", "POmega+", "POmegaodd",
    "GL", "parabolic",
)

_KIND_SUFFIX = {"-": "minus", "+": "plus", "odd": "odd"}


@dataclass(frozen=True)
class GroupDescriptor:
    """Which group: family tag, field size q = p^e, matrix dimension n."""

    family: str
    q: int
    n: int
    k: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        p, e = split_prime_power(self.q)
        if p == 2:
            raise ValueError("q must be odd")
        if self.family.endswith("odd"):
            if self.n % 2 != 1:
                raise ValueError(f"odd-dimension family needs odd n, got {self.n}")
        elif self.family not in ("GL", "parabolic"):
            if self.n % 2 != 0 or self.n < 2:
                raise ValueError(f"family {self.family} needs even n >= 2, got {self.n}")

    @property
    def p(self):
        return split_prime_power(self.q)[0]

    @property
    def e(self):
        return split_prime_power(self.q)[1]

    @property
    def m(self):
        return self.n // 2

    @property
    def kind(self):
        for suffix, kind in _KIND_SUFFIX.items():
            if self.family.endswith(suffix) and self.family != "GL":
                return kind
        raise ValueError(f"family {self.family} has no form kind")

    def base_family(self):
        """O/SO/Omega prefix of the family."""
        for pre in ("POmega", "PSO", "SO", "Omega", "O"):
            if self.family.startswith(pre):
                return pre
        raise ValueError(self.family)

    def to_json(self):
        return {"family": self.family, "q": self.q, "n": self.n, "k": self.k}

    @staticmethod
    def from_json(d):
        return GroupDescriptor(d["family"], d["q"], d["n"], d.get("k", 0))


def descriptor(family: str, q: int, m: int | None = None, n: int | None = None, k: int = 0) -> GroupDescriptor:
    if n is None:
        if m is None:
            raise ValueError("need m or n")
        n = 2 * m + 1 if family.endswith("odd") else 2 * m
    return GroupDescriptor(family, q, n, k)


# ----------------------------------------------------------------------


class Mat:
    """Immutable square matrix over F_q (entries are field codes)."""

    __slots__ = ("fq", "a", "_key")

    def __init__(self, fq: FqContext, a):
        arr = np.ascontiguousarray(a, dtype=np.int16)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("Mat needs a square array")
        arr.setflags(write=False)
        self.fq = fq
        self.a = arr
        self._key = arr.tobytes()

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def key(self):
        return self._key

    def __mul__(self, other):
        return Mat(self.fq, self.fq.mat_mul(self.a, other.a))

    def __matmul__(self, other):
        return self.__mul__(other)

    def __eq__(self, other):
        return isinstance(other, Mat) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Mat({self.a.tolist()})"

    def act(self, v):
        return self.fq.mat_vec(self.a, v)

    def inv(self):
        return Mat(self.fq, self.fq.mat_inv(self.a))

    def det(self):
        return self.fq.det(self.a)

    def rank(self):
        return self.fq.rank(self.a)

    def transpose(self):
        return Mat(self.fq, np.ascontiguousarray(self.a.T))

    def transpose_inv(self):
        return Mat(self.fq, self.fq.mat_inv(np.ascontiguousarray(self.a.T)))

    def pow(self, k: int):
        n = self.n
        if k < 0:
            return self.inv().pow(-k)
        result = identity(self.fq, n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_identity(self):
        return bool(np.array_equal(self.a, self.fq.identity(self.n)))

    def to_json(self):
        gf = self.fq.gf
        return {
            "n": self.n,
            "entries": [[list(gf.coeffs(int(c))) for c in row] for row in self.a],
        }

    @staticmethod
    def from_json(fq: FqContext, d):
        gf = fq.gf
        a = [[gf.from_coeffs(c) for c in row] for row in d["entries"]]
        return Mat(fq, np.array(a, dtype=np.int16))


def identity(fq: FqContext, n: int) -> Mat:
    return Mat(fq, fq.identity(n))


def neg_identity(fq: FqContext, n: int) -> Mat:
    return scalar_mat(fq, n, fq.neg(1))


def scalar_mat(fq: FqContext, n: int, c: int) -> Mat:
    m = np.zeros((n, n), dtype=np.int16)
    np.fill_diagonal(m, c)
    return Mat(fq, m)


def mat_arith(op: str, A: Mat, B: Mat | None = None):
    """Dispatcher for the basic exact matrix operations."""
    if op == "mul":
        if B is None or A.n != B.n:
            raise ValueError("mul needs two conformable matrices")
        return A * B
    if op == "inv":
        return A.inv()
    if op == "det":
        return A.det()
    if op == "rank":
        return A.rank()
    if op == "transpose_inv":
        return A.transpose_inv()
    raise ValueError(f"unknown op {op!r}")


# ----------------------------------------------------------------------


def mult_matrix(s_code: int, tower: FieldTower) -> Mat:
    """Matrix over F_q of v -> s v on F_{q^2m}, power basis 1, a, .., a^{2m-1}.

    Rejects s = 0 (the map must be a group element).
    """
    if s_code == 0:
        raise ValueError("s = 0 is not invertible")
    n = 2 * tower.m
    cols = []
    for j in range(n):
        img = tower.top.mul(s_code, tower.top.pow(tower.alpha, j))
        cols.append(tower.top_to_vec(img))
    return Mat(tower.fq, np.array(cols, dtype=np.int16).T)


def field_norm_to_fq(tower: FieldTower, s_code: int) -> int:
    """Norm of the top field down to F_q, as an F_q code."""
    exp = (tower.top.order - 1) // (tower.q - 1)
    return tower.top_to_fq_code(tower.top.pow(s_code, exp))


def singer_generator(k: int, fq: FqContext) -> Mat:
    """A k x k matrix over F_q of multiplicative order q^k - 1.

    Realized as the multiplication-by-generator map of F_{q^k} written in a
    power basis over F_q; deterministic for fixed (q, k).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return Mat(fq, np.array([[fq.generator]], dtype=np.int16))
    return _singer_via_extension(k, fq)


def _singer_via_extension(k: int, fq: FqContext) -> Mat:
    # F_{q^k} realized over F_p, then re-coordinatized over F_q
    big = fq_context(fq.p, fq.e * k).gf
    # F_p-basis b_{j,i} = gamma^j * theta^i with gamma a generator of big
    # and theta embedding F_q; solve as in FieldTower but standalone.
    p = fq.p
    theta = _embed_subfield_root(big, fq.gf.modulus, fq.e)
    cols = []
    gamma = big.alpha  # primitive, order q^k - 1? big has order p^{ek}: q^k - 1 == p^{ek} - 1
    basis_codes = []
    for j in range(k):
        gj = big.pow(gamma, j)
        for i in range(fq.e):
            basis_codes.append(big.mul(gj, big.pow(theta, i)))
    B = np.array([big.digits[c] for c in basis_codes], dtype=np.int16).T
    fp = fq_context(p, 1)
    cols = []
    for j in range(k):
        img = big.mul(gamma, big.pow(gamma, j))
        sol = fp.solve(B, np.asarray(big.digits[img], dtype=np.int16))
        col = np.empty(k, dtype=np.int16)
        for jj in range(k):
            chunk = sol[jj * fq.e:(jj + 1) * fq.e]
            col[jj] = fq.gf.from_coeffs([int(c) for c in chunk])
        cols.append(col)
    M = Mat(fq, np.array(cols, dtype=np.int16).T)
    return M


def _embed_subfield_root(big, modulus, deg):
    p = big.p
    n1 = big.order - 1
    sub = p ** deg
    step = n1 // (sub - 1)
    cands = sorted({0} | {int(big.exp[(kk * step) % n1]) for kk in range(sub - 1)},
                   key=lambda c: big.coeffs(c))
    for c in cands:
        acc = 0
        for i, co in enumerate(modulus):
            if co:
                acc = big.add(acc, big.mul(co % p, big.pow(c, i)) if i else co % p)
        if acc == 0:
            return c
    raise FieldError("no subfield root")  # pragma: no cover


def element_order(g: Mat, cap: int) -> int:
    """Least t <= cap with g^t = I; raises OrderNotFound beyond cap."""
    if g.det() == 0:
        raise FieldError("singular matrix has no order")
    I = identity(g.fq, g.n)
    cur = g
    for t in range(1, cap + 1):
        if cur == I:
            return t
        cur = cur * g
    raise OrderNotFound(f"order exceeds cap {cap}")


# ----------------------------------------------------------------------
# group orders, closed forms


def order_gl(k: int, q: int) -> int:
    out = 1
    for i in range(k):
        out *= q ** k - q ** i
    return out


def order_sp(n: int, q: int) -> int:
    if n % 2:
        raise ValueError("symplectic groups need even dimension")
    m = n // 2
    out = q ** (m * m)
    for i in range(1, m + 1):
        out *= q ** (2 * i) - 1
    return out


def order_orthogonal(kind: str, n: int, q: int) -> int:
    """|O_n^kind(q)| for odd q."""
    if kind == "odd":
        if n % 2 == 0:
            raise ValueError("odd kind needs odd n")
        m = (n - 1) // 2
        out = 2 * q ** (m * m)
        for i in range(1, m + 1):
            out *= q ** (2 * i) - 1
        return out
    if n % 2 or n < 2:
        raise ValueError("even kind needs even n >= 2")
    m = n // 2
    eps = 1 if kind == "plus" else -1
    out = 2 * q ** (m * (m - 1)) * (q ** m - eps)
    for i in range(1, m):
        out *= q ** (2 * i) - 1
    return out


def group_order(desc: GroupDescriptor) -> int:
    base = desc.base_family()
    if desc.family == "GL":
        return order_gl(desc.n, desc.q)
    if desc.n == 1:
        o = 2
    else:
        o = order_orthogonal(desc.kind, desc.n, desc.q)
    if base == "O":
        return o
    if base == "SO":
        return o // 2
    if base == "PSO":
        so = o // 2
        return so // 2 if desc.n % 2 == 0 else so
    if base == "Omega":
        if desc.n <= 2:
            raise ValueError("Omega order not defined here for n <= 2")
        return o // 4
    if base == "POmega":
        raise ValueError("POmega order depends on whether -I is in Omega; use enumeration")
    raise ValueError(desc.family)


def isotropic_point_count(kind: str, q: int, m: int) -> int:
    if kind == "minus":
        return (q ** m + 1) * (q ** (m - 1) - 1) // (q - 1)
    if kind == "plus":
        return (q ** m - 1) * (q ** (m - 1) + 1) // (q - 1)
    if kind == "odd":
        return (q ** m - 1) * (q ** m + 1) // (q - 1)
    raise ValueError(kind)


# ----------------------------------------------------------------------
# closure enumeration


def mulclose(gens, maxsize=None, cap=2_000_000):
    """Multiplicative closure of a generator list, BFS order, deterministic."""
    gens = [g for g in gens]
    if not gens:
        return []
    I = identity(gens[0].fq, gens[0].n)
    seen = {I.key: I}
    order = [I]
    frontier = [I]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y.key not in seen:
                    seen[y.key] = y
                    order.append(y)
                    new.append(y)
                    if maxsize and len(seen) >= maxsize:
                        return order
                    if len(seen) > cap:
                        raise RuntimeError("closure exceeded cap")
        frontier = new
    return order


def derived_subgroup(gens, cap=2_000_000):
    """Derived subgroup of <gens>: normal closure of generator commutators."""
    gens = list(gens)
    if not gens:
        return []
    fq, n = gens[0].fq, gens[0].n
    ginvs = [g.inv() for g in gens]
    comms = []
    for i, a in enumerate(gens):
        for j, b in enumerate(gens):
            c = a * b * ginvs[i] * ginvs[j]
            comms.append(c)
    I = identity(fq, n)
    seen = {I.key: I}
    order = [I]
    frontier = []
    def push(x):
        if x.key not in seen:
            seen[x.key] = x
            order.append(x)
            frontier.append(x)
    for c in comms:
        push(c)
    # close under multiplication and conjugation by the ambient generators
    while frontier:
        work = frontier
        frontier = []
        for x in work:
            for c in comms:
                push(x * c)
            for g, gi in zip(gens, ginvs):
                push(g * x * gi)
            if len(seen) > cap:
                raise RuntimeError("derived subgroup exceeded cap")
    return order


# ----------------------------------------------------------------------
# literal block generators


def block_diag(fq: FqContext, blocks) -> Mat:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.int16)
    at = 0
    for b in blocks:
        k = b.shape[0]
        out[at:at + k, at:at + k] = b
        at += k
    return Mat(fq, out)


def standard_generators(desc: GroupDescriptor, space):
    """The literal cyclic-block generator pair (a, b) for a staged
    signature, in the space's Witt coordinates.

    Returns (a, b, notes).  Raises ConstructionMismatch when a literal
    recipe fails its isometry or order assertion; callers may fall back to
    the search in lscore.
    """
    from . import forms  # deferred; forms imports this module

    base = desc.base_family()
    if base not in ("O", "SO"):
        raise ValueError("standard_generators covers the O and SO families")
    kind, q, m = desc.kind, desc.q, space.m
    notes = []
    a = _literal_a(kind, space)
    expected_a = {"minus": q ** m + 1, "plus": q ** (m - 1) + 1, "odd": q ** m + 1}[kind]
    ord_a = element_order(a, expected_a + 1)
    if ord_a != expected_a:
        raise ConstructionMismatch(f"a has order {ord_a}, expected {expected_a}")
    if not forms.is_isometry(space, a):
        raise ConstructionMismatch("a is not an isometry")
    if a.det() != 1:
        raise ConstructionMismatch("a has determinant != 1")

    r = space.witt_index
    b = None
    if base == "SO":
        b = _starred_b(space, r, q, notes)
    if b is None:
        b = _plain_b(space, r)
        if base == "SO":
            notes.append("orthogonal-subgroup b variant unavailable; using the inverse-transpose block form (det 1)")
    expected_b = q ** r - 1
    ord_b = element_order(b, expected_b + 1)
    if ord_b != expected_b:
        raise ConstructionMismatch(f"b has order {ord_b}, expected {expected_b}")
    if not forms.is_isometry(space, b):
        raise ConstructionMismatch("b is not an isometry")
    return a, b, notes


def _literal_a(kind: str, space) -> Mat:
    tower = space.tower
    if kind == "minus":
        beta = tower.top.pow(tower.alpha, tower.q ** tower.m - 1)
        a_model = mult_matrix(beta, tower)
        return space.model_to_witt(a_model)
    if kind == "odd":
        beta = tower.top.pow(tower.alpha, tower.q ** tower.m - 1)
        a_sub = mult_matrix(beta, tower)
        fq = space.fq
        n = space.n
        blk = np.zeros((n, n), dtype=np.int16)
        blk[:n - 1, :n - 1] = a_sub.a
        blk[n - 1, n - 1] = 1
        return space.model_to_witt(Mat(fq, blk))
    if kind == "plus":
        return _plus_literal_a(space)
    raise ValueError(kind)


def _plus_literal_a(space) -> Mat:
    """Order q^{m-1}+1 torus on an embedded (2m-2)-dimensional subspace of
    minus type, identity on its 2-dimensional anisotropic complement."""
    from . import forms

    fq = space.fq
    q, m, n = space.q, space.m, space.n
    if m == 1:
        raise ConstructionMismatch("plus type with m = 1 has no torus block")
    U2 = forms.find_anisotropic_plane(space)
    Ubasis = forms.perp_basis(space, U2)
    GU = forms.gram_restriction(space, Ubasis)
    sub_tower = make_tower(space.p, space.e, m - 1)
    model = forms.build_space("minus", sub_tower)
    phi, lam = forms.align_spaces(model, GU, fq)
    if lam != 1:
        raise ConstructionMismatch("embedded minus subspace is only similar, not isometric")
    gamma = sub_tower.top.pow(sub_tower.alpha, q ** (m - 1) - 1)
    t_model = model.model_to_witt(mult_matrix(gamma, sub_tower))
    t_U = fq.mat_mul(fq.mat_mul(phi, t_model.a), fq.mat_inv(phi))
    # assemble in full-space Witt coordinates: columns describe images of
    # the U-basis and of the complement basis
    C = np.concatenate([Ubasis, U2], axis=0).T.astype(np.int16)  # witt coords of [U | U2]
    Cinv = fq.mat_inv(np.ascontiguousarray(C))
    big = np.zeros((n, n), dtype=np.int16)
    big[:n - 2, :n - 2] = t_U
    big[n - 2:, n - 2:] = fq.identity(2)
    return Mat(fq, fq.mat_mul(fq.mat_mul(C, big), Cinv))


def _plain_b(space, r: int) -> Mat:
    fq = space.fq
    D = singer_generator(r, fq)
    Dti = D.transpose_inv()
    rest = space.n - 2 * r
    blocks = [D.a, Dti.a]
    if rest:
        blocks.append(fq.identity(rest))
    return block_diag(fq, blocks)


def _starred_b(space, r: int, q: int, notes) -> Mat | None:
    """Literal starred variant: D* from the dot-product orthogonal group,
    with D*^t in the dual block.  Only consistent when D*^2 = I."""
    from . import forms

    fq = space.fq
    target = q ** r - 1
    if target > 2:
        notes.append(
            "starred b requires an involutory orthogonal D* of order "
            f"{target}; impossible, falling back"
        )
        return None
    rest = space.n - 2 * r
    found = None
    for codes in _lex_matrices(fq, r):
        D = Mat(fq, codes)
        if D.det() == 0:
            continue
        Dt = D.transpose()
        if (Dt * D) != identity(fq, r):
            continue
        blocks = [D.a, Dt.a] + ([fq.identity(rest)] if rest else [])
        b = block_diag(fq, blocks)
        if not forms.is_isometry(space, b):
            continue
        try:
            if element_order(b, target) == target:
                found = b
                break
        except OrderNotFound:
            continue
    if found is None:
        notes.append("no starred D* satisfied the order and isometry assertions; falling back")
    return found


def _lex_matrices(fq, r):
    import itertools as it

    for entries in it.product(range(fq.q), repeat=r * r):
        yield np.array(entries, dtype=np.int16).reshape(r, r)
