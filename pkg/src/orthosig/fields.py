"""Exact arithmetic in F_q = F_{p^e} and the tower F_q < F_{q^m} < F_{q^2m}.

Elements of F_{p^d} are stored as integer codes in [0, p^d): the base-p
digits of a code, low degree first, are the coefficients in the power
basis of that field's modulus.  Moduli, primitive elements and subfield
embeddings are chosen by deterministic lexicographic scans (coefficient
vectors compared low-degree-first) so serialized artifacts reproduce
across runs and machines.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np


class FieldError(ValueError):
    pass


class LevelMismatch(FieldError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factorint(n: int) -> dict[int, int]:
    """Prime factorization by trial division, {prime: exponent}."""
    if n < 1:
        raise ValueError(f"factorint needs n >= 1, got {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def split_prime_power(q: int) -> tuple[int, int]:
    """q = p^e with p prime, else raises."""
    f = factorint(q)
    if len(f) != 1:
        raise FieldError(f"{q} is not a prime power")
    (p, e), = f.items()
    return p, e


# ----------------------------------------------------------------------
# dense polynomials over F_p, coefficients low degree first, as lists

def _ptrim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(out)


def _pmod(a, m, p):
    # m monic
    a = list(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        c = a[-1] % p
        if c:
            shift = len(a) - 1 - dm
            for i, mi in enumerate(m):
                a[shift + i] = (a[shift + i] - c * mi) % p
        a.pop()
    return _ptrim(a)


def _ppowmod(base, k, m, p):
    result = [1]
    b = _pmod(base, m, p)
    while k:
        if k & 1:
            result = _pmod(_pmul(result, b, p), m, p)
        b = _pmod(_pmul(b, b, p), m, p)
        k >>= 1
    return result


def _pgcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        # make b monic for _pmod
        lead = b[-1]
        if lead != 1:
            inv = pow(lead, p - 2, p)
            b = [(c * inv) % p for c in b]
        a, b = b, _pmod(a, b, p)
    return a


def _is_irreducible(m, p):
    d = len(m) - 1
    if d < 1:
        return False
    x = [0, 1]
    xm = _pmod(x, m, p)
    # x^(p^d) == x mod m
    t = _ppowmod(x, p ** d, m, p)
    if _ptrim([(a - b) % p for a, b in itertools.zip_longest(t, xm, fillvalue=0)]):
        return False
    for ell in factorint(d):
        t = _ppowmod(x, p ** (d // ell), m, p)
        diff = _ptrim([(a - b) % p for a, b in itertools.zip_longest(t, xm, fillvalue=0)])
        g = _pgcd(m, diff, p) if diff else list(m)
        if len(g) - 1 > 0:
            return False
    return True


def smallest_irreducible(p: int, d: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree d over F_p.

    Coefficient tuples (c0, .., c_{d-1}) are compared low-degree-first.
    """
    for tail in itertools.product(range(p), repeat=d):
        m = list(tail) + [1]
        if _is_irreducible(m, p):
            return tuple(m)
    raise FieldError(f"no irreducible of degree {d} over F_{p}")  # pragma: no cover


# ----------------------------------------------------------------------

_ADD_TABLE_LIMIT = 2100  # full addition table only for small fields


class GF:
    """F_{p^d} with elements as integer codes; log/exp tables for mul."""

    def __init__(self, p: int, d: int):
        if not is_prime(p):
            raise FieldError(f"p = {p} is not prime")
        self.p = p
        self.d = d
        self.order = p ** d
        self.modulus = smallest_irreducible(p, d)
        n = self.order
        self._pvec = np.array([p ** i for i in range(d)], dtype=np.int64)
        digs = np.empty((n, d), dtype=np.int16)
        tmp = np.arange(n, dtype=np.int64)
        for i in range(d):
            digs[:, i] = tmp % p
            tmp //= p
        self.digits = digs
        self._nfac = factorint(n - 1) if n > 1 else {}
        self.alpha = self._find_primitive()
        # exp[k] = code of alpha^k ; log[code] = k
        exp = np.empty(n - 1, dtype=np.int64)
        log = np.full(n, -1, dtype=np.int64)
        cur = 1
        for k in range(n - 1):
            exp[k] = cur
            log[cur] = k
            cur = self._slow_mul(cur, self.alpha)
        if cur != 1:
            raise FieldError("primitive element scan failed")  # pragma: no cover
        self.exp = exp
        self.log = log
        self.neg_table = np.array(
            [int(((p - digs[c]) % p) @ self._pvec) for c in range(n)], dtype=np.int64
        )
        if n <= _ADD_TABLE_LIMIT:
            s = (digs[:, None, :] + digs[None, :, :]) % p
            self.add_table = (s @ self._pvec).astype(np.int64)
        else:
            self.add_table = None

    # -- construction helpers

    def _poly_of(self, code):
        return _ptrim([int(c) for c in self.digits[code]])

    def _code_of_poly(self, poly):
        return int(sum(c * self.p ** i for i, c in enumerate(poly)))

    def _slow_mul(self, a, b):
        return self._code_of_poly(_pmod(_pmul(self._poly_of(a), self._poly_of(b), self.p), list(self.modulus), self.p))

    def _order_is_maximal(self, code):
        n1 = self.order - 1
        poly = self._poly_of(code)
        mod = list(self.modulus)
        for ell in self._nfac:
            if _ppowmod(poly, n1 // ell, mod, self.p) == [1]:
                return False
        return True

    def _find_primitive(self):
        if self.order == 2:
            return 1
        for tail in itertools.product(range(self.p), repeat=self.d):
            code = int(sum(c * self.p ** i for i, c in enumerate(tail)))
            if code == 0:
                continue
            if self._order_is_maximal(code):
                return code
        raise FieldError("no primitive element found")  # pragma: no cover

    # -- arithmetic on codes

    def add(self, a, b):
        if self.add_table is not None:
            return int(self.add_table[a, b])
        return int(((self.digits[a] + self.digits[b]) % self.p) @ self._pvec)

    def neg(self, a):
        return int(self.neg_table[a])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return int(self.exp[(self.log[a] + self.log[b]) % (self.order - 1)])

    def inv(self, a):
        if a == 0:
            raise FieldError("inversion of zero")
        return int(self.exp[(-self.log[a]) % (self.order - 1)])

    def pow(self, a, k):
        if a == 0:
            if k == 0:
                return 1
            if k < 0:
                raise FieldError("inversion of zero")
            return 0
        return int(self.exp[(self.log[a] * k) % (self.order - 1)])

    def element_order(self, a):
        if a == 0:
            raise FieldError("0 has no multiplicative order")
        n1 = self.order - 1
        return n1 // int(np.gcd(int(self.log[a]), n1))

    def coeffs(self, a) -> tuple[int, ...]:
        return tuple(int(c) for c in self.digits[a])

    def from_coeffs(self, coeffs) -> int:
        if len(coeffs) > self.d:
            raise FieldError("coefficient vector too long")
        return int(sum((c % self.p) * self.p ** i for i, c in enumerate(coeffs)))

    def lex_codes(self):
        """All codes ordered by low-degree-first lexicographic coefficients."""
        for tail in itertools.product(range(self.p), repeat=self.d):
            yield int(sum(c * self.p ** i for i, c in enumerate(tail)))


@lru_cache(maxsize=None)
def _gf(p: int, d: int) -> GF:
    return GF(p, d)


# ----------------------------------------------------------------------


class FqContext:
    """Matrix/vector arithmetic context over F_q = F_{p^e}.

    Entry codes are ints in [0, q).  For e = 1 matrices multiply with
    plain mod-p numpy; otherwise gather tables are used.
    """

    def __init__(self, p: int, e: int):
        self.p = p
        self.e = e
        self.q = p ** e
        self.gf = _gf(p, e)
        self.fast = (e == 1)
        q = self.q
        self.ADD = np.empty((q, q), dtype=np.int16)
        self.MUL = np.empty((q, q), dtype=np.int16)
        for a in range(q):
            for b in range(q):
                self.ADD[a, b] = self.gf.add(a, b)
                self.MUL[a, b] = self.gf.mul(a, b)
        self.NEG = np.array([self.gf.neg(a) for a in range(q)], dtype=np.int16)
        self.INV = np.array([0] + [self.gf.inv(a) for a in range(1, q)], dtype=np.int16)
        self.two_inv = self.gf.inv(2 % q if self.p != 2 else 1)
        self.generator = self._find_generator()

    def _find_generator(self):
        for code in self.gf.lex_codes():
            if code and self.gf.element_order(code) == self.q - 1:
                return code
        return 1  # q == 2, unused here (p odd throughout)

    # -- scalars
    def add(self, a, b):
        return int(self.ADD[a, b])

    def mul(self, a, b):
        return int(self.MUL[a, b])

    def neg(self, a):
        return int(self.NEG[a])

    def inv(self, a):
        if a == 0:
            raise FieldError("inversion of zero")
        return int(self.INV[a])

    # -- vectors (1-d int16 arrays of codes)
    def v_add(self, u, v):
        if self.fast:
            return (u + v) % self.p
        return self.ADD[u, v]

    def v_scale(self, s, u):
        if self.fast:
            return (s * u) % self.p
        return self.MUL[s, u]

    def v_neg(self, u):
        if self.fast:
            return (-u) % self.p
        return self.NEG[u]

    def identity(self, n):
        m = np.zeros((n, n), dtype=np.int16)
        np.fill_diagonal(m, 1)
        return m

    def mat_mul(self, A, B):
        if self.fast:
            return ((A.astype(np.int64) @ B.astype(np.int64)) % self.p).astype(np.int16)
        G = self.MUL[A[:, :, None], B[None, :, :]]  # G[i,k,j]
        return reduce(lambda X, Y: self.ADD[X, Y], (G[:, k, :] for k in range(A.shape[1])))

    def mat_vec(self, A, v):
        if self.fast:
            return ((A.astype(np.int64) @ v.astype(np.int64)) % self.p).astype(np.int16)
        G = self.MUL[A, v[None, :]]
        return reduce(lambda x, y: self.ADD[x, y], (G[:, k] for k in range(len(v))))

    def rref(self, A):
        """Reduced row echelon form; returns (R, pivot columns)."""
        R = np.array(A, dtype=np.int16, copy=True)
        rows, cols = R.shape
        piv = []
        r = 0
        for c in range(cols):
            if r >= rows:
                break
            sel = None
            for i in range(r, rows):
                if R[i, c]:
                    sel = i
                    break
            if sel is None:
                continue
            if sel != r:
                R[[r, sel]] = R[[sel, r]]
            s = self.inv(int(R[r, c]))
            R[r] = self.v_scale(s, R[r])
            for i in range(rows):
                if i != r and R[i, c]:
                    factor = self.neg(int(R[i, c]))
                    R[i] = self.v_add(R[i], self.v_scale(factor, R[r]))
            piv.append(c)
            r += 1
        return R, piv

    def rank(self, A):
        return len(self.rref(A)[1])

    def det(self, A):
        R = np.array(A, dtype=np.int16, copy=True)
        n = R.shape[0]
        d = 1
        for c in range(n):
            sel = None
            for i in range(c, n):
                if R[i, c]:
                    sel = i
                    break
            if sel is None:
                return 0
            if sel != c:
                R[[c, sel]] = R[[sel, c]]
                d = self.mul(d, self.neg(1))
            d = self.mul(d, int(R[c, c]))
            s = self.inv(int(R[c, c]))
            R[c] = self.v_scale(s, R[c])
            for i in range(c + 1, n):
                if R[i, c]:
                    R[i] = self.v_add(R[i], self.v_scale(self.neg(int(R[i, c])), R[c]))
        return d

    def mat_inv(self, A):
        n = A.shape[0]
        aug = np.concatenate([A, self.identity(n)], axis=1)
        R, piv = self.rref(aug)
        if piv != list(range(n)):
            raise FieldError("singular matrix")
        return np.ascontiguousarray(R[:, n:])

    def solve(self, A, b):
        """One solution x of A x = b, or raises."""
        n = A.shape[1]
        aug = np.concatenate([A, b.reshape(-1, 1)], axis=1)
        R, piv = self.rref(aug)
        if n in piv:
            raise FieldError("inconsistent linear system")
        x = np.zeros(n, dtype=np.int16)
        for i, c in enumerate(piv):
            x[c] = R[i, -1]
        return x

    def quad(self, G, v):
        """v^T G v / 2 (the quadratic form of the polar form G)."""
        w = self.mat_vec(G, v)
        s = 0
        for a, b in zip(v, w):
            s = self.add(s, self.mul(int(a), int(b)))
        return self.mul(self.two_inv, s)

    def bil(self, G, u, v):
        w = self.mat_vec(G, v)
        s = 0
        for a, b in zip(u, w):
            s = self.add(s, self.mul(int(a), int(b)))
        return s


@lru_cache(maxsize=None)
def fq_context(p: int, e: int) -> FqContext:
    return FqContext(p, e)


# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FieldElement:
    """Element of one tower level; coeffs are low-degree-first over F_p."""

    level: int
    coeffs: tuple[int, ...]
    tower: "FieldTower" = field(compare=False, repr=False, default=None)

    def to_json(self):
        return {"level": self.level, "coeffs": list(self.coeffs)}


LEVEL_NAMES = {1: "F_q", 2: "F_q^m", 3: "F_q^2m"}


class FieldTower:
    """The chain F_p < F_q < F_{q^m} < F_{q^2m} realized inside one top field.

    The top field F_{p^{2em}} carries all arithmetic; each intermediate
    level has its own deterministic modulus and a cached embedding of its
    power-basis generator, so level elements convert to top codes and back.
    """

    def __init__(self, p: int, e: int, m: int):
        if not is_prime(p) or p == 2:
            raise FieldError(f"p must be an odd prime, got {p}")
        if e < 1 or m < 1:
            raise FieldError("degenerate tower: need e >= 1 and m >= 1")
        self.p, self.e, self.m = p, e, m
        self.q = p ** e
        self.dtop = 2 * e * m
        self.top = _gf(p, self.dtop)
        self.alpha = self.top.alpha
        self.level_degree = {1: e, 2: e * m, 3: 2 * e * m}
        self.moduli = {}
        self._theta = {}
        self._solvers = {}
        for lvl, deg in self.level_degree.items():
            if deg == self.dtop:
                self.moduli[lvl] = self.top.modulus
                self._theta[lvl] = self.top.p  # code of x itself
                # identity basis
                self._solvers[lvl] = None
                continue
            self.moduli[lvl] = smallest_irreducible(p, deg)
            self._theta[lvl] = self._embed_root(self.moduli[lvl], deg)
            self._solvers[lvl] = self._basis_solver(self._theta[lvl], deg)
        self.fq = fq_context(p, e)
        self._vec_solver = self._power_basis_solver()
        self._spot_check()

    # -- embeddings

    def _subfield_codes(self, deg):
        n1 = self.top.order - 1
        sub = p_pow = self.p ** deg
        step = n1 // (sub - 1)
        codes = [0] + [int(self.top.exp[(k * step) % n1]) for k in range(sub - 1)]
        return codes

    def _embed_root(self, modulus, deg):
        """Lex-smallest root of the level modulus inside the top field."""
        cands = sorted(set(self._subfield_codes(deg)), key=lambda c: self.top.coeffs(c))
        for c in cands:
            acc = 0
            for i, co in enumerate(modulus):
                if co:
                    term = self.top.mul(co % self.p, self.top.pow(c, i)) if i else co % self.p
                    acc = self.top.add(acc, term)
            if acc == 0:
                return c
        raise FieldError("modulus has no root in the top field")  # pragma: no cover

    def _basis_solver(self, theta, deg):
        cols = []
        for i in range(deg):
            cols.append(self.top.digits[self.top.pow(theta, i)])
        B = np.array(cols, dtype=np.int16).T  # dtop x deg over F_p
        return B

    def _power_basis_solver(self):
        # F_p basis of the top field: alpha^j * theta_q^i, j < 2m, i < e
        theta = self._theta[1]
        cols = []
        for j in range(2 * self.m):
            aj = self.top.pow(self.alpha, j)
            for i in range(self.e):
                cols.append(self.top.digits[self.top.mul(aj, self.top.pow(theta, i))])
        B = np.array(cols, dtype=np.int16).T
        fp = fq_context(self.p, 1)
        if fp.rank(B) != self.dtop:
            raise FieldError("power basis over F_q is degenerate")  # pragma: no cover
        return B

    def _solve_fp(self, B, target):
        fp = fq_context(self.p, 1)
        return fp.solve(B, np.asarray(target, dtype=np.int16))

    # -- conversions

    def embed(self, x: FieldElement) -> int:
        """Top-field code of a level element."""
        deg = self.level_degree[x.level]
        if len(x.coeffs) != deg:
            raise LevelMismatch(f"level {x.level} expects {deg} coefficients")
        if x.level == 3:
            return self.top.from_coeffs(x.coeffs)
        theta = self._theta[x.level]
        acc = 0
        for i, c in enumerate(x.coeffs):
            c = c % self.p
            if c:
                acc = self.top.add(acc, self.top.mul(c, self.top.pow(theta, i)))
        return acc

    def project(self, code: int, level: int) -> FieldElement:
        """Level element with the given top code, or LevelMismatch."""
        deg = self.level_degree[level]
        if level == 3:
            return FieldElement(3, self.top.coeffs(code), self)
        B = self._solvers[level]
        try:
            sol = self._solve_fp(B, self.top.digits[code])
        except FieldError:
            raise LevelMismatch(f"element is not in {LEVEL_NAMES[level]}")
        return FieldElement(level, tuple(int(c) for c in sol), self)

    def fe(self, level: int, coeffs) -> FieldElement:
        deg = self.level_degree[level]
        cs = tuple(int(c) % self.p for c in coeffs)
        if len(cs) != deg:
            raise LevelMismatch(f"level {level} expects {deg} coefficients, got {len(cs)}")
        return FieldElement(level, cs, self)

    def zero(self, level=3):
        return self.fe(level, (0,) * self.level_degree[level])

    def one(self, level=3):
        return self.fe(level, (1,) + (0,) * (self.level_degree[level] - 1))

    def alpha_fe(self) -> FieldElement:
        return FieldElement(3, self.top.coeffs(self.alpha), self)

    # F_q-coordinates of the top field in the basis 1, alpha, .., alpha^{2m-1}
    def top_to_vec(self, code: int) -> np.ndarray:
        sol = self._solve_fp(self._vec_solver, self.top.digits[code])
        out = np.empty(2 * self.m, dtype=np.int16)
        for j in range(2 * self.m):
            chunk = sol[j * self.e:(j + 1) * self.e]
            out[j] = self.fq.gf.from_coeffs([int(c) for c in chunk])
        return out

    def vec_to_top(self, vec) -> int:
        theta = self._theta[1]
        acc = 0
        for j, cj in enumerate(vec):
            cj = int(cj)
            if cj == 0:
                continue
            aj = self.top.pow(self.alpha, j)
            poly = self.fq.gf.coeffs(cj)
            lifted = 0
            for i, c in enumerate(poly):
                if c:
                    lifted = self.top.add(lifted, self.top.mul(c, self.top.pow(theta, i)))
            acc = self.top.add(acc, self.top.mul(aj, lifted))
        return acc

    def fq_code_to_top(self, c: int) -> int:
        theta = self._theta[1]
        acc = 0
        for i, co in enumerate(self.fq.gf.coeffs(c)):
            if co:
                acc = self.top.add(acc, self.top.mul(co, self.top.pow(theta, i)))
        return acc

    def top_to_fq_code(self, code: int) -> int:
        fe = self.project(code, 1)
        return self.fq.gf.from_coeffs(fe.coeffs)

    # -- the tower maps

    def bar_code(self, code: int) -> int:
        """x -> x^{q^m} on top codes."""
        return self.top.pow(code, self.q ** self.m) if code else 0

    def trace_code(self, code: int, level_from: int) -> int:
        """Trace one level down, Sum_{i} x^{B^i}, as a top code."""
        base_deg = self.level_degree[level_from - 1] if level_from > 1 else 1
        b = self.p ** base_deg
        steps = self.level_degree[level_from] // base_deg
        acc = 0
        cur = code
        for _ in range(steps):
            acc = self.top.add(acc, cur)
            cur = self.top.pow(cur, b) if cur else 0
        return acc

    def norm_to_mid(self, code: int) -> int:
        """x * bar(x), lands in F_{q^m}."""
        return self.top.mul(code, self.bar_code(code)) if code else 0

    def _spot_check(self):
        rng = np.random.default_rng(20240311)
        n = self.top.order
        for _ in range(8):
            for lvl in (1, 2):
                a = int(rng.integers(0, self.p ** self.level_degree[lvl]))
                b = int(rng.integers(0, self.p ** self.level_degree[lvl]))
                fa = FieldElement(lvl, self.fq.gf.coeffs(a) if lvl == 1 and self.e == self.level_degree[lvl] else self._codes_to_coeffs(a, lvl), self)
                fb = FieldElement(lvl, self._codes_to_coeffs(b, lvl), self)
                ea, eb = self.embed(fa), self.embed(fb)
                s = self.top.add(ea, eb)
                m_ = self.top.mul(ea, eb)
                # sums and products stay in the subfield
                self.project(s, lvl)
                self.project(m_, lvl)
        a_ord = self.top.element_order(self.alpha)
        if a_ord != n - 1:
            raise FieldError("primitive element order check failed")  # pragma: no cover

    def _codes_to_coeffs(self, packed: int, lvl: int):
        deg = self.level_degree[lvl]
        out = []
        for _ in range(deg):
            out.append(packed % self.p)
            packed //= self.p
        return tuple(out)

    def to_json(self):
        return {
            "p": self.p,
            "e": self.e,
            "m": self.m,
            "moduli": {str(k): list(v) for k, v in self.moduli.items()},
            "alpha": list(self.top.coeffs(self.alpha)),
        }

    def __repr__(self):
        return f"FieldTower(p={self.p}, e={self.e}, m={self.m})"


@lru_cache(maxsize=None)
def make_tower(p: int, e: int, m: int) -> FieldTower:
    """Tower F_p < F_{p^e} < F_{p^em} < F_{p^2em}; rejects even/composite p."""
    return FieldTower(p, e, m)


# ----------------------------------------------------------------------
# element-level operation wrappers


def field_arith(op: str, x: FieldElement, y=None) -> FieldElement:
    tw = x.tower
    if tw is None:
        raise FieldError("element carries no tower")
    if op == "pow":
        if not isinstance(y, int):
            raise FieldError("pow needs an integer exponent")
        code = tw.embed(x)
        if code == 0 and y < 0:
            raise FieldError("inversion of zero")
        return tw.project(tw.top.pow(code, y) if code else (1 if y == 0 else 0), x.level)
    if op == "inv":
        code = tw.embed(x)
        if code == 0:
            raise FieldError("inversion of zero")
        return tw.project(tw.top.inv(code), x.level)
    if not isinstance(y, FieldElement):
        raise FieldError(f"{op} needs a second field element")
    if y.level != x.level:
        raise LevelMismatch(f"level mismatch: {x.level} vs {y.level}")
    a, b = tw.embed(x), tw.embed(y)
    if op == "add":
        return tw.project(tw.top.add(a, b), x.level)
    if op == "sub":
        return tw.project(tw.top.sub(a, b), x.level)
    if op == "mul":
        return tw.project(tw.top.mul(a, b), x.level)
    raise FieldError(f"unknown op {op!r}")


def trace_to_base(x: FieldElement) -> FieldElement:
    """Trace map one tower step down; result is asserted to live there."""
    tw = x.tower
    if x.level < 2:
        raise LevelMismatch("level has no declared base inside the tower")
    code = tw.trace_code(tw.embed(x), x.level)
    return tw.project(code, x.level - 1)


def bar(x: FieldElement) -> FieldElement:
    """Conjugation y -> y^{q^m} on the top level."""
    tw = x.tower
    if x.level != 3:
        raise LevelMismatch("bar is defined on the top level")
    return tw.project(tw.bar_code(tw.embed(x)), 3)
