"""Slow reference computations used to derive and cross-check test values.

Everything here is plain Python on dicts and lists and imports nothing from
supercartan: field arithmetic by schoolbook polynomials, ranks by textbook
Gaussian elimination, functions and vector fields as {key: coeff} dicts.
"""
from itertools import product
from math import comb
import random


# -- GF(p^k) -------------------------------------------------------------------

def poly_divmod(a, b, p):
    """Quotient and remainder of coefficient lists (low -> high) over GF(p)."""
    a = [x % p for x in a]
    while len(b) > 1 and b[-1] % p == 0:
        b = b[:-1]
    inv_lead = pow(b[-1], p - 2, p)
    q = [0] * max(1, len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv_lead % p
        q[i] = c
        for j, y in enumerate(b):
            a[i + j] = (a[i + j] - c * y) % p
    r = a[:len(b) - 1] or [0]
    return q, r


def poly_mulmod(a, b, mod, p):
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    k = len(mod) - 1
    r = poly_divmod(prod, list(mod), p)[1]
    return tuple((r + [0] * k)[:k])


def is_irreducible_brute(f, p):
    """No monic factor of degree 1..deg/2, by trial division over all candidates."""
    k = len(f) - 1
    for d in range(1, k // 2 + 1):
        for low in product(range(p), repeat=d):
            g = list(low) + [1]
            if not any(poly_divmod(list(f), g, p)[1]):
                return False
    return True


def first_irreducible(p, k):
    """Monic irreducible of degree k, least when coefficients are read from
    x^(k-1) down to the constant term."""
    for high_first in product(range(p), repeat=k):
        f = tuple(reversed(high_first)) + (1,)
        if is_irreducible_brute(f, p):
            return f
    raise ValueError("none found")


def gf_elements(p, k):
    return [tuple(c) for c in product(range(p), repeat=k)]


def gf_inv_brute(a, mod, p):
    k = len(mod) - 1
    one = (1,) + (0,) * (k - 1)
    for b in gf_elements(p, k):
        if poly_mulmod(list(a), list(b), mod, p) == one:
            return b
    raise ZeroDivisionError


# -- linear algebra over GF(p) ----------------------------------------------------

def rref_mod_p(rows, p):
    rows = [[x % p for x in r] for r in rows]
    out, pivots = [], []
    ncols = len(rows[0]) if rows else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def rank_mod_p(rows, p):
    return len(rref_mod_p(rows, p)[0]) if rows else 0


def nullspace_mod_p(rows, ncols, p):
    """Basis of {v : rows @ v = 0}."""
    R, piv = rref_mod_p(rows, p) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, c in zip(R, piv):
            v[c] = -row[f] % p
        basis.append(v)
    return basis


class Echelon:
    """Incrementally grown row space, keyed by pivot column."""

    def __init__(self, p):
        self.p = p
        self.rows = {}

    def reduce(self, v):
        v = dict((k, c % self.p) for k, c in v.items() if c % self.p)
        while v:
            lead = min(v)
            if lead not in self.rows:
                return v
            f = v[lead]
            for k, c in self.rows[lead].items():
                x = (v.get(k, 0) - f * c) % self.p
                if x:
                    v[k] = x
                else:
                    v.pop(k, None)
        return v

    def add(self, v) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        lead = min(v)
        inv = pow(v[lead], self.p - 2, self.p)
        self.rows[lead] = {k: c * inv % self.p for k, c in v.items()}
        return True

    def __len__(self):
        return len(self.rows)


# -- O(m,n;t) and its superderivations ------------------------------------------------

class DividedPowers:
    """Keys are (alpha, u): alpha an m-tuple, u a sorted tuple of odd indices."""

    def __init__(self, m, n, t, p):
        self.m, self.n, self.p = m, n, p
        self.t = tuple(t)
        self.pi = tuple(p ** x - 1 for x in self.t)
        self.odd = tuple(range(m + 1, m + n + 1))

    def monomials(self):
        evens = list(product(*[range(x + 1) for x in self.pi]))
        odds = []
        for mask in range(2 ** self.n):
            odds.append(tuple(j for b, j in enumerate(self.odd) if mask >> b & 1))
        return [(a, u) for a in evens for u in odds]

    @staticmethod
    def parity(key):
        return len(key[1]) % 2

    @staticmethod
    def degree(key, weights=None):
        a, u = key
        if weights is None:
            return sum(a) + len(u)
        m = len(a)
        return sum(w * x for w, x in zip(weights[:m], a)) + sum(weights[j - 1] for j in u)

    def var(self, i):
        if i <= self.m:
            a = [0] * self.m
            a[i - 1] = 1
            return {(tuple(a), ()): 1}
        return {((0,) * self.m, (i,)): 1}

    def one(self):
        return {((0,) * self.m, ()): 1}

    def mono_mul(self, k1, k2):
        (a, u), (b, v) = k1, k2
        c = 1
        s = []
        for x, y, q in zip(a, b, self.pi):
            if x + y > q:
                return None, 0
            c = c * comb(x + y, x) % self.p
            s.append(x + y)
        if set(u) & set(v):
            return None, 0
        inv = sum(1 for i in u for j in v if i > j)
        c = c * (-1) ** inv % self.p
        if not c:
            return None, 0
        return (tuple(s), tuple(sorted(u + v))), c

    def mul(self, f, g):
        out = {}
        for k1, c1 in f.items():
            for k2, c2 in g.items():
                k, c = self.mono_mul(k1, k2)
                if k is not None:
                    out[k] = (out.get(k, 0) + c * c1 * c2) % self.p
        return clean(out, self.p)

    def deriv(self, r, f):
        out = {}
        for (a, u), c in f.items():
            if r <= self.m:
                if a[r - 1] == 0:
                    continue
                b = list(a)
                b[r - 1] -= 1
                key, c2 = (tuple(b), u), c
            else:
                if r not in u:
                    continue
                pos = u.index(r)
                key, c2 = (a, u[:pos] + u[pos + 1:]), c * (-1) ** pos
            out[key] = (out.get(key, 0) + c2) % self.p
        return clean(out, self.p)

    def vpar(self, r):
        return 0 if r <= self.m else 1

    def scale(self, f, c):
        return clean({k: v * c for k, v in f.items()}, self.p)

    def add(self, *fs):
        out = {}
        for f in fs:
            for k, v in f.items():
                out[k] = (out.get(k, 0) + v) % self.p
        return clean(out, self.p)

    def terms(self, f):
        """Split into single-monomial dicts."""
        return [{k: c} for k, c in f.items()]


def clean(d, p):
    return {k: v % p for k, v in d.items() if v % p}


class VectorFields:
    """Superderivations Σ f_r ∂_r of O as dicts {((alpha, u), r): coeff}."""

    def __init__(self, O: DividedPowers):
        self.O = O
        self.p = O.p
        self.N = O.m + O.n

    def basis(self):
        return [{(k, r): 1} for k in self.O.monomials() for r in range(1, self.N + 1)]

    def term_parity(self, key):
        (mono, r) = key
        return (self.O.parity(mono) + self.O.vpar(r)) % 2

    def zdeg(self, key):
        return self.O.degree(key[0]) - 1

    def coeff(self, D, r):
        return {k: c for (k, s), c in D.items() if s == r}

    def from_coeffs(self, coeffs):
        out = {}
        for r, f in coeffs.items():
            for k, c in f.items():
                out[(k, r)] = (out.get((k, r), 0) + c) % self.p
        return clean(out, self.p)

    def apply(self, D, f):
        O = self.O
        out = {}
        for (k, r), c in D.items():
            g = O.mul({k: c}, O.deriv(r, f))
            out = O.add(out, g)
        return out

    def bracket(self, D, E):
        """Term-by-term: [a∂_r, b∂_s] = a∂_r(b)∂_s - (-1)^{|a∂_r||b∂_s|} b∂_s(a)∂_r."""
        O = self.O
        out = {}
        for (ka, r), ca in D.items():
            pa = self.term_parity((ka, r))
            for (kb, s), cb in E.items():
                pb = self.term_parity((kb, s))
                a, b = {ka: ca}, {kb: cb}
                t1 = O.mul(a, O.deriv(r, b))
                t2 = O.scale(O.mul(b, O.deriv(s, a)), -((-1) ** (pa * pb)))
                for k, c in t1.items():
                    out[(k, s)] = (out.get((k, s), 0) + c) % self.p
                for k, c in t2.items():
                    out[(k, r)] = (out.get((k, r), 0) + c) % self.p
        return clean(out, self.p)

    def div(self, D):
        O = self.O
        out = {}
        for (k, r), c in D.items():
            sign = (-1) ** (O.vpar(r) * O.parity(k))
            out = O.add(out, O.scale(O.deriv(r, {k: c}), sign))
        return out


# -- the operators defining the families, applied monomial by monomial ------------------

def _prime(i, m):
    r = m // 2
    if 1 <= i <= r:
        return i + r
    if r < i <= 2 * r:
        return i - r
    return i


def _sigma(i, m):
    r = m // 2
    return -1 if r < i <= 2 * r else 1


def _dprime(i, m):
    return i + m if i <= m else i - m


def D_ij(V: VectorFields, i, j, a):
    O = V.O
    out = {}
    for f in O.terms(a):
        pa = O.parity(next(iter(f)))
        pi, pj = O.vpar(i), O.vpar(j)
        c1 = (-1) ** (pi * pj)
        c2 = -((-1) ** ((pi + pj) * pa))
        out = _vadd(V, out, V.from_coeffs({j: O.scale(O.deriv(i, f), c1)}),
                    V.from_coeffs({i: O.scale(O.deriv(j, f), c2)}))
    return out


def D_H(V: VectorFields, a):
    O = V.O
    m = O.m
    out = {}
    for f in O.terms(a):
        pa = O.parity(next(iter(f)))
        for i in range(1, V.N + 1):
            c = _sigma(i, m) * (-1) ** (O.vpar(i) * pa)
            out = _vadd(V, out, V.from_coeffs({_prime(i, m): O.scale(O.deriv(i, f), c)}))
    return out


def T_H(V: VectorFields, a):
    """Sum over the first 2m variables (so it also serves O(m,m+1))."""
    O = V.O
    m = O.m
    out = {}
    for f in O.terms(a):
        pa = O.parity(next(iter(f)))
        for i in range(1, 2 * m + 1):
            c = (-1) ** (O.vpar(i) * pa)
            out = _vadd(V, out, V.from_coeffs({_dprime(i, m): O.scale(O.deriv(i, f), c)}))
    return out


def D_K(V: VectorFields, a):
    O = V.O
    m = O.m
    out = {}
    for f in O.terms(a):
        pa = O.parity(next(iter(f)))
        dm = O.deriv(m, f)
        euler = O.scale(f, 2)
        coeffs = {}
        for i in range(1, V.N + 1):
            if i == m:
                continue
            s = (-1) ** (O.vpar(i) * pa)
            ip = _prime(i, m)
            term = O.add(O.mul(O.var(i), dm), O.scale(O.deriv(ip, f), _sigma(ip, m)))
            coeffs[i] = O.scale(term, s)
            euler = O.add(euler, O.scale(O.mul(O.var(i), O.deriv(i, f)), -1))
        coeffs[m] = euler
        out = _vadd(V, out, V.from_coeffs(coeffs))
    return out


def _vadd(V, *Ds):
    out = {}
    for D in Ds:
        for k, c in D.items():
            out[k] = (out.get(k, 0) + c) % V.p
    return clean(out, V.p)


def bracket_K(V: VectorFields, a, b):
    O = V.O
    return O.add(V.apply(D_K(V, a), b), O.scale(O.mul(O.deriv(O.m, a), b), -2))


def euler_D(V: VectorFields, f):
    """Σ_{i ≤ 2m} x_i ∂_i."""
    O = V.O
    out = {}
    for i in range(1, 2 * O.m + 1):
        out = O.add(out, O.mul(O.var(i), O.deriv(i, f)))
    return out


def bracket_KO(V: VectorFields, a, b):
    O = V.O
    z = 2 * O.m + 1
    out = {}
    for fa in O.terms(a):
        pa = O.parity(next(iter(fa)))
        sa = (-1) ** pa
        dz = O.deriv(z, fa)
        part = V.apply(T_H(V, fa), b)
        part = O.add(part, O.scale(O.mul(dz, euler_D(V, b)), sa))
        part = O.add(part, O.mul(O.add(euler_D(V, fa), O.scale(fa, -2)), O.deriv(z, b)))
        part = O.add(part, O.scale(O.mul(dz, b), -2 * sa))
        out = O.add(out, part)
    return out


def div_lambda(O: DividedPowers, lam, a):
    m, p = O.m, O.p
    z = 2 * m + 1
    V = VectorFields(O)
    out = {}
    for f in O.terms(a):
        pa = O.parity(next(iter(f)))
        acc = {}
        for i in range(1, m + 1):
            acc = O.add(acc, O.deriv(i, O.deriv(_dprime(i, m), f)))
        dz = O.deriv(z, f)
        acc = O.add(acc, euler_D(V, dz), O.scale(dz, -m * lam))
        out = O.add(out, O.scale(acc, 2 * (-1) ** pa))
    return out


# -- spans, derived algebras, closures --------------------------------------------------

def block_dims(elements, blockfn, p):
    """Rank of each homogeneous block; elements must be homogeneous."""
    ech = {}
    for e in elements:
        if not e:
            continue
        key = blockfn(e)
        ech.setdefault(key, Echelon(p)).add(e)
    return {k: len(v) for k, v in ech.items()}


def span_basis(elements, blockfn, p):
    """Homogeneous echelon basis of the span of homogeneous elements."""
    ech = {}
    for e in elements:
        if e:
            ech.setdefault(blockfn(e), Echelon(p)).add(e)
    return [dict(r) for E in ech.values() for r in E.rows.values()]


def derived_dims(basis, bracket, blockfn, caps, p):
    """Block ranks of [L, L] for a homogeneous basis of L.  Pairs whose target
    block has already reached its cap (the rank of L there) are skipped."""
    ech = {}
    blocks = [blockfn(e) for e in basis]
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            tgt = _target(blocks[i], blocks[j])
            if len(ech.get(tgt, ())) >= caps.get(tgt, 0):
                continue
            v = bracket(basis[i], basis[j])
            if v:
                assert blockfn(v) == tgt, "bracket left the expected block"
                ech.setdefault(tgt, Echelon(p)).add(v)
    return {k: len(v) for k, v in ech.items()}


def _target(b1, b2):
    return (b1[0] + b2[0], (b1[1] + b2[1]) % 2)


def closure_dim(gens, bracket, p, limit=10 ** 6):
    """Dimension of the subalgebra generated by gens (dict vectors), naive loop."""
    ech = Echelon(p)
    basis = []
    for g in gens:
        if ech.add(g):
            basis.append(g)
    i = 0
    while i < len(basis) and len(basis) < limit:
        for j in range(i + 1):
            v = bracket(basis[i], basis[j])
            if ech.add(v):
                basis.append(v)
        i += 1
    return len(ech)


# -- matrices ------------------------------------------------------------------------

def e(i, j, size):
    M = [[0] * size for _ in range(size)]
    M[i - 1][j - 1] = 1
    return M


def mat_add(*Ms, coeffs=None):
    size = len(Ms[0])
    coeffs = coeffs or [1] * len(Ms)
    return [[sum(c * M[i][j] for c, M in zip(coeffs, Ms)) for j in range(size)] for i in range(size)]


def mat_mul(A, B):
    size = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(size)) for j in range(size)] for i in range(size)]


def block_parity(M, m):
    """Parity of a homogeneous supermatrix with an m x m even block."""
    par = set()
    for i, row in enumerate(M):
        for j, x in enumerate(row):
            if x:
                par.add(int((i < m) != (j < m)))
    if len(par) > 1:
        raise ValueError("inhomogeneous matrix")
    return par.pop() if par else 0


def supercommutator(A, B, m, p):
    pa, pb = block_parity(A, m), block_parity(B, m)
    AB, BA = mat_mul(A, B), mat_mul(B, A)
    s = (-1) ** (pa * pb)
    return [[(x - s * y) % p for x, y in zip(r1, r2)] for r1, r2 in zip(AB, BA)]


def mat_from_text(text, size):
    """'e57 - e31' style sums (single-digit indices) to a matrix."""
    import re
    M = [[0] * size for _ in range(size)]
    for sign, i, j in re.findall(r"([+-]?)\s*e(\d)(\d)", text):
        M[int(i) - 1][int(j) - 1] += -1 if sign == "-" else 1
    return M


def random_vector(keys, p, rng: random.Random):
    return clean({k: rng.randrange(p) for k in keys}, p)


# -- family instances ------------------------------------------------------------------

def w_block(V: VectorFields):
    def key(D):
        k = next(iter(D))
        return (V.zdeg(k), V.term_parity(k))
    return key


def o_block(O: DividedPowers, weights, parity_shift=0):
    def key(f):
        k = next(iter(f))
        return (O.degree(k, weights) - 2, (O.parity(k) + parity_shift) % 2)
    return key


def family_block_dims(family, m, n, t, p, lam=None):
    """{(degree, parity): dim} of a family instance computed from the defining
    formulas alone (spans of operator images, derived algebras by brute force)."""
    O = DividedPowers(m, n, t, p)
    V = VectorFields(O)
    monos = [{k: 1} for k in O.monomials()]
    N = m + n
    if family == "W":
        return block_dims(V.basis(), w_block(V), p)
    if family == "S":
        els = [D_ij(V, i, j, f) for i in range(1, N + 1) for j in range(1, N + 1) for f in monos]
        return block_dims(els, w_block(V), p)
    if family == "HO":
        return block_dims([T_H(V, f) for f in monos], w_block(V), p)
    if family == "H":
        bar = span_basis([D_H(V, f) for f in monos], w_block(V), p)
        caps = block_dims(bar, w_block(V), p)
        return derived_dims(bar, V.bracket, w_block(V), caps, p)
    if family == "K":
        weights = [1] * N
        weights[m - 1] = 2
        blk = o_block(O, weights)
        caps = block_dims(monos, blk, p)
        return derived_dims(monos, lambda a, b: bracket_K(V, a, b), blk, caps, p)
    if family == "KO":
        weights = [1] * N
        weights[2 * m] = 2
        return block_dims(monos, o_block(O, weights, 1), p)
    raise ValueError(family)


def block_intersection(U, W_, blockfn, p):
    """Homogeneous basis of span(U) ∩ span(W_), block by block."""
    ub, wb = {}, {}
    for x in U:
        if x:
            ub.setdefault(blockfn(x), []).append(x)
    for x in W_:
        if x:
            wb.setdefault(blockfn(x), []).append(x)
    out = []
    for key in set(ub) & set(wb):
        us, ws = ub[key], wb[key]
        coords = sorted({k for v in us + ws for k in v})
        idx = {k: i for i, k in enumerate(coords)}
        cols = [[v.get(k, 0) for k in coords] for v in us] + \
               [[-v.get(k, 0) % p for k in coords] for v in ws]
        rows = [list(r) for r in zip(*cols)]
        for sol in nullspace_mod_p(rows, len(cols), p):
            vec = {}
            for c, v in zip(sol[:len(us)], us):
                if c:
                    for k, x in v.items():
                        vec[k] = (vec.get(k, 0) + c * x) % p
            vec = clean(vec, p)
            if vec:
                out.append(vec)
    return span_basis(out, blockfn, p)


def block_kernel(basis, linmap, blockfn, p):
    """Homogeneous basis of the kernel of linmap on span(basis)."""
    groups = {}
    for x in basis:
        groups.setdefault(blockfn(x), []).append(x)
    out = []
    for key, xs in groups.items():
        imgs = [linmap(x) for x in xs]
        coords = sorted({k for v in imgs for k in v})
        rows = [[v.get(k, 0) for v in imgs] for k in coords]
        for sol in nullspace_mod_p(rows, len(xs), p):
            vec = {}
            for c, v in zip(sol, xs):
                if c:
                    for k, y in v.items():
                        vec[k] = (vec.get(k, 0) + c * y) % p
            vec = clean(vec, p)
            if vec:
                out.append(vec)
    return out


def derived_basis(basis, bracket, blockfn, caps, p):
    """Like derived_dims but also returns the echelon basis of [L, L]."""
    ech = {}
    blocks = [blockfn(e) for e in basis]
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            tgt = _target(blocks[i], blocks[j])
            if len(ech.get(tgt, ())) >= caps.get(tgt, 0):
                continue
            v = bracket(basis[i], basis[j])
            if v:
                ech.setdefault(tgt, Echelon(p)).add(v)
    return [dict(r) for E in ech.values() for r in E.rows.values()]


def sho_block_dims(m, t, p):
    O = DividedPowers(m, m, t, p)
    V = VectorFields(O)
    blk = w_block(V)
    monos = [{k: 1} for k in O.monomials()]
    N = 2 * m
    S = span_basis([D_ij(V, i, j, f) for i in range(1, N + 1) for j in range(1, N + 1)
                    for f in monos], blk, p)
    HO = span_basis([T_H(V, f) for f in monos], blk, p)
    L = block_intersection(S, HO, blk, p)
    for _ in range(2):
        L = derived_basis(L, V.bracket, blk, block_dims(L, blk, p), p)
    return block_dims(L, blk, p)


def sko_block_dims(m, t, p, lam):
    O = DividedPowers(m, m + 1, t, p)
    V = VectorFields(O)
    weights = [1] * (2 * m + 1)
    weights[2 * m] = 2
    blk = o_block(O, weights, 1)
    monos = [{k: 1} for k in O.monomials()]
    L = block_kernel(monos, lambda a: div_lambda(O, lam, a), blk, p)
    L = span_basis(L, blk, p)
    br = lambda a, b: bracket_KO(V, a, b)
    for _ in range(2):
        L = derived_basis(L, br, blk, block_dims(L, blk, p), p)
    return block_dims(L, blk, p)


if __name__ == "__main__":
    import sys
    import time
    cases = {
        "W(1,2)": ("W", 1, 2, (1,), 5), "W(2,2)": ("W", 2, 2, (1, 1), 5),
        "S(2,2)": ("S", 2, 2, (1, 1), 5), "H(2,2)": ("H", 2, 2, (1, 1), 5),
        "HO(3,3)": ("HO", 3, 3, (1, 1, 1), 5), "K(3,2)": ("K", 3, 2, (1, 1, 1), 5),
    }
    extra = {"SHO(3,3)": lambda: sho_block_dims(3, (1, 1, 1), 5),
             "SKO(3,4;1)": lambda: sko_block_dims(3, (1, 1, 1), 5, 1),
             "SKO(3,4;3)": lambda: sko_block_dims(3, (1, 1, 1), 5, 3)}
    for name in sys.argv[1:] or list(cases) + list(extra):
        t0 = time.time()
        dims = extra[name]() if name in extra else family_block_dims(*cases[name])
        print(name, sum(dims.values()), dict(sorted(dims.items())), f"{time.time() - t0:.1f}s")
