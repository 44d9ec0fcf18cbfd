"""Matrix models of gl(m,n) and its classical relatives.

Every kind is a subalgebra of gl(m,n) = End(F^{m|n}) with basis e_ij, indexed
``(i-1)*(m+n) + (j-1)``; e_ij is odd exactly when it sits in an off-diagonal
block.  All classical algebras are carried in Z-degree 0.
"""

from __future__ import annotations

import re

import numpy as np
import scipy.sparse as sp

from .algebra import (AlgebraError, GradedSuperalgebra, modp, span_subalgebra,
                      weight_decomposition)
from .carrier import render_combination, signed
from .field import FieldCtx
from .linalg import inverse, nullspace

KINDS = ("gl", "sl", "osp", "L", "P", "Ptilde", "Ptilde+I", "osp+I")


class BadShape(AlgebraError):
    pass


def _ename(i: int, j: int, size: int) -> str:
    return f"e{i}{j}" if size < 10 else f"e{i}_{j}"


class MatrixRoot:
    """gl(m,n) with the supercommutator [A, B] = AB - (-1)^{|A||B|} BA."""

    def __init__(self, m: int, n: int, p: int):
        self.m, self.n, self.p = m, n, p
        self.size = s = m + n
        self.dim = s * s
        blk = np.array([0] * m + [1] * n)
        self.entry_parity = (blk[:, None] ^ blk[None, :])
        self.parity = self.entry_parity.ravel().astype(np.int64)
        self.zdeg = np.zeros(self.dim, dtype=np.int64)
        self.labels = [_ename(i + 1, j + 1, s) for i in range(s) for j in range(s)]

    def ad_of(self, vec: np.ndarray) -> sp.csr_matrix:
        s, p = self.size, self.p
        nz = np.flatnonzero(vec % p)
        a, b = nz // s, nz % s
        c = vec[nz] % p
        q = self.entry_parity[a, b]
        r = np.arange(s)
        # A e_bj = e_aj ; column (b, j), row (a, j)
        rows1 = (a[:, None] * s + r[None, :]).ravel()
        cols1 = (b[:, None] * s + r[None, :]).ravel()
        vals1 = np.repeat(c, s)
        # e_ia A = e_ib ; column (i, a), row (i, b), sign (-1)^{|A||e_ia|}
        rows2 = (r[None, :] * s + b[:, None]).ravel()
        cols2 = (r[None, :] * s + a[:, None]).ravel()
        sgn = np.where(q[:, None] & self.entry_parity[r[None, :], a[:, None]], -1, 1)
        vals2 = (-sgn * c[:, None]).ravel()
        M = sp.coo_matrix((np.concatenate([vals1, vals2]) % p,
                           (np.concatenate([rows1, rows2]), np.concatenate([cols1, cols2]))),
                          shape=(self.dim, self.dim))
        return modp(M, p)

    def render(self, vec: np.ndarray) -> str:
        return render_combination([(int(vec[i]), self.labels[i]) for i in np.flatnonzero(vec)], self.p)

    def matrix(self, vec: np.ndarray) -> np.ndarray:
        return np.asarray(vec).reshape(self.size, self.size) % self.p

    def vector(self, M: np.ndarray) -> np.ndarray:
        return np.asarray(M, dtype=np.int64).reshape(-1) % self.p

    def e(self, i: int, j: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[(i - 1) * self.size + (j - 1)] = 1
        return v

    def parse(self, text: str) -> np.ndarray:
        """``"e17+e35-2*e64"`` (1-based indices; ``e1_10`` when m+n >= 10)."""
        v = np.zeros(self.dim, dtype=np.int64)
        for sgn, coef, i, j in re.findall(r"([+-]?)\s*(?:(\d+)\*)?e(\d+?)_?(\d+)\b",
                                          text.replace(" ", "")):
            if self.size >= 10 and "_" not in text:
                raise ValueError("use e<i>_<j> labels when m+n >= 10")
            c = int(coef or 1) * (-1 if sgn == "-" else 1)
            v = (v + c * self.e(int(i), int(j))) % self.p
        return v


def gl_algebra(m: int, n: int, field: FieldCtx) -> GradedSuperalgebra:
    root = MatrixRoot(m, n, field.p)
    s = m + n
    return GradedSuperalgebra(field, root.labels, root.parity, root.zdeg, root,
                              cartan=[i * s + i for i in range(s)],
                              meta={"kind": "gl", "family": "gl", "m": m, "n": n},
                              renderer=root.render)


def _identity(root: MatrixRoot) -> np.ndarray:
    return root.vector(np.eye(root.size, dtype=np.int64))


def _w_element(root: MatrixRoot, m: int) -> np.ndarray:
    return root.vector(np.diag([1] * m + [-1] * m))


def _osp_forms(m: int, n: int):
    if m % 2:
        raise BadShape("osp(m,n) and L(m,n) need m even")
    r, q = m // 2, n // 2
    G = np.zeros((m, m), dtype=np.int64)
    G[:r, r:] = np.eye(r, dtype=np.int64)
    G[r:, :r] = -np.eye(r, dtype=np.int64)
    M = np.zeros((n, n), dtype=np.int64)
    off = n % 2
    if off:
        M[0, 0] = 1
    M[off:off + q, off + q:] = np.eye(q, dtype=np.int64)
    M[off + q:, off:off + q] = np.eye(q, dtype=np.int64)
    return G, M


def _constraint_space(root: MatrixRoot, constraints) -> np.ndarray:
    """Basis rows of {X in gl : every linear constraint vanishes}."""
    s, p = root.size, root.p
    rows = []
    for idx in range(root.dim):
        E = np.zeros((s, s), dtype=np.int64)
        E.flat[idx] = 1
        rows.append(np.concatenate([c(E).ravel() for c in constraints]))
    C = np.array(rows).T % p
    return nullspace(C, FieldCtx(p))[0]


def _blocks(X, m):
    return X[:m, :m], X[:m, m:], X[m:, :m], X[m:, m:]


def osp_constraints(m, n):
    G, M = _osp_forms(m, n)

    def c1(X):
        A, B, C, D = _blocks(X, m)
        return A.T @ G + G @ A

    def c2(X):
        A, B, C, D = _blocks(X, m)
        return B.T @ G + M @ C

    def c3(X):
        A, B, C, D = _blocks(X, m)
        return D.T @ M + M @ D
    return [c1, c2, c3]


def lfrak_constraints(m, n):
    G, _ = _osp_forms(m, n)

    def c1(X):
        A, B, C, D = _blocks(X, m)
        return A.T @ G + G @ A

    def c2(X):
        A, B, C, D = _blocks(X, m)
        return B.T @ G + C

    def c3(X):
        A, B, C, D = _blocks(X, m)
        return D.T + D
    return [c1, c2, c3]


def _osp_cartan(root: MatrixRoot, m: int, n: int) -> list:
    r, q, off = m // 2, n // 2, n % 2
    out = []
    for i in range(1, r + 1):
        out.append((f"{_ename(i, i, root.size)}-{_ename(i + r, i + r, root.size)}",
                    (root.e(i, i) - root.e(i + r, i + r)) % root.p))
    for j in range(1, q + 1):
        a = m + off + j
        out.append((f"{_ename(a, a, root.size)}-{_ename(a + q, a + q, root.size)}",
                    (root.e(a, a) - root.e(a + q, a + q)) % root.p))
    return out


def _lfrak_cartan(root: MatrixRoot, m: int, n: int) -> list:
    r, q = m // 2, n // 2
    out = []
    for i in range(1, r + 1):
        out.append((None, (root.e(i, i) - root.e(i + r, i + r)) % root.p))
    for j in range(1, q + 1):
        a = m + j
        out.append((None, (root.e(a, a + q) - root.e(a + q, a)) % root.p))
    return out


def _root_vector_basis(gl: GradedSuperalgebra, space_rows, cartan, meta) -> GradedSuperalgebra:
    """Subalgebra spanned by ``space_rows`` with a basis of Cartan elements and
    weight vectors (first RREF row scaled per weight space)."""
    root = gl.root
    crow = np.array([v for _, v in cartan])
    clab = [l or root.render(v) for l, v in cartan]
    tmp = span_subalgebra(gl, space_rows, [root.render(v) for v in space_rows], crow, clab, meta)
    ws = weight_decomposition(tmp, 0)
    rows, labels = [], []
    for (w, q), S in sorted(ws.spaces.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        for v in S.basis():
            rv = tmp.to_root(v)
            rows.append(rv)
            labels.append(root.render(rv))
    order = sorted(range(len(rows)), key=lambda t: _first_index(rows[t]))
    rows = [rows[t] for t in order]
    labels = [labels[t] for t in order]
    return span_subalgebra(gl, np.array(rows), labels, crow, clab, meta)


def _first_index(v):
    nz = np.flatnonzero(v)
    return (int(nz[0]) if nz.size else 0, tuple(nz.tolist()))


def build_classical(kind: str, m: int, n: int | None, field: FieldCtx) -> GradedSuperalgebra:
    """Classical superalgebra of the given kind inside gl(m,n) (gl(m,m) for the P kinds)."""
    if kind not in KINDS:
        raise BadShape(f"unknown kind {kind!r}; expected one of {KINDS}")
    if kind in ("P", "Ptilde", "Ptilde+I"):
        if n not in (None, m):
            raise BadShape("P-type kinds live in gl(m,m)")
        n = m
    if m < 1 or n is None or n < 0:
        raise BadShape(f"bad block sizes m={m}, n={n}")
    p = field.p
    gl = gl_algebra(m, n, field)
    if kind == "gl":
        return gl
    root = gl.root
    s = root.size
    meta = {"kind": kind, "family": kind, "m": m, "n": n}
    E = root.e
    if kind == "sl":
        rows, labels = [], []
        for i in range(1, s + 1):
            for j in range(1, s + 1):
                if i != j:
                    rows.append(E(i, j)); labels.append(_ename(i, j, s))
        cart = []
        for i in range(2, s + 1):
            if i <= m:
                v = (E(1, 1) - E(i, i)) % p
            else:
                v = (E(1, 1) + E(i, i)) % p
            cart.append((root.render(v), v))
        if m == 0:
            raise BadShape("sl(0,n) is not modelled")
        return span_subalgebra(gl, np.array(rows), labels, np.array([v for _, v in cart]),
                               [l for l, _ in cart], meta)
    if kind in ("P", "Ptilde", "Ptilde+I"):
        rows, labels, cart = [], [], []
        for i in range(1, m + 1):
            for j in range(1, m + 1):
                if i != j:
                    v = (E(i, j) - E(m + j, m + i)) % p
                    rows.append(v); labels.append(root.render(v))
        for i in range(1, m + 1):
            for j in range(i, m + 1):
                v = E(i, m + i) if i == j else (E(i, m + j) + E(j, m + i)) % p
                rows.append(v); labels.append(root.render(v))
        for i in range(1, m + 1):
            for j in range(i + 1, m + 1):
                v = (E(m + i, j) - E(m + j, i)) % p
                rows.append(v); labels.append(root.render(v))
        if kind == "P":
            for i in range(1, m):
                v = (E(1, 1) - E(i + 1, i + 1) - E(m + 1, m + 1) + E(m + i + 1, m + i + 1)) % p
                cart.append(v)
            # for m = 0 mod p, w = -(sum of the above) already lies in this span
        else:
            for i in range(1, m + 1):
                cart.append((E(i, i) - E(m + i, m + i)) % p)
            if kind == "Ptilde+I":
                cart.append(_identity(root))
        return span_subalgebra(gl, np.array(rows), labels, np.array(cart),
                               [root.render(v) for v in cart], meta)
    if kind in ("osp", "osp+I"):
        space = _constraint_space(root, osp_constraints(m, n))
        cart = _osp_cartan(root, m, n)
        if kind == "osp+I":
            space = np.concatenate([space, _identity(root)[None]])
            cart = cart + [("I", _identity(root))]
        return _root_vector_basis(gl, space, cart, meta)
    if kind == "L":
        space = _constraint_space(root, lfrak_constraints(m, n))
        return _root_vector_basis(gl, space, _lfrak_cartan(root, m, n), meta)
    raise BadShape(kind)


def lfrak_plus_identity(m: int, n: int, field: FieldCtx) -> GradedSuperalgebra:
    """L(m,n) + F·I inside gl(m,n)."""
    gl = gl_algebra(m, n, field)
    root = gl.root
    space = np.concatenate([_constraint_space(root, lfrak_constraints(m, n)), _identity(root)[None]])
    cart = _lfrak_cartan(root, m, n) + [("I", _identity(root))]
    return _root_vector_basis(gl, space, cart, {"kind": "L+I", "family": "L+I", "m": m, "n": n})


def supertrace(root: MatrixRoot, vec: np.ndarray) -> int:
    M = root.matrix(vec)
    d = np.diag(M)
    return int((d[: root.m].sum() - d[root.m:].sum()) % root.p)


def find_sqrt_minus_one(ctx: FieldCtx):
    for a in ctx.elements():
        if a * a == ctx(-1):
            return a
    return None


def p_conjugation(m: int, n: int, ctx: FieldCtx):
    """The block matrix P = diag(I_m, P_n) over ``ctx`` and its inverse, as
    (k, s, s) arrays; None when -1 has no square root in ctx."""
    mu = find_sqrt_minus_one(ctx)
    if mu is None:
        return None
    q, off = n // 2, n % 2
    s = m + n
    half = ctx(pow(2, -1, ctx.p))
    entries = {}
    for i in range(m):
        entries[(i, i)] = ctx.one
    if off:
        entries[(m, m)] = ctx.one
    for j in range(q):
        a, b = m + off + j, m + off + q + j
        entries[(a, a)] = ctx.one
        entries[(a, b)] = half
        entries[(b, a)] = -mu
        entries[(b, b)] = mu * half
    P = np.zeros((ctx.k, s, s), dtype=np.int64)
    for (i, j), v in entries.items():
        P[:, i, j] = v.coeffs
    return P, inverse(P, ctx)
