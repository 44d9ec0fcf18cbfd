"""Finite-dimensional Z x Z2-graded Lie superalgebras and the generic
algorithms run on them.

An algebra is a basis (labels, parity, Z-degree) plus a way to produce the
adjoint matrix of any element.  Adjoint matrices are sparse ``dim x dim``
integer matrices mod p whose column ``j`` holds the coordinates of
``[x, e_j]``.  Two kinds of algebras exist:

* root algebras, whose adjoint comes straight from a provider (superderivation
  bracket on W, the contact brackets on O, the matrix supercommutator, or an
  imported structure-constant table);
* subalgebras, given by basis rows ``emb`` in the coordinates of a root; their
  adjoint is computed in the root and solved back block by block.

Structure constants live in GF(p).  Vectors over GF(p^k) are ``(k, dim)``
arrays (see :mod:`supercartan.field`); brackets of such vectors are expanded
slice by slice.
"""

from __future__ import annotations

import json
from collections import OrderedDict
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp

from .field import FieldCtx, FieldElement
from .linalg import Subspace, _rref_inplace, intersection, inverse, nullspace

SCHEMA_VERSION = "1"


class AlgebraError(ValueError):
    pass


class BasisMismatch(AlgebraError):
    pass


class NotDiagonalizable(AlgebraError):
    pass


class WrongDegree(AlgebraError):
    pass


class NotClosed(AlgebraError):
    """A spanning set that was expected to be a subalgebra is not bracket closed."""


def modp(M, p: int) -> sp.csr_matrix:
    M = sp.csr_matrix(M, dtype=np.int64)
    M.sum_duplicates()
    M.data %= p
    M.eliminate_zeros()
    return M


class TableRoot:
    """Adjoint data read from stored structure constants ``(i<=j) -> [(k, c)]``."""

    def __init__(self, dim: int, p: int, parity, sconst: dict, zdeg=None):
        self.dim = dim
        self.p = p
        self.parity = np.asarray(parity, dtype=np.int64)
        self.zdeg = np.zeros(dim, dtype=np.int64) if zdeg is None else np.asarray(zdeg, dtype=np.int64)
        rows, cols, vals, owners = [], [], [], []
        for (i, j), terms in sconst.items():
            sgn = -1 if parity[i] and parity[j] else 1
            for k, c in terms:
                # column j of ad(e_i) and, reconstructed, column i of ad(e_j)
                owners.append(i); rows.append(k); cols.append(j); vals.append(c)
                if i != j:
                    owners.append(j); rows.append(k); cols.append(i); vals.append(-sgn * c)
        owners = np.array(owners, dtype=np.int64)
        rows = np.array(rows, dtype=np.int64)
        cols = np.array(cols, dtype=np.int64)
        vals = np.array(vals, dtype=np.int64) % p
        self._ad = []
        order = np.argsort(owners, kind="stable")
        owners, rows, cols, vals = owners[order], rows[order], cols[order], vals[order]
        bounds = np.searchsorted(owners, np.arange(dim + 1))
        for i in range(dim):
            a, b = bounds[i], bounds[i + 1]
            self._ad.append(modp(sp.coo_matrix((vals[a:b], (rows[a:b], cols[a:b])),
                                               shape=(dim, dim)), p))

    def ad_of(self, vec: np.ndarray) -> sp.csr_matrix:
        out = sp.csr_matrix((self.dim, self.dim), dtype=np.int64)
        for i in np.flatnonzero(vec):
            out = out + int(vec[i]) * self._ad[i]
        return modp(out, self.p)


class _BlockSolver:
    """Coordinates of root vectors with respect to a homogeneous subalgebra basis."""

    def __init__(self, alg: "GradedSuperalgebra", E: np.ndarray, root_zdeg, root_par, p):
        self.p = p
        ctx = FieldCtx(p)
        self.blocks = {}
        keys = list(zip(alg.zdeg.tolist(), alg.parity.tolist()))
        groups: dict = OrderedDict()
        for i, key in enumerate(keys):
            groups.setdefault(key, []).append(i)
        rng = np.random.default_rng(12345)
        for key, J in groups.items():
            R = np.flatnonzero((root_zdeg == key[0]) & (root_par == key[1]))
            rowsJ = E[np.array(J)]
            Eb = rowsJ[:, R].toarray() % p
            if rowsJ.nnz != np.count_nonzero(Eb):
                raise AlgebraError(f"basis rows of block {key} are not homogeneous in the root")
            work = Eb[None].copy()
            rank, piv = _rref_inplace(work, ctx)
            if rank != len(J):
                raise AlgebraError(f"basis rows of block {key} are dependent")
            P = np.array(sorted(piv))
            invB = inverse(Eb[:, P], ctx)[0]
            proj = rng.integers(0, p, size=(len(R), 6))
            self.blocks[key] = dict(J=np.array(J), R=R, P=P, inv=invB,
                                    proj=proj, Eproj=Eb @ proj % p)
        self.root_key = np.stack([root_zdeg, root_par], axis=1)

    def solve(self, Y: sp.csc_matrix, cols: np.ndarray, key) -> tuple:
        """Y: root vectors (as columns) known to lie in block ``key``.
        Returns (sub row indices, coordinate matrix (|J_t| x len(cols)))."""
        p = self.p
        if key not in self.blocks:
            if Y.nnz:
                raise NotClosed(f"bracket leaves the subalgebra (empty block {key})")
            return None, None
        b = self.blocks[key]
        Yt = Y[b["R"], :]
        if Yt.nnz != Y.nnz:
            raise NotClosed(f"bracket has components outside block {key}")
        Yd = Yt.toarray() % p
        C = (b["inv"].T @ Yd[b["P"]]) % p
        if not np.array_equal((Yd.T @ b["proj"]) % p, (C.T @ b["Eproj"]) % p):
            raise NotClosed(f"bracket leaves the span of block {key}")
        return b["J"], C


class GradedSuperalgebra:
    """Basis data plus adjoint maps; immutable after construction."""

    def __init__(self, field: FieldCtx, labels, parity, zdeg, root, emb=None,
                 cartan=(), meta=None, renderer=None):
        if field.k != 1:
            raise AlgebraError("structure constants live in the prime field")
        self.field = field
        self.p = field.p
        self.labels = list(labels)
        self.parity = np.asarray(parity, dtype=np.int64)
        self.zdeg = np.asarray(zdeg, dtype=np.int64)
        self.dim = len(self.labels)
        if self.parity.shape != (self.dim,) or self.zdeg.shape != (self.dim,):
            raise AlgebraError("labels, parity and zdeg disagree in length")
        self.root = root
        self.emb = None if emb is None else sp.csr_matrix(emb, dtype=np.int64)
        self.cartan = [int(c) for c in cartan]
        self.meta = dict(meta or {})
        self.renderer = renderer
        self._cache: dict = {}
        self.cache_limit = 1 << 30 if self.dim <= 1200 else 256
        self._solver = None
        if self.emb is not None:
            self._embT = self.emb.T.tocsr()
            self._solver = _BlockSolver(self, modp(self.emb, self.p), root.zdeg, root.parity, self.p)

    # -- structure ---------------------------------------------------------

    def __repr__(self):
        name = self.meta.get("name") or self.meta.get("family") or self.meta.get("kind") or "algebra"
        return f"<{name} dim={self.dim} over GF({self.p})>"

    def degrees(self) -> dict:
        vals, counts = np.unique(self.zdeg, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    @property
    def top_degree(self) -> int:
        return int(self.zdeg.max()) if self.dim else 0

    @property
    def bottom_degree(self) -> int:
        return int(self.zdeg.min()) if self.dim else 0

    def component(self, degree: int, parity: int | None = None) -> np.ndarray:
        mask = self.zdeg == degree
        if parity is not None:
            mask &= self.parity == parity
        return np.flatnonzero(mask)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def unit(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def element(self, terms: dict) -> np.ndarray:
        """Vector from ``{label or index: coefficient}``."""
        v = np.zeros(self.dim, dtype=np.int64)
        for key, c in terms.items():
            i = self.index(key) if isinstance(key, str) else int(key)
            v[i] = (v[i] + int(c)) % self.p
        return v

    def to_root(self, vec: np.ndarray) -> np.ndarray:
        """Coordinates in the root algebra (vec may carry a leading k axis)."""
        if self.emb is None:
            return vec
        if vec.ndim == 1:
            return (self._embT @ vec) % self.p
        return np.stack([(self._embT @ v) % self.p for v in vec])

    def from_root(self, vecs: np.ndarray) -> np.ndarray:
        """Coordinates of prime-field root vectors (rows) that lie in the algebra."""
        vecs = np.atleast_2d(vecs) % self.p
        if self.emb is None:
            return vecs
        out = np.zeros((vecs.shape[0], self.dim), dtype=np.int64)
        root_key = self._solver.root_key
        for r, v in enumerate(vecs):
            nz = np.flatnonzero(v)
            keys = {tuple(root_key[i]) for i in nz}
            for key in keys:
                part = np.where((root_key[:, 0] == key[0]) & (root_key[:, 1] == key[1]), v, 0)
                J, C = self._solver.solve(sp.csc_matrix(part[:, None]), None, tuple(int(x) for x in key))
                if J is not None:
                    out[r, J] = (out[r, J] + C[:, 0]) % self.p
        return out

    def render(self, vec) -> str:
        vec = np.asarray(vec)
        if vec.ndim == 1 and self.renderer is not None:
            return self.renderer(self.to_root(vec))
        ctx = self.field if vec.ndim == 1 else None
        terms = []
        if vec.ndim == 1:
            for i in np.flatnonzero(vec):
                terms.append(_coef_label(int(vec[i]), self.labels[i], self.p))
        else:
            k = vec.shape[0]
            ctx = FieldCtx(self.p, k) if k > 1 else self.field
            for i in np.flatnonzero(vec.any(axis=0)):
                c = FieldElement(ctx, tuple(int(x) for x in vec[:, i]))
                terms.append(f"({c.render()})*{self.labels[i]}")
        return " + ".join(terms) if terms else "0"

    # -- adjoint -----------------------------------------------------------

    def ad(self, i: int) -> sp.csr_matrix:
        M = self._cache.get(i)
        if M is None:
            M = self.ad_of(self.unit(i))
            if len(self._cache) >= self.cache_limit:
                self._cache.pop(next(iter(self._cache)))
            self._cache[i] = M
        return M

    def ad_of(self, vec: np.ndarray) -> sp.csr_matrix:
        """Adjoint matrix of a prime-field vector."""
        vec = np.asarray(vec, dtype=np.int64) % self.p
        if vec.shape != (self.dim,):
            raise BasisMismatch(f"vector of length {vec.shape} for algebra of dim {self.dim}")
        if self.emb is None:
            return self.root.ad_of(vec)
        out_r, out_c, out_v = [], [], []
        keys = sorted({(int(z), int(q)) for z, q in
                       zip(self.zdeg[vec != 0], self.parity[vec != 0])})
        for z, q in keys:
            part = np.where((self.zdeg == z) & (self.parity == q), vec, 0)
            Y = modp(self.root.ad_of(self.to_root(part)) @ self._embT, self.p).tocsc()
            for bkey, blk in self._solver.blocks.items():
                J = blk["J"]
                tkey = (z + bkey[0], q ^ bkey[1])
                Yb = Y[:, J]
                Jt, C = self._solver.solve(Yb, J, tkey)
                if Jt is None:
                    continue
                r, c = np.nonzero(C)
                out_r.append(Jt[r]); out_c.append(J[c]); out_v.append(C[r, c])
        if out_r:
            M = sp.coo_matrix((np.concatenate(out_v), (np.concatenate(out_r), np.concatenate(out_c))),
                              shape=(self.dim, self.dim))
        else:
            M = sp.csr_matrix((self.dim, self.dim), dtype=np.int64)
        return modp(M, self.p)

    def bracket(self, a, b, ctx: FieldCtx | None = None) -> np.ndarray:
        """[a, b]; prime-field 1-D vectors or (k, dim) arrays over ``ctx``."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if a.shape[-1] != self.dim or b.shape[-1] != self.dim:
            raise BasisMismatch("operands are not coordinate vectors of this algebra")
        if a.ndim == 1 and b.ndim == 1:
            return (self.ad_of(a) @ b) % self.p
        ctx = ctx or FieldCtx(self.p, max(a.shape[0] if a.ndim == 2 else 1,
                                          b.shape[0] if b.ndim == 2 else 1))
        A = _lift(a, ctx)
        B = _lift(b, ctx)
        return ext_apply(ctx, self.ext_ad(A), B[:, None, :])[:, 0, :]

    def ext_ad(self, vec: np.ndarray) -> list:
        """Per-slice adjoint matrices of a (k, dim) vector."""
        return [self.ad_of(v) if v.any() else None for v in vec]

    def split_parity(self, vec: np.ndarray) -> list:
        out = []
        for q in (0, 1):
            part = np.where(self.parity == q, vec, 0)
            if part.any():
                out.append(part)
        return out

    # -- structure constants -----------------------------------------------

    def sconst(self):
        """Yield (i, j, [(k, coeff)]) for i <= j with nonzero bracket."""
        for i in range(self.dim):
            M = self.ad(i).tocsc() if self.dim <= 1200 else self.ad_of(self.unit(i)).tocsc()
            for j in range(i, self.dim):
                a, b = M.indptr[j], M.indptr[j + 1]
                if a == b:
                    continue
                ks = M.indices[a:b]
                vs = M.data[a:b]
                order = np.argsort(ks)
                yield i, j, [(int(ks[o]), int(vs[o])) for o in order]


def _coef_label(c: int, label: str, p: int) -> str:
    return label if c == 1 else f"{c}*{label}"


def _lift(v: np.ndarray, ctx: FieldCtx) -> np.ndarray:
    if v.ndim == 1:
        out = np.zeros((ctx.k, v.shape[0]), dtype=np.int64)
        out[0] = v
        return out % ctx.p
    if v.shape[0] < ctx.k:
        out = np.zeros((ctx.k, v.shape[1]), dtype=np.int64)
        out[: v.shape[0]] = v
        return out % ctx.p
    return v % ctx.p


def ext_apply(ctx: FieldCtx, mats: list, F: np.ndarray) -> np.ndarray:
    """Apply the adjoint of a GF(p^k) element (given per slice) to rows F (k, r, dim)."""
    k, p = ctx.k, ctx.p
    r, n = F.shape[1], F.shape[2]
    conv = [None] * (2 * k - 1)
    for s, M in enumerate(mats):
        if M is None:
            continue
        for t in range(k):
            if not F[t].any():
                continue
            prod = np.asarray(M @ F[t].T).T
            conv[s + t] = prod if conv[s + t] is None else conv[s + t] + prod
    out = np.zeros((k, r, n), dtype=np.int64)
    R = ctx._reduction
    for e, P in enumerate(conv):
        if P is None:
            continue
        P = P % p
        for i in range(k):
            if R[i, e]:
                out[i] += R[i, e] * P
    return out % p


# -- axioms ------------------------------------------------------------------

@dataclass
class AxiomReport:
    passed: bool = True
    skew: bool = True
    jacobi: bool = True
    grading: bool = True
    cartan: bool = True
    pairs_checked: int = 0
    triples_checked: int = 0
    exhaustive: bool = True
    violations: list = dc_field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)


def check_axioms(A: GradedSuperalgebra, samples: int = 10 ** 5, seed: int = 0,
                 exhaustive_limit: int = 200, max_report: int = 10) -> AxiomReport:
    """Super skew-symmetry, super Jacobi, grading and Cartan checks.

    Jacobi is tested through ``ad[x,y] = ad x ad y - (-1)^{|x||y|} ad y ad x``,
    which covers every z at once: exhaustive over pairs x <= y when
    dim <= ``exhaustive_limit``, otherwise over seeded random pairs until at
    least ``samples`` triples are covered."""
    p, n = A.p, A.dim
    rep = AxiomReport()
    par, zd = A.parity, A.zdeg

    def fail(kind, msg):
        setattr(rep, kind, False)
        rep.passed = False
        if len(rep.violations) < max_report:
            rep.violations.append(msg)

    # skew symmetry and grading, from every ad(i)
    mats = {}
    keys, vals = [], []
    for i in range(n):
        M = A.ad(i) if n <= 1200 else A.ad_of(A.unit(i))
        if n <= exhaustive_limit:
            mats[i] = M
        C = M.tocoo()
        k, j, v = C.row.astype(np.int64), C.col.astype(np.int64), C.data.astype(np.int64)
        bad = (zd[k] != zd[i] + zd[j]) | (par[k] != (par[i] ^ par[j]))
        if bad.any():
            t = int(np.flatnonzero(bad)[0])
            fail("grading", f"grading: [{A.labels[i]}, {A.labels[j[t]]}] has a component on {A.labels[k[t]]}")
        # canonical key (min, max, k) with the value transported to the min-first order
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        sgn = np.where((j < i), np.where(par[i] & par[j], 1, -1), 1)
        keys.append((lo * n + hi) * n + k)
        vals.append(np.stack([v * sgn % p, (j < i).astype(np.int64)], axis=1))
    if keys:
        K = np.concatenate(keys)
        V = np.concatenate(vals)
        order = np.lexsort((V[:, 1], K))
        K, V = K[order], V[order]
        # diagonal pairs (i, i): [x, x] = 0 for even x
        ii = (K // n) // n == (K // n) % n
        even_diag = ii & (par[(K // n) % n] == 0)
        if even_diag.any():
            t = int(np.flatnonzero(even_diag)[0])
            i = int((K[t] // n) % n)
            fail("skew", f"skew: [{A.labels[i]}, {A.labels[i]}] != 0 for an even element")
        off = ~ii
        Ko, Vo = K[off], V[off]
        uniq, start, counts = np.unique(Ko, return_index=True, return_counts=True)
        mism = np.flatnonzero((counts != 2) | ~_pair_equal(Vo, start, counts))
        for t in mism[:max_report]:
            key = int(uniq[t])
            i, j, k = key // n // n, (key // n) % n, key % n
            fail("skew", f"skew: [{A.labels[i]}, {A.labels[j]}] and [{A.labels[j]}, {A.labels[i]}] "
                         f"disagree on {A.labels[k]}")
    # Jacobi
    rng = np.random.default_rng(seed)
    if n <= exhaustive_limit:
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
    else:
        rep.exhaustive = False
        npairs = max(200, -(-samples // max(n, 1)))
        pairs = [tuple(sorted(rng.integers(0, n, size=2).tolist())) for _ in range(npairs)]
    for i, j in pairs:
        Mi = mats.get(i) if i in mats else A.ad(i)
        Mj = mats.get(j) if j in mats else A.ad(j)
        sgn = -1 if par[i] and par[j] else 1
        br = np.asarray(Mi[:, j].toarray()).ravel() % p
        lhs = A.ad_of(br)
        D = modp(Mi @ Mj - sgn * (Mj @ Mi) - lhs, p)
        rep.pairs_checked += 1
        rep.triples_checked += n
        if D.nnz:
            C = D.tocoo()
            z = int(C.col[0])
            fail("jacobi", f"jacobi: x={A.labels[i]}, y={A.labels[j]}, z={A.labels[z]}")
    # Cartan
    for a in A.cartan:
        if zd[a] != 0 or par[a] != 0:
            fail("cartan", f"cartan: {A.labels[a]} is not even of degree 0")
        Ma = A.ad(a)
        for b in A.cartan:
            if np.asarray(Ma[:, b].toarray()).any():
                fail("cartan", f"cartan: [{A.labels[a]}, {A.labels[b]}] != 0")
    return rep


def _pair_equal(V, start, counts):
    ok = np.zeros(len(start), dtype=bool)
    two = counts == 2
    s = start[two]
    ok[two] = V[s, 0] == V[s + 1, 0]
    return ok


# -- derived subalgebra --------------------------------------------------------

def _blocks(A: GradedSuperalgebra) -> "OrderedDict":
    groups: OrderedDict = OrderedDict()
    for i in range(A.dim):
        groups.setdefault((int(A.zdeg[i]), int(A.parity[i])), []).append(i)
    return OrderedDict(sorted(groups.items()))


def span_subalgebra(parent: GradedSuperalgebra, rows, labels, cartan_rows=None,
                    cartan_labels=None, meta=None) -> GradedSuperalgebra:
    """Subalgebra of ``parent`` with basis chosen greedily from spanning rows
    (parent coordinates, dense or sparse), block by block, keeping the given
    order; Cartan rows come first in their block and are designated as the
    Cartan basis."""
    p = parent.p
    ctx = parent.field
    R = _sparse_rows(rows, parent.dim, p)
    C = _sparse_rows(cartan_rows, parent.dim, p)
    allrows = sp.vstack([C, R]).tocsr()
    alllabels = list(cartan_labels or []) + list(labels)
    if len(alllabels) != allrows.shape[0]:
        raise AlgebraError("one label per spanning row is required")
    ncart = C.shape[0]
    code = parent.zdeg * 2 + parent.parity
    counts = np.diff(allrows.indptr)
    live = np.flatnonzero(counts)
    if live.size:
        cc = code[allrows.indices]
        lo = np.minimum.reduceat(cc, allrows.indptr[live])
        hi = np.maximum.reduceat(cc, allrows.indptr[live])
        if (lo != hi).any():
            bad = int(live[np.flatnonzero(lo != hi)[0]])
            raise AlgebraError(f"spanning element {alllabels[bad]} is not homogeneous")
    else:
        lo = np.zeros(0, dtype=np.int64)
    keep, keep_z, keep_q = [], [], []
    for key in sorted(set(lo.tolist())):
        idx = live[lo == key]
        z, q = key // 2, key % 2
        cols = np.flatnonzero(code == key)
        block = allrows[idx][:, cols].toarray() % p
        S = Subspace(ctx, len(cols))
        grew = S.add(block, chunk=64)
        cart_in = idx < ncart
        if cart_in.any() and not grew[cart_in].all():
            raise AlgebraError("designated Cartan elements are linearly dependent")
        for r in idx[grew]:
            keep.append(int(r)); keep_z.append(z); keep_q.append(q)
    K = allrows[keep] if keep else sp.csr_matrix((0, parent.dim), dtype=np.int64)
    emb = K if parent.emb is None else modp(K @ parent.emb, p)
    m = dict(parent.meta)
    m.update(meta or {})
    return GradedSuperalgebra(parent.field, [alllabels[r] for r in keep], keep_q, keep_z,
                              parent.root, emb=emb, cartan=[i for i, r in enumerate(keep) if r < ncart],
                              meta=m, renderer=parent.renderer)


def _sparse_rows(rows, dim: int, p: int) -> sp.csr_matrix:
    if rows is None:
        return sp.csr_matrix((0, dim), dtype=np.int64)
    if sp.issparse(rows):
        return modp(rows, p)
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return sp.csr_matrix((0, dim), dtype=np.int64)
    return modp(np.atleast_2d(rows) % p, p)


def derived_subalgebra(A: GradedSuperalgebra, order: int = 1, meta=None) -> GradedSuperalgebra:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    for _ in range(order):
        A = _derived_once(A, meta)
    return A


def _derived_once(A: GradedSuperalgebra, meta=None) -> GradedSuperalgebra:
    p, ctx = A.p, A.field
    blocks = _blocks(A)
    pos = {}
    spaces = {key: Subspace(ctx, len(J)) for key, J in blocks.items()}
    local = np.zeros(A.dim, dtype=np.int64)
    for key, J in blocks.items():
        local[J] = np.arange(len(J))
    cart = set(A.cartan)
    order = sorted(range(A.dim), key=lambda i: (i not in cart, abs(int(A.zdeg[i])) if A.zdeg[i] < 0 else 10 ** 6 + int(A.zdeg[i]), i))
    for t, i in enumerate(order):
        pos[i] = t
    pos_arr = np.array([pos[i] for i in range(A.dim)])
    full = {key: False for key in blocks}

    def target(i, bkey):
        return (int(A.zdeg[i]) + bkey[0], int(A.parity[i]) ^ bkey[1])

    for i in order:
        todo = []
        for bkey, J in blocks.items():
            tkey = target(i, bkey)
            if tkey in blocks and not full[tkey]:
                Jn = [j for j in J if pos_arr[j] >= pos[i]]
                if Jn:
                    todo.append((tkey, np.array(Jn)))
        if not todo:
            if all(full.values()):
                break
            continue
        M = (A.ad(i) if A.dim <= 1200 else A.ad_of(A.unit(i))).tocsc()
        for tkey, Jn in todo:
            if full[tkey]:
                continue
            Jt = np.array(blocks[tkey])
            sub = M[Jt, :][:, Jn].toarray().T % p
            if not sub.any():
                continue
            spaces[tkey].add(sub[None], chunk=128)
            if spaces[tkey].dim == len(Jt):
                full[tkey] = True
    if all(full.values()):
        return A
    # choose the new basis block by block
    new_rows, new_labels, new_z, new_q, new_cart = [], [], [], [], []
    for key, J in blocks.items():
        S = spaces[key]
        if S.dim == 0:
            continue
        J = np.array(J)
        if full[key]:
            for j in J:
                new_rows.append(A.unit(j)); new_labels.append(A.labels[j])
                new_z.append(key[0]); new_q.append(key[1]); new_cart.append(j in cart)
            continue
        chosen = Subspace(ctx, len(J))
        picks = []  # (local vector, label, is_cartan)
        local_units = np.eye(len(J), dtype=np.int64)
        cart_local = [int(local[j]) for j in J if j in cart]
        # Cartan units inside the new space, then the rest of the Cartan intersection
        for c in cart_local:
            if S.contains(local_units[c]) and chosen.add(local_units[c][None])[0]:
                picks.append((local_units[c], A.labels[J[c]], True))
        if cart_local:
            C = Subspace(ctx, len(J), local_units[cart_local])
            I = intersection(C, S)
            for v in I.basis():
                if chosen.add(v[None])[0]:
                    picks.append((chosen.last_added[0, 0].copy(), None, True))
        for c in range(len(J)):
            if c in cart_local:
                continue
            if S.contains(local_units[c]) and chosen.add(local_units[c][None])[0]:
                picks.append((local_units[c], A.labels[J[c]], False))
        for v in S.basis():
            if chosen.add(v[None])[0]:
                picks.append((chosen.last_added[0, 0].copy(), None, False))
        for vec, label, isc in picks:
            full_vec = np.zeros(A.dim, dtype=np.int64)
            full_vec[J] = vec
            if label is None:
                label = A.render(full_vec)
            new_rows.append(full_vec); new_labels.append(label)
            new_z.append(key[0]); new_q.append(key[1]); new_cart.append(isc)
    R = np.array(new_rows, dtype=np.int64).reshape(-1, A.dim)
    emb = R if A.emb is None else (sp.csr_matrix(R) @ A.emb).toarray() % p
    m = dict(A.meta)
    m.update(meta or {})
    return GradedSuperalgebra(A.field, new_labels, new_q, new_z, A.root, emb=emb,
                              cartan=[i for i, c in enumerate(new_cart) if c], meta=m,
                              renderer=A.renderer)


# -- weights -----------------------------------------------------------------------

@dataclass
class WeightSpaces:
    """Joint eigenspaces of the Cartan on one Z-component.

    ``spaces`` maps (weight tuple, parity) to a Subspace of the whole algebra;
    ``cartan`` is the Cartan span (degree 0 only, otherwise None)."""
    degree: int
    spaces: dict
    cartan: Subspace | None = None

    def weights(self, parity: int | None = None) -> list:
        return sorted({w for (w, q) in self.spaces if parity is None or q == parity})

    def odd_weights(self) -> list:
        return self.weights(1)

    def space(self, weight, parity: int) -> Subspace:
        return self.spaces[(tuple(weight), parity)]

    def total_dim(self) -> int:
        return sum(S.dim for S in self.spaces.values()) + (self.cartan.dim if self.cartan else 0)


def weight_decomposition(A: GradedSuperalgebra, degree: int) -> WeightSpaces:
    if not A.cartan:
        raise AlgebraError("no Cartan designated")
    ctx, p = A.field, A.p
    spaces = {}
    cartan_space = None
    for q in (0, 1):
        J = A.component(degree, q)
        if len(J) == 0:
            continue
        mats = [A.ad(h)[J, :][:, J].toarray() % p for h in A.cartan]
        parts = [((), np.eye(len(J), dtype=np.int64))]
        for M in mats:
            refined = []
            for w, V in parts:
                got = 0
                for c in range(p):
                    # rows a with (a V)(M^T - c) = 0
                    T = V @ ((M.T - c * np.eye(len(J), dtype=np.int64)) % p) % p
                    K = nullspace(T.T, ctx)[0]
                    if K.shape[0]:
                        refined.append((w + (c,), K @ V % p))
                        got += K.shape[0]
                if got != V.shape[0]:
                    raise NotDiagonalizable(
                        f"ad of a Cartan element is not split over GF({p}) on degree {degree}")
            parts = refined
        for w, V in parts:
            full = np.zeros((V.shape[0], A.dim), dtype=np.int64)
            full[:, J] = V
            spaces[(w, q)] = Subspace(ctx, A.dim, full)
    if degree == 0:
        cartan_space = Subspace(ctx, A.dim, np.array([A.unit(h) for h in A.cartan]))
        zero = (tuple([0] * len(A.cartan)), 0)
        if zero in spaces:
            Z = spaces[zero]
            if Z == cartan_space:
                del spaces[zero]
            else:
                rest = cartan_space.copy()
                rest.add(Z.rows)
                spaces[zero] = Subspace(ctx, A.dim, rest.last_added)
    return WeightSpaces(degree, spaces, cartan_space)


# -- closures ----------------------------------------------------------------------

def module_closure(A: GradedSuperalgebra, v, degree: int, ctx: FieldCtx | None = None) -> Subspace:
    """Smallest ad(X_0)-stable subspace of X_degree containing v."""
    ctx = ctx or A.field
    V = _lift(np.asarray(v, dtype=np.int64), ctx) if np.asarray(v).ndim == 1 else np.asarray(v) % ctx.p
    J = A.component(degree)
    outside = np.setdiff1d(np.arange(A.dim), J)
    if V[:, outside].any():
        raise WrongDegree(f"vector does not lie in degree {degree}")
    S = Subspace(ctx, len(J))
    if not V.any():
        return Subspace(ctx, A.dim)
    S.add(V[:, None, J])
    frontier = S.last_added
    X0 = A.component(0)
    mats = [A.ad(i)[J, :][:, J].tocsr() for i in X0]
    while frontier.shape[1] and S.dim < len(J):
        cands = [_prime_apply(ctx, M, frontier) for M in mats if M.nnz]
        if not cands:
            break
        S.add(np.concatenate(cands, axis=1), chunk=128)
        frontier = S.last_added
    out = np.zeros((ctx.k, S.dim, A.dim), dtype=np.int64)
    out[:, :, J] = S.rows
    return Subspace(ctx, A.dim, out)


def _prime_apply(ctx, M, F):
    """Apply a prime-field sparse matrix to rows F (k, r, n)."""
    return np.stack([np.asarray(M @ F[s].T).T % ctx.p for s in range(F.shape[0])])


@dataclass
class Closure:
    space: Subspace
    trace: list

    @property
    def dim(self):
        return self.space.dim


def generation_closure(A: GradedSuperalgebra, gens, ctx: FieldCtx | None = None,
                       target: int | None = None) -> Closure:
    """Smallest Z2-graded bracket-closed subspace containing ``gens``.

    Generators are split into their even and odd parts (a sub-superalgebra is
    graded).  The subalgebra generated by homogeneous g_1..g_r is spanned by the
    right-normed brackets [g_i1, [g_i2, ... g_ik]], so it is the smallest
    subspace containing the g_i and stable under every ad(g_i); each round
    applies ad(g_i) to the rows added in the previous round."""
    ctx = ctx or A.field
    target = A.dim if target is None else target
    homog = []
    for g in gens:
        G = _lift(np.asarray(g, dtype=np.int64), ctx)
        for q in (0, 1):
            part = np.where(A.parity[None, :] == q, G, 0)
            if part.any():
                homog.append(part)
    S = Subspace(ctx, A.dim)
    if not homog:
        return Closure(S, [0])
    S.add(np.stack(homog, axis=1))
    trace = [S.dim]
    frontier = S.last_added
    ads = [A.ext_ad(g) for g in homog]
    while frontier.shape[1] and S.dim < target:
        cands = np.concatenate([ext_apply(ctx, ad, frontier) for ad in ads], axis=1)
        S.add(cands, chunk=256)
        frontier = S.last_added
        if frontier.shape[1] == 0:
            break
        trace.append(S.dim)
    return Closure(S, trace)


def naive_closure(A: GradedSuperalgebra, gens, ctx: FieldCtx | None = None) -> Subspace:
    """Reference closure: bracket every pair of basis rows until nothing new appears."""
    ctx = ctx or A.field
    S = Subspace(ctx, A.dim)
    for g in gens:
        G = _lift(np.asarray(g, dtype=np.int64), ctx)
        for q in (0, 1):
            part = np.where(A.parity == q, G, 0)
            if part.any():
                S.add(part[:, None, :])
    while True:
        rows = S.rows
        d = S.dim
        for a in range(d):
            ad_a = A.ext_ad(rows[:, a])
            S.add(ext_apply(ctx, ad_a, rows))
        if S.dim == d:
            return S


# -- serialization ---------------------------------------------------------------------

def to_json(A: GradedSuperalgebra) -> dict:
    meta = A.meta
    out = {
        "schema": SCHEMA_VERSION,
        "family": meta.get("family", meta.get("kind")),
        "p": A.p,
        "k": 1,
        "m": meta.get("m"),
        "n": meta.get("n"),
        "t": list(meta["t"]) if meta.get("t") is not None else None,
    }
    if meta.get("lambda") is not None:
        out["lambda"] = str(meta["lambda"])
    out.update({
        "dim": A.dim,
        "degrees": {str(k): v for k, v in A.degrees().items()},
        "basis": [{"label": l, "parity": int(q), "zdeg": int(z)}
                  for l, q, z in zip(A.labels, A.parity, A.zdeg)],
        "cartan": list(A.cartan),
        "meta": {k: (list(v) if isinstance(v, tuple) else v) for k, v in meta.items()
                 if isinstance(v, (str, int, float, tuple, list, type(None)))},
        "sconst": [[i, j, [[k, str(c)] for k, c in terms]] for i, j, terms in A.sconst()],
    })
    return out


def from_json(data) -> GradedSuperalgebra:
    if isinstance(data, str):
        data = json.loads(data)
    p = int(data["p"])
    ctx = FieldCtx(p)
    basis = data["basis"]
    labels = [b["label"] for b in basis]
    parity = np.array([b["parity"] for b in basis], dtype=np.int64)
    zdeg = np.array([b["zdeg"] for b in basis], dtype=np.int64)
    sconst = {}
    for i, j, terms in data["sconst"]:
        if i > j:
            raise AlgebraError("structure constants must be stored with i <= j")
        sconst[(int(i), int(j))] = [(int(k), int(ctx.parse(c))) for k, c in terms]
    root = TableRoot(len(labels), p, parity, sconst, zdeg)
    meta = dict(data.get("meta") or {})
    for key in ("family", "m", "n", "t"):
        if data.get(key) is not None:
            meta.setdefault(key, data[key])
    if "lambda" in data:
        meta["lambda"] = data["lambda"]
    return GradedSuperalgebra(ctx, labels, parity, zdeg, root, cartan=data.get("cartan", []),
                              meta=meta)


def dumps(A: GradedSuperalgebra) -> str:
    return json.dumps(to_json(A), sort_keys=True)
