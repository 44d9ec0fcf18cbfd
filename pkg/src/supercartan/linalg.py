"""Exact row reduction and subspace bookkeeping over GF(p^k).

Vectors and matrices are numpy ``int64`` arrays with a leading axis of length
``k`` (see :mod:`supercartan.field`).  Plain 1-D / 2-D integer arrays are
accepted wherever ``k == 1``.

:class:`Subspace` keeps its rows in reduced row echelon form so that the
dominant operation of the closure engines -- reduce a batch of candidates,
append the survivors -- is a pair of matrix products.
"""

from __future__ import annotations

import numpy as np

from .field import FieldCtx, FieldElement, inv


class DimensionMismatch(ValueError):
    pass


def as_rows(vectors, ctx: FieldCtx, n: int | None = None) -> np.ndarray:
    """Coerce vectors into a (k, r, n) array."""
    k, p = ctx.k, ctx.p
    if isinstance(vectors, np.ndarray):
        a = vectors.astype(np.int64, copy=False)
        if a.ndim == 1:
            a = a[None, None, :] if k == 1 else None
        elif a.ndim == 2:
            a = a[None] if k == 1 else a[:, None, :]
        if a is None or a.shape[0] != k:
            raise DimensionMismatch("array does not carry k coordinate slices")
        if n is not None and a.shape[2] != n:
            raise DimensionMismatch(f"expected ambient dimension {n}, got {a.shape[2]}")
        return a % p
    vectors = list(vectors)
    if not vectors:
        if n is None:
            raise DimensionMismatch("ambient dimension of an empty row list is unknown")
        return np.zeros((k, 0, n), dtype=np.int64)
    rows = [as_vector(v, ctx) for v in vectors]
    lens = {r.shape[1] for r in rows}
    if len(lens) != 1 or (n is not None and lens != {n}):
        raise DimensionMismatch("rows have different ambient dimensions")
    return np.stack(rows, axis=1)


def as_vector(v, ctx: FieldCtx) -> np.ndarray:
    """Coerce one vector into a (k, n) array."""
    if isinstance(v, np.ndarray) and v.dtype != object:
        a = v.astype(np.int64)
        if a.ndim == 1:
            if ctx.k != 1:
                raise DimensionMismatch("1-D array given for an extension field")
            a = a[None]
        return a % ctx.p
    out = np.zeros((ctx.k, len(v)), dtype=np.int64)
    for i, x in enumerate(v):
        out[:, i] = ctx(x).coeffs
    return out


def _entry(ctx: FieldCtx, M: np.ndarray, i: int, j: int) -> FieldElement:
    return FieldElement(ctx, tuple(int(c) for c in M[:, i, j]))


def _rref_inplace(M: np.ndarray, ctx: FieldCtx, start_cols=None):
    """Row reduce M (k, r, n) in place; returns (rank, pivots) with the first
    ``rank`` rows being the nonzero RREF rows (in order of discovery)."""
    k, r, n = M.shape
    p = ctx.p
    pivots: list[int] = []
    rank = 0
    for i in range(r):
        nz = M[:, i, :].any(axis=0) if k > 1 else M[0, i, :] != 0
        cols = np.flatnonzero(nz)
        if cols.size == 0:
            continue
        c = int(cols[0])
        if i != rank:
            M[:, [rank, i], :] = M[:, [i, rank], :]
        piv = _entry(ctx, M, rank, c)
        if piv != ctx.one:
            M[:, rank, :] = ctx.scale(inv(piv), M[:, rank, :])
        col = M[:, :, c].copy()
        col[:, rank] = 0
        if col.any():
            rows_nz = np.flatnonzero(col.any(axis=0))
            sub = M[:, rows_nz, :]
            M[:, rows_nz, :] = ctx.outer_sub(sub, col[:, rows_nz], M[:, rank, :])
        pivots.append(c)
        rank += 1
    return rank, pivots


class Subspace:
    """A subspace of GF(p^k)^n held as RREF rows plus pivot columns.

    Rows are stored in a preallocated buffer; ``rows`` returns them sorted by
    pivot, which is the canonical RREF.
    """

    def __init__(self, ctx: FieldCtx, ambient_dim: int, rows=None):
        self.ctx = ctx
        self.ambient_dim = ambient_dim
        self._buf = np.zeros((ctx.k, 0, ambient_dim), dtype=np.int64)
        self._dim = 0
        self._pivots: list[int] = []
        if rows is not None:
            self.add(rows)

    # -- queries -----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self):
        return self._dim

    @property
    def pivots(self) -> list[int]:
        return sorted(self._pivots)

    @property
    def rows(self) -> np.ndarray:
        order = np.argsort(self._pivots, kind="stable")
        return self._buf[:, : self._dim][:, order]

    def basis(self) -> np.ndarray:
        """Rows for k == 1 as a plain (d, n) array, else (k, d, n)."""
        R = self.rows
        return R[0] if self.ctx.k == 1 else R

    def copy(self) -> Subspace:
        S = Subspace(self.ctx, self.ambient_dim)
        S._buf = self._buf[:, : self._dim].copy()
        S._dim = self._dim
        S._pivots = list(self._pivots)
        return S

    def reduce(self, vectors) -> np.ndarray:
        """Residues of vectors modulo the span (zero iff contained)."""
        V = as_rows(vectors, self.ctx, self.ambient_dim)
        if self._dim == 0 or V.shape[1] == 0:
            return V.copy()
        B = self._buf[:, : self._dim]
        coeff = V[:, :, self._pivots]
        return (V - self.ctx.matmul(coeff, B)) % self.ctx.p

    def contains(self, v) -> bool:
        return not self.reduce(v).any()

    def coordinates(self, vectors) -> np.ndarray:
        """Coefficients w.r.t. ``rows`` of vectors assumed to lie in the span."""
        V = as_rows(vectors, self.ctx, self.ambient_dim)
        return V[:, :, self.pivots]

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.ctx == other.ctx and self.ambient_dim == other.ambient_dim
                and self.pivots == other.pivots and np.array_equal(self.rows, other.rows))

    def __repr__(self):
        return f"Subspace(dim={self._dim}, ambient={self.ambient_dim}, {self.ctx})"

    # -- mutation ----------------------------------------------------------

    def _grow(self, need: int):
        cap = self._buf.shape[1]
        if self._dim + need <= cap:
            return
        new_cap = max(self._dim + need, 2 * cap, 16)
        buf = np.zeros((self.ctx.k, new_cap, self.ambient_dim), dtype=np.int64)
        buf[:, : self._dim] = self._buf[:, : self._dim]
        self._buf = buf

    def add(self, vectors, chunk: int = 96) -> np.ndarray:
        """Extend in place; returns the boolean mask of inputs that raised the
        dimension when processed in order."""
        V = as_rows(vectors, self.ctx, self.ambient_dim)
        r = V.shape[1]
        grew = np.zeros(r, dtype=bool)
        added = []
        for lo in range(0, r, chunk):
            C = self.reduce(V[:, lo: lo + chunk])
            nzrows = np.flatnonzero(C.any(axis=(0, 2)))
            if nzrows.size == 0:
                continue
            # process survivors one at a time within the chunk so the mask
            # reflects the sequential order
            C = C[:, nzrows]
            rank, piv = _rref_block_sequential(C, self.ctx, grew, lo + nzrows)
            if rank == 0:
                continue
            new = C[:, :rank]
            if self._dim:
                B = self._buf[:, : self._dim]
                coeff = B[:, :, piv]
                if coeff.any():
                    self._buf[:, : self._dim] = (B - self.ctx.matmul(coeff, new)) % self.ctx.p
            self._grow(rank)
            added.append(new.copy())
            self._buf[:, self._dim: self._dim + rank] = new
            self._dim += rank
            self._pivots.extend(piv)
        # residual rows appended by this call; with the old rows they span the new space
        self.last_added = (np.concatenate(added, axis=1) if added
                           else np.zeros((self.ctx.k, 0, self.ambient_dim), dtype=np.int64))
        return grew

    def extend(self, v) -> tuple[Subspace, bool]:
        return extend(self, v)


def _rref_block_sequential(C: np.ndarray, ctx: FieldCtx, grew: np.ndarray, idx: np.ndarray):
    """RREF of a residual block, recording which original rows contributed a
    new pivot.  Returns (rank, pivots) and leaves the pivot rows first in C."""
    k, r, n = C.shape
    pivots: list[int] = []
    rank = 0
    for i in range(r):
        row = C[:, i, :]
        nz = row.any(axis=0) if k > 1 else row[0] != 0
        cols = np.flatnonzero(nz)
        if cols.size == 0:
            continue
        c = int(cols[0])
        if i != rank:
            C[:, [rank, i], :] = C[:, [i, rank], :]
        piv = _entry(ctx, C, rank, c)
        if piv != ctx.one:
            C[:, rank, :] = ctx.scale(inv(piv), C[:, rank, :])
        col = C[:, :, c].copy()
        col[:, rank] = 0
        if col.any():
            rows_nz = np.flatnonzero(col.any(axis=0))
            C[:, rows_nz, :] = ctx.outer_sub(C[:, rows_nz, :], col[:, rows_nz], C[:, rank, :])
        pivots.append(c)
        grew[idx[i]] = True
        rank += 1
    return rank, pivots


def rref(rows, ctx: FieldCtx, n: int | None = None) -> Subspace:
    V = as_rows(rows, ctx, n)
    return Subspace(ctx, V.shape[2], V)


def extend(S: Subspace, v) -> tuple[Subspace, bool]:
    S2 = S.copy()
    V = _single(v, S)
    grew = S2.add(V)
    return S2, bool(grew.any())


def contains(S: Subspace, v) -> bool:
    return S.contains(_single(v, S))


def _single(v, S: Subspace) -> np.ndarray:
    if isinstance(v, np.ndarray) and v.ndim == 3:
        return as_rows(v, S.ctx, S.ambient_dim)
    if isinstance(v, np.ndarray) and v.ndim == 2 and S.ctx.k == 1:
        return as_rows(v, S.ctx, S.ambient_dim)
    return as_vector(v, S.ctx)[:, None, :] if _check_len(v, S) else None


def _check_len(v, S: Subspace) -> bool:
    if (v.shape[-1] if isinstance(v, np.ndarray) else len(v)) != S.ambient_dim:
        raise DimensionMismatch(f"expected ambient dimension {S.ambient_dim}")
    return True


def nullspace(M: np.ndarray, ctx: FieldCtx) -> np.ndarray:
    """Rows spanning {v : M v = 0}; M is (k, r, n) or a 2-D array for k == 1.
    Returns a (k, d, n) array."""
    A = as_rows(M, ctx).copy()
    k, r, n = A.shape
    rank, piv = _rref_inplace(A, ctx)
    free = [c for c in range(n) if c not in set(piv)]
    out = np.zeros((k, len(free), n), dtype=np.int64)
    R = A[:, :rank]
    for t, f in enumerate(free):
        out[0, t, f] = 1
        for i, pc in enumerate(piv):
            out[:, t, pc] = -R[:, i, f] % ctx.p
    return out


def intersection(U: Subspace, V: Subspace) -> Subspace:
    """U ∩ V via the left kernel of the stacked bases."""
    if U.ambient_dim != V.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    ctx = U.ctx
    if U.dim == 0 or V.dim == 0:
        return Subspace(ctx, U.ambient_dim)
    Ur, Vr = U.rows, V.rows
    # a U - b V = 0  <=>  (a, b) in left kernel of [U; V] (sign absorbed in b)
    stacked = np.concatenate([Ur, Vr], axis=1)
    K = nullspace(np.transpose(stacked, (0, 2, 1)), ctx)
    a = K[:, :, : U.dim]
    return Subspace(ctx, U.ambient_dim, ctx.matmul(a, Ur))


def solve_left(B: np.ndarray, W: np.ndarray, ctx: FieldCtx) -> np.ndarray | None:
    """Coefficients C with C @ B = W (rows of W in rowspace of B), or None."""
    B = as_rows(B, ctx)
    W = as_rows(W, ctx, B.shape[2])
    k, d, n = B.shape
    ident = np.zeros((k, d, d), dtype=np.int64)
    ident[0] = np.eye(d, dtype=np.int64)
    aug = np.concatenate([B, ident], axis=2)
    rank, piv = _rref_inplace(aug, ctx)
    keep = [i for i, c in enumerate(piv) if c < n]
    S = Subspace(ctx, n)
    S._buf = aug[:, keep, :n].copy()
    S._dim = len(keep)
    S._pivots = [piv[i] for i in keep]
    if S.reduce(W).any():
        return None
    T = aug[:, keep, n:]
    return ctx.matmul(W[:, :, S._pivots], T)


def inverse(M: np.ndarray, ctx: FieldCtx) -> np.ndarray:
    """Inverse of a square (k, d, d) matrix; raises ValueError if singular."""
    M = as_rows(M, ctx)
    k, d, _ = M.shape
    ident = np.zeros((k, d, d), dtype=np.int64)
    ident[0] = np.eye(d, dtype=np.int64)
    aug = np.concatenate([M, ident], axis=2)
    rank, piv = _rref_inplace(aug, ctx)
    if rank < d or max(piv) >= d:
        raise ValueError("singular matrix")
    order = np.argsort(piv)
    return aug[:, :rank][:, order, d:]
