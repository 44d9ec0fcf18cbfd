"""The eight Cartan-type families W, S, H, K, HO, SHO, KO, SKO.

W, S, H, HO and SHO are carried inside W(m,n;t): a basis vector f∂_r of W has
index ``g*(m+n) + (r-1)`` where g is the monomial index of f.  K, KO and SKO
live on O(m,n;t) itself with their contact-type brackets.  Subalgebras are
cut out of these roots by spanning sets (S, H̄, HO), kernels (SKO) and derived
algebras (H, K, SHO, SKO).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp

from .algebra import AlgebraError, GradedSuperalgebra, derived_subalgebra, modp, span_subalgebra
from .carrier import (Carrier, CarrierParams, Monomial, WrongCarrierShape, div_lambda_matrix,
                      parse_monomial, render_combination)
from .classical import BadShape, MatrixRoot, build_classical, lfrak_plus_identity
from .field import FieldCtx, is_prime
from .linalg import Subspace, inverse, intersection, nullspace

FAMILIES = ("W", "S", "H", "K", "HO", "SHO", "KO", "SKO")
CARRIER_FAMILIES = ("K", "KO", "SKO")


class IsoCheckFailed(AlgebraError):
    pass


# -- parameters ------------------------------------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    family: str
    m: int
    n: int
    t: tuple
    p: int
    lam: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(int(x) for x in self.t))
        f, m, n = self.family, self.m, self.n
        if f not in FAMILIES:
            raise BadShape(f"unknown family {f!r}; expected one of {FAMILIES}")
        if not is_prime(self.p) or self.p <= 3:
            raise BadShape("p must be a prime > 3")
        if m < 0 or n < 0 or len(self.t) != m or any(x < 1 for x in self.t):
            raise BadShape("t must be an m-tuple of positive integers")
        if m + n < 1:
            raise BadShape("at least one variable is needed")
        if f == "S" and m < 1:
            raise BadShape("S needs m >= 1")
        if f == "H" and (m % 2 or m < 2):
            raise BadShape("H needs m = 2r even and positive")
        if f == "K" and m % 2 == 0:
            raise BadShape("K needs m = 2r+1 odd")
        if f in ("HO", "SHO") and (n != m or m <= 2):
            raise BadShape(f"{f} needs n = m and m > 2")
        if f in ("KO", "SKO") and (n != m + 1 or m <= 2):
            raise BadShape(f"{f} needs n = m+1 and m > 2")
        if f == "SKO":
            if self.lam is None:
                raise BadShape("SKO needs lambda")
            object.__setattr__(self, "lam", int(self.lam) % self.p)
        elif self.lam is not None:
            raise BadShape("lambda only applies to SKO")

    @property
    def params(self) -> CarrierParams:
        return CarrierParams(self.m, self.n, self.t, self.p)

    @property
    def weights(self) -> tuple:
        """Grading constants a_1..a_{m+n}."""
        a = [1] * (self.m + self.n)
        if self.family == "K":
            a[self.m - 1] = 2
        if self.family in ("KO", "SKO"):
            a[2 * self.m] = 2
        return tuple(a)

    @property
    def depth(self) -> int:
        return 2 if self.family in CARRIER_FAMILIES else 1

    @property
    def name(self) -> str:
        t = ",".join(map(str, self.t))
        base = f"{self.family}({self.m},{self.n};({t}))"
        return base + (f"[lambda={self.lam}]" if self.family == "SKO" else "")

    def to_dict(self) -> dict:
        d = {"family": self.family, "p": self.p, "m": self.m, "n": self.n, "t": list(self.t)}
        if self.family == "SKO":
            d["lambda"] = self.lam
        return d


def top_degree_formula(spec: FamilySpec) -> int:
    """Highest nonzero degree s predicted from θ = Σ p^{t_i} - m + n."""
    p, m, n = spec.p, spec.m, spec.n
    theta = sum(p ** t for t in spec.t) - m + n
    f = spec.family
    if f in ("W", "KO"):
        return theta - 1
    if f in ("S", "HO"):
        return theta - 2
    if f == "SKO":
        return theta - 3 if (m * spec.lam + 1) % p == 0 else theta - 2
    if f == "H":
        return theta - 3
    if f == "SHO":
        return theta - 5
    if f == "K":
        pim = p ** spec.t[m - 1] - 1
        return theta + pim - 3 if (n - m - 3) % p == 0 else theta + pim - 2
    raise BadShape(f)


def is_exceptional(spec: FamilySpec) -> bool:
    """Cases that the generator recipe treats with two elements."""
    p = spec.p
    if spec.family == "W":
        return (spec.m - spec.n) % p == 0
    if spec.family in ("HO", "KO", "SKO"):
        return spec.m % p != 0
    return False


# -- index maps ----------------------------------------------------------------

def prime(i: int, m: int) -> int:
    """i' for the pairing of 1..2r (r = m // 2); odd indices pair with themselves."""
    r = m // 2
    if 1 <= i <= r:
        return i + r
    if r < i <= 2 * r:
        return i - r
    return i


def sigma(i: int, m: int) -> int:
    r = m // 2
    return -1 if r < i <= 2 * r else 1


def dprime(i: int, m: int) -> int:
    """i'' pairing 1..m with m+1..2m."""
    return i + m if i <= m else i - m


# -- operators on O ----------------------------------------------------------------

def _fields(car: Carrier) -> np.ndarray:
    return np.zeros((car.m + car.n, car.dim), dtype=np.int64)


def op_Dij(car: Carrier, i: int, j: int, a: np.ndarray) -> np.ndarray:
    """D_ij(a) as a superderivation array (row r-1 holds the coefficient of ∂_r)."""
    car.check_var(i)
    car.check_var(j)
    car.homogeneous_parity(a)
    pi, pj = car.var_parity(i), car.var_parity(j)
    D = _fields(car)
    D[j - 1] += (-1) ** (pi * pj) * car.derive(i, a)
    D[i - 1] -= car.derive(j, car.sign_parity(a, (pi + pj) % 2))
    return D % car.p


def op_DH(car: Carrier, a: np.ndarray) -> np.ndarray:
    if car.m % 2:
        raise WrongCarrierShape("D_H needs an even number of even variables")
    car.homogeneous_parity(a)
    D = _fields(car)
    for i in range(1, car.m + car.n + 1):
        D[prime(i, car.m) - 1] += sigma(i, car.m) * car.derive(i, car.sign_parity(a, car.var_parity(i)))
    return D % car.p


def op_TH(car: Carrier, a: np.ndarray) -> np.ndarray:
    """T_H(a) on O(m,m) or, summing over the first 2m variables, on O(m,m+1)."""
    m = car.m
    if car.n not in (m, m + 1):
        raise WrongCarrierShape("T_H needs a carrier O(m,m) or O(m,m+1)")
    car.homogeneous_parity(a)
    return _th(car, a)


def _th(car: Carrier, a: np.ndarray) -> np.ndarray:
    m = car.m
    D = _fields(car)
    for i in range(1, 2 * m + 1):
        D[dprime(i, m) - 1] += car.derive(i, car.sign_parity(a, car.var_parity(i)))
    return D % car.p


def op_DK(car: Carrier, a: np.ndarray) -> np.ndarray:
    """D_K(a); linear, so applied monomial by monomial to inhomogeneous input."""
    m, N, p = car.m, car.m + car.n, car.p
    if m % 2 == 0:
        raise WrongCarrierShape("D_K needs an odd number of even variables")
    D = _fields(car)
    dm = car.derive(m, a)
    euler = 2 * a
    for i in range(1, N + 1):
        if i == m:
            continue
        s = car.sign_parity(a, car.var_parity(i))
        ip = prime(i, m)
        D[i - 1] += car.mul(car.var(i), car.derive(m, s)) + sigma(ip, m) * car.derive(ip, s)
        euler = euler - car.mul(car.var(i), car.derive(i, a))
    D[m - 1] += euler
    return D % p


def bracket_K(car: Carrier, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    D = op_DK(car, a)
    return (car.apply(D, b) - 2 * car.mul(car.derive(car.m, a), b)) % car.p


def _check_ko(car: Carrier):
    if car.n != car.m + 1:
        raise WrongCarrierShape("the odd contact bracket lives on O(m,m+1)")


def bracket_KO(car: Carrier, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_ko(car)
    car.homogeneous_parity(a)
    car.homogeneous_parity(b)
    m, p = car.m, car.p
    z = 2 * m + 1
    sa = car.sign_parity(a, 1)
    out = car.apply(_th(car, a), b)
    out = out + car.mul(car.derive(z, sa), car.degree_derivation(b))
    out = out + car.mul(car.degree_derivation(a) - 2 * a, car.derive(z, b))
    out = out - 2 * car.mul(car.derive(z, sa), b)
    return out % p


# -- roots -------------------------------------------------------------------------

class WRoot:
    """W(m,n;t) with the superderivation bracket."""

    def __init__(self, car: Carrier):
        self.car = car
        self.p = car.p
        self.N = N = car.m + car.n
        self.dim = car.dim * N
        self.varpar = np.array([0] * car.m + [1] * car.n, dtype=np.int64)
        self.parity = (car.parity[:, None] ^ self.varpar[None, :]).ravel()
        self.zdeg = np.repeat(car.degree - 1, N)
        self.labels = [_wlabel(M.render(), r) for M in car.monomials for r in range(1, N + 1)]

    def index(self, g: int, r: int) -> int:
        return g * self.N + (r - 1)

    def from_fields(self, D: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(D.T).ravel() % self.p

    def fields(self, vec: np.ndarray) -> np.ndarray:
        return vec.reshape(self.car.dim, self.N).T

    def apply(self, vec: np.ndarray, g: np.ndarray) -> np.ndarray:
        return self.car.apply(self.fields(vec), g)

    def render(self, vec: np.ndarray) -> str:
        return render_combination([(int(vec[i]), self.labels[i]) for i in np.flatnonzero(vec)], self.p)

    def ad_of(self, vec: np.ndarray) -> sp.csr_matrix:
        """[F∂_k, g∂_j] = F∂_k(g)∂_j - (-1)^{|F∂_k||g∂_j|} g∂_j(F)∂_k, summed over the terms of vec."""
        car, N, p = self.car, self.N, self.p
        vec = np.asarray(vec, dtype=np.int64) % p
        rows, cols, vals = [], [], []
        jj = np.arange(N)
        allg = np.arange(car.dim)
        tabs = car.deriv_tables
        for w in np.flatnonzero(vec):
            c = int(vec[w])
            F, k = divmod(int(w), N)
            k += 1
            dt, dc = tabs[k]
            gs = np.flatnonzero(dt >= 0)
            tgt, mc = car.mul_idx(np.full(gs.shape, F), dt[gs])
            ok = tgt >= 0
            g, t = gs[ok], tgt[ok]
            v = dc[g] * mc[ok] % p * c
            rows.append((t[:, None] * N + jj).ravel())
            cols.append((g[:, None] * N + jj).ravel())
            vals.append(np.repeat(v, N))
            pD = int(car.parity[F]) ^ int(self.varpar[k - 1])
            for j in range(1, N + 1):
                dtj, dcj = tabs[j]
                if dtj[F] < 0:
                    continue
                tgt, mc = car.mul_idx(allg, np.full(car.dim, dtj[F]))
                ok = tgt >= 0
                g = allg[ok]
                odd = pD & (car.parity[g] ^ self.varpar[j - 1])
                sg = np.where(odd == 1, 1, -1)
                rows.append(tgt[ok] * N + (k - 1))
                cols.append(g * N + (j - 1))
                vals.append(sg * mc[ok] * int(dcj[F]) * c)
        return _assemble(rows, cols, vals, self.dim, p)


def _wlabel(mono: str, r: int) -> str:
    return f"d{r}" if mono == "1" else f"{mono}*d{r}"


def _assemble(rows, cols, vals, dim, p) -> sp.csr_matrix:
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=np.int64)
    M = sp.coo_matrix((np.concatenate(vals) % p, (np.concatenate(rows), np.concatenate(cols))),
                      shape=(dim, dim))
    return modp(M, p)


class _CarrierRoot:
    """O(m,n;t) as a Lie superalgebra under a contact-type bracket."""

    def __init__(self, car: Carrier, weights):
        self.car = car
        self.p = car.p
        self.dim = car.dim
        self.parity = car.parity.copy()
        w = np.asarray(weights, dtype=np.int64)
        m = car.m
        self.zdeg = np.array([sum(a * x for a, x in zip(M.alpha, w[:m])) + sum(w[j - 1] for j in M.u)
                              for M in car.monomials], dtype=np.int64) - 2
        self.labels = [M.render() for M in car.monomials]

    def render(self, vec: np.ndarray) -> str:
        return self.car.render(np.asarray(vec) % self.p)


class KRoot(_CarrierRoot):
    def ad_of(self, vec: np.ndarray) -> sp.csr_matrix:
        car, p = self.car, self.p
        vec = np.asarray(vec, dtype=np.int64) % p
        if not vec.any():
            return sp.csr_matrix((self.dim, self.dim), dtype=np.int64)
        M = car.apply_matrix(op_DK(car, vec)) - 2 * car.left_mul_matrix(car.derive(car.m, vec))
        return modp(M, p)


class KORoot(_CarrierRoot):
    def __init__(self, car: Carrier, weights):
        super().__init__(car, weights)
        # the odd contact bracket is odd on O, so parity in the algebra is shifted
        self.parity = car.parity ^ 1
        self._deg = sp.diags(car.degree_derivation(np.ones(car.dim, dtype=np.int64))).tocsr()
        self._dz = car.derive_matrix(2 * car.m + 1)

    def ad_of(self, vec: np.ndarray) -> sp.csr_matrix:
        car, p = self.car, self.p
        z = 2 * car.m + 1
        vec = np.asarray(vec, dtype=np.int64) % p
        if not vec.any():
            return sp.csr_matrix((self.dim, self.dim), dtype=np.int64)
        dza = car.derive(z, car.sign_parity(vec, 1))
        M = car.apply_matrix(_th(car, vec))
        if dza.any():
            L = car.left_mul_matrix(dza)
            M = M + L @ self._deg - 2 * L
        e = (car.degree_derivation(vec) - 2 * vec) % p
        if e.any():
            M = M + car.left_mul_matrix(e) @ self._dz
        return modp(M, p)


# -- spanning sets over all monomials at once ----------------------------------------

def _rows_from_terms(car: Carrier, N: int, terms) -> sp.csr_matrix:
    """Sparse (dim O x dim W) matrix: row b is Σ coeff·x^{target}∂_r over ``terms``
    given as (target array, coeff array, r)."""
    rows, cols, vals = [], [], []
    b = np.arange(car.dim)
    for tgt, coef, r in terms:
        ok = (tgt >= 0) & (coef % car.p != 0)
        rows.append(b[ok]); cols.append(tgt[ok] * N + (r - 1)); vals.append(coef[ok])
    M = sp.coo_matrix((np.concatenate(vals) % car.p, (np.concatenate(rows), np.concatenate(cols))),
                      shape=(car.dim, car.dim * N))
    return modp(M, car.p)


def _psign(car: Carrier, flip: int) -> np.ndarray:
    return np.where((car.parity == 1) & (flip == 1), -1, 1)


def dij_rows(car: Carrier, i: int, j: int) -> sp.csr_matrix:
    N = car.m + car.n
    pi, pj = car.var_parity(i), car.var_parity(j)
    ti, ci = car.deriv_tables[i]
    tj, cj = car.deriv_tables[j]
    return _rows_from_terms(car, N, [(ti, (-1) ** (pi * pj) * ci, j),
                                     (tj, -_psign(car, (pi + pj) % 2) * cj, i)])


def dh_rows(car: Carrier) -> sp.csr_matrix:
    m, N = car.m, car.m + car.n
    terms = []
    for i in range(1, N + 1):
        t, c = car.deriv_tables[i]
        terms.append((t, sigma(i, m) * _psign(car, car.var_parity(i)) * c, prime(i, m)))
    return _rows_from_terms(car, N, terms)


def th_rows(car: Carrier) -> sp.csr_matrix:
    m, N = car.m, car.m + car.n
    terms = []
    for i in range(1, 2 * m + 1):
        t, c = car.deriv_tables[i]
        terms.append((t, _psign(car, car.var_parity(i)) * c, dprime(i, m)))
    return _rows_from_terms(car, N, terms)


# -- building ----------------------------------------------------------------------

class _PotentialRenderer:
    """Render W-vectors of a subalgebra spanned by op(x^b) as ``op(a)``."""

    def __init__(self, span_alg: GradedSuperalgebra, car: Carrier, name: str, monos: list):
        self.alg = span_alg
        self.car = car
        self.name = name
        self.monos = monos

    def __call__(self, vec: np.ndarray) -> str:
        try:
            c = self.alg.from_root(vec)[0]
        except AlgebraError:
            return self.alg.root.render(vec)
        a = self.car.zero()
        for i in np.flatnonzero(c):
            a[self.monos[i]] = (a[self.monos[i]] + c[i]) % self.car.p
        return f"{self.name}({self.car.render(a)})"


def _mono_index(car: Carrier, *variables) -> tuple:
    """(index, sign) of the product of distinct variables."""
    v = car.one()
    for i in variables:
        v = car.mul(v, car.var(i))
    nz = np.flatnonzero(v)
    return int(nz[0]), int(v[nz[0]])


def _op_vector(car: Carrier, rows: sp.csr_matrix, a: np.ndarray) -> np.ndarray:
    """Σ a_b · rows[b] (the operator applied to a, as a root vector)."""
    return np.asarray(rows.T @ (a % car.p)).ravel() % car.p


def build_family(spec: FamilySpec, field: FieldCtx | None = None) -> GradedSuperalgebra:
    """Construct the family as a GradedSuperalgebra over GF(p)."""
    field = field or FieldCtx(spec.p)
    if field.p != spec.p or field.k != 1:
        raise BadShape("families are built over the prime field GF(p) of their parameters")
    car = Carrier(spec.params, field)
    meta = spec.to_dict()
    meta["name"] = spec.name
    f, m, n = spec.family, spec.m, spec.n
    N = m + n
    if f in CARRIER_FAMILIES:
        return _build_carrier_family(spec, car, field, meta)
    root = WRoot(car)
    W = GradedSuperalgebra(field, root.labels, root.parity, root.zdeg, root,
                           cartan=[root.index(_mono_index(car, i)[0], i) for i in range(1, N + 1)],
                           meta=meta, renderer=root.render)
    if f == "W":
        return W
    monos = [M.render() for M in car.monomials]
    if f == "S":
        return _build_S(W, car, meta)
    if f == "H":
        rows = dh_rows(car)
        r, q = m // 2, n // 2
        cart = []
        for i in range(1, r + 1):
            cart.append(_mono_index(car, i, prime(i, m)))
        for j in range(m + 1, m + q + 1):
            cart.append(_mono_index(car, j, j + q))
        crow = sp.vstack([c * rows[g] for g, c in cart])
        clab = [f"DH({car.monomials[g].render()})" if c == 1 else
                f"DH({render_combination([(c, car.monomials[g].render())], car.p)})" for g, c in cart]
        Hbar = span_subalgebra(W, rows, [f"DH({x})" for x in monos], crow, clab,
                               {"name": "Hbar" + spec.name[1:]})
        Hbar.renderer = _PotentialRenderer(Hbar, car, "DH", _label_monos(Hbar, car))
        H = derived_subalgebra(Hbar, 1, meta=meta)
        return H
    HO = _build_HO(W, car, meta)
    if f == "HO":
        return HO
    if f == "SHO":
        return _build_SHO(W, HO, car, meta)
    raise BadShape(f)


def _label_monos(A: GradedSuperalgebra, car: Carrier) -> list:
    """Monomial index behind each ``op(x^b)`` basis label."""
    out = []
    for lab in A.labels:
        inner = lab[lab.index("(") + 1: -1]
        out.append(car.index[_parse_mono(inner, car)])
    return out


def _parse_mono(text: str, car: Carrier) -> Monomial:
    return parse_monomial(text, car.m, car.n)


def _build_S(W: GradedSuperalgebra, car: Carrier, meta) -> GradedSuperalgebra:
    m, N = car.m, car.m + car.n
    blocks, labels = _s_spanning(car)
    crow, clab = [], []
    for i in range(2, N + 1):
        g, c = _mono_index(car, 1, i)
        sgn = -1 if i <= m else 1
        crow.append(sgn * c * dij_rows(car, 1, i)[g])
        clab.append(("-" if sgn < 0 else "") + f"D1,{i}({car.monomials[g].render()})")
    return span_subalgebra(W, sp.vstack(blocks), labels, sp.vstack(crow), clab, meta)


def _s_spanning(car: Carrier):
    N = car.m + car.n
    monos = [M.render() for M in car.monomials]
    blocks, labels = [], []
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            blocks.append(dij_rows(car, i, j))
            labels.extend(f"D{i},{j}({x})" for x in monos)
    return blocks, labels


def _build_HO(W: GradedSuperalgebra, car: Carrier, meta) -> GradedSuperalgebra:
    m = car.m
    rows = th_rows(car)
    monos = [M.render() for M in car.monomials]
    cart = [_mono_index(car, i, i + m) for i in range(1, m + 1)]
    crow = sp.vstack([c * rows[g] for g, c in cart])
    clab = [f"TH({car.monomials[g].render()})" for g, c in cart]
    HO = span_subalgebra(W, rows, [f"TH({x})" for x in monos], crow, clab, meta)
    HO.renderer = _PotentialRenderer(HO, car, "TH", _label_monos(HO, car))
    return HO


def _build_SHO(W, HO, car: Carrier, meta) -> GradedSuperalgebra:
    """Second derived algebra of S(m,m;t) ∩ HO(m,m;t), intersected block by block."""
    p, m = car.p, car.m
    blocks, _ = _s_spanning(car)
    Srows = modp(sp.vstack(blocks), p)
    code = W.zdeg * 2 + W.parity
    Srows = Srows[np.flatnonzero(np.diff(Srows.indptr))]
    skey = code[Srows.indices[Srows.indptr[:-1]]]
    hkey = HO.zdeg * 2 + HO.parity
    inter = []
    for key in sorted(set(hkey.tolist())):
        cols = np.flatnonzero(code == key)
        Hb = HO.emb[np.flatnonzero(hkey == key)][:, cols].toarray() % p
        Sb = Srows[np.flatnonzero(skey == key)][:, cols].toarray() % p
        U = Subspace(W.field, len(cols), Hb)
        V = Subspace(W.field, len(cols))
        V.add(Sb, chunk=256)
        I = intersection(U, V).basis()
        if I.shape[0]:
            full = sp.csr_matrix((I[:, :].ravel(), (np.repeat(np.arange(I.shape[0]), len(cols)),
                                                   np.tile(cols, I.shape[0]))),
                                 shape=(I.shape[0], W.dim))
            inter.append(modp(full, p))
    rows = sp.vstack(inter).tocsr()
    a1, _ = _mono_index(car, 1, 1 + m)
    th = th_rows(car)
    crow, clab = [], []
    for i in range(2, m + 1):
        ai, _ = _mono_index(car, i, i + m)
        crow.append(th[a1] - th[ai])
        clab.append(f"TH({car.monomials[a1].render()} - {car.monomials[ai].render()})")
    render = HO.renderer
    labels = [render(np.asarray(rows[r].toarray()).ravel()) for r in range(rows.shape[0])]
    SH = span_subalgebra(W, rows, labels, sp.vstack(crow), clab, {"name": "S∩HO"})
    SH.renderer = render
    out = derived_subalgebra(SH, 2, meta=meta)
    out.renderer = render
    return out


def _build_carrier_family(spec: FamilySpec, car: Carrier, field: FieldCtx, meta) -> GradedSuperalgebra:
    f, m, n, p = spec.family, spec.m, spec.n, spec.p
    if f == "K":
        root = KRoot(car, spec.weights)
        r, q = m // 2, n // 2
        cart = [_mono_index(car, i, prime(i, m))[0] for i in range(1, r + 1)]
        cart += [_mono_index(car, j, j + q)[0] for j in range(m + 1, m + q + 1)]
        cart.append(_mono_index(car, m)[0])
        Kbar = GradedSuperalgebra(field, root.labels, root.parity, root.zdeg, root,
                                  cartan=cart, meta=meta, renderer=root.render)
        return derived_subalgebra(Kbar, 1, meta=meta)
    root = KORoot(car, spec.weights)
    z = 2 * m + 1
    cart = [_mono_index(car, i, i + m)[0] for i in range(1, m + 1)] + [_mono_index(car, z)[0]]
    KO = GradedSuperalgebra(field, root.labels, root.parity, root.zdeg, root,
                            cartan=cart, meta=meta, renderer=root.render)
    if f == "KO":
        return KO
    # SKO: second derived algebra of ker div_λ
    lam = spec.lam
    D = div_lambda_matrix(car, lam).tocsc()
    code = root.zdeg * 2 + root.parity
    rows = []
    for key in sorted(set(code.tolist())):
        cols = np.flatnonzero(code == key)
        sub = D[:, cols]
        live = np.unique(sub.indices)
        if live.size == 0:
            K = np.eye(len(cols), dtype=np.int64)
        else:
            K = nullspace(sub[live].toarray() % p, field)[0]
        for v in K:
            full = np.zeros(car.dim, dtype=np.int64)
            full[cols] = v
            rows.append(full)
    rows = np.array(rows, dtype=np.int64)
    ml = m * lam % p
    crow, clab = [], []
    x_z = _mono_index(car, z)[0]
    if ml:
        for i in range(1, m + 1):
            g = _mono_index(car, i, i + m)[0]
            v = car.zero()
            v[x_z] = 1
            v[g] = (v[g] + ml) % p
            crow.append(v)
            clab.append(car.render(v))
    else:
        # the listed elements collapse to x_{2m+1}; fall back to the KO torus
        for g in cart:
            crow.append(car.mono(car.monomials[g]))
            clab.append(car.monomials[g].render())
    labels = [car.render(v) for v in rows]
    kmeta = dict(meta)
    kmeta["name"] = "ker div_lambda"
    Ker = span_subalgebra(KO, rows, labels, np.array(crow), clab, kmeta)
    return derived_subalgebra(Ker, 2, meta=meta)


# -- null isomorphisms ----------------------------------------------------------------

@dataclass
class NullIso:
    """Degree-0 component of a family mapped onto a classical matrix algebra.

    ``images`` are gl-coordinates of the images of the source basis (indices
    ``source_index``); ``matrix`` holds their coordinates in the target basis."""
    source: GradedSuperalgebra
    source_index: np.ndarray
    target: GradedSuperalgebra
    images: np.ndarray
    matrix: np.ndarray
    inverse: np.ndarray
    pairs_checked: int = 0
    notes: list = dc_field(default_factory=list)

    def push(self, vec: np.ndarray) -> np.ndarray:
        """Target coordinates of a degree-0 source vector (prime field)."""
        return vec[self.source_index] @ self.matrix % self.source.p

    def pull(self, tvec: np.ndarray, ctx: FieldCtx | None = None) -> np.ndarray:
        """Source coordinates of a target vector; (k, dim) input over ``ctx`` allowed."""
        p = self.source.p
        tvec = np.asarray(tvec, dtype=np.int64)
        if tvec.ndim == 1:
            out = np.zeros(self.source.dim, dtype=np.int64)
            out[self.source_index] = tvec @ self.inverse % p
            return out
        out = np.zeros((tvec.shape[0], self.source.dim), dtype=np.int64)
        out[:, self.source_index] = tvec @ self.inverse % p
        return out


def _phi_fields(car: Carrier, D: np.ndarray) -> np.ndarray:
    """x_i ∂_j ↦ e_ij on the degree-0 part of a superderivation array."""
    N = car.m + car.n
    M = np.zeros((N, N), dtype=np.int64)
    for i in range(1, N + 1):
        g = _mono_index(car, i)[0]
        M[i - 1, :] = D[:, g]
    return M % car.p


def _drop(M: np.ndarray, idx: int) -> np.ndarray:
    keep = [i for i in range(M.shape[0]) if i != idx]
    return M[np.ix_(keep, keep)]


def null_iso(A: GradedSuperalgebra) -> NullIso:
    """The explicit identification of A_0 with its classical model, checked on
    every pair of basis elements."""
    fam = A.meta.get("family")
    if fam not in FAMILIES:
        raise AlgebraError("null_iso needs an algebra built by build_family")
    m, n, p = A.meta["m"], A.meta["n"], A.p
    field = A.field
    car = A.root.car
    J = A.component(0)
    src = np.array([A.to_root(A.unit(j)) for j in J])
    notes = []
    imgs = []
    if fam in ("W", "S", "H", "HO", "SHO"):
        for v in src:
            imgs.append(_phi_fields(car, A.root.fields(v)))
        size_m, size_n = m, n
        kind = {"W": "gl", "S": "sl", "H": "L", "HO": "Ptilde", "SHO": "P"}[fam]
        if fam == "H":
            notes.append("x_i d_j -> e_ij restricted to the Hamiltonian null")
    elif fam == "K":
        for v in src:
            imgs.append(_drop(_phi_fields(car, op_DK(car, v)), m - 1))
        size_m, size_n, kind = m - 1, n, "L+I"
    else:
        z = 2 * m + 1
        xz = _mono_index(car, z)[0]
        for v in src:
            rest = v.copy()
            c = rest[xz]
            rest[xz] = 0
            M = _drop(_phi_fields(car, _th(car, rest)), z - 1)
            M = (M + c * np.eye(2 * m, dtype=np.int64)) % p
            if fam == "SKO":
                half = pow(2, -1, p)
                lam_i = (M[0, 0] + M[m, m]) * half % p
                M = (M - lam_i * np.eye(2 * m, dtype=np.int64)) % p
            imgs.append(M)
        size_m, size_n = m, m
        kind = "Ptilde+I" if fam == "KO" else "Ptilde"
    T = lfrak_plus_identity(size_m, size_n, field) if kind == "L+I" else build_classical(kind, size_m, size_n, field)
    gl = MatrixRoot(size_m, size_n, p)
    images = np.array([gl.vector(M) for M in imgs]).reshape(len(J), gl.dim)
    if len(J) != T.dim:
        raise IsoCheckFailed(f"null has dim {len(J)} but the target has dim {T.dim}")
    try:
        C = T.from_root(images)
    except AlgebraError as exc:
        raise IsoCheckFailed(f"an image leaves the target algebra: {exc}") from exc
    if not np.array_equal(C @ _target_rows(T) % p, images):
        raise IsoCheckFailed("an image leaves the target algebra")
    try:
        Cinv = inverse(C, field)[0]
    except ValueError as exc:
        raise IsoCheckFailed("map is not bijective") from exc
    pairs = 0
    for a, j in enumerate(J):
        adJ = A.ad(j)[J, :][:, J].toarray() % p
        lhs = adJ.T @ images % p
        rhs = np.asarray((gl.ad_of(images[a]) @ images.T)).T % p
        if not np.array_equal(lhs, rhs):
            b = int(np.flatnonzero((lhs != rhs).any(axis=1))[0])
            raise IsoCheckFailed(f"bracket not preserved on ({A.labels[j]}, {A.labels[J[b]]})")
        pairs += len(J)
    return NullIso(A, J, T, images, C, Cinv, pairs, notes)


def _target_rows(T: GradedSuperalgebra) -> np.ndarray:
    return T.emb.toarray() if T.emb is not None else np.eye(T.dim, dtype=np.int64)
