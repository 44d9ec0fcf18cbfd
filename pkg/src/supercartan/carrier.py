"""The associative superalgebra O(m,n;t) = O(m;t) ⊗ Λ(n).

Monomials x^(α)x^u are indexed in degree-lexicographic order (total degree
|α|+|u|, then α, then u as a bitmask).  Variables are numbered 1..m (even,
divided powers) and m+1..m+n (odd, exterior).  Elements of O are dense
``int64`` coefficient vectors mod p; superderivations ``Σ f_r ∂_r`` are dense
``(m+n, dim O)`` arrays whose row r-1 holds f_r.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .field import FieldCtx


class CarrierError(ValueError):
    pass


class ParamMismatch(CarrierError):
    pass


class IndexOutOfRange(CarrierError):
    pass


class WrongCarrierShape(CarrierError):
    pass


class NonHomogeneous(CarrierError):
    pass


def binom_mod(n: int, k: int, p: int) -> int:
    """C(n, k) mod p by Lucas' theorem."""
    if k < 0 or k > n:
        return 0
    out = 1
    while n or k:
        a, b = n % p, k % p
        if b > a:
            return 0
        num = den = 1
        for i in range(b):
            num = num * (a - i) % p
            den = den * (i + 1) % p
        out = out * num * pow(den, -1, p) % p
        n //= p
        k //= p
    return out


@dataclass(frozen=True, order=True)
class Monomial:
    alpha: tuple[int, ...]
    u: tuple[int, ...] = ()

    @property
    def parity(self) -> int:
        return len(self.u) % 2

    @property
    def degree(self) -> int:
        return sum(self.alpha) + len(self.u)

    def render(self) -> str:
        parts = []
        for i, a in enumerate(self.alpha, start=1):
            if a == 1:
                parts.append(f"x{i}")
            elif a > 1:
                parts.append(f"x{i}^({a})")
        parts.extend(f"x{j}" for j in self.u)
        return "*".join(parts) if parts else "1"

    def __str__(self):
        return self.render()


_FACTOR = re.compile(r"x(\d+)(?:\^\((\d+)\))?")


def parse_monomial(text: str, m: int, n: int) -> Monomial:
    """Inverse of :meth:`Monomial.render`."""
    text = text.strip()
    alpha = [0] * m
    u: list[int] = []
    if text != "1":
        for factor in text.split("*"):
            mt = _FACTOR.fullmatch(factor)
            if not mt:
                raise CarrierError(f"bad monomial factor {factor!r}")
            i = int(mt.group(1))
            e = int(mt.group(2) or 1)
            if 1 <= i <= m:
                if alpha[i - 1]:
                    raise CarrierError(f"variable x{i} repeated in {text!r}")
                alpha[i - 1] = e
            elif m < i <= m + n:
                if mt.group(2) is not None or i in u:
                    raise CarrierError(f"odd variable x{i} must appear once, bare")
                u.append(i)
            else:
                raise CarrierError(f"variable x{i} out of range")
    if u != sorted(u):
        raise CarrierError(f"odd variables out of order in {text!r}")
    return Monomial(tuple(alpha), tuple(u))


@dataclass(frozen=True)
class CarrierParams:
    m: int
    n: int
    t: tuple[int, ...]
    p: int

    def __post_init__(self):
        if self.m < 0 or self.n < 0 or len(self.t) != self.m:
            raise CarrierError("t must be an m-tuple")
        if any(ti < 1 for ti in self.t):
            raise CarrierError("t entries must be positive")

    @property
    def pi(self) -> tuple[int, ...]:
        return tuple(self.p ** ti - 1 for ti in self.t)

    @property
    def dim(self) -> int:
        return self.p ** sum(self.t) * 2 ** self.n

    def parity_of_var(self, r: int) -> int:
        return 0 if r <= self.m else 1


class Carrier:
    """Basis, multiplication and derivation tables of O(m,n;t)."""

    def __init__(self, params: CarrierParams, field: FieldCtx | None = None):
        self.params = params
        self.p = params.p
        self.m, self.n = params.m, params.n
        self.field = field or FieldCtx(params.p)
        pi = params.pi
        evens = list(itertools.product(*[range(x + 1) for x in pi])) if self.m else [()]
        odds = [tuple(self.m + 1 + j for j in range(self.n) if mask >> j & 1)
                for mask in range(2 ** self.n)]
        monos = [Monomial(a, u) for a in evens for u in odds]
        monos.sort(key=lambda M: (M.degree, M.alpha, _mask(M.u, self.m)))
        self.monomials: list[Monomial] = monos
        self.index = {M: i for i, M in enumerate(monos)}
        self.dim = len(monos)
        if self.dim != params.dim:
            raise AssertionError("basis enumeration disagrees with p^{Σt}·2^n")
        self._even_index = {a: i for i, a in enumerate(evens)}
        self.e_of = np.array([self._even_index[M.alpha] for M in monos], dtype=np.int64)
        self.o_of = np.array([_mask(M.u, self.m) for M in monos], dtype=np.int64)
        self.combine = np.full((len(evens), 2 ** self.n), -1, dtype=np.int64)
        self.combine[self.e_of, self.o_of] = np.arange(self.dim)
        self.parity = np.array([M.parity for M in monos], dtype=np.int64)
        self.degree = np.array([M.degree for M in monos], dtype=np.int64)
        self._evens = evens

    # -- tables ------------------------------------------------------------

    @cached_property
    def _even_mul(self):
        p, evens = self.p, self._evens
        ne = len(evens)
        tgt = np.full((ne, ne), -1, dtype=np.int64)
        coef = np.zeros((ne, ne), dtype=np.int64)
        pi = self.params.pi
        for i, a in enumerate(evens):
            for j, b in enumerate(evens):
                s = tuple(x + y for x, y in zip(a, b))
                if any(x > q for x, q in zip(s, pi)):
                    continue
                c = 1
                for x, y in zip(a, b):
                    c = c * binom_mod(x + y, x, p) % p
                if c:
                    tgt[i, j] = self._even_index[s]
                    coef[i, j] = c
        return tgt, coef

    @cached_property
    def _odd_mul(self):
        N = 2 ** self.n
        tgt = np.full((N, N), -1, dtype=np.int64)
        sign = np.zeros((N, N), dtype=np.int64)
        for a in range(N):
            for b in range(N):
                if a & b:
                    continue
                # inversions: pairs (i in a, j in b) with i > j
                inv = sum(bin(a >> (j + 1)).count("1") for j in range(self.n) if b >> j & 1)
                tgt[a, b] = a | b
                sign[a, b] = -1 if inv % 2 else 1
        return tgt, sign

    def mul_idx(self, i, j):
        """Product of basis monomials i, j (arrays broadcast): (target, coeff)
        with target -1 where the product vanishes."""
        i = np.asarray(i)
        j = np.asarray(j)
        et, ec = self._even_mul
        ot, osg = self._odd_mul
        ei, ej = self.e_of[i], self.e_of[j]
        oi, oj = self.o_of[i], self.o_of[j]
        e = et[ei, ej]
        o = ot[oi, oj]
        ok = (e >= 0) & (o >= 0)
        tgt = np.where(ok, self.combine[np.where(ok, e, 0), np.where(ok, o, 0)], -1)
        coef = np.where(ok, ec[ei, ej] * osg[oi, oj], 0) % self.p
        return tgt, coef

    @cached_property
    def deriv_tables(self):
        """For r in 1..m+n: (target, coeff) arrays giving ∂_r on each monomial."""
        out = {}
        for r in range(1, self.m + self.n + 1):
            tgt = np.full(self.dim, -1, dtype=np.int64)
            coef = np.zeros(self.dim, dtype=np.int64)
            for idx, M in enumerate(self.monomials):
                if r <= self.m:
                    if M.alpha[r - 1] == 0:
                        continue
                    a = list(M.alpha)
                    a[r - 1] -= 1
                    tgt[idx] = self.index[Monomial(tuple(a), M.u)]
                    coef[idx] = 1
                else:
                    if r not in M.u:
                        continue
                    pos = M.u.index(r)
                    tgt[idx] = self.index[Monomial(M.alpha, M.u[:pos] + M.u[pos + 1:])]
                    coef[idx] = -1 if pos % 2 else 1
            out[r] = (tgt, coef % self.p)
        return out

    def var_parity(self, r: int) -> int:
        return 0 if r <= self.m else 1

    def check_var(self, r: int):
        if not 1 <= r <= self.m + self.n:
            raise IndexOutOfRange(f"variable index {r} not in 1..{self.m + self.n}")

    # -- elements ----------------------------------------------------------

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.int64)

    def mono(self, M: Monomial | str, coeff: int = 1) -> np.ndarray:
        if isinstance(M, str):
            M = parse_monomial(M, self.m, self.n)
        v = self.zero()
        v[self.index[M]] = coeff % self.p
        return v

    def var(self, i: int) -> np.ndarray:
        self.check_var(i)
        if i <= self.m:
            a = [0] * self.m
            a[i - 1] = 1
            return self.mono(Monomial(tuple(a)))
        return self.mono(Monomial((0,) * self.m, (i,)))

    def one(self) -> np.ndarray:
        return self.mono(Monomial((0,) * self.m))

    def parity_of(self, a: np.ndarray) -> int | None:
        """Common parity of a's monomials; None if a mixes parities; 0 for a=0."""
        par = set(self.parity[np.flatnonzero(a)].tolist())
        if len(par) > 1:
            return None
        return par.pop() if par else 0

    def homogeneous_parity(self, a: np.ndarray) -> int:
        par = self.parity_of(a)
        if par is None:
            raise NonHomogeneous("element mixes even and odd monomials")
        return par

    def render(self, a: np.ndarray) -> str:
        return render_combination(
            [(int(c), self.monomials[i].render()) for i, c in _items(a)], self.p)

    def parse(self, text: str) -> np.ndarray:
        v = self.zero()
        for c, body in parse_combination(text):
            v = (v + self.mono(body, c)) % self.p
        return v

    # -- operations --------------------------------------------------------

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _same(a, self)
        _same(b, self)
        out = self.zero()
        ia = np.flatnonzero(a)
        ib = np.flatnonzero(b)
        if ia.size == 0 or ib.size == 0:
            return out
        I, J = np.meshgrid(ia, ib, indexing="ij")
        tgt, coef = self.mul_idx(I.ravel(), J.ravel())
        vals = coef * a[I.ravel()] % self.p * b[J.ravel()]
        ok = tgt >= 0
        np.add.at(out, tgt[ok], vals[ok])
        return out % self.p

    def derive(self, r: int, a: np.ndarray) -> np.ndarray:
        self.check_var(r)
        _same(a, self)
        tgt, coef = self.deriv_tables[r]
        out = self.zero()
        ok = (tgt >= 0) & (a != 0)
        np.add.at(out, tgt[ok], coef[ok] * a[ok])
        return out % self.p

    def sign_parity(self, a: np.ndarray, flip: int) -> np.ndarray:
        """Multiply each monomial of a by (-1)^(flip·|monomial|)."""
        if not flip:
            return a.copy()
        return np.where(self.parity == 1, -a, a) % self.p

    def degree_derivation(self, a: np.ndarray, upto: int | None = None) -> np.ndarray:
        """𝔇 = Σ_{i≤2m'} x_i∂_i where the carrier is O(m', m') or O(m', m'+1)."""
        if upto is None:
            half = self.m
            if self.n not in (half, half + 1):
                raise WrongCarrierShape("𝔇 needs a carrier O(m,m) or O(m,m+1)")
            upto = 2 * half
        deg = np.array([sum(M.alpha[: min(upto, self.m)])
                        + sum(1 for j in M.u if j <= upto) for M in self.monomials],
                       dtype=np.int64)
        return deg * a % self.p

    def apply(self, D: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Apply the superderivation Σ f_r ∂_r to g."""
        out = self.zero()
        for r in range(1, self.m + self.n + 1):
            f = D[r - 1]
            if f.any():
                out = (out + self.mul(f, self.derive(r, g))) % self.p
        return out

    # -- whole-basis kernels (used by the structure-constant providers) ------

    def apply_matrix(self, D: np.ndarray) -> sp.csr_matrix:
        """Matrix (dim x dim) of the superderivation D acting on O; column b
        holds D(x^b)."""
        rows, cols, vals = [], [], []
        all_b = np.arange(self.dim)
        for r in range(1, self.m + self.n + 1):
            f = D[r - 1]
            fnz = np.flatnonzero(f)
            if fnz.size == 0:
                continue
            dt, dc = self.deriv_tables[r]
            ok = dt >= 0
            bs, bd, bc = all_b[ok], dt[ok], dc[ok]
            for F in fnz:
                tgt, c = self.mul_idx(np.full(bd.shape, F), bd)
                keep = tgt >= 0
                rows.append(tgt[keep])
                cols.append(bs[keep])
                vals.append(c[keep] * bc[keep] % self.p * f[F])
        return _coo(rows, cols, vals, (self.dim, self.dim), self.p)

    def left_mul_matrix(self, a: np.ndarray) -> sp.csr_matrix:
        """Matrix of b ↦ a·b."""
        rows, cols, vals = [], [], []
        all_b = np.arange(self.dim)
        for F in np.flatnonzero(a):
            tgt, c = self.mul_idx(np.full(self.dim, F), all_b)
            keep = tgt >= 0
            rows.append(tgt[keep])
            cols.append(all_b[keep])
            vals.append(c[keep] * a[F])
        return _coo(rows, cols, vals, (self.dim, self.dim), self.p)

    def derive_matrix(self, r: int) -> sp.csr_matrix:
        tgt, coef = self.deriv_tables[r]
        ok = tgt >= 0
        return _coo([tgt[ok]], [np.flatnonzero(ok)], [coef[ok]], (self.dim, self.dim), self.p)

    def parity_sign_matrix(self) -> sp.csr_matrix:
        return sp.diags(np.where(self.parity == 1, self.p - 1, 1)).tocsr()


def divergence(car: Carrier, D: np.ndarray) -> np.ndarray:
    """div(Σ f_k∂_k) = Σ (-1)^{|∂_k||f_k|} ∂_k(f_k), applied monomial-wise."""
    out = car.zero()
    for k in range(1, car.m + car.n + 1):
        f = D[k - 1]
        if f.any():
            out = (out + car.derive(k, car.sign_parity(f, car.var_parity(k)))) % car.p
    return out


def degree_derivation(car: Carrier, a: np.ndarray) -> np.ndarray:
    return car.degree_derivation(a)


def div_lambda(car: Carrier, lam: int, a: np.ndarray) -> np.ndarray:
    """(-1)^{|a|}·2·(Σ_i ∂_i∂_{i+m}(a) + (𝔇 - mλ)∂_{2m+1}(a)) on O(m,m+1)."""
    m = car.m
    if car.n != m + 1:
        raise WrongCarrierShape("div_λ lives on O(m,m+1;t)")
    par = car.homogeneous_parity(a)
    acc = car.zero()
    for i in range(1, m + 1):
        acc = acc + car.derive(i, car.derive(i + m, a))
    d = car.derive(2 * m + 1, a)
    acc = acc + car.degree_derivation(d) - m * lam * d
    sign = -2 if par else 2
    return sign * acc % car.p


def div_lambda_matrix(car: Carrier, lam: int) -> sp.csr_matrix:
    """Matrix of div_λ on the monomial basis (each monomial is homogeneous)."""
    m, p = car.m, car.p
    acc = sp.csr_matrix((car.dim, car.dim), dtype=np.int64)
    for i in range(1, m + 1):
        acc = acc + car.derive_matrix(i) @ car.derive_matrix(i + m)
    d = car.derive_matrix(2 * m + 1)
    deg = sp.diags(car.degree_derivation(np.ones(car.dim, dtype=np.int64)))
    acc = acc + deg @ d - (m * lam % p) * d
    sign = sp.diags(np.where(car.parity == 1, -2, 2))
    return _mod(acc @ sign, p)


# -- helpers ---------------------------------------------------------------

def _mask(u, m: int) -> int:
    return sum(1 << (j - m - 1) for j in u)


def _same(a, car: Carrier):
    if not isinstance(a, np.ndarray) or a.shape != (car.dim,):
        raise ParamMismatch("element does not live in this carrier")


def _items(a: np.ndarray):
    for i in np.flatnonzero(a):
        yield int(i), int(a[i])


def _coo(rows, cols, vals, shape, p) -> sp.csr_matrix:
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals) % p
    else:
        r = c = v = np.zeros(0, dtype=np.int64)
    M = sp.coo_matrix((v.astype(np.int64), (r, c)), shape=shape).tocsr()
    return _mod(M, p)


def _mod(M, p) -> sp.csr_matrix:
    M = sp.csr_matrix(M, dtype=np.int64)
    M.sum_duplicates()
    M.data %= p
    M.eliminate_zeros()
    return M


def signed(c: int, p: int) -> int:
    """Symmetric representative in (-p/2, p/2]."""
    c %= p
    return c - p if c > p // 2 else c


def render_combination(terms, p: int) -> str:
    """Render [(coeff, body)] as ``body - 2*body``; body '1' absorbs the coefficient."""
    out = []
    for c, body in terms:
        s = signed(c, p)
        if s == 0:
            continue
        mag = abs(s)
        if body == "1":
            text = str(mag)
        else:
            text = body if mag == 1 else f"{mag}*{body}"
        out.append(("-" if s < 0 else "+", text))
    if not out:
        return "0"
    first = ("-" if out[0][0] == "-" else "") + out[0][1]
    return first + "".join(f" {sgn} {txt}" for sgn, txt in out[1:])


def parse_combination(text: str):
    """Inverse of :func:`render_combination`: yields (coeff, body)."""
    text = text.strip()
    if text == "0":
        return
    tokens = re.split(r"\s+([+-])\s+", text)
    signs = ["+"] + tokens[1::2]
    bodies = tokens[0::2]
    for sgn, body in zip(signs, bodies):
        if body.startswith("-"):
            sgn = "-" if sgn == "+" else "+"
            body = body[1:]
        mt = re.fullmatch(r"(\d+)\*(.+)", body)
        if mt:
            c, body = int(mt.group(1)), mt.group(2)
        elif body.isdigit():
            c, body = int(body), "1"
        else:
            c = 1
        yield (-c if sgn == "-" else c), body
