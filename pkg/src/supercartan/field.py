"""Exact arithmetic in GF(p) and GF(p^k).

Elements of GF(p^k) are stored as coefficient tuples in the power basis of a
fixed monic irreducible modulus.  Besides the scalar :class:`FieldElement`
type, :class:`FieldCtx` carries the vectorized kernels used by the linear
algebra layer: arrays over GF(p^k) are numpy ``int64`` arrays whose leading
axis has length ``k`` (one GF(p) slice per power-basis coordinate).
"""

from __future__ import annotations

import re
from functools import cached_property

import numpy as np


class FieldError(ValueError):
    pass


class NonPrime(FieldError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- dense polynomials over GF(p), coefficient lists low-to-high -------------

def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, f, p):
    a = _trim([c % p for c in a])
    df = len(f) - 1
    inv_lead = pow(f[-1], -1, p)
    while len(a) - 1 >= df:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        _trim(a)
    return a


def _pmulmod(a, b, f, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _ppowmod(a, e, f, p):
    result, base = [1], _pmod(list(a), f, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _trim([c % p for c in a]), _trim([c % p for c in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def is_irreducible(f: list[int], p: int) -> bool:
    """Rabin's test; for degree <= 3 absence of roots is used instead."""
    k = len(f) - 1
    if k == 1:
        return True
    if k <= 3:
        return all(sum(c * pow(x, i, p) for i, c in enumerate(f)) % p for x in range(p))
    x = [0, 1]
    if _ppowmod(x, p ** k, f, p) != _pmod(x, f, p):
        return False
    for q in _prime_factors(k):
        h = _ppowmod(x, p ** (k // q), f, p)
        h = h + [0] * max(0, 2 - len(h))
        h[1] = (h[1] - 1) % p
        if len(_pgcd(f, h, p)) != 1:
            return False
    return True


def lex_least_irreducible(p: int, k: int) -> tuple[int, ...]:
    """First monic irreducible of degree k, ordering candidates by the
    integer sum c_i p^i of their non-leading coefficients."""
    if k == 1:
        return (0, 1)
    for code in range(p ** k):
        coeffs = [(code // p ** i) % p for i in range(k)] + [1]
        if coeffs[0] and is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError("unreachable: irreducibles exist in every degree")


class FieldCtx:
    """GF(p^k) with a fixed modulus.  Immutable; equality is structural."""

    def __init__(self, p: int, k: int = 1, modulus: tuple[int, ...] | None = None):
        if not is_prime(p) or p <= 3:
            raise NonPrime(f"p={p} must be a prime > 3")
        if k < 1:
            raise FieldError("extension degree must be >= 1")
        self.p = p
        self.k = k
        if modulus is None:
            modulus = lex_least_irreducible(p, k)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree k")
        if k > 1 and not is_irreducible(list(modulus), p):
            raise FieldError(f"modulus {modulus} is reducible over GF({p})")
        self.modulus = modulus

    @property
    def order(self) -> int:
        return self.p ** self.k

    def __eq__(self, other):
        return isinstance(other, FieldCtx) and (self.p, self.k, self.modulus) == (
            other.p, other.k, other.modulus)

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    # -- scalars -----------------------------------------------------------

    def __call__(self, value) -> FieldElement:
        if isinstance(value, FieldElement):
            if value.ctx == self:
                return value
            if value.ctx.p == self.p and all(c == 0 for c in value.coeffs[1:]):
                return embed(value, self)
            raise FieldError(f"cannot coerce {value!r} into {self}")
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, (int, np.integer)):
            return FieldElement(self, (int(value) % self.p,) + (0,) * (self.k - 1))
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) != self.k:
            raise FieldError("coefficient vector has wrong length")
        return FieldElement(self, coeffs)

    @property
    def zero(self) -> FieldElement:
        return self(0)

    @property
    def one(self) -> FieldElement:
        return self(1)

    @property
    def gen(self) -> FieldElement:
        """The class of x modulo the modulus (equals 0 when k = 1)."""
        if self.k == 1:
            return self(0)
        return self((0, 1) + (0,) * (self.k - 2))

    def elements(self):
        for code in range(self.order):
            yield self([(code // self.p ** i) % self.p for i in range(self.k)])

    def random(self, rng: np.random.Generator) -> FieldElement:
        return self(rng.integers(0, self.p, size=self.k))

    def parse(self, text: str) -> FieldElement:
        """Inverse of :meth:`FieldElement.render`: ``"1+4*g+2*g^2"``."""
        text = text.replace(" ", "")
        if not text:
            raise FieldError("empty field literal")
        coeffs = [0] * self.k
        for sign, term in re.findall(r"([+-]?)([^+-]+)", text):
            m = re.fullmatch(r"(\d+)?(?:\*?g(?:\^(\d+))?)?", term)
            if not m or (m.group(1) is None and "g" not in term):
                raise FieldError(f"bad field literal {text!r}")
            c = int(m.group(1)) if m.group(1) is not None else 1
            e = 0 if "g" not in term else int(m.group(2) or 1)
            if e >= self.k:
                raise FieldError(f"power g^{e} out of range for {self}")
            coeffs[e] += -c if sign == "-" else c
        return self(coeffs)

    # -- vectorized kernels on arrays with leading axis k -------------------

    @cached_property
    def _reduction(self) -> np.ndarray:
        """R[:, e] = power-basis coordinates of x^e for e < 2k-1."""
        k, p = self.k, self.p
        R = np.zeros((k, 2 * k - 1), dtype=np.int64)
        cur = [1] + [0] * (k - 1)
        for e in range(2 * k - 1):
            R[:, e] = cur
            # multiply cur by x
            top = cur[-1]
            cur = [0] + cur[:-1]
            for i in range(k):
                cur[i] = (cur[i] - top * self.modulus[i]) % p
        return R

    def mult_matrix(self, c: FieldElement) -> np.ndarray:
        """k x k matrix of multiplication by c in the power basis."""
        k = self.k
        M = np.zeros((k, k), dtype=np.int64)
        for j in range(k):
            basis = [0] * k
            basis[j] = 1
            M[:, j] = (c * self(basis)).coeffs
        return M

    def scale(self, c: FieldElement, arr: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return arr * c.coeffs[0] % self.p
        return np.tensordot(self.mult_matrix(c), arr, axes=1) % self.p

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Product of matrices over GF(p^k); A is (k, r, s), B is (k, s, n)."""
        p, k = self.p, self.k
        if k == 1:
            return (_mm(A[0], B[0], p) % p)[None]
        conv = [None] * (2 * k - 1)
        for a in range(k):
            if not A[a].any():
                continue
            for b in range(k):
                if not B[b].any():
                    continue
                prod = _mm(A[a], B[b], p)
                conv[a + b] = prod if conv[a + b] is None else conv[a + b] + prod
        out = np.zeros((k, A.shape[1], B.shape[2]), dtype=np.int64)
        R = self._reduction
        for e, P in enumerate(conv):
            if P is None:
                continue
            P %= p
            for i in range(k):
                if R[i, e]:
                    out[i] += R[i, e] * P
        return out % p

    def outer_sub(self, rows: np.ndarray, col: np.ndarray, pivot_row: np.ndarray) -> np.ndarray:
        """rows - col (x) pivot_row, with col (k, r) and pivot_row (k, n)."""
        return (rows - self.matmul(col[:, :, None], pivot_row[:, None, :])) % self.p

    def element_at(self, arr: np.ndarray, idx) -> FieldElement:
        return FieldElement(self, tuple(int(v) for v in arr[(slice(None),) + tuple(np.atleast_1d(idx))]))


def _mm(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # float64 BLAS is exact while every partial sum stays below 2**53
    if a.shape[1] * (p - 1) ** 2 < 2 ** 52:
        return np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
    return a @ b


class FieldElement:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs: tuple[int, ...]):
        self.ctx = ctx
        self.coeffs = coeffs

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.ctx is self.ctx or other.ctx == self.ctx:
                return other
            return self.ctx(other)
        return self.ctx(other)

    def __add__(self, other):
        o = self._coerce(other)
        p = self.ctx.p
        return FieldElement(self.ctx, tuple((a + b) % p for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.ctx.p
        return FieldElement(self.ctx, tuple(-a % p for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        ctx = self.ctx
        if ctx.k == 1:
            return FieldElement(ctx, (self.coeffs[0] * o.coeffs[0] % ctx.p,))
        prod = _pmulmod(list(self.coeffs), list(o.coeffs), list(ctx.modulus), ctx.p)
        return FieldElement(ctx, tuple(prod + [0] * (ctx.k - len(prod))))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * inv(self._coerce(other))

    def __rtruediv__(self, other):
        return self._coerce(other) * inv(self)

    def __pow__(self, e: int):
        if e < 0:
            return inv(self) ** (-e)
        result, base = self.ctx.one, self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ctx(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.ctx.p == other.ctx.p and self.coeffs == self._coerce(other).coeffs

    def __hash__(self):
        if all(c == 0 for c in self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def is_prime_field(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def __int__(self):
        if not self.is_prime_field():
            raise FieldError(f"{self} is not in the prime field")
        return self.coeffs[0]

    def render(self) -> str:
        terms = []
        for e, c in enumerate(self.coeffs):
            if not c:
                continue
            if e == 0:
                terms.append(str(c))
            else:
                g = "g" if e == 1 else f"g^{e}"
                terms.append(g if c == 1 else f"{c}*{g}")
        return "+".join(terms) if terms else "0"

    def __repr__(self):
        return self.render()

    __str__ = render


def make_field(p: int, k: int = 1) -> FieldCtx:
    return FieldCtx(p, k)


def inv(a: FieldElement, ctx: FieldCtx | None = None) -> FieldElement:
    ctx = ctx or a.ctx
    if not a:
        raise DivisionByZero("inverse of zero")
    if ctx.k == 1:
        return FieldElement(ctx, (pow(a.coeffs[0], -1, ctx.p),))
    # a^(q-2) = a^-1 in GF(q)
    return a ** (ctx.order - 2)


def embed(a: FieldElement, ctx: FieldCtx) -> FieldElement:
    """Image of a prime-field element in ctx."""
    if a.ctx.p != ctx.p:
        raise FieldError("characteristic mismatch")
    if not a.is_prime_field():
        raise FieldError("only prime-field elements embed canonically")
    return FieldElement(ctx, (a.coeffs[0],) + (0,) * (ctx.k - 1))
