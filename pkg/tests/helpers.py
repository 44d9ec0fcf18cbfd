"""Glue between package vectors and the dict representation of oracles.py."""
import numpy as np

from supercartan.families import WRoot


def mono_key(M):
    return (tuple(M.alpha), tuple(M.u))


def o_to_dict(car, vec):
    return {mono_key(car.monomials[i]): int(vec[i]) % car.p for i in np.flatnonzero(vec % car.p)}


def o_from_dict(car, d):
    v = np.zeros(car.dim, dtype=np.int64)
    for k, c in d.items():
        v[car.index[_mono(car, k)]] = c % car.p
    return v


def w_to_dict(root: WRoot, vec):
    car, N = root.car, root.N
    out = {}
    for i in np.flatnonzero(vec % root.p):
        g, r = divmod(int(i), N)
        out[(mono_key(car.monomials[g]), r + 1)] = int(vec[i]) % root.p
    return out


def w_from_dict(root: WRoot, d):
    v = np.zeros(root.dim, dtype=np.int64)
    for (k, r), c in d.items():
        v[root.index(root.car.index[_mono(root.car, k)], r)] = c % root.p
    return v


def _mono(car, key):
    from supercartan.carrier import Monomial
    return Monomial(tuple(key[0]), tuple(key[1]))


def to_dict(A, vec):
    """Root vector of an algebra element as an oracle dict."""
    root = A.root
    rv = A.to_root(np.asarray(vec) % A.p)
    if isinstance(root, WRoot):
        return w_to_dict(root, rv)
    return o_to_dict(root.car, rv)


def from_dict(A, d):
    root = A.root
    rv = w_from_dict(root, d) if isinstance(root, WRoot) else o_from_dict(root.car, d)
    return A.from_root(rv)[0]
