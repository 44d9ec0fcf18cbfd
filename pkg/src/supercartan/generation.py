"""Small generating sets for the classical and Cartan-type superalgebras.

Each recipe produces a diagonal part d (a Cartan element, possibly shifted by
the identity-like element I) whose ad-eigenvalues separate a chosen set of odd
weights, plus a sum x of odd weight vectors.  Generation is then certified by
computing the closure of the generators over GF(p^k).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from math import comb

import numpy as np

from . import __version__
from .algebra import (AlgebraError, GradedSuperalgebra, SCHEMA_VERSION, _lift, generation_closure,
                      weight_decomposition)
from .classical import BadShape, MatrixRoot, _identity, _w_element
from .families import FamilySpec, build_family, is_exceptional, null_iso, top_degree_formula
from .field import FieldCtx
from .linalg import Subspace, intersection

MAX_SAMPLES = 1000


class OmegaSearchFailed(AlgebraError):
    pass


class NoValidPair(AlgebraError):
    pass


# -- separating elements ------------------------------------------------------------

def auto_degree(p: int, nfuncs: int) -> int:
    """Least k with p^k > 4·C(nfuncs, 2)."""
    bound = 4 * comb(nfuncs, 2)
    k = 1
    while p ** k <= bound:
        k += 1
    return k


def omega_search(functions, field: FieldCtx, seed: int = 0, basis=None, offset=None,
                 samples: int = MAX_SAMPLES) -> np.ndarray:
    """Find t over ``field`` so that d = offset + Σ t_j·basis_j separates the
    functions: (f_i - f_j)(d) != 0 for all i != j.

    Functions are value tuples on a fixed basis of a d-dimensional space (prime
    field entries); ``basis`` rows and ``offset`` are vectors in that space.
    Returns t as a (k, r) array of field coordinates."""
    p, k = field.p, field.k
    F = np.asarray(functions, dtype=np.int64).reshape(len(functions), -1) % p
    d = F.shape[1]
    B = np.eye(d, dtype=np.int64) if basis is None else np.asarray(basis, dtype=np.int64).reshape(-1, d)
    G = F @ B.T % p
    o = np.zeros(len(F), dtype=np.int64) if offset is None else F @ np.asarray(offset) % p
    nf, r = G.shape
    for i in range(nf):
        same = np.flatnonzero((G[i + 1:] == G[i]).all(axis=1) & (o[i + 1:] == o[i]))
        if same.size:
            j = i + 1 + int(same[0])
            raise OmegaSearchFailed(f"functions {F[i].tolist()} and {F[j].tolist()} cannot be "
                                    "separated on the allowed subspace")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        T = rng.integers(0, p, size=(k, r))
        vals = (G @ T.T) % p
        vals[:, 0] = (vals[:, 0] + o) % p
        if len(np.unique(vals, axis=0)) == nf:
            return T
    raise OmegaSearchFailed(f"no separating element in {samples} samples over GF({p}^{k})")


# -- helpers ---------------------------------------------------------------------------

def _cartan_coords(A: GradedSuperalgebra, vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec) % A.p
    rest = vec.copy()
    rest[A.cartan] = 0
    if rest.any():
        raise AlgebraError("element does not lie in the Cartan span")
    return vec[A.cartan]


def _cartan_vector(A: GradedSuperalgebra, coords: np.ndarray) -> np.ndarray:
    """(k, dim) algebra vector from (k, d) Cartan coordinates."""
    coords = np.atleast_2d(coords)
    out = np.zeros((coords.shape[0], A.dim), dtype=np.int64)
    out[:, A.cartan] = coords
    return out % A.p


def odd_derived_cartan(A: GradedSuperalgebra) -> np.ndarray:
    """Basis (Cartan coordinates) of Cartan ∩ [X_0odd, X_0odd]."""
    p = A.p
    J = A.component(0, 1)
    S = Subspace(A.field, A.dim)
    for i in J:
        M = A.ad(i).tocsc()[:, J].toarray() % p
        if M.any():
            S.add(M.T)
    H = Subspace(A.field, A.dim, np.array([A.unit(c) for c in A.cartan]).reshape(-1, A.dim))
    I = intersection(H, S).basis()
    return I[:, A.cartan] % p


def _weight_list(w) -> list:
    return [int(x) for x in w]


@dataclass
class GenerationReport:
    spec: dict
    exceptional: bool
    generators: list
    weights: dict
    closure_trace: list
    final_dim: int
    target_dim: int
    seed: int
    k: int
    notes: list = dc_field(default_factory=list)
    vectors: list = dc_field(default_factory=list, repr=False)

    @property
    def verdict(self) -> str:
        return "success" if self.final_dim == self.target_dim else "failure"

    @property
    def ok(self) -> bool:
        return self.verdict == "success"

    def to_dict(self) -> dict:
        return {"spec": self.spec, "exceptional": self.exceptional, "generators": self.generators,
                "weights": self.weights, "closure_trace": self.closure_trace,
                "final_dim": self.final_dim, "target_dim": self.target_dim,
                "verdict": self.verdict, "seed": self.seed, "k": self.k,
                "notes": self.notes, "version": __version__, "schema": SCHEMA_VERSION}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


@dataclass
class _Recipe:
    """Generator 1 is d + body with d = offset + h, h from ``hbasis``;
    generator 2 (optional) is ``extra``."""
    phi: list
    body: np.ndarray
    hbasis: np.ndarray | None
    offset: np.ndarray | None
    extra: np.ndarray | None
    notes: list


def _run(A: GradedSuperalgebra, recipe: _Recipe, seed: int, k, samples: int):
    """Ω search (with one escalation of an automatic k) and closure."""
    p = A.p
    phi = sorted(set(tuple(w) for w in recipe.phi))
    auto = k in (None, "auto")
    k = auto_degree(p, len(phi)) if auto else int(k)
    tries = [k, k + 1] if auto else [k]
    last = None
    for kk in tries:
        ctx = FieldCtx(p, kk)
        try:
            T = omega_search(phi, ctx, seed, recipe.hbasis, recipe.offset, samples)
        except OmegaSearchFailed as exc:
            last = exc
            if "cannot be separated" in str(exc):
                raise
            continue
        B = np.eye(len(A.cartan), dtype=np.int64) if recipe.hbasis is None else recipe.hbasis
        hc = T @ B % p  # (k, d)
        if recipe.offset is not None:
            hc[0] = (hc[0] + recipe.offset) % p
        d = _cartan_vector(A, hc)
        g1 = (d + _lift(recipe.body % p, ctx)) % p
        gens = [g1]
        if recipe.extra is not None:
            gens.append(_lift(recipe.extra % p, ctx))
        clo = generation_closure(A, gens, ctx)
        return gens, clo, kk
    raise last


def _finish(A, recipe, gens, clo, k, seed, spec, exceptional, weights) -> GenerationReport:
    return GenerationReport(spec=spec, exceptional=exceptional,
                            generators=[A.render(g if g.shape[0] > 1 else g[0]) for g in gens],
                            weights=weights, closure_trace=list(clo.trace), final_dim=clo.dim,
                            target_dim=A.dim, seed=seed, k=k, notes=list(recipe.notes),
                            vectors=gens)


# -- classical algebras ------------------------------------------------------------------

def classical_exceptional(kind: str, m: int, n: int, p: int) -> bool:
    if kind == "gl":
        return (m - n) % p == 0
    if kind in ("Ptilde", "Ptilde+I"):
        return m % p != 0
    return False


def _gl_vector(A: GradedSuperalgebra, glvec: np.ndarray) -> np.ndarray:
    return A.from_root(glvec)[0]


def classical_recipe(A: GradedSuperalgebra) -> tuple:
    kind, m, n, p = A.meta["kind"], A.meta["m"], A.meta["n"], A.p
    ws = weight_decomposition(A, 0)
    phi = ws.odd_weights()
    x = (A.parity == 1).astype(np.int64)
    root = A.root if isinstance(A.root, MatrixRoot) else MatrixRoot(m, n, p)
    exc = classical_exceptional(kind, m, n, p)
    restricted, offset, extra = False, None, None
    if kind in ("gl", "osp+I") and not exc:
        restricted, offset = True, _cartan_coords(A, _gl_vector(A, _identity(root)))
    elif kind == "gl":
        # h inside the derived ideal keeps <h+x> proper, so the extra element is needed
        restricted, extra = True, _gl_vector(A, root.e(1, 1))
    elif kind == "Ptilde" and exc:
        restricted, extra = True, _gl_vector(A, _w_element(root, m))
    elif kind == "Ptilde+I":
        offset = _cartan_coords(A, _gl_vector(A, _identity(root)))
        if exc:
            restricted = True
            extra = _gl_vector(A, _w_element(root, m))
    hbasis = odd_derived_cartan(A) if restricted else None
    notes = []
    if restricted:
        notes.append("h restricted to Cartan ∩ [L_1, L_1]")
    return _Recipe(phi, x, hbasis, offset, extra, notes), exc, ws


def classical_generators(A: GradedSuperalgebra, seed: int = 0, k=None,
                         samples: int = MAX_SAMPLES) -> GenerationReport:
    """Generators for a classical algebra built by build_classical, verified by closure."""
    recipe, exc, ws = classical_recipe(A)
    try:
        gens, clo, kk = _run(A, recipe, seed, k, samples)
    except OmegaSearchFailed as err:
        # the restriction is only a preference when a second generator is present
        if recipe.extra is None or recipe.hbasis is None or recipe.offset is not None:
            raise
        recipe.hbasis = None
        recipe.notes = [f"restricted h cannot separate the odd weights ({err}); h taken in the full Cartan"]
        gens, clo, kk = _run(A, recipe, seed, k, samples)
    spec = {"kind": A.meta["kind"], "m": A.meta["m"], "n": A.meta["n"], "p": A.p}
    weights = {"odd": [_weight_list(w) for w in sorted(set(recipe.phi))]}
    return _finish(A, recipe, gens, clo, kk, seed, spec, exc, weights)


# -- Cartan-type families ------------------------------------------------------------------

@dataclass
class WeightChoice:
    alpha_minus1: tuple
    alpha_top: tuple
    top_degree: int
    x_minus1: np.ndarray
    x_top: np.ndarray
    delta0_odd: list


def top_degree_used(A: GradedSuperalgebra) -> int:
    fam, m = A.meta["family"], A.meta["m"]
    s = A.top_degree
    return s - 1 if fam in ("HO", "KO") and m % 2 == 1 else s


def select_weights(A: GradedSuperalgebra, top_parity: int | None = 1,
                   avoid_null: bool = True) -> WeightChoice:
    """Lexicographically least odd weights α_{-1}, α_top distinct from each other
    and from every odd weight of the null.

    ``top_parity=None`` also admits even weight vectors in the top degree;
    ``avoid_null=False`` admits collisions with the null's odd weights, taking
    the pair with the fewest of them."""
    top = top_degree_used(A)
    w0 = weight_decomposition(A, 0)
    wm = weight_decomposition(A, -1)
    wt = weight_decomposition(A, top)
    d0 = set(w0.odd_weights())
    pars = (1,) if top_parity == 1 else (1, 0)
    tops = sorted((w, q) for (w, q) in wt.spaces if q in pars)
    cands = []
    for a in wm.odd_weights():
        for b, q in tops:
            if b == a:
                continue
            hits = (a in d0) + (b in d0)
            if hits and avoid_null:
                continue
            cands.append((hits, a, b, q))
    if not cands:
        raise NoValidPair(f"no odd weights in degrees -1 and {top} avoid each other and the null")
    hits, a, b, q = min(cands)
    xm = wm.space(a, 1).basis()[0]
    xt = wt.space(b, q).basis()[0]
    return WeightChoice(a, b, top, xm, xt, sorted(d0))


def family_recipe(A: GradedSuperalgebra, choice: WeightChoice | None = None):
    fam, m, n, p = A.meta["family"], A.meta["m"], A.meta["n"], A.p
    iso = null_iso(A)
    T = iso.target
    choice = choice or select_weights(A)
    x0 = iso.pull((T.parity == 1).astype(np.int64))
    gl = MatrixRoot(T.meta["m"], T.meta["n"], p)

    def pull_gl(v):
        return iso.pull(T.from_root(v)[0])

    exc = is_exceptional(FamilySpec(fam, m, n, tuple(A.meta["t"]), p, A.meta.get("lambda")))
    phi = [choice.alpha_minus1, choice.alpha_top] + list(choice.delta0_odd)
    xm, xt = choice.x_minus1, choice.x_top
    restricted, offset, extra = False, None, None
    notes = []
    ident = None
    if fam in ("W", "K", "KO"):
        ident = pull_gl(_identity(gl))
    if not exc:
        body = (xm + x0 + xt) % p
        if fam in ("W", "K"):
            restricted, offset = True, _cartan_coords(A, ident)
        elif fam == "KO":
            offset = _cartan_coords(A, ident)
    else:
        body = x0
        w = pull_gl(gl.e(1, 1)) if fam == "W" else pull_gl(_w_element(gl, m))
        extra = (xm + w + xt) % p
        if fam == "KO":
            restricted, offset = True, _cartan_coords(A, ident)
    hbasis = odd_derived_cartan(A) if restricted else None
    if restricted:
        notes.append("h restricted to Cartan ∩ [X_0odd, X_0odd]")
    if choice.top_degree != A.top_degree:
        notes.append(f"top weight taken in degree {choice.top_degree} = s-1")
    return _Recipe(phi, body, hbasis, offset, extra, notes), exc


_RELAXATIONS = (
    ({}, None),
    ({"top_parity": None}, "even top weight vectors allowed"),
    ({"top_parity": None, "avoid_null": False}, "collisions with null odd weights allowed"),
)


def choose_weights(A: GradedSuperalgebra) -> tuple:
    """select_weights with recorded fallbacks; returns (choice, notes)."""
    notes = []
    for relax, label in _RELAXATIONS:
        try:
            choice = select_weights(A, **relax)
        except NoValidPair as exc:
            notes.append(f"{label or 'strict'}: {exc}")
            continue
        if label:
            notes.append(f"fallback: {label}")
        return choice, notes
    raise NoValidPair("; ".join(notes))


def build_generators(A: GradedSuperalgebra, seed: int = 0, k=None,
                     samples: int = MAX_SAMPLES) -> GenerationReport:
    """Generators of a family instance assembled from the null's recipe and two
    outer weight vectors, verified by closure."""
    choice, found = choose_weights(A)
    recipe, exc = family_recipe(A, choice)
    recipe.notes[:0] = found
    gens, clo, kk = _run(A, recipe, seed, k, samples)
    spec = {key: A.meta[key] for key in ("family", "p", "m", "n", "t") if key in A.meta}
    if A.meta.get("lambda") is not None:
        spec["lambda"] = A.meta["lambda"]
    fs = FamilySpec(spec["family"], spec["m"], spec["n"], tuple(spec["t"]), spec["p"], spec.get("lambda"))
    weights = {"alpha_minus1": _weight_list(choice.alpha_minus1),
               "alpha_top": _weight_list(choice.alpha_top),
               "top_degree": choice.top_degree,
               "s_formula": top_degree_formula(fs),
               "s_computed": A.top_degree}
    return _finish(A, recipe, gens, clo, kk, seed, spec, exc, weights)


def verify_theorem(specs, seed: int = 0, k=None, samples: int = MAX_SAMPLES) -> dict:
    """Run build_generators over a list of FamilySpec values (or dicts)."""
    items = []
    for s in specs:
        try:
            if isinstance(s, dict):
                s = FamilySpec(s["family"], s["m"], s.get("n"), tuple(s["t"]), s["p"], s.get("lambda"))
            A = build_family(s)
            rep = build_generators(A, seed, k, samples)
            items.append({"spec": s.to_dict(), "verdict": rep.verdict, "report": rep.to_dict()})
        except (BadShape, AlgebraError, ValueError, TypeError, KeyError) as exc:
            name = s.to_dict() if isinstance(s, FamilySpec) else s
            items.append({"spec": name, "verdict": "error", "error": f"{type(exc).__name__}: {exc}"})
    passed = all(it["verdict"] == "success" for it in items)
    return {"items": items, "passed": passed, "seed": seed, "version": __version__}
