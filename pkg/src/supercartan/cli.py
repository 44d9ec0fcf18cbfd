"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 invalid parameters.
"""
import argparse
import json
import sys

from . import __version__
from .algebra import SCHEMA_VERSION, AlgebraError, check_axioms, from_json, to_json, weight_decomposition
from .carrier import CarrierError
from .classical import KINDS, BadShape, build_classical
from .families import FAMILIES, FamilySpec, build_family, null_iso, top_degree_formula
from .field import FieldCtx, FieldError
from .generation import MAX_SAMPLES, build_generators, classical_generators, verify_theorem

VERBS = ("build", "axioms", "grading", "weights", "null-iso", "gen", "classical-gen", "theorem-suite")

# the instances whose generator counts the theorem suite checks by default
CANONICAL_SUITE = (
    ("W", 2, 1, (1, 1), None),
    ("S", 2, 2, (1, 1), None),
    ("H", 2, 2, (1, 1), None),
    ("K", 3, 2, (1, 1, 1), None),
    ("SHO", 3, 3, (1, 1, 1), None),
    ("SKO", 3, 4, (1, 1, 1), 3),
    ("W", 1, 1, (1,), None),
    ("HO", 3, 3, (1, 1, 1), None),
    ("KO", 3, 4, (1, 1, 1), None),
    ("SKO", 3, 4, (1, 1, 1), 1),
)


class UsageError(ValueError):
    pass


def canonical_specs(p: int = 5) -> list:
    return [FamilySpec(f, m, n, t, p, lam) for f, m, n, t, lam in CANONICAL_SUITE]


def _parse_t(text, m):
    if text is None:
        return (1,) * m
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--t expects a comma list of integers, got {text!r}")


def _parse_k(text):
    if text is None or text == "auto":
        return None
    try:
        k = int(text)
    except ValueError:
        raise UsageError(f"--k expects an integer or 'auto', got {text!r}")
    if k < 1:
        raise UsageError("--k must be positive")
    return k


def _default_n(family, m):
    if family in ("HO", "SHO"):
        return m
    if family in ("KO", "SKO"):
        return m + 1
    return None


def family_spec(args) -> FamilySpec:
    if args.m is None:
        raise UsageError("--m is required")
    n = args.n if args.n is not None else _default_n(args.family, args.m)
    if n is None:
        raise UsageError(f"--n is required for {args.family}")
    lam = None
    if args.lam is not None:
        lam = int(FieldCtx(args.p).parse(args.lam))
    return FamilySpec(args.family, args.m, n, _parse_t(args.t, args.m), args.p, lam)


def load_algebra(args):
    """(algebra, description) from --input, --family or --kind."""
    if args.input:
        with open(args.input) as fh:
            A = from_json(fh.read())
        return A, {"input": args.input}
    if args.family:
        spec = family_spec(args)
        return build_family(spec), spec.to_dict()
    if args.kind:
        if args.m is None:
            raise UsageError("--m is required")
        k = _parse_k(args.k) or 1
        A = build_classical(args.kind, args.m, args.n, FieldCtx(args.p, k))
        return A, {"kind": args.kind, "p": args.p, "k": k, "m": args.m, "n": A.meta["n"]}
    raise UsageError("one of --family, --kind or --input is required")


def _table(rows, header) -> str:
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    out = [line, "-" * len(line)]
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(out)


def _grading_rows(A):
    rows = []
    for z in sorted(A.degrees()):
        rows.append([z, len(A.component(z, 0)), len(A.component(z, 1))])
    return rows


def _fmt_weight(w):
    return "(" + ",".join(str(x) for x in w) + ")"


# -- verbs -------------------------------------------------------------------------

def cmd_build(args):
    A, desc = load_algebra(args)
    print(f"dim {A.dim}, degrees {A.bottom_degree}..{A.top_degree}, cartan rank {len(A.cartan)}")
    print(_table(_grading_rows(A), ["degree", "even", "odd"]))
    return to_json(A), True


def cmd_axioms(args):
    A, desc = load_algebra(args)
    rep = check_axioms(A, samples=args.samples, seed=args.seed)
    mode = "exhaustive" if rep.exhaustive else f"{rep.triples_checked} sampled triples"
    print(_table([[k, getattr(rep, k)] for k in ("skew", "jacobi", "grading", "cartan")],
                 ["check", "holds"]))
    print(f"dim {A.dim}, {mode}, {len(rep.violations)} violations reported")
    for v in rep.violations:
        print("  ", v)
    out = {"algebra": desc, "dim": A.dim, "report": rep.to_dict()}
    return out, rep.passed


def cmd_grading(args):
    A, desc = load_algebra(args)
    out = {"algebra": desc, "dim": A.dim,
           "degrees": {str(z): {"even": e, "odd": o} for z, e, o in _grading_rows(A)},
           "top_degree": A.top_degree}
    print(_table(_grading_rows(A), ["degree", "even", "odd"]))
    ok = True
    if args.family:
        s = top_degree_formula(family_spec(args))
        out["s_formula"] = s
        ok = s == A.top_degree
        print(f"top degree {A.top_degree}, predicted {s}" + ("" if ok else "  MISMATCH"))
    return out, ok


def cmd_weights(args):
    A, desc = load_algebra(args)
    if args.degree is not None:
        degrees = [args.degree]
    elif A.meta.get("family") in FAMILIES:
        degrees = sorted({-1, 0, A.top_degree})
    else:
        degrees = sorted(A.degrees())
    out = {"algebra": desc, "cartan": [A.labels[c] for c in A.cartan], "degrees": {}}
    print("cartan:", ", ".join(out["cartan"]))
    for z in degrees:
        ws = weight_decomposition(A, z)
        rows = []
        for (w, q), S in sorted(ws.spaces.items()):
            if args.odd and q != 1:
                continue
            rows.append([_fmt_weight(w), "odd" if q else "even", S.dim,
                         " ; ".join(A.render(v) for v in S.basis())])
        out["degrees"][str(z)] = [{"weight": list(map(int, w)), "parity": q, "dim": S.dim}
                                  for (w, q), S in sorted(ws.spaces.items())
                                  if q == 1 or not args.odd]
        print(f"\ndegree {z}")
        print(_table(rows, ["weight", "parity", "dim", "basis"]))
    return out, True


def cmd_null_iso(args):
    if not args.family:
        raise UsageError("null-iso needs --family")
    A, desc = load_algebra(args)
    iso = null_iso(A)
    rows = [[A.labels[i], iso.target.root.render(v)] for i, v in zip(iso.source_index, iso.images)]
    print(_table(rows, ["null element", "image"]))
    print(f"target {iso.target.meta.get('kind')} dim {iso.target.dim}, "
          f"{iso.pairs_checked} bracket pairs checked")
    out = {"algebra": desc, "target": iso.target.meta.get("kind"), "target_dim": iso.target.dim,
           "pairs_checked": iso.pairs_checked, "images": [r[1] for r in rows], "notes": iso.notes}
    return out, True


def _print_report(rep):
    print(f"exceptional case: {rep.exceptional}; {len(rep.generators)} generator(s); k = {rep.k}")
    for i, g in enumerate(rep.generators, 1):
        print(f"  g{i} = {g if len(g) < 400 else g[:400] + ' ...'}")
    print("closure trace:", rep.closure_trace)
    print(f"closure dim {rep.final_dim} of {rep.target_dim}: {rep.verdict}")
    for note in rep.notes:
        print("  note:", note)


def cmd_gen(args):
    if not args.family:
        raise UsageError("gen needs --family")
    A, desc = load_algebra(args)
    rep = build_generators(A, seed=args.seed, k=_parse_k(args.k), samples=args.samples)
    _print_report(rep)
    return rep.to_dict(), rep.ok


def cmd_classical_gen(args):
    if not args.kind:
        raise UsageError("classical-gen needs --kind")
    if args.m is None:
        raise UsageError("--m is required")
    A = build_classical(args.kind, args.m, args.n, FieldCtx(args.p))
    rep = classical_generators(A, seed=args.seed, k=_parse_k(args.k), samples=args.samples)
    _print_report(rep)
    return rep.to_dict(), rep.ok


def cmd_theorem_suite(args):
    if args.specs:
        with open(args.specs) as fh:
            specs = json.load(fh)
    else:
        specs = canonical_specs(args.p)
    res = verify_theorem(specs, seed=args.seed, k=_parse_k(args.k), samples=args.samples)
    rows = []
    for it in res["items"]:
        rep = it.get("report", {})
        s = it["spec"]
        name = s if isinstance(s, str) else json.dumps(s, sort_keys=True)
        rows.append([name, rep.get("exceptional", "-"), len(rep.get("generators", [])),
                     rep.get("final_dim", "-"), rep.get("target_dim", "-"), it["verdict"]])
    print(_table(rows, ["spec", "exceptional", "gens", "closure", "dim", "verdict"]))
    return res, res["passed"]


COMMANDS = {"build": cmd_build, "axioms": cmd_axioms, "grading": cmd_grading,
            "weights": cmd_weights, "null-iso": cmd_null_iso, "gen": cmd_gen,
            "classical-gen": cmd_classical_gen, "theorem-suite": cmd_theorem_suite}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="supercartan", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version",
                    version=f"supercartan {__version__} (schema {SCHEMA_VERSION})")
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("--family", choices=FAMILIES)
    ap.add_argument("--kind", choices=KINDS)
    ap.add_argument("--input", help="algebra JSON written by 'build --out'")
    ap.add_argument("--specs", help="JSON list of family specs for theorem-suite")
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--k", default="auto", help="extension degree or 'auto'")
    ap.add_argument("--m", type=int)
    ap.add_argument("--n", type=int)
    ap.add_argument("--t", help="comma list, default all ones")
    ap.add_argument("--lambda", dest="lam", help="field literal, SKO only")
    ap.add_argument("--degree", type=int, help="weights: one degree only")
    ap.add_argument("--odd", action="store_true", help="weights: odd spaces only")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    return ap


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.family and args.kind:
        print("error: --family and --kind are exclusive", file=sys.stderr)
        return 2
    if args.samples is None:
        args.samples = 10 ** 5 if args.verb == "axioms" else MAX_SAMPLES
    try:
        out, ok = COMMANDS[args.verb](args)
    except (UsageError, BadShape, FieldError, CarrierError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AlgebraError as exc:
        print(f"verification failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    out = dict(out)
    out.setdefault("seed", args.seed)
    out.setdefault("k", _parse_k(args.k) or "auto")
    out.setdefault("version", __version__)
    out.setdefault("schema", SCHEMA_VERSION)
    text = json.dumps(out, sort_keys=True, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if ok else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
