"""Command-line front end.  Every command prints one JSON document on stdout.

Exit codes: 0 success, 1 input or validation error (diagnostics on stderr),
2 resource guard (term or cell limit) exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds
from .act import Tree, evaluate, tree_from_json, tree_metrics, tree_to_json, validate_tree
from .errors import InputError, ResourceLimitError
from .extract import DEFAULT_TERM_LIMIT, dnf_stats, leaf_dnf
from .families import (
    Bounded, Unbounded, closure_delta, closure_delta_eps, parse_schedule, t_m_formula, validate_schedule,
)
from .poly import format_rational, parse_rational
from .problems import (
    check_bundle, circle_fiber_example, crossing_number_example, distinctness_tree, parity_problem,
    segment_example,
)
from .semialg import Dnf, dnf_from_json, dnf_to_json, eval_formula
from .topology import (
    DEFAULT_CELL_LIMIT, Box, betti_numbers, build_complex, component_count, occupancy_grid,
)
from .transforms import (
    EpsDelta, FiberSpec, eps_delta_tree, fiber_product_tree, intersect_tree, t_ell_tree, union_tree,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _rat(text: str) -> Fraction:
    return parse_rational(text)


def _point(text: str) -> list[Fraction]:
    return [parse_rational(s) for s in text.split(",") if s.strip()] if text.strip() else []


def _read_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not JSON: {exc}") from exc


def _load_tree(path: str) -> Tree:
    t = tree_from_json(_read_json(path))
    t.require_valid()
    return t


def _load_dnf(path: str) -> Dnf:
    return dnf_from_json(_read_json(path))


def _mode(args):
    return Bounded(args.bounded) if getattr(args, "bounded", None) is not None else Unbounded()


def _schedule_json(sched) -> list[dict]:
    return [{"eps": format_rational(lv.eps), "delta": format_rational(lv.delta)} for lv in sched.levels]


def _box_json(box: Box) -> dict:
    return {"lo": [format_rational(v) for v in box.lo], "hi": [format_rational(v) for v in box.hi],
            "resolution": box.resolution}


# -- commands -----------------------------------------------------------------------

def cmd_validate(args):
    t = tree_from_json(_read_json(args.tree))
    diags = validate_tree(t)
    return {"valid": not diags, "diagnostics": diags}, bool(diags)


def cmd_eval(args):
    data = _read_json(args.file)
    x = _point(args.point)
    if "union" in data:
        return {"accepted": eval_formula(dnf_from_json(data), x), "kind": "formula"}
    t = tree_from_json(data)
    t.require_valid()
    e = evaluate(t, x)
    return {"accepted": e.accepted, "leaf": e.leaf, "path_length": e.path_length, "kind": "tree"}


def cmd_extract(args):
    return dnf_to_json(leaf_dnf(_load_tree(args.tree), args.term_limit))


def cmd_stats(args):
    t = _load_tree(args.tree)
    m = tree_metrics(t)
    st = dnf_stats(leaf_dnf(t, args.term_limit))
    k = m.height
    return {
        "height": k, "leaves": m.leaf_count, "yes_leaves": m.yes_leaf_count,
        "max_multiplications": m.mult_count_max,
        "s": st.s, "d": st.d, "disjuncts": st.disjunct_count, "max_conditions": st.max_conds_per_disjunct,
        "degree_within_2^k": st.d <= 2**k,
        "disjuncts_within_3^k": st.disjunct_count <= 3**k,
        "polynomials_within_k3^k": st.s <= k * 3**k,
    }


def cmd_transform(args):
    kind = args.kind
    if kind in ("union", "intersect"):
        a, b = _load_tree(args.tree), _load_tree(args.other)
        t = union_tree(a, b) if kind == "union" else intersect_tree(a, b)
    elif kind == "eps-delta":
        t = eps_delta_tree(_load_tree(args.tree), EpsDelta(args.eps, args.delta), args.h_source)
    elif kind == "t-ell":
        t = t_ell_tree(_load_tree(args.tree), parse_schedule(args.schedule))
    else:
        tm = _load_tree(args.tree)
        t = fiber_product_tree(tm, FiberSpec(tm.arity, args.r, args.p))
    return tree_to_json(t)


def cmd_families(args):
    if args.kind == "schedule-check":
        sched = parse_schedule(args.schedule)
        diags = validate_schedule(sched, None if args.ratio == 0 else args.ratio)
        return {"valid": not diags, "diagnostics": diags, "levels": _schedule_json(sched)}, bool(diags)
    f = _load_dnf(args.formula)
    if args.kind == "delta":
        out = closure_delta(f, args.delta, _mode(args))
    elif args.kind == "delta-eps":
        out = closure_delta_eps(f, args.delta, args.eps, _mode(args))
    else:
        out = t_m_formula(f, parse_schedule(args.schedule), _mode(args))
    return dnf_to_json(out)


def _grid(args):
    f = _load_dnf(args.formula)
    box = Box.parse(args.box, args.grid)
    return occupancy_grid(f, box, corner_mode=args.corner, cell_limit=args.cell_limit)


def cmd_betti(args):
    g = _grid(args)
    cx = build_complex(g, check=args.check)
    top = cx.dim if args.max_dim is None else args.max_dim
    b = betti_numbers(cx, top)
    return {"betti": list(b), "cells": cx.cell_counts(), "resolution": args.grid,
            "euler_characteristic": cx.euler_characteristic()}


def cmd_components(args):
    g = _grid(args)
    return {"components": component_count(g), "occupied": g.count(), "resolution": args.grid}


def _bound_params(args):
    return bounds.BoundParams(args.c1, args.c2)


def _rational_record(kind: str, value: Fraction, **inputs) -> dict:
    rec = {"bound": kind, "value": format_rational(value), "approx": float(value), "label": "parametric"}
    rec["inputs"] = {k: (format_rational(v) if isinstance(v, Fraction) else v) for k, v in inputs.items()}
    return rec


def cmd_bound(args):
    kind = args.kind
    if kind == "yao":
        v = bounds.yao_lower(args.b, args.n, _bound_params(args))
        return _rational_record(kind, v, b=args.b, n=args.n, c1=args.c1, c2=args.c2)
    if kind == "main":
        v = bounds.main_lower(args.b, args.m, args.n, _bound_params(args))
        return _rational_record(kind, v, b=args.b, m=args.m, n=args.n, c1=args.c1, c2=args.c2)
    if kind == "proj":
        v = bounds.proj_lower(args.b, args.m, args.n, _bound_params(args))
        return _rational_record(kind, v, b=args.b, m=args.m, n=args.n, c1=args.c1, c2=args.c2)
    if kind == "upper":
        first, second = bounds.total_betti_upper(args.s, args.d, args.n, args.m, args.C)
        return {"bound": kind, "first": format_rational(first), "second": format_rational(second),
                "label": "parametric"}
    if kind == "invert":
        return {"bound": kind, "k": bounds.invert_height_bound(args.b, args.n, args.C)}
    try:
        table = {p: [int(v) for v in row.split(",") if v.strip()] for p, row in enumerate(args.W.split(";"))}
    except ValueError as exc:
        raise InputError(f"bad Betti table {args.W!r}") from exc
    res = bounds.projection_inequality_check(table, args.target, args.m)
    return {"bound": kind, **res.to_json()}


def _bundle_manifest(bundle, out_dir: str | None, seed: int | None) -> dict:
    man = {
        "name": bundle.name,
        "declared_height": bundle.declared_height,
        "height": tree_metrics(bundle.tree).height,
        "schedule": _schedule_json(bundle.suggested_schedule),
        "box": _box_json(bundle.suggested_box),
        "mode": "bounded" if isinstance(bundle.mode, Bounded) else "unbounded",
        "notes": bundle.notes,
        "expected": {k: list(v) if isinstance(v, tuple) else v for k, v in bundle.expected.items()},
    }
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        tp, fp = d / f"{bundle.name}.tree.json", d / f"{bundle.name}.dnf.json"
        tp.write_text(json.dumps(tree_to_json(bundle.tree), indent=1, sort_keys=True) + "\n")
        fp.write_text(json.dumps(dnf_to_json(bundle.strict_dnf), indent=1, sort_keys=True) + "\n")
        man["tree_file"], man["dnf_file"] = str(tp), str(fp)
    else:
        man["tree"] = tree_to_json(bundle.tree)
        man["dnf"] = dnf_to_json(bundle.strict_dnf)
    if seed is not None:
        chk = check_bundle(bundle, random.Random(seed))
        man["self_check"] = {"valid": chk.valid, "samples": chk.samples, "mismatches": chk.mismatches,
                             "ok": chk.ok}
    return man


def cmd_example(args):
    kind = args.kind
    if kind == "parity":
        return _bundle_manifest(parity_problem(args.n, args.m), args.out_dir, args.seed)
    if kind == "distinctness":
        return _bundle_manifest(distinctness_tree(args.n), args.out_dir, args.seed)
    if kind == "circle-fiber":
        ex = circle_fiber_example()
        man = _bundle_manifest(ex.bundle, args.out_dir, args.seed)
        man["fibers"] = [{"n": s.n, "r": s.r, "p": s.p} for s in ex.fibers]
        man["projection_dnf"] = dnf_to_json(ex.projection_dnf)
        man["boxes"] = {"W0": _box_json(ex.box_w0), "W1": _box_json(ex.box_w1), "image": _box_json(ex.box_image)}
        return man
    curve = segment_example() if args.segment else crossing_number_example()
    return {"name": curve.name, "coefficients": [list(c) for c in curve.coeffs],
            "t_range": [format_rational(curve.t_lo), format_rational(curve.t_hi)],
            "box": _box_json(curve.box), **curve.report()}


# -- parser -------------------------------------------------------------------------------

def _add_grid_args(p):
    p.add_argument("formula")
    p.add_argument("--box", required=True, help='"lo:hi,lo:hi,..." with exact rationals')
    p.add_argument("--grid", type=int, required=True, help="cells per axis")
    p.add_argument("--corner", action="store_true", help="occupy a cell if any corner satisfies the formula")
    p.add_argument("--cell-limit", type=int, default=DEFAULT_CELL_LIMIT)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="acttopo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a tree file")
    p.add_argument("tree")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate a tree or formula at a point")
    p.add_argument("file")
    p.add_argument("--point", required=True)
    p.set_defaults(func=cmd_eval)

    for name, fn in (("extract", cmd_extract), ("stats", cmd_stats)):
        p = sub.add_parser(name)
        p.add_argument("tree")
        p.add_argument("--term-limit", type=int, default=DEFAULT_TERM_LIMIT)
        p.set_defaults(func=fn)

    p = sub.add_parser("transform")
    tsub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for name in ("union", "intersect"):
        q = tsub.add_parser(name)
        q.add_argument("tree")
        q.add_argument("other")
    q = tsub.add_parser("eps-delta")
    q.add_argument("tree")
    q.add_argument("--eps", type=_rat, required=True)
    q.add_argument("--delta", type=_rat, required=True)
    q.add_argument("--h-source")
    q = tsub.add_parser("t-ell")
    q.add_argument("tree")
    q.add_argument("--schedule", required=True, help='"eps0,delta0,eps1,delta1,..."')
    q = tsub.add_parser("fiber")
    q.add_argument("tree")
    q.add_argument("--r", type=int, required=True)
    q.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("families")
    fsub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for name in ("delta", "delta-eps", "t-m"):
        q = fsub.add_parser(name)
        q.add_argument("formula")
        q.add_argument("--bounded", type=_rat, metavar="R2", help="set lies in |x|^2 <= R2; no ball conjunct")
        if name != "t-m":
            q.add_argument("--delta", type=_rat, required=True)
        if name == "delta-eps":
            q.add_argument("--eps", type=_rat, required=True)
        if name == "t-m":
            q.add_argument("--schedule", required=True)
    q = fsub.add_parser("schedule-check")
    q.add_argument("--schedule", required=True)
    q.add_argument("--ratio", type=_rat, default=Fraction(4), help="separation ratio, 0 to skip")
    p.set_defaults(func=cmd_families)

    p = sub.add_parser("betti")
    _add_grid_args(p)
    p.add_argument("--max-dim", type=int)
    p.add_argument("--check", action="store_true", help="verify boundary of boundary is zero")
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("components")
    _add_grid_args(p)
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("bound")
    bsub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for name in ("yao", "main", "proj"):
        q = bsub.add_parser(name)
        q.add_argument("--b", type=int, required=True)
        q.add_argument("--n", type=int, required=True)
        if name != "yao":
            q.add_argument("--m", type=int, required=True)
        q.add_argument("--c1", type=_rat, default=Fraction(1))
        q.add_argument("--c2", type=_rat, default=Fraction(1))
    q = bsub.add_parser("upper")
    for flag in ("--s", "--d", "--n"):
        q.add_argument(flag, type=int, required=True)
    q.add_argument("--m", type=int, default=0)
    q.add_argument("--C", type=_rat, default=Fraction(1))
    q = bsub.add_parser("invert")
    q.add_argument("--b", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--C", type=_rat, default=Fraction(1))
    q = bsub.add_parser("projcheck")
    q.add_argument("--W", required=True, help='rows b_0,b_1,... of W_0;W_1;... e.g. "1,1;1,3"')
    q.add_argument("--target", type=int, required=True, help="b_m of the image")
    q.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("example")
    esub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    q = esub.add_parser("parity")
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--m", type=int, default=3)
    q = esub.add_parser("distinctness")
    q.add_argument("--n", type=int, default=3)
    esub.add_parser("circle-fiber")
    q = esub.add_parser("crossing")
    q.add_argument("--segment", action="store_true", help="degenerate straight segment instead")
    for q in esub.choices.values():
        if q.prog.endswith("crossing"):
            continue
        q.add_argument("--out-dir")
        q.add_argument("--seed", type=int, help="run the sampled tree/formula self-check")
    p.set_defaults(func=cmd_example)
    return ap


# flags whose values may start with "-" (negative rationals)
_VALUE_FLAGS = {"--box", "--point", "--schedule", "--eps", "--delta", "--c1", "--c2", "--C", "--bounded"}


def _glue_values(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_values(argv))
        result = args.func(args)
        failed = False
        if isinstance(result, tuple):
            result, failed = result
        sys.stdout.write(json.dumps(result, sort_keys=True) + "\n")
        if failed:
            for d in result.get("diagnostics", []) or [json.dumps(result, sort_keys=True)]:
                print(d, file=sys.stderr)
            return 1
        return 0
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
