"""Command-line front end: ``autogrp <check|brp|pipeline|construct|gallery>``.

Exit codes: 0 when a constant is found (or a decision is YES), 2 for a
mathematical failure with witness, 1 for usage, file or resource errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys

from . import fsa
from .errors import ContractError, ResourceError
from .reports import CheckReport, jsonable

log = logging.getLogger("autogrp")

EXIT_OK, EXIT_ERROR, EXIT_FAILURE = 0, 1, 2


def _emit(args, doc, table: str):
    text = json.dumps(jsonable(doc), indent=2, ensure_ascii=False) if args.format == "json" else table
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_report(args, rep: CheckReport) -> int:
    _emit(args, rep.to_json(), rep.table())
    return rep.exit_code


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ContractError("missing required option(s): "
                            + ", ".join("--" + n.replace("_", "-") for n in missing))


# ----------------------------------------------------------------- check

def cmd_check(args) -> int:
    from .files import load_structure
    from . import structures as st
    if args.kind == "equivalence":
        _need(args, "left", "right")
        s1, s2 = load_structure(args.left), load_structure(args.right)
        return _emit_report(args, st.check_equivalence(s1, s2, args.mode or "asynchronous",
                                                       args.max_len))
    _need(args, "structure")
    s = load_structure(args.structure)
    if args.kind == "ft":
        rep = st.ft_constant(s, args.max_len, args.mode or "synchronous")
    elif args.kind == "async_ft":
        rep = st.async_ft_constant(s, args.max_len)
    elif args.kind == "departure":
        radius = args.radius if args.radius is not None else 2
        rep = st.departure_estimate(s, list(range(radius + 1)), args.max_len)
    elif args.kind == "kuniq":
        rep = st.length_diff_constant(s, args.max_len, corollary_radius=args.radius)
    elif args.kind == "section":
        rep = st.check_rational_section(s, args.radius if args.radius is not None else 4)
    else:
        raise ContractError(f"unknown check {args.kind!r}")
    return _emit_report(args, rep)


# ------------------------------------------------------------------- brp

def cmd_brp(args) -> int:
    from .files import load_hom, load_structure
    from . import endo
    _need(args, "hom")
    if args.variant == "decide-free":
        phi = load_hom(args.hom)
        d = endo.free_sync_brp_decide(phi)
        doc = d.to_json(phi.source)
        table = ("YES " if d.holds else "NO ") + d.reason
        if d.holds:
            table += f"\n  conjugator: {doc['conjugator']}\n  permutation: {doc['permutation']}"
        _emit(args, doc, table)
        return EXIT_OK if d.holds else EXIT_FAILURE
    if args.variant == "gromov":
        phi = load_hom(args.hom)
        return _emit_report(args, endo.gromov_brp_check(phi, args.radius or 4))
    _need(args, "structure")
    s1 = load_structure(args.structure)
    phi = load_hom(args.hom, source=s1.group)
    s2 = load_structure(args.target_structure, phi.target) if args.target_structure else s1
    if not s2.group.same_elements(phi.target):
        raise ContractError("the target structure must live on the homomorphism's target")
    if args.variant == "brp":
        rep = endo.check_brp(phi, s1, s2, args.max_len)
    elif args.variant == "sync":
        rep = endo.check_sync_brp(phi, s1, s2, args.max_len)
    elif args.variant == "ft":
        rep = endo.check_ft_brp(phi, s1, s2, args.p, args.max_len)
    else:
        raise ContractError(f"unknown BRP variant {args.variant!r}")
    return _emit_report(args, rep)


# -------------------------------------------------------------- pipeline

def _pipeline_doc(res: dict, group) -> tuple:
    q = res["quasiconvexity"]
    reports = q if isinstance(q, list) else [q]
    doc = {"subgroup": res["subgroup"], "ball": res["ball_text"],
           "quasiconvexity": q.to_json() if not isinstance(q, list) else [r.to_json() for r in q]}
    for key in ("induced", "left_factor", "biautomatic"):
        if key in res:
            doc[key] = res[key].to_json()
    lines = [f"{res['subgroup']}: {len(res['ball'])} elements in the ball"]
    shown = res["ball_text"][:20]
    lines.append("  ball: " + ", ".join(shown) + (" ..." if len(res["ball"]) > 20 else ""))
    for r in reports:
        lines.append(r.table())
    ok = res.get("ok", all(r.ok for r in reports))
    return doc, "\n".join(lines), ok


def cmd_pipeline(args) -> int:
    from .files import load_hom, load_structure
    from . import subgroups as sg
    _need(args, "structure")
    s = load_structure(args.structure)
    if args.kind == "kernel":
        _need(args, "hom")
        res = sg.kernel_pipeline(load_hom(args.hom, source=s.group), s, args.max_len)
    elif args.kind == "equalizer":
        _need(args, "hom", "hom2")
        phi, psi = load_hom(args.hom), load_hom(args.hom2)
        if not phi.target.same_elements(s.group):
            raise ContractError("the structure must live on the maps' target")
        res = sg.equalizer_pipeline(phi, psi, s, args.max_len, args.radius)
    elif args.kind == "fixed":
        _need(args, "hom")
        radius = args.radius if args.radius is not None else args.max_len
        res = sg.fixed_pipeline(load_hom(args.hom, source=s.group, target=s.group), s, radius)
    elif args.kind == "centralizer":
        _need(args, "elements")
        elems = [s.group.evaluate(s.group.parse(w)) for w in args.elements]
        res = sg.centralizer(s, elems, args.max_len, args.radius)
    else:
        raise ContractError(f"unknown pipeline {args.kind!r}")
    doc, table, ok = _pipeline_doc(res, s.group)
    _emit(args, doc, table)
    return EXIT_OK if ok else EXIT_FAILURE


# ------------------------------------------------------------- construct

def _group_doc(path) -> dict:
    from .files import load_doc
    return load_doc(path)["group"]


def cmd_construct(args) -> int:
    from .files import load_hom, load_structure
    from . import constructions as cons
    from .endo import some_word
    if args.kind == "product":
        _need(args, "left", "right")
        s1, s2 = load_structure(args.left), load_structure(args.right)
        p = cons.product_structure(s1, s2)
        doc = {"name": p.name,
               "group": {"kind": "product", "marking": "convolution",
                         "left": _group_doc(args.left), "right": _group_doc(args.right)},
               "language": fsa.to_json(p.dfa)}
        _emit(args, doc, f"{p.describe()}: {p.dfa.n} states over {len(p.alphabet)} symbols")
        return EXIT_OK
    _need(args, "structure")
    s = load_structure(args.structure)
    if args.kind == "rewrite":
        _need(args, "subgroup")
        from .subgroups import free_subgroup
        from .groups import FreeGroup
        if not isinstance(s.group, FreeGroup):
            raise ContractError("construct rewrite takes --subgroup generators in a free group")
        r = cons.rewrite_build(s, free_subgroup(s.group, args.subgroup), args.max_len)
        doc = r.to_json()
        doc["sandwich"] = cons.sandwich_constants(r, args.radius or args.max_len).to_json()
        doc["mixed_ft"] = cons.mixed_ft_check(r, args.max_len).to_json()
        _emit(args, doc, f"k = {r.k}, |B| = {len(r.B)}, {len(r.states)} transducer states")
        return EXIT_OK
    _need(args, "hom")
    if args.kind == "induced":
        phi = load_hom(args.hom, source=s.group)
        ind, rep = cons.induced_structure(s, phi, args.max_len)
        from .files import load_doc
        hdoc = load_doc(args.hom)
        tdoc = dict(hdoc.get("target", hdoc["source"]))
        gens = {str(a): fsa.fmt_word(some_word(phi.target, ind.group.gens[a])) for a in s.alphabet}
        tdoc["marking_words"] = {"generators": gens,
                                 "inverses": [[a, b] for a, b in s.alphabet.inverses.items()
                                              if s.alphabet.index[a] < s.alphabet.index[b]]}
        doc = {"structure": {"name": ind.name, "group": tdoc, "language": fsa.to_json(s.dfa)},
               "report": rep.to_json()}
        _emit(args, doc, rep.table())
        return rep.exit_code
    if args.kind == "tilde":
        phi = load_hom(args.hom, target=s.group)
        t = cons.tilde_structure(s, phi, args.max_len)
        lines = [f"L̃ over {len(t.structure.alphabet)} symbols; C = "
                 + ", ".join(f"{fsa.fmt_symbol(c)}={fsa.fmt_word(w)}" for c, w in t.C.items())]
        lines += [r.table() for r in t.checks.values()]
        _emit(args, t.to_json(), "\n".join(lines))
        return EXIT_OK if t.ok else EXIT_FAILURE
    raise ContractError(f"unknown construction {args.kind!r}")


# --------------------------------------------------------------- gallery

def cmd_gallery(args) -> int:
    from . import gallery
    echo = None
    if args.format == "table" and not args.output:
        echo = lambda row: print(row.line() + (f"  {row.error}" if row.error else ""), flush=True)
    try:
        rows = gallery.run(args.only, echo=echo)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    doc = [{"id": r.id, "group": r.group, "title": r.title, "pass": r.ok,
            "seconds": round(r.seconds, 2), "detail": r.detail, "error": r.error or None}
           for r in rows]
    if echo is None:
        _emit(args, doc, "\n".join(r.line() for r in rows))
    else:
        print(f"{sum(r.ok for r in rows)}/{len(rows)} rows pass")
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAILURE


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-len", type=int, default=8, help="word-length bound")
    common.add_argument("--radius", type=int, default=None, help="ball radius bound")
    common.add_argument("--format", choices=("json", "table"), default=None,
                        help="report format (json, or table for gallery)")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="autogrp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="measure a structure's constants")
    c.add_argument("kind", choices=("ft", "async_ft", "departure", "kuniq", "section",
                                    "equivalence"))
    c.add_argument("--structure")
    c.add_argument("--left")
    c.add_argument("--right")
    c.add_argument("--mode", choices=("synchronous", "asynchronous", "biautomatic"))
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("brp", parents=[common], help="bounded reduction checks")
    b.add_argument("variant", choices=("brp", "sync", "ft", "decide-free", "gromov"))
    b.add_argument("--hom")
    b.add_argument("--structure")
    b.add_argument("--target-structure")
    b.add_argument("--p", type=int, default=0, help="fellow-travelling slack for FT-BRP")
    b.set_defaults(func=cmd_brp)

    q = sub.add_parser("pipeline", parents=[common], help="subgroup pipelines")
    q.add_argument("kind", choices=("kernel", "equalizer", "fixed", "centralizer"))
    q.add_argument("--hom")
    q.add_argument("--hom2")
    q.add_argument("--structure")
    q.add_argument("--elements", nargs="+")
    q.set_defaults(func=cmd_pipeline)

    k = sub.add_parser("construct", parents=[common], help="structure constructions")
    k.add_argument("kind", choices=("product", "rewrite", "induced", "tilde"))
    k.add_argument("--left")
    k.add_argument("--right")
    k.add_argument("--structure")
    k.add_argument("--hom")
    k.add_argument("--subgroup", nargs="+", help="free-group subgroup generators")
    k.set_defaults(func=cmd_construct)

    g = sub.add_parser("gallery", parents=[common], help="run the bundled example gallery")
    g.add_argument("--only", nargs="+", help="criterion ids (c1..c12) or group names")
    g.set_defaults(func=cmd_gallery)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.format is None:
        args.format = "table" if args.command == "gallery" else "json"
    random.seed(args.seed)
    if args.max_len is not None and args.max_len < 1:
        print("error: --max-len must be positive", file=sys.stderr)
        return EXIT_ERROR
    if args.radius is not None and args.radius < 0:
        print("error: --radius must be non-negative", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (ContractError, ResourceError, KeyError, OSError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
