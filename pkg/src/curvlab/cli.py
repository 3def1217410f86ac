"""Command-line interface: ``curvlab {gen,curvature,betti,flow,check}``.

Exit codes: 0 success / predicate true, 1 input error, 2 precondition
failure, 3 non-convergence, 4 predicate false.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .complex import build_complex
from .curvature import curvature_report
from .exact import as_rational, fmt_rational
from .graph_core import (
    MarkovChain,
    ModelError,
    PreconditionError,
    combinatorial_lengths,
    dump_graph,
    parse_graph,
    path_metric,
)
from .homology import basis_to_json, betti1, betti1_markov, harmonic_basis, markov_harmonic_basis

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_NONCONVERGENCE, EXIT_FALSE = 0, 1, 2, 3, 4

log = logging.getLogger("curvlab")


class InputError(Exception):
    pass


def _load(args):
    from .generators import generate

    if args.gen is not None:
        g, lengths = generate(args.gen, seed=args.seed)
    else:
        try:
            with open(args.input, "rb") as fh:
                g, lengths = parse_graph(fh.read())
        except OSError as exc:
            raise InputError(str(exc)) from exc
    if args.metric == "combinatorial":
        lengths = combinatorial_lengths(g)
    elif args.metric:
        lengths = _read_lengths(g, args.metric)
    return g, lengths, path_metric(g, lengths)


def _read_lengths(g, path):
    try:
        with open(path, "rb") as fh:
            doc = json.loads(fh.read())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read metric file: {exc}") from exc
    lengths = combinatorial_lengths(g)
    for rec in doc.get("edges", []):
        try:
            u, v = g.index[rec["u"]], g.index[rec["v"]]
        except KeyError as exc:
            raise InputError(f"unknown vertex in metric file: {exc}") from exc
        e = (min(u, v), max(u, v))
        if e not in lengths:
            raise InputError(f"metric file names a non-edge {rec['u']}~{rec['v']}")
        if "d" in rec:
            lengths[e] = as_rational(rec["d"])
    return lengths


def _emit(args, doc):
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _vertex(g, name) -> int:
    if name not in g.index:
        raise InputError(f"unknown vertex {name!r}")
    return g.index[name]


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    from .generators import generate

    g, lengths = generate(args.spec, seed=args.seed)
    text = dump_graph(g, lengths) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_curvature(args) -> int:
    g, _, metric = _load(args)
    if args.kind == "ollivier":
        rep = curvature_report(g, metric, "ollivier", threads=args.threads)
    elif args.kind == "idle":
        rep = curvature_report(g, metric, "idle", eps=as_rational(args.eps), threads=args.threads)
    else:
        dim = None if args.dim in (None, "inf") else as_rational(args.dim)
        if args.vertex is not None:
            from .bakry_emery import bakry_emery

            x = _vertex(g, args.vertex)
            r = bakry_emery(g, x, dim, tol=args.tol)
            _emit(args, {
                "kind": "bakry-emery",
                "vertex": g.vertices[x],
                "N": "inf" if dim is None else fmt_rational(dim),
                "K": float(f"{r.K:.15g}") if r.K != float("-inf") else "-inf",
                "residual": float(f"{r.residual:.15g}"),
            })
            return EXIT_OK
        rep = curvature_report(g, metric, "bakry-emery", dim=dim, threads=args.threads, tol=args.tol)
    _emit(args, rep.to_json())
    return EXIT_OK


def cmd_betti(args) -> int:
    g, _, metric = _load(args)
    cx = build_complex(g, metric, max_len=args.max_len)
    n0, n1, n2 = cx.sizes
    doc = {"X0": n0, "X1": n1, "X2": n2, "length_bound": cx.length_bound}
    if isinstance(g, MarkovChain):
        doc["betti1"] = betti1(cx)
        doc["betti1_markov"] = betti1_markov(cx, g)
    else:
        doc["betti1"] = betti1(cx)
    if args.basis:
        basis = markov_harmonic_basis(cx, g) if isinstance(g, MarkovChain) else harmonic_basis(cx, g)
        doc["harmonic_basis"] = basis_to_json(cx, basis)
    if args.cells:
        doc["complex"] = cx.to_json()
    _emit(args, doc)
    return EXIT_OK


def cmd_flow(args) -> int:
    from .flow import FlowConfig, constant_curvature_cycle, run_flow, zero_curvature_equivalence

    g, lengths, _ = _load(args)
    cfg = FlowConfig(
        alpha=as_rational(args.alpha),
        tol=args.tol if args.tol is not None else 1e-8,
        max_iter=args.max_iter,
        round_denominator=None if args.exact else 10**12,
    )
    is_cycle = all(len(nb) == 2 for nb in g.nbrs)
    doc: dict = {}
    if is_cycle or args.constant_curvature:
        res = constant_curvature_cycle(g, cfg, seed=args.init_seed, trace=bool(args.trace))
        main = res.primary
        doc["mode"] = "constant-curvature"
        doc["uniqueness_max_difference"] = float(f"{res.max_difference:.15g}")
        doc["second_start"] = {"converged": res.secondary.converged, "iterations": res.secondary.iterations}
    else:
        main = run_flow(g, lengths, cfg, trace=bool(args.trace))
        doc["mode"] = "flow"
    doc.update(main.to_json())
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(main.trace_csv())
    if not main.converged:
        _emit(args, doc)
        return EXIT_NONCONVERGENCE
    if args.check_equivalence:
        eq = zero_curvature_equivalence(g, main, tol=cfg.tol)
        doc["equivalence"] = eq.to_json(g)
    _emit(args, doc)
    return EXIT_OK


def cmd_check(args) -> int:
    from . import rigidity as rg

    g, _, metric = _load(args)
    if args.predicate == "sharp":
        rep = rg.sharpness(g, metric)
        _emit(args, rep.to_json())
        return EXIT_OK if rep.sharp_max else EXIT_FALSE
    if args.predicate == "bone-idle":
        rep = rg.bone_idle(g, metric)
        _emit(args, rep.to_json(g))
        return EXIT_OK if rep.bone_idle else EXIT_FALSE
    if args.predicate == "torus":
        try:
            st = rg.recognize_torus(g, metric)
        except rg.StructureError as exc:
            _emit(args, {"torus": False, "reason": str(exc), "record": exc.record})
            return EXIT_FALSE
        verdict = rg.verify_torus(g, metric, st)
        doc = {"torus": verdict.ok, "structure": st.to_json(g), "failures": verdict.reasons}
        _emit(args, doc)
        return EXIT_OK if verdict.ok else EXIT_FALSE
    if args.predicate == "negative-set":
        if not args.W:
            raise PreconditionError("negative-set needs a non-empty --W")
        W = {_vertex(g, v) for v in args.W.split(",") if v}
        rep = rg.negative_set_bound(g, metric, W)
        _emit(args, {"betti1": rep.betti, "boundary_edges": rep.boundary_edges, "holds": rep.holds})
        return EXIT_OK if rep.holds else EXIT_FALSE
    if args.predicate == "obs-bone-idle":
        v = rg.obs_bone_idle_equivalence(g, metric)
        _emit(args, v.to_json())
        return EXIT_OK if v.agree else EXIT_FALSE
    raise InputError(f"unknown check {args.predicate!r}")  # pragma: no cover


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON result here instead of stdout")
    common.add_argument("--metric", help="edge-length file (JSON edges with 'd') or 'combinatorial'")
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for per-edge sweeps (default: $CURVLAB_THREADS or 1)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomised generators")
    common.add_argument("-v", "--verbose", action="store_true")

    source = argparse.ArgumentParser(add_help=False)
    grp = source.add_mutually_exclusive_group(required=True)
    grp.add_argument("--gen", metavar="FAMILY:PARAMS", help="inline generator spec, e.g. torus:6,6")
    grp.add_argument("--input", "-i", metavar="FILE", help="graph in the JSON interchange format")

    p = argparse.ArgumentParser(prog="curvlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="emit a generated graph as JSON")
    g.add_argument("spec")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("curvature", parents=[common, source], help="per-edge or per-vertex curvature")
    c.add_argument("kind", choices=["ollivier", "idle", "bakry-emery"])
    c.add_argument("--eps", help="idleness parameter (rational)")
    c.add_argument("--dim", default="inf", help="dimension N for Bakry-Emery ('inf' or rational)")
    c.add_argument("--vertex", help="single vertex for Bakry-Emery")
    c.set_defaults(func=cmd_curvature)

    b = sub.add_parser("betti", parents=[common, source], help="2-cell complex and first Betti number")
    b.add_argument("--basis", action="store_true", help="include a harmonic basis")
    b.add_argument("--cells", action="store_true", help="include the full complex")
    b.add_argument("--max-len", type=int, default=None,
                   help="override the computed 2-cell length bound (uncertified)")
    b.set_defaults(func=cmd_betti)

    f = sub.add_parser("flow", parents=[common, source], help="Ollivier Ricci flow")
    f.add_argument("--alpha", default="1/10")
    f.add_argument("--max-iter", type=int, default=10_000)
    f.add_argument("--init-seed", type=int, default=0, help="seed of the second starting metric")
    f.add_argument("--constant-curvature", action="store_true")
    f.add_argument("--check-equivalence", action="store_true")
    f.add_argument("--trace", metavar="CSV", help="write the per-iteration trace")
    f.add_argument("--exact", action="store_true", help="disable per-step rounding of lengths")
    f.set_defaults(func=cmd_flow)

    k = sub.add_parser("check", parents=[common, source], help="rigidity predicates")
    k.add_argument("predicate", choices=["sharp", "bone-idle", "torus", "negative-set", "obs-bone-idle"])
    k.add_argument("--W", help="comma-separated vertex ids for negative-set")
    k.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "curvature" and args.kind == "idle" and args.eps is None:
        parser.error("idle curvature needs --eps")
    if args.tol is None and args.command == "curvature":
        args.tol = 1e-9
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"curvlab: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ModelError, InputError, ValueError, TypeError) as exc:
        print(f"curvlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
