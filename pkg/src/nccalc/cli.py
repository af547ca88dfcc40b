"""Command-line entry points for the calculus pipelines.

Exit codes: 0 success, 1 nonzero residual (check-* commands), 2 usage
error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import exprio
from .cyclic import CyclicSeries, pair, project_cyclic
from .geometry import (
    InternalInvariantError,
    LieSpaceContext,
    PoissonStructure,
    SeriesMatrix,
    de_rham,
    gauge_transform,
    kks_structure,
    schouten,
    symplectic_structure,
    two_form_matrix,
)
from .hamiltonian import (
    MomentFailure,
    casimir_search,
    moment_residual,
    omega_from_moment,
    poisson_from_moment,
    poisson_residual,
    solve_moment,
    weinstein_split,
)
from .nc import NCSeries, bch, lie_bracket
from .quasi import dybe_residual, fusion_sigma, fusion_structure
from .taut import (
    TAutElem,
    derived_associator,
    f_from_associator,
    f_property_residual,
    ham_test,
    solve_group_law_intertwiner,
    transitivity_solve,
)

Q = Fraction


class UsageError(ValueError):
    pass


def _context(args) -> LieSpaceContext:
    return LieSpaceContext(args.vars, args.max_degree)


def _structure(ctx, name: str) -> PoissonStructure:
    if name == "kks":
        return kks_structure(ctx)
    if name == "symp":
        return symplectic_structure(ctx)
    raise UsageError("unknown structure %r (use kks or symp)" % name)


def _parse(ctx, text: str):
    return exprio.parse(text, ctx.alphabet, ctx.max_weight)


def _emit(args, obj, text_render=None):
    if args.format == "doc":
        if isinstance(obj, SeriesMatrix):
            print(exprio.dumps(exprio.matrix_doc(obj)))
        else:
            print(exprio.dumps(exprio.series_doc(obj)))
    else:
        if text_render is not None:
            print(text_render(obj))
        elif isinstance(obj, SeriesMatrix):
            for row in obj.entries:
                print("[ " + " | ".join(exprio.nc_text(e) for e in row) + " ]")
        elif isinstance(obj, CyclicSeries):
            print(exprio.cyclic_text(obj))
        else:
            print(exprio.nc_text(obj))


def _report_residual(res) -> int:
    if res.is_zero():
        print("residual: 0")
        return 0
    print("residual: nonzero")
    for w, comp in res.weight_split().items():
        if not comp.is_zero():
            print("  weight %d: %s" % (w, comp))
    return 1


def cmd_bch(args):
    ctx = _context(args)
    a = exprio.parse_nc(args.a, ctx.alphabet, ctx.max_weight)
    b = exprio.parse_nc(args.b, ctx.alphabet, ctx.max_weight)
    _emit(args, bch(a, b), text_render=exprio.lie_text if args.format == "text" else None)
    return 0


def cmd_d(args):
    ctx = _context(args)
    v = _parse(ctx, args.expr)
    if isinstance(v, CyclicSeries):
        _emit(args, de_rham(ctx, v))
    else:
        from .geometry import d_series

        _emit(args, d_series(ctx, v))
    return 0


def cmd_schouten(args):
    ctx = _context(args)
    a = exprio.parse_cyclic(args.a, ctx.alphabet, ctx.max_weight)
    b = _parse(ctx, args.b)
    _emit(args, schouten(ctx, a, b))
    return 0


def cmd_check_poisson(args):
    ctx = _context(args)
    P = _structure(ctx, args.pi)
    return _report_residual(poisson_residual(ctx, P))


def cmd_gauge(args):
    ctx = _context(args)
    P = _structure(ctx, args.pi)
    om = exprio.parse_cyclic(args.omega, ctx.alphabet, ctx.max_weight)
    if not de_rham(ctx, om).is_zero():
        print("error: the 2-form is not closed", file=sys.stderr)
        return 1
    _emit(args, gauge_transform(P.matrix, two_form_matrix(ctx, om)))
    return 0


def cmd_moment_solve(args):
    ctx = _context(args)
    P = _structure(ctx, args.pi)
    try:
        mu = solve_moment(ctx, P)
    except MomentFailure as e:
        print("no moment map: %s" % e)
        return 1
    _emit(args, mu, text_render=exprio.lie_text if args.format == "text" else None)
    return 0


def cmd_omega_from_moment(args):
    ctx = _context(args)
    mt = exprio.parse_nc(args.mu_tilde, ctx.alphabet, ctx.max_weight)
    _emit(args, omega_from_moment(ctx, mt))
    return 0


def cmd_solve_f(args):
    ctx = LieSpaceContext(2, args.max_degree)
    f = solve_group_law_intertwiner(ctx)
    u = f.tder_log()
    if args.format == "doc":
        doc = {"kind": "tder", "components": [exprio.series_doc(c) for c in u.components]}
        print(exprio.dumps(doc))
    else:
        for i, c in enumerate(u.components):
            print("component %d: %s" % (i + 1, exprio.lie_text(c)))
    return 0


def cmd_f_from_assoc(args):
    ctx = LieSpaceContext(2, args.max_degree)
    assoc_alpha = exprio.alphabet_from_doc([["a", 0, 1], ["b", 0, 1]])
    phi = exprio.parse_nc(args.phi, assoc_alpha, ctx.max_weight)
    f = f_from_associator(ctx, phi)
    res = f_property_residual(ctx, f)
    print("group-law residual: %s" % ("0" if res.is_zero() else exprio.nc_text(res)))
    return 0


def cmd_phi_f(args):
    ctx = LieSpaceContext(2, args.max_degree)
    ctx3 = LieSpaceContext(3, args.max_degree)
    f = solve_group_law_intertwiner(ctx)
    phi = derived_associator(f, ctx3)
    total = ctx3.gen_series(0) + ctx3.gen_series(1) + ctx3.gen_series(2)
    fixes = phi.apply(total) == total
    ham, _ = ham_test(phi)
    print("fixes x1+x2+x3: %s" % fixes)
    print("hamiltonian: %s" % ham)
    return 0 if fixes and ham else 1


def cmd_check_dybe(args):
    res = dybe_residual(args.max_degree)
    return _report_residual(res)


def cmd_fusion_sigma(args):
    ctx = LieSpaceContext(2, args.max_degree)
    _emit(args, fusion_sigma(ctx))
    return 0


def cmd_weinstein_split(args):
    ctx = _context(args)
    P = _structure(ctx, args.pi)
    auto, split = weinstein_split(ctx, P)
    print("coordinate images:")
    for i, im in enumerate(auto.x_images):
        print("  x%d -> %s" % (i + 1, exprio.nc_text(im)))
    print("split structure:")
    _emit(args, split.cyclic)
    return 0


def cmd_casimirs(args):
    ctx = _context(args)
    P = _structure(ctx, args.pi)
    out = casimir_search(ctx, P, args.max_degree)
    for w, lst in out.items():
        print("weight %d: %s" % (w, "; ".join(exprio.cyclic_text(c) for c in lst) or "none"))
    return 0


def cmd_specialize(args):
    import numpy as np

    from . import specialize as sp

    ctx = _context(args)
    mctx = sp.preset(args.algebra)
    rng = np.random.default_rng(args.seed)
    point = sp.random_point(mctx, ctx.n, rng, scale=0.5)
    v = _parse(ctx, args.expr)
    if isinstance(v, CyclicSeries):
        k = v.max_letter_count(ctx.dx_letters())
        if k:
            tangents = [sp.random_point(mctx, ctx.n, rng, scale=0.5) for _ in range(k)]
            val = sp.eval_form(ctx, mctx, v, point, tangents)
        else:
            val = sp.eval_function(ctx, mctx, v, point)
        print("value: %.12g" % val)
    else:
        m = sp.eval_lie(ctx, mctx, v, point)
        print("value (matrix):")
        for row in m:
            print("  " + " ".join("%.9g" % x for x in row))
    return 0


def cmd_probe_faith(args):
    from . import specialize as sp

    ctx = _context(args)
    v = _parse(ctx, args.expr)
    if isinstance(v, Q):
        print("error: constants are not probed", file=sys.stderr)
        return 2
    if v.is_zero():
        print("error: object is symbolically zero", file=sys.stderr)
        return 2
    n = sp.faithfulness_probe(ctx, v, n_max=args.max_rank, seed=args.seed)
    if n is None:
        print("exhausted: no nonzero value found up to rank %d" % args.max_rank)
        return 1
    print("nonzero on the special linear algebra of rank %d" % n)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-degree", type=int, default=6, help="truncation order")
    common.add_argument("--vars", type=int, default=2, help="number of coordinates")
    common.add_argument("--format", choices=("text", "doc"), default="text")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="nccalc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *pos, **opts):
        s = sub.add_parser(name, parents=[common])
        for a in pos:
            s.add_argument(a)
        for k, v in opts.items():
            s.add_argument("--" + k, **v)
        s.set_defaults(fn=fn)
        return s

    add("bch", cmd_bch, "a", "b")
    add("d", cmd_d, "expr")
    add("schouten", cmd_schouten, "a", "b")
    add("check-poisson", cmd_check_poisson, pi={"default": "kks"})
    add("gauge", cmd_gauge, "omega", pi={"default": "kks"})
    add("moment-solve", cmd_moment_solve, pi={"default": "kks"})
    add("omega-from-moment", cmd_omega_from_moment, "mu_tilde")
    add("solve-F", cmd_solve_f)
    add("f-from-assoc", cmd_f_from_assoc, "phi")
    add("phi-F", cmd_phi_f)
    add("check-dybe", cmd_check_dybe)
    add("fusion-sigma", cmd_fusion_sigma)
    add("weinstein-split", cmd_weinstein_split, pi={"default": "symp"})
    add("casimirs", cmd_casimirs, pi={"default": "kks"})
    add("specialize", cmd_specialize, "expr", algebra={"default": "sl2"})
    add("probe-faith", cmd_probe_faith, "expr", **{"max-rank": {"type": int, "default": 4}})
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (UsageError, exprio.ParseError, ValueError, KeyError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except InternalInvariantError as e:
        print("internal invariant violation: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
