"""Command-line interface.

Exit codes: 0 success, 2 rejected input (error JSON on stderr), 3 the result
could not be certified (unresolved symbol zeros, uncertified tails,
horizon-limited values).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .bases import BasisAxis, parse_axis
from .coeffs import (
    CoefficientTensor,
    TailCertificate,
    TailNotCertified,
    classify_decay,
    expand,
    fit_derivative_bounds,
    hankel_clifford,
    polydisc_eval,
    synthesize,
)
from .kernels import BACKEND
from .solver import (
    OperatorSpec,
    ResolutionInsufficient,
    forward_apply,
    liouville_scan,
    solve,
)
from .solver.exact import DEFAULT_BITS
from .weights import AssociatedFunction, HorizonLimitedWarning, check_conditions, make_weight

EXIT_OK, EXIT_REJECT, EXIT_UNCERTIFIED = 0, 2, 3


class Uncertified(Exception):
    """Raised when a computed artifact carries an uncertified flag."""


@dataclass
class CommandConfig:
    subcommand: str
    argv: list
    options: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _axes(text):
    # split on commas outside parentheses
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    out.append(cur)
    return [parse_axis(a) for a in out if a.strip()]


def _add_weight(p, required=False):
    g = p.add_argument_group("weight sequence")
    g.add_argument("--gevrey", type=str, help="M_p = p!^s")
    g.add_argument("--table", type=str, help="comma-separated M_0, M_1, ...")
    g.add_argument("--factorial-scaled", type=str, dest="factorial_scaled",
                   help="M_p = p!/a^p (diagnostic only)")
    g.add_argument("--weight", type=str, help="weight-sequence JSON file")
    g.add_argument("--horizon", type=int, default=200)
    g.add_argument("--mode", choices=["roumieu", "beurling"], default="roumieu")


def _weight(args, default=True):
    if args.weight:
        from .weights import WeightSequence
        with open(args.weight) as fh:
            return WeightSequence.from_json(fh.read())
    if args.gevrey is not None:
        return make_weight("gevrey", args.horizon, args.mode, s=Fraction(args.gevrey))
    if args.table is not None:
        vals = [x.strip() for x in args.table.split(",")]
        return make_weight("table", None, args.mode, values=vals)
    if args.factorial_scaled is not None:
        return make_weight("factorial_scaled", args.horizon, args.mode, diagnostic=True,
                           a=Fraction(args.factorial_scaled))
    if default:
        return make_weight("gevrey", args.horizon, args.mode, s=1)
    return None


def _load_tensor(path):
    return CoefficientTensor.load(path)


def _expr_namespace():
    ns = {name: getattr(np, name) for name in (
        "exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh",
        "arctan", "abs", "pi", "e", "where", "maximum", "minimum", "ones_like", "zeros_like")}
    ns["np"] = np
    from .bases import eval_hermite, eval_laguerre, eval_sph_harm
    ns.update(laguerre=eval_laguerre, hermite=eval_hermite, sph=eval_sph_harm)
    return ns


def _variable_names(axes):
    names = []
    counts = {"laguerre": 0, "hermite": 0, "sphere": 0}
    for ax in axes:
        if ax.kind == "sphere":
            counts["sphere"] += 1
            k = counts["sphere"]
            suffix = "" if k == 1 else str(k)
            names += [f"theta{suffix}", f"phi{suffix}"]
        else:
            sym = "y" if ax.kind == "laguerre" else "x"
            for _ in range(ax.dim):
                counts[ax.kind] += 1
                names.append(f"{sym}{counts[ax.kind]}")
    return names


def make_expr_function(expr, axes):
    """Compile ``expr`` over the coordinate names of ``axes``.

    Sphere axes provide ``theta, phi``; laguerre axes ``y1, y2, ...``;
    hermite axes ``x1, x2, ...``. Only numpy functions are in scope.
    """
    names = _variable_names(axes)
    code = compile(expr, "<expr>", "eval")
    for n in code.co_names:
        if n not in names and n not in _expr_namespace():
            raise ValueError(f"unknown name {n!r} in expression")
    ns = _expr_namespace()

    def f(*coords):
        local = dict(zip(names, coords))
        return eval(code, {"__builtins__": {}, **ns}, local)
    return f


# ---------------------------------------------------------------------------
# subcommands; each returns (artifact_text, fitted_constants)
# ---------------------------------------------------------------------------


def cmd_check_seq(args):
    W = _weight(args)
    rep = check_conditions(W)
    d = rep.to_dict()
    d["sequence"] = W.to_dict()
    return json.dumps(d, indent=1, sort_keys=True), {"witnesses": d["witnesses"]}


def cmd_assoc(args):
    W = _weight(args)
    af = AssociatedFunction(W, auto_extend=not args.no_extend)
    ts = np.array(_floats(args.t))
    vals, arg, lim = af.evaluate_many(ts * args.h)
    lines = ["t,h,M,argmax,horizon_limited,envelope"]
    for t, v, a, l in zip(ts, vals, arg, lim):
        lines.append(f"{float(t)!r},{args.h!r},{float(v)!r},{int(a)},{bool(l)},{float(np.exp(-v))!r}")
    if lim.any():
        args._uncertified = f"{int(lim.sum())} values are horizon-limited"
    return "\n".join(lines) + "\n", {"horizon": af.source.horizon}


def cmd_expand(args):
    axes = _axes(args.axes)
    trunc = _ints(args.truncation)
    if len(trunc) == 1:
        trunc = trunc * len(axes)
    f = make_expr_function(args.expr, axes)
    order = _ints(args.order) if args.order else None
    if order and len(order) == 1:
        order = order * len(axes)
    c = expand(f, axes, trunc, order)
    return c.to_json(indent=1), {"nnz": c.nnz}


def cmd_synth(args):
    c = _load_tensor(args.coeffs)
    with open(args.points) as fh:
        pts = json.load(fh)
    vals = synthesize(c, [np.asarray(p, float) for p in pts])
    lines = ["point,re,im"]
    for i, v in enumerate(np.atleast_1d(vals)):
        v = complex(v)
        lines.append(f"{i},{v.real!r},{v.imag!r}")
    return "\n".join(lines) + "\n", {}


def cmd_classify(args):
    c = _load_tensor(args.coeffs)
    W = _weight(args)
    fit = classify_decay(c, W, rel_floor=args.rel_floor)
    d = fit.to_dict()
    return json.dumps(d, indent=1, sort_keys=True), d


def _random_tensor(axes, box, nnz, seed):
    rng = random.Random(seed)
    entries = {}
    while len(entries) < nnz:
        idx = tuple(rng.randint(0, b) for b in box)
        entries[idx] = Fraction(rng.randint(-99, 99) or 1, rng.randint(1, 20))
    return CoefficientTensor(axes, box, entries)


def cmd_apply(args):
    L = OperatorSpec.load(args.op)
    if args.coeffs:
        u = _load_tensor(args.coeffs)
    else:
        if not args.box:
            raise ValueError("--random needs --box")
        u = _random_tensor(L.axes, _ints(args.box), args.random, args.seed)
        if args.save_u:
            u.save(args.save_u)
    f = forward_apply(L, u)
    return f.to_json(indent=1), {"nnz": f.nnz}


def _free_policy(text):
    return Fraction(text) if text is not None else 0


def cmd_solve(args):
    L = OperatorSpec.load(args.op)
    f = _load_tensor(args.rhs)
    W = _weight(args, default=False) if args.assess else None
    if args.assess and W is None:
        W = make_weight("gevrey", args.horizon, args.mode, s=1)
    box = _ints(args.box) if args.box else None
    rep = solve(L, f, _free_policy(args.free_value), box, W=W, resolution=args.resolution,
                bits=args.bits)
    d = rep.to_dict(embed_solution=not args.solution_out)
    if args.solution_out and rep.solution is not None:
        rep.solution.save(args.solution_out)
        d["solution_file"] = args.solution_out
    consts = {"divisor_stats": d["divisor_stats"], "fits": d["fits"]}
    return json.dumps(d, indent=1, sort_keys=True), consts


def cmd_liouville(args):
    W = _weight(args)
    rep = liouville_scan(args.c2, args.c3, W, _ints(args.box), _floats(args.eps), d=args.d,
                         n=args.n, m=args.m, convention=args.convention, bits=args.bits)
    if rep.unresolved:
        args._uncertified = f"{len(rep.unresolved)} distances not certified"
    return rep.to_csv(), rep.to_dict()


def cmd_hc(args):
    c = _load_tensor(args.coeffs)
    out = hankel_clifford(c, _ints(args.coords) if args.coords else [], args.axis)
    return out.to_json(indent=1), {}


def cmd_polydisc(args):
    c = _load_tensor(args.coeffs)
    W = _weight(args)
    cert = None
    if args.certify:
        cert = TailCertificate.from_fit(classify_decay(c, W), W)
    result = {}
    if args.point:
        w = [complex(x.replace(" ", "")) for x in args.point.split(",")]
        p = _ints(args.order) if args.order else None
        v = polydisc_eval(c, w, p, cert)
        result["value"] = {"re": v.value.real, "im": v.value.imag}
        result["tail_bound"] = v.tail_bound
        result["certified"] = v.certified
    if args.fit_bounds:
        fit = fit_derivative_bounds(c, W, args.pmax, args.radius, certificate=cert)
        result["derivative_bounds"] = fit.to_dict()
    return json.dumps(result, indent=1, sort_keys=True), result


COMMANDS = {
    "check-seq": cmd_check_seq,
    "assoc": cmd_assoc,
    "expand": cmd_expand,
    "synth": cmd_synth,
    "classify": cmd_classify,
    "apply": cmd_apply,
    "solve": cmd_solve,
    "liouville": cmd_liouville,
    "hc": cmd_hc,
    "polydisc": cmd_polydisc,
}


def build_parser():
    p = argparse.ArgumentParser(prog="ultraspec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"ultraspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", "-o", help="artifact path (default: stdout)")
        sp.add_argument("--manifest", help="run-manifest path (default: <out>.manifest.json)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--bits", type=int, default=DEFAULT_BITS,
                        help="interval precision in bits (env ULTRASPEC_PRECISION)")

    sp = sub.add_parser("check-seq", help="check weight-sequence conditions on a prefix")
    _add_weight(sp)
    common(sp)

    sp = sub.add_parser("assoc", help="evaluate the associated function")
    _add_weight(sp)
    sp.add_argument("--t", required=True, help="comma-separated arguments")
    sp.add_argument("--h", type=float, default=1.0, help="scale: evaluates M(h t)")
    sp.add_argument("--no-extend", action="store_true")
    common(sp)

    sp = sub.add_parser("expand", help="expand an expression in a product basis")
    sp.add_argument("--axes", required=True, help="e.g. 'sphere(3),laguerre(1),hermite(1)'")
    sp.add_argument("--truncation", required=True)
    sp.add_argument("--expr", required=True,
                    help="numpy expression in theta, phi, y1.., x1..")
    sp.add_argument("--order", help="quadrature order(s)")
    common(sp)

    sp = sub.add_parser("synth", help="evaluate a coefficient tensor at points")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--points", required=True, help="JSON list of per-axis point arrays")
    common(sp)

    sp = sub.add_parser("classify", help="fit decay or growth envelopes")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--rel-floor", type=float, default=1e-12, dest="rel_floor")
    _add_weight(sp)
    common(sp)

    sp = sub.add_parser("apply", help="apply a diagonal operator to coefficients")
    sp.add_argument("--op", required=True)
    sp.add_argument("--coeffs")
    sp.add_argument("--random", type=int, default=8, help="random sparse u with this many entries")
    sp.add_argument("--box")
    sp.add_argument("--save-u", dest="save_u")
    common(sp)

    sp = sub.add_parser("solve", help="solve L u = f coefficientwise")
    sp.add_argument("--op", required=True)
    sp.add_argument("--rhs", required=True)
    sp.add_argument("--box")
    sp.add_argument("--free-value", dest="free_value")
    sp.add_argument("--resolution", choices=["exact", "interval"], default="exact")
    sp.add_argument("--assess", action="store_true", help="classify f and u")
    sp.add_argument("--solution-out", dest="solution_out")
    _add_weight(sp)
    common(sp)

    sp = sub.add_parser("liouville", help="small-divisor scan for (c2, c3)")
    sp.add_argument("--c2", required=True)
    sp.add_argument("--c3", required=True)
    sp.add_argument("--box", required=True, help="pmax,imax")
    sp.add_argument("--eps", default="0.1,0.5,1.0")
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--convention", choices=["linear", "root"], default="linear")
    _add_weight(sp)
    common(sp)

    sp = sub.add_parser("hc", help="Hankel-Clifford sign action")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--coords", default="1", help="1-based coordinate subset")
    sp.add_argument("--axis", type=int)
    common(sp)

    sp = sub.add_parser("polydisc", help="evaluate the polydisc generating function")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--point", help="comma-separated complex coordinates")
    sp.add_argument("--order", help="derivative multi-order")
    sp.add_argument("--certify", action="store_true", help="bound the tail via a decay fit")
    sp.add_argument("--fit-bounds", action="store_true", dest="fit_bounds")
    sp.add_argument("--pmax", type=int, default=10)
    sp.add_argument("--radius", type=float, default=0.9)
    _add_weight(sp)
    common(sp)
    return p


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _write_manifest(path, config, constants, artifact, status):
    data = {
        "tool": "ultraspec",
        "version": __version__,
        "kernel_backend": BACKEND,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": asdict(config),
        "artifact": artifact,
        "exit_status": status,
        "fitted_constants": _jsonable(constants),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)


def _error(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message), "exit": code}) + "\n")
    return code


def run(argv=None):
    """Run one command; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["rerun"]:
        # rerun MANIFEST [overrides...]; later options win in argparse
        if len(argv) < 2:
            return _error("usage", "rerun takes a manifest path", EXIT_REJECT)
        try:
            with open(argv[1]) as fh:
                argv = list(json.load(fh)["config"]["argv"]) + argv[2:]
        except (OSError, ValueError, KeyError) as exc:
            return _error(type(exc).__name__, exc, EXIT_REJECT)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code not in (None, 1) else EXIT_REJECT
    args._uncertified = None
    config = CommandConfig(args.command, argv,
                           {k: v for k, v in vars(args).items() if not k.startswith("_")})
    status = EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", HorizonLimitedWarning)
            artifact, constants = COMMANDS[args.command](args)
    except (ResolutionInsufficient, TailNotCertified, HorizonLimitedWarning) as exc:
        return _error(type(exc).__name__, exc, EXIT_UNCERTIFIED)
    except (ValueError, KeyError, TypeError, OSError, ZeroDivisionError) as exc:
        return _error(type(exc).__name__, exc, EXIT_REJECT)
    if args._uncertified:
        status = EXIT_UNCERTIFIED
        sys.stderr.write(json.dumps({"warning": "uncertified", "message": args._uncertified}) + "\n")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(artifact)
    else:
        sys.stdout.write(artifact if artifact.endswith("\n") else artifact + "\n")
    manifest = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if manifest:
        _write_manifest(manifest, config, constants, args.out, status)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
