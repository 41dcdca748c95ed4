"""Command-line interface: ``bcov validate|action|cme|f0|mc|frobenius|compare|axioms``.

Every subcommand prints (or writes with ``--out``) a canonical JSON document.
Exit codes: 0 success, 2 validation or axiom failure, 3 obstruction or
miniversality failure, 4 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import vhs
from .action import build_action, cme_residual
from .dgbv import validate
from .errors import AxiomError, BCOVError, ParamError
from .hodge import hodge_data
from .pipeline import (
    PipelineFailure,
    dumps,
    f0_by_method,
    frobenius_checks,
    resolve_threads,
    run_pipeline,
    series_diff,
)
from .zoo import resolve_model

EXIT_OK, EXIT_AXIOM, EXIT_OBSTRUCTION, EXIT_USAGE = 0, 2, 3, 4
COMMANDS = ("validate", "action", "cme", "f0", "mc", "frobenius", "compare", "axioms")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with code 4 instead of argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bcov", description="Exact genus-zero BCOV and period computations on finite dGBV models.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage timings to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--model", required=True, help="model file path or zoo:NAME (e.g. zoo:torus(1))")
        p.add_argument("--order", "--nmax", dest="order", type=int, default=5, help="truncation order in tau (default 5)")
        p.add_argument("--tmax", type=int, default=None, help="largest t-power of descendant coordinates (default order-3)")
        p.add_argument("--method", choices=("hpl", "trees", "both", "none"), default="both",
                       help="F0 route; 'none' skips the F0 stages of compare/axioms")
        p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
        p.add_argument("--threads", type=int, default=None, help="worker threads (fallback: BCOV_THREADS, then 1)")
    return parser


def _methods(arg: str) -> tuple:
    return {"both": ("trees", "hpl"), "none": ()}.get(arg, (arg,))


def _header(model, args) -> dict:
    return {"model": {"name": model.name, "hash": model.hash}, "parameters": {"order": args.order, "tmax": args.tmax}}


def _cmd_validate(model, args):
    validate(model)
    h = hodge_data(model)
    out = _header(model, args)
    out["parameters"] = {}
    out.update({"valid": True, "kahler": h.is_kahler(), "hodge_ranks": h.hodge_ranks(), "harmonic_labels": list(h.harmonic_labels)})
    return out, EXIT_OK


def _cmd_action(model, args):
    validate(model)
    S = build_action(model, args.order, args.tmax)
    out = _header(model, args)
    out["action"] = S.to_json()
    return out, EXIT_OK


def _cmd_cme(model, args):
    validate(model)
    S = build_action(model, args.order, args.tmax)
    res = cme_residual(S, args.order)
    out = _header(model, args)
    out.update({"zero": res.is_zero(), "residual": res.to_json()})
    return out, EXIT_OK if res.is_zero() else EXIT_AXIOM


def _cmd_f0(model, args):
    validate(model)
    methods = _methods(args.method)
    if not methods:
        raise ParamError("f0 needs --method hpl, trees or both")
    out = _header(model, args)
    values = {m: f0_by_method(model, args.order, m, args.tmax) for m in methods}
    out["f0"] = {m: v.to_json() for m, v in values.items()}
    code = EXIT_OK
    if len(methods) == 2:
        diff = series_diff(values["trees"], values["hpl"])
        out["difference"] = diff
        code = EXIT_OK if not diff else EXIT_AXIOM
    return out, code


def _cmd_mc(model, args):
    validate(model)
    sol = vhs.mc_solve(model, args.order)
    J = vhs.j_function(sol, args.order)
    mc_res, del_res = sol.residuals()
    checks = {
        "maurer-cartan": all(v.truncate(args.order).is_zero() for v in mc_res.values()),
        "del-constraint": not del_res,
        "kuranishi-gauge": sol.verify_gauge(),
        "pi0-equals-tau": vhs.pi0_matches_tau(J, sol),
    }
    out = _header(model, args)
    out.update({"mc": sol.to_json(), "j_function": J.to_json(), "checks": checks})
    return out, EXIT_OK if all(checks.values()) else EXIT_AXIOM


def _cmd_frobenius(model, args):
    validate(model)
    fd, sol, J = vhs.frobenius_data(model, args.order)
    checks = frobenius_checks(fd, J, args.order)
    out = _header(model, args)
    out.update({"frobenius": fd.to_json(), "checks": checks})
    return out, EXIT_OK if all(checks.values()) else EXIT_AXIOM


def _cmd_compare(model, args):
    if args.method == "none":
        raise ParamError("compare needs --method hpl, trees or both")
    report = run_pipeline(model, args.order, _methods(args.method), tmax=args.tmax, threads=args.threads)
    out = {k: report[k] for k in ("model", "parameters", "equivalence")}
    out["zero"] = all(e["zero"] for e in report["equivalence"])
    return out, EXIT_OK if out["zero"] else EXIT_AXIOM


def _cmd_axioms(model, args):
    report = run_pipeline(model, args.order, _methods(args.method), tmax=args.tmax, threads=args.threads)
    return report, EXIT_OK if report["ok"] else EXIT_AXIOM


HANDLERS = {
    "validate": _cmd_validate,
    "action": _cmd_action,
    "cme": _cmd_cme,
    "f0": _cmd_f0,
    "mc": _cmd_mc,
    "frobenius": _cmd_frobenius,
    "compare": _cmd_compare,
    "axioms": _cmd_axioms,
}


def _emit(doc: dict, path: str | None) -> None:
    text = dumps(doc)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        if args.order < 3 and args.command not in ("validate", "mc"):
            raise ParamError("order must be at least 3")
        if args.order < 1:
            raise ParamError("order must be at least 1")
        resolve_threads(args.threads)
        model = resolve_model(args.model)
        doc, code = HANDLERS[args.command](model, args)
    except PipelineFailure as exc:
        _emit(exc.report, args.out)
        print(f"bcov: {exc}", file=sys.stderr)
        return exc.exit_code
    except AxiomError as exc:
        _emit({"valid": False, "error": {"type": type(exc).__name__, "axiom": exc.axiom, "witness": list(exc.witness), "message": str(exc)}}, args.out)
        print(f"bcov: {exc}", file=sys.stderr)
        return exc.exit_code
    except BCOVError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}}, args.out)
        print(f"bcov: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"bcov: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(doc, args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
