"""Pipeline orchestration and deterministic JSON reports.

``run_pipeline`` executes validation, action, master equation, Hodge data,
F0 (by the selected methods), Maurer-Cartan, J-function, Frobenius data,
equivalence diffs and invariant checks, in that order.  Independent stages
(the two F0 methods) may run on a thread pool; the report is assembled in a
fixed order from exact scalar strings, so its bytes do not depend on the
thread count.  Wall-clock timings are logged, never written to the report.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor

from . import genus0, vhs
from .action import build_action, cme_residual
from .dgbv import DGBVModel, validate
from .errors import BCOVError, ParamError, StageError
from .genus0 import harmonic_universe
from .hodge import hodge_data
from .scalar import format_scalar
from .series import SuperSeries

log = logging.getLogger("bcov")

METHODS = ("trees", "hpl")
DESCENDANT_ORDER_CAP = 4


class PipelineFailure(StageError):
    """A stage failed; ``report`` holds everything computed before the failure."""

    def __init__(self, stage: str, cause: BCOVError, report: dict):
        super().__init__(stage, cause)
        self.report = report


def resolve_threads(threads: int | None = None) -> int:
    """Explicit value, else ``BCOV_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("BCOV_THREADS", "").strip()
        if env:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ParamError(f"BCOV_THREADS must be an integer, got {env!r}") from exc
        else:
            threads = 1
    if threads < 1:
        raise ParamError("thread count must be at least 1")
    return threads


def series_diff(lhs: SuperSeries, rhs: SuperSeries) -> list[dict]:
    """Per-coefficient differences between two series on the same coordinates."""
    u = lhs.universe
    out = []
    for m in sorted(set(lhs.terms) | set(rhs.terms), key=lambda m: (len(m), m)):
        a, b = lhs.coefficient(m), rhs.coefficient(m)
        if a != b:
            out.append({"monomial": u.monomial_str(m), "lhs": format_scalar(a), "rhs": format_scalar(b)})
    return out


def _diff_entry(lhs, rhs, lhs_name: str, rhs_name: str) -> dict:
    diff = series_diff(lhs, rhs)
    return {"lhs": lhs_name, "rhs": rhs_name, "zero": not diff, "differences": diff}


class _Stages:
    """Runs named stages, recording results and wrapping failures with the stage tag."""

    def __init__(self, report: dict):
        self.report = report

    def run(self, name: str, fn):
        start = time.perf_counter()
        try:
            value = fn()
        except BCOVError as exc:
            self.report["error"] = {
                "stage": name,
                "type": type(exc).__name__,
                "message": str(exc),
                "exit_code": exc.exit_code,
            }
            raise PipelineFailure(name, exc, self.report) from exc
        log.info("stage %s finished in %.3f s", name, time.perf_counter() - start)
        return value


def f0_by_method(model: DGBVModel, order: int, method: str, k_max: int | None = None) -> SuperSeries:
    if method == "trees":
        return genus0.f0_tree_sum(model, order, k_max).series
    if method == "hpl":
        return genus0.f0_hpl(model, order, k_max).series
    raise ParamError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def run_pipeline(
    model: DGBVModel,
    order: int,
    methods=METHODS,
    *,
    tmax: int | None = None,
    threads: int | None = None,
    descendant_order: int | None = None,
) -> dict:
    """Full pipeline report (a JSON-ready dict).  Raises PipelineFailure on a failing stage.

    ``methods`` selects the F0 routes; an empty selection skips every stage that
    needs F0 (the equivalence diffs), which is recorded in the report.
    """
    if not isinstance(order, int) or order < 3:
        raise ParamError("order must be at least 3")
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ParamError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    k_max = order - 3 if tmax is None else tmax
    if k_max < 0:
        raise ParamError("tmax must be non-negative")
    threads = resolve_threads(threads)
    if descendant_order is None:
        descendant_order = min(order, DESCENDANT_ORDER_CAP)

    report: dict = {
        "model": {"name": model.name, "hash": model.hash},
        "parameters": {
            "order": order,
            "tmax": k_max,
            "methods": list(methods),
            "descendant_order": descendant_order if methods else None,
        },
    }
    stages = _Stages(report)
    checks: dict = {}

    stages.run("validate", lambda: validate(model))
    report["validation"] = "ok"

    action = stages.run("action", lambda: build_action(model, order, k_max))
    report["action"] = action.to_json()
    cme = stages.run("cme", lambda: cme_residual(action, order))
    report["cme_residual"] = cme.to_json()
    checks["classical-master-equation"] = cme.is_zero()

    hd = stages.run("hodge", lambda: hodge_data(model))
    report["hodge"] = {
        "ranks": hd.hodge_ranks(),
        "harmonic_labels": list(hd.harmonic_labels),
        "homotopy_defect_zero": all(x == 0 for row in hd.homotopy_defect() for x in row),
    }
    checks["hodge-homotopy"] = report["hodge"]["homotopy_defect_zero"]

    f0: dict = {}
    if methods:
        stages.run("kahler", hd.check_kahler)
        checks["kahler-surrogate"] = True
        if threads > 1 and len(methods) > 1:
            with ThreadPoolExecutor(max_workers=min(threads, len(methods))) as pool:
                futures = {m: pool.submit(f0_by_method, model, order, m, k_max) for m in methods}
                for m in methods:
                    f0[m] = stages.run(f"f0-{m}", futures[m].result)
        else:
            for m in methods:
                f0[m] = stages.run(f"f0-{m}", lambda m=m: f0_by_method(model, order, m, k_max))
        report["f0"] = {m: f0[m].to_json() for m in methods}

    sol = stages.run("mc_solve", lambda: vhs.mc_solve(model, order))
    report["mc"] = sol.to_json()
    mc_res, del_res = sol.residuals()
    checks["maurer-cartan"] = all(v.truncate(order).is_zero() for v in mc_res.values())
    checks["del-constraint"] = not del_res
    checks["kuranishi-gauge"] = sol.verify_gauge()

    J = stages.run("j_function", lambda: vhs.j_function(sol, order))
    report["j_function"] = J.to_json()
    checks["pi0-equals-tau"] = vhs.pi0_matches_tau(J, sol)

    g = stages.run("flat_metric", lambda: vhs.flat_metric(model))
    A = stages.run("structure_constants", lambda: vhs.structure_constants(J, g, order))
    f0p = stages.run("potential_from_period", lambda: vhs.potential_from_period(J, g, order))
    unit = stages.run("unit", lambda: vhs._unit_index(model))
    fd = vhs.FrobeniusData(g, A, f0p, unit, list(hd.harmonic_labels), list(hd.harmonic_parity))
    report["frobenius"] = fd.to_json()
    checks.update(stages.run("frobenius-checks", lambda: frobenius_checks(fd, J, order)))

    if methods:
        eq: list = []
        names = list(methods)
        for a, b in zip(names, names[1:]):
            eq.append(_diff_entry(f0[a], f0[b], f"f0-{a}", f"f0-{b}"))
        u0 = harmonic_universe(model, 0)
        restricted = f0[names[0]].transfer(u0, order)
        eq.append(_diff_entry(f0p, restricted, "period-f0", f"f0-{names[0]}|t0"))
        desc = stages.run("descendant", lambda: vhs.descendant_potential(model, descendant_order, min(k_max, descendant_order - 3)))
        ref = f0_by_method(model, descendant_order, names[0], min(k_max, descendant_order - 3))
        eq.append(_diff_entry(desc, ref, "period-descendant", f"f0-{names[0]}"))
        report["equivalence"] = eq
        checks["equivalence"] = all(e["zero"] for e in eq)
    else:
        report["equivalence"] = None

    axioms = stages.run("vhs_axioms", lambda: vhs.vhs_axiom_check(J, g, order))
    report["vhs_axioms"] = axioms
    checks["vhs-axioms"] = all(v["pass"] for v in axioms.values())
    report["checks"] = checks
    report["ok"] = all(checks.values())
    return report


def frobenius_checks(fd: "vhs.FrobeniusData", J: "vhs.JFunction", order: int) -> dict:
    """Metric symmetry and constancy, A symmetry, d^3 f0 = A, WDVV and the unit identity."""
    g, n, par = fd.g, len(fd.labels), fd.parity
    out = {}
    out["metric-graded-symmetric"] = all(
        g[a][b] == (-g[b][a] if par[a] and par[b] else g[b][a]) for a in range(n) for b in range(n)
    )
    out["metric-constant"] = vhs.metric_constancy(J, g, order)
    trunc = max(order - 3, 0)
    lower = {(a, b, c): fd.A_lower(a, b, c).truncate(trunc) for a in range(n) for b in range(n) for c in range(n)}
    sym = True
    for (a, b, c), s in lower.items():
        swapped = lower[(b, a, c)]
        if par[a] and par[b]:
            swapped = -swapped
        swapped2 = lower[(a, c, b)]
        if par[b] and par[c]:
            swapped2 = -swapped2
        if s != swapped or s != swapped2:
            sym = False
    out["structure-constants-symmetric"] = sym
    third = vhs.third_derivatives(fd.f0)
    out["third-derivative-equals-A"] = all(third[k].truncate(trunc) == v for k, v in lower.items())
    out["wdvv"] = vhs.wdvv_residual(fd.f0, g, par) == 0
    u = fd.unit_index
    unit_ok = True
    for b in range(n):
        for c in range(n):
            s = fd.A[(u, b)][c]
            want = SuperSeries.constant(s.universe, s.nmax, 1 if b == c else 0)
            if s != want:
                unit_ok = False
    out["unit-identity"] = unit_ok
    return out


def dumps(report: dict) -> str:
    """Canonical serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True) + "\n"
