"""Acceptance criteria 1-10, each timed against its budget.

Every test prints one PASS/FAIL line (collected again in the terminal summary)
and asserts both correctness and the runtime budget.  Models are reloaded
fresh inside each criterion so no cached Hodge data leaks into the timings.
"""

import time
import zlib

from bcov import vhs
from bcov.action import build_action, cme_residual
from bcov.dgbv import load_model
from bcov.errors import AxiomError
from bcov.genus0 import count_trees_bruteforce, enumerate_trees, f0_hpl, f0_tree_sum, harmonic_universe
from bcov.hodge import hodge_data, propagator
from bcov.pipeline import dumps, frobenius_checks, run_pipeline
from bcov.zoo import default_zoo, generate_model
from conftest import record_criterion
from mutations import mutations
from oracles import compatible_split_families, count_trees_by_pruning
from oracles import rank as oracle_rank

ZOO = default_zoo()
CORE = ["torus(1)", "torus(2)", "twostep-del"]


def fresh(name):
    return load_model(generate_model(name))


def test_criterion_01_axiom_suite():
    specs = {name: generate_model(name) for name in ZOO}
    t_oracle = time.perf_counter()
    cases = {name: mutations(spec, 20, zlib.crc32(name.encode())) for name, spec in specs.items()}
    oracle_seconds = time.perf_counter() - t_oracle
    mismatches = []
    start = time.perf_counter()
    for name, spec in specs.items():
        load_model(spec)  # exhaustive validation of the clean model
        for bad, desc, expected in cases[name]:
            try:
                load_model(bad)
                got = None
            except AxiomError as exc:
                got = exc.axiom
            if got != expected:
                mismatches.append((name, desc, expected, got))
    seconds = time.perf_counter() - start
    total = sum(len(c) for c in cases.values())
    ok = record_criterion(
        1,
        "axiom suite + mutations",
        not mismatches and total == 20 * len(ZOO),
        seconds,
        10,
        f"{total} mutations, {len(mismatches)} misnamed; oracle labelling {oracle_seconds:.2f} s (untimed)",
    )
    assert ok, mismatches


def test_criterion_02_master_equation():
    start = time.perf_counter()
    zero = {name: cme_residual(build_action(fresh(name), 6, 3), 6).is_zero() for name in CORE}
    control = cme_residual(build_action(fresh("twostep-del"), 6, 3, corrupt_quartic=True), 6)
    seconds = time.perf_counter() - start
    ok = record_criterion(
        2,
        "classical master equation (order 6, t^3)",
        all(zero.values()) and not control.is_zero(),
        seconds,
        60,
        f"zero={zero}, corrupted control nonzero terms={len(control.terms)}",
    )
    assert ok


def test_criterion_03_hodge_identities():
    start = time.perf_counter()
    failures = []
    for name in ZOO:
        model = fresh(name)
        h = hodge_data(model)
        if any(x != 0 for row in h.homotopy_defect() for x in row):
            failures.append((name, "homotopy"))
        r = h.hodge_ranks()
        d_rank = oracle_rank(model.d)
        if r["harmonic"] != model.n - 2 * d_rank or r["harmonic"] + r["image_d"] + r["image_d_star"] != model.n:
            failures.append((name, "ranks"))
        try:
            h.check_propagator_symmetry()
            propagator(model)
        except AxiomError:
            failures.append((name, "propagator"))
    seconds = time.perf_counter() - start
    assert record_criterion(3, "Hodge identities, ranks, propagator symmetry", not failures, seconds, 5, str(failures or ""))


def test_criterion_04_tree_counts():
    start = time.perf_counter()
    counts = [len(enumerate_trees(n)) for n in range(3, 7)]
    brute = [count_trees_bruteforce(n) for n in range(3, 7)]
    oracle = [len(compatible_split_families(n)) for n in range(3, 7)]
    pruning = [count_trees_by_pruning(n) for n in range(3, 7)]
    seconds = time.perf_counter() - start
    ok = counts == brute == oracle == pruning == [1, 4, 26, 236]
    assert record_criterion(4, "tree counts n=3..6", ok, seconds, 30, f"counts={counts}")


def test_criterion_05_trees_equal_recursion():
    start = time.perf_counter()
    equal = {}
    for name in CORE:
        model = fresh(name)
        equal[name] = f0_tree_sum(model, 5).series == f0_hpl(model, 5).series
    seconds = time.perf_counter() - start
    assert record_criterion(5, "tree sum = recursion through order 5", all(equal.values()), seconds, 300, str(equal))


def test_criterion_06_mc_and_j():
    start = time.perf_counter()
    status = {}
    for name in ZOO:
        sol = vhs.mc_solve(fresh(name), 5)
        mc, dl = sol.residuals()
        J = vhs.j_function(sol, 5)
        status[name] = all(v.truncate(5).is_zero() for v in mc.values()) and not dl and vhs.pi0_matches_tau(J, sol)
    seconds = time.perf_counter() - start
    assert record_criterion(6, "MC and del residuals zero, pi0(J) = tau", all(status.values()), seconds, 60, str(status))


def test_criterion_07_frobenius_suite():
    start = time.perf_counter()
    status = {}
    for name in ZOO:
        fd, _, J = vhs.frobenius_data(fresh(name), 5)
        checks = frobenius_checks(fd, J, 5)
        status[name] = [k for k, v in checks.items() if not v]
    seconds = time.perf_counter() - start
    ok = not any(status.values())
    assert record_criterion(7, "Frobenius suite (g, A, d^3 f0, WDVV, unit)", ok, seconds, 120, "" if ok else str(status))


def test_criterion_08_main_theorem():
    start = time.perf_counter()
    status = {}
    for name in ZOO:
        model = fresh(name)
        fd, _, _ = vhs.frobenius_data(model, 5)
        F = f0_hpl(model, 5)
        status[name] = F.t0_restriction(harmonic_universe(model, 0)) == fd.f0
    model = fresh("twostep-del")
    descendant = vhs.descendant_potential(model, 4) == f0_hpl(model, 4).series
    seconds = time.perf_counter() - start
    ok = all(status.values()) and descendant
    assert record_criterion(
        8, "period f0 = F0|t0 (order 5); descendant F0 (order 4)", ok, seconds, 600, f"t0={status}, descendant={descendant}"
    )


def test_criterion_09_vhs_axioms():
    start = time.perf_counter()
    status = {}
    for name in ZOO:
        sol = vhs.mc_solve(fresh(name), 4)
        report = vhs.vhs_axiom_check(vhs.j_function(sol, 4))
        status[name] = [k for k, v in report.items() if not v["pass"]]
    seconds = time.perf_counter() - start
    ok = not any(status.values())
    assert record_criterion(9, "semi-infinite VHS axioms and transversality (order 4)", ok, seconds, 60, "" if ok else str(status))


def test_criterion_10_determinism():
    start = time.perf_counter()
    same = {}
    for name in ("twostep-del", "twostep-del(2)"):
        model = fresh(name)
        a = dumps(run_pipeline(model, 5, threads=1))
        b = dumps(run_pipeline(fresh(name), 5, threads=4))
        same[name] = a == b and '"ok": true' in a
    seconds = time.perf_counter() - start
    assert record_criterion(10, "byte-identical reports across thread counts", all(same.values()), seconds, None, str(same))
