from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bcov.dgbv import load_model  # noqa: E402
from bcov.zoo import default_zoo, generate_model  # noqa: E402

REPO = Path(__file__).resolve().parent.parent
HEISENBERG = REPO / "models" / "heisenberg.json"

_MODELS: dict = {}


def zoo_model(name: str):
    if name not in _MODELS:
        _MODELS[name] = load_model(generate_model(name))
    return _MODELS[name]


@pytest.fixture(scope="session")
def torus1():
    return zoo_model("torus(1)")


@pytest.fixture(scope="session")
def torus2():
    return zoo_model("torus(2)")


@pytest.fixture(scope="session")
def twostep():
    return zoo_model("twostep")


@pytest.fixture(scope="session")
def twostep_del():
    return zoo_model("twostep-del")


@pytest.fixture(scope="session")
def twostep_del2():
    return zoo_model("twostep-del(2)")


@pytest.fixture(scope="session")
def heisenberg():
    return load_model(HEISENBERG)


@pytest.fixture(scope="session", params=default_zoo())
def zoo(request):
    return zoo_model(request.param)


# acceptance criteria report: one line per criterion, printed after the run
ACCEPTANCE_LINES: list = []


def record_criterion(number: int, title: str, passed: bool, seconds: float, budget: float | None, detail: str = "") -> bool:
    ok = passed and (budget is None or seconds < budget)
    limit = "no limit" if budget is None else f"{budget:g} s"
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  [{seconds:.2f} s / {limit}]"
    if detail:
        line += f"  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
