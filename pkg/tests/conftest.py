import random
from functools import lru_cache
from importlib import resources

import pytest

from ddesolve import fixed_point_expand, parse_dde

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test decides")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ok = rep.outcome == "passed"
        entry = _CRITERIA.setdefault(mark.args[0], [True, []])
        entry[0] = entry[0] and ok
        entry[1].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, runs = _CRITERIA[n]
        failed = [name for name, outcome in runs if outcome != "passed"]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({len(runs)} test{'s' if len(runs) != 1 else ''}"
        line += f", failing: {', '.join(failed)})" if failed else ")"
        terminalreporter.write_line(line)


def fixture_text(name: str) -> str:
    return (resources.files("ddesolve") / "fixtures" / f"{name}.dde").read_text()


@lru_cache(maxsize=None)
def load(name: str):
    return parse_dde(fixture_text(name))


@lru_cache(maxsize=None)
def expansion(name: str, N: int):
    return fixed_point_expand(load(name), N)


def random_linear_system(rng: random.Random) -> str:
    """A 2x2 linear system of order 1 at a = 1, always with a Delta term."""
    def c():
        return rng.choice([-2, -1, 1, 1, 2, 3])

    lines = ["catalytic u at 1"]
    for i in (1, 2):
        terms = []
        for atom in ["F1", "F2", "D[F1]", "D[F2]"]:
            if rng.random() < 0.6:
                terms.append(f"{c()}*{rng.choice(['1', 'u'])}*{atom}")
        if not any("D[" in x for x in terms):
            terms.append(f"{c()}*D[F{i}]")
        terms.append(f"{c()}*u")
        lines.append(f"F{i} = {1 if i == 1 else 0} + t*({' + '.join(terms)})")
    return "\n".join(lines)


def random_system(rng: random.Random, n: int, k: int, delta: int) -> str:
    """Random fixed-point system whose Q_i have total degree <= delta."""
    atoms = [f"F{j}" for j in range(1, n + 1)]
    for j in range(1, n + 1):
        atoms += [f"D[F{j}]" if d == 1 else f"D{d}[F{j}]" for d in range(1, k + 1)]
    atoms += ["u", "t"]
    lines = [f"catalytic u at {rng.choice([0, 1, -1, 2])}", f"order {k}"]
    for i in range(1, n + 1):
        terms = [str(rng.randint(1, 3))]
        for _ in range(rng.randint(1, 4)):
            deg = rng.randint(1, delta)
            mono = "*".join(rng.choice(atoms) for _ in range(deg))
            terms.append(f"{rng.choice([-2, -1, 1, 2, 3])}*{mono}")
        f = rng.choice(["1", "u", "1 + u", "0"])
        lines.append(f"F{i} = {f} + t*({' + '.join(terms)})")
    return "\n".join(lines)
