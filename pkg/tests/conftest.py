import pytest

from csmcsim.engine import benchmark_scenario, run

STEADY = (0.030, 0.050)  # I_ref = 25 A, R_L = 10 ohm


@pytest.fixture(scope="session")
def benchmark_run():
    """Memoised benchmark-scenario runs keyed by (method, d0, **overrides)."""
    cache = {}

    def get(method="SBI", d0=0.0, **overrides):
        key = (method, d0, tuple(sorted(overrides.items())))
        if key not in cache:
            cache[key] = run(benchmark_scenario(method, d0, **overrides))
        return cache[key]

    return get


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion stays with the caller."""

    def record(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
