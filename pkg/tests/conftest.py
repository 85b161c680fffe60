import numpy as np
import pytest

from apsquare.signal import Domain


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small():
    """[-1, 1) with 16 cells; [0, 1) is cells 8..15."""
    return Domain(1, 0, 3)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                rows.append((props["criterion"], rep.passed, props.get("criterion_detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for title, ok, detail in sorted(rows):
        line = f"{'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail and not ok else ""))
