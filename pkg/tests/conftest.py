import numpy as np
import pytest

from atompurify.measures import concurrence
from atompurify.qtypes import random_density

# criterion number -> list of (check name, passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_entangled(rng, n, min_concurrence=1e-3):
    """``n`` random entangled states with mixed ranks."""
    out = []
    while len(out) < n:
        rho = random_density(rng, rank=int(rng.integers(1, 5)))
        if concurrence(rho) > min_concurrence:
            out.append(rho)
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[num]
        ok = all(c[1] for c in checks)
        failed = [f"{name}: {detail}" for name, passed, detail in checks if not passed]
        detail = "; ".join(failed) if failed else "; ".join(f"{n}: {d}" for n, _, d in checks)
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
