import numpy as np
import pytest

from roughhurst.processes import Transform, build_drifted_fbm, integrate_transform
from roughhurst.sim import simulate_fbm


def rough_y(seed: int, H: float = 0.3, level: int = 12, q: int = 2, transform: str = "identity"):
    x = build_drifted_fbm(0.5, None, simulate_fbm(level + q, H, seed))
    return integrate_transform(x, Transform.by_name(transform), level, q).y


@pytest.fixture(scope="session")
def rough_paths():
    rng = np.random.default_rng(7)
    # rough regime only; see TestRHat.test_shift_law_smooth_paths for H > 1/2
    hs = rng.uniform(0.05, 0.5, size=50)
    gs = ["identity", "exp2t", "square", "nonmono"]
    return [rough_y(1000 + i, H=float(h), transform=gs[i % 4]) for i, h in enumerate(hs)]


@pytest.fixture(scope="session")
def smooth_paths():
    rng = np.random.default_rng(8)
    hs = rng.uniform(0.5, 0.95, size=20)
    gs = ["identity", "exp2t", "square", "nonmono"]
    return [rough_y(2000 + i, H=float(h), transform=gs[i % 4]) for i, h in enumerate(hs)]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[num]
        terminalreporter.write_line(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
