import numpy as np
import pytest

SEED = 20240611


def random_sphere(rng, count, dim=3):
    x = rng.standard_normal((count, dim))
    return x / np.linalg.norm(x, axis=1)[:, None]


def random_ball(rng, count, dim=3, radius=0.9):
    x = random_sphere(rng, count, dim)
    return x * (radius * rng.random(count) ** (1.0 / dim))[:, None]


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def sphere_points(rng):
    return random_sphere(rng, 1000)


def smooth_f(x):
    return x[:, 2] + 0.5 * x[:, 0] * x[:, 1] + np.exp(0.3 * x[:, 0] - 0.2 * x[:, 1])


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, passed, detail)``."""
    lines = request.config.__dict__.setdefault("_criteria", [])

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criteria", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
