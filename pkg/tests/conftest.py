import functools

import numpy as np
import pytest

from liftsense.landscape import find_sops, spurious
from liftsense.objective import Problem

ACCEPTANCE = []


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def benchmark(n: int, eps: float = 0.3) -> Problem:
    return Problem.benchmark(n, eps)


@functools.lru_cache(maxsize=None)
def benchmark_sops(n: int, eps: float = 0.3, starts: int = 40):
    p = benchmark(n, eps)
    return tuple(find_sops(p, starts))


def spurious_point(n: int, eps: float = 0.3) -> np.ndarray:
    p = benchmark(n, eps)
    return spurious(p, benchmark_sops(n, eps))[0][0]


@pytest.fixture
def bench3():
    return benchmark(3)


@pytest.fixture
def xhat3():
    return spurious_point(3)


def central_diff(f, x, d, h=1e-5):
    return (f(x + h * d) - f(x - h * d)) / (2 * h)


def second_diff(f, x, d, h=1e-4):
    return (f(x + h * d) - 2 * f(x) + f(x - h * d)) / h**2


def random_symmetric_operator(n: int, m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n, n))
    return 0.5 * (A + A.transpose(0, 2, 1))
