import itertools
import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def brute_force_min_length(pmf) -> float:
    """min sum p*l over every integer length vector with Kraft sum <= 1.

    Lengths up to k-1 suffice (a Huffman tree has depth at most k-1), and
    k=1 needs a single 1-bit codeword.
    """
    k = len(pmf)
    if k == 1:
        return 1.0
    best = math.inf
    for lengths in itertools.product(range(1, k), repeat=k):
        if sum(2 ** (k - 1 - l) for l in lengths) <= 2 ** (k - 1):
            best = min(best, math.fsum(p * l for p, l in zip(pmf, lengths)))
    return best


def h2(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
