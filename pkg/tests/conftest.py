import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from qreversal.antiunitary import Conjugation
from qreversal.channel import channel_from_unitary, steady_state
from qreversal.random_ops import random_state, random_unitary, rng_from
from qreversal.reversal import ReversalModel

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)

ACCEPTANCE_LINES: list[str] = []
SESSION_START = [time.perf_counter()]


def record_criterion(number: int, title: str, ok: bool, detail: str = ""):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_model(seed, d=None, d_e=None, random_w=True, random_theta=True) -> ReversalModel:
    """Random interaction with its steady state; no reverser attached."""
    rng = rng_from(seed)
    d = d or int(rng.integers(2, 4))
    d_e = d_e or int(rng.integers(2, 5))
    while True:
        u = random_unitary(d * d_e, rng)
        chi = random_state(d_e, rng)
        ss = steady_state(channel_from_unitary(u, chi))
        if ss.full_rank and ss.multiplicity == 1:
            break
    w = random_unitary(d, rng) if random_w else None
    theta = Conjugation(random_unitary(d, rng)) if random_theta else None
    return ReversalModel(u=u, chi=chi, sigma=ss.sigma, w=w, theta=theta)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_sessionstart(session):
    SESSION_START[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
