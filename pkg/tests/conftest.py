import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from multitime import ModelParams

MISMATCH_RATIO = 3.18
GOLDENS = Path(__file__).with_name("goldens.json")


def exact_propagator(ratio, tau):
    """Closed-form U(tau) for kappa = 1.

    In the frame rotating with diag(e^{-i delta t/2}, e^{i delta t/2}) the
    generator is constant, so U(t) = D(t) expm(K t).
    """
    t = math.pi * tau / 2.0
    K = np.array([[0.5j * ratio, -2j], [2j, -0.5j * ratio]])
    D = np.diag([np.exp(-0.5j * ratio * t), np.exp(0.5j * ratio * t)])
    return D @ expm(K * t)


def squeeze_lambda_max(tau):
    """lambda_max for perfect phase matching."""
    return 1.0 - math.exp(-2.0 * math.pi * tau)


@pytest.fixture
def mismatched_params():
    return ModelParams(1.0, MISMATCH_RATIO)


@pytest.fixture
def matched_params():
    return ModelParams(1.0, 0.0)


@pytest.fixture(scope="session")
def goldens():
    with open(GOLDENS, encoding="utf-8") as fh:
        return json.load(fh)


def golden_value(goldens, name):
    v = goldens[name]["value"]
    if isinstance(v, list):
        return complex(v[0], v[1])
    return v


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
