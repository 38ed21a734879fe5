import mpmath
import numpy as np
import pytest

from ellipq import EllipticParams, ModelConfig, ThetaEngine

TAU = 0.1 + 1.0j
ETA = 0.13 + 0.02j
P = 0.05 + 0.7j

# PASS/FAIL lines from the acceptance tests, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def mp_theta(t, tau, dps=30):
    """Independent odd theta: jtheta_1(pi t, exp(pi i tau)) in mpmath."""
    with mpmath.workdps(dps):
        q = mpmath.exp(1j * mpmath.pi * mpmath.mpmathify(tau))
        return complex(mpmath.jtheta(1, mpmath.pi * mpmath.mpmathify(t), q))


def product_theta(t, tau, terms=80):
    """Product formula 2 e^{pi i tau/4} sin(pi t) prod (1-q^j)(1-q^j e^{2 pi i t})(1-q^j e^{-2 pi i t})."""
    q = np.exp(2j * np.pi * tau)
    x = np.exp(2j * np.pi * t)
    out = 2 * np.exp(1j * np.pi * tau / 4) * np.sin(np.pi * t)
    for j in range(1, terms):
        qj = q**j
        out *= (1 - qj) * (1 - qj * x) * (1 - qj / x)
    return out


@pytest.fixture(scope="session")
def params():
    return EllipticParams(TAU, ETA, P)


@pytest.fixture(scope="session")
def engine(params):
    return ThetaEngine(params)


@pytest.fixture(scope="session")
def cfg2(params):
    """n = 2, Lambda = (1, 1): zero weight space at m = 1."""
    return ModelConfig(params, (1, 1), (0.1 + 0.05j, 0.43 - 0.12j))


@pytest.fixture(scope="session")
def cfg3(params):
    """n = 3, Lambda = (1, 1, 2): zero weight space at m = 2."""
    return ModelConfig(params, (1, 1, 2), (0.1 + 0.05j, 0.43 - 0.12j, -0.27 + 0.2j))


@pytest.fixture(scope="session")
def cfg_generic(params):
    return ModelConfig(params, (0.7 + 0.2j, 1.3 - 0.1j), (0.1 + 0.05j, 0.43 - 0.12j))


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))
