import math

import numpy as np
import pytest

from qbmarket import ModelParams, NonMarkovParams, SecondMomentInit

OMEGA_FIG3 = 8.33e-3 * math.pi

# Published fit triples for the three index periods (minutes units).
FIT_TRIPLES = {
    "1999-2004": NonMarkovParams(xi=5.48e-4, eta=5.56e-3, omega=OMEGA_FIG3),
    "2004-2010": NonMarkovParams(xi=4.47e-4, eta=4.55e-3, omega=OMEGA_FIG3),
    "2010-2013": NonMarkovParams(xi=3.46e-4, eta=3.33e-3, omega=OMEGA_FIG3),
}


@pytest.fixture
def nm_9904() -> NonMarkovParams:
    return FIT_TRIPLES["1999-2004"]


@pytest.fixture
def variance_params() -> ModelParams:
    """High-dissipation parameter point used for the variance comparisons."""
    return ModelParams(M=10.0, gamma=1e3, kT=0.1, hbar=0.01)


@pytest.fixture
def variance_init(variance_params) -> SecondMomentInit:
    return SecondMomentInit.minimal_uncertainty(variance_params, 1e-7)


@pytest.fixture
def kurtosis_params() -> ModelParams:
    """Parameter point of the kurtosis-decay comparison."""
    return ModelParams(M=20.0, gamma=1.0, kT=1.0, hbar=1.0)


def linear_fit_r2(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept and R^2."""
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else float("nan")
    return float(coef[0]), float(coef[1]), r2
