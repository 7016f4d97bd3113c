"""Regenerates the frozen statistical oracles used by the test suite.

Run directly::

    python tests/oracles.py

The constants are computed by numerical quadrature only — no use of the
library under test and no closed-form gamma identities — so the sampled
estimators in twtsim.traffic are checked against an independent source.
"""

import math

from scipy import integrate


def weibull_unit_mean(k: float) -> float:
    """E[X] for Weibull(shape=k, scale=1) by quadrature."""
    val, err = integrate.quad(lambda x: x * k * x ** (k - 1) * math.exp(-(x**k)), 0, math.inf)
    assert err < 1e-7, err
    return val


def truncated_normal_mean(mean: float, var: float, lo: float, hi: float) -> float:
    """E[X] for Normal(mean, var) truncated to [lo, hi] by quadrature."""
    sd = math.sqrt(var)

    def pdf(x: float) -> float:
        return math.exp(-((x - mean) ** 2) / (2 * sd * sd))

    z, _ = integrate.quad(pdf, lo, hi)
    m, _ = integrate.quad(lambda x: x * pdf(x), lo, hi)
    return m / z


if __name__ == "__main__":
    k = 0.8099
    w = weibull_unit_mean(k)
    print(f"WEIBULL_UNIT_MEAN_K08099 = {w!r}")
    print(f"  (mean frame bytes at 15.6 Mbit/s: {6950 * 15.6 / 2 * w:.2f})")
    t = truncated_normal_mean(6.0, 1.8, 2.0, 10.0)
    print(f"TRUNC_NORMAL_MEAN = {t!r}")
