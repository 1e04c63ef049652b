"""Independent oracles used by the tests.

Each oracle computes its quantity by a route different from the library code
it checks: direct kernel quadrature instead of FFT coefficients, elementary
complex arithmetic instead of series algebra, polygon sums instead of
incremental unwrapping.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def poisson_quadrature(values: np.ndarray, z: complex) -> float:
    """Harmonic extension by direct Poisson-kernel sums over the grid."""
    n = len(values)
    x = np.exp(1j * TWO_PI * np.arange(n) / n)
    return float(np.mean(((x + z) / (x - z)).real * values))


def semicircle_density(z) -> np.ndarray:
    """Closed form for the split-angle example: (1/pi) Re((1+z)/(1-z))."""
    z = np.asarray(z, dtype=complex)
    return ((1.0 + z) / (1.0 - z)).real / np.pi


def inv_sqrt_density_coeffs(n_modes: int) -> np.ndarray:
    """Power-series coefficients of (1/pi)(1-z)^{-1/2} by the stable ratio
    recurrence c_{k+1} = c_k (2k+1)/(2k+2)."""
    c = np.empty(n_modes + 1)
    c[0] = 1.0
    for k in range(n_modes):
        c[k + 1] = c[k] * (2 * k + 1) / (2 * k + 2)
    return c / np.pi


def polygon_winding(points: np.ndarray, z: complex) -> float:
    """Total winding of a sampled closed-ish polygon about z, by summing
    principal arguments of consecutive quotients."""
    w = np.asarray(points, dtype=complex) - z
    return float(np.sum(np.angle(w[1:] / w[:-1])) / TWO_PI)


def disk_hitting_cdf(r: float, t: np.ndarray) -> np.ndarray:
    """CDF of the harmonic-measure angle seen from the point r on (0,1):
    F(t) = 1/2 + arctan(((1+r)/(1-r)) tan(t/2))/pi on (-pi, pi)."""
    return 0.5 + np.arctan((1.0 + r) / (1.0 - r) * np.tan(0.5 * t)) / np.pi


def trapezoid_circle(fn, n: int = 8192) -> float:
    """Mean of a function over the unit circle by the periodic trapezoid rule."""
    t = TWO_PI * np.arange(n) / n
    return float(np.mean(fn(t)))


def disk_quadrature(fn, n_r: int = 256, n_t: int = 1024) -> float:
    """Integral over the unit disk by Gauss-Legendre x trapezoid in polar
    coordinates."""
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w
    t = TWO_PI * np.arange(n_t) / n_t
    z = r[:, None] * np.exp(1j * t[None, :])
    vals = np.asarray(fn(z))
    ring = vals.mean(axis=1) * TWO_PI * r
    return float(np.sum(wr * ring))
