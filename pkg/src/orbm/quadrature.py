"""Dyadic-shell quadrature and the shared convergent/divergent classifier.

Integrals with a possible non-integrable blow-up at the boundary radius 1 are
split into dyadic shells [1 - 2^-k, 1 - 2^-(k+1)].  A 1/(1-r) weight makes the
shells the natural scale: they contribute a constant each in the divergent
case and decay geometrically in the convergent one.  The same classification
thresholds are used everywhere divergence has to be decided.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class Verdict(enum.Enum):
    FINITE = "finite"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ShellReport:
    verdict: Verdict
    estimate: float | None        # total integral incl. extrapolated tail (finite case)
    rate: float | None            # per-shell contribution (divergent case)
    head: float
    shells: np.ndarray = field(repr=False)

    @property
    def finite(self) -> bool:
        return self.verdict is Verdict.FINITE

    @property
    def divergent(self) -> bool:
        return self.verdict is Verdict.DIVERGENT


@lru_cache(maxsize=16)
def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_interval(f, a: float, b: float, n: int = 24) -> float:
    """Gauss-Legendre quadrature of f over [a, b]."""
    x, w = _gl_nodes(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.sum(w * f(mid + half * x)))


def dyadic_shells(f, k0: int, k1: int, n_nodes: int = 24) -> np.ndarray:
    """Integrals of f over the radial shells [1-2^-k, 1-2^-(k+1)], k0 <= k <= k1."""
    out = np.empty(k1 - k0 + 1)
    for i, k in enumerate(range(k0, k1 + 1)):
        out[i] = gauss_interval(f, 1.0 - 2.0 ** (-k), 1.0 - 2.0 ** (-k - 1), n_nodes)
    return out


def classify_shells(
    shells: np.ndarray,
    tol: float,
    ratio_cap: float = 0.95,
    window: int = 8,
    head: float = 0.0,
) -> ShellReport:
    """Decide whether the shell sums describe a finite or a divergent integral.

    Divergent: the last `window` shells each exceed `tol` and none of their
    consecutive ratios drops below `ratio_cap` (the shells are not dying out).
    Finite: the last `window` consecutive ratios all sit below `ratio_cap`;
    the remaining tail is extrapolated geometrically.  Anything else is
    reported as inconclusive, never silently resolved.
    """
    s = np.asarray(shells, dtype=float)
    if len(s) < 2:
        return ShellReport(Verdict.INCONCLUSIVE, None, None, head, s)
    w = min(window, len(s) - 1)
    tail = s[-(w + 1):]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tail[1:] / np.where(tail[:-1] == 0.0, np.nan, tail[:-1])
    ratios = np.where(np.isnan(ratios), 0.0, ratios)

    if np.all(tail[1:] > tol) and np.all(ratios >= ratio_cap):
        rate = float(np.mean(tail[1:]))
        return ShellReport(Verdict.DIVERGENT, None, rate, head, s)
    if np.all(ratios < ratio_cap):
        # geometric tail from the last few ratios (robust to one noisy shell)
        rho = float(np.median(ratios[-3:])) if len(ratios) >= 3 else float(ratios[-1])
        rho = min(max(rho, 0.0), ratio_cap)
        tail_extra = float(s[-1]) * rho / (1.0 - rho) if rho > 0 else 0.0
        return ShellReport(Verdict.FINITE, head + float(s.sum()) + tail_extra, None, head, s)
    return ShellReport(Verdict.INCONCLUSIVE, None, None, head, s)


def shell_depth_cap(n_modes: int, depth_limit: float = 1e-12) -> int:
    """Deepest shell index resolvable both by the representation and the
    absolute refinement barrier.

    A power series truncated at N modes is a faithful evaluator only down to
    boundary distances of order 1/N, so refinement stops at shells of width
    comparable to that scale (and in any case before 1 - depth_limit).
    """
    by_modes = max(3, int(np.floor(np.log2(max(n_modes, 8)))) - 1)
    by_limit = int(np.floor(-np.log2(depth_limit))) - 1
    return min(by_modes, by_limit)
