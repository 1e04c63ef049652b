"""Excursion-reflected Brownian motion.

Deep Brownian excursions are sampled from boundary points by rejection
(interior start at a small distance, kept only if the path reaches a given
depth before dying at the boundary) and glued along a local-time axis by a
Poisson point process whose roots are drawn from a boundary intensity
measure.  Shallow excursions are not simulated; their time contribution is
reinstated through a one-off calibration against a normally reflected run,
and occupation statistics are therefore reliable on the core disk that only
deep excursions can reach.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels
from .config import DEFAULT, Tolerances
from .disk import PolarHistogram, first_entry_angles, simulate, tangential_tan_field
from .errors import (
    InvalidInput,
    InvalidMeasure,
    InvalidScales,
    NearSingularFlow,
    ViolatesLipschitzCondition,
)
from .harmonic import TWO_PI, BoundaryField, FieldKind, StationaryPair, poisson_extend


# ---------------------------------------------------------------------------
# excursion sampling
# ---------------------------------------------------------------------------

@dataclass
class Excursion:
    """One boundary-rooted Brownian excursion.

    points runs from the root (on the boundary) through the interior to the
    terminal boundary point; depth is the deepest approach 1 - min|point|.
    """

    root_angle: float
    dt: float                   # recording stride in time units
    points: np.ndarray
    lifetime: float
    depth: float
    trials: int = 1             # rejection-sampling attempts behind this sample

    def __post_init__(self):
        p = np.asarray(self.points, dtype=complex)
        if len(p) < 2:
            raise InvalidInput("excursion needs at least its two endpoints")
        if abs(abs(p[0]) - 1.0) > 1e-6 or abs(abs(p[-1]) - 1.0) > 1e-6:
            raise InvalidInput("excursion endpoints must lie on the boundary")
        if np.any(np.abs(p[1:-1]) >= 1.0):
            raise InvalidInput("excursion interior must stay inside the disk")
        object.__setattr__(self, "points", p)

    @property
    def end_angle(self) -> float:
        return float(np.angle(self.points[-1]) % TWO_PI)

    def argmin_time_fraction(self) -> float:
        """Relative time of the deepest approach; reversal-symmetric in law."""
        k = int(np.argmin(np.abs(self.points[1:-1]))) + 1
        return k / (len(self.points) - 1)


def _check_scales(delta: float, eps_dep: float):
    if not (0.0 < delta < eps_dep < 1.0):
        raise InvalidScales(f"need 0 < delta << eps_dep < 1, got {delta}, {eps_dep}")


def expected_acceptance_rate(delta: float, eps_dep: float) -> float:
    """Probability that a Brownian path from distance delta reaches depth
    eps_dep before dying on the boundary, in the small-delta limit."""
    return delta / abs(np.log(1.0 - eps_dep))


@dataclass
class AcceptanceReport:
    accepted: int
    trials: int
    rate: float
    expected: float
    stderr: float

    @property
    def z_score(self) -> float:
        return (self.rate - self.expected) / self.stderr


def excursion_acceptance(root_angle: float, delta: float, eps_dep: float,
                         dt: float, trials: int, seed: int) -> AcceptanceReport:
    """Measure the deep-excursion acceptance frequency against its limit."""
    _check_scales(delta, eps_dep)
    dummy = np.empty(1)
    acc = _kernels.excursion_acceptance(float(root_angle), float(delta),
                                        float(eps_dep), float(dt), int(trials),
                                        int(seed) & 0x7FFFFFFF, 1 << 24,
                                        dummy, False, True)
    p = acc / trials
    return AcceptanceReport(acc, trials, p, expected_acceptance_rate(delta, eps_dep),
                            float(np.sqrt(max(p * (1 - p), 1e-12) / trials)))


def excursion_endpoints(root_angle: float, delta: float, dt: float,
                        trials: int, seed: int) -> np.ndarray:
    """Terminal boundary angles of unconditioned excursions from an interior
    start at distance delta; their law is the harmonic measure of the disk
    seen from the start point."""
    if not (0.0 < delta < 1.0):
        raise InvalidScales("delta must lie in (0,1)")
    out = np.full(trials, np.nan)
    _kernels.excursion_acceptance(float(root_angle), float(delta), 0.5,
                                  float(dt), int(trials),
                                  int(seed) & 0x7FFFFFFF, 1 << 24,
                                  out, True, False)
    return out % TWO_PI


def sample_excursion(root_angle: float, eps_dep: float, delta: float = 1e-3,
                     dt: float = 1e-6, seed: int = 0, rec_dt: float = 2e-3,
                     dt_coarse: float = 2.5e-5, max_points: int = 200000) -> Excursion:
    """Sample one excursion conditioned to reach depth eps_dep.

    A fine step resolves the thin layer near the root; beyond depth
    4*max(delta, dt scale) the integrator switches to a coarse step.  Points
    are recorded every rec_dt time units.
    """
    _check_scales(delta, eps_dep)
    buf_x = np.empty(max_points)
    buf_y = np.empty(max_points)
    switch = min(max(4.0 * delta, 8.0 * np.sqrt(dt)), 0.5 * eps_dep)
    n_pts, lifetime, depth, end_angle, trials = _kernels.sample_excursion_path(
        float(root_angle), float(delta), float(eps_dep), float(dt),
        float(dt_coarse), float(switch), float(rec_dt),
        int(seed) & 0x7FFFFFFF, 1 << 26, buf_x, buf_y)
    pts = np.empty(n_pts + 2, dtype=complex)
    pts[0] = np.exp(1j * root_angle)
    pts[1:-1] = buf_x[:n_pts] + 1j * buf_y[:n_pts]
    pts[-1] = np.exp(1j * end_angle)
    return Excursion(float(root_angle) % TWO_PI, rec_dt, pts,
                     float(lifetime), float(depth), int(trials))


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

_CALIBRATION_CACHE: dict = {}


def deep_excursion_calibration(eps_dep: float, dt: float = 1e-4,
                               horizon: float = 400.0, seed: int = 1234):
    """Deep-excursion rate and shallow-time fraction per unit boundary local
    time, measured once from a normally reflected run and cached.

    Returns (deep_rate, shallow_time_per_local_time).
    """
    key = (round(eps_dep, 6), round(dt, 9))
    if key in _CALIBRATION_CACHE:
        return _CALIBRATION_CACHE[key]
    from .paths import excursion_intervals

    path = simulate(BoundaryField.constant(0.0, 1024), 0.9, dt, horizon, seed)
    total_L = float(path.local_time[-1])
    deep_time = 0.0
    n_deep = 0
    for a, b in excursion_intervals(path):
        seg = path.positions[a:b + 1]
        if 1.0 - np.min(np.abs(seg)) >= eps_dep:
            n_deep += 1
            deep_time += (b - a) * dt
    if n_deep < 10:
        raise InvalidInput("calibration run too short for this depth")
    out = (n_deep / total_L, (path.horizon - deep_time) / total_L)
    _CALIBRATION_CACHE[key] = out
    return out


@dataclass
class ErbmPath:
    """Excursion-reflected path: deep excursions indexed by their local-time
    coordinate, with the reinstated shallow time carried as gaps at the
    compactified boundary state between them."""

    excursions: list                 # [(local-time coordinate, Excursion)]
    gaps: np.ndarray                 # gap duration before each excursion
    eps_dep: float
    seed: int

    def __post_init__(self):
        v = [c for c, _ in self.excursions]
        if np.any(np.diff(v) <= 0):
            raise InvalidInput("local-time coordinates must be strictly increasing")
        if len(self.gaps) != len(self.excursions):
            raise InvalidInput("one gap per excursion required")

    @property
    def excursion_time(self) -> float:
        return float(sum(e.lifetime for _, e in self.excursions))

    @property
    def total_time(self) -> float:
        return self.excursion_time + float(np.sum(self.gaps))

    def root_angles(self) -> np.ndarray:
        return np.array([e.root_angle for _, e in self.excursions])

    def end_angles(self) -> np.ndarray:
        return np.array([e.end_angle for _, e in self.excursions])

    def occupation(self, nr: int = 10, nt: int = 10) -> PolarHistogram:
        """Time-weighted occupation over the recorded excursion points."""
        hist = PolarHistogram.empty(nr, nt)
        for _, e in self.excursions:
            if len(e.points) > 2:
                hist.add(e.points[1:-1], np.full(len(e.points) - 2, e.dt))
        return hist


def _root_sampler(nu: BoundaryField, rng):
    vals = np.asarray(nu.values, dtype=float)
    if np.any(vals < 0) or vals.sum() <= 0:
        raise InvalidMeasure("intensity must be nonnegative with positive mass")
    n = len(vals)
    cdf = np.concatenate([[0.0], np.cumsum(vals)])
    cdf /= cdf[-1]
    edges = TWO_PI * np.arange(n + 1) / n

    def draw(k):
        u = rng.uniform(size=k)
        j = np.searchsorted(cdf, u, side="right") - 1
        j = np.clip(j, 0, n - 1)
        w = (u - cdf[j]) / np.maximum(cdf[j + 1] - cdf[j], 1e-300)
        return edges[j] + w * (edges[j + 1] - edges[j])

    return draw


def assemble_erbm(nu: BoundaryField, eps_dep: float, T: float, dt: float = 2.5e-5,
                  seed: int = 0, delta: float = 1e-3,
                  rec_dt: float = 2e-3) -> ErbmPath:
    """Glue deep excursions into a path of total duration at least T.

    Roots are i.i.d. from nu normalized; excursion counts on the local-time
    axis are Poisson at the calibrated deep rate.  The overall mass of nu is
    immaterial (rescaling the intensity reparametrizes the same process), so
    it is normalized internally.
    """
    if T < 0:
        raise InvalidInput("negative horizon")
    rate, shallow_per_L = deep_excursion_calibration(eps_dep)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    draw_roots = _root_sampler(nu, rng)
    if T == 0:
        return ErbmPath([], np.empty(0), eps_dep, seed)
    excs = []
    gaps = []
    v = 0.0
    elapsed = 0.0
    while elapsed < T:
        dv = rng.exponential(1.0 / rate)
        v += dv
        gap = dv * shallow_per_L
        alpha = float(draw_roots(1)[0])
        exc = sample_excursion(alpha, eps_dep, delta, dt,
                               seed=int(rng.integers(1 << 31)), rec_dt=rec_dt)
        excs.append((v, exc))
        gaps.append(gap)
        elapsed += gap + exc.lifetime
    return ErbmPath(excs, np.asarray(gaps), eps_dep, seed)


def kernel_mixture_density(nu: BoundaryField):
    """The stationary density of the assembled process: the boundary-kernel
    mixture z -> int (1-|z|^2)/|x-z|^2 dnu(x), normalized to mass one on the
    disk (each kernel integrates to pi)."""
    angles = nu.angles
    x = np.exp(1j * angles)
    w = np.asarray(nu.values, dtype=float)
    w = w / (w.sum() * np.pi)

    def density(z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()[:, None]
        k = (1.0 - np.abs(flat) ** 2) / np.abs(x[None, :] - flat) ** 2
        return (k @ w).reshape(z.shape)

    return density


# ---------------------------------------------------------------------------
# tangential limit of strongly rotating reflected processes
# ---------------------------------------------------------------------------

@dataclass
class TangentialLimitReport:
    rotation_numbers: list
    chi2: list
    p_values: list
    n_entries: int
    bins: int
    decreasing: bool


def tangential_limit_experiment(h: BoundaryField, mu0_list, eps_dep: float = 0.4,
                                seed: int = 0, replicas: int = 1000,
                                dt: float = 2e-5, bins: int = 8,
                                tol: Tolerances = DEFAULT) -> TangentialLimitReport:
    """First deep-entry law against its rotation-dominated limit.

    For each rotation number, the reflected process with stationary density h
    is started on the boundary and the angle of its first entry into the deep
    disk is collected across replicas.  As the rotation number grows the
    entry law converges to the intensity h dx / 2; the chi-square distance to
    that law (equal-mass bins) must decrease along mu0_list.
    """
    vals = np.asarray(h.values, dtype=float)
    if np.min(vals) < 1e-6:
        raise ViolatesLipschitzCondition("density must be bounded away from 0")
    if not all(b > a for a, b in zip(mu0_list, mu0_list[1:])):
        raise InvalidInput("mu0_list must be increasing")
    fn = poisson_extend(BoundaryField(vals, FieldKind.DENSITY), tol.n_modes)
    fn = fn.scale(1.0 / (np.pi * fn.at0()))
    h_bdry = fn.boundary(h.n_grid)
    conj_bdry = fn.conjugate().boundary(h.n_grid)
    if np.min(h_bdry) < 1e-6:
        raise ViolatesLipschitzCondition("harmonic extension dips near 0 on the grid")

    # equal-mass bin edges under the target law (density proportional to h)
    cdf = np.concatenate([[0.0], np.cumsum(h_bdry)])
    cdf /= cdf[-1]
    grid_edges = TWO_PI * np.arange(h.n_grid + 1) / h.n_grid
    bin_edges = np.interp(np.linspace(0, 1, bins + 1), cdf, grid_edges)

    chi2s, ps = [], []
    from scipy import stats
    for j, mu0 in enumerate(mu0_list):
        tan_field = tangential_tan_field(h_bdry, conj_bdry, float(mu0))
        ent = first_entry_angles(None, 0.0, dt, eps_dep, replicas,
                                 seed + 7919 * j, tan_values=tan_field)
        cnt, _ = np.histogram(ent, bins=bin_edges)
        expect = replicas / bins
        chi2s.append(float(np.sum((cnt - expect) ** 2 / expect)))
        ps.append(float(stats.chisquare(cnt).pvalue))
    dec = all(b < a for a, b in zip(chi2s, chi2s[1:]))
    return TangentialLimitReport(list(mu0_list), chi2s, ps, replicas, bins, dec)


# ---------------------------------------------------------------------------
# the angular flow of the intensity
# ---------------------------------------------------------------------------

def angular_flow(h: BoundaryField, a0: float, t: float,
                 normalize: bool = True, rtol: float = 1e-11,
                 atol: float = 1e-12) -> float:
    """Solve da/ds = 1/(pi h(a)) up to time t.

    Under the normalization pi h(0) = 1 the flow traverses one full turn in
    time exactly 2*pi, and uniform time on the flow pushes forward to the
    arc measure h(a) da / 2.
    """
    vals = np.asarray(h.values, dtype=float)
    if np.min(vals) < 1e-6:
        raise NearSingularFlow("density too close to 0 for the flow")
    fld = BoundaryField(vals, FieldKind.DENSITY)
    if normalize:
        scale = 1.0 / (np.pi * fld.mean())
        fld = BoundaryField(vals * scale, FieldKind.DENSITY)

    def rhs(_s, a):
        return 1.0 / (np.pi * fld.interp(a))

    sol = solve_ivp(rhs, (0.0, float(t)), [float(a0)], rtol=rtol, atol=atol,
                    dense_output=False, method="RK45")
    if not sol.success:
        raise NearSingularFlow(f"flow integration failed: {sol.message}")
    return float(sol.y[0, -1])
