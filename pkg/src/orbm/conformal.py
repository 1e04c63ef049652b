"""Conformal maps from the disk and the time-change transfer of reflected
paths to other simply connected domains.

A map carries an evaluator, its derivative and a numeric inverse.  Transfer
runs the source path through the clock int |f'(X)|^2 ds and resamples the
image on a uniform grid; stationary occupation then pushes forward through
the map, and rotation rates divide by the mean clock rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .disk import DiskPath, PolarHistogram, occupation_stream, simulate
from .errors import (
    DegenerateClock,
    InvalidBoundary,
    InvalidInput,
    InvalidMobius,
    MapDomainError,
)
from .harmonic import (
    TWO_PI,
    BoundaryField,
    StationaryPair,
    angle_to_pair,
    compose_theta_with_mobius,
    mobius_transfer,
    pair_to_angle,
    rotation_field,
)
from .paths import rotation_rate, winding, winding_star, excursion_intervals
from .quadrature import classify_shells, gauss_interval, shell_depth_cap, Verdict


# ---------------------------------------------------------------------------
# map classes
# ---------------------------------------------------------------------------

class ConformalMap:
    """One-to-one analytic map defined on the closed unit disk."""

    kind = "abstract"

    def __call__(self, z):
        raise NotImplementedError

    def deriv(self, z):
        raise NotImplementedError

    def inverse(self, w):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


def _univalence_check(m: ConformalMap, n_grid: int = 512):
    """Nonvanishing derivative on a disk grid plus winding number one of the
    boundary image about an interior value (argument principle)."""
    radii = np.linspace(0.05, 1.0, 12)
    t = TWO_PI * np.arange(n_grid) / n_grid
    for r in radii:
        d = m.deriv(r * np.exp(1j * t))
        if np.min(np.abs(d)) < 1e-9:
            raise InvalidInput(f"derivative vanishes near |z|={r:.2f}; map not univalent")
    w = m(np.exp(1j * t)) - m(0.0)
    wind = float(np.sum(np.angle(np.roll(w, -1) / w))) / TWO_PI
    if abs(wind - 1.0) > 1e-6:
        raise InvalidInput(f"boundary image winds {wind:.4f} times about an "
                           "interior point; map not one-to-one onto a Jordan region")


@dataclass
class MobiusMap(ConformalMap):
    """Disk automorphism z -> e^{i rot}(z - w0)/(1 - conj(w0) z)."""

    w0: complex
    rot: float = 0.0
    kind = "mobius"

    def __post_init__(self):
        if abs(self.w0) >= 1.0:
            raise InvalidMobius(f"|w0| = {abs(self.w0):.4f} must be < 1")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * self.rot) * (z - self.w0) / (1.0 - np.conj(self.w0) * z)

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return (np.exp(1j * self.rot) * (1.0 - abs(self.w0) ** 2)
                / (1.0 - np.conj(self.w0) * z) ** 2)

    def inverse_map(self) -> "MobiusMap":
        return MobiusMap(-np.exp(1j * self.rot) * self.w0, -self.rot)

    def inverse(self, w):
        return self.inverse_map()(w)

    def params(self) -> dict:
        return {"w0": [self.w0.real, self.w0.imag], "rot": self.rot}


@dataclass
class PolynomialMap(ConformalMap):
    """Polynomial map, accepted only if univalent on the closed disk."""

    coeffs: np.ndarray
    newton_tol: float = 1e-12
    max_newton: int = 50
    kind = "polynomial"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if len(c) < 2:
            raise InvalidInput("polynomial map needs degree >= 1")
        object.__setattr__(self, "coeffs", c)
        dc = c[1:] * np.arange(1, len(c))
        object.__setattr__(self, "_dcoeffs", dc)
        _univalence_check(self)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for ck in self.coeffs[::-1]:
            out = out * z + ck
        return out

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for ck in self._dcoeffs[::-1]:
            out = out * z + ck
        return out

    def inverse(self, w):
        """Newton iteration from the linearized preimage, with a bisection
        fallback along the ray to the best grid preimage."""
        w = np.asarray(w, dtype=complex)
        z = (w - self.coeffs[0]) / self.coeffs[1]
        r = np.abs(z)
        z = np.where(r > 1.0, z / np.maximum(r, 1e-300), z)
        for _ in range(self.max_newton):
            fz = self(z) - w
            if np.max(np.abs(fz)) < self.newton_tol:
                break
            z = z - fz / self.deriv(z)
            r = np.abs(z)
            z = np.where(r > 1.0 + 1e-9, z / r, z)
        bad = np.abs(self(z) - w) > 1e-8
        if np.any(bad):
            zb = np.atleast_1d(z).copy()
            wb = np.atleast_1d(w)
            idx = np.nonzero(np.atleast_1d(bad))[0]
            for i in idx:
                zb[i] = self._inverse_bisect(wb[i])
            z = zb.reshape(np.shape(z)) if np.ndim(z) else zb[0]
        return z

    def _inverse_bisect(self, w):
        t = TWO_PI * np.arange(4096) / 4096
        grid = 0.999 * np.sqrt(np.linspace(0.01, 1, 64))[:, None] * np.exp(1j * t[None, :])
        k = np.argmin(np.abs(self(grid) - w))
        z = grid.ravel()[k]
        for _ in range(200):
            fz = self(z) - w
            if abs(fz) < self.newton_tol:
                return z
            step = -fz / self.deriv(z)
            lam = 1.0
            while lam > 1e-6:
                zn = z + lam * step
                if abs(zn) <= 1.0 and abs(self(zn) - w) < abs(fz):
                    z = zn
                    break
                lam *= 0.5
            else:
                raise MapDomainError(f"inverse iteration stalled at w={w}")
        raise MapDomainError(f"inverse did not converge at w={w}")

    def params(self) -> dict:
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs]}


@dataclass
class ScaledMap(ConformalMap):
    """z -> base(r z): maps the disk onto the image of the smaller disk."""

    base: ConformalMap
    r: float
    kind = "scaled"

    def __post_init__(self):
        if not (0.0 < self.r <= 1.0):
            raise InvalidInput("scale must lie in (0, 1]")

    def __call__(self, z):
        return self.base(self.r * np.asarray(z, dtype=complex))

    def deriv(self, z):
        return self.r * self.base.deriv(self.r * np.asarray(z, dtype=complex))

    def inverse(self, w):
        return self.base.inverse(w) / self.r

    def params(self) -> dict:
        return {"base": self.base.to_dict(), "r": self.r}


def identity_map() -> PolynomialMap:
    return PolynomialMap(np.array([0.0, 1.0], dtype=complex))


def map_from_dict(d: dict) -> ConformalMap:
    kind = d["kind"]
    p = d["params"]
    if kind == "mobius":
        return MobiusMap(complex(p["w0"][0], p["w0"][1]), float(p["rot"]))
    if kind == "polynomial":
        return PolynomialMap(np.array([complex(a, b) for a, b in p["coeffs"]]))
    if kind == "scaled":
        return ScaledMap(map_from_dict(p["base"]), float(p["r"]))
    raise InvalidInput(f"unknown map kind {kind!r}")


# ---------------------------------------------------------------------------
# clock and transfer
# ---------------------------------------------------------------------------

def clock(path: DiskPath, m: ConformalMap) -> np.ndarray:
    """Trapezoidal accumulation of |f'(X_s)|^2 ds along the path."""
    try:
        w = np.abs(m.deriv(path.positions)) ** 2
    except Exception as e:          # noqa: BLE001 - map errors become domain errors
        raise MapDomainError(f"derivative evaluation failed: {e}") from e
    c = np.empty(len(w))
    c[0] = 0.0
    np.cumsum(0.5 * (w[1:] + w[:-1]) * path.dt, out=c[1:])
    return c


@dataclass
class TransferredPath:
    """Image path Y(t) = f(X at clock^{-1}(t)) on a uniform grid of image time."""

    map: ConformalMap
    target_dt: float
    positions: np.ndarray
    clock: np.ndarray = field(repr=False)
    source_dt: float = 0.0
    seed: int = 0

    @property
    def horizon(self) -> float:
        return self.target_dt * (len(self.positions) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.target_dt * np.arange(len(self.positions))


def transfer(path: DiskPath, m: ConformalMap, target_dt: float) -> TransferredPath:
    """Resample the mapped path on a uniform grid of image time.

    Positions are interpolated linearly in source time before mapping, which
    carries an O(dt) bias; jump records, when present, are carried through
    the boundary extension of the map.
    """
    if target_dt <= 0:
        raise InvalidInput("target_dt must be positive")
    c = clock(path, m)
    if c[-1] <= 0.0:
        raise DegenerateClock("clock does not advance along the path")
    plateau = np.max(np.diff(c) == 0.0) if len(c) > 2 else False
    if plateau and np.all(np.diff(c)[len(c) // 2:] == 0.0):
        raise DegenerateClock("clock stalls for the second half of the path")
    n = int(np.floor(c[-1] / target_dt))
    tt = target_dt * np.arange(n + 1)
    idx = np.searchsorted(c, tt, side="right") - 1
    idx = np.clip(idx, 0, len(c) - 2)
    w = (tt - c[idx]) / np.maximum(c[idx + 1] - c[idx], 1e-300)
    w = np.clip(w, 0.0, 1.0)
    src = path.positions[idx] * (1 - w) + path.positions[idx + 1] * w
    r = np.abs(src)
    src = np.where(r > 1.0, src / np.maximum(r, 1e-300), src)
    return TransferredPath(m, target_dt, m(src), c, path.dt, path.seed)


def transferred_rotation_rate(path: DiskPath, m: ConformalMap, z_image: complex,
                              n_batches: int = 32):
    """Rotation rate of the image path about an image point: the source
    truncated winding about the preimage, divided by the mean clock rate."""
    w = complex(np.asarray(m.inverse(z_image)).ravel()[0])
    est = rotation_rate(path, w, n_batches)
    c_end = float(clock(path, m)[-1])
    scale = path.horizon / c_end
    return est.value * scale, est.stderr * scale


# ---------------------------------------------------------------------------
# Moebius self-map invariance experiment
# ---------------------------------------------------------------------------

@dataclass
class SimBudget:
    dt: float = 1e-3
    horizon: float = 1000.0
    seed: int = 0
    nr: int = 8
    nt: int = 8


@dataclass
class MobiusCheckReport:
    density_l1_gap: float
    rate_points: list
    rate_transferred: list
    rate_direct: list
    rate_sigmas: list
    pair_formula_error: float
    rotation_formula_error: float

    @property
    def rates_agree(self) -> bool:
        return all(abs(a - b) <= 3.0 * s for a, b, s in
                   zip(self.rate_transferred, self.rate_direct, self.rate_sigmas))


def mobius_selfmap_check(theta: BoundaryField, w0: complex, rot: float,
                         budget: SimBudget = SimBudget(),
                         tol: Tolerances = DEFAULT) -> MobiusCheckReport:
    """Simulate under theta, push through the disk automorphism, and compare
    against direct simulation under the composed angle field.

    Checks occupation densities on common image cells, rotation rates at
    interior points, and the transferred density/rotation parameters against
    their closed-form expression.
    """
    f = MobiusMap(complex(w0), float(rot))
    g = f.inverse_map()
    theta_direct = compose_theta_with_mobius(theta, g.w0, g.rot)

    # analytic parameter check: the transferred pair of theta o f^{-1} from
    # the formula vs the pair of the resampled field
    pair_formula = mobius_transfer(theta, g.w0, g.rot, tol)
    pair_direct = angle_to_pair(theta_direct, tol)
    zs = 0.85 * np.exp(1j * TWO_PI * np.arange(32) / 32)
    pair_err = float(np.max(np.abs(pair_formula.density(zs) - pair_direct.density(zs))))
    rot_err = abs(pair_formula.rotation - pair_direct.rotation)

    # occupation: transferred = image-mapped, clock-weighted occupation of X
    n_steps = int(round(budget.horizon / budget.dt))
    hist_tr = PolarHistogram.empty(budget.nr, budget.nt)
    from .disk import path_chunks
    for pos, _ in path_chunks(theta, 0.2, budget.dt, n_steps, budget.seed):
        wgt = np.abs(f.deriv(pos)) ** 2
        hist_tr.add(f(pos), wgt)
    hist_dir = occupation_stream(theta_direct, f(0.2), budget.dt, n_steps,
                                 budget.seed + 101, nr=budget.nr, nt=budget.nt)
    gap = float(np.sum(np.abs(hist_tr.probabilities() - hist_dir.probabilities())))

    # rotation rates at interior points
    pts = [0.0, 0.3, -0.3, 0.3j, -0.25 - 0.25j]
    mu_direct_hat, mu_trans_hat, sig = [], [], []
    path_x = simulate(theta, 0.2, budget.dt, budget.horizon, budget.seed + 202)
    path_y = simulate(theta_direct, f(0.2), budget.dt, budget.horizon, budget.seed + 303)
    for z in pts:
        v_tr, s_tr = transferred_rotation_rate(path_x, f, z)
        est_d = rotation_rate(path_y, z)
        mu_trans_hat.append(v_tr)
        mu_direct_hat.append(est_d.value)
        sig.append(float(np.hypot(s_tr, est_d.stderr)))
    return MobiusCheckReport(gap, pts, mu_trans_hat, mu_direct_hat, sig,
                             pair_err, rot_err)


# ---------------------------------------------------------------------------
# integrability of the pushed density
# ---------------------------------------------------------------------------

@dataclass
class PushforwardResult:
    verdict: Verdict
    value: float | None
    shells: np.ndarray = field(repr=False)

    @property
    def finite(self) -> bool:
        return self.verdict is Verdict.FINITE


def l1_pushforward_norm(h, m: ConformalMap, n_angles: int = 2048,
                        n_shells: int = 20,
                        tol: Tolerances = DEFAULT) -> PushforwardResult:
    """Classify and estimate int |f'(z)|^2 h(z) dz over the disk.

    Finite values equal the L1 mass of the pushed density h o f^{-1} on the
    image domain.  Radial dyadic shells near |z| = 1 share the divergence
    thresholds of the boundary-hitting test.  Unlike the pointwise hitting
    integrand, the ring integrals average over the angle, which pairs up
    Fourier modes exactly; deep shells therefore remain meaningful even for
    truncated representations of rough densities.
    """
    t = TWO_PI * np.arange(n_angles) / n_angles
    e = np.exp(1j * t)

    def ring(r):
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        z = rr[:, None] * e[None, :]
        vals = np.abs(m.deriv(z)) ** 2 * h(z)
        out = rr * vals.mean(axis=1) * TWO_PI
        return out if np.ndim(r) else out[0]

    head = gauss_interval(ring, 0.0, 0.5, 48)
    shells = np.array([gauss_interval(ring, 1 - 2.0 ** (-k), 1 - 2.0 ** (-k - 1), 24)
                       for k in range(1, n_shells + 1)])
    rep = classify_shells(shells, tol.shell_tol, tol.shell_ratio,
                          tol.shell_window, head)
    return PushforwardResult(rep.verdict, rep.estimate, shells)


def image_area(m: ConformalMap, n: int = 4096) -> float:
    """Area of f(disk) by the boundary shoelace integral (oracle route)."""
    t = TWO_PI * np.arange(n) / n
    w = m(np.exp(1j * t))
    x, y = w.real, w.imag
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


# ---------------------------------------------------------------------------
# smooth-domain approximation sequences
# ---------------------------------------------------------------------------

@dataclass
class DomainApproxReport:
    r_list: list
    m1_medians: list
    m1_distances: list = field(repr=False)

    @property
    def non_increasing(self) -> bool:
        return all(b <= a + 1e-12 for a, b in zip(self.m1_medians, self.m1_medians[1:]))


def domain_approx_sequence(m: ConformalMap, r_list, pair: StationaryPair,
                           n_pairs: int = 100, dt: float = 1e-3, horizon: float = 2.0,
                           seed: int = 0, target_dt: float = 2e-3,
                           m1_budget: int = 400,
                           tol: Tolerances = DEFAULT) -> DomainApproxReport:
    """Image processes on the growing subdomains f(B(0, r)) against the
    limit process on f(disk), at matched driving noise.

    The subdomain process uses the dilated density z -> h(r z) (normalization
    is preserved since h(0) is unchanged) and the scaled map; its M1 distance
    to the limit path must shrink as r -> 1.
    """
    r_list = list(r_list)
    if not all(0 < r <= 1 for r in r_list):
        raise InvalidInput("radii must lie in (0, 1]")
    theta_lim = pair_to_angle(pair, tol=tol)
    dist = np.empty((len(r_list), n_pairs))
    for j in range(n_pairs):
        s = seed + 7919 * j
        base = simulate(theta_lim, 0.2, dt, horizon, s)
        y_lim = transfer(base, m, target_dt)
        for i, r in enumerate(r_list):
            if r == 1.0:
                dist[i, j] = 0.0
                continue
            pair_r = StationaryPair(pair.density.dilate(r), pair.rotation)
            theta_r = pair_to_angle(pair_r, tol=tol)
            xr = simulate(theta_r, 0.2, dt, horizon, s)
            yr = transfer(xr, ScaledMap(m, r), target_dt)
            n_common = min(len(yr.positions), len(y_lim.positions))
            from .paths import m1_distance_points
            dist[i, j] = m1_distance_points(
                yr.positions[:n_common], yr.times[:n_common],
                y_lim.positions[:n_common], y_lim.times[:n_common],
                budget=m1_budget)
    medians = [float(np.median(dist[i])) for i in range(len(r_list))]
    return DomainApproxReport(r_list, medians, dist)


# ---------------------------------------------------------------------------
# nearest-point transfer of boundary angle fields
# ---------------------------------------------------------------------------

def _segments_intersect(p1, p2, q1, q2) -> np.ndarray:
    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    d1 = cross(p2 - p1, q1 - p1)
    d2 = cross(p2 - p1, q2 - p1)
    d3 = cross(q2 - q1, p1 - q1)
    d4 = cross(q2 - q1, p2 - q1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def nearest_point_angles(theta_on_target: np.ndarray, polyline: np.ndarray,
                         inner_points: np.ndarray) -> BoundaryField:
    """Pull an angle field on a target boundary back to an inner curve by the
    nearest-point map (ties resolved toward the smaller boundary parameter).

    theta_on_target holds the angle at each polyline vertex; values along a
    segment interpolate linearly.  The polyline is closed implicitly.
    """
    poly = np.asarray(polyline, dtype=complex)
    vals = np.asarray(theta_on_target, dtype=float)
    if len(poly) != len(vals):
        raise InvalidInput("one angle value per polyline vertex required")
    if len(poly) < 3:
        raise InvalidBoundary("polyline needs at least 3 vertices")
    a = poly
    b = np.roll(poly, -1)
    n = len(poly)
    # self-intersection check over non-adjacent segment pairs
    for i in range(n):
        j = np.arange(i + 2, n if i > 0 else n - 1)
        if len(j) == 0:
            continue
        hit = _segments_intersect(a[i], b[i], a[j], b[j])
        if np.any(hit):
            raise InvalidBoundary(f"polyline segments {i} and {i + 2 + int(np.argmax(hit))} cross")

    x = np.asarray(inner_points, dtype=complex)
    seg = b - a
    seg2 = np.maximum(np.abs(seg) ** 2, 1e-300)
    out = np.empty(len(x))
    for k, xk in enumerate(x):
        tpar = np.clip(((xk - a) * np.conj(seg)).real / seg2, 0.0, 1.0)
        proj = a + tpar * seg
        d = np.abs(xk - proj)
        i = int(np.argmin(d))
        vnext = vals[(i + 1) % n]
        out[k] = vals[i] * (1.0 - tpar[i]) + vnext * tpar[i]
    return BoundaryField(out, kind=theta_field_kind(vals))


def theta_field_kind(vals: np.ndarray):
    from .harmonic import FieldKind, HALF_PI
    return FieldKind.ANGLE if np.max(np.abs(vals)) <= HALF_PI + 1e-12 else FieldKind.GENERIC
