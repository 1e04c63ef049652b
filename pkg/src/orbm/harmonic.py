"""Exact analytic layer on the unit disk.

Fourier/Poisson machinery plus the correspondence maps between boundary
reflection-angle fields, normalized stationary densities with a rotation
number, and rotation-rate fields.  Harmonic functions are stored as truncated
power series of their analytic completion F = f + i*ftilde (ftilde(0) = 0),
which makes conjugation and the correspondence formulas exact up to
truncation: no quadrature sits in the inner loop.

All functions here are pure; nothing holds mutable state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    ArcNotTangential,
    ArcTooShort,
    BranchPointAtBoundary,
    DegenerateAngle,
    InternalConsistencyFailure,
    InvalidInput,
    InvalidMobius,
    NotInR,
    NotInT,
)
from .quadrature import (
    ShellReport,
    Verdict,
    classify_shells,
    dyadic_shells,
    gauss_interval,
    shell_depth_cap,
)

HALF_PI = 0.5 * np.pi
TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# boundary fields
# ---------------------------------------------------------------------------

class FieldKind(str, enum.Enum):
    ANGLE = "angle"
    DENSITY = "density"
    GENERIC = "generic"


@dataclass
class BoundaryField:
    """Real function on the unit circle, sampled on a uniform grid.

    Sample j sits at angle 2*pi*j/n_grid.  Angle-valued fields take values in
    [-pi/2, pi/2]; densities are nonnegative.
    """

    values: np.ndarray
    kind: FieldKind = FieldKind.GENERIC

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = len(v)
        if n < 4 or (n & (n - 1)) != 0:
            raise InvalidInput(f"n_grid must be a power of two >= 4, got {n}")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("boundary samples must be finite")
        if self.kind == FieldKind.ANGLE:
            if np.max(np.abs(v)) > HALF_PI + 1e-9:
                raise InvalidInput("angle field exceeds [-pi/2, pi/2]")
            v = np.clip(v, -HALF_PI, HALF_PI)
        object.__setattr__(self, "values", v)

    @property
    def n_grid(self) -> int:
        return len(self.values)

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_grid) / self.n_grid

    def mean(self) -> float:
        return float(np.mean(self.values))

    def interp(self, at_angles: np.ndarray) -> np.ndarray:
        """Trigonometric interpolation at arbitrary angles."""
        n = self.n_grid
        c = np.fft.rfft(self.values) / n
        a = np.atleast_1d(np.asarray(at_angles, dtype=float))
        z = np.exp(1j * a)
        # Horner on e^{ika}; Nyquist mode contributes a pure cosine
        acc = np.zeros_like(z)
        for k in range(n // 2 - 1, 0, -1):
            acc = (acc + c[k]) * z
        out = c[0].real + 2.0 * acc.real + c[n // 2].real * np.cos((n // 2) * a)
        return out if np.ndim(at_angles) else float(out[0])

    # ---- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, value: float, n_grid: int = DEFAULT.n_grid,
                 kind: FieldKind = FieldKind.ANGLE) -> "BoundaryField":
        return cls(np.full(n_grid, float(value)), kind)

    @classmethod
    def from_function(cls, fn, n_grid: int = DEFAULT.n_grid,
                      kind: FieldKind = FieldKind.ANGLE) -> "BoundaryField":
        t = TWO_PI * np.arange(n_grid) / n_grid
        return cls(np.asarray(fn(t), dtype=float), kind)

    @classmethod
    def fourier(cls, sin_coeffs=(), cos_coeffs=(), mean: float = 0.0,
                n_grid: int = DEFAULT.n_grid,
                kind: FieldKind = FieldKind.ANGLE) -> "BoundaryField":
        t = TWO_PI * np.arange(n_grid) / n_grid
        v = np.full(n_grid, float(mean))
        for k, a in enumerate(sin_coeffs, start=1):
            v += a * np.sin(k * t)
        for k, a in enumerate(cos_coeffs, start=1):
            v += a * np.cos(k * t)
        return cls(v, kind)

    @classmethod
    def semicircle_split(cls, n_grid: int = DEFAULT.n_grid) -> "BoundaryField":
        """-pi/2 on the open upper semicircle, +pi/2 on the lower, 0 at +-1."""
        t = TWO_PI * np.arange(n_grid) / n_grid
        v = np.where(np.sin(t) > 0, -HALF_PI, HALF_PI)
        v[np.isclose(np.sin(t), 0.0, atol=1e-14)] = 0.0
        return cls(v, FieldKind.ANGLE)

    def clamp(self, limit: float) -> "BoundaryField":
        return BoundaryField(np.clip(self.values, -limit, limit), self.kind)

    # ---- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n_grid": self.n_grid,
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryField":
        v = np.asarray(d["values"], dtype=float)
        if len(v) != d["n_grid"]:
            raise InvalidInput("n_grid does not match number of samples")
        return cls(v, FieldKind(d["kind"]))


# ---------------------------------------------------------------------------
# harmonic functions as truncated analytic power series
# ---------------------------------------------------------------------------

def _eval_series(coeffs: np.ndarray, z) -> np.ndarray:
    """F(z) = sum c_k z^k by Horner, vectorized over z."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def _eval_circle(coeffs: np.ndarray, radius: float, n: int) -> np.ndarray:
    """F on the circle of given radius at n uniform angles, via FFT."""
    m = len(coeffs)
    if m > n:
        raise InvalidInput(f"need n >= number of modes ({m}), got {n}")
    padded = np.zeros(n, dtype=complex)
    padded[:m] = coeffs * radius ** np.arange(m)
    return np.fft.ifft(padded) * n


def _exp_series(p: np.ndarray) -> np.ndarray:
    """Power series of exp(P) for a polynomial P, truncated to len(p)."""
    n = len(p)
    e = np.zeros(n, dtype=complex)
    e[0] = np.exp(p[0])
    kp = np.arange(1, n) * p[1:]          # coefficients of P'
    for m in range(1, n):
        e[m] = np.dot(kp[:m][::-1], e[:m]) / m
    return e


def _log_series(c: np.ndarray) -> np.ndarray:
    """Power series of log(F) for a series F with F(0) != 0."""
    n = len(c)
    if c[0] == 0:
        raise InvalidInput("log of a series vanishing at 0")
    el = np.zeros(n, dtype=complex)
    el[0] = np.log(c[0])
    for m in range(1, n):
        s = c[m] * m
        if m > 1:
            s -= np.dot(np.arange(1, m) * el[1:m], c[1:m][::-1])
        el[m] = s / (m * c[0])
    return el


@dataclass
class HarmonicFn:
    """Harmonic function f on the disk, stored via F = f + i*ftilde.

    coeffs[k] is the k-th power-series coefficient of the analytic completion;
    Im coeffs[0] = 0 so that the conjugate vanishes at the origin.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if len(c) == 0 or not np.all(np.isfinite(c)):
            raise InvalidInput("invalid coefficient vector")
        if abs(c[0].imag) > 1e-9 * max(1.0, abs(c[0])):
            raise InvalidInput("Im c0 must vanish (conjugate normalized at 0)")
        c = c.copy()
        c[0] = c[0].real
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return len(self.coeffs) - 1

    def analytic(self, z) -> np.ndarray:
        return _eval_series(self.coeffs, z)

    def __call__(self, z) -> np.ndarray:
        return _eval_series(self.coeffs, z).real

    def at0(self) -> float:
        return float(self.coeffs[0].real)

    def circle(self, radius: float, n: int) -> np.ndarray:
        """Complex samples of F on |z| = radius at n uniform angles."""
        return _eval_circle(self.coeffs, radius, n)

    def boundary(self, n: int, radius: float = 1.0) -> np.ndarray:
        """Real samples of f on |z| = radius."""
        return self.circle(radius, n).real

    def conjugate(self) -> "HarmonicFn":
        """Harmonic conjugate, normalized to vanish at the origin."""
        d = -1j * self.coeffs
        d[0] = 0.0
        return HarmonicFn(d)

    def dilate(self, r: float) -> "HarmonicFn":
        """f(r z) as a new harmonic function."""
        return HarmonicFn(self.coeffs * r ** np.arange(len(self.coeffs)))

    def scale(self, a: float) -> "HarmonicFn":
        return HarmonicFn(self.coeffs * a)

    def add_const(self, a: float) -> "HarmonicFn":
        c = self.coeffs.copy()
        c[0] += a
        return HarmonicFn(c)

    # ---- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {"N": self.n_modes,
                "coeffs_re": self.coeffs.real.tolist(),
                "coeffs_im": self.coeffs.imag.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "HarmonicFn":
        c = np.asarray(d["coeffs_re"], dtype=float) + 1j * np.asarray(d["coeffs_im"], dtype=float)
        if len(c) != d["N"] + 1:
            raise InvalidInput("N does not match coefficient count")
        return cls(c)


def poisson_extend(b: BoundaryField, n_modes: int = DEFAULT.n_modes) -> HarmonicFn:
    """Harmonic extension of grid samples; exact for trigonometric polynomials.

    The value at the origin is the grid mean.
    """
    v = np.asarray(b.values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidInput("non-finite boundary samples")
    n = len(v)
    x = np.fft.rfft(v) / n
    kmax = min(n_modes, n // 2 - 1)
    c = np.zeros(kmax + 1, dtype=complex)
    c[0] = x[0].real
    c[1:] = 2.0 * x[1:kmax + 1]
    return HarmonicFn(c)


def conjugate(f: HarmonicFn) -> HarmonicFn:
    """Harmonic conjugate with value 0 at the origin (linear in f)."""
    return f.conjugate()


# ---------------------------------------------------------------------------
# admissibility grids
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def membership_radii(n_radii: int = DEFAULT.membership_radii,
                     resolution_modes: int | None = None) -> np.ndarray:
    """Radii strictly inside the disk, accumulating at the boundary.

    Dense enough near |z| = 1 to catch class violations that occur only in a
    thin boundary layer, while staying in the open disk so that admissible
    functions with boundary zeros are not rejected.  When the function under
    test is a truncation of rougher boundary data, radii closer to the
    boundary than the truncation can resolve (distance about 16/N) are
    dropped: evaluation there reflects Gibbs artifacts, not the function.
    """
    n_near = min(8, n_radii // 4)
    n_far = n_radii - n_near
    far = np.arange(n_far) / n_far                       # 0 .. <0.875-ish
    near = 1.0 - 2.0 ** (-np.arange(6, 6 + n_near, dtype=float))
    if resolution_modes is not None:
        near = near[1.0 - near >= 16.0 / max(resolution_modes, 16)]
    return np.unique(np.concatenate([far, near]))


def _grid_min(fn: HarmonicFn, tol: Tolerances, include_boundary: bool = False,
              respect_resolution: bool = False):
    """(min, max, argmin) of fn over a dense grid of the disk.

    include_boundary adds the unit circle itself, which is exact for the
    stored polynomial and appropriate when the polynomial *is* the object
    under classification.  respect_resolution instead trims near-boundary
    radii to where the truncated series still represents its boundary data.
    """
    radii = membership_radii(tol.membership_radii,
                             fn.n_modes if respect_resolution else None)
    if include_boundary:
        radii = np.append(radii, 1.0)
    lo, hi = np.inf, -np.inf
    arg_lo = (0.0, 0.0)
    for r in radii:
        vals = fn.boundary(tol.n_grid, radius=r)
        i = int(np.argmin(vals))
        if vals[i] < lo:
            lo, arg_lo = float(vals[i]), (float(r), TWO_PI * i / tol.n_grid)
        hi = max(hi, float(vals.max()))
    return lo, hi, arg_lo


# ---------------------------------------------------------------------------
# the correspondence maps
# ---------------------------------------------------------------------------

@dataclass
class StationaryPair:
    """Normalized positive stationary density plus rotation number.

    density integrates to 1 over the disk (equivalently pi * density(0) = 1);
    rotation is the asymptotic angular rate of the process about the origin.
    """

    density: HarmonicFn
    rotation: float

    def validate(self, tol: Tolerances = DEFAULT) -> None:
        if abs(np.pi * self.density.at0() - 1.0) > tol.normalization_tol:
            raise InternalConsistencyFailure(
                f"density not normalized: pi*h(0) = {np.pi * self.density.at0()!r}")
        lo, _, where = _grid_min(self.density, tol, respect_resolution=True)
        if lo <= 0.0:
            raise InternalConsistencyFailure(
                f"density not positive on the disk (min {lo:.3e} at r={where[0]:.4f}, "
                f"t={where[1]:.4f})")

    def conjugate_density(self) -> HarmonicFn:
        return self.density.conjugate()

    def analytic_offset(self) -> np.ndarray:
        """Coefficients of h + i*htilde - i*rotation/pi."""
        c = self.density.coeffs.copy()
        c[0] = c[0] - 1j * self.rotation / np.pi
        return c

    def to_dict(self) -> dict:
        return {"density": self.density.to_dict(), "rotation": self.rotation}

    @classmethod
    def from_dict(cls, d: dict) -> "StationaryPair":
        return cls(HarmonicFn.from_dict(d["density"]), float(d["rotation"]))


@dataclass
class RotationField:
    """Harmonic rotation-rate field; admissible iff its conjugate stays > -1."""

    fn: HarmonicFn

    @property
    def at0(self) -> float:
        return self.fn.at0()

    def __call__(self, z):
        return self.fn(z)


def _require_angle_field(theta: BoundaryField):
    if theta.kind != FieldKind.ANGLE:
        raise InvalidInput("expected an angle-valued boundary field")


def angle_to_pair(theta: BoundaryField, tol: Tolerances = DEFAULT) -> StationaryPair:
    """Stationary density and rotation number of the reflection-angle field.

    h + i*htilde = exp(-i(theta + i*thetatilde)) / (pi cos theta(0))
                   + i tan(theta(0)) / pi,    rotation = tan(theta(0)).
    """
    _require_angle_field(theta)
    s = poisson_extend(theta, tol.n_modes)
    theta0 = s.at0()
    if abs(abs(theta0) - HALF_PI) < tol.degenerate_angle_tol:
        raise DegenerateAngle(
            f"mean angle {theta0:.12f} is numerically tangential; "
            "use the excursion module")
    mu0 = float(np.tan(theta0))
    e = _exp_series(-1j * s.coeffs) / (np.pi * np.cos(theta0))
    e[0] = e[0] + 1j * mu0 / np.pi
    if abs(e[0].imag) > 1e-9:
        raise InternalConsistencyFailure("normalization of h failed")
    e[0] = e[0].real
    pair = StationaryPair(HarmonicFn(e), mu0)
    lo, _, where = _grid_min(pair.density, tol, respect_resolution=True)
    if lo <= 0.0:
        raise InternalConsistencyFailure(
            f"computed density dips to {lo:.3e} at r={where[0]:.4f}; "
            "increase n_modes/n_grid for this angle field")
    return pair


def pair_to_angle(p: StationaryPair, n_grid: int | None = None,
                  tol: Tolerances = DEFAULT) -> BoundaryField:
    """Boundary reflection angles recovered from a stationary pair.

    theta = -arg(h + i*htilde - i*rotation/pi), read off on the circle of
    radius 1 - eps_bdry and de-attenuated mode by mode back to the boundary.
    The principal branch is valid because the argument has positive real part
    inside the disk; this is asserted at runtime.
    """
    p.validate(tol)
    n = n_grid or tol.n_grid
    r = 1.0 - tol.eps_bdry
    fvals = _eval_circle(p.analytic_offset(), r, n)
    amin = int(np.argmin(np.abs(fvals)))
    if np.abs(fvals[amin]) < 1e-13:
        raise BranchPointAtBoundary(
            f"h + i*htilde - i*mu0/pi vanishes near angle {TWO_PI * amin / n:.6f}",
            angle=TWO_PI * amin / n)
    bad = np.nonzero(fvals.real <= 0.0)[0]
    if len(bad):
        a = TWO_PI * bad[0] / n
        raise BranchPointAtBoundary(
            f"principal branch leaves (-pi/2, pi/2) near angle {a:.6f}; "
            "the angle field is effectively tangential there", angle=a)
    theta_r = -np.arctan2(fvals.imag, fvals.real)
    # harmonic de-attenuation: mode k of theta on radius r is r^k * boundary mode
    spec = np.fft.rfft(theta_r)
    spec *= r ** (-np.arange(len(spec), dtype=float))
    vals = np.fft.irfft(spec, n)
    return BoundaryField(np.clip(vals, -HALF_PI, HALF_PI), FieldKind.ANGLE)


def rotation_field(p: StationaryPair, tol: Tolerances = DEFAULT) -> RotationField:
    """Rotation-rate field mu = rotation - pi * htilde (so mu(0) = rotation).

    Its conjugate is pi*h - 1, hence admissibility is equivalent to
    positivity of the density; a violation beyond tolerance is a library bug.
    """
    h = p.density.coeffs
    m = np.empty_like(h)
    m[0] = p.rotation
    m[1:] = 1j * np.pi * h[1:]
    fld = RotationField(HarmonicFn(m))
    lo, _, _ = _grid_min(p.density, tol, respect_resolution=True)
    if lo <= 0.0:
        raise InternalConsistencyFailure("pair density not positive; rotation field undefined")
    return fld


def pair_from_rotation(m: RotationField | HarmonicFn, tol: Tolerances = DEFAULT) -> StationaryPair:
    """Inverse of rotation_field: density = (conjugate(mu) + 1)/pi."""
    fn = m.fn if isinstance(m, RotationField) else m
    c = fn.coeffs
    h = np.empty_like(c)
    h[0] = 1.0 / np.pi
    h[1:] = -1j * c[1:] / np.pi
    density = HarmonicFn(h)
    lo, _, where = _grid_min(density, tol, include_boundary=True)
    if lo <= tol.membership_margin / np.pi:
        raise NotInR(
            f"conjugate of the candidate rotation field reaches "
            f"{np.pi * lo - 1.0:.3e} at r={where[0]:.4f}, t={where[1]:.4f}")
    return StationaryPair(density, float(c[0].real))


@dataclass
class OscillationBounds:
    k_minus: float
    k_plus: float
    b_lo: float
    b_hi: float

    @property
    def unbounded(self) -> bool:
        return np.isinf(self.b_lo) and np.isinf(self.b_hi)


def oscillation_bounds(phi: HarmonicFn, tol: Tolerances = DEFAULT) -> OscillationBounds:
    """Range of the conjugate of phi over the closed disk, and the interval of
    slopes b for which a + b*phi is an admissible rotation field for every a."""
    lo, hi, _ = _grid_min(phi.conjugate(), tol, include_boundary=True)
    tiny = 1e-13
    b_hi = np.inf if abs(lo) < tiny else 1.0 / abs(lo)
    b_lo = -np.inf if abs(hi) < tiny else -1.0 / abs(hi)
    return OscillationBounds(lo, hi, b_lo, b_hi)


# ---------------------------------------------------------------------------
# Moebius transfer
# ---------------------------------------------------------------------------

def mobius_boundary_angles(at_angles: np.ndarray, w0: complex, rot: float) -> np.ndarray:
    """Angles of phi(e^{it}) for phi(z) = e^{i rot}(z - w0)/(1 - conj(w0) z)."""
    z = np.exp(1j * np.asarray(at_angles, dtype=float))
    w = np.exp(1j * rot) * (z - w0) / (1.0 - np.conj(w0) * z)
    return np.angle(w) % TWO_PI


def compose_theta_with_mobius(theta: BoundaryField, w0: complex, rot: float) -> BoundaryField:
    """Boundary resampling of theta∘phi on the same grid."""
    ang = mobius_boundary_angles(theta.angles, w0, rot)
    return BoundaryField(np.clip(theta.interp(ang), -HALF_PI, HALF_PI), theta.kind)


def mobius_transfer(theta: BoundaryField, w0: complex, rot: float,
                    tol: Tolerances = DEFAULT) -> StationaryPair:
    """Stationary pair of theta∘phi, computed from the pair of theta alone.

    With nrm = pi * h(phi(0)), the transferred pair is
    ( (h∘phi)/nrm , mu(phi(0))/nrm ) where mu is the rotation field of theta.
    The composed power series is recovered by FFT on an interior circle.
    """
    if abs(w0) >= 1.0:
        raise InvalidMobius(f"|w0| = {abs(w0):.6f} must be < 1")
    p = angle_to_pair(theta, tol)
    phi0 = -np.exp(1j * rot) * w0
    h_phi0 = float(p.density(phi0))
    htil_phi0 = float(p.density.conjugate()(phi0))
    nrm = np.pi * h_phi0
    mu_phi0 = p.rotation - np.pi * htil_phi0

    rho = tol.compose_radius
    n = tol.n_grid
    z = rho * np.exp(1j * TWO_PI * np.arange(n) / n)
    w = np.exp(1j * rot) * (z - w0) / (1.0 - np.conj(w0) * z)
    g = (p.density.analytic(w) - 1j * htil_phi0) / nrm
    spec = np.fft.fft(g) / n
    kmax = min(tol.n_modes, n // 2 - 1)
    c = spec[:kmax + 1] * rho ** (-np.arange(kmax + 1, dtype=float))
    if abs(c[0].imag) > 1e-8:
        raise InternalConsistencyFailure("composed series not conjugate-normalized")
    c[0] = c[0].real
    return StationaryPair(HarmonicFn(c), float(mu_phi0 / nrm))


# ---------------------------------------------------------------------------
# boundary hitting criterion
# ---------------------------------------------------------------------------

@dataclass
class HittingResult:
    verdict: Verdict
    x_angle: float
    estimate: float | None
    rate: float | None
    shells: np.ndarray = field(repr=False)

    @property
    def finite(self) -> bool:
        return self.verdict is Verdict.FINITE


def hitting_integrand(p: StationaryPair, x_angle: float):
    """g(r) dr/(1-r): the radial integrand whose convergence decides whether a
    fixed boundary point is on the completed trajectory graph."""
    fc = p.analytic_offset()
    x = np.exp(1j * x_angle)
    cos0 = 1.0 / np.hypot(1.0, p.rotation)          # cos(arctan(rotation))
    scale = 1.0 / (np.pi * cos0)

    def g(r):
        f = _eval_series(fc, np.asarray(r) * x)
        return (f.real * scale) / (np.abs(f) ** 2 * (1.0 - np.asarray(r)))

    return g


def hitting_test(p: StationaryPair, x_angle: float, r_min: float = 0.5,
                 tol_shell: float | None = None,
                 tol: Tolerances = DEFAULT) -> HittingResult:
    """Classify the boundary-hitting integral at angle x by dyadic shells.

    Finite verdicts mean the boundary point lies on the completed path graph
    almost surely; Divergent means it does not.  Refinement stops at the
    resolution of the truncated series, and an unclassifiable pattern is
    reported as inconclusive, never silently.
    """
    p.validate(tol)
    if not (0.0 < r_min < 1.0):
        raise InvalidInput("r_min must lie in (0, 1)")
    g = hitting_integrand(p, x_angle)
    k0 = max(1, int(np.ceil(-np.log2(1.0 - r_min))))
    k1 = shell_depth_cap(p.density.n_modes, tol.shell_depth_limit)
    if k1 <= k0 + 2:
        k1 = k0 + 3
    head = gauss_interval(g, 0.0, 1.0 - 2.0 ** (-k0), 48)
    shells = dyadic_shells(g, k0, k1)
    rep = classify_shells(shells, tol_shell if tol_shell is not None else tol.shell_tol,
                          tol.shell_ratio, tol.shell_window, head)
    return HittingResult(rep.verdict, x_angle, rep.estimate, rep.rate, shells)


# ---------------------------------------------------------------------------
# boundary-measure singularity test
# ---------------------------------------------------------------------------

@dataclass
class SigmaMeasure:
    """Boundary measure given as a density on the grid plus point atoms.

    This is the atom+density model for the measure of Re(1/(h+i*htilde-i*mu0/pi)).
    """

    density: BoundaryField | None = None
    atoms: tuple = ()           # iterable of (angle, mass)

    def cleaned_atoms(self):
        return [(float(a) % TWO_PI, float(m)) for a, m in self.atoms if m != 0.0]


@dataclass
class SingularityResult:
    verdict: Verdict
    x_angle: float
    routed_through_hitting: bool = False
    estimate: float | None = None

    @property
    def finite(self) -> bool:
        return self.verdict is Verdict.FINITE


def measure_singularity_test(sigma: SigmaMeasure, x_angle: float,
                             pair: StationaryPair | None = None,
                             tol: Tolerances = DEFAULT) -> SingularityResult:
    """Decide whether the boundary measure integrates the kernel 1/|w - x|.

    Agrees with hitting_test wherever both apply.  An atom sitting exactly at
    x makes the kernel integral meaningless as stated; by convention that case
    is resolved by the hitting test on the originating pair (the atom-at-x
    situation corresponds to an atom of the density's boundary measure, which
    forces hitting).
    """
    x_angle = float(x_angle) % TWO_PI
    atoms = sigma.cleaned_atoms()
    at_x = [(a, m) for a, m in atoms if np.isclose(a, x_angle, atol=1e-12)]
    if at_x:
        if pair is None:
            raise InvalidInput(
                "atom exactly at the test point: pass the originating pair "
                "so the verdict can be routed through hitting_test")
        hit = hitting_test(pair, x_angle, tol=tol)
        return SingularityResult(hit.verdict, x_angle, routed_through_hitting=True)

    total = 0.0
    for a, m in atoms:
        total += m / np.abs(np.exp(1j * a) - np.exp(1j * x_angle))

    if sigma.density is None or np.all(sigma.density.values == 0.0):
        return SingularityResult(Verdict.FINITE, x_angle, estimate=total)

    dens = sigma.density
    n = dens.n_grid
    t = dens.angles
    # far part: plain trapezoid away from x
    delta = np.pi / 8.0
    d = np.abs((t - x_angle + np.pi) % TWO_PI - np.pi)
    far = d >= delta
    kern = 1.0 / (2.0 * np.abs(np.sin(0.5 * (t - x_angle)))[far])
    head = float(np.sum(dens.values[far] * kern)) * TWO_PI / n + total

    # near part: dyadic shells in the distance to x, both sides, with
    # trigonometric interpolation of the density at sub-grid nodes
    k1 = max(4, int(np.log2(delta * n / TWO_PI)))
    shells = np.empty(k1 + 1)
    for k in range(k1 + 1):
        u_hi, u_lo = delta * 2.0 ** (-k), delta * 2.0 ** (-k - 1)

        def one_side(sign):
            def f(u):
                ang = x_angle + sign * u
                return dens.interp(ang) / (2.0 * np.abs(np.sin(0.5 * u)))
            return gauss_interval(f, u_lo, u_hi, 16)

        shells[k] = one_side(+1.0) + one_side(-1.0)
    rep = classify_shells(shells, tol.shell_tol, tol.shell_ratio, tol.shell_window, head)
    est = rep.estimate if rep.verdict is Verdict.FINITE else None
    return SingularityResult(rep.verdict, x_angle, estimate=est)


# ---------------------------------------------------------------------------
# tangential arcs
# ---------------------------------------------------------------------------

@dataclass
class TangentialArcReport:
    arc: tuple
    sign: float                      # +1 for +pi/2 arcs, -1 for -pi/2
    max_h_near_boundary: float       # max density along radii into the arc interior
    probe_radius: float
    zero_angle: float | None         # location of the at-most-one zero of F, if present
    radial_profile: np.ndarray = field(repr=False)


def tangential_arc_check(theta: BoundaryField, arc: tuple,
                         probe_radius: float = 0.999,
                         tol: Tolerances = DEFAULT) -> TangentialArcReport:
    """Diagnostics on an arc where the reflection angle is identically +-pi/2.

    The density must vanish along radii into the arc, and the analytic
    function h + i*htilde - i*mu0/pi has at most one zero on the arc, located
    where the angle switches sign (-pi/2 before, +pi/2 after).
    """
    _require_angle_field(theta)
    t0, t1 = float(arc[0]), float(arc[1])
    if not t1 > t0:
        raise InvalidInput("arc must satisfy t1 > t0")
    n = theta.n_grid
    idx = np.nonzero((theta.angles >= t0) & (theta.angles <= t1))[0]
    if len(idx) < 4:
        raise ArcTooShort(f"arc covers {len(idx)} grid cells, need >= 4")
    v = theta.values[idx]
    if np.all(np.abs(v - HALF_PI) < 1e-12):
        sign = 1.0
    elif np.all(np.abs(v + HALF_PI) < 1e-12):
        sign = -1.0
    elif np.all(np.abs(np.abs(v) - HALF_PI) < 1e-12):
        sign = 0.0          # mixed arc: allowed, the zero-location rule applies
    else:
        raise ArcNotTangential("angle is not +-pi/2 on every grid point of the arc")

    pair = angle_to_pair(theta, tol)
    # the truncated series rings near the angle-field discontinuities at the
    # arc ends; the radial-approach profile is read on the middle of the arc
    margin = max(2 * np.pi / n, 0.2 * (t1 - t0))
    inner = idx[(theta.angles[idx] >= t0 + margin) & (theta.angles[idx] <= t1 - margin)]
    if len(inner) < 2:
        inner = idx[1:-1]
    mid_angles = theta.angles[inner]
    prof = pair.density(probe_radius * np.exp(1j * mid_angles))
    fvals = _eval_series(pair.analytic_offset(), probe_radius * np.exp(1j * mid_angles))
    zero_angle = None
    sgn = np.sign(fvals.imag)
    flips = np.nonzero(np.diff(sgn) != 0)[0]
    if len(flips):
        j = flips[0]
        zero_angle = float(0.5 * (mid_angles[j] + mid_angles[j + 1]))
    return TangentialArcReport(
        arc=(t0, t1), sign=sign,
        max_h_near_boundary=float(np.max(np.abs(prof))),
        probe_radius=probe_radius, zero_angle=zero_angle,
        radial_profile=np.asarray(prof))
