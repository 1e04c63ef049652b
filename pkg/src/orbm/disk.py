"""Monte Carlo simulation of obliquely reflected Brownian motion in the disk.

The Euler-Skorokhod scheme proposes a Gaussian step and, when the proposal
leaves the disk, pushes it back along the oblique reflection vector evaluated
at the radial projection; the accumulated pushback is the boundary local
time.  A second, independent scheme runs in the left half-plane and reaches
the disk through the exponential map and its time change; it serves as a
cross-check and as the stable integrator for strongly tangential angles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import DEFAULT, Tolerances
from .errors import InvalidInput, InvalidStep, NotInT, UseErbmModule
from .harmonic import (
    HALF_PI,
    TWO_PI,
    BoundaryField,
    FieldKind,
    StationaryPair,
    poisson_extend,
)

_MAX_STEPS = 2 ** 31


# ---------------------------------------------------------------------------
# path containers
# ---------------------------------------------------------------------------

@dataclass
class JumpRecord:
    """Boundary jump between consecutive samples: the path moves from
    e^{i from_angle} to e^{i to_angle} along the boundary arc, CCW when
    arc_sign is +1."""

    index: int
    from_angle: float
    to_angle: float
    arc_sign: int = 1


@dataclass
class DiskPath:
    """Discretized trajectory in the closed unit disk.

    positions[k] is the state after k steps; local_time is the accumulated
    boundary pushback, non-decreasing and flat strictly inside the disk.
    """

    dt: float
    positions: np.ndarray
    local_time: np.ndarray
    jumps: list = field(default_factory=list)
    seed: int = 0
    rejected_steps: int = 0
    interpolated: bool = False   # resampled paths smear local-time increments

    def __post_init__(self):
        if len(self.positions) != len(self.local_time):
            raise InvalidInput("positions and local_time must align")
        if len(self.positions) == 0:
            raise InvalidInput("empty path")

    @property
    def n_steps(self) -> int:
        return len(self.positions) - 1

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.positions))

    def check_invariants(self, tol: float = 1e-12) -> None:
        r = np.abs(self.positions)
        if np.any(r > 1.0 + tol):
            raise InvalidInput(f"path leaves the closed disk by {np.max(r) - 1:.2e}")
        dL = np.diff(self.local_time)
        if np.any(dL < -1e-15):
            raise InvalidInput("local time decreases")
        if not self.interpolated:
            inside = r[1:] < 1.0 - 1e-9
            if np.any(dL[inside] > 1e-15):
                raise InvalidInput("local time increases strictly inside the disk")


def _tan_grid(theta: BoundaryField) -> np.ndarray:
    return np.tan(theta.values)


def _check_simulate_args(theta: BoundaryField, x0: complex, dt: float, T: float):
    if theta.kind != FieldKind.ANGLE:
        raise InvalidInput("reflection angles must be an angle-valued field")
    if np.max(np.abs(theta.values)) >= HALF_PI - 1e-6:
        raise UseErbmModule(
            "reflection angle reaches +-pi/2 up to 1e-6; this scheme needs "
            "strictly oblique angles")
    m = theta.mean()
    if abs(m) >= HALF_PI:
        raise NotInT("angle field is degenerate")
    if abs(x0) > 1.0 + 1e-12:
        raise InvalidInput(f"|x0| = {abs(x0)} > 1")
    if not (0.0 < dt <= 1e-2):
        raise InvalidStep(f"dt must lie in (0, 1e-2], got {dt}")
    if T < 0:
        raise InvalidInput("negative horizon")
    if T / dt > _MAX_STEPS:
        raise InvalidStep("more than 2^31 steps requested")


def _gauss_blocks(rng, n_steps, n, max_block):
    done = 0
    while done < n_steps:
        b = min(max_block, n_steps - done)
        yield rng.standard_normal((b, n, 2)), rng.standard_normal((b, n, 2))
        done += b


def simulate(theta: BoundaryField, x0: complex, dt: float, T: float,
             seed: int = 0) -> DiskPath:
    """Single reflected path with every step recorded."""
    _check_simulate_args(theta, x0, dt, T)
    n_steps = int(round(T / dt))
    if n_steps == 0:
        return DiskPath(dt, np.array([complex(x0)]), np.zeros(1), seed=seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    tan_grid = _tan_grid(theta)
    g_grid = np.zeros_like(tan_grid)
    x = np.array([complex(x0).real])
    y = np.array([complex(x0).imag])
    L = np.zeros(1)
    Lg = np.zeros(1)
    ang = np.zeros(1)
    rejects = np.zeros(1, dtype=np.int64)
    rec_x = np.empty((n_steps, 1))
    rec_y = np.empty((n_steps, 1))
    rec_L = np.empty((n_steps, 1))
    pos = 0
    for g, sp in _gauss_blocks(rng, n_steps, 1, 1 << 20):
        b = g.shape[0]
        _kernels.disk_steps(x, y, L, Lg, ang, g, sp, tan_grid, g_grid,
                            np.sqrt(dt), False, 0.0, 0.0,
                            rec_x[pos:pos + b], rec_y[pos:pos + b],
                            rec_L[pos:pos + b], True, rejects)
        pos += b
    positions = np.empty(n_steps + 1, dtype=complex)
    positions[0] = complex(x0)
    positions[1:] = rec_x[:, 0] + 1j * rec_y[:, 0]
    local = np.concatenate([[0.0], rec_L[:, 0]])
    return DiskPath(dt, positions, local, seed=seed,
                    rejected_steps=int(rejects[0]))


@dataclass
class EnsembleResult:
    """Terminal statistics of a replica ensemble."""

    positions: np.ndarray      # complex, shape (replicas,)
    local_time: np.ndarray
    weighted_local_time: np.ndarray
    winding_angle: np.ndarray  # continuous argument increment about z_track
    rejected_steps: int
    seed: int


def simulate_ensemble(theta: BoundaryField, x0: complex, dt: float, T: float,
                      seed: int = 0, replicas: int = 1,
                      boundary_weight: BoundaryField | None = None,
                      track_angle_about: complex | None = None,
                      x0_samples: np.ndarray | None = None) -> EnsembleResult:
    """Run independent replicas and keep only terminal statistics.

    boundary_weight accumulates int g(X) dL per replica; track_angle_about
    accumulates the continuous argument of X - z."""
    _check_simulate_args(theta, x0, dt, T)
    n_steps = int(round(T / dt))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    tan_grid = _tan_grid(theta)
    g_grid = (boundary_weight.values.astype(float)
              if boundary_weight is not None else np.zeros_like(tan_grid))
    if x0_samples is not None:
        if len(x0_samples) != replicas:
            raise InvalidInput("x0_samples must have one entry per replica")
        x = np.asarray(x0_samples, dtype=complex).real.copy()
        y = np.asarray(x0_samples, dtype=complex).imag.copy()
    else:
        x = np.full(replicas, complex(x0).real)
        y = np.full(replicas, complex(x0).imag)
    L = np.zeros(replicas)
    Lg = np.zeros(replicas)
    track = track_angle_about is not None
    z = complex(track_angle_about) if track else 0.0j
    ang = np.zeros(replicas)
    if track and np.any(np.abs(x + 1j * y - z) < 1e-12):
        raise InvalidInput("winding reference point coincides with a start point")
    rejects = np.zeros(replicas, dtype=np.int64)
    dummy = np.empty((1, 1))
    max_block = max(1, (1 << 22) // max(replicas, 1))
    for g, sp in _gauss_blocks(rng, n_steps, replicas, max_block):
        _kernels.disk_steps(x, y, L, Lg, ang, g, sp, tan_grid, g_grid,
                            np.sqrt(dt), track, z.real, z.imag,
                            dummy, dummy, dummy, False, rejects)
    ang0 = np.angle(x0 - z) % TWO_PI if track else 0.0
    return EnsembleResult(x + 1j * y, L, Lg, ang0 + ang if track else ang,
                          int(rejects.sum()), seed)


def path_chunks(theta: BoundaryField, x0: complex, dt: float, n_steps: int,
                seed: int = 0, replicas: int = 1, chunk_steps: int = 65536,
                x0_samples: np.ndarray | None = None):
    """Generator of (positions_chunk, local_time_chunk) for streaming
    statistics over long runs; arrays have shape (chunk, replicas)."""
    _check_simulate_args(theta, x0, dt, n_steps * dt)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    tan_grid = _tan_grid(theta)
    g_grid = np.zeros_like(tan_grid)
    if x0_samples is not None:
        x = np.asarray(x0_samples, dtype=complex).real.copy()
        y = np.asarray(x0_samples, dtype=complex).imag.copy()
    else:
        x = np.full(replicas, complex(x0).real)
        y = np.full(replicas, complex(x0).imag)
    L = np.zeros(replicas)
    Lg = np.zeros(replicas)
    ang = np.zeros(replicas)
    rejects = np.zeros(replicas, dtype=np.int64)
    for g, sp in _gauss_blocks(rng, n_steps, replicas, chunk_steps):
        b = g.shape[0]
        rec_x = np.empty((b, replicas))
        rec_y = np.empty((b, replicas))
        rec_L = np.empty((b, replicas))
        _kernels.disk_steps(x, y, L, Lg, ang, g, sp, tan_grid, g_grid,
                            np.sqrt(dt), False, 0.0, 0.0,
                            rec_x, rec_y, rec_L, True, rejects)
        yield rec_x + 1j * rec_y, rec_L


# ---------------------------------------------------------------------------
# half-plane scheme (conformal cross-check)
# ---------------------------------------------------------------------------

@dataclass
class HalfPlanePath:
    """State of the left half-plane scheme plus its disk clock."""

    dt: float
    positions: np.ndarray          # complex, Re <= 0
    local_time: np.ndarray
    clock: np.ndarray              # int |exp|^2 ds, the disk time
    seed: int = 0

    def to_disk(self, target_dt: float) -> DiskPath:
        """Exponentiate and resample on a uniform grid of disk time."""
        c = self.clock
        t_end = c[-1]
        m = int(np.floor(t_end / target_dt))
        tt = target_dt * np.arange(m + 1)
        idx = np.searchsorted(c, tt, side="right") - 1
        idx = np.clip(idx, 0, len(c) - 2)
        w = (tt - c[idx]) / np.maximum(c[idx + 1] - c[idx], 1e-300)
        w = np.clip(w, 0.0, 1.0)
        z = self.positions[idx] * (1 - w) + self.positions[idx + 1] * w
        L = self.local_time[idx] * (1 - w) + self.local_time[idx + 1] * w
        pos = np.exp(z)
        r = np.abs(pos)
        pos[r > 1.0] /= r[r > 1.0]
        return DiskPath(target_dt, pos, L, seed=self.seed, interpolated=True)


def simulate_half_plane(theta: BoundaryField, x0: complex, dt: float, T: float,
                        seed: int = 0) -> HalfPlanePath:
    """Reflected path in {Re z <= 0} with reflection vector i tan(theta) - 1.

    exp of the path, run at the clock int |exp(X)|^2 ds, is a reflected disk
    path with angle field theta; this is an independent scheme against which
    the direct disk integrator is checked.
    """
    if complex(x0).real > 1e-12:
        raise InvalidInput("x0 must lie in the closed left half-plane")
    _check_simulate_args(theta, 0.0, dt, T)
    n_steps = int(round(T / dt))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    tan_grid = _tan_grid(theta)
    x = np.array([complex(x0).real])
    y = np.array([complex(x0).imag])
    L = np.zeros(1)
    clock = np.zeros(1)
    in_deep = np.zeros(1, dtype=np.int64)
    entries = np.empty((1, 1))
    entry_counts = np.zeros(1, dtype=np.int64)
    done = np.zeros(1, dtype=np.bool_)
    targets = np.zeros(1)
    rec_x = np.empty((n_steps, 1))
    rec_y = np.empty((n_steps, 1))
    rec_L = np.empty((n_steps, 1))
    rec_c = np.empty((n_steps, 1))
    pos = 0
    for g, _sp in _gauss_blocks(rng, n_steps, 1, 1 << 20):
        b = g.shape[0]
        _kernels.half_plane_steps(x, y, L, clock, g, tan_grid, np.sqrt(dt), dt,
                                  1.0, in_deep, entries, entry_counts,
                                  False, targets, done,
                                  rec_x[pos:pos + b], rec_y[pos:pos + b],
                                  rec_L[pos:pos + b], rec_c[pos:pos + b], True)
        pos += b
    positions = np.empty(n_steps + 1, dtype=complex)
    positions[0] = complex(x0)
    positions[1:] = rec_x[:, 0] + 1j * rec_y[:, 0]
    locals_ = np.concatenate([[0.0], rec_L[:, 0]])
    clocks = np.concatenate([[0.0], rec_c[:, 0]])
    return HalfPlanePath(dt, positions, locals_, clocks, seed)


def half_plane_terminal_states(theta: BoundaryField, x0: complex, dt: float,
                               disk_time: float, seed: int, replicas: int,
                               max_blocks: int = 4000,
                               tan_values: BoundaryField | None = None):
    """Raw half-plane states (x, y) at the disk time target, for an ensemble.

    Steps are adapted to carry equal disk time, so deep dives of the strip
    path (where the clock nearly stalls) cost O(1) steps instead of
    O(e^{2|x|}).  The y column is the continuous argument of the disk path;
    no unwrapping is involved because the strip tracks it directly.
    """
    if complex(x0).real > 1e-12:
        raise InvalidInput("x0 must lie in the closed left half-plane")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if tan_values is not None:
        tan_grid = np.asarray(tan_values.values, dtype=float)
    else:
        _check_simulate_args(theta, 0.0, dt, 1.0)
        tan_grid = _tan_grid(theta)
    x = np.full(replicas, complex(x0).real)
    y = np.full(replicas, complex(x0).imag)
    L = np.zeros(replicas)
    clock = np.zeros(replicas)
    in_deep = np.zeros(replicas, dtype=np.int64)
    entries = np.empty((replicas, 1))
    entry_counts = np.zeros(replicas, dtype=np.int64)
    done = np.zeros(replicas, dtype=np.bool_)
    targets = np.full(replicas, float(disk_time))
    used = np.zeros(1, dtype=np.int64)
    block = max(64, min(4096, int(1.2 * disk_time / dt) + 1))
    for _ in range(max_blocks):
        g = rng.standard_normal((block, replicas, 2))
        active = _kernels.half_plane_adaptive(x, y, L, clock, g, tan_grid, dt,
                                              1.0, in_deep, entries, entry_counts,
                                              targets, done, used, 0)
        if active == 0:
            break
    if not np.all(done):
        raise InvalidInput(
            f"{int((~done).sum())} replicas did not reach disk time {disk_time}")
    return x, y, L


def half_plane_marginals(theta: BoundaryField, x0: complex, dt: float,
                         disk_time: float, seed: int, replicas: int,
                         max_blocks: int = 4000) -> np.ndarray:
    """Terminal disk positions exp(X at clock^{-1}(disk_time)) for an ensemble
    of half-plane paths; the independent-scheme marginal oracle."""
    x, y, _ = half_plane_terminal_states(theta, x0, dt, disk_time, seed,
                                         replicas, max_blocks)
    return np.exp(x + 1j * y)


def deep_entry_angles(theta: BoundaryField, x0: complex, dt: float, eps_dep: float,
                      n_entries: int, seed: int, max_blocks: int = 100000,
                      tan_values: BoundaryField | None = None) -> np.ndarray:
    """First n angles at which the path enters {|z| <= 1 - eps_dep}, computed
    with the half-plane scheme (stable for strongly tangential angles).

    tan_values, when given, supplies tan(theta) directly on the grid; this is
    the well-conditioned parametrization when theta crowds +-pi/2.
    """
    if not (0.0 < eps_dep < 1.0):
        raise InvalidInput("eps_dep must lie in (0,1)")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if tan_values is not None:
        tan_grid = np.asarray(tan_values.values, dtype=float)
    else:
        tan_grid = np.tan(theta.values)
    x = np.array([complex(x0).real])
    y = np.array([complex(x0).imag])
    L = np.zeros(1)
    clock = np.zeros(1)
    in_deep = np.array([1 if x[0] <= np.log(1.0 - eps_dep) else 0], dtype=np.int64)
    entries = np.full((1, n_entries), np.nan)
    entry_counts = np.zeros(1, dtype=np.int64)
    done = np.zeros(1, dtype=np.bool_)
    targets = np.zeros(1)
    used = np.zeros(1, dtype=np.int64)
    block = 1 << 16
    for _ in range(max_blocks):
        g = rng.standard_normal((block, 1, 2))
        _kernels.half_plane_adaptive(x, y, L, clock, g, tan_grid, dt,
                                     float(np.log(1.0 - eps_dep)), in_deep,
                                     entries, entry_counts, targets, done, used, 0)
        if entry_counts[0] >= n_entries:
            break
    if entry_counts[0] < n_entries:
        raise InvalidInput(f"collected only {entry_counts[0]} deep entries")
    return entries[0, :n_entries] % TWO_PI


def first_entry_angles(theta: BoundaryField | None, x0: complex, dt: float,
                       eps_dep: float, replicas: int, seed: int,
                       max_blocks: int = 4000,
                       tan_values: BoundaryField | None = None) -> np.ndarray:
    """Angle of the first entry into {|z| <= 1 - eps_dep} for independent
    replicas started at the same near-boundary point (half-plane scheme)."""
    if not (0.0 < eps_dep < 1.0):
        raise InvalidInput("eps_dep must lie in (0,1)")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if tan_values is not None:
        tan_grid = np.asarray(tan_values.values, dtype=float)
    else:
        tan_grid = np.tan(theta.values)
    x = np.full(replicas, complex(x0).real)
    y = np.full(replicas, complex(x0).imag)
    if x[0] > 1e-12:
        raise InvalidInput("x0 must lie in the closed left half-plane")
    L = np.zeros(replicas)
    clock = np.zeros(replicas)
    in_deep = np.zeros(replicas, dtype=np.int64)
    entries = np.full((replicas, 1), np.nan)
    entry_counts = np.zeros(replicas, dtype=np.int64)
    done = np.zeros(replicas, dtype=np.bool_)
    targets = np.zeros(replicas)
    used = np.zeros(1, dtype=np.int64)
    block = max(64, min(8192, (1 << 22) // max(replicas, 1)))
    for _ in range(max_blocks):
        g = rng.standard_normal((block, replicas, 2))
        active = _kernels.half_plane_adaptive(x, y, L, clock, g, tan_grid, dt,
                                              float(np.log(1.0 - eps_dep)), in_deep,
                                              entries, entry_counts, targets, done,
                                              used, 1)
        if active == 0:
            break
    if not np.all(done):
        raise InvalidInput(f"{int((~done).sum())} replicas found no deep entry")
    return entries[:, 0] % TWO_PI


def tangential_tan_field(pair_density_boundary: np.ndarray,
                         conj_boundary: np.ndarray, rotation: float) -> BoundaryField:
    """tan(theta) on the grid from the density parametrization:
    tan(theta(x)) = (rotation - pi*htilde(x)) / (pi*h(x)).

    Returned as a GENERIC field of tangent values; this stays well conditioned
    where theta itself crowds +-pi/2."""
    vals = (rotation - np.pi * conj_boundary) / (np.pi * pair_density_boundary)
    return BoundaryField(vals, FieldKind.GENERIC)


# ---------------------------------------------------------------------------
# radial oracle
# ---------------------------------------------------------------------------

def simulate_radial_bessel(r0: float, dt: float, T: float, seed: int,
                           replicas: int) -> tuple[np.ndarray, np.ndarray]:
    """Independent 1-d scheme for the radial part of the disk process: the
    2-d Bessel SDE dY = dW + dt/(2Y) - dL, reflected at 1.
    Returns (Y_T, L_T) samples."""
    if not (0.0 <= r0 <= 1.0):
        raise InvalidInput("r0 must lie in [0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n_steps = int(round(T / dt))
    r = np.full(replicas, float(r0))
    L = np.zeros(replicas)
    done = 0
    while done < n_steps:
        b = min(max(1, (1 << 22) // replicas), n_steps - done)
        g = rng.standard_normal((b, replicas))
        _kernels.bessel_steps(r, L, g, np.sqrt(dt), dt)
        done += b
    return r, L


# ---------------------------------------------------------------------------
# occupation statistics
# ---------------------------------------------------------------------------

@dataclass
class PolarHistogram:
    """Equal-area polar histogram over the unit disk."""

    nr: int
    nt: int
    weights: np.ndarray          # (nr, nt) accumulated weights
    total: float = 0.0

    @classmethod
    def empty(cls, nr: int, nt: int) -> "PolarHistogram":
        return cls(nr, nt, np.zeros((nr, nt)))

    def add(self, positions: np.ndarray, weights: np.ndarray | None = None):
        z = np.asarray(positions).ravel()
        u = np.abs(z) ** 2
        t = np.angle(z) % TWO_PI
        w = np.ones_like(u) if weights is None else np.asarray(weights).ravel()
        h, _, _ = np.histogram2d(u, t, bins=[self.nr, self.nt],
                                 range=[[0.0, 1.0], [0.0, TWO_PI]], weights=w)
        self.weights += h
        self.total += float(w.sum())

    def probabilities(self) -> np.ndarray:
        return self.weights / max(self.weights.sum(), 1e-300)

    def cell_centers(self) -> np.ndarray:
        u = (np.arange(self.nr) + 0.5) / self.nr
        t = TWO_PI * (np.arange(self.nt) + 0.5) / self.nt
        r = np.sqrt(u)
        return r[:, None] * np.exp(1j * t[None, :])

    def model_probabilities(self, density_fn, subsamples: int = 2) -> np.ndarray:
        """Cell probabilities of a density on the disk (sub-sampled per cell)."""
        p = np.zeros((self.nr, self.nt))
        for a in range(subsamples):
            for b in range(subsamples):
                u = (np.arange(self.nr) + (a + 0.5) / subsamples) / self.nr
                t = TWO_PI * (np.arange(self.nt) + (b + 0.5) / subsamples) / self.nt
                z = np.sqrt(u)[:, None] * np.exp(1j * t[None, :])
                p += np.asarray(density_fn(z), dtype=float)
        p /= subsamples ** 2
        p *= np.pi / (self.nr * self.nt)      # equal cell areas
        return p / p.sum()

    def l1_error(self, density_fn, r_max: float | None = None) -> float:
        """L1 distance between empirical and model cell probabilities.

        With r_max given, the comparison restricts to the cells contained in
        {|z| <= r_max} and both sides are renormalized there (used when the
        sampler is only faithful on a core disk)."""
        p = self.probabilities()
        q = self.model_probabilities(density_fn)
        if r_max is not None:
            rows = int(np.floor(r_max ** 2 * self.nr))
            if rows < 1:
                raise InvalidInput("r_max leaves no complete cell rows")
            p = p[:rows] / max(p[:rows].sum(), 1e-300)
            q = q[:rows] / q[:rows].sum()
        return float(np.sum(np.abs(p - q)))


def occupation_density(path: DiskPath, nr: int = 16, nt: int = 16,
                       burn_fraction: float = 0.1) -> PolarHistogram:
    """Normalized occupation histogram of a path, 10% burn-in discarded."""
    if path.n_steps < 1:
        raise InvalidInput("empty path")
    if path.horizon < 100 * path.dt:
        raise InvalidInput("path too short for occupation statistics")
    h = PolarHistogram.empty(nr, nt)
    k0 = int(burn_fraction * len(path.positions))
    h.add(path.positions[k0:])
    return h


def occupation_stream(theta: BoundaryField, x0: complex, dt: float,
                      n_steps: int, seed: int, nr: int = 16, nt: int = 16,
                      replicas: int = 1, burn_fraction: float = 0.1,
                      weight_fn=None,
                      x0_samples: np.ndarray | None = None) -> PolarHistogram:
    """Occupation histogram over a long run without storing the path.

    weight_fn(z) -> nonnegative weights lets callers accumulate clock-weighted
    occupation (conformal transfer in preimage coordinates)."""
    hist = PolarHistogram.empty(nr, nt)
    burn = int(burn_fraction * n_steps)
    sofar = 0
    for pos, _L in path_chunks(theta, x0, dt, n_steps, seed, replicas,
                               x0_samples=x0_samples):
        b = len(pos)
        if sofar + b <= burn:
            sofar += b
            continue
        sl = pos[max(burn - sofar, 0):]
        w = None if weight_fn is None else weight_fn(sl)
        hist.add(sl, w)
        sofar += b
    return hist


# ---------------------------------------------------------------------------
# local-time functionals and stationary sampling
# ---------------------------------------------------------------------------

def sample_from_density(pair: StationaryPair, n: int, seed: int,
                        max_tries: int = 200) -> np.ndarray:
    """Rejection-sample start points from a stationary density."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    grid = pair.density(0.995 * np.sqrt(np.linspace(0, 1, 64))[:, None]
                        * np.exp(1j * TWO_PI * np.arange(128) / 128)[None, :])
    bound = 1.3 * float(np.max(grid))
    out = np.empty(n, dtype=complex)
    have = 0
    for _ in range(max_tries):
        m = max(2 * (n - have), 64)
        z = np.sqrt(rng.uniform(size=m)) * np.exp(1j * TWO_PI * rng.uniform(size=m))
        acc = rng.uniform(size=m) * bound < pair.density(z)
        take = z[acc][: n - have]
        out[have:have + len(take)] = take
        have += len(take)
        if have == n:
            return out
    raise InvalidInput("rejection sampling failed; density bound too loose")


def local_time_rate(path: DiskPath, g: BoundaryField) -> float:
    """Time-average of int g(X) dL along a path: the boundary-occupation
    functional whose stationary mean is int g h/2 over the circle."""
    dL = np.diff(path.local_time)
    if path.horizon <= 0:
        raise InvalidInput("zero-horizon path")
    hits = dL > 0
    if not np.any(hits):
        return 0.0
    ang = np.angle(path.positions[1:][hits]) % TWO_PI
    return float(np.sum(g.interp(ang) * dL[hits]) / path.horizon)


def local_time_rate_ensemble(theta: BoundaryField, g: BoundaryField,
                             pair: StationaryPair, dt: float, seed: int,
                             replicas: int, T: float = 1.0):
    """Replica estimate of E[int_0^T g(X) dL] from a stationary start.
    Returns (mean, stderr)."""
    starts = sample_from_density(pair, replicas, seed ^ 0x9E3779B9)
    res = simulate_ensemble(theta, 0.0, dt, T, seed, replicas,
                            boundary_weight=g, x0_samples=starts)
    vals = res.weighted_local_time
    return float(np.mean(vals)), float(np.std(vals) / np.sqrt(replicas))


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def mollify(theta: BoundaryField, k: int, tol: Tolerances = DEFAULT) -> BoundaryField:
    """Trace of the harmonic extension on the circle of radius 1 - 1/k.

    Produces a smooth angle field strictly inside (-pi/2, pi/2) whenever the
    input is not identically +-pi/2; the output converges weak-* to the input
    as k grows."""
    if theta.kind != FieldKind.ANGLE:
        raise InvalidInput("mollify expects an angle field")
    if abs(abs(theta.mean()) - HALF_PI) < 1e-12:
        raise NotInT("angle field is identically +-pi/2")
    if k < 2:
        raise InvalidInput("k must be >= 2")
    f = poisson_extend(theta, tol.n_modes)
    vals = f.boundary(theta.n_grid, radius=1.0 - 1.0 / k)
    return BoundaryField(np.clip(vals, -HALF_PI, HALF_PI), FieldKind.ANGLE)


# ---------------------------------------------------------------------------
# Cauchy limit experiment
# ---------------------------------------------------------------------------

@dataclass
class CauchyReport:
    t_values: list
    ks_distances: list
    p_values: list
    mu0: float
    replicas: int
    seed: int


def cauchy_limit_test(theta: BoundaryField, t_values, replicas: int,
                      seed: int, dt: float = 1e-3, x0: complex = 0.3,
                      tol: Tolerances = DEFAULT) -> CauchyReport:
    """Empirical law of (arg X_t)/t - rotation against the standard Cauchy.

    The winding rate of the reflected path about the origin has Cauchy
    fluctuations; the Kolmogorov-Smirnov distance to the standard Cauchy law
    is reported for each horizon and should shrink as t grows.

    Windings are read off the half-plane scheme, where the continuous
    argument is a plain coordinate: the direct disk walk truncates the
    near-origin loops that carry the heavy tail, at any step size.
    """
    from scipy import stats
    from .harmonic import angle_to_pair

    if replicas < 10:
        raise InvalidInput("needs at least 10 replicas")
    mu0 = angle_to_pair(theta, tol).rotation
    x0 = complex(x0)
    if abs(x0) <= 0 or abs(x0) > 1:
        raise InvalidInput("x0 must lie in the punctured closed disk")
    z0 = np.log(abs(x0)) + 1j * np.angle(x0)
    ks, ps = [], []
    for j, t in enumerate(t_values):
        _, y, _ = half_plane_terminal_states(theta, z0, dt, float(t),
                                             seed + 1000 * j, replicas)
        sample = (y - z0.imag + np.angle(x0)) / float(t) - mu0
        stat, p = stats.kstest(sample, "cauchy")
        ks.append(float(stat))
        ps.append(float(p))
    return CauchyReport(list(t_values), ks, ps, mu0, replicas, seed)
