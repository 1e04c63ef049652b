"""Winding functionals and path-space distances.

The continuous argument of X - z along a sampled path, its truncation that
removes whole-excursion windings beyond a threshold (restoring the law of
large numbers the raw argument violates), excursion decomposition, and an
approximate M1 metric built from monotone alignments of completed graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .disk import DiskPath
from .errors import InvalidInput, PointOnPath
from .harmonic import TWO_PI


# ---------------------------------------------------------------------------
# continuous argument
# ---------------------------------------------------------------------------

@dataclass
class WindingSeries:
    """Continuous unwrapped argument of X - z along a path."""

    times: np.ndarray
    values: np.ndarray
    removed: list = field(default_factory=list)   # (excursion start index, removed gap)

    def rate(self) -> float:
        span = self.times[-1] - self.times[0]
        return float((self.values[-1] - self.values[0]) / span)


def _arc_increment(from_angle: float, to_angle: float, sign: int, z: complex,
                   subdiv: int = 64) -> float:
    """Continuous argument change of (w - z) as w traverses the boundary arc
    from e^{i from} to e^{i to} in the given direction (+1 = CCW)."""
    if sign >= 0:
        sweep = (to_angle - from_angle) % TWO_PI
    else:
        sweep = -((from_angle - to_angle) % TWO_PI)
    t = from_angle + sweep * np.linspace(0.0, 1.0, subdiv + 1)
    w = np.exp(1j * t) - z
    steps = np.angle(w[1:] / w[:-1])
    return float(np.sum(steps))


def winding(path: DiskPath, z: complex = 0.0) -> WindingSeries:
    """Unwrapped continuous argument of X - z, with boundary jumps traversed
    along their recorded arcs."""
    pos = path.positions
    w = pos - complex(z)
    dmin = np.min(np.abs(w))
    if dmin < 1e-14:
        raise PointOnPath(f"path passes through the reference point (min dist {dmin:.1e})")
    inc = np.angle(w[1:] / w[:-1])
    for j in path.jumps:
        if not (0 <= j.index < len(inc)):
            raise InvalidInput(f"jump record at index {j.index} outside the path")
        inc[j.index] = _arc_increment(j.from_angle, j.to_angle, j.arc_sign, complex(z))
    vals = np.empty(len(pos))
    vals[0] = np.angle(w[0]) % TWO_PI
    np.cumsum(inc, out=vals[1:])
    vals[1:] += vals[0]
    return WindingSeries(path.times, vals)


# ---------------------------------------------------------------------------
# excursion decomposition
# ---------------------------------------------------------------------------

def excursion_intervals(path: DiskPath, boundary_tol: float = 1e-9,
                        min_steps: int = 2) -> list[tuple[int, int]]:
    """Boundary-to-boundary excursion index ranges (start, end), where both
    endpoints are boundary visits and the interior is strictly inside.
    Interior spells shorter than min_steps merge into the boundary set."""
    on_bdry = np.abs(path.positions) > 1.0 - boundary_tol
    out = []
    idx = np.nonzero(on_bdry)[0]
    if len(idx) < 2:
        return out
    for a, b in zip(idx[:-1], idx[1:]):
        if b - a > min_steps:
            out.append((int(a), int(b)))
    return out


def winding_star(ws: WindingSeries, excursions: list[tuple[int, int]],
                 threshold: float = TWO_PI) -> WindingSeries:
    """Remove the endpoint-to-endpoint argument gap of every excursion whose
    gap exceeds the threshold (default one full turn).

    The raw argument behaves like a Cauchy process and fails the law of large
    numbers; dropping the large whole-excursion windings restores it.
    """
    removed = []
    offsets = np.zeros(len(ws.values))
    prev_end = 0
    for a, b in sorted(excursions):
        if a < prev_end:
            raise InvalidInput("overlapping excursion intervals")
        prev_end = b
        gap = float(ws.values[b] - ws.values[a])
        if abs(gap) > threshold:
            removed.append((a, gap))
            offsets[b:] += gap
    return WindingSeries(ws.times, ws.values - offsets, removed)


@dataclass
class RotationRateEstimate:
    value: float
    stderr: float
    n_batches: int
    removed_windings: int


def rotation_rate(path: DiskPath, z: complex = 0.0,
                  n_batches: int = 32) -> RotationRateEstimate:
    """Truncated winding rate of X - z with a batch-means standard error."""
    ws = winding(path, z)
    star = winding_star(ws, excursion_intervals(path))
    n = len(star.values)
    if n < n_batches + 1:
        raise InvalidInput("path too short for batch means")
    edges = np.linspace(0, n - 1, n_batches + 1).astype(int)
    rates = np.diff(star.values[edges]) / np.diff(star.times[edges])
    se = float(np.std(rates, ddof=1) / np.sqrt(n_batches))
    return RotationRateEstimate(star.rate(), se, n_batches, len(star.removed))


# ---------------------------------------------------------------------------
# approximate M1 distance
# ---------------------------------------------------------------------------

def completed_graph(path: DiskPath, arc_subdiv: int = 24,
                    segment_gap: float | None = None):
    """Points (value, time) of the completed graph.

    Recorded boundary jumps are filled with their boundary arcs at frozen
    time.  When segment_gap is set, any remaining step whose value gap
    exceeds it is treated as a jump of a cadlag path and filled with the
    straight segment (the convention under which continuous steep ramps and
    steps become close)."""
    pos = path.positions
    times = path.times
    jump_at = {j.index: j for j in path.jumps}
    if not jump_at and segment_gap is None:
        return pos.copy(), times.copy()
    vals = []
    ts = []
    for k in range(len(pos)):
        vals.append(pos[k])
        ts.append(times[k])
        j = jump_at.get(k)
        if j is not None:
            if j.arc_sign >= 0:
                sweep = (j.to_angle - j.from_angle) % TWO_PI
            else:
                sweep = -((j.from_angle - j.to_angle) % TWO_PI)
            a = j.from_angle + sweep * np.linspace(0, 1, arc_subdiv + 2)[1:-1]
            vals.extend(np.exp(1j * a))
            ts.extend([times[k + 1]] * len(a))
        elif (segment_gap is not None and k + 1 < len(pos)
              and abs(pos[k + 1] - pos[k]) > segment_gap):
            w = np.linspace(0, 1, arc_subdiv + 2)[1:-1]
            vals.extend(pos[k] * (1 - w) + pos[k + 1] * w)
            ts.extend([times[k + 1]] * len(w))
    return np.asarray(vals, dtype=complex), np.asarray(ts, dtype=float)


def _downsample(vals: np.ndarray, ts: np.ndarray, budget: int):
    if len(vals) <= budget:
        return vals, ts
    idx = np.unique(np.linspace(0, len(vals) - 1, budget).astype(int))
    return vals[idx], ts[idx]


def m1_distance_points(vals_a: np.ndarray, times_a: np.ndarray,
                       vals_b: np.ndarray, times_b: np.ndarray,
                       budget: int = 1200) -> float:
    """Minimal sup-distance over monotone alignments of two (value, time)
    chains; the discrete surrogate of the M1 metric on completed graphs."""
    va, ta = _downsample(np.asarray(vals_a, dtype=complex),
                         np.asarray(times_a, dtype=float), budget)
    vb, tb = _downsample(np.asarray(vals_b, dtype=complex),
                         np.asarray(times_b, dtype=float), budget)
    return float(_kernels.minimax_alignment(
        va.real.astype(float), va.imag.astype(float), ta,
        vb.real.astype(float), vb.imag.astype(float), tb))


def m1_distance(path_a: DiskPath, path_b: DiskPath, T: float | None = None,
                budget: int = 1200, segment_gap: float | None = None) -> float:
    """Approximate M1 distance between two disk paths on a common horizon."""
    Ta, Tb = path_a.horizon, path_b.horizon
    if T is None:
        T = min(Ta, Tb)
    if Ta + 1e-12 < T or Tb + 1e-12 < T:
        raise InvalidInput(f"paths do not cover the horizon {T}")

    def clipped(p):
        v, t = completed_graph(p, segment_gap=segment_gap)
        keep = t <= T + 1e-12
        return v[keep], t[keep]

    va, ta = clipped(path_a)
    vb, tb = clipped(path_b)
    return m1_distance_points(va, ta, vb, tb, budget)
