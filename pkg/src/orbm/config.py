"""Numerical knobs, collected in one structure.

Every tolerance and grid size used by the analytic layer lives here so that
the CLI can read them from a config file and tests can pin them explicitly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # spectral representation
    n_grid: int = 2048          # boundary samples (power of two)
    n_modes: int = 512          # truncation order of analytic power series
    eps_bdry: float = 1e-4      # boundary values are read at radius 1 - eps_bdry

    # class-membership checks on a dense grid of the disk
    membership_margin: float = 1e-9
    membership_radii: int = 64

    # degenerate-angle guard: tan(theta(0)) blows up past this
    degenerate_angle_tol: float = 1e-9

    # dyadic-shell divergence classification (hitting test and L1 integrals)
    shell_tol: float = 1e-4
    shell_ratio: float = 0.95
    shell_window: int = 8
    shell_depth_limit: float = 1e-12   # never refine past radius 1 - this

    # Moebius composition: power series are recovered by FFT on this circle
    compose_radius: float = 0.99

    # identity checks
    normalization_tol: float = 1e-10
    consistency_tol: float = 1e-8

    def replace(self, **kw) -> "Tolerances":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Tolerances":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**d)


DEFAULT = Tolerances()
