import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbm import harmonic as H
from orbm.config import DEFAULT
from orbm.errors import (
    DegenerateAngle,
    InvalidInput,
    InvalidMobius,
    NotInR,
)

from oracles import poisson_quadrature, semicircle_density

rng = np.random.default_rng(20240817)


def random_points(n, rmax=0.9, seed=0):
    g = np.random.default_rng(seed)
    return rmax * np.sqrt(g.uniform(size=n)) * np.exp(2j * np.pi * g.uniform(size=n))


# ---------------------------------------------------------------------------
# Poisson extension
# ---------------------------------------------------------------------------

def test_poisson_extend_constant():
    f = H.poisson_extend(H.BoundaryField.constant(0.37, 512))
    z = random_points(20, seed=1)
    assert np.allclose(f(z), 0.37, atol=1e-13)
    assert f.at0() == pytest.approx(0.37)


def test_poisson_extend_cos_is_re_z():
    b = H.BoundaryField.from_function(np.cos, 1024, H.FieldKind.GENERIC)
    f = H.poisson_extend(b)
    z = random_points(50, seed=2)
    assert np.allclose(f(z), z.real, atol=1e-12)


def test_poisson_extend_matches_kernel_quadrature():
    g = np.random.default_rng(3)
    b = H.BoundaryField.fourier(0.1 * g.normal(size=8), 0.1 * g.normal(size=8),
                                mean=0.2, kind=H.FieldKind.GENERIC)
    f = H.poisson_extend(b)
    for z in random_points(100, seed=4):
        assert abs(f(z) - poisson_quadrature(b.values, z)) < 1e-9


def test_poisson_extend_rejects_nonfinite():
    b = H.BoundaryField.constant(0.0, 64)
    b.values[3] = np.nan
    with pytest.raises(InvalidInput):
        H.poisson_extend(b)


def test_mean_value_at_origin():
    g = np.random.default_rng(5)
    vals = g.normal(size=256)
    f = H.poisson_extend(H.BoundaryField(vals, H.FieldKind.GENERIC))
    assert f.at0() == pytest.approx(vals.mean(), abs=1e-13)


# ---------------------------------------------------------------------------
# conjugation
# ---------------------------------------------------------------------------

def test_conjugate_monomial():
    n = 5
    c = np.zeros(8, dtype=complex)
    c[n] = 1.0
    f = H.HarmonicFn(c)                  # Re z^n
    g = H.conjugate(f)
    z = random_points(30, seed=6)
    assert np.allclose(g(z), (z ** n).imag, atol=1e-13)
    assert g.coeffs[n] == pytest.approx(-1j)


def test_conjugate_constant_vanishes():
    f = H.HarmonicFn(np.array([2.5], dtype=complex))
    assert np.allclose(H.conjugate(f).coeffs, 0.0)


def test_double_conjugation_identity():
    g = np.random.default_rng(7)
    c = (g.normal(size=12) + 1j * g.normal(size=12)).astype(complex)
    c[0] = g.normal()
    f = H.HarmonicFn(c)
    ff = H.conjugate(H.conjugate(f))
    # conj(conj(f)) = f(0) - f
    z = random_points(40, seed=8)
    assert np.allclose(ff(z), f.at0() - f(z), atol=1e-12)
    assert np.allclose(ff.coeffs[1:], -f.coeffs[1:])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-3, 3), st.floats(-3, 3))
def test_conjugate_linear(seed, a, b):
    g = np.random.default_rng(seed)
    c1 = g.normal(size=9) + 1j * g.normal(size=9)
    c2 = g.normal(size=9) + 1j * g.normal(size=9)
    c1[0], c2[0] = c1[0].real, c2[0].real
    f1, f2 = H.HarmonicFn(c1), H.HarmonicFn(c2)
    lhs = H.conjugate(H.HarmonicFn(a * c1 + b * c2))
    rhs = a * H.conjugate(f1).coeffs + b * H.conjugate(f2).coeffs
    assert np.allclose(lhs.coeffs, rhs, atol=1e-9)


# ---------------------------------------------------------------------------
# angle field -> stationary pair
# ---------------------------------------------------------------------------

def test_zero_angle_gives_flat_density():
    p = H.angle_to_pair(H.BoundaryField.constant(0.0))
    assert p.rotation == 0.0
    assert np.pi * p.density.at0() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(p.density.coeffs[1:], 0.0, atol=1e-14)


def test_constant_angle_fixed_point():
    p = H.angle_to_pair(H.BoundaryField.constant(np.pi / 6))
    assert p.rotation == pytest.approx(np.tan(np.pi / 6), abs=1e-12)
    assert np.allclose(p.density.coeffs[1:], 0.0, atol=1e-14)
    assert p.density.at0() == pytest.approx(1 / np.pi, abs=1e-14)


def test_semicircle_split_closed_form():
    tol = DEFAULT.replace(n_grid=16384, n_modes=4096)
    p = H.angle_to_pair(H.BoundaryField.semicircle_split(16384), tol)
    assert p.rotation == pytest.approx(0.0, abs=1e-12)
    for z in (0.0, 0.5, 0.5j):
        assert abs(p.density(z) - semicircle_density(z)) < 1e-6


def test_degenerate_mean_angle_raises():
    vals = np.full(512, np.pi / 2)
    vals[0] = np.pi / 2 - 1e-13        # not identically pi/2, but mean is
    with pytest.raises(DegenerateAngle):
        H.angle_to_pair(H.BoundaryField(vals, H.FieldKind.ANGLE))


# ---------------------------------------------------------------------------
# stationary pair -> angle field
# ---------------------------------------------------------------------------

def test_flat_density_with_rotation_one():
    p = H.StationaryPair(H.HarmonicFn(np.array([1 / np.pi], dtype=complex)), 1.0)
    back = H.pair_to_angle(p, 512)
    assert np.allclose(back.values, np.pi / 4, atol=1e-12)


def test_round_trip_smooth_field():
    th = H.BoundaryField.fourier([0.4], [0.0, 0.0, 0.2])
    back = H.pair_to_angle(H.angle_to_pair(th), th.n_grid)
    assert np.max(np.abs(back.values - th.values)) < 1e-6


def test_lens_density_angles_on_evaluation_circle():
    # normalized version of the k-lobed density 1 + Re z^k / 2
    k = 4
    c = np.zeros(k + 1, dtype=complex)
    c[0] = 1 / np.pi
    c[k] = 0.5 / np.pi
    p = H.StationaryPair(H.HarmonicFn(c), 0.0)
    th = H.pair_to_angle(p, 2048)
    t = th.angles
    z = np.exp(1j * t)              # de-attenuated samples live on the boundary
    expected = -np.angle(1.0 + 0.5 * z ** k)
    assert np.max(np.abs(th.values - expected)) < 1e-9


def test_round_trip_pair_direction():
    th = H.BoundaryField.fourier([0.3, 0.0, 0.1], [0.0, 0.25])
    p = H.angle_to_pair(th)
    p2 = H.angle_to_pair(H.pair_to_angle(p, th.n_grid))
    assert np.max(np.abs(p2.density.coeffs - p.density.coeffs)) < 1e-9
    assert p2.rotation == pytest.approx(p.rotation, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_round_trip_random_smooth_fields(seed):
    g = np.random.default_rng(seed)
    deg = int(g.integers(1, 10))
    sc = g.normal(size=deg) / (1 + np.arange(deg)) ** 2
    cc = g.normal(size=deg) / (1 + np.arange(deg)) ** 2
    raw = H.BoundaryField.fourier(sc, cc, mean=float(g.uniform(-0.5, 0.5)),
                                  kind=H.FieldKind.GENERIC)
    scale = min(1.0, 1.35 / max(np.max(np.abs(raw.values)), 1e-9))
    th = H.BoundaryField(raw.values * scale, H.FieldKind.ANGLE)
    back = H.pair_to_angle(H.angle_to_pair(th), th.n_grid)
    assert np.max(np.abs(back.values - th.values)) < 1e-6


# ---------------------------------------------------------------------------
# rotation fields
# ---------------------------------------------------------------------------

def test_rotation_field_constant_pair():
    p = H.StationaryPair(H.HarmonicFn(np.array([1 / np.pi], dtype=complex)), 2.5)
    mu = H.rotation_field(p)
    z = random_points(10, seed=9)
    assert np.allclose(mu(z), 2.5, atol=1e-14)


def test_rotation_field_semicircle_value():
    # density (1/pi) Re((1+z)/(1-z)) with rotation 0: rate field -Im((1+z)/(1-z))
    N = 512
    c = np.full(N + 1, 2 / np.pi, dtype=complex)
    c[0] = 1 / np.pi
    p = H.StationaryPair(H.HarmonicFn(c), 0.0)
    mu = H.rotation_field(p)
    z = 0.5j
    oracle = -((1 + z) / (1 - z)).imag
    assert oracle == pytest.approx(-0.8)
    assert mu(z) == pytest.approx(oracle, abs=1e-9)


def test_rate_equals_pi_h_tan_theta():
    th = H.BoundaryField.fourier([0.35], [0.0, 0.15])
    p = H.angle_to_pair(th)
    mu = H.rotation_field(p)
    z = random_points(50, seed=10)
    F = p.density.analytic(z) - 1j * p.rotation / np.pi
    theta_z = -np.angle(F)
    assert np.max(np.abs(mu(z) - np.pi * p.density(z) * np.tan(theta_z))) < 1e-8


def test_pair_from_rotation_constant():
    m = H.RotationField(H.HarmonicFn(np.array([3.0], dtype=complex)))
    p = H.pair_from_rotation(m)
    assert p.rotation == 3.0
    assert np.allclose(p.density.coeffs, [1 / np.pi])


@pytest.mark.parametrize("b,ok", [(0.5, True), (0.999, True),
                                  (1.001, False), (1.5, False)])
def test_admissible_slope_interval(b, ok):
    m = H.HarmonicFn(np.array([0.0, b], dtype=complex))
    if ok:
        H.pair_from_rotation(m)
    else:
        with pytest.raises(NotInR):
            H.pair_from_rotation(m)


def test_rotation_round_trips():
    th = H.BoundaryField.fourier([0.4], [0.0, 0.0, 0.2])
    p = H.angle_to_pair(th)
    mu = H.rotation_field(p)
    p2 = H.pair_from_rotation(mu)
    assert np.max(np.abs(p2.density.coeffs - p.density.coeffs)) < 1e-9
    assert p2.rotation == pytest.approx(p.rotation, abs=1e-12)
    mu2 = H.rotation_field(p2)
    assert np.max(np.abs(mu2.fn.coeffs - mu.fn.coeffs)) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_rotation_identity_chain_random(seed):
    g = np.random.default_rng(seed)
    deg = int(g.integers(1, 8))
    c = (g.normal(size=deg + 1) + 1j * g.normal(size=deg + 1)) * 0.1
    c /= (1 + np.arange(deg + 1)) ** 2
    c[0] = g.normal() * 0.5
    m = H.HarmonicFn(c.astype(complex))
    try:
        p = H.pair_from_rotation(m)
    except NotInR:
        return
    m2 = H.rotation_field(p)
    assert np.max(np.abs(m2.fn.coeffs - m.coeffs)) < 1e-9


# ---------------------------------------------------------------------------
# oscillation bounds
# ---------------------------------------------------------------------------

def test_oscillation_re_z():
    ob = H.oscillation_bounds(H.HarmonicFn(np.array([0, 1], dtype=complex)))
    assert ob.k_minus == pytest.approx(-1.0, abs=1e-12)
    assert ob.k_plus == pytest.approx(1.0, abs=1e-12)
    assert (ob.b_lo, ob.b_hi) == pytest.approx((-1.0, 1.0), abs=1e-9)


def test_oscillation_constant_unbounded():
    ob = H.oscillation_bounds(H.HarmonicFn(np.array([4.0], dtype=complex)))
    assert ob.unbounded
    assert ob.k_minus == 0.0 and ob.k_plus == 0.0


def test_oscillation_re_z_squared():
    ob = H.oscillation_bounds(H.HarmonicFn(np.array([0, 0, 1], dtype=complex)))
    assert ob.k_minus == pytest.approx(-1.0, abs=1e-12)
    assert ob.k_plus == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Moebius transfer
# ---------------------------------------------------------------------------

def test_mobius_identity_is_identity():
    th = H.BoundaryField.fourier([0.3])
    p0 = H.angle_to_pair(th)
    p1 = H.mobius_transfer(th, 0.0, 0.0)
    z = random_points(30, seed=11)
    assert np.max(np.abs(p1.density(z) - p0.density(z))) < 1e-12
    assert p1.rotation == pytest.approx(p0.rotation, abs=1e-12)


def test_mobius_constant_invariant():
    th = H.BoundaryField.constant(0.4)
    p = H.mobius_transfer(th, 0.3 - 0.2j, 1.1)
    z = random_points(20, seed=12)
    assert np.max(np.abs(p.density(z) - 1 / np.pi)) < 1e-10
    assert p.rotation == pytest.approx(np.tan(0.4), abs=1e-10)


def test_mobius_transfer_matches_direct_recomputation():
    th = H.BoundaryField.fourier([0.3])
    w0, rot = 0.4, 0.7
    p_formula = H.mobius_transfer(th, w0, rot)
    p_direct = H.angle_to_pair(H.compose_theta_with_mobius(th, w0, rot))
    z = random_points(60, seed=13)
    assert np.max(np.abs(p_formula.density(z) - p_direct.density(z))) < 1e-6
    assert p_formula.rotation == pytest.approx(p_direct.rotation, abs=1e-6)


def test_mobius_rejects_outside_disk():
    with pytest.raises(InvalidMobius):
        H.mobius_transfer(H.BoundaryField.constant(0.1), 1.0, 0.0)


def test_conjugate_composition_law():
    # conjugate(f o phi) = conjugate(f) o phi - conjugate(f)(phi(0))
    g = np.random.default_rng(14)
    b = H.BoundaryField.fourier(0.2 * g.normal(size=5), 0.2 * g.normal(size=5),
                                kind=H.FieldKind.GENERIC)
    f = H.poisson_extend(b)
    w0, rot = 0.35 + 0.1j, 0.6
    ang = H.mobius_boundary_angles(b.angles, w0, rot)
    comp = H.poisson_extend(H.BoundaryField(b.interp(ang), H.FieldKind.GENERIC))
    lhs = H.conjugate(comp)
    ftil = H.conjugate(f)
    phi0 = -np.exp(1j * rot) * w0
    z = random_points(40, rmax=0.8, seed=15)
    phi_z = np.exp(1j * rot) * (z - w0) / (1 - np.conj(w0) * z)
    rhs = ftil(phi_z) - ftil(phi0)
    assert np.max(np.abs(lhs(z) - rhs)) < 1e-6


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_boundary_field_dict_round_trip():
    b = H.BoundaryField.fourier([0.2], [0.1], mean=0.05)
    b2 = H.BoundaryField.from_dict(b.to_dict())
    assert b2.kind == b.kind
    assert np.array_equal(b2.values, b.values)


def test_harmonic_fn_dict_round_trip():
    f = H.poisson_extend(H.BoundaryField.fourier([0.2], [0.1]))
    f2 = H.HarmonicFn.from_dict(f.to_dict())
    assert np.array_equal(f2.coeffs, f.coeffs)


def test_power_of_two_grid_required():
    with pytest.raises(InvalidInput):
        H.BoundaryField(np.zeros(100))


def test_angle_range_enforced():
    with pytest.raises(InvalidInput):
        H.BoundaryField(np.full(64, 2.0), H.FieldKind.ANGLE)
