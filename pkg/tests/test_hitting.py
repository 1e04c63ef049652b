import numpy as np
import pytest

from orbm import harmonic as H
from orbm.errors import ArcNotTangential, ArcTooShort, InvalidInput
from orbm.quadrature import Verdict, classify_shells

from oracles import inv_sqrt_density_coeffs

N = 512


def flat_pair(rotation=0.0):
    c = np.zeros(N + 1, dtype=complex)
    c[0] = 1 / np.pi
    return H.StationaryPair(H.HarmonicFn(c), rotation)


def semicircle_pair():
    c = np.full(N + 1, 2 / np.pi, dtype=complex)
    c[0] = 1 / np.pi
    return H.StationaryPair(H.HarmonicFn(c), 0.0)


def sqrt_pair():
    return H.StationaryPair(H.HarmonicFn(inv_sqrt_density_coeffs(N).astype(complex)), 0.0)


# ---------------------------------------------------------------------------
# hitting test
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("x", [0.0, 1.0, np.pi, 4.5])
def test_normal_reflection_misses_every_point(x):
    res = H.hitting_test(flat_pair(), x)
    assert res.verdict is Verdict.DIVERGENT
    # integrand is exactly 1/(1-r): each dyadic shell contributes log 2
    assert np.allclose(res.shells, np.log(2.0), atol=1e-10)


def test_normal_reflection_with_rotation_still_divergent():
    res = H.hitting_test(flat_pair(2.0), 0.0)
    assert res.verdict is Verdict.DIVERGENT
    assert np.allclose(res.shells, np.log(2.0) / np.sqrt(5.0), atol=1e-10)


def test_inverse_sqrt_density_hits_its_singularity():
    res = H.hitting_test(sqrt_pair(), 0.0)
    assert res.verdict is Verdict.FINITE
    # integrand ~ (1-r)^{-1/2}: shell ratios near 2^{-1/2}
    ratios = res.shells[1:4] / res.shells[:3]
    assert np.allclose(ratios, 2 ** -0.5, atol=0.02)
    # exact integral of (1-r)^{-1/2} over (0,1) is 2
    assert res.estimate == pytest.approx(2.0, rel=0.05)


def test_inverse_sqrt_density_misses_opposite_point():
    res = H.hitting_test(sqrt_pair(), np.pi)
    assert res.verdict is Verdict.DIVERGENT


def test_atom_density_hits_its_atom():
    res = H.hitting_test(semicircle_pair(), 0.0)
    assert res.verdict is Verdict.FINITE


def test_r_min_validation():
    with pytest.raises(InvalidInput):
        H.hitting_test(flat_pair(), 0.0, r_min=1.5)


# ---------------------------------------------------------------------------
# boundary-measure test
# ---------------------------------------------------------------------------

def test_uniform_sigma_diverges():
    # the reciprocal boundary measure of normal reflection: uniform density 1/2
    sig = H.SigmaMeasure(H.BoundaryField.constant(0.5, 2048, H.FieldKind.DENSITY))
    res = H.measure_singularity_test(sig, 0.0)
    assert res.verdict is Verdict.DIVERGENT


@pytest.mark.parametrize("p", [0.3, 0.5, 0.8])
def test_vanishing_density_is_integrable(p):
    t = 2 * np.pi * np.arange(2048) / 2048
    rho = np.abs(2 * np.sin(0.5 * t)) ** p
    sig = H.SigmaMeasure(H.BoundaryField(rho, H.FieldKind.DENSITY))
    assert H.measure_singularity_test(sig, 0.0).verdict is Verdict.FINITE
    # away from the zero the density is positive: divergent there
    assert H.measure_singularity_test(sig, np.pi).verdict is Verdict.DIVERGENT


def test_atom_away_from_test_point():
    sig = H.SigmaMeasure(None, atoms=((np.pi, np.pi),))
    res = H.measure_singularity_test(sig, 0.0)
    assert res.verdict is Verdict.FINITE
    assert res.estimate == pytest.approx(np.pi / 2)


def test_atom_at_test_point_routes_through_hitting():
    sig = H.SigmaMeasure(None, atoms=((0.0, 1.0),))
    with pytest.raises(InvalidInput):
        H.measure_singularity_test(sig, 0.0)
    res = H.measure_singularity_test(sig, 0.0, pair=semicircle_pair())
    assert res.routed_through_hitting
    assert res.verdict is Verdict.FINITE


def test_zero_mass_atom_ignored():
    sig = H.SigmaMeasure(H.BoundaryField.constant(0.5, 1024, H.FieldKind.DENSITY),
                         atoms=((0.0, 0.0),))
    res = H.measure_singularity_test(sig, 0.0)
    assert not res.routed_through_hitting
    assert res.verdict is Verdict.DIVERGENT


def test_concordance_of_both_tests():
    """The two classifiers agree on the three canonical cases."""
    # normal reflection <-> uniform reciprocal measure
    hit = H.hitting_test(flat_pair(), 0.0)
    sig = H.SigmaMeasure(H.BoundaryField.constant(0.5, 2048, H.FieldKind.DENSITY))
    meas = H.measure_singularity_test(sig, 0.0)
    assert hit.verdict == meas.verdict == Verdict.DIVERGENT

    # inverse-sqrt density: reciprocal measure has density pi*Re sqrt(1-w)
    hit2 = H.hitting_test(sqrt_pair(), 0.0)
    t = 2 * np.pi * np.arange(2048) / 2048
    dens = np.pi * np.sqrt(2 * np.abs(np.sin(0.5 * t))) * np.cos((t - np.pi) / 4)
    sig2 = H.SigmaMeasure(H.BoundaryField(np.maximum(dens, 0.0), H.FieldKind.DENSITY))
    meas2 = H.measure_singularity_test(sig2, 0.0)
    assert hit2.verdict == meas2.verdict == Verdict.FINITE

    # boundary atom: reciprocal measure is the atom pi at the opposite point
    hit3 = H.hitting_test(semicircle_pair(), 0.0)
    sig3 = H.SigmaMeasure(None, atoms=((np.pi, np.pi),))
    meas3 = H.measure_singularity_test(sig3, 0.0)
    assert hit3.verdict == meas3.verdict == Verdict.FINITE


def test_classifier_never_silent():
    rep = classify_shells(np.array([1.0, 0.9, 1.1, 0.2, 1.3, 0.1, 1.0, 0.9, 1.1]),
                          tol=1e-4)
    assert rep.verdict is Verdict.INCONCLUSIVE


# ---------------------------------------------------------------------------
# tangential arcs
# ---------------------------------------------------------------------------

def test_semicircle_arc_density_vanishes():
    # resolution must cover the probe radius: modes ~ 16/(1 - 0.999)
    from orbm.config import DEFAULT
    tol = DEFAULT.replace(n_grid=65536, n_modes=16384)
    th = H.BoundaryField.semicircle_split(65536)
    rep = H.tangential_arc_check(th, (0.05, np.pi - 0.05), probe_radius=0.999,
                                 tol=tol)
    assert rep.sign == -1.0
    # closed form along the mid-arc radius: h(0.999i) = (1/pi)(1-r^2)/(1+r^2)
    assert rep.max_h_near_boundary < 5e-3
    assert rep.zero_angle is None


def test_smooth_angles_not_tangential():
    th = H.BoundaryField.fourier([0.4])
    with pytest.raises(ArcNotTangential):
        H.tangential_arc_check(th, (0.1, 1.0))


def test_short_arc_rejected():
    th = H.BoundaryField.semicircle_split(2048)
    with pytest.raises(ArcTooShort):
        H.tangential_arc_check(th, (0.1, 0.1 + 2 * np.pi / 2048))


def test_switch_point_zero_located():
    """Angle field -pi/2 then +pi/2 with the switch inside the arc: the
    analytic function has its one zero at the switch point."""
    from orbm.config import DEFAULT
    n, modes = 16384, 4096
    t = 2 * np.pi * np.arange(n) / n
    t0 = np.pi / 2
    vals = np.where(((t - t0) % (2 * np.pi)) < np.pi, np.pi / 2, -np.pi / 2)
    th = H.BoundaryField(vals, H.FieldKind.ANGLE)
    tol = DEFAULT.replace(n_grid=n, n_modes=modes)
    rep = H.tangential_arc_check(th, (t0 - 0.8, t0 + 0.8), probe_radius=0.99,
                                 tol=tol)
    assert rep.zero_angle is not None
    assert abs(rep.zero_angle - t0) < 2 * np.pi / n * 4
