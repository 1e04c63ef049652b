import numpy as np
import pytest
from scipy import stats

from orbm import disk as D
from orbm import harmonic as H
from orbm.errors import InvalidInput, InvalidStep, NotInT, UseErbmModule

from oracles import trapezoid_circle

FLAT = H.BoundaryField.constant(0.0)
WAVY = H.BoundaryField.fourier([0.5])


def test_zero_horizon_path():
    p = D.simulate(WAVY, 0.3 + 0.1j, 1e-3, 0.0, seed=1)
    assert len(p.positions) == 1
    assert p.positions[0] == 0.3 + 0.1j
    assert p.local_time[0] == 0.0


def test_path_invariants():
    p = D.simulate(WAVY, 0.9, 1e-3, 3.0, seed=2)
    p.check_invariants()
    assert np.max(np.abs(p.positions)) <= 1.0 + 1e-12
    dL = np.diff(p.local_time)
    assert np.all(dL >= 0)
    inside = np.abs(p.positions[1:]) < 1 - 1e-9
    assert not np.any(dL[inside] > 0)
    assert p.local_time[-1] > 0        # the path does reflect over 3 time units


def test_tangential_angles_rejected():
    th = H.BoundaryField.constant(np.pi / 2 - 1e-8)
    with pytest.raises(UseErbmModule):
        D.simulate(th, 0.0, 1e-3, 1.0)


def test_step_validation():
    with pytest.raises(InvalidStep):
        D.simulate(FLAT, 0.0, 0.5, 1.0)
    with pytest.raises(InvalidStep):
        D.simulate(FLAT, 0.0, 1e-3, 1e9)
    with pytest.raises(InvalidInput):
        D.simulate(FLAT, 1.5, 1e-3, 1.0)


def test_radial_law_matches_bessel_oracle():
    """|X| is the reflected 2-d Bessel process: two-sample KS against the
    independent 1-d scheme."""
    res = D.simulate_ensemble(FLAT, 0.5, 2.5e-4, 5.0, seed=3, replicas=3000)
    rb, lb = D.simulate_radial_bessel(0.5, 2.5e-4, 5.0, seed=4, replicas=3000)
    assert stats.ks_2samp(np.abs(res.positions), rb).pvalue > 0.01
    assert stats.ks_2samp(res.local_time, lb).pvalue > 0.01


def test_radial_pair_independent_of_angles():
    res0 = D.simulate_ensemble(FLAT, 0.5, 1e-3, 5.0, seed=5, replicas=3000)
    res1 = D.simulate_ensemble(WAVY, 0.5, 1e-3, 5.0, seed=6, replicas=3000)
    assert stats.ks_2samp(np.abs(res0.positions), np.abs(res1.positions)).pvalue > 0.01
    assert stats.ks_2samp(res0.local_time, res1.local_time).pvalue > 0.01


def test_half_plane_image_stays_in_disk():
    hp = D.simulate_half_plane(H.BoundaryField.constant(0.3), -0.4, 1e-3, 4.0, seed=7)
    assert np.max(hp.positions.real) <= 0.0
    assert np.max(np.abs(np.exp(hp.positions))) <= 1.0 + 1e-12
    dp = hp.to_disk(1e-3)
    dp.check_invariants()


def test_cross_scheme_terminal_marginals():
    th = H.BoundaryField.constant(0.4)
    img = D.half_plane_marginals(th, np.log(0.5), 1e-3, 3.0, seed=8, replicas=2500)
    direct = D.simulate_ensemble(th, 0.5, 1e-3, 3.0, seed=9, replicas=2500)
    assert stats.ks_2samp(img.real, direct.positions.real).pvalue > 0.01
    assert stats.ks_2samp(img.imag, direct.positions.imag).pvalue > 0.01


def test_uniform_occupation_within_mc_bands():
    hist = D.occupation_stream(FLAT, 0.3, 2.5e-3, 1_500_000, seed=10, nr=6, nt=6)
    p = hist.probabilities()
    # each equal-area cell holds 1/36 of the stationary mass
    n_eff = 1_500_000 * 2.5e-3 / 0.3       # decorrelation time about 0.3
    sigma = np.sqrt((1 / 36) * (1 - 1 / 36) / n_eff)
    assert np.max(np.abs(p - 1 / 36)) < 5 * sigma + 0.15 / 36


def test_occupation_density_requires_long_path():
    p = D.simulate(FLAT, 0.3, 1e-3, 0.05, seed=11)
    with pytest.raises(InvalidInput):
        D.occupation_density(p)


def test_local_time_rate_zero_weight():
    p = D.simulate(WAVY, 0.5, 1e-3, 2.0, seed=12)
    g0 = H.BoundaryField.constant(0.0, kind=H.FieldKind.GENERIC)
    assert D.local_time_rate(p, g0) == 0.0


def test_local_time_unit_rate():
    pair = H.angle_to_pair(FLAT)
    g1 = H.BoundaryField.constant(1.0, kind=H.FieldKind.GENERIC)
    m, se = D.local_time_rate_ensemble(FLAT, g1, pair, 1e-3, 13, 2500)
    assert 0.9 < m < 1.1
    assert abs(m - 1.0) < 4 * se + 0.03    # discretization allowance


def test_tangent_weight_recovers_rotation_number():
    th = H.BoundaryField.constant(0.3)
    pair = H.angle_to_pair(th)
    g = H.BoundaryField(np.tan(th.values), H.FieldKind.GENERIC)
    m, se = D.local_time_rate_ensemble(th, g, pair, 1e-3, 14, 2500)
    assert abs(m - np.tan(0.3)) < 3 * se + 0.01


def test_stationary_sampler_matches_density():
    pair = H.angle_to_pair(WAVY)
    z = D.sample_from_density(pair, 4000, seed=15)
    # angular marginal of h: mean of h over radius weighted by r dr
    t = np.angle(z) % (2 * np.pi)
    def angular_cdf(a):
        # h(re^it) = 1/pi + Im-part structure; integrate numerically
        rr = np.linspace(0, 1, 200)
        dens = [np.trapezoid(pair.density(rr * np.exp(1j * ang)) * rr, rr)
                for ang in np.linspace(0, 2 * np.pi, 129)]
        cdf = np.cumsum(dens) / np.sum(dens)
        return np.interp(a, np.linspace(0, 2 * np.pi, 129), np.concatenate([[0], cdf[1:]]))
    u = angular_cdf(t)
    assert stats.kstest(u, "uniform").pvalue > 0.005


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def test_mollify_continuous_converges_uniformly():
    th = H.BoundaryField.fourier([0.4], [0.0, 0.2])
    mol = D.mollify(th, 64)
    # modulus of continuity of theta at scale 1/64 bounds the gap
    d = np.max(np.abs(np.diff(th.values)))  # per-cell increment
    omega = 64 * d * (th.n_grid / (2 * np.pi) / 64 + 2)
    assert np.max(np.abs(mol.values - th.values)) < max(0.6 / 64 * 3, omega)


def test_mollify_constant_fixed_point():
    th = H.BoundaryField.constant(0.3)
    for k in (2, 16, 256):
        assert np.allclose(D.mollify(th, k).values, 0.3, atol=1e-12)


def test_mollify_strictly_oblique_and_weak_star():
    th = H.BoundaryField.semicircle_split(2048)
    mol16 = D.mollify(th, 16)
    assert np.max(np.abs(mol16.values)) < np.pi / 2
    # weak-* pairing against cos t converges
    pair_target = trapezoid_circle(lambda t: np.cos(t) * np.interp(
        t, th.angles, th.values))
    mol256 = D.mollify(th, 256)
    pair_256 = float(np.mean(np.cos(mol256.angles) * mol256.values))
    assert abs(pair_256 - pair_target) < 1e-2


def test_mollify_rejects_fully_tangential():
    th = H.BoundaryField.constant(np.pi / 2)
    with pytest.raises(NotInT):
        D.mollify(th, 8)


def test_mollify_weak_star_eight_test_functions():
    th = H.BoundaryField.semicircle_split(2048)
    t = th.angles
    tests = [np.cos((k // 2 + 1) * t) if k % 2 == 0 else np.sin((k // 2 + 1) * t)
             for k in range(8)]
    target = [float(np.mean(f * th.values)) for f in tests]
    got = []
    for k in (64, 256, 1024):
        mol = D.mollify(th, k)
        got.append([float(np.mean(f * mol.values)) for f in tests])
    err = [max(abs(a - b) for a, b in zip(g, target)) for g in got]
    assert err[-1] < 5e-3
    assert err[2] <= err[0] + 1e-12


# ---------------------------------------------------------------------------
# Cauchy limit (small-budget sanity; the full check runs in acceptance)
# ---------------------------------------------------------------------------

def test_cauchy_limit_small_budget():
    rep = D.cauchy_limit_test(FLAT, [40.0], 400, seed=16, dt=2e-3)
    assert rep.ks_distances[0] < 0.12
    assert rep.mu0 == 0.0
