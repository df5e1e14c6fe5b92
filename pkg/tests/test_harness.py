from __future__ import annotations

import numpy as np
import pytest

from evbounds import GridSpec
from evbounds.errors import SupportError
from evbounds.harness import (
    BoundReport,
    ExtNormResult,
    McStats,
    check_aad_1d,
    check_evsum,
    check_extnorm,
    check_klt_det,
    check_schatten_decay,
    check_sector,
    check_tail,
    check_thm1,
    check_thm3,
    concentration_tail,
    evsum_sweep,
    ext_norm_samples,
    deterministic_ext_norm,
    fit_scaling,
    mc_extension_norm,
    schatten_campaign,
    stein_tomas_spread,
)
from evbounds.potential import PotentialSpec, lq_norm, sample_potential, weighted_sup_norm
from evbounds.randomize import OmegaSpec
from evbounds.spectra import (
    SpectralPoint,
    SpectrumFilter,
    eigenvalues_dense,
    filter_discrete,
    hamiltonian_matrix,
)


def _pt(z, mult=1):
    return SpectralPoint(z=complex(z), multiplicity=mult, residual=0.0)


def _discrete_points(gs, amplitude, margin=0.5, R=1.0, kappa=None):
    # kappa=1 drops band states blurred upward by a dissipative well; the
    # delta margin alone cannot separate them once amp * 2R / L ~ margin.
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=amplitude, R=R), gs)
    pts = eigenvalues_dense(hamiltonian_matrix(gs, field))
    filt = SpectrumFilter(band=(0.0, np.inf), essential_margin=margin, kappa=kappa)
    return filter_discrete(pts, filt), field


def _omega(h=1.0, seed=2026, index=0):
    return OmegaSpec(h=h, distribution="bernoulli", master_seed=seed, realization_index=index)


def test_aad_vacuous_pass():
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=0.0), gs)
    report = check_aad_1d([], field)
    assert report.vacuous and report.passed
    assert report.lhs == 0.0


def test_aad_real_well():
    gs = GridSpec(d=1, L=16.0, N=128)
    points, field = _discrete_points(gs, 2.0)
    report = check_aad_1d(points, field)
    assert report.rhs_raw == pytest.approx(2.0, abs=0.2)  # half of the L1 norm
    # sqrt of the continuum well depth, up to the sharp-edge sampling bias
    assert report.lhs == pytest.approx(1.099, abs=0.05)
    assert report.margin < 1.0 and report.passed


def test_aad_imaginary_well():
    gs = GridSpec(d=1, L=16.0, N=128)
    points, field = _discrete_points(gs, 4.0j, kappa=1.0)
    report = check_aad_1d(points, field)
    assert not report.vacuous
    assert report.lhs <= 4.0 * 1.01
    assert 0.0 < report.margin <= 1.0


def test_aad_needs_one_dimension():
    gs = GridSpec(d=2, L=8.0, N=16)
    field = sample_potential(PotentialSpec(kind="indicator_ball"), gs)
    with pytest.raises(ValueError):
        check_aad_1d([], field)


def test_klt_coincides_with_aad_at_q_one():
    gs = GridSpec(d=1, L=16.0, N=128)
    points, field = _discrete_points(gs, 2.0 + 1.0j)
    aad = check_aad_1d(points, field)
    klt = check_klt_det(points, field, q=1.0)
    assert klt.lhs == pytest.approx(aad.lhs, rel=1e-12)
    assert klt.margin == pytest.approx(aad.margin, rel=1e-12)


def test_klt_vacuous():
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=0.0), gs)
    assert check_klt_det([], field, q=1.0).passed


def test_klt_two_dimensional_margin():
    gs = GridSpec(d=2, L=8.0, N=32)
    field = sample_potential(
        PotentialSpec(kind="indicator_ball", amplitude=1.0 + 1.0j, R=1.0), gs
    )
    pts = eigenvalues_dense(hamiltonian_matrix(gs, field))
    filt = SpectrumFilter(
        band=(0.0, np.inf),
        essential_margin=SpectrumFilter.default_margin(gs),
        kappa=1.0,
    )
    report = check_klt_det(filter_discrete(pts, filt), field, q=1.5)
    assert report.fitted_constant == 0.126
    assert report.passed


@pytest.mark.parametrize("q", [0.4, 1.6])
def test_klt_rejects_q_outside_window(q):
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball"), gs)
    with pytest.raises(ValueError):
        check_klt_det([], field, q=q)


def test_sector_no_points_in_sector():
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball"), gs)
    report = check_sector([_pt(1.0 + 0.1j)], field, q=1.0, kappa=1.0)
    assert report.lhs == 0.0 and report.passed and not report.vacuous


def test_sector_large_kappa_keeps_left_half_plane():
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball"), gs)
    pts = [_pt(-1.0), _pt(1.0 + 100.0j)]
    report = check_sector(pts, field, q=1.0, kappa=1e6)
    # only z = -1 survives the sector: lhs = |z|^{q - d/2} = 1
    assert report.lhs == pytest.approx(1.0)
    assert report.params["n_sector"] == 1


def test_sector_imaginary_well_report():
    gs = GridSpec(d=1, L=16.0, N=128)
    points, field = _discrete_points(gs, 4.0j, kappa=1.0)
    report = check_sector(points, field, q=1.0, kappa=1.0)
    assert report.fitted_constant == 0.217
    assert report.passed and report.lhs > 0


def test_sector_validation():
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball"), gs)
    with pytest.raises(ValueError):
        check_sector([], field, q=1.0, kappa=0.0)
    with pytest.raises(ValueError):
        check_sector([], field, q=0.4, kappa=1.0)


def test_thm1_bracket_formula():
    gs = GridSpec(d=1, L=16.0, N=64)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=2.0), gs)
    pt = _pt((2.0 + 0.05j) ** 2)
    report = check_thm1([pt], field, _omega(h=0.5), q=1.0, R=2.0, M=5.0)
    want = 2.0 / ((2.0 + 1.0) ** 0.5 * np.log(2.0 + 4.0) ** 3.5)
    assert report.lhs == pytest.approx(want, rel=1e-10)
    assert report.fitted_constant == 5.0  # M plays the role of the constant
    assert report.seed["master_seed"] == 2026


def test_thm1_excludes_wide_eps():
    gs = GridSpec(d=1, L=16.0, N=64)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=2.0), gs)
    report = check_thm1([_pt((2.0 + 0.5j) ** 2)], field, _omega(h=0.5), q=1.0, R=2.0, M=5.0)
    assert report.vacuous and report.passed


def test_thm1_support_violation():
    gs = GridSpec(d=1, L=16.0, N=64)
    field = sample_potential(PotentialSpec(kind="indicator_ball", R=3.0), gs)
    with pytest.raises(SupportError):
        check_thm1([], field, _omega(h=0.5), q=1.0, R=2.0, M=5.0)
    with pytest.raises(ValueError):
        check_thm1([], field, _omega(h=4.0), q=1.0, R=3.5, M=5.0)


def test_thm1_q_validation():
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball"), gs)
    with pytest.raises(ValueError):
        check_thm1([], field, _omega(h=0.5), q=2.5, R=2.0, M=5.0)


def test_thm3_bracket_formula():
    gs = GridSpec(d=1, L=16.0, N=64)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=2.0), gs)
    pt = _pt((2.0 + 0.0j) ** 2)
    report = check_thm3([pt], field, _omega(h=0.5), q=1.0, M=5.0)
    want = 2.0 / ((2.0 + 1.0) ** 0.5 * np.log(2.0 + 1.0) ** 2)
    assert report.lhs == pytest.approx(want, rel=1e-10)


def test_thm3_rejects_endpoint_q():
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball"), gs)
    with pytest.raises(ValueError):
        check_thm3([], field, _omega(h=0.5), q=2.0, M=5.0)


def test_identity_realization_reduces_to_deterministic():
    spec = PotentialSpec(kind="indicator_ball", amplitude=1.0)
    out = mc_extension_norm(spec, _omega(), lam=1.0, R_list=[8.0], n_samples=1,
                            dx=0.5, identity=True)
    res = out[8.0]
    assert res.stats.n == 1
    assert res.stats.stderr == 0.0
    assert res.stats.mean == pytest.approx(res.deterministic, rel=1e-10)


def test_mc_zero_potential():
    spec = PotentialSpec(kind="indicator_ball", amplitude=0.0)
    out = mc_extension_norm(spec, _omega(), lam=1.0, R_list=[8.0], n_samples=1,
                            dx=0.5, identity=True)
    assert out[8.0].stats.mean == 0.0
    assert out[8.0].stats.stderr == 0.0
    assert out[8.0].deterministic == 0.0


def test_mc_needs_samples():
    spec = PotentialSpec(kind="indicator_ball")
    with pytest.raises(ValueError):
        mc_extension_norm(spec, _omega(), lam=1.0, R_list=[8.0], n_samples=10)


def test_ext_norm_samples_reproducible():
    spec = PotentialSpec(kind="indicator_ball", amplitude=1.0)
    a = ext_norm_samples(spec, _omega(), lam=1.0, R=8.0, indices=range(3), dx=0.5)
    b = ext_norm_samples(spec, _omega(), lam=1.0, R=8.0, indices=range(3), dx=0.5)
    np.testing.assert_array_equal(a, b)
    assert np.all(a > 0)


def test_randomization_shrinks_the_norm():
    # sign cancellation: every randomized draw sits below the all-plus norm
    spec = PotentialSpec(kind="indicator_ball", amplitude=1.0)
    det = deterministic_ext_norm(spec, lam=1.0, R=8.0, dx=0.5)
    draws = ext_norm_samples(spec, _omega(), lam=1.0, R=8.0, indices=range(5), dx=0.5)
    assert np.all(draws < det)


def test_check_extnorm_formula():
    result = ExtNormResult(
        R=8.0, stats=McStats(n=100, mean=3.0, stderr=0.1), deterministic=5.0,
        norms=np.zeros(1),
    )
    report = check_extnorm(result, h=1.0, v_inf=1.0)
    want_rhs = 8.0**0.5 * 3.0 * np.log(10.0) ** 2.5
    assert report.rhs_raw == pytest.approx(want_rhs, rel=1e-12)
    assert report.margin == pytest.approx(3.0 / (0.164 * want_rhs), rel=1e-12)


def test_fit_scaling_square_law():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    exponent, intercept, r2 = fit_scaling(x, x**2)
    assert exponent == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_scaling_constant():
    exponent, _, r2 = fit_scaling([1.0, 2.0, 4.0], [3.0, 3.0, 3.0])
    assert exponent == pytest.approx(0.0, abs=1e-12)
    assert r2 == 1.0


def test_fit_scaling_log_inflated_slope():
    # log-log slope of x^{1/2} ln(2+x)^{5/2} sits inside the range of the
    # log-derivative 1/2 + (5/2) x / ((2+x) ln(2+x)) over [8, 64]
    x = np.array([8.0, 16.0, 32.0, 64.0])
    y = x**0.5 * np.log(2.0 + x) ** 2.5
    exponent, _, r2 = fit_scaling(x, y)
    dlo = 0.5 + 2.5 * 64.0 / (66.0 * np.log(66.0))
    dhi = 0.5 + 2.5 * 8.0 / (10.0 * np.log(10.0))
    assert dlo <= exponent <= dhi
    assert r2 > 0.99


def test_fit_scaling_validation():
    with pytest.raises(ValueError):
        fit_scaling([1.0, 2.0], [1.0, 4.0])
    with pytest.raises(ValueError):
        fit_scaling([1.0, 2.0, 3.0], [1.0, -4.0, 9.0])
    with pytest.raises(ValueError):
        fit_scaling([1.0, 2.0, 3.0], [1.0, 4.0])


def test_schatten_zero_operator_passes():
    report = check_schatten_decay(
        np.zeros(5), nu=1.0, d=2, params={"lam": 1.0, "R": 8.0, "h": 1.0, "v_inf": 1.0}
    )
    assert report.lhs == 0.0 and report.passed


def test_schatten_harmonic_lhs():
    s = 1.0 / np.arange(1, 51)
    report = check_schatten_decay(
        s, nu=1.0, d=2, params={"lam": 1.0, "R": 8.0, "h": 1.0, "v_inf": 1.0}
    )
    assert report.lhs == pytest.approx(1.0)


def test_schatten_rhs_formula():
    report = check_schatten_decay(
        [0.5], nu=1.0, d=2, params={"lam": 1.0, "R": 8.0, "h": 1.0, "v_inf": 2.0}
    )
    lr, lh = 2.0 + 8.0, 2.0 + 1.0
    want = 8.0**1.5 * np.sqrt(np.log(lr)) * lh * (np.log(lr) + np.log(lh)) ** 2 * 2.0
    assert report.rhs_raw == pytest.approx(want, rel=1e-12)


def test_schatten_validation():
    params = {"lam": 1.0, "R": 8.0, "h": 1.0, "v_inf": 1.0}
    with pytest.raises(ValueError):
        check_schatten_decay([1.0], nu=1.0, d=3, params=params)
    with pytest.raises(ValueError):
        check_schatten_decay([1.0], nu=1.5, d=2, params=params)
    with pytest.raises(ValueError):
        check_schatten_decay([1.0], nu=0.0, d=2, params=params)


def test_evsum_empty_window():
    gs = GridSpec(d=2, L=8.0, N=16)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=1.0j), gs)
    report = check_evsum([], field, eps=0.1, R0=4.0, h=0.25)
    assert report.vacuous and report.passed


def test_evsum_single_point_unit_mass():
    gs = GridSpec(d=2, L=8.0, N=16)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=1.0j), gs)
    report = check_evsum([_pt(-1.0)], field, eps=0.1, R0=4.0, h=0.25)
    assert report.lhs == pytest.approx(1.0, rel=1e-12)
    assert report.rhs_raw == pytest.approx(weighted_sup_norm(field, 0.8), rel=1e-12)


def test_evsum_custom_constants_margin():
    gs = GridSpec(d=2, L=8.0, N=16)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=1.0j), gs)
    report = check_evsum([_pt(-1.0)], field, eps=0.1, R0=4.0, h=0.25, constants=(2.0, 1.5))
    assert report.margin == pytest.approx(1.0 / (2.0 * report.rhs_raw**1.5), rel=1e-12)


@pytest.mark.parametrize("eps", [0.0, 0.5, 0.7])
def test_evsum_eps_validation(eps):
    gs = GridSpec(d=2, L=8.0, N=16)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=1.0j), gs)
    with pytest.raises(ValueError):
        check_evsum([], field, eps=eps, R0=4.0, h=0.25)


def test_concentration_tail_gaussian_like():
    rng = np.random.default_rng(8)
    norms = np.abs(rng.standard_normal(2000)) + 0.5
    study = concentration_tail(norms)
    assert study.monotone
    assert study.c > 0
    fracs = [e.fraction for e in study.entries]
    assert all(a >= b for a, b in zip(fracs, fracs[1:]))


def test_concentration_tail_explicit_mean():
    norms = np.concatenate([np.full(150, 0.5), np.full(50, 3.0)])
    study = concentration_tail(norms, mean=1.0, thresholds=(2.0, 4.0))
    assert study.entries[0].fraction == pytest.approx(0.25)
    assert study.entries[1].fraction == 0.0


def test_concentration_tail_single_threshold_no_fit():
    study = concentration_tail(np.ones(200), thresholds=(1.5,))
    assert np.isnan(study.c)


def test_check_tail_monotone_passes():
    rng = np.random.default_rng(9)
    study = concentration_tail(np.abs(rng.standard_normal(500)) + 0.5)
    report = check_tail(study)
    assert report.passed
    assert report.params["monotone"] is True


def test_check_tail_degenerate_vacuous():
    study = concentration_tail(np.ones(200))
    assert check_tail(study).vacuous


def test_stein_tomas_ratio_stability():
    out = stein_tomas_spread(lam=1.0, R_list=(8.0, 16.0), dx=0.5)
    assert set(out["ratios"]) == {8.0, 16.0}
    assert all(v > 0 for v in out["norms"].values())
    assert out["max_rel_spread"] < 0.25


def test_schatten_campaign_shape():
    out = schatten_campaign(1.0, [8.0], 1.0, _omega(), n_samples=5)
    entry = out[8.0]
    assert entry["median_lhs"] > 0
    assert entry["rhs_raw"] > 0
    assert entry["median_tail_ratio"] < 1.0
    assert entry["n_nodes"] == 51
    assert entry["last_svals"].shape == (51,)


def test_evsum_sweep_fits_power_law():
    gs = GridSpec(d=1, L=8.0, N=64)
    base = PotentialSpec(kind="indicator_ball", amplitude=1.0j, R=1.0)
    study = evsum_sweep((1.0, 2.0, 4.0), base, gs, eps=0.1, R0=4.0, h=0.125,
                        essential_margin=0.05)
    assert len(study.reports) == 3
    assert np.isfinite(study.c2) and np.isfinite(study.r_squared)
    assert all(r.params["n_window"] > 0 for r in study.reports)


def test_evsum_sweep_randomized_path():
    gs = GridSpec(d=1, L=8.0, N=64)
    base = PotentialSpec(kind="indicator_ball", amplitude=1.0j, R=1.0)
    study = evsum_sweep((1.0, 2.0), base, gs, eps=0.1, R0=4.0, h=0.125,
                        omega_spec=_omega(h=0.5), essential_margin=0.05)
    assert len(study.reports) == 2


def test_amplitude_monotonicity_imaginary_family():
    gs = GridSpec(d=1, L=16.0, N=128)
    lhs = []
    for amp in (2.0j, 4.0j):
        points, field = _discrete_points(gs, amp, kappa=1.0)
        lhs.append(check_aad_1d(points, field).lhs)
    assert lhs[1] >= lhs[0]


def test_report_invariants():
    with pytest.raises(ValueError):
        BoundReport(
            bound_id="NOPE", lhs=1.0, rhs_raw=1.0, fitted_constant=1.0,
            margin=1.0, vacuous=False, params={},
        )
    gs = GridSpec(d=1, L=8.0, N=32)
    field = sample_potential(PotentialSpec(kind="indicator_ball", amplitude=2.0), gs)
    report = check_aad_1d([_pt(-4.0)], field)
    assert report.margin == pytest.approx(
        report.lhs / (report.fitted_constant * report.rhs_raw), rel=1e-12
    )
    assert report.passed == (report.margin <= 1.0)
