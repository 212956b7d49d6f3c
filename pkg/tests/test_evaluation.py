import numpy as np
import pytest

from fzbeam import (EvalContext, ExperimentSpec, LinkBudget, PhaseProfile, Placement,
                    SystemConfig, achievable_rate, gain_spectrum, narrowband_spectrum,
                    rate_upper_bound, run_sweep, subcarrier_frequencies)
from fzbeam.analysis import GainSpectrum, ideal_gain
from fzbeam.beamformers import spm_profile
from fzbeam.channel import Weights
from fzbeam.evaluation import (fresnel_gain_spectrum, ideal_rate,
                               oracle_gain_spectrum)
from fzbeam.scenario import broadside_bs_array


def test_subcarrier_frequencies_cover_band():
    f = subcarrier_frequencies(30e9, 1.5e9, 128)
    assert f.size == 128
    assert f[0] == pytest.approx(30e9 - 1.5e9 / 2 + 1.5e9 / 256)
    assert f[-1] == pytest.approx(30e9 + 1.5e9 / 2 - 1.5e9 / 256)
    assert np.allclose(np.diff(f), 1.5e9 / 128)


def test_fast_path_carrier_reproduces_narrowband(small_context, small_config):
    profile = small_context.profile
    f = np.linspace(small_config.f_low, small_config.f_high, 65)
    carrier = PhaseProfile.carrier(small_config.carrier_hz, profile.a)
    fast = fresnel_gain_spectrum(profile, carrier, f, rescale_amplitude=False)
    narrow = narrowband_spectrum(profile, f)
    assert np.allclose(fast.g, narrow.g, rtol=1e-9)


def test_fast_path_empty_grid(small_context):
    carrier = PhaseProfile.carrier(30e9, small_context.profile.a)
    spec = fresnel_gain_spectrum(small_context.profile, carrier, np.array([]))
    assert spec.f.size == 0 and spec.g.size == 0


def test_gain_spectrum_dispatch(small_context, small_config):
    profile = small_context.profile
    f = np.linspace(small_config.f_low, small_config.f_high, 33)
    design = spm_profile(profile, small_config.band)
    fast = gain_spectrum(design, small_context, f, method="fresnel-fast")
    assert fast.method == "fresnel-fast"
    oracle = gain_spectrum(design, small_context, f, method="discrete-oracle")
    assert oracle.method == "discrete-oracle"
    err = np.linalg.norm(fast.g - oracle.g) / np.linalg.norm(oracle.g)
    assert err < 0.03
    bs = broadside_bs_array(small_context.placement, 2, 2, 0.0)
    exact = gain_spectrum(design, small_context, f, method="exact-bs", bs_array=bs)
    assert exact.method == "exact-bs"
    with pytest.raises(ValueError):
        gain_spectrum(design, small_context, f, method="nope")
    with pytest.raises(TypeError):
        gain_spectrum(Weights(np.zeros(small_context.grid.n_elements)),
                      small_context, f, method="fresnel-fast")


def test_achievable_rate_zero_gain(small_config):
    lb = LinkBudget.from_config(small_config)
    f = subcarrier_frequencies(small_config.carrier_hz, small_config.bandwidth_hz, 16)
    spec = GainSpectrum(f=f, g=np.zeros(16, dtype=complex))
    assert achievable_rate(spec, lb, 16, small_config.carrier_hz) == 0.0


def test_achievable_rate_requires_coverage(small_config):
    lb = LinkBudget.from_config(small_config)
    f = np.linspace(small_config.carrier_hz, small_config.f_high, 16)  # half band only
    spec = GainSpectrum(f=f, g=np.ones(16, dtype=complex))
    with pytest.raises(ValueError):
        achievable_rate(spec, lb, 16, small_config.carrier_hz)


def test_ideal_spectrum_attains_upper_bound(small_context, small_config):
    lb = LinkBudget.from_config(small_config)
    r_ideal = ideal_rate(small_context.profile, small_config, lb)
    r_bound = rate_upper_bound(small_context.profile, lb)
    assert r_ideal == pytest.approx(r_bound, rel=1e-12)


def test_random_weights_respect_upper_bound(small_context, small_config, rng):
    lb = LinkBudget.from_config(small_config)
    bound = rate_upper_bound(small_context.profile, lb)
    centres = subcarrier_frequencies(small_config.carrier_hz,
                                     small_config.bandwidth_hz,
                                     small_config.subcarriers)
    for _ in range(10):
        w = Weights(rng.uniform(0, 2 * np.pi, small_context.grid.n_elements))
        spec = oracle_gain_spectrum(small_context.grid, small_context.placement,
                                    w, centres)
        r = achievable_rate(spec, lb, small_config.subcarriers, small_config.carrier_hz)
        assert r <= bound * (1 + 1e-9)


def test_rate_monotone_in_power(small_context, small_config):
    design = spm_profile(small_context.profile, small_config.band)
    centres = subcarrier_frequencies(small_config.carrier_hz,
                                     small_config.bandwidth_hz,
                                     small_config.subcarriers)
    spec = fresnel_gain_spectrum(small_context.profile, design, centres,
                                 rescale_amplitude=False)
    rates = []
    for p_dbm in (10.0, 20.0, 30.0, 40.0):
        lb = LinkBudget.from_config(small_config, tx_power_dbm=p_dbm)
        rates.append(achievable_rate(spec, lb, small_config.subcarriers,
                                     small_config.carrier_hz))
    assert all(b > a for a, b in zip(rates, rates[1:]))


def test_experiment_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(sweep="frequency")
    with pytest.raises(ValueError):
        ExperimentSpec(values=())
    with pytest.raises(ValueError):
        ExperimentSpec(methods=("spm-typo",))
    with pytest.raises(ValueError):
        ExperimentSpec(trials=0)


@pytest.fixture(scope="module")
def sweep_config():
    return SystemConfig(side_m=0.25, subcarriers=32)


def test_sweep_single_trial_matches_direct_pipeline(sweep_config):
    spec = ExperimentSpec(sweep="tx_power", values=(25.0,), trials=1, seed=9,
                          methods=("narrowband", "upper-bound"))
    cells = run_sweep(spec, sweep_config)
    by = {c.method: c for c in cells}
    assert by["narrowband"].stderr_bps == 0.0
    # rebuild the same trial by hand
    from fzbeam.evaluation import _trial_placement
    placement = _trial_placement(spec, 0, 0)
    ctx = EvalContext(sweep_config, placement)
    lb = LinkBudget.from_config(sweep_config, tx_power_dbm=25.0)
    carrier = PhaseProfile.carrier(sweep_config.carrier_hz, ctx.profile.a)
    centres = subcarrier_frequencies(sweep_config.carrier_hz,
                                     sweep_config.bandwidth_hz,
                                     sweep_config.subcarriers)
    spec_nb = fresnel_gain_spectrum(ctx.profile, carrier, centres,
                                    rescale_amplitude=False)
    want = achievable_rate(spec_nb, lb, sweep_config.subcarriers,
                           sweep_config.carrier_hz)
    assert by["narrowband"].mean_rate_bps == pytest.approx(want, rel=1e-12)
    assert by["upper-bound"].mean_rate_bps == pytest.approx(
        rate_upper_bound(ctx.profile, lb), rel=1e-12)


def test_sweep_deterministic_for_fixed_seed(sweep_config):
    spec = ExperimentSpec(sweep="D", values=(0.2, 0.3), trials=2, seed=4,
                          methods=("narrowband", "fz-spm"))
    a = run_sweep(spec, sweep_config)
    b = run_sweep(spec, sweep_config)
    assert [(c.sweep_value, c.method, c.mean_rate_bps) for c in a] == \
           [(c.sweep_value, c.method, c.mean_rate_bps) for c in b]


def test_sweep_threads_match_serial(sweep_config):
    base = ExperimentSpec(sweep="tx_power", values=(20.0, 30.0), trials=3, seed=2,
                          methods=("narrowband", "fz-spm"))
    threaded = ExperimentSpec(sweep="tx_power", values=(20.0, 30.0), trials=3, seed=2,
                              methods=("narrowband", "fz-spm"), threads=3)
    a = run_sweep(base, sweep_config)
    b = run_sweep(threaded, sweep_config)
    assert [(c.mean_rate_bps, c.stderr_bps) for c in a] == \
           [(c.mean_rate_bps, c.stderr_bps) for c in b]


def test_sweep_methods_dominated_by_bound(sweep_config):
    spec = ExperimentSpec(sweep="tx_power", values=(25.0,), trials=3, seed=11,
                          methods=("narrowband", "vsa", "fz-spm", "fz-gsa",
                                   "upper-bound"),
                          vsa_subarrays=10)
    cells = run_sweep(spec, sweep_config)
    by = {c.method: c.mean_rate_bps for c in cells}
    for m in ("narrowband", "vsa", "fz-spm", "fz-gsa"):
        assert by[m] <= by["upper-bound"] * (1 + 1e-9)
    assert not any(c.errors for c in cells)


def test_sweep_records_cell_errors(sweep_config):
    # 13 does not divide the 50-row grid: VSA fails per-cell, others survive
    spec = ExperimentSpec(sweep="tx_power", values=(25.0,), trials=2, seed=1,
                          methods=("vsa", "narrowband"), vsa_subarrays=13)
    cells = run_sweep(spec, sweep_config)
    by = {c.method: c for c in cells}
    assert by["vsa"].trials == 0 and len(by["vsa"].errors) == 2
    assert np.isnan(by["vsa"].mean_rate_bps)
    assert by["narrowband"].trials == 2 and not by["narrowband"].errors


def test_sweep_optimal_aliases_upper_bound(sweep_config):
    spec = ExperimentSpec(sweep="tx_power", values=(25.0,), trials=2, seed=6,
                          methods=("upper-bound", "optimal"))
    cells = run_sweep(spec, sweep_config)
    by = {c.method: c.mean_rate_bps for c in cells}
    assert by["optimal"] == by["upper-bound"]


def test_long_route_keeps_wideband_advantage():
    # 200 m total route at a transmit power that keeps the link in the
    # logarithmic regime: the zone designs hold a large lead
    cfg = SystemConfig(tx_power_dbm=45.0)
    spec = ExperimentSpec(sweep="route_length", values=(200.0,), trials=6, seed=5,
                          methods=("narrowband", "fz-spm", "fz-gsa"))
    cells = run_sweep(spec, cfg)
    assert not any(c.errors for c in cells)
    by = {c.method: c.mean_rate_bps for c in cells}
    assert by["fz-spm"] >= 1.5 * by["narrowband"]
    assert by["fz-gsa"] >= 1.5 * by["narrowband"]
