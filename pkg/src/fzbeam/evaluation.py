"""Gain-spectrum evaluation, achievable rate, and Monte Carlo sweeps.

Two spectrum paths exist for every zone-based design: the fast one
integrates the one-dimensional intensity profile, the oracle sums over all
elements. Rates discretise the band into subcarriers; sweeps pair trials
across sweep values through per-trial seeding so method comparisons stay
matched.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import GainSpectrum, ideal_gain, rate_upper_bound
from .beamformers import (GsaParams, PhaseProfile, gsa_profile,
                          profile_to_weights, quantize_weights, spm_profile, vsa_phases)
from .channel import (LinkBudget, Weights, equivalent_gain_discrete,
                      equivalent_gain_exact_bs)
from .fresnel import IntensityProfile, build_frame, intensity_profile
from .scenario import (SPEED_OF_LIGHT, BSArray, ElementGrid, Placement, SystemConfig,
                       broadside_bs_array, build_ris_grid, sample_placement)

TWO_PI = 2.0 * np.pi

PROFILE_METHODS = ("narrowband", "fz-spm", "fz-gsa")
KNOWN_METHODS = ("narrowband", "vsa", "fz-spm", "fz-gsa", "fz-gsa-exact",
                 "upper-bound", "optimal")


def subcarrier_frequencies(carrier_hz: float, bandwidth_hz: float, k: int) -> np.ndarray:
    """Centre frequencies of ``k`` equal subcarriers across the band."""
    idx = np.arange(1, k + 1)
    return carrier_hz + bandwidth_hz * ((2 * idx - 1) / (2 * k) - 0.5)


@dataclass
class EvalContext:
    """Everything the spectrum paths need for one placement."""

    config: SystemConfig
    placement: Placement
    grid: ElementGrid | None = None
    profile: IntensityProfile | None = None

    def __post_init__(self):
        if self.grid is None:
            self.grid = build_ris_grid(self.config)
        if self.profile is None:
            frame = build_frame(self.placement)
            self.profile = intensity_profile(frame, self.config, self.placement, self.grid)


def fresnel_gain_spectrum(profile: IntensityProfile, phase: PhaseProfile,
                          f_grid, rescale_amplitude: bool = True) -> GainSpectrum:
    """Fast path: one-dimensional transform of the phase-modulated profile.

    The profile is frozen at the carrier. With ``rescale_amplitude`` the
    known 1/f^2 scaling of the aperture factor is reapplied as a scalar per
    frequency, matching the element-wise oracle; without it the spectrum
    stays in the pure transform model that the rate upper bound lives in.
    """
    f = np.asarray(f_grid, dtype=float)
    if f.size == 0:
        return GainSpectrum(f=f, g=np.zeros(0, dtype=complex), method="fresnel-fast")
    psi = phase.phase_at_a(profile.a)
    arg = psi[None, :] - (2.0 * TWO_PI / SPEED_OF_LIGHT) * np.multiply.outer(f, profile.a)
    g = np.trapezoid(profile.v[None, :] * np.exp(1j * arg), profile.a, axis=1)
    if rescale_amplitude:
        g *= (profile.carrier_hz / f) ** 2
    return GainSpectrum(f=f, g=g, method="fresnel-fast")


def oracle_gain_spectrum(grid: ElementGrid, placement: Placement, weights: Weights,
                         f_grid, n_bs: int = 1) -> GainSpectrum:
    f = np.asarray(f_grid, dtype=float)
    g = equivalent_gain_discrete(grid, placement, weights, f, n_bs=n_bs) \
        if f.size else np.zeros(0, dtype=complex)
    return GainSpectrum(f=f, g=np.atleast_1d(g), method="discrete-oracle")


def exact_bs_gain_spectrum(grid: ElementGrid, placement: Placement, bs: BSArray,
                           weights: Weights, f_grid) -> GainSpectrum:
    f = np.asarray(f_grid, dtype=float)
    g = equivalent_gain_exact_bs(grid, placement, bs, weights, f) \
        if f.size else np.zeros(0, dtype=complex)
    return GainSpectrum(f=f, g=np.atleast_1d(g), method="exact-bs")


def gain_spectrum(source, context: EvalContext, f_grid, method: str = "fresnel-fast",
                  bs_array: BSArray | None = None) -> GainSpectrum:
    """Dispatch on evaluation method; ``source`` is a zone phase profile for
    the fast path or element weights for the element-wise paths."""
    if method == "fresnel-fast":
        if not isinstance(source, PhaseProfile):
            raise TypeError("fast path needs a zone phase profile")
        return fresnel_gain_spectrum(context.profile, source, f_grid)
    weights = source
    if isinstance(source, PhaseProfile):
        weights = profile_to_weights(source, context.grid, context.placement)
    if method == "discrete-oracle":
        return oracle_gain_spectrum(context.grid, context.placement, weights,
                                    f_grid, n_bs=context.config.bs_antennas)
    if method == "exact-bs":
        if bs_array is None:
            raise ValueError("exact-bs evaluation needs a BS array")
        return exact_bs_gain_spectrum(context.grid, context.placement, bs_array,
                                      weights, f_grid)
    raise ValueError(f"unknown spectrum method {method!r}")


def achievable_rate(spectrum: GainSpectrum, lb: LinkBudget, k: int,
                    carrier_hz: float) -> float:
    """Sum-rate over ``k`` subcarriers, interpolating |g|^2 onto the
    subcarrier centres when the spectrum grid differs."""
    centres = subcarrier_frequencies(carrier_hz, lb.bandwidth_hz, k)
    tol = lb.bandwidth_hz / (2 * k) + 1e-6
    if spectrum.f.size == 0 or spectrum.f[0] > centres[0] + tol \
            or spectrum.f[-1] < centres[-1] - tol:
        raise ValueError("spectrum does not cover the signal band")
    power = np.interp(centres, spectrum.f, spectrum.magnitude ** 2)
    snr = power * lb.signal_psd_w / lb.noise_psd_w
    return float(lb.bandwidth_hz / k * np.sum(np.log2(1.0 + snr)))


def ideal_rate(profile: IntensityProfile, config: SystemConfig, lb: LinkBudget) -> float:
    """Rate of the flat ideal spectrum (equals the upper bound)."""
    spec_level = ideal_gain(profile, config)
    centres = subcarrier_frequencies(config.carrier_hz, lb.bandwidth_hz,
                                     config.subcarriers)
    g = spec_level.evaluate(centres).astype(complex)
    return achievable_rate(GainSpectrum(f=centres, g=g), lb,
                           config.subcarriers, config.carrier_hz)


@dataclass
class ExperimentSpec:
    """One sweep: variable, values, methods, Monte Carlo size and seeding."""

    sweep: str = "tx_power"
    values: tuple = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    methods: tuple = ("narrowband", "vsa", "fz-spm", "fz-gsa", "upper-bound")
    trials: int = 10
    seed: int = 1
    bs_range: tuple[float, float] = (7.0, 13.0)
    ue_range: tuple[float, float] = (7.0, 13.0)
    vsa_subarrays: int = 10
    gsa: GsaParams = field(default_factory=GsaParams)
    threads: int = 1

    SWEEP_VARIABLES = ("tx_power", "D", "B", "route_length", "N_BS")

    def __post_init__(self):
        if self.sweep not in self.SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.sweep!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if not self.methods:
            raise ValueError("sweep needs at least one method")
        for m in self.methods:
            if m not in KNOWN_METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class SweepCell:
    """Aggregated result for one (sweep value, method) pair."""

    sweep_value: float
    method: str
    mean_rate_bps: float
    stderr_bps: float
    trials: int
    errors: list = field(default_factory=list)


def _config_at(config: SystemConfig, sweep: str, value) -> SystemConfig:
    """Copy of the config with the swept variable applied."""
    kw = dict(carrier_hz=config.carrier_hz, bandwidth_hz=config.bandwidth_hz,
              subcarriers=config.subcarriers, side_m=config.side_m,
              spacing_m=config.spacing_m, bs_antennas=config.bs_antennas,
              noise_psd_dbm=config.noise_psd_dbm, tx_power_dbm=config.tx_power_dbm,
              phase_bits=config.phase_bits)
    if sweep == "tx_power":
        kw["tx_power_dbm"] = float(value)
    elif sweep == "D":
        kw["side_m"] = float(value)
    elif sweep == "B":
        kw["bandwidth_hz"] = float(value)
    elif sweep == "N_BS":
        kw["bs_antennas"] = int(value)
    # element counts follow side/spacing unless pinned in the base config
    kw["nx"] = kw["ny"] = None
    return SystemConfig(**kw)


def _near_square_factors(n: int) -> tuple[int, int]:
    a = int(math.isqrt(n))
    while n % a:
        a -= 1
    return a, n // a


def _trial_placement(spec: ExperimentSpec, value_index: int, trial: int):
    """Deterministic per-trial placement; shared across sweep values except
    when the sweep itself moves the placement ranges."""
    if spec.sweep == "route_length":
        seed = np.random.SeedSequence([spec.seed, value_index, trial])
        total = float(spec.values[value_index])
        ranges = ((0.35 * total, 0.65 * total),) * 2
    else:
        seed = np.random.SeedSequence([spec.seed, trial])
        ranges = (spec.bs_range, spec.ue_range)
    return sample_placement(np.random.default_rng(seed), *ranges)


def _design_phase(method: str, cfg: SystemConfig, ctx: EvalContext,
                  spec: ExperimentSpec) -> PhaseProfile:
    if method == "narrowband":
        return PhaseProfile.carrier(cfg.carrier_hz, ctx.profile.a)
    if method == "fz-spm":
        return spm_profile(ctx.profile, cfg.band)
    if method in ("fz-gsa", "fz-gsa-exact"):
        return gsa_profile(ctx.profile, cfg.band, spec.gsa)
    raise ValueError(method)


def _spectrum_for_method(method: str, cfg: SystemConfig, ctx: EvalContext,
                         spec: ExperimentSpec) -> GainSpectrum | None:
    """Design the method's weights and evaluate its spectrum at the
    subcarrier centres; None for the bound pseudo-methods. Quantisation, when
    configured, forces the element-wise oracle since rounded phases are no
    longer a smooth function of the zone coordinate."""
    centres = subcarrier_frequencies(cfg.carrier_hz, cfg.bandwidth_hz, cfg.subcarriers)
    if method in ("upper-bound", "optimal"):
        return None
    if method == "vsa":
        weights = vsa_phases(ctx.grid, ctx.placement, cfg.band, spec.vsa_subarrays)
        if cfg.phase_bits:
            weights = quantize_weights(weights, cfg.phase_bits)
        return oracle_gain_spectrum(ctx.grid, ctx.placement, weights, centres,
                                    n_bs=cfg.bs_antennas)
    phase = _design_phase(method, cfg, ctx, spec)
    if method == "fz-gsa-exact":
        weights = profile_to_weights(phase, ctx.grid, ctx.placement)
        if cfg.phase_bits:
            weights = quantize_weights(weights, cfg.phase_bits)
        n1, n2 = _near_square_factors(cfg.bs_antennas)
        bs = broadside_bs_array(ctx.placement, n1, n2, cfg.wavelength_m / 2.0)
        return exact_bs_gain_spectrum(ctx.grid, ctx.placement, bs, weights, centres)
    if cfg.phase_bits:
        weights = quantize_weights(profile_to_weights(phase, ctx.grid, ctx.placement),
                                   cfg.phase_bits)
        return oracle_gain_spectrum(ctx.grid, ctx.placement, weights, centres,
                                    n_bs=cfg.bs_antennas)
    # rates stay in the frozen-amplitude model so the upper bound dominates
    return fresnel_gain_spectrum(ctx.profile, phase, centres, rescale_amplitude=False)


def _rate_for_method(method: str, cfg: SystemConfig, ctx: EvalContext,
                     lb: LinkBudget, spec: ExperimentSpec) -> float:
    spectrum = _spectrum_for_method(method, cfg, ctx, spec)
    if spectrum is None:
        return rate_upper_bound(ctx.profile, lb)
    return achievable_rate(spectrum, lb, cfg.subcarriers, cfg.carrier_hz)


def _run_trial(spec: ExperimentSpec, config: SystemConfig, value_index: int,
               trial: int) -> dict[str, float | str]:
    """Rates for every method at one (value, trial); errors recorded per cell."""
    value = spec.values[value_index]
    cfg = _config_at(config, spec.sweep, value)
    placement = _trial_placement(spec, value_index, trial)
    out: dict[str, float | str] = {}
    try:
        ctx = EvalContext(cfg, placement)
    except Exception as exc:          # placement-level failure hits all methods
        return {m: f"error: {exc}" for m in spec.methods}
    lb = LinkBudget.from_config(cfg)
    for method in spec.methods:
        try:
            out[method] = _rate_for_method(method, cfg, ctx, lb, spec)
        except Exception as exc:
            out[method] = f"error: {exc}"
    return out


def _run_trial_shared_design(spec: ExperimentSpec, config: SystemConfig,
                             trial: int) -> list[dict[str, float | str]]:
    """tx_power sweep fast path: design and spectrum once per method per
    trial, then re-rate for every power value."""
    placement = _trial_placement(spec, 0, trial)
    cfg = _config_at(config, "tx_power", spec.values[0])
    results: list[dict[str, float | str]] = [dict() for _ in spec.values]
    try:
        ctx = EvalContext(cfg, placement)
    except Exception as exc:
        return [{m: f"error: {exc}" for m in spec.methods} for _ in spec.values]
    for method in spec.methods:
        try:
            spectrum = _spectrum_for_method(method, cfg, ctx, spec)
        except Exception as exc:
            for vi in range(len(spec.values)):
                results[vi][method] = f"error: {exc}"
            continue
        for vi, value in enumerate(spec.values):
            lb = LinkBudget.from_config(cfg, tx_power_dbm=float(value))
            try:
                if spectrum is None:
                    results[vi][method] = rate_upper_bound(ctx.profile, lb)
                else:
                    results[vi][method] = achievable_rate(
                        spectrum, lb, cfg.subcarriers, cfg.carrier_hz)
            except Exception as exc:
                results[vi][method] = f"error: {exc}"
    return results


def run_sweep(spec: ExperimentSpec, config: SystemConfig) -> list[SweepCell]:
    """Monte Carlo sweep; deterministic for a fixed master seed, with
    reduction in trial-index order."""
    trials = range(spec.trials)
    if spec.sweep == "tx_power":
        worker = lambda t: _run_trial_shared_design(spec, config, t)
    else:
        worker = lambda t: [_run_trial(spec, config, vi, t)
                            for vi in range(len(spec.values))]
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            per_trial = list(pool.map(worker, trials))
    else:
        per_trial = [worker(t) for t in trials]

    cells: list[SweepCell] = []
    for vi, value in enumerate(spec.values):
        for method in spec.methods:
            rates, errors = [], []
            for t in trials:
                r = per_trial[t][vi].get(method)
                if isinstance(r, str):
                    errors.append(f"trial {t}: {r}")
                elif r is not None:
                    rates.append(r)
            n = len(rates)
            mean = float(np.mean(rates)) if n else math.nan
            stderr = float(np.std(rates, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            cells.append(SweepCell(sweep_value=float(value), method=method,
                                   mean_rate_bps=mean, stderr_bps=stderr,
                                   trials=n, errors=errors))
    return cells
