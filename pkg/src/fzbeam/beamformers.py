"""Phase-shift designs: carrier-aligned, virtual-subarray baseline, the
stationary-phase chirp, and alternating-projection refinement.

The wideband designs work on one dimension (the zone coordinate) and are
mapped onto elements afterwards, so every element on a given zone always
receives the same phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .channel import Weights
from .fresnel import IntensityProfile, cumulative_energy
from .scenario import SPEED_OF_LIGHT, ElementGrid, Placement, route_lengths

TWO_PI = 2.0 * np.pi


@dataclass
class PhaseProfile:
    """Phase across zones: an analytic chirp table plus, for refined
    designs, sampled offsets relative to that chirp.

    ``chirp`` holds the slow band-sweep term on ``a_grid``; the linear
    carrier-edge term is evaluated exactly at any query point. ``offsets``
    (refined designs only) are unwrapped corrections interpolated on top.
    """

    kind: str                       # "analytic" | "refined"
    carrier_hz: float
    bandwidth_hz: float
    a_grid: np.ndarray = field(repr=False)
    chirp: np.ndarray = field(repr=False)
    offsets: np.ndarray | None = field(default=None, repr=False)

    def phase_at_a(self, a) -> np.ndarray:
        """Total designed phase for zones with semi-major axis ``a``.

        The tabulated terms clamp at the profile ends; the carrier term is
        exact everywhere.
        """
        a_arr = np.asarray(a, dtype=float)
        a_cl = np.clip(a_arr, self.a_grid[0], self.a_grid[-1])
        phase = np.interp(a_cl, self.a_grid, self.chirp)
        phase = phase + (2.0 * TWO_PI * (self.carrier_hz - self.bandwidth_hz / 2.0)
                         / SPEED_OF_LIGHT) * a_arr
        if self.offsets is not None:
            phase = phase + np.interp(a_cl, self.a_grid, self.offsets)
        return phase

    def phase_at_t(self, t) -> np.ndarray:
        return self.phase_at_a(0.5 * SPEED_OF_LIGHT * np.asarray(t, dtype=float))

    @property
    def sweep_rate_bounds(self) -> tuple[float, float]:
        """Designed instantaneous-frequency range across the band."""
        return (self.carrier_hz - self.bandwidth_hz / 2.0,
                self.carrier_hz + self.bandwidth_hz / 2.0)

    @classmethod
    def carrier(cls, carrier_hz: float, a_grid) -> "PhaseProfile":
        """Pure carrier-aligned phase (the narrowband design as a profile)."""
        a_grid = np.asarray(a_grid, dtype=float)
        return cls(kind="analytic", carrier_hz=carrier_hz, bandwidth_hz=0.0,
                   a_grid=a_grid, chirp=np.zeros_like(a_grid))


@dataclass
class GsaParams:
    """Alternating-projection knobs. The frequency grid spans
    ``extended_band_factor`` times the signal band (the extra span is where
    leakage is pushed down) with ``freq_oversample`` times as many samples
    as the profile grid.

    ``ridge_scale`` is relative to the top eigenvalue of the normal matrix.
    The back-projection needs heavy damping: the transform operator has
    numerical rank of roughly the time-bandwidth product, far below the
    sample count, and a lightly-damped solve amplifies the null directions
    and diverges.
    """

    extended_band_factor: float = 1.1
    freq_oversample: int = 4
    max_iters: int = 150
    ridge_scale: float = 0.1
    tol: float = 1e-6

    def __post_init__(self):
        if self.extended_band_factor <= 1.0:
            raise ValueError("extended band must exceed the signal band")
        if self.freq_oversample < 1:
            raise ValueError("frequency oversampling must be >= 1")
        if self.max_iters < 1:
            raise ValueError("need at least one iteration")


def narrowband_phases(grid: ElementGrid, placement: Placement, carrier_hz: float) -> Weights:
    """Co-phase every element at the carrier: the classical design."""
    l_bs, l_ue = route_lengths(grid, placement)
    return Weights(TWO_PI * carrier_hz * (l_bs + l_ue) / SPEED_OF_LIGHT)


def vsa_phases(grid: ElementGrid, placement: Placement,
               band: tuple[float, float], n_sub: int) -> Weights:
    """Baseline: split the rows into ``n_sub`` contiguous bands, each
    co-phased at its own frequency stepped across the band."""
    carrier_hz, bandwidth_hz = band
    if n_sub < 1 or grid.nx % n_sub != 0:
        raise ValueError(f"n_sub={n_sub} must divide the row count {grid.nx}")
    rows_per = grid.nx // n_sub
    row_idx, _ = grid.axis_indices()
    sub_of_element = row_idx // rows_per
    phases = np.empty(grid.n_elements)
    for i in range(n_sub):
        f_i = carrier_hz - bandwidth_hz / 2.0 + (i + 0.5) * bandwidth_hz / n_sub
        sel = sub_of_element == i
        aligned = narrowband_phases(grid, placement, f_i)
        phases[sel] = aligned.phases[sel]
    return Weights(phases)


def spm_profile(profile: IntensityProfile, band: tuple[float, float]) -> PhaseProfile:
    """Chirp whose instantaneous frequency sweeps the band so that the
    spectrum magnitude tracks the flat ideal: the zone phase is a double
    running integral of the squared intensity, plus the band-edge carrier
    term.
    """
    carrier_hz, bandwidth_hz = band
    p_cum, lam = cumulative_energy(profile)
    degenerate = profile.delta_t <= 0.0 or p_cum[-1] <= 0.0
    if degenerate or bandwidth_hz <= 0.0:
        return PhaseProfile.carrier(carrier_hz, profile.a)
    chirp = (2.0 * TWO_PI * bandwidth_hz / SPEED_OF_LIGHT) * lam
    return PhaseProfile(kind="analytic", carrier_hz=carrier_hz,
                        bandwidth_hz=bandwidth_hz, a_grid=profile.a, chirp=chirp)


def leakage_matrix(profile: IntensityProfile, f_grid) -> np.ndarray:
    """Quadrature-weighted transform matrix A with A @ w ~ g(f_k), so the
    projection residual is in the same units as the target spectrum."""
    t = profile.t
    dt = (t[-1] - t[0]) / (t.size - 1) if t.size > 1 else 1.0
    phase = -TWO_PI * np.multiply.outer(np.asarray(f_grid, dtype=float), t)
    return np.exp(1j * phase) * profile.v_t[None, :] * dt


def gs_phase_retrieval(a_matrix: np.ndarray, w0: np.ndarray,
                       target_mag: np.ndarray, params: GsaParams
                       ) -> tuple[np.ndarray, list[float]]:
    """Alternating projections between the target magnitude spectrum and the
    unit-modulus sample constraint.

    Returns the best iterate seen (the scheme is not stepwise monotone)
    and the residual history; residual = ||  |A w| - target ||_2. If the
    damped solve still lets the residual blow up, the ridge is escalated
    with a warning and the run restarts.
    """
    top_eig = float(np.linalg.norm(a_matrix, 2)) ** 2
    # escalation is a safety net for catastrophic blow-ups only; mild
    # non-monotone wobble is normal and handled by best-iterate tracking
    blowup_floor = float(np.linalg.norm(target_mag))

    def run(ridge: float) -> tuple[np.ndarray, list[float]]:
        normal = a_matrix.conj().T @ a_matrix
        normal[np.diag_indices_from(normal)] += ridge
        try:
            factor = cho_factor(normal)
        except (LinAlgError, np.linalg.LinAlgError):
            return None, []
        w = np.asarray(w0, dtype=complex)
        best_w, best_res = w, residual(w)
        history = [best_res]
        for _ in range(params.max_iters):
            g = a_matrix @ w
            mag = np.abs(g)
            phase = np.where(mag > 0, g / np.where(mag > 0, mag, 1.0), 1.0)
            g_target = phase * target_mag
            w_ls = cho_solve(factor, a_matrix.conj().T @ g_target)
            mod = np.abs(w_ls)
            w = np.where(mod > 0, w_ls / np.where(mod > 0, mod, 1.0), 1.0)
            res = residual(w)
            history.append(res)
            if res < best_res:
                best_w, best_res = w, res
            if res > 10.0 * max(history[0], blowup_floor):
                return None, history       # diverging: caller escalates ridge
            if abs(history[-2] - res) <= params.tol * max(history[-2], 1e-300):
                break
        return best_w, history

    def residual(w):
        return float(np.linalg.norm(np.abs(a_matrix @ w) - target_mag))

    ridge = params.ridge_scale * top_eig
    for attempt in range(4):
        best_w, history = run(ridge)
        if best_w is not None:
            return best_w, history
        warnings.warn("back-projection unstable; raising ridge regularisation")
        ridge *= 100.0
    return np.asarray(w0, dtype=complex), [residual(np.asarray(w0, dtype=complex))]


def gsa_profile(profile: IntensityProfile, band: tuple[float, float],
                params: GsaParams | None = None,
                init: PhaseProfile | None = None) -> PhaseProfile:
    """Refine a chirp design by phase retrieval against the flat ideal
    spectrum on an extended frequency grid."""
    carrier_hz, bandwidth_hz = band
    params = params or GsaParams()
    reference = spm_profile(profile, band)
    if profile.delta_t <= 0.0 or profile.energy <= 0.0:
        return reference
    start = init if init is not None else reference

    n_s = profile.a.size
    k_prime = params.freq_oversample * n_s
    b_prime = params.extended_band_factor * bandwidth_hz
    f_grid = carrier_hz - b_prime / 2.0 + (np.arange(1, k_prime + 1) / k_prime) * b_prime
    a_matrix = leakage_matrix(profile, f_grid)

    level = math.sqrt(profile.energy / bandwidth_hz)
    in_band = np.abs(f_grid - carrier_hz) <= bandwidth_hz / 2.0
    target = np.where(in_band, level, 0.0)

    w0 = np.exp(1j * start.phase_at_a(profile.a))
    w_best, _ = gs_phase_retrieval(a_matrix, w0, target, params)

    raw = np.angle(w_best) - reference.phase_at_a(profile.a)
    offsets = np.unwrap(np.mod(raw + np.pi, TWO_PI) - np.pi)
    return PhaseProfile(kind="refined", carrier_hz=carrier_hz,
                        bandwidth_hz=bandwidth_hz, a_grid=profile.a,
                        chirp=reference.chirp, offsets=offsets)


def profile_to_weights(phase_profile: PhaseProfile, grid: ElementGrid,
                       placement: Placement) -> Weights:
    """Give every element the phase of the zone it sits on."""
    l_bs, l_ue = route_lengths(grid, placement)
    return Weights(phase_profile.phase_at_a(0.5 * (l_bs + l_ue)))


def quantize_weights(weights: Weights, bits: int) -> Weights:
    """Round each phase to the nearest level of a ``bits``-bit shifter."""
    if bits < 1:
        raise ValueError("need at least one bit of phase resolution")
    step = TWO_PI / (2 ** bits)
    return Weights(np.round(weights.phases / step) * step)


def weights_to_csv(weights: Weights, grid: ElementGrid, path,
                   bits: int | None = None) -> None:
    """Export per-element phases (and their quantised version) for a
    hardware controller."""
    import csv

    quant = quantize_weights(weights, bits) if bits else weights
    rows_i, rows_j = grid.axis_indices()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "n1", "n2", "phi_rad", "phi_quantized"])
        for n in range(grid.n_elements):
            writer.writerow([n, int(rows_i[n]), int(rows_j[n]),
                             repr(float(weights.phases[n])),
                             repr(float(quant.phases[n]))])
