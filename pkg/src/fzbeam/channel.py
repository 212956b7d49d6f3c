"""Near-field LOS cascaded channel and the brute-force equivalent-gain oracle.

The element-wise summation here is the ground truth every fast path is
checked against. Amplitudes use the exact per-element 1/l factors; the
multi-antenna BS model additionally resolves per-antenna distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import SPEED_OF_LIGHT, BSArray, ElementGrid, Placement, SystemConfig, route_lengths

TWO_PI = 2.0 * np.pi


@dataclass
class LinkBudget:
    """Transmit power, noise floor and band; all stored in linear units."""

    tx_power_w: float
    noise_psd_w: float
    bandwidth_hz: float

    def __post_init__(self):
        if min(self.tx_power_w, self.noise_psd_w, self.bandwidth_hz) <= 0:
            raise ValueError("link budget values must be strictly positive")

    @property
    def signal_psd_w(self) -> float:
        """Flat transmit PSD across the band."""
        return self.tx_power_w / self.bandwidth_hz

    @classmethod
    def from_config(cls, config: SystemConfig, tx_power_dbm: float | None = None) -> "LinkBudget":
        p_dbm = config.tx_power_dbm if tx_power_dbm is None else tx_power_dbm
        return cls(
            tx_power_w=10.0 ** ((p_dbm - 30.0) / 10.0),
            noise_psd_w=10.0 ** ((config.noise_psd_dbm - 30.0) / 10.0),
            bandwidth_hz=config.bandwidth_hz,
        )


@dataclass
class Weights:
    """Unit-modulus reflection coefficients, stored as phases in [0, 2pi)."""

    phases: np.ndarray

    def __post_init__(self):
        self.phases = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)

    def __len__(self) -> int:
        return self.phases.size

    @property
    def vector(self) -> np.ndarray:
        return np.exp(1j * self.phases)


def path_gain_constant(config: SystemConfig, placement: Placement, f: float) -> float:
    """Aperture-independent path-loss factor of the cascaded link at ``f``.

    Uses the centre distances of both hops and folds in the per-area weight
    1/d^2 of the continuous-aperture model plus the BS array factor.
    """
    if f <= 0:
        raise ValueError("frequency must be positive")
    c = SPEED_OF_LIGHT
    return (np.sqrt(config.bs_antennas) * c * c
            / (4.0 * np.pi ** 2 * f * f
               * placement.bs_distance * placement.ue_distance
               * config.spacing_m ** 2))


def element_amplitudes(grid: ElementGrid, placement: Placement, f) -> np.ndarray:
    """Exact per-element cascaded amplitude(s); ``f`` may be scalar or array."""
    l_bs, l_ue = route_lengths(grid, placement)
    f = np.asarray(f, dtype=float)
    c = SPEED_OF_LIGHT
    return c * c / (4.0 * np.pi ** 2 * np.multiply.outer(f * f, l_bs * l_ue))


def equivalent_gain_discrete(grid: ElementGrid, placement: Placement,
                             weights: Weights, f, n_bs: int = 1):
    """Ground-truth equivalent channel: exact element-wise phasor summation.

    ``f`` may be a scalar or a 1-D array of frequencies; the result matches
    the input shape. Summation runs in element index order.
    """
    if len(weights) != grid.n_elements:
        raise ValueError(
            f"weight count {len(weights)} != element count {grid.n_elements}")
    l_bs, l_ue = route_lengths(grid, placement)
    total = l_bs + l_ue
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    c = SPEED_OF_LIGHT
    amp = c * c / (4.0 * np.pi ** 2 * np.multiply.outer(f_arr ** 2, l_bs * l_ue))
    phase = weights.phases[None, :] - TWO_PI * np.multiply.outer(f_arr, total) / c
    g = np.sqrt(n_bs) * np.sum(amp * np.exp(1j * phase), axis=1)
    if np.isscalar(f) or np.asarray(f).ndim == 0:
        return complex(g[0])
    return g


def unconstrained_gain(grid: ElementGrid, placement: Placement,
                       coefficients: np.ndarray, f: float, n_bs: int = 1) -> complex:
    """Same summation kernel with arbitrary complex element coefficients.

    Exists so linearity in the coefficients can be exercised without the
    unit-modulus constraint getting in the way.
    """
    l_bs, l_ue = route_lengths(grid, placement)
    c = SPEED_OF_LIGHT
    amp = c * c / (4.0 * np.pi ** 2 * f * f * l_bs * l_ue)
    phasor = np.exp(-1j * TWO_PI * f * (l_bs + l_ue) / c)
    return complex(np.sqrt(n_bs) * np.sum(np.asarray(coefficients) * amp * phasor))


def equivalent_gain_exact_bs(grid: ElementGrid, placement: Placement,
                             bs: BSArray, weights: Weights, f):
    """Equivalent channel with per-antenna BS distances and a matched
    far-field precoder of unit power.

    Collapses to :func:`equivalent_gain_discrete` as the panel aperture
    shrinks to a point. ``f`` may be scalar or a 1-D array.
    """
    if len(weights) != grid.n_elements:
        raise ValueError("weight/element count mismatch")
    c = SPEED_OF_LIGHT
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    offsets = bs.antenna_offsets()                     # (M, 3)
    m1, m2 = bs.centered_indices()
    antenna_pos = placement.bs[None, :] + offsets      # (M, 3)
    # (N, M) exact element-to-antenna distances; frequency-independent, so
    # hoist everything except the per-frequency phasor out of the loop
    dist = np.linalg.norm(grid.positions[:, None, :] - antenna_pos[None, :, :], axis=2)
    _, l_ue = route_lengths(grid, placement)
    w = weights.vector
    steer = bs.spacing * (bs.xi1 * m1 + bs.xi2 * m2)   # (M,) precoder delay term
    total_delay = dist + steer[None, :]
    inv_dist = 1.0 / dist
    out = np.empty(f_arr.size, dtype=complex)
    for i, fk in enumerate(f_arr):
        k = TWO_PI * fk / c
        # BS->element response contracted with the conjugated far-field steer
        incident = np.einsum("nm,nm->n", inv_dist, np.exp(-1j * k * total_delay))
        incident *= c / (TWO_PI * fk * np.sqrt(bs.n_antennas))
        ue_resp = (c / (TWO_PI * fk * l_ue)) * np.exp(-1j * k * l_ue)
        out[i] = np.sum(w * ue_resp * incident)
    if np.isscalar(f) or np.asarray(f).ndim == 0:
        return complex(out[0])
    return out
