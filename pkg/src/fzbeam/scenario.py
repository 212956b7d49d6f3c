"""System configuration, RIS element geometry and link placements.

Everything here is pure data plus pure functions; random placement sampling
takes an explicit seed or generator so Monte Carlo runs stay reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Propagation speed used throughout (m/s). The usual comms convention of
# 3e8 keeps half-wavelength spacing at 30 GHz exactly 5 mm.
SPEED_OF_LIGHT = 3.0e8


@dataclass
class SystemConfig:
    """Static system parameters: band plan, RIS geometry, link budget knobs.

    Element counts default to floor(side/spacing) per axis when not given.
    """

    carrier_hz: float = 30e9
    bandwidth_hz: float = 1.5e9
    subcarriers: int = 128
    side_m: float = 1.0
    spacing_m: float | None = None       # default: half wavelength at carrier
    nx: int | None = None
    ny: int | None = None
    bs_antennas: int = 1
    noise_psd_dbm: float = -170.0
    tx_power_dbm: float = 30.0
    phase_bits: int | None = None

    def __post_init__(self):
        if self.spacing_m is None:
            self.spacing_m = SPEED_OF_LIGHT / (2.0 * self.carrier_hz)
        if self.nx is None:
            self.nx = max(1, int(math.floor(self.side_m / self.spacing_m + 1e-9)))
        if self.ny is None:
            self.ny = max(1, int(math.floor(self.side_m / self.spacing_m + 1e-9)))
        self.validate()

    def validate(self):
        if not (self.carrier_hz > self.bandwidth_hz / 2.0 > 0.0):
            raise ValueError(
                f"need carrier > bandwidth/2 > 0, got fc={self.carrier_hz}, B={self.bandwidth_hz}")
        if self.spacing_m <= 0:
            raise ValueError("element spacing must be positive")
        if self.nx * self.spacing_m > self.side_m + self.spacing_m + 1e-12:
            raise ValueError("nx elements do not fit the RIS side")
        if self.ny * self.spacing_m > self.side_m + self.spacing_m + 1e-12:
            raise ValueError("ny elements do not fit the RIS side")
        if self.subcarriers < 1:
            raise ValueError("subcarrier count must be >= 1")
        if self.bs_antennas < 1:
            raise ValueError("BS antenna count must be >= 1")
        if self.phase_bits is not None and (
                self.phase_bits < 1 or int(self.phase_bits) != self.phase_bits):
            raise ValueError("phase_bits must be a positive integer")

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def band(self) -> tuple[float, float]:
        """(carrier, bandwidth) pair used by the phase designs."""
        return self.carrier_hz, self.bandwidth_hz

    @property
    def f_low(self) -> float:
        return self.carrier_hz - self.bandwidth_hz / 2.0

    @property
    def f_high(self) -> float:
        return self.carrier_hz + self.bandwidth_hz / 2.0


@dataclass
class Placement:
    """BS and UE positions, both strictly on the reflective side (z > 0)."""

    bs: np.ndarray
    ue: np.ndarray

    def __post_init__(self):
        self.bs = np.asarray(self.bs, dtype=float)
        self.ue = np.asarray(self.ue, dtype=float)
        if self.bs.shape != (3,) or self.ue.shape != (3,):
            raise ValueError("bs and ue must be 3-vectors")
        if self.bs[2] <= 0 or self.ue[2] <= 0:
            raise ValueError("bs and ue must have z > 0 (off the RIS plane)")

    @property
    def bs_distance(self) -> float:
        return float(np.linalg.norm(self.bs))

    @property
    def ue_distance(self) -> float:
        return float(np.linalg.norm(self.ue))

    def swapped(self) -> "Placement":
        return Placement(self.ue.copy(), self.bs.copy())


@dataclass
class ElementGrid:
    """RIS element positions in the z=0 plane, centred on the origin.

    Element (i, j) (0-based) sits at ((i - (nx-1)/2) d, (j - (ny-1)/2) d, 0)
    and is flattened to index i * ny + j.
    """

    nx: int
    ny: int
    spacing: float
    positions: np.ndarray = field(repr=False)

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    def flat_index(self, i: int, j: int) -> int:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"element ({i}, {j}) outside {self.nx}x{self.ny} grid")
        return i * self.ny + j

    def axis_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-element (i, j) axis indices in flat order."""
        idx = np.arange(self.n_elements)
        return idx // self.ny, idx % self.ny


def build_ris_grid(config: SystemConfig) -> ElementGrid:
    """Lay out the RIS elements symmetrically about the origin."""
    nx, ny, d = config.nx, config.ny, config.spacing_m
    xs = (np.arange(1, nx + 1) - (nx + 1) / 2.0) * d
    ys = (np.arange(1, ny + 1) - (ny + 1) / 2.0) * d
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    positions = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(nx * ny)])
    return ElementGrid(nx=nx, ny=ny, spacing=d, positions=positions)


@dataclass
class BSArray:
    """BS antenna panel: offsets along two orthonormal directions plus the
    departure cosines seen toward the RIS centre."""

    u1: np.ndarray
    u2: np.ndarray
    n1: int
    n2: int
    spacing: float
    xi1: float
    xi2: float

    def __post_init__(self):
        self.u1 = np.asarray(self.u1, dtype=float)
        self.u2 = np.asarray(self.u2, dtype=float)
        for u in (self.u1, self.u2):
            if abs(np.linalg.norm(u) - 1.0) > 1e-9:
                raise ValueError("array directions must be unit vectors")
        if abs(float(self.u1 @ self.u2)) > 1e-9:
            raise ValueError("array directions must be orthogonal")

    @property
    def n_antennas(self) -> int:
        return self.n1 * self.n2

    def antenna_offsets(self) -> np.ndarray:
        """(n1*n2, 3) offsets of each antenna from the panel centre."""
        m1 = np.arange(self.n1) - (self.n1 - 1) / 2.0
        m2 = np.arange(self.n2) - (self.n2 - 1) / 2.0
        g1, g2 = np.meshgrid(m1, m2, indexing="ij")
        return (g1.ravel()[:, None] * self.u1[None, :]
                + g2.ravel()[:, None] * self.u2[None, :]) * self.spacing

    def centered_indices(self) -> tuple[np.ndarray, np.ndarray]:
        m1 = np.arange(self.n1) - (self.n1 - 1) / 2.0
        m2 = np.arange(self.n2) - (self.n2 - 1) / 2.0
        g1, g2 = np.meshgrid(m1, m2, indexing="ij")
        return g1.ravel(), g2.ravel()


def broadside_bs_array(placement: Placement, n1: int, n2: int,
                       spacing: float) -> BSArray:
    """Panel orthogonal to the BS -> RIS-centre boresight (departure cosines 0)."""
    boresight = -placement.bs / np.linalg.norm(placement.bs)
    ref = np.array([0.0, 0.0, 1.0])
    if abs(boresight @ ref) > 0.99:
        ref = np.array([1.0, 0.0, 0.0])
    u1 = np.cross(boresight, ref)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(boresight, u1)
    xi1 = float(u1 @ boresight)
    xi2 = float(u2 @ boresight)
    return BSArray(u1=u1, u2=u2, n1=n1, n2=n2, spacing=spacing, xi1=xi1, xi2=xi2)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_placement(rng_seed, l_bs_range, l_ue_range) -> Placement:
    """Draw a random placement: direction uniform on the upper hemisphere,
    radius uniform in the given interval, independently for BS and UE.

    ``rng_seed`` may be an int (or anything ``default_rng`` accepts) or an
    existing Generator; the same seed always yields the same placement.
    """
    rng = _as_rng(rng_seed)
    points = []
    for lo, hi in (l_bs_range, l_ue_range):
        if not (0 < lo <= hi):
            raise ValueError(f"invalid distance range [{lo}, {hi}]")
        cos_el = rng.uniform(0.0, 1.0)
        while cos_el <= 1e-9:        # keep strictly off the RIS plane
            cos_el = rng.uniform(0.0, 1.0)
        az = rng.uniform(0.0, 2.0 * np.pi)
        sin_el = math.sqrt(max(0.0, 1.0 - cos_el * cos_el))
        radius = rng.uniform(lo, hi)
        points.append(radius * np.array(
            [sin_el * math.cos(az), sin_el * math.sin(az), cos_el]))
    return Placement(bs=points[0], ue=points[1])


def route_lengths(grid: ElementGrid, placement: Placement) -> tuple[np.ndarray, np.ndarray]:
    """Per-element exact distances (element->BS, element->UE)."""
    l_bs = np.linalg.norm(grid.positions - placement.bs[None, :], axis=1)
    l_ue = np.linalg.norm(grid.positions - placement.ue[None, :], axis=1)
    return l_bs, l_ue


def delay_extent(grid: ElementGrid, placement: Placement) -> tuple[float, float, float]:
    """(t_min, t_max, spread) of the two-hop propagation delay over all elements."""
    l_bs, l_ue = route_lengths(grid, placement)
    t = (l_bs + l_ue) / SPEED_OF_LIGHT
    t_min = float(t.min())
    t_max = float(t.max())
    return t_min, t_max, t_max - t_min
