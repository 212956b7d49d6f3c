"""Constant-route-length geometry on the RIS plane.

The two-hop route length is constant on confocal ellipsoids around the BS
and UE; their intersections with the z=0 plane form a family of ellipses.
This module translates/rotates into a frame where that family has a
standard form, evaluates the area Jacobian of the (semi-major, angle)
parameterisation in closed form, clips each ellipse against the square
aperture, and integrates the result into the reflective-intensity profile
that every wideband design downstream consumes.

Frame convention: the in-plane rotation angle is atan2(y_bs - y_ue,
x_bs - x_ue), so the UE projects onto (-u, 0) and the BS onto (+u, 0).
The z value paired with each focus follows that assignment.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .channel import path_gain_constant
from .scenario import SPEED_OF_LIGHT, ElementGrid, Placement, SystemConfig, build_ris_grid, delay_extent

TWO_PI = 2.0 * np.pi
# corner/tangency deduplication tolerance for arc endpoints (radians)
ARC_TOL = 1e-12


@dataclass
class FresnelFrame:
    """Translated/rotated frame in which the zone ellipses are axis-aligned.

    ``half_gap`` is half the projected distance between the two foci;
    ``z_minus``/``z_plus`` are the heights of the foci sitting at
    (-half_gap, 0) and (+half_gap, 0) respectively.
    """

    x_mid: float
    y_mid: float
    rotation: float
    half_gap: float
    z_minus: float
    z_plus: float

    def to_frame(self, x, y):
        ca, sa = math.cos(self.rotation), math.sin(self.rotation)
        xr = (np.asarray(x) - self.x_mid) * ca + (np.asarray(y) - self.y_mid) * sa
        yr = -(np.asarray(x) - self.x_mid) * sa + (np.asarray(y) - self.y_mid) * ca
        return xr, yr

    def to_global(self, xf, yf):
        ca, sa = math.cos(self.rotation), math.sin(self.rotation)
        x = self.x_mid + np.asarray(xf) * ca - np.asarray(yf) * sa
        y = self.y_mid + np.asarray(xf) * sa + np.asarray(yf) * ca
        return x, y

    @property
    def a_floor(self) -> float:
        """Smallest semi-major axis whose zone meets the z=0 plane."""
        return 0.5 * math.sqrt(
            4.0 * self.half_gap ** 2 + (self.z_minus + self.z_plus) ** 2)


@dataclass
class EllipseParams:
    """Standard-form parameters of one zone's intersection ellipse.

    The drawn semi-axes are ``semi_major * scale`` and ``semi_minor * scale``
    with the centre shifted by ``center_offset`` along the frame x-axis.
    """

    semi_major: float
    semi_minor: float
    center_offset: float
    scale: float


def build_frame(placement: Placement) -> FresnelFrame:
    """Frame whose origin is the projected BS/UE midpoint, x-axis along the
    projected UE -> BS direction."""
    bs, ue = placement.bs, placement.ue
    rotation = math.atan2(bs[1] - ue[1], bs[0] - ue[0])
    half_gap = 0.5 * math.hypot(bs[0] - ue[0], bs[1] - ue[1])
    if half_gap < 1e-15:
        rotation = 0.0               # circular degenerate case: no preferred axis
    return FresnelFrame(
        x_mid=0.5 * (bs[0] + ue[0]),
        y_mid=0.5 * (bs[1] + ue[1]),
        rotation=rotation,
        half_gap=half_gap,
        z_minus=float(ue[2]),
        z_plus=float(bs[2]),
    )


def ellipse_params(frame: FresnelFrame, a: float) -> EllipseParams:
    """Standard-form ellipse of the zone with semi-major axis ``a``."""
    u = frame.half_gap
    if a <= u:
        raise ValueError(f"semi-major axis {a} must exceed projected focus gap {u}")
    b_sq = a * a - u * u
    z_diff = frame.z_minus ** 2 - frame.z_plus ** 2
    z_sum = frame.z_minus ** 2 + frame.z_plus ** 2
    scale_sq = 1.0 + z_diff * z_diff / (16.0 * b_sq * b_sq) - z_sum / (2.0 * b_sq)
    if scale_sq <= 0.0:
        raise ValueError(f"zone a={a} does not intersect the RIS plane")
    return EllipseParams(
        semi_major=a,
        semi_minor=math.sqrt(b_sq),
        center_offset=u * z_diff / (4.0 * b_sq),
        scale=math.sqrt(scale_sq),
    )


def fz_to_cartesian(frame: FresnelFrame, a: float, theta):
    """Map zone coordinates (a, theta) to global plane coordinates (x, y)."""
    p = ellipse_params(frame, a)
    th = np.asarray(theta, dtype=float)
    xf = p.semi_major * p.scale * np.cos(th) + p.center_offset
    yf = p.semi_minor * p.scale * np.sin(th)
    return frame.to_global(xf, yf)


def a_of_point(frame: FresnelFrame, x, y):
    """Semi-major axis of the zone through global plane point (x, y)."""
    xf, yf = frame.to_frame(x, y)
    u = frame.half_gap
    d_minus = np.sqrt((xf + u) ** 2 + yf ** 2 + frame.z_minus ** 2)
    d_plus = np.sqrt((xf - u) ** 2 + yf ** 2 + frame.z_plus ** 2)
    return 0.5 * (d_minus + d_plus)


def _jacobian_coeffs(frame: FresnelFrame, a: float) -> tuple[float, float, float]:
    """Fourier coefficients (c0, c1, c2) of J(a, .) = c0 + c1 cos + c2 cos2."""
    p = ellipse_params(frame, a)
    u = frame.half_gap
    b = p.semi_minor
    b_sq = b * b
    eta_sq = p.scale * p.scale
    z_diff = frame.z_minus ** 2 - frame.z_plus ** 2
    z_sum = frame.z_minus ** 2 + frame.z_plus ** 2
    c0 = (eta_sq * (2.0 * a * a - u * u) / (2.0 * b)
          + 0.5 * a * a * (z_sum / (b_sq * b) - z_diff * z_diff / (4.0 * b_sq * b_sq * b)))
    c1 = -a * u * z_diff * p.scale / (2.0 * b_sq * b)
    c2 = -eta_sq * u * u / (2.0 * b)
    return c0, c1, c2


def jacobian(frame: FresnelFrame, a: float, theta):
    """|det d(x,y)/d(a,theta)| of the zone parameterisation."""
    c0, c1, c2 = _jacobian_coeffs(frame, a)
    th = np.asarray(theta, dtype=float)
    out = np.abs(c0 + c1 * np.cos(th) + c2 * np.cos(2.0 * th))
    return float(out) if out.ndim == 0 else out


def _edge_crossings(frame: FresnelFrame, p: EllipseParams, side_x: float,
                    side_y: float) -> list[float]:
    """Angles where the zone crosses any of the four aperture edge lines.

    Each edge gives a condition linear in (cos theta, sin theta); spurious
    roots beyond the edge segment are harmless because interval membership
    is re-tested at midpoints afterwards.
    """
    ca, sa = math.cos(frame.rotation), math.sin(frame.rotation)
    ax = p.semi_major * p.scale
    ay = p.semi_minor * p.scale
    x0 = p.center_offset
    crossings: list[float] = []
    # global x = x_mid + (ax cos + x0) ca - ay sin sa ; global y analogous
    edge_terms = (
        (ax * ca, -ay * sa, frame.x_mid + x0 * ca, side_x / 2.0),
        (ax * ca, -ay * sa, frame.x_mid + x0 * ca, -side_x / 2.0),
        (ax * sa, ay * ca, frame.y_mid + x0 * sa, side_y / 2.0),
        (ax * sa, ay * ca, frame.y_mid + x0 * sa, -side_y / 2.0),
    )
    for pc, ps, offset, target in edge_terms:
        amp = math.hypot(pc, ps)
        if amp < 1e-300:
            continue
        ratio = (target - offset) / amp
        if abs(ratio) > 1.0:
            continue
        base = math.atan2(ps, pc)
        delta = math.acos(max(-1.0, min(1.0, ratio)))
        crossings.extend((base + delta, base - delta))
    return crossings


def visible_arcs(frame: FresnelFrame, a: float, side: float,
                 side_y: float | None = None) -> list[tuple[float, float]]:
    """Maximal theta-intervals of zone ``a`` lying inside the square aperture.

    Returns a list of (start, end) with end > start; an interval may wrap
    past 2*pi. Empty list when the zone misses the aperture entirely.
    """
    sy = side if side_y is None else side_y
    p = ellipse_params(frame, a)
    half_x, half_y = side / 2.0, sy / 2.0

    def inside(theta_vals) -> np.ndarray:
        x, y = fz_to_cartesian(frame, a, theta_vals)
        tol = 1e-12 * max(side, sy)
        return (np.abs(x) <= half_x + tol) & (np.abs(y) <= half_y + tol)

    angles = np.mod(np.asarray(_edge_crossings(frame, p, side, sy)), TWO_PI)
    angles = np.sort(angles)
    if angles.size:
        keep = np.ones(angles.size, dtype=bool)
        keep[1:] = np.diff(angles) > ARC_TOL
        if angles.size > 1 and (angles[-1] - angles[0]) > TWO_PI - ARC_TOL:
            keep[-1] = False
        angles = angles[keep]

    if angles.size == 0:
        return [(0.0, TWO_PI)] if bool(inside(0.0)) else []

    starts = angles
    ends = np.append(angles[1:], angles[0] + TWO_PI)
    mids = 0.5 * (starts + ends)
    kept = inside(mids)
    arcs = [(float(s), float(e)) for s, e, k in zip(starts, ends, kept) if k]
    if not arcs:
        return []
    # merge runs split by spurious line crossings outside the edge segments
    merged = [list(arcs[0])]
    for s, e in arcs[1:]:
        if abs(s - merged[-1][1]) <= ARC_TOL:
            merged[-1][1] = e
        else:
            merged.append([s, e])
    if len(merged) > 1 and abs((merged[0][0] + TWO_PI) - merged[-1][1]) <= ARC_TOL:
        merged[0][0] = merged[-1][0] - TWO_PI
        merged.pop()
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= TWO_PI - ARC_TOL:
        return [(0.0, TWO_PI)]
    return [(s, e) for s, e in merged]


def _arc_weight(frame: FresnelFrame, a: float, arcs) -> float:
    """Integral of the Jacobian over the visible arcs, in closed form."""
    c0, c1, c2 = _jacobian_coeffs(frame, a)
    total = 0.0
    for start, end in arcs:
        total += (c0 * (end - start)
                  + c1 * (math.sin(end) - math.sin(start))
                  + c2 * 0.5 * (math.sin(2.0 * end) - math.sin(2.0 * start)))
    return total


@dataclass
class IntensityProfile:
    """Reflective intensity across zones, sampled on a uniform grid of the
    semi-major axis. ``g0`` and the values are frozen at the carrier."""

    a: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    g0: float
    carrier_hz: float

    def __post_init__(self):
        if np.any(self.v < -1e-12 * max(1.0, float(np.max(np.abs(self.v))))):
            raise ValueError("reflective intensity must be nonnegative")
        self.v = np.maximum(self.v, 0.0)

    @property
    def t(self) -> np.ndarray:
        """Delay samples matching the a-grid."""
        return 2.0 * self.a / SPEED_OF_LIGHT

    @property
    def v_t(self) -> np.ndarray:
        """Intensity against delay instead of semi-major axis."""
        return 0.5 * SPEED_OF_LIGHT * self.v

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    @property
    def delta_t(self) -> float:
        return self.t_max - self.t_min

    @property
    def total_weight(self) -> float:
        """Aperture weight: integral of v over a (the peak aligned gain)."""
        return float(np.trapezoid(self.v, self.a))

    @property
    def energy(self) -> float:
        """Channel energy: integral of v_t^2 over delay."""
        return float(np.trapezoid(self.v_t ** 2, self.t))


def profile_grid_spacing(config: SystemConfig) -> float:
    """Sample spacing on the semi-major axis: at most half the element
    spacing, and fine enough that the top-of-band phase step per sample
    stays below pi."""
    return min(config.spacing_m / 2.0, SPEED_OF_LIGHT / (4.0 * config.f_high))


def intensity_profile(frame: FresnelFrame, config: SystemConfig,
                      placement: Placement,
                      grid: ElementGrid | None = None) -> IntensityProfile:
    """Sample the reflective intensity v(a) over the zone range spanned by
    the element grid, clipping each zone against the aperture square."""
    if grid is None:
        grid = build_ris_grid(config)
    t_min, t_max, spread = delay_extent(grid, placement)
    a_min = 0.5 * SPEED_OF_LIGHT * t_min
    a_max = 0.5 * SPEED_OF_LIGHT * t_max
    if a_max - a_min < 1e-12:
        # single-element grid: no delay spread, keep a token two-sample span
        a_max = a_min + config.spacing_m / 2.0
    step = profile_grid_spacing(config)
    # a floor on the sample count keeps near-degenerate spans (mirrored
    # endpoints, tiny delay spread) resolvable by the downstream transforms
    n = max(33, int(math.ceil((a_max - a_min) / step)) + 1)
    a_grid = np.linspace(a_min, a_max, n)
    g0 = path_gain_constant(config, placement, config.carrier_hz)
    side = config.side_m
    v = np.empty(n)
    for i, a in enumerate(a_grid):
        arcs = visible_arcs(frame, float(a), side)
        v[i] = g0 * _arc_weight(frame, float(a), arcs) if arcs else 0.0
    return IntensityProfile(a=a_grid, v=v, g0=g0, carrier_hz=config.carrier_hz)


def cumulative_energy(profile: IntensityProfile) -> tuple[np.ndarray, np.ndarray]:
    """(P, Lambda): running integral of v^2 over a, and the running integral
    of P normalised by its final value. Both sampled on the profile grid."""
    p = cumulative_trapezoid(profile.v ** 2, profile.a, initial=0.0)
    total = p[-1]
    if total <= 0.0:
        return p, np.zeros_like(p)
    lam = cumulative_trapezoid(p / total, profile.a, initial=0.0)
    return p, lam


def profile_to_csv(profile: IntensityProfile, path) -> None:
    """Dump the sampled profile for debugging plots."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a_m", "t_s", "v", "v_t"])
        for a, t, v, vt in zip(profile.a, profile.t, profile.v, profile.v_t):
            writer.writerow([repr(float(a)), repr(float(t)), repr(float(v)), repr(float(vt))])
