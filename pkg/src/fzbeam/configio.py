"""Flat key-value config files, resolved defaults, and run manifests.

Grammar: one ``key = value`` per line, ``#`` starts a comment. Values are
numbers (int/float/scientific), bare or quoted strings, or ``[a, b, c]``
arrays of numbers/strings. Unknown keys are rejected with line context.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .beamformers import GsaParams
from .evaluation import KNOWN_METHODS, ExperimentSpec
from .scenario import Placement, SystemConfig

TOOL_VERSION = "0.1.0"

# resolved defaults; scalar system values follow the reference simulation
# setup, the rest are this tool's recorded choices
DEFAULTS: dict = {
    "carrier_hz": 30e9,
    "bandwidth_hz": 1.5e9,
    "subcarriers": 128,
    "ris_side_m": 1.0,
    "spacing_m": None,            # None -> half wavelength at the carrier
    "elements_x": None,           # None -> floor(side / spacing)
    "elements_y": None,
    "bs_antennas": 1,
    "noise_psd_dbm_hz": -170.0,
    "tx_power_dbm": 30.0,
    "quantize_bits": None,
    "bs_xyz": [6.4, 5.0, 14.4],
    "ue_xyz": [-4.8, 5.0, 6.4],
    "bs_range_m": [7.0, 13.0],
    "ue_range_m": [7.0, 13.0],
    "sweep": "tx_power",
    "sweep_values": [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
    "methods": ["narrowband", "vsa", "fz-spm", "fz-gsa", "upper-bound"],
    "trials": 10,
    "seed": 1,
    "vsa_subarrays": 10,
    "gsa_iterations": 150,
    "gsa_band_factor": 1.1,
    "gsa_freq_oversample": 4,
}

# choices the underlying description leaves open; surfaced in every manifest
DEFAULT_NOTES = [
    "random placements: direction uniform on the upper hemisphere, radius uniform in range",
    "rate bound uses the bandwidth-normalised form B*log2(1 + Sx*Eg/(B*Ssigma))",
    "subcarrier count defaults to 128; trial count and transmit power are tool defaults",
    "virtual-subarray baseline: contiguous row bands, ascending frequency order",
    "route-length sweep samples both hop ranges as [0.35, 0.65] of the total route",
]


class ConfigError(ValueError):
    """Config file problem, annotated with file/line context."""


def _parse_scalar(token: str):
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    for cast in (int, float):
        try:
            return cast(token)
        except ValueError:
            continue
    lowered = token.lower()
    if lowered in ("none", "null"):
        return None
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    return token


def _parse_value(raw: str):
    raw = raw.strip()
    if raw.startswith("["):
        if not raw.endswith("]"):
            raise ValueError("unterminated array")
        inner = raw[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(item) for item in inner.split(",")]
    return _parse_scalar(raw)


def read_config_file(path) -> dict:
    """Parse a key-value file into a raw dict, validating keys."""
    values: dict = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return values


def resolve(overrides: dict | None = None) -> dict:
    resolved = dict(DEFAULTS)
    if overrides:
        for key in overrides:
            if key not in DEFAULTS:
                raise ConfigError(f"unknown key {key!r}")
        resolved.update(overrides)
    return resolved


def _coerce_range(value, key) -> tuple[float, float]:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{key} must be a two-element array")
    lo, hi = float(value[0]), float(value[1])
    if not (0 < lo <= hi):
        raise ConfigError(f"{key} must satisfy 0 < min <= max")
    return lo, hi


def build_objects(resolved: dict) -> tuple[SystemConfig, ExperimentSpec, Placement]:
    """Materialise the validated domain objects from a resolved dict."""
    try:
        config = SystemConfig(
            carrier_hz=float(resolved["carrier_hz"]),
            bandwidth_hz=float(resolved["bandwidth_hz"]),
            subcarriers=int(resolved["subcarriers"]),
            side_m=float(resolved["ris_side_m"]),
            spacing_m=None if resolved["spacing_m"] is None else float(resolved["spacing_m"]),
            nx=None if resolved["elements_x"] is None else int(resolved["elements_x"]),
            ny=None if resolved["elements_y"] is None else int(resolved["elements_y"]),
            bs_antennas=int(resolved["bs_antennas"]),
            noise_psd_dbm=float(resolved["noise_psd_dbm_hz"]),
            tx_power_dbm=float(resolved["tx_power_dbm"]),
            phase_bits=None if resolved["quantize_bits"] is None else int(resolved["quantize_bits"]),
        )
        gsa = GsaParams(
            extended_band_factor=float(resolved["gsa_band_factor"]),
            freq_oversample=int(resolved["gsa_freq_oversample"]),
            max_iters=int(resolved["gsa_iterations"]),
        )
        methods = tuple(resolved["methods"])
        for m in methods:
            if m not in KNOWN_METHODS:
                raise ConfigError(f"unknown method {m!r} (known: {', '.join(KNOWN_METHODS)})")
        spec = ExperimentSpec(
            sweep=str(resolved["sweep"]),
            values=tuple(float(v) for v in resolved["sweep_values"]),
            methods=methods,
            trials=int(resolved["trials"]),
            seed=int(resolved["seed"]),
            bs_range=_coerce_range(resolved["bs_range_m"], "bs_range_m"),
            ue_range=_coerce_range(resolved["ue_range_m"], "ue_range_m"),
            vsa_subarrays=int(resolved["vsa_subarrays"]),
            gsa=gsa,
        )
        placement = Placement(
            bs=[float(v) for v in resolved["bs_xyz"]],
            ue=[float(v) for v in resolved["ue_xyz"]],
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return config, spec, placement


def parse_config(path=None) -> tuple[SystemConfig, ExperimentSpec, Placement, dict]:
    """Load, resolve and validate; an absent or empty file means defaults."""
    overrides = read_config_file(path) if path is not None else {}
    resolved = resolve(overrides)
    config, spec, placement = build_objects(resolved)
    return config, spec, placement, resolved


def format_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(resolved: dict) -> str:
    """Emit a resolved config that re-parses to the same values."""
    lines = [f"{key} = {format_value(resolved[key])}" for key in DEFAULTS]
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    """Sidecar metadata sufficient to re-run an output bit-identically."""

    command: str
    arguments: list
    seed: int
    resolved_config: dict
    notes: list = field(default_factory=lambda: list(DEFAULT_NOTES))
    tool_version: str = TOOL_VERSION
    created_utc: str = ""

    def __post_init__(self):
        if not self.created_utc:
            self.created_utc = datetime.now(timezone.utc).isoformat()

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, default=str) + "\n")


def manifest_for(command: str, argv: list, seed: int, resolved: dict) -> RunManifest:
    return RunManifest(command=command, arguments=[str(a) for a in argv],
                       seed=seed, resolved_config=resolved)
