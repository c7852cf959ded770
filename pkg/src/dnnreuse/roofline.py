"""Roofline placement of networks against a device's compute/memory ceiling.

Intensities may be compared in two ways. In "raw" mode the per-element
operation count is held against the device's compute-to-memory ratio
directly, one MAC per operation and one element per byte. In
"converted" mode the intensity is first rescaled by flops_per_mac and
bytes_per_element so the comparison happens in flops per byte.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import InputError

HARDWARE_KEYS = ("name", "peak_flops", "peak_bandwidth_bytes_per_s")

MODES = ("raw", "converted")


class Bound(enum.Enum):
    COMPUTE = "ComputeBound"
    MEMORY = "MemoryBound"


@dataclass(frozen=True)
class HardwareSpec:
    name: str
    peak_throughput: float
    peak_bandwidth: float

    def __post_init__(self):
        if self.peak_throughput <= 0 or self.peak_bandwidth <= 0:
            raise InputError("hardware peaks must be positive")

    @property
    def cmr(self) -> float:
        """Compute-to-memory ratio, operations per byte at both peaks."""
        return self.peak_throughput / self.peak_bandwidth


@dataclass(frozen=True)
class RooflinePoint:
    label: str
    intensity: float
    attainable: float
    bound: Bound
    measured: float | None = None


@dataclass(frozen=True)
class RooflineChart:
    hardware: HardwareSpec
    mode: str
    points: tuple[RooflinePoint, ...]
    envelope: tuple[tuple[float, float], ...]


def load_hardware_spec(text: str) -> HardwareSpec:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"hardware spec is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("hardware spec must be a mapping")
    if "cmr" in doc:
        raise InputError("cmr is derived from the peaks, do not state it in the spec")
    unknown = sorted(set(doc) - set(HARDWARE_KEYS))
    if unknown:
        raise InputError(f"unknown hardware fields: {', '.join(unknown)}")
    missing = [k for k in HARDWARE_KEYS if k not in doc]
    if missing:
        raise InputError(f"hardware spec missing fields: {', '.join(missing)}")
    name = doc["name"]
    if not isinstance(name, str) or not name:
        raise InputError("hardware name must be a non-empty string")
    values = {}
    for key in ("peak_flops", "peak_bandwidth_bytes_per_s"):
        raw = doc[key]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise InputError(f"{key} must be a number, got {raw!r}")
        if raw <= 0:
            raise InputError(f"{key} must be positive, got {raw}")
        values[key] = float(raw)
    return HardwareSpec(
        name=name,
        peak_throughput=values["peak_flops"],
        peak_bandwidth=values["peak_bandwidth_bytes_per_s"],
    )


def _conversion(mode: str, bytes_per_element: float, flops_per_mac: float) -> float:
    """Factor taking an input-units intensity to operations per byte."""
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")
    if bytes_per_element <= 0 or flops_per_mac <= 0:
        raise InputError("bytes_per_element and flops_per_mac must be positive")
    if mode == "raw":
        return 1.0
    return flops_per_mac / bytes_per_element


def attainable_throughput(
    hw: HardwareSpec,
    intensity: float,
    mode: str = "raw",
    bytes_per_element: float = 4.0,
    flops_per_mac: float = 2.0,
) -> float:
    """min(peak, intensity * bandwidth) in the comparison space."""
    factor = _conversion(mode, bytes_per_element, flops_per_mac)
    if intensity <= 0:
        raise InputError(f"intensity must be positive, got {intensity}")
    return min(hw.peak_throughput, intensity * factor * hw.peak_bandwidth)


def classify(
    hw: HardwareSpec,
    intensity: float,
    mode: str = "raw",
    bytes_per_element: float = 4.0,
    flops_per_mac: float = 2.0,
) -> Bound:
    """Compute bound at or above the ridge intensity, memory bound below."""
    factor = _conversion(mode, bytes_per_element, flops_per_mac)
    if intensity <= 0:
        raise InputError(f"intensity must be positive, got {intensity}")
    return Bound.COMPUTE if intensity * factor >= hw.cmr else Bound.MEMORY


def roofline_points(
    hw: HardwareSpec,
    points,
    measured=None,
    mode: str = "raw",
    bytes_per_element: float = 4.0,
    flops_per_mac: float = 2.0,
    envelope_points: int = 64,
) -> RooflineChart:
    """Place labelled intensities on the roofline and sample its envelope.

    points: iterable of (label, intensity) in input units.
    measured: optional mapping label -> achieved operations per second,
    carried through to the chart untouched.
    """
    factor = _conversion(mode, bytes_per_element, flops_per_mac)
    if envelope_points < 2:
        raise InputError("envelope needs at least 2 samples per segment")
    measured = dict(measured or {})
    placed = []
    for label, intensity in points:
        placed.append(
            RooflinePoint(
                label=str(label),
                intensity=float(intensity),
                attainable=attainable_throughput(hw, intensity, mode, bytes_per_element, flops_per_mac),
                bound=classify(hw, intensity, mode, bytes_per_element, flops_per_mac),
                measured=measured.get(label),
            )
        )
    if not placed:
        raise InputError("no points to place on the roofline")
    knee = hw.cmr / factor
    lo = min(min(p.intensity for p in placed), knee) / 10.0
    hi = max(max(p.intensity for p in placed), knee) * 10.0
    slope = np.geomspace(lo, knee, envelope_points)
    roof = np.geomspace(knee, hi, envelope_points)
    envelope = [(float(x), float(min(hw.peak_throughput, x * factor * hw.peak_bandwidth))) for x in slope]
    envelope += [(float(x), hw.peak_throughput) for x in roof]
    return RooflineChart(hardware=hw, mode=mode, points=tuple(placed), envelope=tuple(envelope))
