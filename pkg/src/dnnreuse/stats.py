"""Correlation, calibration sweep, and confidence-interval machinery.

The z-critical values are fixed constants (1.96 for 95%, 2.58 for 99%)
rather than quantiles recomputed from a normal distribution, so that
reported intervals are stable to the last printed digit.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateDataError, InputError
from .metrics import weighted_intensity

Z_CRITICAL = {0.95: 1.96, 0.99: 2.58}


@dataclass(frozen=True)
class CalibrationPoint:
    alpha: float
    r_p: float
    r_s: float


@dataclass(frozen=True)
class CalibrationCurve:
    """Correlation of DI(alpha) with measured efficiency over an alpha grid."""

    points: tuple[CalibrationPoint, ...]
    selected_alpha: float
    selection_rule: dict

    def alphas(self):
        return [p.alpha for p in self.points]

    def pearson_values(self):
        return [p.r_p for p in self.points]


@dataclass(frozen=True)
class ConfidenceInterval:
    r: float
    n: int
    level: float
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _validate_pair(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise InputError(f"paired series must have equal length, got {xs.shape} and {ys.shape}")
    if len(xs) < 3:
        raise InputError("correlation needs at least 3 points")
    return xs, ys


def pearson(xs, ys) -> float:
    """Product-moment correlation coefficient."""
    xs, ys = _validate_pair(xs, ys)
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(np.sqrt(np.dot(dx, dx)))
    sy = float(np.sqrt(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateDataError("correlation undefined on a zero-variance series")
    r = float(np.dot(dx, dy) / (sx * sy))
    return max(-1.0, min(1.0, r))


def spearman(xs, ys) -> float:
    """Rank correlation: pearson over average ranks, ties get their mean rank."""
    xs, ys = _validate_pair(xs, ys)
    return pearson(rankdata(xs), rankdata(ys))


def alpha_grid(step: float = 0.05) -> list[float]:
    """[0, step, 2*step, ...] capped and terminated at exactly 1.0."""
    if not 0 < step <= 1:
        raise InputError(f"step must lie in (0, 1], got {step}")
    count = int(round(1.0 / step))
    if abs(count * step - 1.0) > 1e-9:
        raise InputError(f"step {step} does not divide the [0, 1] range evenly")
    return [round(i * step, 10) for i in range(count)] + [1.0]


def alpha_sweep(profiles, efficiencies, step: float = 0.05, epsilon: float = 0.005) -> CalibrationCurve:
    """Correlate DI(alpha) against efficiency over the grid; pick the plateau."""
    profiles = list(profiles)
    efficiencies = list(efficiencies)
    if len(profiles) != len(efficiencies):
        raise InputError("profiles and efficiencies must be matched lists")
    if len(profiles) < 3:
        raise InputError("calibration needs at least 3 networks")
    points = []
    for alpha in alpha_grid(step):
        dis = [weighted_intensity(p, alpha) for p in profiles]
        points.append(CalibrationPoint(alpha=alpha, r_p=pearson(dis, efficiencies), r_s=spearman(dis, efficiencies)))
    curve = CalibrationCurve(
        points=tuple(points),
        selected_alpha=math.nan,
        selection_rule={"rule": "plateau", "epsilon": epsilon},
    )
    return CalibrationCurve(
        points=curve.points,
        selected_alpha=select_alpha(curve, epsilon),
        selection_rule=curve.selection_rule,
    )


def select_alpha(curve: CalibrationCurve, epsilon: float = 0.005) -> float:
    """Smallest grid alpha where the next step gains less than epsilon.

    A curve that keeps improving by epsilon or more all the way to the
    end has no plateau; the argmax (first among ties) is returned then.
    """
    points = curve.points
    if not points:
        raise InputError("empty calibration curve")
    for here, after in zip(points, points[1:]):
        if after.r_p - here.r_p < epsilon:
            return here.alpha
    best = max(points, key=lambda p: p.r_p)
    return next(p.alpha for p in points if p.r_p == best.r_p)


def fisher_ci(r: float, n: int, level: float = 0.95) -> ConfidenceInterval:
    """Confidence interval for a population correlation via Fisher's Z.

    Z = atanh(r), standard error 1/sqrt(n - 3), fixed z-critical, then
    tanh back to correlation space.
    """
    if level not in Z_CRITICAL:
        raise InputError(f"level must be one of {sorted(Z_CRITICAL)}, got {level}")
    if n < 4:
        raise InputError(f"need n >= 4 for a finite standard error, got {n}")
    if not -1.0 < r < 1.0:
        raise InputError(f"Fisher transform diverges at |r| = 1, got {r}")
    z = math.atanh(r)
    margin = Z_CRITICAL[level] / math.sqrt(n - 3)
    return ConfidenceInterval(
        r=r,
        n=n,
        level=level,
        lower=math.tanh(z - margin),
        upper=math.tanh(z + margin),
    )


def fisher_z_width(n: int, level: float = 0.95) -> float:
    """Width of the interval in Z space, independent of r."""
    if level not in Z_CRITICAL:
        raise InputError(f"level must be one of {sorted(Z_CRITICAL)}, got {level}")
    if n < 4:
        raise InputError(f"need n >= 4, got {n}")
    return 2 * Z_CRITICAL[level] / math.sqrt(n - 3)


def min_sample_size(level: float = 0.95, max_z_width: float = 1.0) -> int:
    """Smallest sample count whose Z-space interval width fits the budget."""
    if level not in Z_CRITICAL:
        raise InputError(f"level must be one of {sorted(Z_CRITICAL)}, got {level}")
    if max_z_width <= 0:
        raise InputError("width budget must be positive")
    n = max(4, math.ceil((2 * Z_CRITICAL[level] / max_z_width) ** 2 + 3))
    while n > 4 and fisher_z_width(n - 1, level) <= max_z_width:
        n -= 1
    while fisher_z_width(n, level) > max_z_width:
        n += 1
    return n


def calibration_report(curve: CalibrationCurve) -> str:
    """CSV rows `alpha,r_p,r_s` plus a trailer carrying the selected alpha."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["alpha", "r_p", "r_s"])
    for p in curve.points:
        writer.writerow([f"{p.alpha:.2f}", f"{p.r_p:.4f}", f"{p.r_s:.4f}"])
    writer.writerow(["selected_alpha", f"{curve.selected_alpha:.2f}", ""])
    return out.getvalue()
