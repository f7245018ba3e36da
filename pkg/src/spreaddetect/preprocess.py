"""Seasonal baseline fitting and standardization for weekly count series.

Weekly totals are spread to daily averages, variance-stabilized with a
square root, and smoothed over day-of-year with a circular Gaussian kernel
fitted on a training window. Each subsequent week is residualized against
the fitted curve at its center day and standardized by the training
residual mean and standard deviation, producing one detector-ready row per
unit.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np

from .graph import NetworkGraph

__all__ = [
    "WeeklySeries",
    "SeasonalBaseline",
    "canonical_day_of_year",
    "kernel_smooth_day_of_year",
    "fit_seasonal",
    "detrend_standardize",
    "assemble_matrix",
    "read_weekly_csv",
]

DAYS_PER_YEAR = 365
DEFAULT_BANDWIDTH = 20.0


@dataclass(eq=False)
class WeeklySeries:
    """Weekly counts for one unit; dates must be 7 days apart and sorted."""

    unit_id: str
    dates: list[dt.date]
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=float)
        if len(self.dates) != self.counts.shape[0]:
            raise ValueError(
                f"{self.unit_id}: {len(self.dates)} dates but {self.counts.shape[0]} counts"
            )
        if len(self.dates) == 0:
            raise ValueError(f"{self.unit_id}: empty series")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if (cur - prev).days != 7:
                raise ValueError(
                    f"{self.unit_id}: dates {prev} and {cur} are not 7 days apart"
                )
        if np.any(self.counts < 0) or not np.all(np.isfinite(self.counts)):
            raise ValueError(f"{self.unit_id}: counts must be finite and nonnegative")

    def window(self, end: dt.date) -> "WeeklySeries":
        """Sub-series with dates strictly up to and including `end`."""
        keep = [i for i, d in enumerate(self.dates) if d <= end]
        if not keep:
            raise ValueError(f"{self.unit_id}: no observations on or before {end}")
        return WeeklySeries(
            unit_id=self.unit_id,
            dates=[self.dates[i] for i in keep],
            counts=self.counts[keep],
        )


@dataclass(eq=False)
class SeasonalBaseline:
    """Fitted day-of-year curve plus standardization constants for one unit.

    daily_fit[i] is the expected square-root daily value on day-of-year
    i + 1 (length 366; day 366 mirrors day 365). mean and sd standardize
    training residuals to zero mean and unit variance.
    """

    daily_fit: np.ndarray
    mean: float
    sd: float
    bandwidth: float = DEFAULT_BANDWIDTH

    def fitted_at(self, day: dt.date) -> float:
        return float(self.daily_fit[canonical_day_of_year(day) - 1])


def canonical_day_of_year(day: dt.date) -> int:
    """Day-of-year in 1..365, with Feb 29 mapped onto Feb 28 (day 59)."""
    month, dom = day.month, day.day
    if (month, dom) == (2, 29):
        dom = 28
    return dt.date(2001, month, dom).timetuple().tm_yday


def _week_days(week_end: dt.date) -> list[dt.date]:
    """The 7 calendar days covered by a weekly total reported at week_end."""
    return [week_end - dt.timedelta(days=k) for k in range(6, -1, -1)]


def week_center(week_end: dt.date) -> dt.date:
    return week_end - dt.timedelta(days=3)


def kernel_smooth_day_of_year(
    days: np.ndarray,
    values: np.ndarray,
    bandwidth: float = DEFAULT_BANDWIDTH,
) -> np.ndarray:
    """Nadaraya-Watson fit over day-of-year with a circular Gaussian kernel.

    days are integers in 1..365; returns the fitted value at every day
    1..365. bandwidth is the kernel standard deviation in days.
    """
    days = np.asarray(days, dtype=float)
    values = np.asarray(values, dtype=float)
    if days.shape != values.shape or days.ndim != 1 or days.size == 0:
        raise ValueError("days and values must be equal-length nonempty 1-D arrays")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    grid = np.arange(1, DAYS_PER_YEAR + 1, dtype=float)
    gap = np.abs(grid[:, None] - days[None, :])
    gap = np.minimum(gap, DAYS_PER_YEAR - gap)
    weights = np.exp(-0.5 * (gap / bandwidth) ** 2)
    return (weights @ values) / weights.sum(axis=1)


def _sqrt_daily(counts: np.ndarray) -> np.ndarray:
    # weekly total -> average daily count -> square root (variance stabilization)
    return np.sqrt(counts / 7.0)


def fit_seasonal(train: WeeklySeries, bandwidth: float = DEFAULT_BANDWIDTH) -> SeasonalBaseline:
    """Fit the day-of-year baseline and standardization constants.

    Each training week contributes its square-root daily value at all 7 of
    its calendar days. Raises ValueError if the training residuals have zero
    variance (e.g. perfectly constant input).
    """
    obs_days = []
    obs_vals = []
    sqrt_vals = _sqrt_daily(train.counts)
    for week_end, value in zip(train.dates, sqrt_vals):
        for day in _week_days(week_end):
            obs_days.append(canonical_day_of_year(day))
            obs_vals.append(value)
    fit = kernel_smooth_day_of_year(np.array(obs_days), np.array(obs_vals), bandwidth)
    daily_fit = np.concatenate([fit, fit[-1:]])  # day 366 mirrors day 365

    centers = [canonical_day_of_year(week_center(d)) for d in train.dates]
    residuals = sqrt_vals - fit[np.asarray(centers) - 1]
    mean = float(residuals.mean())
    sd = float(residuals.std())
    if sd < 1e-10:
        raise ValueError(
            f"{train.unit_id}: training residuals have zero variance; "
            "cannot standardize a constant series"
        )
    return SeasonalBaseline(daily_fit=daily_fit, mean=mean, sd=sd, bandwidth=bandwidth)


def detrend_standardize(series: WeeklySeries, baseline: SeasonalBaseline) -> np.ndarray:
    """Standardized residual per week: subtract the fitted curve at the week
    center, then center and scale by the training constants."""
    residuals = _sqrt_daily(series.counts) - np.array(
        [baseline.fitted_at(week_center(d)) for d in series.dates]
    )
    return (residuals - baseline.mean) / baseline.sd


def assemble_matrix(rows: list[np.ndarray], graph: NetworkGraph) -> np.ndarray:
    """Stack per-unit rows into a p-by-n data matrix.

    Row i corresponds to graph node i + 1; the caller fixes the unit order.
    """
    if len(rows) != graph.p:
        raise ValueError(f"got {len(rows)} rows for a graph with p={graph.p} nodes")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ValueError(f"rows have mismatched lengths {sorted(lengths)}")
    return np.vstack([np.asarray(r, dtype=float) for r in rows])


def read_weekly_csv(path) -> list[WeeklySeries]:
    """Read `unit,date,count` rows (ISO dates) into one series per unit.

    Units are returned in order of first appearance; observations are sorted
    by date within each unit.
    """
    per_unit: dict[str, list[tuple[dt.date, float]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"unit", "date", "count"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: need columns unit,date,count, got {reader.fieldnames}")
        for lineno, rec in enumerate(reader, start=2):
            try:
                day = dt.date.fromisoformat(rec["date"])
                count = float(rec["count"])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            per_unit.setdefault(rec["unit"], []).append((day, count))
    series = []
    for unit, obs in per_unit.items():
        obs.sort(key=lambda pair: pair[0])
        series.append(
            WeeklySeries(
                unit_id=unit,
                dates=[d for d, _ in obs],
                counts=np.array([c for _, c in obs]),
            )
        )
    if not series:
        raise ValueError(f"{path}: no data rows")
    return series
