"""Small statistics helpers shared by the estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats as _st


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int
    method: str = "iid mean"
    lo: float | None = None
    hi: float | None = None

    def z(self, target: float) -> float:
        """Signed distance to ``target`` in standard errors (inf if stderr is 0)."""
        d = self.mean - target
        if self.stderr == 0:
            return 0.0 if d == 0 else math.copysign(math.inf, d)
        return d / self.stderr

    def to_dict(self) -> dict:
        return asdict(self)


def mean_estimate(x, method: str = "iid mean") -> Estimate:
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return Estimate(float(np.mean(x)), sd / math.sqrt(n), n, method)


def proportion(hits: int, n: int, z: float = 1.959963984540054) -> Estimate:
    """Binomial proportion with its plug-in stderr and a Wilson interval."""
    if n <= 0:
        raise ValueError("need n > 0")
    ph = hits / n
    se = math.sqrt(ph * (1 - ph) / n)
    lo, hi = wilson(hits, n, z)
    return Estimate(ph, se, n, "proportion (Wilson interval)", lo, hi)


def wilson(hits, n, z: float = 1.959963984540054):
    hits = np.asarray(hits, dtype=float)
    ph = hits / n
    den = 1 + z * z / n
    c = (ph + z * z / (2 * n)) / den
    h = z * np.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    if np.ndim(c) == 0:
        return float(c - h), float(c + h)
    return c - h, c + h


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    slope_stderr: float
    r2: float
    n: int


def linear_fit(x, y, sigma=None) -> LinearFit:
    """Ordinary (or weighted, if ``sigma`` given) least squares line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points")
    w = np.ones_like(x) if sigma is None else 1.0 / np.asarray(sigma, dtype=float) ** 2
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    sxy = (w * (x - xm) * (y - ym)).sum()
    slope = sxy / sxx
    icpt = ym - slope * xm
    res = y - (icpt + slope * x)
    ss_res = (w * res ** 2).sum()
    ss_tot = (w * (y - ym) ** 2).sum()
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = x.size - 2
    if sigma is None:
        se = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.inf
    else:
        se = math.sqrt(1.0 / sxx)
    return LinearFit(float(slope), float(icpt), float(se), float(r2), int(x.size))


@dataclass(frozen=True)
class ExponentFit:
    """Power-law slope of a survival curve on log-log axes."""

    slope: float
    slope_stderr: float
    window: tuple[int, int]
    r2: float
    n: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "window": list(self.window),
            "r2": self.r2,
            "n": np.asarray(self.n).tolist(),
            "values": np.asarray(self.values).tolist(),
            "errors": np.asarray(self.errors).tolist(),
        }


class FitWindowError(ValueError):
    """The requested fit window has too few usable points."""


def log_grid(lo: int, hi: int, points: int = 16) -> np.ndarray:
    """Roughly geometric integer grid on ``[lo, hi]`` without duplicates."""
    return np.unique(np.round(np.geomspace(lo, hi, points)).astype(np.int64))


def power_fit(n, values, errors=None, window=None, min_points: int = 4) -> ExponentFit:
    """Fit ``log values`` against ``log n`` on the window (inclusive)."""
    n = np.asarray(n, dtype=np.int64)
    v = np.asarray(values, dtype=float)
    e = np.zeros_like(v) if errors is None else np.asarray(errors, dtype=float)
    lo, hi = window if window is not None else (int(n.min()), int(n.max()))
    m = (n >= lo) & (n <= hi)
    if m.sum() < min_points:
        raise FitWindowError(f"fit window [{lo}, {hi}] has {int(m.sum())} points, need {min_points}")
    if np.any(v[m] <= 0):
        raise FitWindowError("non-positive values inside the fit window")
    f = linear_fit(np.log(n[m]), np.log(v[m]))
    return ExponentFit(f.slope, f.slope_stderr, (int(n[m].min()), int(n[m].max())), f.r2, n[m], v[m], e[m])


def survival(values, grid) -> tuple[np.ndarray, np.ndarray]:
    """Empirical ``P(X >= n)`` on ``grid`` with binomial stderr."""
    x = np.sort(np.asarray(values))
    grid = np.asarray(grid)
    cnt = x.size - np.searchsorted(x, grid, side="left")
    ph = cnt / x.size
    return ph, np.sqrt(ph * (1 - ph) / x.size)


def normal_sf(z: float) -> float:
    return float(_st.norm.sf(z))
