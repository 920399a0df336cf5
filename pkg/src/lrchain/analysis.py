"""Post-processing of correlation fields: light cones, fits, localization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from lrchain.opw import CorrelationField

HSS_FLOOR = 1e-12
DEFAULT_LEVELS = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4)


def quasiparticle_energy(j_prime: float, q):
    """TFIM quasiparticle energy in units of the transverse field.

    ``E(q) / gamma = 2 J' sqrt(g^2 + 1 - 2 g cos q)`` with ``g = 1/J'``,
    evaluated as ``2 sqrt(1 + J'^2 - 2 J' cos q)``.
    """
    if not j_prime > 0:
        raise ValueError("J' must be positive")
    q = np.asarray(q, dtype=float)
    radicand = np.maximum(1.0 + j_prime**2 - 2.0 * j_prime * np.cos(q), 0.0)
    out = 2.0 * np.sqrt(radicand)
    return float(out) if out.ndim == 0 else out


def front_velocity(j_prime: float) -> float:
    """Correlation-front velocity in sites per tau: ``2 pi min(J', 1)``."""
    if not j_prime >= 0:
        raise ValueError("J' must be non-negative")
    return 2.0 * math.pi * min(j_prime, 1.0)


def tb_front_velocity() -> float:
    """Maximum group velocity of the uniform hopping chain, sites per tau."""
    return 2.0 * math.pi


@dataclass
class LightCone:
    """``crossings[i, j]``: site position where the field drops through ``levels[i]`` at ``times[j]``.

    NaN marks a level that is not reached at that time.
    """

    levels: np.ndarray
    times: np.ndarray
    crossings: np.ndarray
    n_sites: int
    source: CorrelationField | None = field(default=None, repr=False)


def _crossing(sites: np.ndarray, profile: np.ndarray, level: float) -> float:
    hits = np.nonzero(profile >= level)[0]
    if hits.size == 0:
        return math.nan
    i = hits[-1]
    if i + 1 >= profile.size:
        return float(sites[i])
    a, b = profile[i], profile[i + 1]
    frac = (a - level) / (a - b) if a != b else 0.0
    return float(sites[i] + frac * (sites[i + 1] - sites[i]))


def extract_lightcone(cf: CorrelationField, levels=DEFAULT_LEVELS) -> LightCone:
    """Isocontours of a field: for each level and time, the last site at or above the level.

    The position is refined by linear interpolation in ``k`` toward the next site.
    """
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    if levels.size == 0:
        raise ValueError("need at least one contour level")
    out = np.full((levels.size, cf.times.size), math.nan)
    for j in range(cf.times.size):
        profile = cf.values[:, j]
        for i, c in enumerate(levels):
            out[i, j] = _crossing(cf.sites, profile, c)
    return LightCone(levels, cf.times.copy(), out, n_sites=int(cf.sites.max()), source=cf)


@dataclass
class VelocityFit:
    velocity: float
    intercept: float
    n_points: int
    times: np.ndarray
    positions: np.ndarray


def fit_front_velocity(
    cone: LightCone,
    level: float,
    window: tuple[float, float],
    edge_fraction: float = 0.8,
) -> VelocityFit:
    """Least-squares slope of one contour over a time window.

    Times before the contour appears, and times after it passes
    ``edge_fraction`` of the sampled chain, are dropped.
    """
    hits = np.nonzero(np.isclose(cone.levels, level))[0]
    if hits.size == 0:
        raise KeyError(f"level {level} not in light cone")
    x = cone.crossings[hits[0]]
    t = cone.times
    keep = (t >= window[0]) & (t <= window[1]) & np.isfinite(x) & (x <= edge_fraction * cone.n_sites)
    if keep.sum() < 2:
        raise ValueError("fewer than two usable contour points in the window")
    slope, intercept = np.polyfit(t[keep], x[keep], 1)
    return VelocityFit(float(slope), float(intercept), int(keep.sum()), t[keep], x[keep])


@dataclass
class StationarityReport:
    max_difference: float
    worst_site: int
    tol: float
    passed: bool
    time_a: float
    time_b: float


def _single_time(cf: CorrelationField, name: str) -> np.ndarray:
    if cf.times.size != 1:
        raise ValueError(f"{name} must hold exactly one time; use CorrelationField.at_time")
    return cf.values[:, 0]


def stationarity_check(
    field_a: CorrelationField,
    field_b: CorrelationField,
    tol: float,
    min_site: int = 1,
) -> StationarityReport:
    """Max-over-sites difference of two single-time profiles against ``tol``.

    ``min_site`` drops leading sites from the comparison.
    """
    a, b = _single_time(field_a, "field_a"), _single_time(field_b, "field_b")
    if not np.array_equal(field_a.sites, field_b.sites):
        raise ValueError("fields are sampled on different sites")
    if field_a.ensemble_size != field_b.ensemble_size:
        raise ValueError("fields come from ensembles of different size")
    if field_a.times[0] == field_b.times[0]:
        raise ValueError("fields must be taken at two distinct times")
    keep = field_a.sites >= min_site
    if not keep.any():
        raise ValueError("no sites left to compare")
    diff = np.abs(a[keep] - b[keep])
    i = int(np.argmax(diff))
    worst = float(diff[i])
    return StationarityReport(
        max_difference=worst,
        worst_site=int(field_a.sites[keep][i]),
        tol=float(tol),
        passed=bool(worst <= tol),
        time_a=float(field_a.times[0]),
        time_b=float(field_b.times[0]),
    )


@dataclass
class LocalizationLength:
    """``k_thresh``, or ``saturated`` when no site drops to the threshold."""

    k_thresh: int | None
    threshold: float
    saturated: bool
    stationary: bool | None = None

    @property
    def flagged(self) -> bool:
        return self.stationary is False


def localization_length(
    cf: CorrelationField,
    threshold: float,
    stationarity: StationarityReport | None = None,
) -> LocalizationLength:
    """Smallest site ``k`` whose value is at or below ``threshold``."""
    if not 0 < threshold < 2:
        raise ValueError("threshold must lie in (0, 2)")
    profile = _single_time(cf, "field")
    hits = np.nonzero(profile <= threshold)[0]
    stationary = None if stationarity is None else stationarity.passed
    if hits.size == 0:
        return LocalizationLength(None, threshold, saturated=True, stationary=stationary)
    return LocalizationLength(int(cf.sites[hits[0]]), threshold, saturated=False, stationary=stationary)


@dataclass
class HssFit:
    """Envelope ``K exp(-alpha (k - 1))`` with ``K = C_1`` and the largest admissible ``alpha``.

    ``alpha`` is ``inf`` when every site past the first is below the floor.
    """

    K: float
    alpha: float
    retained: np.ndarray
    sites: np.ndarray

    def envelope(self, sites=None) -> np.ndarray:
        k = self.sites if sites is None else np.asarray(sites)
        if math.isinf(self.alpha):
            return np.where(k == 1, self.K, 0.0)
        return self.K * np.exp(-self.alpha * (k - 1))

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.alpha)


def hss_fit(cf: CorrelationField, floor: float = HSS_FLOOR) -> HssFit:
    profile = _single_time(cf, "field")
    sites = cf.sites
    first = np.nonzero(sites == 1)[0]
    if first.size == 0:
        raise ValueError("field must include site 1")
    K = float(profile[first[0]])
    if not K > 0:
        raise ValueError("C_1 must be positive")
    retained = (sites >= 2) & (profile > floor)
    if not retained.any():
        return HssFit(K, math.inf, retained, sites.copy())
    if np.any(profile[retained] > K):
        raise ValueError("some C_k exceeds C_1; no non-negative alpha bounds the field")
    k = sites[retained]
    rates = np.log(K / profile[retained]) / (k - 1)
    alpha = max(float(rates.min()), 0.0)
    fit = HssFit(K, alpha, retained, sites.copy())
    env = fit.envelope(k)
    if np.any(profile[retained] > env * (1 + 1e-12)):
        raise ArithmeticError("HSS envelope violated at a retained site")
    return fit


@dataclass
class LocalizationReport:
    threshold: float
    t_late: float
    widths: list[float]
    k_thresh: list[LocalizationLength]
    hss: list[HssFit]


def localization_report(fields: dict[float, CorrelationField], threshold: float, t_late: float) -> LocalizationReport:
    """``k_thresh`` and HSS fit per disorder width, from late-time fields keyed by width."""
    widths = sorted(fields)
    profiles = [fields[w].at_time(t_late) for w in widths]
    return LocalizationReport(
        threshold=threshold,
        t_late=t_late,
        widths=widths,
        k_thresh=[localization_length(p, threshold) for p in profiles],
        hss=[hss_fit(p) for p in profiles],
    )


def longest_run(mask) -> tuple[int, int]:
    """Length and start index of the longest run of ``True`` in ``mask``."""
    best, best_start, run, start = 0, -1, 0, 0
    for i, flag in enumerate(np.asarray(mask, dtype=bool)):
        if flag:
            if run == 0:
                start = i
            run += 1
            if run > best:
                best, best_start = run, start
        else:
            run = 0
    return best, best_start


def onset_times(cf: CorrelationField, level: float) -> np.ndarray:
    """First time each site reaches ``level``, interpolated linearly in t; NaN if never."""
    out = np.full(cf.sites.size, math.nan)
    t = cf.times
    for i in range(cf.sites.size):
        row = cf.values[i]
        hits = np.nonzero(row >= level)[0]
        if hits.size == 0:
            continue
        j = hits[0]
        if j == 0:
            out[i] = t[0]
        else:
            a, b = row[j - 1], row[j]
            out[i] = t[j - 1] + (level - a) / (b - a) * (t[j] - t[j - 1])
    return out
