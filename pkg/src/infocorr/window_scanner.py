"""Minimized minor curves over a parameter region and threshold windows in time."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .correlation import MAX_MINORS
from .nonreducible import coeff_derivatives

# ---------------------------------------------------------------------------
# regions and curves


@dataclass(frozen=True)
class ParamRegion:
    """Closed box [lower + eps, upper - eps] sampled on a regular grid."""

    lower: np.ndarray
    upper: np.ndarray
    epsilon: float
    grid_points_per_dim: int = 32

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("region margin must be positive")
        if np.any(self.upper - self.lower <= 2 * self.epsilon):
            raise ValueError("region is empty after shrinking")
        if self.grid_points_per_dim < 1:
            raise ValueError("grid needs at least one point per dimension")

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float) + self.epsilon

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float) - self.epsilon

    def points(self) -> np.ndarray:
        n = self.grid_points_per_dim
        axes = [np.linspace(a, b, n) if n > 1 else np.array([(a + b) / 2])
                for a, b in zip(self.lo, self.hi)]
        return np.array(list(itertools.product(*axes)))

    def shrink(self, extra: float) -> "ParamRegion":
        return ParamRegion(self.lower, self.upper, self.epsilon + extra, self.grid_points_per_dim)


def region_for(family, epsilon: float, grid: int = 32) -> ParamRegion:
    return ParamRegion(np.asarray(family.lower), np.asarray(family.upper), epsilon, grid)


@dataclass
class ScanCurve:
    t: np.ndarray
    raw: np.ndarray
    m_max: float
    argmin: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def normalized(self) -> np.ndarray:
        if self.m_max == 0:
            return np.zeros_like(self.raw)
        return self.raw / self.m_max

    @property
    def flat(self) -> bool:
        return self.m_max == 0

    def to_csv(self) -> str:
        lines = ["t,normalized"]
        lines += [f"{t:.17g},{v:.17g}" for t, v in zip(self.t, self.normalized)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TimeWindow:
    t_start: float
    t_end: float
    label: str = ""
    threshold: float = 0.5

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError("window must have t_start < t_end")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_start + self.t_end)

    def as_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end, "label": self.label,
                "threshold": self.threshold}


# ---------------------------------------------------------------------------
# minors


def minor_abs_sum(mats: np.ndarray, order: int) -> np.ndarray:
    """Sum of |order-th minors| for a batch of (rows, cols) matrices."""
    mats = np.asarray(mats)
    rows, cols = mats.shape[-2:]
    if order > min(rows, cols):
        raise ValueError("minor order exceeds matrix size")
    if order == 0:
        return np.ones(mats.shape[:-2])
    count = comb(rows, order) * comb(cols, order)
    if count > MAX_MINORS:
        raise ValueError(f"{count} minors requested; limit is {MAX_MINORS}")
    total = np.zeros(mats.shape[:-2])
    for rs in itertools.combinations(range(rows), order):
        sub_r = mats[..., rs, :]
        for cs in itertools.combinations(range(cols), order):
            total += np.abs(np.linalg.det(sub_r[..., cs]))
    return total


def scan_min_minor(target: Callable[[float], np.ndarray], order: int,
                   t_grid: Sequence[float]) -> ScanCurve:
    """M(t) = min over region points of the summed |minors| of target(t).

    ``target(t)`` returns the batch (points, rows, cols) already evaluated on
    the region grid.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    raw = np.empty(len(t_grid))
    arg = np.empty(len(t_grid), dtype=int)
    for k, t in enumerate(t_grid):
        vals = minor_abs_sum(target(t), order)
        arg[k] = int(np.argmin(vals))
        raw[k] = vals[arg[k]]
    return ScanCurve(t_grid, raw, float(raw.max()) if raw.size else 0.0, arg)


def pointwise_target(f: Callable[[np.ndarray, float], np.ndarray],
                     region: ParamRegion) -> Callable[[float], np.ndarray]:
    pts = region.points()
    return lambda t: np.array([f(p, t) for p in pts])


class HTarget:
    """Exact H matrices of a chain model on a region grid.

    rho_A and its derivatives are computed once per grid point; each time step
    only applies the transfer tensor and the coefficient-derivative identity.
    """

    def __init__(self, model, region: ParamRegion):
        self.model = model
        self.points = region.points()
        rho, drho = [], []
        for p in self.points:
            r, d = model.drho_a(p)
            rho.append(r)
            drho.append(d)
        na = model.partition.na
        self.rho_a = np.array(rho).reshape(len(self.points), na * na)
        self.drho_a = np.array(drho).reshape(len(self.points), -1, na * na)

    def __call__(self, t: float) -> np.ndarray:
        T = self.model.transfer(t)[0]
        m = T.matrix()
        nb = T.nb
        rb = (self.rho_a @ m.T).reshape(-1, nb, nb)
        drb = (self.drho_a @ m.T).reshape(len(self.points), -1, nb, nb)
        return coeff_derivatives(rb, drb)


class JBTarget:
    """Exact J_B = That J_A on a region grid."""

    def __init__(self, model, region: ParamRegion):
        from .correlation import jacobian_A_exact

        self.model = model
        self.points = region.points()
        lam = np.real(np.diag(model.lam))
        self.ja = np.array([jacobian_A_exact(model.family, lam, p).matrix for p in self.points])

    def __call__(self, t: float) -> np.ndarray:
        return np.einsum("ij,pjk->pik", self.model.affine(t).That, self.ja)


# ---------------------------------------------------------------------------
# windows


def _crossing(t0, v0, t1, v1, level, tol=1e-3) -> float:
    """Threshold crossing on the linear interpolant, refined by bisection."""
    lo, hi = t0, t1

    def g(t):
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0) - level

    while hi - lo > tol * 1e-3:
        mid = 0.5 * (lo + hi)
        if (g(mid) > 0) == (g(lo) > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class WindowResult:
    windows: list[TimeWindow]
    needles: list[float]  # grid times of bridged sub-threshold samples


def threshold_windows(curve: ScanCurve, threshold: float = 0.5, label: str = "",
                      max_gap_samples: int = 0) -> WindowResult:
    """Maximal intervals where the normalized curve exceeds ``threshold``.

    Runs of at most ``max_gap_samples`` consecutive sub-threshold samples
    between two above-threshold samples are bridged and reported as needles.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    if curve.flat:
        return WindowResult([], [])
    t, v = curve.t, curve.normalized
    above = v > threshold
    needles: list[float] = []
    if max_gap_samples > 0:
        idx = np.flatnonzero(above)
        for a, b in zip(idx[:-1], idx[1:]):
            if 1 < b - a <= max_gap_samples + 1:
                needles.extend(t[a + 1: b].tolist())
                above[a + 1: b] = True
    windows = []
    k = 0
    n = len(t)
    while k < n:
        if not above[k]:
            k += 1
            continue
        j = k
        while j + 1 < n and above[j + 1]:
            j += 1
        start = t[0] if k == 0 else _crossing(t[k - 1], v[k - 1], t[k], v[k], threshold)
        end = t[-1] if j == n - 1 else _crossing(t[j], v[j], t[j + 1], v[j + 1], threshold)
        if end > start:
            windows.append(TimeWindow(float(start), float(end), label, threshold))
        k = j + 1
    return WindowResult(windows, needles)


def detect_E_AB_general(target: Callable[[float], np.ndarray], t: float,
                        thresholds: float | Sequence[float] = 1e-12) -> tuple[int, list[float]]:
    """Largest order n with min-over-region minor sum M_n(t) above its threshold."""
    mats = target(t)
    rows, cols = mats.shape[-2:]
    values = []
    n0 = 0
    for n in range(1, min(rows, cols) + 1):
        thr = thresholds if np.isscalar(thresholds) else thresholds[n - 1]
        m = float(minor_abs_sum(mats, n).min())
        values.append(m)
        if m <= thr:
            break
        n0 = n
    return n0, values


# ---------------------------------------------------------------------------
# roots


def _evaluate(f: Callable, ts: np.ndarray) -> np.ndarray:
    """f on a grid, vectorized when f accepts arrays."""
    try:
        vals = np.asarray(f(ts), dtype=float)
        if vals.shape == ts.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([f(x) for x in ts], dtype=float)


def find_roots(f: Callable[[float], float], interval: tuple[float, float],
               resolution: float = 1e-3, first_only: bool = False,
               chunk: int = 2048) -> list[float]:
    """Sign-change bracketing on a grid, then Brent refinement.

    The grid is evaluated in chunks so ``first_only`` stops at the first bracket.
    """
    a, b = interval
    n = max(2, int(np.ceil((b - a) / resolution)) + 1)
    ts = np.linspace(a, b, n)
    roots: list[float] = []
    prev_t = prev_v = None
    for start in range(0, n, chunk):
        tc = ts[start:start + chunk]
        vc = _evaluate(f, tc)
        if prev_t is not None:
            tc = np.concatenate([[prev_t], tc])
            vc = np.concatenate([[prev_v], vc])
        for i in range(len(tc) - 1):
            if vc[i] == 0:
                roots.append(float(tc[i]))
            elif np.sign(vc[i]) != np.sign(vc[i + 1]) and vc[i + 1] != 0:
                roots.append(float(brentq(f, tc[i], tc[i + 1], xtol=1e-14,
                                          rtol=4 * np.finfo(float).eps)))
            else:
                continue
            if first_only:
                return roots[:1]
        prev_t, prev_v = tc[-1], vc[-1]
    if prev_v == 0:
        roots.append(float(prev_t))
    return roots[:1] if first_only else roots
