"""Non-reducible correlation from characteristic-polynomial coefficients of rho_B."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .correlation import DEFAULT_STEP, FD_NOISE_FACTOR
from .errors import DomainError, InvariantError, PoleError
from .matkernel import DEFAULT_POLICY, RankPolicy, numerical_rank
from .sun_param import ParamFamily

DEGENERACY_GAP = 1e-9


# ---------------------------------------------------------------------------
# characteristic coefficients


def principal_minor_sums(r: np.ndarray) -> np.ndarray:
    """S_0..S_N of a (batched) matrix; S_j sums all j x j principal minors."""
    r = np.asarray(r)
    n = r.shape[-1]
    sums = [np.ones(r.shape[:-2], dtype=r.dtype)]
    for j in range(1, n + 1):
        s = 0
        for idx in itertools.combinations(range(n), j):
            sub = r[..., idx, :][..., :, idx]
            s = s + np.linalg.det(sub)
        sums.append(s)
    return np.stack(sums, axis=-1)


@dataclass(frozen=True)
class CharPolyCoeffs:
    """a_0..a_{N-2} of lambda^N - lambda^{N-1} + sum_i a_i lambda^i."""

    a: np.ndarray
    n: int

    def polynomial(self) -> np.ndarray:
        """Coefficients highest degree first (numpy convention)."""
        return np.concatenate([[1.0, -1.0], self.a[::-1]])


def coeffs_from_sums(s: np.ndarray) -> np.ndarray:
    """a_i = (-1)^{N-i} S_{N-i}, i = 0..N-2 (last axis of ``s`` holds S_0..S_N)."""
    n = s.shape[-1] - 1
    return np.stack([(-1) ** (n - i) * s[..., n - i] for i in range(n - 1)], axis=-1)


def char_coeffs(rho: np.ndarray) -> CharPolyCoeffs:
    rho = np.asarray(rho)
    if abs(np.trace(rho) - 1) > 1e-10:
        raise DomainError("characteristic coefficients need a unit-trace matrix")
    s = principal_minor_sums(rho).real
    return CharPolyCoeffs(coeffs_from_sums(s), rho.shape[0])


def coeff_derivatives(r: np.ndarray, dr: np.ndarray) -> np.ndarray:
    """Exact d a_i along directions ``dr``.

    Uses dS_k = tr(Q_k dR) with Q_k = sum_{j<k} (-1)^j S_{k-1-j} R^j.
    ``r``: (..., N, N); ``dr``: (..., D, N, N); returns (..., N-1, D).
    """
    n = r.shape[-1]
    s = principal_minor_sums(r)
    powers = [np.broadcast_to(np.eye(n), r.shape).astype(r.dtype)]
    for _ in range(1, n):
        powers.append(powers[-1] @ r)
    ds = []
    for k in range(n + 1):
        q = 0
        for j in range(k):
            q = q + (-1) ** j * s[..., k - 1 - j, None, None] * powers[j]
        if k == 0:
            ds.append(np.zeros(dr.shape[:-2]))
            continue
        ds.append(np.einsum("...ij,...dji->...d", q, dr).real)
    ds = np.stack(ds, axis=-1)  # (..., D, N+1)
    da = coeffs_from_sums(ds)  # (..., D, N-1)
    return np.swapaxes(da, -1, -2)


# ---------------------------------------------------------------------------
# H matrix


@dataclass(frozen=True)
class HMatrix:
    matrix: np.ndarray
    phi0: np.ndarray
    step: float | None
    noise: float = 0.0
    degenerate: bool = False
    reduced: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def _check_stencil(family: ParamFamily | None, phi0: np.ndarray, h: float) -> None:
    if family is not None:
        family.check_inside(phi0 - h)
        family.check_inside(phi0 + h)


def h_matrix(f: Callable[[np.ndarray], np.ndarray], phi0: np.ndarray, h: float = DEFAULT_STEP,
             family: ParamFamily | None = None) -> HMatrix:
    """Central-difference d a_i / d phi_k of rho_B = f(phi)."""
    phi0 = np.asarray(phi0, dtype=float)
    _check_stencil(family, phi0, h)
    a0 = char_coeffs(f(phi0)).a
    cols = []
    for k in range(phi0.size):
        e = np.zeros_like(phi0)
        e[k] = h
        cols.append((char_coeffs(f(phi0 + e)).a - char_coeffs(f(phi0 - e)).a) / (2 * h))
    mat = np.array(cols).T
    noise = FD_NOISE_FACTOR * np.finfo(float).eps * max(1.0, float(np.max(np.abs(a0)))) / h
    return HMatrix(mat, phi0, h, noise)


def h_matrix_exact(rho_b: np.ndarray, drho_b: Sequence[np.ndarray], phi0: np.ndarray) -> HMatrix:
    """H from rho_B and its exact parameter derivatives."""
    mat = coeff_derivatives(np.asarray(rho_b), np.asarray(drho_b))
    return HMatrix(mat, np.asarray(phi0, dtype=float), None)


def h_rank(hm: HMatrix, policy: RankPolicy = DEFAULT_POLICY) -> int:
    return numerical_rank(hm.matrix, policy, noise_floor=hm.noise)


# ---------------------------------------------------------------------------
# degenerate path


def cluster_bounds(eigs: np.ndarray, gap: float = DEGENERACY_GAP) -> list[tuple[int, int]]:
    """Index ranges of eigenvalue clusters in a descending list."""
    bounds = []
    start = 0
    for i in range(1, len(eigs) + 1):
        if i == len(eigs) or eigs[i - 1] - eigs[i] > gap:
            bounds.append((start, i))
            start = i
    return bounds


def is_degenerate(eigs: np.ndarray, gap: float = DEGENERACY_GAP) -> bool:
    eigs = np.sort(np.asarray(eigs))[::-1]
    return len(cluster_bounds(eigs, gap)) < len(eigs) or eigs[-1] <= gap


def _sorted_eigs(rho: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[::-1]


def reduced_coeffs(eigs: np.ndarray, bounds: list[tuple[int, int]], keep: int) -> np.ndarray:
    """a~_0..a~_{P-1} of prod over the first ``keep`` clusters of (lambda - lambda_i)."""
    means = [eigs[a:b].mean() for a, b in bounds[:keep]]
    poly = np.poly(means) if means else np.array([1.0])
    return poly[1:][::-1]


def reduced_h_matrix(f: Callable[[np.ndarray], np.ndarray], phi0: np.ndarray,
                     h: float = DEFAULT_STEP, family: ParamFamily | None = None,
                     gap: float = DEGENERACY_GAP) -> HMatrix:
    """H~ = d a~_i / d phi_k over P distinct nonzero eigenvalues.

    One nonzero cluster is dropped because the trace fixes it; clusters are
    followed through the stencil by their position in the sorted spectrum.
    """
    phi0 = np.asarray(phi0, dtype=float)
    _check_stencil(family, phi0, h)
    e0 = _sorted_eigs(f(phi0))
    bounds = [(a, b) for a, b in cluster_bounds(e0, gap) if e0[a:b].mean() > gap]
    keep = len(bounds) - 1
    cols = []
    for k in range(phi0.size):
        e = np.zeros_like(phi0)
        e[k] = h
        up = reduced_coeffs(_sorted_eigs(f(phi0 + e)), bounds, keep)
        dn = reduced_coeffs(_sorted_eigs(f(phi0 - e)), bounds, keep)
        cols.append((up - dn) / (2 * h))
    mat = np.array(cols).T if keep > 0 else np.zeros((0, phi0.size))
    noise = FD_NOISE_FACTOR * np.finfo(float).eps / h
    return HMatrix(mat, phi0, h, noise, degenerate=True, reduced=mat)


@dataclass(frozen=True)
class NonReducibleResult:
    value: int
    path: str  # "direct" or "reduced"
    degenerate: bool
    singular_values: np.ndarray


def E_AB_min(f: Callable[[np.ndarray], np.ndarray], phi0: np.ndarray,
             policy: RankPolicy = DEFAULT_POLICY, h: float = DEFAULT_STEP,
             family: ParamFamily | None = None, path: str = "auto",
             gap: float = DEGENERACY_GAP,
             df: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None) -> NonReducibleResult:
    """rank H, switching to the reduced polynomial when rho_B is degenerate.

    ``df`` (phi -> (rho_B, d rho_B)) replaces finite differences on the direct path.
    """
    phi0 = np.asarray(phi0, dtype=float)
    degenerate = is_degenerate(_sorted_eigs(f(phi0)), gap)
    if path == "auto":
        path = "reduced" if degenerate else "direct"
    if path == "direct" and df is not None:
        hm = h_matrix_exact(*df(phi0), phi0)
    elif path == "direct":
        hm = h_matrix(f, phi0, h, family)
    elif path == "reduced":
        hm = reduced_h_matrix(f, phi0, h, family, gap)
    else:
        raise ValueError(f"unknown path {path!r}")
    sv = np.linalg.svd(hm.matrix, compute_uv=False) if hm.matrix.size else np.zeros(0)
    return NonReducibleResult(h_rank(hm, policy), path, degenerate, sv)


def eigenvalue_jacobian(f: Callable[[np.ndarray], np.ndarray], phi0: np.ndarray,
                        h: float = DEFAULT_STEP) -> np.ndarray:
    """d(lambda_1..lambda_{N-1})/d phi with nearest-neighbour branch matching."""
    phi0 = np.asarray(phi0, dtype=float)
    e0 = _sorted_eigs(f(phi0))

    def matched(e):
        out = np.empty_like(e0)
        free = list(range(len(e)))
        for i, v in enumerate(e0):
            j = min(free, key=lambda q: abs(e[q] - v))
            out[i] = e[j]
            free.remove(j)
        return out

    cols = []
    for k in range(phi0.size):
        d = np.zeros_like(phi0)
        d[k] = h
        cols.append((matched(_sorted_eigs(f(phi0 + d))) - matched(_sorted_eigs(f(phi0 - d)))) / (2 * h))
    return np.array(cols).T[:-1]


def removable(e_ab: int, e_ab_min: int, d_tilde: int | None = None) -> tuple[int, Fraction | None]:
    """Delta E^AB = E^AB - E^AB;min and its normalized value."""
    diff = e_ab - e_ab_min
    if diff < 0:
        raise InvariantError(f"E^AB={e_ab} is below E^AB;min={e_ab_min}")
    return diff, (Fraction(diff, d_tilde) if d_tilde else None)


# ---------------------------------------------------------------------------
# one-node detection function


def one_node_closed_forms(t: float, lam_b: float, lam_c: Sequence[float]) -> tuple[float, float, float, float]:
    """(r, a1, a2, b) of the one-node 4-spin chain (A, B single spins, C two spins).

    a1 is given for the evolution exp(-iHt); see the ledger for its sign.
    """
    s5 = np.sqrt(5.0)
    c1, c2, c3 = (float(x) for x in lam_c)
    r = 2 * np.sin((1 + s5) * t / 4) + (3 + s5) * np.sin((1 - s5) * t / 4)
    a1 = -(2 * lam_b - 1) * (2 * c3 + 2 * c2 - 1) / (5 + s5) * r
    a2 = r**2 / (10 * (3 + s5))
    b = lam_b * ((3 + 2 * np.cos(s5 * t / 2)) / 5 - a2) + 2 * np.sin(s5 * t / 4) ** 2 / 5 * (
        2 * c1 + c2 + c3 + (c3 - c2) * np.cos(t / 2))
    return r, a1, a2, b


def m_function(t: float, lam_a: float, lam_b: float, lam_c: Sequence[float]) -> float:
    """Value m(t) solving cos(2 phi_1) = m(t) at the zeros of H."""
    _, a1, a2, b = one_node_closed_forms(t, lam_b, lam_c)
    c2, c3 = float(lam_c[1]), float(lam_c[2])
    if 2 * lam_a - 1 == 0:
        raise PoleError("pole: factor (2 lambda_A - 1) vanishes")
    bracket = a2 - (2 * lam_b - 1) ** 2 * (2 * c3 + 2 * c2 - 1) ** 2
    if np.any(bracket == 0):
        raise PoleError("pole: factor a2 - (2 lambda_B - 1)^2 (2 lambda_C3 + 2 lambda_C2 - 1)^2 vanishes")
    return -(2 * b + a2 - 1) / ((2 * lam_a - 1) * bracket)


def one_node_H(phi1: float, t: float, lam_a: float, lam_b: float, lam_c: Sequence[float]) -> float:
    """Closed form of the scalar H = d det(rho_B) / d phi_1."""
    _, _, a2, b = one_node_closed_forms(t, lam_b, lam_c)
    c2, c3 = float(lam_c[1]), float(lam_c[2])
    k = 2 * lam_a - 1
    q = (2 * lam_b - 1) ** 2 * (2 * c3 + 2 * c2 - 1) ** 2
    return a2 * k * np.sin(2 * phi1) * (2 * b + a2 - 1 + k * (a2 - q) * np.cos(2 * phi1))


# ---------------------------------------------------------------------------
# minor structure


def nonzero_column_sets(hm: np.ndarray, order: int, min_gap: float = 4.0) -> set[tuple[int, ...]]:
    """Column sets (1-based) whose order-``order`` minors are not structurally zero.

    For each column set the absolute minors over all row sets are summed; the
    values are split at the widest gap of their log10 values. A gap narrower
    than ``min_gap`` decades means no set is zero.
    """
    hm = np.asarray(hm.matrix if isinstance(hm, HMatrix) else hm)
    rows, cols = hm.shape
    vals = {}
    for cs in itertools.combinations(range(cols), order):
        vals[tuple(c + 1 for c in cs)] = sum(
            abs(np.linalg.det(hm[np.ix_(rs, cs)])) for rs in itertools.combinations(range(rows), order))
    top = max(vals.values())
    if top == 0:
        return set()
    keys = sorted(vals, key=vals.get)
    logs = np.log10(np.maximum([vals[k] / top for k in keys], 1e-300))
    if len(logs) < 2:
        return set(keys)
    gaps = np.diff(logs)
    k = int(np.argmax(gaps))
    if gaps[k] < min_gap:
        return set(keys)
    return set(keys[k + 1:])
