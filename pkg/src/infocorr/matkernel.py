"""Dense complex linear-algebra kernel.

Hermitian eigendecomposition, spectral exponential, Kronecker products,
partial traces over an A (x) C (x) B factorization and SVD-based rank.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NumericalError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class RankPolicy:
    """Rank threshold tau = max(abs_floor, rel_factor * sigma_max)."""

    abs_floor: float = 1e-12
    rel_factor: float = 1e-8

    def threshold(self, sigma_max: float) -> float:
        return max(self.abs_floor, self.rel_factor * sigma_max)

    def as_dict(self) -> dict:
        return {"abs_floor": self.abs_floor, "rel_factor": self.rel_factor}


DEFAULT_POLICY = RankPolicy()


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


def _square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalError("matrix has non-finite entries")
    return m


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def eig_hermitian(m: np.ndarray) -> HermitianSpectrum:
    m = _square(m)
    try:
        w, v = np.linalg.eigh(hermitize(m))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed (norm {np.linalg.norm(m):.3e})"
        ) from exc
    order = np.argsort(w)[::-1]
    return HermitianSpectrum(w[order], v[:, order])


def expm_i_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h."""
    spec = eig_hermitian(h)
    v = spec.eigenvectors
    return (v * np.exp(-1j * spec.eigenvalues * t)) @ v.conj().T


def kron(*mats: np.ndarray) -> np.ndarray:
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


_SUBSYSTEMS = {"A": (0,), "C": (1,), "B": (2,), "CB": (1, 2), "AC": (0, 1), "AB": (0, 2)}


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: str) -> np.ndarray:
    """Reduced state of ``keep`` for a state on A (x) C (x) B with ``dims``=(NA, NC, NB).

    Composite index i = iA*(NC*NB) + iC*NB + iB.
    """
    rho = _square(rho)
    na, nc, nb = (int(d) for d in dims)
    n = na * nc * nb
    if rho.shape[0] != n:
        raise DimensionError(f"state of dim {rho.shape[0]} does not fit partition {dims}")
    if keep not in _SUBSYSTEMS:
        raise ValueError(f"unknown subsystem selector {keep!r}")
    kept = _SUBSYSTEMS[keep]
    r = rho.reshape(na, nc, nb, na, nc, nb)
    letters_row = "abc"
    letters_col = "def"
    col = list(letters_col)
    for k in range(3):
        if k not in kept:
            col[k] = letters_row[k]
    out_row = "".join(letters_row[k] for k in kept)
    out_col = "".join(letters_col[k] for k in kept)
    red = np.einsum(f"{letters_row}{''.join(col)}->{out_row}{out_col}", r)
    d = int(np.prod([(na, nc, nb)[k] for k in kept]))
    return red.reshape(d, d)


def singular_values(m: np.ndarray) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m))
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def numerical_rank(m: np.ndarray, policy: RankPolicy = DEFAULT_POLICY,
                   noise_floor: float = 0.0) -> int:
    """Count singular values above the policy threshold.

    ``noise_floor`` lets callers that know the absolute error level of ``m``
    (finite-difference Jacobians) raise the absolute floor.
    """
    s = singular_values(m)
    if s.size == 0:
        return 0
    tau = max(policy.threshold(float(s[0])), noise_floor)
    return int(np.sum(s > tau))


def check_density(rho: np.ndarray, psd_tol: float = PSD_TOL) -> None:
    """Raise if ``rho`` is not Hermitian, unit-trace and PSD."""
    rho = _square(rho)
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise NumericalError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise NumericalError(f"density matrix trace {np.trace(rho).real:.15g} != 1")
    if np.linalg.eigvalsh(hermitize(rho)).min() < -psd_tol:
        raise NumericalError("density matrix is not positive semidefinite")


def is_density(rho: np.ndarray) -> bool:
    try:
        check_density(rho)
    except (NumericalError, DimensionError):
        return False
    return True
