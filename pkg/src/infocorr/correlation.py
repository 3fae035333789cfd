"""Jacobian-rank correlation measures E^AA and E^AB."""
from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvariantError
from .matkernel import DEFAULT_POLICY, RankPolicy, numerical_rank, singular_values
from .sun_param import ParamFamily, encoded_param_count, spectrum
from .transfer_map import AffineTransfer, vectorize

DEFAULT_STEP = 1e-6
# central differences lose about eps*|f|/h to rounding; singular values below
# this multiple of that level are treated as zero
FD_NOISE_FACTOR = 100.0
MAX_MINORS = 10**7


class DegeneracyWarning(UserWarning):
    """Rank samples disagree; ``ranks`` holds the per-sample values."""

    def __init__(self, message: str, ranks: Sequence[int]):
        super().__init__(message)
        self.ranks = list(ranks)


@dataclass(frozen=True)
class JacobianMatrix:
    matrix: np.ndarray
    step: float
    noise: float = 0.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def jacobian_fd(f: Callable[[np.ndarray], np.ndarray], phi0: np.ndarray,
                h: float = DEFAULT_STEP, family: ParamFamily | None = None) -> JacobianMatrix:
    """Central-difference Jacobian of ``f`` at ``phi0``.

    With ``family`` given, every stencil point must stay inside its box.
    """
    phi0 = np.asarray(phi0, dtype=float)
    if family is not None:
        family.check_inside(phi0 - h)
        family.check_inside(phi0 + h)
    f0 = np.asarray(f(phi0), dtype=float)
    cols = []
    for k in range(phi0.size):
        e = np.zeros_like(phi0)
        e[k] = h
        cols.append((np.asarray(f(phi0 + e)) - np.asarray(f(phi0 - e))) / (2 * h))
    mat = np.array(cols).T if cols else np.zeros((f0.size, 0))
    if not np.all(np.isfinite(mat)):
        raise DomainError("non-finite Jacobian entries")
    scale = max(1.0, float(np.max(np.abs(f0))) if f0.size else 1.0)
    return JacobianMatrix(mat, h, FD_NOISE_FACTOR * np.finfo(float).eps * scale / h)


def state_map(family: ParamFamily, lam: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """phi -> X(rho_A(phi, 0))."""
    lam = np.diag(np.asarray(lam, dtype=float)).astype(complex)
    return lambda phi: vectorize(family.state(lam, phi))


def jacobian_A(family: ParamFamily, lam: np.ndarray, phi: np.ndarray,
               h: float = DEFAULT_STEP) -> JacobianMatrix:
    return jacobian_fd(state_map(family, lam), phi, h, family)


def jacobian_A_exact(family: ParamFamily, lam: np.ndarray, phi: np.ndarray) -> JacobianMatrix:
    """J(rho_A) from the analytic derivatives of the unitary."""
    lam = np.diag(np.asarray(lam, dtype=float)).astype(complex)
    u, du = family.derivatives(np.asarray(phi, dtype=float))
    cols = []
    for dk in du:
        x = dk @ lam @ u.conj().T
        cols.append(vectorize(x + x.conj().T))
    return JacobianMatrix(np.array(cols).T, 0.0, 0.0)


def _jacobian(family, lam, phi, h, exact):
    return jacobian_A_exact(family, lam, phi) if exact else jacobian_A(family, lam, phi, h)


def jacobian_rank(j: JacobianMatrix, policy: RankPolicy = DEFAULT_POLICY) -> int:
    return numerical_rank(j.matrix, policy, noise_floor=j.noise)


def _common_rank(ranks: list[int], what: str) -> int:
    if len(set(ranks)) > 1:
        warnings.warn(DegeneracyWarning(f"{what} differs across samples: {ranks}", ranks), stacklevel=3)
        return min(ranks)
    return ranks[0]


def E_AA(lam: Sequence, family: ParamFamily, samples: np.ndarray,
         policy: RankPolicy = DEFAULT_POLICY, h: float = DEFAULT_STEP, exact: bool = True) -> int:
    """Rank of J(rho_A) over the sample set (at least five points).

    ``exact=False`` uses central differences with step ``h`` instead of the
    analytic derivatives.
    """
    samples = np.atleast_2d(samples)
    if len(samples) < 5:
        raise ValueError("E_AA needs at least five sample points")
    lam_arr = np.array([float(x) for x in lam])
    ranks = [jacobian_rank(_jacobian(family, lam_arr, p, h, exact), policy) for p in samples]
    value = _common_rank(ranks, "E^AA")
    # a restricted family cannot exceed its own parameter count
    expected = min(encoded_param_count(spectrum(list(lam))), family.n_params)
    if value != expected:
        warnings.warn(DegeneracyWarning(
            f"Jacobian rank {value} differs from multiplicity count {expected}", ranks), stacklevel=2)
    return value


def E_AB(at: AffineTransfer, ja: JacobianMatrix, policy: RankPolicy = DEFAULT_POLICY) -> int:
    if at.That.shape[1] != ja.matrix.shape[0]:
        raise ValueError(f"That {at.That.shape} and J_A {ja.matrix.shape} do not conform")
    jb = at.That @ ja.matrix
    norm = float(singular_values(at.That)[0]) if at.That.size else 0.0
    return numerical_rank(jb, policy, noise_floor=norm * ja.noise)


def E_AB_samples(at: AffineTransfer, family: ParamFamily, lam: Sequence, samples: np.ndarray,
                 policy: RankPolicy = DEFAULT_POLICY, h: float = DEFAULT_STEP,
                 exact: bool = True) -> int:
    lam_arr = np.array([float(x) for x in lam])
    ranks = [E_AB(at, _jacobian(family, lam_arr, p, h, exact), policy) for p in np.atleast_2d(samples)]
    return _common_rank(ranks, "E^AB")


def rank_That(at: AffineTransfer, policy: RankPolicy = DEFAULT_POLICY) -> int:
    return numerical_rank(at.That, policy)


def E_A_full(rho0: np.ndarray, family: ParamFamily, phi0: np.ndarray, dims: Sequence[int],
             policy: RankPolicy = DEFAULT_POLICY, h: float = DEFAULT_STEP) -> int:
    """Number of parameters carried by the whole state (U_A (x) I) rho0 (U_A (x) I)^+."""
    na = dims[0]
    rest = int(np.prod(dims[1:]))
    if family.dim != na:
        raise ValueError("family dimension does not match subsystem A")

    def f(phi):
        u = np.kron(family.unitary(phi), np.eye(rest))
        return vectorize(u @ rho0 @ u.conj().T)

    return jacobian_rank(jacobian_fd(f, phi0, h, family), policy)


def minor_survey(m: np.ndarray, order: int, rows: Sequence[int] | None = None,
                 cols: Sequence[int] | None = None) -> list[tuple[tuple[int, ...], tuple[int, ...], float]]:
    """All ``order`` x ``order`` minors as (row set, column set, determinant)."""
    m = np.asarray(m.matrix if isinstance(m, JacobianMatrix) else m)
    r_all = range(m.shape[0]) if rows is None else rows
    c_all = range(m.shape[1]) if cols is None else cols
    if order > min(len(r_all), len(c_all)):
        raise ValueError("minor order exceeds matrix size")
    count = comb(len(r_all), order) * comb(len(c_all), order)
    if count > MAX_MINORS:
        raise ValueError(f"{count} minors requested; limit is {MAX_MINORS}")
    out = []
    for rs in itertools.combinations(r_all, order):
        for cs in itertools.combinations(c_all, order):
            out.append((rs, cs, float(np.linalg.det(m[np.ix_(rs, cs)]))))
    return out


def normalized(e: int, d_tilde: int) -> Fraction:
    if d_tilde <= 0:
        raise ValueError("normalization needs a positive parameter count")
    return Fraction(e, d_tilde)


def _num(x) -> object:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.17g}")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_num(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    return x


@dataclass
class CorrelationReport:
    E_AA: int
    E_AB: int
    rank_That: int
    d_tilde: int
    t: float
    E_AB_min: int | None = None
    delta_E_AB: int | None = None
    policy: dict = field(default_factory=DEFAULT_POLICY.as_dict)
    samples: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.E_AB > min(self.rank_That, self.E_AA):
            raise InvariantError(
                f"E^AB={self.E_AB} exceeds min(rank That={self.rank_That}, E^AA={self.E_AA})")

    @property
    def quartet(self) -> tuple:
        return (self.E_AA, self.E_AB, self.E_AB_min, self.delta_E_AB)

    def as_dict(self) -> dict:
        d = {
            "E_AA": self.E_AA,
            "E_AB": self.E_AB,
            "E_AB_min": self.E_AB_min,
            "delta_E_AB": self.delta_E_AB,
            "rank_That": self.rank_That,
            "D_tilde_A": self.d_tilde,
            "E_AA_norm": normalized(self.E_AA, self.d_tilde) if self.d_tilde else None,
            "E_AB_norm": normalized(self.E_AB, self.d_tilde) if self.d_tilde else None,
            "t": self.t,
            "tolerance_policy": self.policy,
            "phi_samples": self.samples,
        }
        if self.E_AB_min is not None and self.d_tilde:
            d["E_AB_min_norm"] = normalized(self.E_AB_min, self.d_tilde)
            d["delta_E_AB_norm"] = normalized(self.delta_E_AB, self.d_tilde)
        d.update(self.extra)
        return _num(d)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)
