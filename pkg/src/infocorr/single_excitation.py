"""Single-excitation sector of long XY chains.

Basis: |0> is the chain with no excitation, |j> has the excitation on node j.
In the full 2^N space the excitation on node j is the set bit 2^(N-j).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .matkernel import DEFAULT_POLICY, RankPolicy, numerical_rank

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SectorHamiltonian:
    n_nodes: int
    coupling: float
    matrix: np.ndarray

    @property
    def inner(self) -> np.ndarray:
        return self.matrix[1:, 1:]


def sector_hamiltonian(n: int, d: float = 1.0) -> SectorHamiltonian:
    if n < 2:
        raise ValueError("chain needs at least two nodes")
    m = np.zeros((n + 1, n + 1))
    k = np.arange(1, n)
    m[k, k + 1] = m[k + 1, k] = -d / 2
    return SectorHamiltonian(n, float(d), m)


@lru_cache(maxsize=16)
def _sector_eig(n: int, d: float) -> tuple[np.ndarray, np.ndarray]:
    return eigh_tridiagonal(np.zeros(n), np.full(n - 1, -d / 2))


def propagator(n: int, t: float, d: float = 1.0) -> np.ndarray:
    """exp(-iHt) restricted to nodes 1..N (an N x N unitary)."""
    w, q = _sector_eig(n, float(d))
    # two real products instead of one complex one
    return (q * np.cos(w * t)) @ q.T - 1j * ((q * np.sin(w * t)) @ q.T)


def transition_amplitude(n: int, t: float, src: int = 1, dst: int | None = None,
                         d: float = 1.0) -> complex:
    """<dst| exp(-iHt) |src>; by default from node 1 to node N."""
    dst = n if dst is None else dst
    if not (1 <= src <= n and 1 <= dst <= n):
        raise ValueError("node index out of range")
    w, q = _sector_eig(n, float(d))
    return complex(np.sum(q[dst - 1] * np.exp(-1j * w * t) * q[src - 1]))


@dataclass(frozen=True)
class AmplitudeState:
    """alpha_0 (real) and alpha_1..alpha_n of the sender state."""

    alpha0: float
    alpha: np.ndarray

    def __post_init__(self):
        norm = self.alpha0**2 + float(np.sum(np.abs(self.alpha) ** 2))
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"amplitudes not normalized: {norm}")

    @property
    def n(self) -> int:
        return len(self.alpha)

    def vector(self) -> np.ndarray:
        return np.concatenate([[self.alpha0], self.alpha]).astype(complex)


def amplitudes_from_angles(theta, psi) -> AmplitudeState:
    """Hyperspherical parametrization: alpha_0 = cos theta_1, phases psi_k."""
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if theta.shape != psi.shape:
        raise ValueError("theta and psi need equal length")
    n = len(theta)
    mags = np.empty(n + 1)
    s = 1.0
    for k in range(n):
        mags[k] = s * np.cos(theta[k])
        s *= np.sin(theta[k])
    mags[n] = s
    return AmplitudeState(float(mags[0]), mags[1:] * np.exp(1j * psi))


@dataclass(frozen=True)
class BorderedTransfer:
    """beta = T alpha with T[0,0] = 1 and r_jk in the lower block."""

    matrix: np.ndarray
    t: float

    @property
    def r(self) -> np.ndarray:
        return self.matrix[1:, 1:]

    def real_embedding(self) -> np.ndarray:
        re, im = self.matrix.real, self.matrix.imag
        return np.block([[re, -im], [im, re]])


def bordered_transfer(n: int, t: float, na: int, nb: int, d: float = 1.0) -> BorderedTransfer:
    """r_jk = <N - nb + j| exp(-iHt) |k> for sender nodes k <= na."""
    if na < 1 or nb < 1 or na + nb > n:
        raise ValueError("sender and receiver must fit in the chain")
    w, q = _sector_eig(n, float(d))
    recv = q[n - nb:]
    send = q[:na]
    r = (recv * np.exp(-1j * w * t)) @ send.T
    m = np.zeros((nb + 1, na + 1), dtype=complex)
    m[0, 0] = 1.0
    m[1:, 1:] = r
    return BorderedTransfer(m, float(t))


@dataclass(frozen=True)
class ReceiverState:
    beta: np.ndarray  # beta_0..beta_nb
    P: float
    support: np.ndarray  # (nb+1) x (nb+1) in the basis |0>, |1>..|nb>

    def density(self) -> np.ndarray:
        """Embedding into the 2^nb dimensional space of the receiver spins."""
        nb = len(self.beta) - 1
        idx = [0] + [2 ** (nb - j) for j in range(1, nb + 1)]
        rho = np.zeros((2**nb, 2**nb), dtype=complex)
        rho[np.ix_(idx, idx)] = self.support
        return rho


def receiver_state(alpha: AmplitudeState, t: float, n: int, nb: int, d: float = 1.0) -> ReceiverState:
    bt = bordered_transfer(n, t, alpha.n, nb, d)
    beta = bt.matrix @ alpha.vector()
    p = float(np.sum(np.abs(beta) ** 2))
    support = np.outer(beta, beta.conj())
    support[0, 0] += 1 - p
    return ReceiverState(beta, p, support)


@dataclass(frozen=True)
class LongChainRank:
    E_AB: int
    raw_rank: int


def E_AB_long(bt: BorderedTransfer, policy: RankPolicy = DEFAULT_POLICY) -> LongChainRank:
    """min(rank - 1, 2 na) of the real embedding; normalization takes one equation."""
    na = bt.matrix.shape[1] - 1
    rank = numerical_rank(bt.real_embedding(), policy)
    return LongChainRank(min(rank - 1, 2 * na), rank)


@dataclass(frozen=True)
class LongChainMin:
    value: int
    degenerate: bool
    gradient: np.ndarray


def E_AB_min_long(n: int, t: float, theta, psi, nb: int, d: float = 1.0,
                  policy: RankPolicy = DEFAULT_POLICY, h: float = 1e-6,
                  edge_tol: float = 1e-12) -> LongChainMin:
    """Rank of the gradient of the only free receiver eigenvalue mu (via mu(1 - mu)).

    The receiver state has rank two and unit trace, so its spectrum is
    (mu, 1 - mu). When mu sits at 0 or 1 the spectrum is frozen and the value is 0.
    """
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    x0 = np.concatenate([theta, psi])
    k = len(theta)

    def s2(x):
        sup = receiver_state(amplitudes_from_angles(x[:k], x[k:]), t, n, nb, d).support
        return float((np.trace(sup) ** 2 - np.trace(sup @ sup)).real / 2)

    grad = np.empty(len(x0))
    for i in range(len(x0)):
        e = np.zeros_like(x0)
        e[i] = h
        grad[i] = (s2(x0 + e) - s2(x0 - e)) / (2 * h)
    val = s2(x0)
    if val < edge_tol:
        return LongChainMin(0, True, grad)
    noise = 100 * np.finfo(float).eps / h
    return LongChainMin(numerical_rank(grad[None, :], policy, noise_floor=noise), False, grad)


def conservation_error(n: int, t: float, d: float = 1.0, sources=None) -> float:
    """max_k |sum_j |<j|U|k>|^2 - 1| over all nodes k or the given (1-based) sources."""
    if sources is None:
        u = propagator(n, t, d)
    else:
        w, q = _sector_eig(n, float(d))
        k = np.asarray(sources, dtype=int) - 1
        u = q @ (np.exp(-1j * w * t)[:, None] * q[k].T)
    return float(np.max(np.abs(np.sum(np.abs(u) ** 2, axis=0) - 1)))


def sweep(n: int, na: int, nb: int, ts, theta, psi, d: float = 1.0,
          policy: RankPolicy = DEFAULT_POLICY) -> list[dict]:
    """Rows t, |f|, P, E^AB, E^AB;min and the conservation error of the sender columns."""
    alpha = amplitudes_from_angles(theta, psi)
    rows = []
    for t in ts:
        bt = bordered_transfer(n, t, na, nb, d)
        rs = receiver_state(alpha, t, n, nb, d)
        rows.append({
            "t": float(t),
            "abs_f": abs(transition_amplitude(n, t, 1, n, d)),
            "P": rs.P,
            "E_AB": E_AB_long(bt, policy).E_AB,
            "E_AB_min": E_AB_min_long(n, t, theta, psi, nb, d, policy).value,
            "conservation": conservation_error(n, t, d, sources=range(1, na + 1)),
        })
    return rows
