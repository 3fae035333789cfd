"""Transfer tensor T and the affine map X(rho_B) = That X(rho_A) + That0."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain_model import Partition
from .errors import DimensionError


def pair_index(n: int) -> list[tuple[int, int]]:
    """Strict upper-triangle pairs (i, j), i < j, in row-major order (0-based)."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def alpha(i: int, j: int, n: int) -> int:
    """1-based position of the pair (i, j), 1 <= i < j <= n."""
    if not 1 <= i < j <= n:
        raise ValueError("need 1 <= i < j <= n")
    return sum(n - l for l in range(1, i)) + j - i


def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def vectorize(rho: np.ndarray) -> np.ndarray:
    """X = (Re upper, Im upper, first n-1 diagonal entries)."""
    rho = np.asarray(rho)
    n = rho.shape[-1]
    iu, ju = _triu(n)
    off = rho[..., iu, ju]
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))[..., : n - 1]
    return np.concatenate([off.real, off.imag, diag], axis=-1)


def split(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = n * (n - 1) // 2
    return x[:m], x[m: 2 * m], x[2 * m:]


def devectorize(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n * n - 1,):
        raise DimensionError(f"vector of length {x.shape} does not fit dimension {n}")
    re, im, z = split(x, n)
    iu, ju = _triu(n)
    rho = np.zeros((n, n), dtype=complex)
    rho[iu, ju] = re + 1j * im
    rho = rho + rho.conj().T
    rho[np.arange(n - 1), np.arange(n - 1)] = z
    rho[n - 1, n - 1] = 1.0 - z.sum()
    return rho


@dataclass(frozen=True)
class TransferTensor:
    """T[iB, jB, nA, mA] with rho_B[i, j] = sum_{n,m} T[i, j, n, m] rho_A[n, m]."""

    data: np.ndarray
    t: float

    @property
    def nb(self) -> int:
        return self.data.shape[0]

    @property
    def na(self) -> int:
        return self.data.shape[2]

    def matrix(self) -> np.ndarray:
        """(NB^2, NA^2) matrix acting on row-major vec(rho_A)."""
        return self.data.reshape(self.nb**2, self.na**2)

    def apply(self, rho_a: np.ndarray) -> np.ndarray:
        return np.einsum("ijnm,...nm->...ij", self.data, rho_a)


def compute_T(v: np.ndarray, rho_cb: np.ndarray, partition: Partition, t: float = float("nan")) -> TransferTensor:
    na, nc, nb = partition.dims
    ncb = nc * nb
    if v.shape != (partition.n, partition.n) or rho_cb.shape != (ncb, ncb):
        raise DimensionError("evolution operator or rho_CB does not match partition")
    # V[(a, c, i), (n, k)]: a/n on A, c traced on C, i on B, k on CB
    v5 = v.reshape(na, nc, nb, na, ncb)
    tmp = np.einsum("acink,kl->acinl", v5, rho_cb)
    data = np.einsum("acinl,acjml->ijnm", tmp, v5.conj())
    return TransferTensor(data, t)


@dataclass(frozen=True)
class AffineTransfer:
    That: np.ndarray
    That0: np.ndarray
    t: float

    def apply(self, xa: np.ndarray) -> np.ndarray:
        xa = np.asarray(xa)
        if xa.shape[-1] != self.That.shape[1]:
            raise DimensionError(f"input length {xa.shape[-1]} != {self.That.shape[1]}")
        return xa @ self.That.T + self.That0


def assemble_affine(T: TransferTensor) -> AffineTransfer:
    d = T.data
    na, nb = T.na, T.nb
    ia, ja = _triu(na)
    ib, jb = _triu(nb)
    zb = np.arange(nb - 1)

    def row_block(rows_i, rows_j):
        sub = d[rows_i, rows_j]  # (rows, na, na)
        t1 = sub[:, ia, ja] + sub[:, ja, ia]
        t2 = sub[:, ia, ja] - sub[:, ja, ia]
        diag = np.diagonal(sub, axis1=1, axis2=2)
        t3 = diag[:, : na - 1] - diag[:, [na - 1]]
        return t1, t2, t3, diag[:, na - 1]

    x1, x2, x3, x0 = row_block(ib, jb)
    z1, z2, z3, z0 = row_block(zb, zb)
    re_rows = np.hstack([x1.real, -x2.imag, x3.real])
    im_rows = np.hstack([x1.imag, x2.real, x3.imag])
    z_rows = np.hstack([z1.real, -z2.imag, z3.real])
    That = np.vstack([re_rows, im_rows, z_rows])
    That0 = np.concatenate([x0.real, x0.imag, z0.real])
    return AffineTransfer(That, That0, T.t)


def apply_affine(at: AffineTransfer, xa: np.ndarray) -> np.ndarray:
    return at.apply(xa)


def to_csv(at: AffineTransfer) -> str:
    rows = [",".join(f"{v:.17g}" for v in row) for row in at.That]
    rows.append(",".join(f"{v:.17g}" for v in at.That0))
    return "\n".join(rows) + "\n"
