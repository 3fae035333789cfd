"""Nearest-neighbour XY chain, unitary evolution and product initial states."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .errors import DimensionError
from .matkernel import expm_i_hermitian, kron

MAX_FULL_NODES = 12

# raising operator in the (|0>, |1>) basis of one spin
_SP = np.array([[0.0, 1.0], [0.0, 0.0]])
_SM = _SP.T.copy()


@dataclass(frozen=True)
class Partition:
    na: int
    nc: int
    nb: int

    def __post_init__(self):
        for name, v in (("na", self.na), ("nc", self.nc), ("nb", self.nb)):
            if v < 1 or v & (v - 1):
                raise DimensionError(f"{name}={v} is not a power of two")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.na, self.nc, self.nb)

    @property
    def n(self) -> int:
        return self.na * self.nc * self.nb

    @property
    def n_nodes(self) -> int:
        return int(np.log2(self.n))


def _site_op(op: np.ndarray, site: int, n: int) -> np.ndarray:
    return reduce(np.kron, [op if k == site else np.eye(2) for k in range(n)])


@lru_cache(maxsize=16)
def _xy_cached(n: int, d: float) -> np.ndarray:
    h = np.zeros((2**n, 2**n))
    for i in range(n - 1):
        hop = _site_op(_SP, i, n) @ _site_op(_SM, i + 1, n)
        h -= 0.5 * d * (hop + hop.T)
    h.setflags(write=False)
    return h


def build_xy_hamiltonian(n_nodes: int, d: float = 1.0) -> np.ndarray:
    """H = -(d/2) sum_i (I+_i I-_{i+1} + I-_i I+_{i+1}); node 1 is the leading bit."""
    if n_nodes < 2:
        raise DimensionError("an XY chain needs at least two nodes")
    if n_nodes > MAX_FULL_NODES:
        raise DimensionError(f"full Hilbert space limited to {MAX_FULL_NODES} nodes")
    return _xy_cached(int(n_nodes), float(d)).copy()


def total_iz(n_nodes: int) -> np.ndarray:
    iz = np.diag([0.5, -0.5])
    return sum(_site_op(iz, k, n_nodes) for k in range(n_nodes))


def evolution_operator(h: np.ndarray, t: float) -> np.ndarray:
    return expm_i_hermitian(h, t)


def evolve(rho0: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    if rho0.shape != h.shape:
        raise DimensionError(f"state {rho0.shape} and Hamiltonian {h.shape} differ")
    v = evolution_operator(h, t)
    return v @ rho0 @ v.conj().T


def assemble_initial(rho_a: np.ndarray, rho_c: np.ndarray | None, rho_b: np.ndarray) -> np.ndarray:
    if rho_c is None:
        return kron(rho_a, rho_b)
    return kron(rho_a, rho_c, rho_b)
