"""SU(2)/SU(4) parametrizations and encoding of angles into density matrices."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericalError, ScenarioError

CLUSTER_GAP = 1e-9
INTERIOR_MARGIN = np.pi / 50


def _gamma_table() -> np.ndarray:
    g = np.zeros((15, 4, 4), dtype=complex)
    # each off-diagonal pair: symmetric real generator, then antisymmetric imaginary one
    pairs = [((0, 1), 0), ((0, 2), 3), ((1, 2), 5), ((0, 3), 8), ((1, 3), 10), ((2, 3), 12)]
    for (i, j), k in pairs:
        g[k, i, j] = g[k, j, i] = 1.0
        g[k + 1, i, j] = -1j
        g[k + 1, j, i] = 1j
    g[2] = np.diag([1, -1, 0, 0])
    g[7] = np.diag([1, 1, -2, 0]) / np.sqrt(3)
    g[14] = np.diag([1, 1, 1, -3]) / np.sqrt(6)
    g.setflags(write=False)
    return g


GAMMA = _gamma_table()


def gamma(k: int) -> np.ndarray:
    """Generator gamma_k, 1-based."""
    if not 1 <= k <= 15:
        raise ValueError("gamma index must be in 1..15")
    return GAMMA[k - 1]


# generator index of each factor e^{i gamma phi_k} in the 12-factor product
SU4_SEQUENCE = (3, 2, 3, 5, 3, 10, 3, 2, 3, 5, 3, 2)


@lru_cache(maxsize=None)
def _gamma_eig(k: int) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(GAMMA[k - 1])
    return w, v


def exp_i_gamma(k: int, phi: float) -> np.ndarray:
    """exp(i gamma_k phi) via the spectral decomposition of gamma_k."""
    w, v = _gamma_eig(k)
    return (v * np.exp(1j * w * phi)) @ v.conj().T


def su2_matrix(phi: Sequence[float]) -> np.ndarray:
    p1, p2, p3 = phi
    c, s = np.cos(p1), np.sin(p1)
    rot = np.array([[c, -np.exp(-1j * p2) * s], [np.exp(1j * p2) * s, c]])
    return rot @ np.diag([np.exp(1j * p3), np.exp(-1j * p3)])


def su2_derivatives(phi: Sequence[float]) -> tuple[np.ndarray, list[np.ndarray]]:
    p1, p2, p3 = phi
    c, s = np.cos(p1), np.sin(p1)
    em, ep = np.exp(-1j * p2), np.exp(1j * p2)
    phase = np.diag([np.exp(1j * p3), np.exp(-1j * p3)])
    rot = np.array([[c, -em * s], [ep * s, c]])
    d1 = np.array([[-s, -em * c], [ep * c, -s]]) @ phase
    d2 = np.array([[0, 1j * em * s], [1j * ep * s, 0]]) @ phase
    d3 = rot @ np.diag([1j * np.exp(1j * p3), -1j * np.exp(-1j * p3)])
    return rot @ phase, [d1, d2, d3]


def su4_factors(phi: Sequence[float], generators: Sequence[int] = SU4_SEQUENCE) -> list[np.ndarray]:
    if len(phi) != len(generators):
        raise ValueError("one angle per factor expected")
    return [exp_i_gamma(g, p) for g, p in zip(generators, phi)]


def su4_matrix(phi: Sequence[float], generators: Sequence[int] = SU4_SEQUENCE) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for f in su4_factors(phi, generators):
        u = u @ f
    return u


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectrumMultiplicity:
    """Eigenvalue clusters of a diagonal initial state, descending."""

    values: tuple[float, ...]
    multiplicities: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.multiplicities)

    def diagonal(self) -> np.ndarray:
        return np.repeat(np.array(self.values, dtype=float), self.multiplicities)


def spectrum(lams: Sequence, gap: float = CLUSTER_GAP) -> SpectrumMultiplicity:
    """Cluster an eigenvalue list.

    Exact ``Fraction`` inputs are grouped by equality; floats by ``gap``.
    """
    if len(lams) == 0:
        raise ScenarioError("empty spectrum")
    exact = all(isinstance(x, (Fraction, int)) for x in lams)
    vals = sorted(lams, reverse=True)
    total = sum(vals)
    if exact:
        if total != 1:
            raise ScenarioError(f"eigenvalues sum to {total}, not 1")
    elif abs(float(total) - 1.0) > 1e-12:
        raise ScenarioError(f"eigenvalues sum to {float(total):.15g}, not 1")
    if float(vals[-1]) < 0:
        raise ScenarioError("negative eigenvalue")
    clusters: list[list] = [[vals[0]]]
    for v in vals[1:]:
        same = v == clusters[-1][0] if exact else abs(float(clusters[-1][-1]) - float(v)) <= gap
        if same:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return SpectrumMultiplicity(
        tuple(float(sum(c) / len(c)) for c in clusters), tuple(len(c) for c in clusters)
    )


def encoded_param_count(m: SpectrumMultiplicity) -> int:
    """E^AA = N(N-1) - sum K_i (K_i - 1)."""
    n = m.n
    return n * (n - 1) - sum(k * (k - 1) for k in m.multiplicities)


def encode_state(lam: np.ndarray, u: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam)
    if lam.ndim == 1:
        lam = np.diag(lam)
    if lam.shape != u.shape:
        raise ValueError(f"dimension mismatch {lam.shape} vs {u.shape}")
    return u @ lam @ u.conj().T


# ---------------------------------------------------------------------------
# parameter families


@dataclass(frozen=True)
class ParamFamily:
    """A map phi -> U together with its parameter box.

    ``labels`` carry the original angle numbers (e.g. 2, 4, 6 for a restricted
    SU(4) family) so minors and reports can refer to them.
    """

    name: str
    dim: int
    unitary: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    labels: tuple[int, ...]
    generators: tuple[int, ...] = field(default=())

    @property
    def n_params(self) -> int:
        return len(self.labels)

    def check_inside(self, phi: np.ndarray, closed: bool = False) -> None:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.n_params,):
            raise DomainError(f"expected {self.n_params} angles, got shape {phi.shape}")
        lo_ok = phi >= self.lower if closed else phi > self.lower
        hi_ok = phi <= self.upper if closed else phi < self.upper
        if not (np.all(lo_ok) and np.all(hi_ok)):
            raise DomainError(f"parameter point {phi} outside box")

    def sample(self, rng: np.random.Generator, count: int,
               margin: float = INTERIOR_MARGIN) -> np.ndarray:
        lo = self.lower + margin
        hi = self.upper - margin
        return lo + (hi - lo) * rng.random((count, self.n_params))

    def state(self, lam: np.ndarray, phi: np.ndarray) -> np.ndarray:
        return encode_state(lam, self.unitary(np.asarray(phi, dtype=float)))

    def derivatives(self, phi: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """U(phi) and its exact partial derivatives."""
        if self.name == "su2":
            return su2_derivatives(np.asarray(phi, dtype=float))
        if not self.generators:
            raise NotImplementedError(f"no analytic derivative for family {self.name}")
        full = self._full_angles(np.asarray(phi, dtype=float))
        facs = su4_factors(full, self.generators)
        prefix = [np.eye(4, dtype=complex)]
        for f in facs:
            prefix.append(prefix[-1] @ f)
        suffix = [np.eye(4, dtype=complex)]
        for f in reversed(facs):
            suffix.append(f @ suffix[-1])
        suffix = suffix[::-1]
        label_pos = {lab: i for i, lab in enumerate(self._all_labels())}
        out = []
        for lab in self.labels:
            i = label_pos[lab]
            dfac = 1j * GAMMA[self.generators[i] - 1] @ facs[i]
            out.append(prefix[i] @ dfac @ suffix[i + 1])
        return prefix[-1], out

    def _all_labels(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.generators) + 1))

    def _full_angles(self, phi: np.ndarray) -> np.ndarray:
        full = np.zeros(len(self.generators))
        for lab, v in zip(self.labels, phi):
            full[lab - 1] = v
        return full


def su2_family() -> ParamFamily:
    return ParamFamily(
        name="su2",
        dim=2,
        unitary=su2_matrix,
        lower=np.zeros(3),
        upper=np.array([np.pi / 2, 2 * np.pi, np.pi / 2]),
        labels=(1, 2, 3),
    )


def _su4_bounds(n: int) -> tuple[np.ndarray, np.ndarray]:
    upper = np.array([np.pi if k % 2 == 1 else np.pi / 2 for k in range(1, n + 1)])
    return np.zeros(n), upper


def su4_family(n_factors: int = 12, active: Sequence[int] | None = None,
               upper: float | None = None) -> ParamFamily:
    """Product of the first ``n_factors`` SU(4) factors.

    ``active`` restricts the free angles to the given labels (others held at 0);
    ``upper`` overrides every upper bound (e.g. pi/2 for restricted boxes).
    """
    if not 0 <= n_factors <= 12:
        raise ValueError("n_factors must be in 0..12")
    gens = SU4_SEQUENCE[:n_factors]
    labels = tuple(range(1, n_factors + 1)) if active is None else tuple(active)
    if any(not 1 <= lab <= n_factors for lab in labels):
        raise ValueError(f"active labels {labels} outside 1..{n_factors}")
    lo, hi = _su4_bounds(n_factors)
    idx = [lab - 1 for lab in labels]
    lo, hi = lo[idx], hi[idx]
    if upper is not None:
        hi = np.full(len(labels), float(upper))

    def unitary(phi: np.ndarray) -> np.ndarray:
        full = np.zeros(n_factors)
        full[idx] = phi
        return su4_matrix(full, gens)

    name = f"su4[{n_factors}]" if active is None else f"su4[{n_factors}]{list(labels)}"
    return ParamFamily(name, 4, unitary, lo, hi, labels, generators=gens)


def reduced_su4_factor_count(m: SpectrumMultiplicity) -> int:
    if m.n != 4:
        raise ScenarioError("SU(4) reduction needs a 4-level spectrum")
    k = m.multiplicities
    table = {(1, 1, 1, 1): 12, (2, 1, 1): 10, (2, 2): 8, (3, 1): 6, (4,): 0}
    if k not in table:
        raise ScenarioError(f"multiplicity structure {k} has no reduced SU(4) form")
    return table[k]


@lru_cache(maxsize=None)
def _eight_factor_labels() -> tuple[int, ...]:
    """Labels of 8 factors that span the orbit for lambda1=lambda2, lambda3=lambda4.

    The first label set (lexicographic) whose restricted family, remaining
    angles at zero, has an encoded-state Jacobian of rank 8 at two fixed
    interior points.
    """
    from .transfer_map import vectorize

    lam = np.diag([0.35, 0.35, 0.15, 0.15]).astype(complex)
    rng = np.random.default_rng(20240601)
    for labels in itertools.combinations(range(1, 13), 8):
        fam = su4_family(12, active=labels)
        ok = True
        for phi in fam.sample(rng, 2):
            u, du = fam.derivatives(phi)
            cols = [vectorize(d @ lam @ u.conj().T + u @ lam @ d.conj().T) for d in du]
            s = np.linalg.svd(np.array(cols).T, compute_uv=False)
            if np.sum(s > 1e-8 * s[0]) < 8:
                ok = False
                break
        if ok:
            return labels
    raise NumericalError("no 8-factor subfamily reaches rank 8")


def family_for_spectrum(m: SpectrumMultiplicity) -> ParamFamily:
    """The reduced parameter family matching a spectrum's multiplicities."""
    if m.n == 2:
        return su2_family()
    n = reduced_su4_factor_count(m)
    if n == 8:
        return su4_family(12, active=_eight_factor_labels())
    return su4_family(n if n else 12)
