"""Scenario description, flat key-value file format and the derived chain model.

A scenario file holds one ``key = value`` pair per line; ``#`` starts a comment.
Numbers may be integers, decimals, rationals (``5/16``) or multiples of pi
(``pi/160``, ``3*pi/4``). Lists are comma separated.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .chain_model import Partition, assemble_initial, build_xy_hamiltonian, evolution_operator
from .errors import ScenarioError
from .matkernel import DEFAULT_POLICY, RankPolicy, kron, partial_trace
from .sun_param import (ParamFamily, family_for_spectrum, spectrum, su2_family, su2_matrix,
                        su4_family)
from .transfer_map import AffineTransfer, TransferTensor, assemble_affine, compute_T, vectorize

_NUM = re.compile(r"^\s*([+-]?[\d.]+(?:[eE][+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*([\d.]+))?\s*$")


def parse_number(text: str) -> Fraction | float:
    """Exact Fraction for rationals and decimals, float for pi multiples."""
    s = text.strip()
    m = _NUM.match(s)
    if not s or not m or (m.group(1) is None and m.group(2) is None):
        raise ScenarioError(f"cannot parse number {text!r}")
    coef = Fraction(m.group(1)) if m.group(1) else Fraction(1)
    den = Fraction(m.group(3)) if m.group(3) else Fraction(1)
    if den == 0:
        raise ScenarioError(f"zero denominator in {text!r}")
    val = coef / den
    return float(val) * np.pi if m.group(2) else val


def parse_list(text: str) -> list:
    return [parse_number(p) for p in text.split(",") if p.strip()]


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive stop) or an explicit list."""
    if ":" in text:
        parts = [float(parse_number(p)) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ScenarioError(f"bad grid {text!r}; expected start:stop:step")
        start, stop, step = parts
        n = int(round((stop - start) / step))
        return start + step * np.arange(n + 1)
    return np.array([float(v) for v in parse_list(text)])


@dataclass(frozen=True)
class Scenario:
    nodes: int = 4
    a_nodes: int = 1
    b_nodes: int = 1
    coupling: float = 1.0
    lambda_a: tuple = (Fraction(3, 4), Fraction(1, 4))
    lambda_b: tuple = (Fraction(3, 4), Fraction(1, 4))
    lambda_c: tuple | None = None
    beta: tuple | None = None
    gamma: float | None = None
    family: str = "auto"
    factors: int | None = None
    active: tuple | None = None
    upper: float | None = None
    t: float = 1.0
    time_grid: tuple = tuple(np.round(np.arange(0, 1001) * 0.01, 10))
    epsilon: float = np.pi / 50
    region_grid: int = 32
    samples: int = 10
    seed: int = 0
    policy: RankPolicy = DEFAULT_POLICY
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.nodes < 2:
            raise ScenarioError("chain needs at least two nodes", "nodes")
        if self.a_nodes < 1 or self.b_nodes < 1 or self.a_nodes + self.b_nodes > self.nodes:
            raise ScenarioError("a_nodes + b_nodes must fit in the chain", "a_nodes")
        for key, lam, k in (("lambda_a", self.lambda_a, self.a_nodes),
                            ("lambda_b", self.lambda_b, self.b_nodes)):
            if len(lam) != 2**k:
                raise ScenarioError(f"expected {2**k} eigenvalues, got {len(lam)}", key)
            try:
                spectrum(list(lam))
            except ScenarioError as exc:
                raise ScenarioError(str(exc), key) from None
        nc = self.nodes - self.a_nodes - self.b_nodes
        if nc and self.lambda_c is not None:
            if len(self.lambda_c) != 2**nc:
                raise ScenarioError(f"expected {2**nc} eigenvalues", "lambda_c")
            try:
                spectrum(list(self.lambda_c))
            except ScenarioError as exc:
                raise ScenarioError(str(exc), "lambda_c") from None
        if self.beta is not None and (self.b_nodes != 1 or len(self.beta) != 3):
            raise ScenarioError("beta needs three angles and a single-spin B", "beta")
        if self.gamma is not None and nc != 2:
            raise ScenarioError("gamma rotation is defined for a two-spin C", "gamma")
        if self.family not in ("auto", "su2", "su4"):
            raise ScenarioError(f"unknown family {self.family!r}", "family")

    # -- derived structure -------------------------------------------------
    @property
    def c_nodes(self) -> int:
        return self.nodes - self.a_nodes - self.b_nodes

    @property
    def partition(self) -> Partition:
        return Partition(2**self.a_nodes, 2**self.c_nodes, 2**self.b_nodes)

    def lam_a(self) -> np.ndarray:
        return np.array([float(x) for x in self.lambda_a])

    def lam_b(self) -> np.ndarray:
        return np.array([float(x) for x in self.lambda_b])

    def lam_c(self) -> np.ndarray | None:
        if self.c_nodes == 0:
            return None
        if self.lambda_c is None:
            n = 2**self.c_nodes
            return np.full(n, 1.0 / n)
        return np.array([float(x) for x in self.lambda_c])

    def rho_b0(self) -> np.ndarray:
        rho = np.diag(self.lam_b()).astype(complex)
        if self.beta is not None:
            u = su2_matrix([float(b) for b in self.beta])
            rho = u @ rho @ u.conj().T
        return rho

    def rho_c0(self) -> np.ndarray | None:
        lc = self.lam_c()
        if lc is None:
            return None
        rho = np.diag(lc).astype(complex)
        if self.gamma is not None:
            g = float(self.gamma)
            u = np.eye(4, dtype=complex)
            u[:2, :2] = [[np.cos(g), np.sin(g)], [-np.sin(g), np.cos(g)]]
            rho = u @ rho @ u.conj().T
        return rho

    def rho_cb0(self) -> np.ndarray:
        rc = self.rho_c0()
        return self.rho_b0() if rc is None else kron(rc, self.rho_b0())

    def param_family(self) -> ParamFamily:
        na = 2**self.a_nodes
        fam = self.family
        if fam == "auto":
            fam = "su2" if na == 2 else "su4"
        if fam == "su2":
            if na != 2:
                raise ScenarioError("su2 family needs a single-spin A", "family")
            return su2_family()
        if na != 4:
            raise ScenarioError("su4 family needs a two-spin A", "family")
        if self.factors is None and self.active is None:
            return family_for_spectrum(spectrum(list(self.lambda_a)))
        n = 12 if self.factors is None else int(self.factors)
        active = None if self.active is None else tuple(int(a) for a in self.active)
        return su4_family(n, active=active, upper=self.upper)

    def d_tilde(self) -> int:
        n = 2**self.a_nodes
        return n * (n - 1)

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


class ChainModel:
    """Hamiltonian, transfer maps and reduced states for one scenario."""

    def __init__(self, sc: Scenario):
        self.scenario = sc
        self.partition = sc.partition
        self.h = build_xy_hamiltonian(sc.nodes, float(sc.coupling))
        self.rho_cb = sc.rho_cb0()
        self.family = sc.param_family()
        self.lam = np.diag(sc.lam_a()).astype(complex)
        self._cache: dict[float, tuple[TransferTensor, AffineTransfer]] = {}

    def transfer(self, t: float) -> tuple[TransferTensor, AffineTransfer]:
        t = float(t)
        if t not in self._cache:
            if len(self._cache) > 4096:
                self._cache.clear()
            T = compute_T(evolution_operator(self.h, t), self.rho_cb, self.partition, t)
            self._cache[t] = (T, assemble_affine(T))
        return self._cache[t]

    def affine(self, t: float) -> AffineTransfer:
        return self.transfer(t)[1]

    def rho_a(self, phi: np.ndarray) -> np.ndarray:
        return self.family.state(self.lam, phi)

    def drho_a(self, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u, du = self.family.derivatives(phi)
        rho = u @ self.lam @ u.conj().T
        d = []
        for dk in du:
            x = dk @ self.lam @ u.conj().T
            d.append(x + x.conj().T)
        return rho, np.array(d)

    def rho_b(self, phi: np.ndarray, t: float) -> np.ndarray:
        return self.transfer(t)[0].apply(self.rho_a(phi))

    def drho_b(self, phi: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        rho, d = self.drho_a(phi)
        T = self.transfer(t)[0]
        return T.apply(rho), T.apply(d)

    def rho_b_direct(self, phi: np.ndarray, t: float) -> np.ndarray:
        """Reduced B state by full evolution (independent of the transfer tensor)."""
        rho0 = assemble_initial(self.rho_a(phi), self.scenario.rho_c0(), self.scenario.rho_b0())
        v = evolution_operator(self.h, t)
        return partial_trace(v @ rho0 @ v.conj().T, self.partition.dims, "B")

    def xb(self, phi: np.ndarray, t: float) -> np.ndarray:
        return vectorize(self.rho_b(phi, t))


@lru_cache(maxsize=64)
def model_for(sc: Scenario) -> ChainModel:
    return ChainModel(sc)


# ---------------------------------------------------------------------------
# file format

_INT_KEYS = {"nodes", "a_nodes", "b_nodes", "factors", "region_grid", "samples", "seed"}
_FLOAT_KEYS = {"coupling", "gamma", "upper", "t", "epsilon", "fd_step", "tol_abs", "tol_rel"}
_LIST_KEYS = {"lambda_a", "lambda_b", "lambda_c", "beta", "active"}
_KNOWN = _INT_KEYS | _FLOAT_KEYS | _LIST_KEYS | {"family", "time_grid"}


def _complete(vals: list, n: int, key: str) -> tuple:
    """Allow the last eigenvalue to be implied by unit trace."""
    if len(vals) == n - 1:
        vals = vals + [1 - sum(vals)]
    if len(vals) != n:
        raise ScenarioError(f"expected {n} (or {n - 1}) values, got {len(vals)}", key)
    return tuple(vals)


def parse_scenario(text: str, base: Scenario | None = None) -> Scenario:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in _KNOWN:
            raise ScenarioError(f"unknown key (line {lineno})", k)
        raw[k] = v
    kw: dict = {}
    try:
        for k, v in raw.items():
            if k in _INT_KEYS:
                val = parse_number(v)
                if isinstance(val, float) or val.denominator != 1:
                    raise ScenarioError("expected an integer", k)
                kw[k] = int(val)
            elif k in _FLOAT_KEYS:
                kw[k] = float(parse_number(v))
            elif k == "time_grid":
                kw[k] = tuple(parse_grid(v))
            elif k == "family":
                kw[k] = v
            else:
                kw[k] = parse_list(v)
    except ScenarioError as exc:
        if exc.field is None:
            raise ScenarioError(str(exc), k) from None
        raise
    sc = base or Scenario()
    nodes = kw.get("nodes", sc.nodes)
    a_nodes = kw.get("a_nodes", sc.a_nodes)
    b_nodes = kw.get("b_nodes", sc.b_nodes)
    for key, k in (("lambda_a", a_nodes), ("lambda_b", b_nodes), ("lambda_c", nodes - a_nodes - b_nodes)):
        if key in kw:
            kw[key] = _complete(kw[key], 2**k, key)
    if "beta" in kw:
        kw["beta"] = tuple(float(b) for b in kw["beta"])
    if "active" in kw:
        kw["active"] = tuple(int(a) for a in kw["active"])
    tol_abs = kw.pop("tol_abs", None)
    tol_rel = kw.pop("tol_rel", None)
    if tol_abs is not None or tol_rel is not None:
        kw["policy"] = RankPolicy(tol_abs if tol_abs is not None else sc.policy.abs_floor,
                                  tol_rel if tol_rel is not None else sc.policy.rel_factor)
    return replace(sc, **kw)


def load_scenario(path: str | Path, base: Scenario | None = None) -> Scenario:
    p = Path(path)
    if not p.is_file():
        raise ScenarioError(f"scenario file {p} not found")
    return parse_scenario(p.read_text(), base)


# ---------------------------------------------------------------------------
# standard scenarios

F = Fraction


def one_node(lambda_a=F(3, 4), lambda_b=F(3, 4), lambda_c=(F(1, 10), F(3, 20), F(9, 20)),
             **kw) -> Scenario:
    """4-spin chain, single-spin A (node 1) and B (node 4), two-spin C."""
    lc = tuple(lambda_c) + (1 - sum(lambda_c),) if len(lambda_c) == 3 else tuple(lambda_c)
    return Scenario(nodes=4, a_nodes=1, b_nodes=1, lambda_a=(lambda_a, 1 - lambda_a),
                    lambda_b=(lambda_b, 1 - lambda_b), lambda_c=lc, **kw)


def two_node(lambda_a: Sequence, lambda_b: Sequence, **kw) -> Scenario:
    """4-spin chain, A = nodes 1-2, B = nodes 3-4, no C."""
    return Scenario(nodes=4, a_nodes=2, b_nodes=2, lambda_a=tuple(lambda_a),
                    lambda_b=tuple(lambda_b), **kw)


EXAMPLE1 = dict(lambda_a=(F(5, 16), F(5, 16), F(5, 16), F(1, 16)), lambda_b=(F(1, 4),) * 4)
EXAMPLE2 = dict(lambda_a=(F(4, 15), F(4, 15), F(4, 15), F(1, 5)),
                lambda_b=(F(4, 15), F(4, 15), F(7, 30), F(7, 30)))


def example1(**kw) -> Scenario:
    """Pair (phi_2, phi_6) of the six-factor family, all-1/4 receiver."""
    base = dict(factors=6, active=(2, 6), upper=np.pi / 2, epsilon=np.pi / 160)
    base.update(kw)
    return two_node(**EXAMPLE1, **base)


def example2(**kw) -> Scenario:
    """Triad (phi_2, phi_4, phi_6) of the six-factor family, paired receiver spectrum."""
    base = dict(factors=6, active=(2, 4, 6), upper=np.pi / 2, epsilon=np.pi / 50)
    base.update(kw)
    return two_node(**EXAMPLE2, **base)
