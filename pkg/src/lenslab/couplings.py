"""Couplings of two copies of an equal-mass partition.

A coupling is a k x k nonnegative matrix C with every row and column sum
equal to 1/k, the entry C[i, j] standing for rho(A_i x A_j).  k * C is
doubly stochastic, so the coupling space is a scaled Birkhoff polytope.

Graph couplings carry the mass of a cell permutation: graph_coupling(sigma)
puts 1/k at (sigma(j), j), i.e. cell j is transported onto cell sigma(j).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .errors import BackendMismatch, DimensionMismatch, NotRepairable
from .partitions import RefinementMap

__all__ = [
    "CouplingMatrix",
    "NeighborhoodSpec",
    "product_coupling",
    "graph_coupling",
    "lift_coupling",
    "restrict_coupling",
    "coupling_distance",
    "in_neighborhood",
    "repair_to_polytope",
    "compose_couplings",
    "validate_coupling",
    "random_coupling",
    "coupling_to_json",
    "coupling_from_json",
    "coupling_to_csv",
]

REPAIR_TARGET = 1e-13


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Transportation-polytope point: rows and columns each sum to 1/k."""

    k: int
    C: np.ndarray

    def __post_init__(self):
        exact.freeze(np.asarray(self.C))

    @property
    def backend(self) -> str:
        return exact.backend_of(self.C)


def _wrap(c: np.ndarray) -> CouplingMatrix:
    return CouplingMatrix(k=c.shape[0], C=c)


def _require_same(a: CouplingMatrix, b: CouplingMatrix):
    if a.k != b.k:
        raise DimensionMismatch("couplings live over different partitions")
    if a.backend != b.backend:
        raise BackendMismatch("cannot mix rational and float couplings")


def product_coupling(k: int, backend: str = exact.RATIONAL) -> CouplingMatrix:
    """Independent coupling: every entry 1/k^2."""
    if backend == exact.RATIONAL:
        return _wrap(exact.constant((k, k), Fraction(1, k * k)))
    return _wrap(np.full((k, k), 1.0 / (k * k)))


def graph_coupling(sigma, backend: str = exact.RATIONAL) -> CouplingMatrix:
    """Coupling concentrated on the graph of a forward cell permutation."""
    sigma = np.asarray(sigma, dtype=int)
    k = len(sigma)
    if sorted(sigma.tolist()) != list(range(k)):
        raise ValueError("sigma must be a permutation of 0..k-1")
    c = exact.zeros((k, k), backend)
    mass = Fraction(1, k) if backend == exact.RATIONAL else 1.0 / k
    for j in range(k):
        c[sigma[j], j] = mass
    return _wrap(c)


def lift_coupling(coarse: CouplingMatrix, ref: RefinementMap) -> CouplingMatrix:
    """Relatively independent extension: spread each entry uniformly over
    the r x r block of fine children."""
    if coarse.k != ref.coarse.k:
        raise DimensionMismatch("coupling does not match the coarse partition")
    parent = np.asarray(ref.parent, dtype=int)
    r = ref.r
    scale = Fraction(1, r * r) if coarse.backend == exact.RATIONAL else 1.0 / (r * r)
    fine = coarse.C[np.ix_(parent, parent)] * scale
    return _wrap(fine)


def restrict_coupling(fine: CouplingMatrix, ref: RefinementMap) -> CouplingMatrix:
    """Push a fine coupling down to the coarse partition by block sums."""
    if fine.k != ref.fine.k:
        raise DimensionMismatch("coupling does not match the fine partition")
    parent = np.asarray(ref.parent, dtype=int)
    kc = ref.coarse.k
    out = exact.zeros((kc, kc), fine.backend)
    for a in range(kc):
        rows = np.nonzero(parent == a)[0]
        block = fine.C[rows, :]
        for b in range(kc):
            cols = np.nonzero(parent == b)[0]
            out[a, b] = block[:, cols].sum()
    return _wrap(out)


def coupling_distance(a: CouplingMatrix, b: CouplingMatrix):
    """Entrywise L1 distance; exact Fraction on the rational backend."""
    _require_same(a, b)
    return exact.l1_diff(a.C, b.C)


@dataclass(frozen=True, eq=False)
class NeighborhoodSpec:
    """Basic open set around a coupling.

    kind "entrywise": all |C[i,j] - target[i,j]| < epsilon.
    kind "permutation-diagonal": |C[eta(j), j] - 1/k| < epsilon for all j,
    i.e. the coupling transports each cell j onto eta(j) up to epsilon.
    """

    kind: str
    epsilon: Fraction | float
    target: np.ndarray | None = None
    eta: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("entrywise", "permutation-diagonal"):
            raise ValueError("unknown neighborhood kind")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.kind == "entrywise" and self.target is None:
            raise ValueError("entrywise neighborhood needs a target")
        if self.kind == "permutation-diagonal" and self.eta is None:
            raise ValueError("permutation-diagonal neighborhood needs eta")


def in_neighborhood(c: CouplingMatrix, spec: NeighborhoodSpec) -> bool:
    if spec.kind == "entrywise":
        target = spec.target
        if target.shape != c.C.shape:
            raise DimensionMismatch("neighborhood target has the wrong shape")
        return bool(exact.max_abs(c.C - target) < spec.epsilon)
    eta = np.asarray(spec.eta, dtype=int)
    if len(eta) != c.k:
        raise DimensionMismatch("eta has the wrong length")
    mass = Fraction(1, c.k) if c.backend == exact.RATIONAL else 1.0 / c.k
    return all(abs(c.C[eta[j], j] - mass) < spec.epsilon for j in range(c.k))


def repair_to_polytope(m: np.ndarray, tol: float = 1e-8) -> CouplingMatrix:
    """Project a slightly drifted float matrix back onto the polytope.

    Alternating row/column rescaling (Sinkhorn) after clamping negatives;
    iterates until the largest marginal deviation is below 1e-13.  Raises
    NotRepairable when the input is farther than tol from feasible, or a
    row or column carries no mass to rescale.
    """
    m = np.asarray(m)
    if exact.is_rational_array(m):
        # Exact arithmetic never drifts: accept valid input, refuse the rest.
        cm = _wrap(m)
        bad = validate_coupling(cm)
        if bad:
            raise NotRepairable(f"exact matrix violates {bad[0]}")
        return cm
    m = np.asarray(m, dtype=float)
    k = m.shape[0]
    target = 1.0 / k
    if m.min() < -tol:
        raise NotRepairable(f"entry {m.min():.3e} below -tol")
    if np.abs(m.sum(axis=1) - target).max() > tol:
        raise NotRepairable("row sums drift beyond tol")
    if np.abs(m.sum(axis=0) - target).max() > tol:
        raise NotRepairable("column sums drift beyond tol")
    w = np.clip(m, 0.0, None)
    for _ in range(10_000):
        rows = w.sum(axis=1)
        if rows.min() <= 0.0:
            raise NotRepairable("zero row cannot be rescaled")
        w = w * (target / rows)[:, None]
        cols = w.sum(axis=0)
        if cols.min() <= 0.0:
            raise NotRepairable("zero column cannot be rescaled")
        w = w * (target / cols)[None, :]
        dev = max(np.abs(w.sum(axis=1) - target).max(),
                  np.abs(w.sum(axis=0) - target).max())
        if dev < REPAIR_TARGET:
            return _wrap(w)
    raise NotRepairable("rescaling did not converge")


def compose_couplings(a: CouplingMatrix, b: CouplingMatrix) -> CouplingMatrix:
    """Semigroup product: k * (A @ B).

    Matches Markov-operator composition, so graph couplings compose as the
    underlying permutations: compose(graph(s), graph(t)) = graph(s o t).
    """
    _require_same(a, b)
    scale = Fraction(a.k) if a.backend == exact.RATIONAL else float(a.k)
    return _wrap(exact.mat_mul(a.C, b.C) * scale)


def validate_coupling(c: CouplingMatrix, tol: float = 1e-12) -> list[str]:
    out: list[str] = []
    m = c.C
    k = c.k
    if m.shape != (k, k):
        return [f"shape{m.shape}"]
    rational = exact.is_rational_array(m)
    target = Fraction(1, k) if rational else 1.0 / k
    for i in range(k):
        s = m[i, :].sum()
        if (s != target) if rational else abs(s - target) > tol:
            out.append(f"row_sum({i})")
    for j in range(k):
        s = m[:, j].sum()
        if (s != target) if rational else abs(s - target) > tol:
            out.append(f"col_sum({j})")
    neg = [(i, j) for i in range(k) for j in range(k)
           if ((m[i, j] < 0) if rational else m[i, j] < -tol)]
    out.extend(f"negative_entry({i},{j})" for i, j in neg)
    return out


def random_coupling(k: int, rng: np.random.Generator,
                    backend: str = exact.RATIONAL, terms: int = 6) -> CouplingMatrix:
    """Random interior point: convex combination of permutation couplings
    with small rational weights.  Exact polytope membership by construction."""
    weights = [int(w) for w in rng.integers(1, 20, size=terms)]
    total = sum(weights)
    # Accumulate integer numerators over the common denominator total * k,
    # converting to Fraction once per entry.
    numerators = np.zeros((k, k), dtype=np.int64)
    cols = np.arange(k)
    for w in weights:
        sigma = rng.permutation(k)
        numerators[sigma, cols] += w
    if backend == exact.FLOAT:
        return _wrap(numerators.astype(float) / (total * k))
    c = np.empty((k, k), dtype=object)
    for i in range(k):
        for j in range(k):
            c[i, j] = Fraction(int(numerators[i, j]), total * k)
    return _wrap(c)


def coupling_to_json(c: CouplingMatrix) -> str:
    flat = [exact.format_value(x) for x in np.asarray(c.C).ravel()]
    return json.dumps({"k": c.k, "C": flat}, sort_keys=True)


def coupling_from_json(text: str) -> CouplingMatrix:
    doc = json.loads(text)
    k = int(doc["k"])
    values = [exact.parse_value(v) for v in doc["C"]]
    if len(values) != k * k:
        raise DimensionMismatch("C must hold k*k row-major entries")
    if any(isinstance(v, float) for v in values):
        arr = np.array(values, dtype=float).reshape(k, k)
    else:
        arr = np.array(values, dtype=object).reshape(k, k)
    return _wrap(arr)


def coupling_to_csv(c: CouplingMatrix) -> str:
    lines = ["i,j,value"]
    for i in range(c.k):
        for j in range(c.k):
            lines.append(f"{i},{j},{exact.format_value(c.C[i, j])}")
    return "\n".join(lines) + "\n"
