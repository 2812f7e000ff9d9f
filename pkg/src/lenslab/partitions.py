"""Equal-mass partitions, refinements, and finite systems.

A finite system is a doubly stochastic matrix Q over a partition into k
cells of mass 1/k each: Q[a, i] = k * mu(A_a intersect T^{-1} A_i).  The
system is exact when Q is a permutation matrix; then Q[a, tau(a)] = 1 for
the forward cell map tau, and cell dynamics are lossless relabelings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .errors import (
    DimensionMismatch,
    NegativePowerOfStochastic,
)

__all__ = [
    "Partition",
    "RefinementMap",
    "FiniteSystem",
    "make_uniform_partition",
    "refine",
    "refinement_from_parent",
    "system_from_permutation",
    "system_from_matrix",
    "system_power",
    "validate_system",
    "system_to_json",
    "system_from_json",
]


@dataclass(frozen=True)
class Partition:
    """Ordered partition of a probability space into k cells of mass 1/k."""

    k: int
    labels: tuple[str, ...]
    cell_mass: Fraction

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("partition needs at least one cell")
        if len(self.labels) != self.k:
            raise ValueError("label count must equal k")
        if self.cell_mass * self.k != 1:
            raise ValueError("cells must have mass exactly 1/k")


def make_uniform_partition(k: int, labels=None) -> Partition:
    if labels is None:
        labels = tuple(str(i) for i in range(k))
    return Partition(k=k, labels=tuple(labels), cell_mass=Fraction(1, k))


@dataclass(frozen=True, eq=False)
class RefinementMap:
    """Surjection from fine cells onto coarse cells, r children per cell."""

    coarse: Partition
    fine: Partition
    parent: np.ndarray

    def __post_init__(self):
        exact.freeze(np.asarray(self.parent))

    @property
    def r(self) -> int:
        return self.fine.k // self.coarse.k


def refinement_from_parent(coarse: Partition, fine: Partition, parent) -> RefinementMap:
    parent = np.asarray(parent, dtype=int)
    if fine.k % coarse.k != 0:
        raise DimensionMismatch("fine cell count must be a multiple of coarse")
    r = fine.k // coarse.k
    if len(parent) != fine.k:
        raise DimensionMismatch("parent map must cover every fine cell")
    counts = np.bincount(parent, minlength=coarse.k)
    if len(counts) != coarse.k or not np.all(counts == r):
        raise DimensionMismatch("each coarse cell needs exactly r fine children")
    return RefinementMap(coarse=coarse, fine=fine, parent=parent)


def refine(p: Partition, r: int) -> tuple[Partition, RefinementMap]:
    """Split each cell into r consecutive children (parent u -> u // r)."""
    if r < 1:
        raise ValueError("refinement factor must be positive")
    labels = tuple(f"{p.labels[u // r]}.{u % r}" for u in range(p.k * r))
    fine = Partition(k=p.k * r, labels=labels, cell_mass=Fraction(1, p.k * r))
    parent = np.arange(p.k * r) // r
    return fine, refinement_from_parent(p, fine, parent)


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    """Doubly stochastic cell dynamics over an equal-mass partition."""

    partition: Partition
    Q: np.ndarray
    exact: bool
    perm: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        exact.freeze(np.asarray(self.Q))
        if self.perm is not None:
            exact.freeze(np.asarray(self.perm))

    @property
    def k(self) -> int:
        return self.partition.k

    @property
    def backend(self) -> str:
        return exact.backend_of(self.Q)


def system_from_permutation(perm, labels=None, backend: str = exact.RATIONAL) -> FiniteSystem:
    """Exact system whose forward cell map is the given permutation."""
    perm = np.asarray(perm, dtype=int)
    k = len(perm)
    if sorted(perm.tolist()) != list(range(k)):
        raise ValueError("forward cell map must be a permutation of 0..k-1")
    part = make_uniform_partition(k, labels)
    # Q[a, perm[a]] = 1, i.e. the transpose of matrix_of_permutation(perm).
    q = exact.matrix_of_permutation(exact.invert_permutation(perm), backend)
    return FiniteSystem(partition=part, Q=q, exact=True, perm=perm)


def system_from_matrix(q: np.ndarray, partition: Partition | None = None,
                       exact_flag: bool | None = None) -> FiniteSystem:
    q = np.asarray(q)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionMismatch("system matrix must be square")
    k = q.shape[0]
    if partition is None:
        partition = make_uniform_partition(k)
    if partition.k != k:
        raise DimensionMismatch("partition size must match the matrix")
    perm = exact.permutation_of_matrix(q)
    if exact_flag is None:
        exact_flag = perm is not None
    if exact_flag and perm is None:
        raise ValueError("exact flag set but the matrix is not a permutation")
    return FiniteSystem(partition=partition, Q=q, exact=bool(exact_flag),
                        perm=perm if exact_flag else None)


def system_power(sys: FiniteSystem, n: int) -> FiniteSystem:
    """System of T^n; negative n allowed only for exact systems."""
    if n < 0 and not sys.exact:
        raise NegativePowerOfStochastic(
            "negative powers need an exact system: the stochastic matrix "
            "has no inverse inside the polytope"
        )
    if sys.exact:
        p = np.arange(sys.k)
        step = sys.perm if n >= 0 else exact.invert_permutation(sys.perm)
        for _ in range(abs(n) % exact.permutation_order(sys.perm)):
            p = exact.compose_permutations(step, p)
        return system_from_permutation(p, labels=sys.partition.labels,
                                       backend=sys.backend)
    return system_from_matrix(exact.mat_power(sys.Q, n), partition=sys.partition,
                              exact_flag=False)


def validate_system(sys: FiniteSystem, tol: float = 1e-12) -> list[str]:
    """Diagnostics list; empty when the system satisfies every invariant."""
    out: list[str] = []
    q = sys.Q
    k = sys.k
    if q.shape != (k, k):
        return [f"shape{q.shape}"]
    exact_backend = exact.is_rational_array(q)
    one_over = Fraction(1) if exact_backend else 1.0
    for a in range(k):
        s = q[a, :].sum()
        if (s != one_over) if exact_backend else abs(s - 1.0) > tol:
            out.append(f"row_sum({a})")
    for i in range(k):
        s = q[:, i].sum()
        if (s != one_over) if exact_backend else abs(s - 1.0) > tol:
            out.append(f"col_sum({i})")
    for a in range(k):
        for i in range(k):
            v = q[a, i]
            if (v < 0) if exact_backend else v < -tol:
                out.append(f"negative_entry({a},{i})")
    if sys.exact:
        if exact.permutation_of_matrix(q) is None:
            out.append("exact_flag")
    return out


def system_to_json(sys: FiniteSystem) -> str:
    q = sys.Q
    flat = [exact.format_value(x) for x in np.asarray(q).ravel()]
    return json.dumps({"k": sys.k, "exact": sys.exact, "Q": flat}, sort_keys=True)


def system_from_json(text: str) -> FiniteSystem:
    doc = json.loads(text)
    k = int(doc["k"])
    values = [exact.parse_value(v) for v in doc["Q"]]
    if len(values) != k * k:
        raise DimensionMismatch("Q must hold k*k row-major entries")
    if any(isinstance(v, float) for v in values):
        q = np.array(values, dtype=float).reshape(k, k)
    else:
        q = np.array(values, dtype=object).reshape(k, k)
    return system_from_matrix(q, exact_flag=bool(doc["exact"]))
