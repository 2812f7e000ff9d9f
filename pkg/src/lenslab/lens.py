"""Lens dynamics: the conjugation action of a system on its couplings.

One lens step sends C to Q^T C Q.  For an exact system with forward cell
map tau this is the relabeling C[i, j] -> C[tau^{-1}(i), tau^{-1}(j)], so
graph couplings transform by conjugation: graph(s) -> graph(tau o s o
tau^{-1}).  For stochastic Q it is the step-coupling evaluation of
rho(T^{-1}A_i x T^{-1}A_j) and is forward-only.

The one-sided map sends C to Q^T C; on graph couplings it composes:
graph(s) -> graph(tau o s).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .couplings import (
    CouplingMatrix,
    coupling_distance,
    product_coupling,
    repair_to_polytope,
    validate_coupling,
)
from .errors import (
    BackendMismatch,
    DimensionMismatch,
    NotExact,
    SizeGuard,
)
from .partitions import FiniteSystem, system_power

__all__ = [
    "LensOrbit",
    "PeriodReport",
    "FixedPointSpace",
    "HitStats",
    "lens_step",
    "lens_step_inverse",
    "one_sided_step",
    "lens_iterate",
    "orbit",
    "cesaro_average",
    "self_joining_residual",
    "markov_commutation_residual",
    "fixed_point_space",
    "detect_period",
    "quasi_attractor_hits",
    "orbit_to_csv",
    "period_report_to_json",
]

FIXED_SPACE_GUARD = 64


def _check(sys: FiniteSystem, c: CouplingMatrix):
    if sys.k != c.k:
        raise DimensionMismatch("system and coupling sizes differ")
    if sys.backend != c.backend:
        raise BackendMismatch("system and coupling use different backends")


def _relabel(c: np.ndarray, inv: np.ndarray) -> np.ndarray:
    return c[np.ix_(inv, inv)]


def lens_step(sys: FiniteSystem, c: CouplingMatrix) -> CouplingMatrix:
    """One application of the lens: C -> Q^T C Q."""
    _check(sys, c)
    if sys.exact:
        inv = exact.invert_permutation(sys.perm)
        return CouplingMatrix(k=c.k, C=_relabel(c.C, inv))
    return CouplingMatrix(k=c.k, C=exact.mat_conjugate(sys.Q, c.C))


def lens_step_inverse(sys: FiniteSystem, c: CouplingMatrix) -> CouplingMatrix:
    """Inverse lens step Q C Q^T; defined only for exact systems."""
    _check(sys, c)
    if not sys.exact:
        raise NotExact("the stochastic lens is forward-only")
    return CouplingMatrix(k=c.k, C=_relabel(c.C, np.asarray(sys.perm)))


def one_sided_step(sys: FiniteSystem, c: CouplingMatrix) -> CouplingMatrix:
    """One-sided map C -> Q^T C: first coordinate moves, second stays."""
    _check(sys, c)
    if sys.exact:
        inv = exact.invert_permutation(sys.perm)
        return CouplingMatrix(k=c.k, C=c.C[inv, :])
    return CouplingMatrix(k=c.k, C=exact.mat_mul(sys.Q.T, c.C))


def lens_iterate(sys: FiniteSystem, c: CouplingMatrix, n: int) -> CouplingMatrix:
    """n-fold lens step in one shot, via Q^n (equal by associativity)."""
    if n < 0:
        raise ValueError("lens_iterate expects n >= 0")
    if n == 0:
        return c
    return lens_step(system_power(sys, n), c)


@dataclass(frozen=True, eq=False)
class LensOrbit:
    """Finite orbit segment: states[n+1] = step(system, states[n]).

    On the float backend each step is followed by drift repair; the L1 size
    of each repair is logged in repair_residuals (zeros when rational).
    """

    system: FiniteSystem
    mode: str
    states: tuple[CouplingMatrix, ...]
    repair_residuals: tuple[float, ...]


def orbit(sys: FiniteSystem, c: CouplingMatrix, n_steps: int,
          mode: str = "lens") -> LensOrbit:
    if mode not in ("lens", "one-sided"):
        raise ValueError("mode must be 'lens' or 'one-sided'")
    step = lens_step if mode == "lens" else one_sided_step
    states = [c]
    residuals = [0.0]
    current = c
    for _ in range(n_steps):
        current = step(sys, current)
        if current.backend == exact.FLOAT:
            repaired = repair_to_polytope(current.C)
            residuals.append(exact.l1_diff(repaired.C, current.C))
            current = repaired
        else:
            residuals.append(0.0)
        states.append(current)
    return LensOrbit(system=sys, mode=mode, states=tuple(states),
                     repair_residuals=tuple(residuals))


def cesaro_average(orb: LensOrbit, n: int | None = None) -> CouplingMatrix:
    """Average (1/N) sum of states[1..N]; exact weights when rational."""
    if n is None:
        n = len(orb.states) - 1
    if n < 1 or n >= len(orb.states):
        raise ValueError("cesaro_average needs 1 <= N < len(states)")
    first = orb.states[1].C
    total = first.copy() if hasattr(first, "copy") else np.array(first)
    for m in range(2, n + 1):
        total = total + orb.states[m].C
    if exact.is_rational_array(total):
        avg = total * Fraction(1, n)
    else:
        avg = total / n
    return CouplingMatrix(k=orb.states[0].k, C=avg)


def self_joining_residual(sys: FiniteSystem, c: CouplingMatrix):
    """L1 distance between C and its lens image; zero iff C is fixed."""
    return coupling_distance(lens_step(sys, c), c)


def markov_commutation_residual(sys: FiniteSystem, c: CouplingMatrix):
    """L1 norm of M Q - Q M for the Markov matrix M = k C^T of the coupling.

    Commutation with Q is the operator form of being a self-joining.  For
    exact systems it vanishes iff self_joining_residual does; for stochastic
    systems it is the sharper test, since the step-coupling lens spreads
    graph mass that the operator identity preserves.
    """
    _check(sys, c)
    scale = Fraction(c.k) if c.backend == exact.RATIONAL else float(c.k)
    m = c.C.T * scale
    return exact.l1_diff(exact.mat_mul(m, sys.Q), exact.mat_mul(sys.Q, m))


@dataclass(frozen=True, eq=False)
class FixedPointSpace:
    """Affine hull of {C in the polytope : lens(C) = C}.

    dimension: dimension of the affine hull.
    basis: direction matrices (zero marginals, lens-invariant).
    interior: a strictly positive fixed coupling (the product coupling).
    """

    dimension: int
    basis: tuple[np.ndarray, ...]
    interior: CouplingMatrix


def _pair_orbits(perm: np.ndarray, k: int) -> list[np.ndarray]:
    """Orbits of (i, j) -> (perm[i], perm[j]) as flat-index arrays."""
    seen = np.zeros(k * k, dtype=bool)
    orbits = []
    for start in range(k * k):
        if seen[start]:
            continue
        members = []
        idx = start
        while not seen[idx]:
            seen[idx] = True
            members.append(idx)
            i, j = divmod(idx, k)
            idx = perm[i] * k + perm[j]
        orbits.append(np.array(members, dtype=int))
    return orbits


def _marginal_rows(k: int):
    """Constraint rows forcing zero row and column sums, over flat (i,j)."""
    rows = np.zeros((2 * k, k * k), dtype=object)
    rows[...] = 0
    for i in range(k):
        for j in range(k):
            rows[i, i * k + j] = 1
            rows[k + j, i * k + j] = 1
    return rows


def fixed_point_space(sys: FiniteSystem) -> FixedPointSpace:
    k = sys.k
    if k > FIXED_SPACE_GUARD:
        raise SizeGuard(f"fixed_point_space solves k^2 variables; k={k} > {FIXED_SPACE_GUARD}")
    backend = sys.backend
    interior = product_coupling(k, backend)

    if sys.exact:
        # Lens invariance for a permutation system says the matrix is
        # constant on orbits of (i, j) -> (tau(i), tau(j)); only the
        # marginal constraints remain, in orbit coordinates.
        orbits = _pair_orbits(np.asarray(sys.perm, dtype=int), k)
        t = len(orbits)
        a = np.zeros((2 * k, t), dtype=object)
        a[...] = 0
        for ti, members in enumerate(orbits):
            for idx in members:
                i, j = divmod(int(idx), k)
                a[i, ti] += 1
                a[k + j, ti] += 1
        null = exact.exact_nullspace(a)
        basis = []
        for vec in null:
            mat = exact.zeros((k, k), exact.RATIONAL)
            flat = mat.ravel()
            for ti, members in enumerate(orbits):
                if vec[ti] != 0:
                    for idx in members:
                        flat[idx] = vec[ti]
            if backend == exact.FLOAT:
                mat = exact.as_float(mat)
            basis.append(exact.freeze(mat))
        return FixedPointSpace(dimension=len(basis), basis=tuple(basis),
                               interior=interior)

    # General case: nullspace of [lens(X) - X ; row sums ; column sums].
    if backend == exact.RATIONAL:
        rows = []
        q = sys.Q
        for i in range(k):
            for j in range(k):
                row = np.empty(k * k, dtype=object)
                for a_ in range(k):
                    for b_ in range(k):
                        v = q[a_, i] * q[b_, j]
                        if a_ == i and b_ == j:
                            v = v - 1
                        row[a_ * k + b_] = v
                rows.append(row)
        system = np.vstack([np.array(rows, dtype=object), _marginal_rows(k)])
        null = exact.exact_nullspace(system)
        basis = tuple(exact.freeze(v.reshape(k, k)) for v in null)
        return FixedPointSpace(dimension=len(basis), basis=basis, interior=interior)

    from scipy.linalg import null_space

    q = np.asarray(sys.Q, dtype=float)
    lens_op = np.kron(q.T, q.T) - np.eye(k * k)
    marg = np.asarray(_marginal_rows(k), dtype=float)
    stack = np.vstack([lens_op, marg])
    null = null_space(stack, rcond=1e-10)
    basis = tuple(exact.freeze(null[:, i].reshape(k, k))
                  for i in range(null.shape[1]))
    return FixedPointSpace(dimension=null.shape[1], basis=basis, interior=interior)


@dataclass(frozen=True)
class PeriodReport:
    """Least p with ||lens^p(C) - C|| <= tol, plus the residual table."""

    period: int | None
    residual_by_p: dict[int, Fraction | float] = field(compare=False)


def detect_period(sys: FiniteSystem, c: CouplingMatrix, maxp: int,
                  tol=None) -> PeriodReport:
    if tol is None:
        tol = Fraction(0) if c.backend == exact.RATIONAL else 1e-9
    residuals: dict[int, Fraction | float] = {}
    period = None
    current = c
    for p in range(1, maxp + 1):
        current = lens_step(sys, current)
        residuals[p] = coupling_distance(current, c)
        if period is None and residuals[p] <= tol:
            period = p
    return PeriodReport(period=period, residual_by_p=residuals)


@dataclass(frozen=True, eq=False)
class HitStats:
    """Per-window densities of orbit states satisfying a target predicate."""

    window: int
    densities: tuple[float, ...]
    overall: float
    tail: float
    nondecreasing: bool


def quasi_attractor_hits(orb: LensOrbit, target, window: int) -> HitStats:
    if window < 1:
        raise ValueError("window must be positive")
    hits = [bool(target(state)) for state in orb.states]
    densities = []
    for start in range(0, len(hits) - len(hits) % window, window):
        chunk = hits[start:start + window]
        densities.append(sum(chunk) / window)
    if not densities:
        densities = [sum(hits) / len(hits)]
    nondecr = all(densities[i] <= densities[i + 1] for i in range(len(densities) - 1))
    return HitStats(window=window, densities=tuple(densities),
                    overall=sum(hits) / len(hits), tail=densities[-1],
                    nondecreasing=nondecr)


def orbit_to_csv(orb: LensOrbit) -> str:
    """Orbit summary: residual to fixedness, drift from start, distance to
    the product coupling, one row per step."""
    sys = orb.system
    k = orb.states[0].k
    prod = product_coupling(k, orb.states[0].backend)
    lines = ["n,residual_to_fixed,distance_to_initial,distance_to_product"]
    for n, state in enumerate(orb.states):
        res = self_joining_residual(sys, state)
        d0 = coupling_distance(state, orb.states[0])
        dp = coupling_distance(state, prod)
        lines.append(
            f"{n},{exact.format_value(res)},{exact.format_value(d0)},{exact.format_value(dp)}"
        )
    return "\n".join(lines) + "\n"


def period_report_to_json(report: PeriodReport) -> str:
    return json.dumps(
        {
            "period": report.period,
            "residual_by_p": {
                str(p): exact.format_value(v)
                for p, v in sorted(report.residual_by_p.items())
            },
        },
        sort_keys=True,
    )
