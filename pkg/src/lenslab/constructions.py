"""Constructive witnesses: couplings and systems built to hit exact targets.

Everything here realizes some coupling-space phenomenon with zero error:
interval exchanges inducing a prescribed rational coupling, probe couplings
whose lens scores certify rigidity, fine graph couplings witnessing
transitivity between permutation neighborhoods, graph couplings realizing a
prescribed 0/half block of the entropy-factor sequence, and cell
permutations commuting with shifts and odometers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .couplings import (
    CouplingMatrix,
    NeighborhoodSpec,
    graph_coupling,
    in_neighborhood,
    restrict_coupling,
)
from .errors import (
    BadBlocks,
    DimensionMismatch,
    InfeasibleTarget,
    ResolutionGuard,
    SizeGuard,
)
from .lens import lens_iterate, markov_commutation_residual
from .partitions import FiniteSystem, refinement_from_parent
from .zoo import SIZE_LIMIT, IETSpec, bernoulli_system, index_word

__all__ = [
    "RationalTarget",
    "WitnessResult",
    "BlockTarget",
    "CommuterResult",
    "consecutive_blocks",
    "realize_coupling_as_iet",
    "density_gap",
    "rigidity_probe",
    "transitivity_witness",
    "entropy_factor_F",
    "realize_entropy_block",
    "bernoulli_cyclic_commuter",
    "odometer_commuter",
    "random_rational_target",
    "target_to_json",
    "target_from_json",
]


@dataclass(frozen=True, eq=False)
class RationalTarget:
    """Integer transportation matrix: the coupling m / L with denominator L.

    m is k x k with nonnegative integer entries and every row and column
    summing to L / k, so m / L lies in the coupling polytope.
    """

    k: int
    L: int
    m: np.ndarray

    def __post_init__(self):
        exact.freeze(np.asarray(self.m))
        if self.L % self.k != 0:
            raise InfeasibleTarget("k must divide L")
        m = np.asarray(self.m)
        if m.shape != (self.k, self.k):
            raise InfeasibleTarget("m must be k x k")
        if not np.issubdtype(m.dtype, np.integer):
            raise InfeasibleTarget("m must hold integers")
        if m.min() < 0:
            raise InfeasibleTarget("m must be nonnegative")
        quota = self.L // self.k
        if not np.all(m.sum(axis=1) == quota) or not np.all(m.sum(axis=0) == quota):
            raise InfeasibleTarget("rows and columns must sum to L/k")

    def coupling(self, backend: str = exact.RATIONAL) -> CouplingMatrix:
        if backend == exact.RATIONAL:
            c = np.empty((self.k, self.k), dtype=object)
            for i in range(self.k):
                for j in range(self.k):
                    c[i, j] = Fraction(int(self.m[i, j]), self.L)
            return CouplingMatrix(k=self.k, C=c)
        return CouplingMatrix(k=self.k, C=np.asarray(self.m, dtype=float) / self.L)


def target_to_json(t: RationalTarget) -> str:
    return json.dumps(
        {"k": t.k, "L": t.L, "m": [int(x) for x in np.asarray(t.m).ravel()]},
        sort_keys=True,
    )


def target_from_json(text: str) -> RationalTarget:
    doc = json.loads(text)
    k, L = int(doc["k"]), int(doc["L"])
    m = np.array(doc["m"], dtype=int).reshape(k, k)
    return RationalTarget(k=k, L=L, m=m)


def random_rational_target(k: int, L: int, rng: np.random.Generator) -> RationalTarget:
    """Sum of L/k random permutation matrices: marginals L/k by construction."""
    if L % k != 0:
        raise InfeasibleTarget("k must divide L")
    m = np.zeros((k, k), dtype=int)
    for _ in range(L // k):
        sigma = rng.permutation(k)
        m[sigma, np.arange(k)] += 1
    return RationalTarget(k=k, L=L, m=m)


def realize_coupling_as_iet(target: RationalTarget) -> IETSpec:
    """Interval exchange on k*L equal subintervals inducing target exactly.

    Each cell i splits into L consecutive subintervals.  Sweeping source
    cells in order, the next k*m[dest, src] subintervals of the source go
    to the first unfilled subintervals of the destination, so the induced
    coarse coupling counts k*m[dest, src] / (k*L) = m/L per cell pair.
    """
    k, L = target.k, target.L
    total = k * L
    if total > SIZE_LIMIT:
        raise SizeGuard(f"k*L = {total} subintervals > {SIZE_LIMIT}")
    perm = np.full(total, -1, dtype=int)
    cursor = [0] * k
    for src in range(k):
        pos = src * L
        for dest in range(k):
            count = k * int(target.m[dest, src])
            for _ in range(count):
                if cursor[dest] >= L:
                    raise InfeasibleTarget("destination overfilled")
                perm[pos] = dest * L + cursor[dest]
                cursor[dest] += 1
                pos += 1
        if pos != (src + 1) * L:
            raise InfeasibleTarget("source not exactly filled")
    return IETSpec(n_intervals=total, permutation=tuple(int(x) for x in perm))


def density_gap(c: CouplingMatrix, L: int) -> tuple[RationalTarget, Fraction]:
    """Nearest denominator-L target under entrywise L1, with its distance.

    Floors L*C, then distributes the missing units preferring large
    fractional parts, one unit per cell while quotas allow; the distance
    decays at rate <= k^2 / L.
    """
    k = c.k
    if L % k != 0:
        raise InfeasibleTarget("k must divide L")
    vals = [[Fraction(x) if not isinstance(x, Fraction) else x for x in row]
            for row in np.asarray(c.C)]
    scaled = [[vals[i][j] * L for j in range(k)] for i in range(k)]
    base = np.array([[int(x.numerator // x.denominator) for x in row]
                     for row in scaled], dtype=int)
    quota = L // k
    row_need = [quota - int(base[i].sum()) for i in range(k)]
    col_need = [quota - int(base[:, j].sum()) for j in range(k)]
    frac = {(i, j): scaled[i][j] - base[i][j] for i in range(k) for j in range(k)}
    order = sorted(frac, key=lambda ij: (-frac[ij], ij))
    for i, j in order:
        if row_need[i] > 0 and col_need[j] > 0 and frac[(i, j)] > 0:
            base[i, j] += 1
            row_need[i] -= 1
            col_need[j] -= 1
    while sum(row_need) > 0:
        i = next(i for i in range(k) if row_need[i] > 0)
        j = next(j for j in range(k) if col_need[j] > 0)
        base[i, j] += 1
        row_need[i] -= 1
        col_need[j] -= 1
    target = RationalTarget(k=k, L=L, m=base)
    distance = sum(
        abs(Fraction(int(base[i, j]), L) - vals[i][j])
        for i in range(k) for j in range(k)
    )
    return target, distance


def consecutive_blocks(sizes) -> list[list[int]]:
    """Partition cells 0..sum(sizes)-1 into consecutive runs."""
    blocks, start = [], 0
    for sz in sizes:
        blocks.append(list(range(start, start + sz)))
        start += sz
    return blocks


def _validate_blocks(blocks, k: int) -> list[int]:
    sizes = [len(b) for b in blocks]
    if len(set(sizes)) != len(sizes):
        raise BadBlocks("block sizes must be pairwise distinct")
    cells = sorted(cell for b in blocks for cell in b)
    if cells != list(range(k)):
        raise BadBlocks("blocks must partition the cells exactly once")
    return sizes


def rigidity_probe(sys: FiniteSystem, blocks, n: int):
    """Lens score of the block-diagonal probe coupling after n steps.

    The probe puts mass a_i = |block_i| / k uniformly on each block square;
    the score is the mass the n-step lens image leaves on the union of
    block squares.  Score 1 at n = 0; score 1 again exactly at returns of
    the cell dynamics, which is what distinct block masses detect.
    """
    k = sys.k
    blocks = [list(map(int, b)) for b in blocks]
    _validate_blocks(blocks, k)
    backend = sys.backend
    xi = exact.zeros((k, k), backend)
    for b in blocks:
        w = Fraction(1, k * len(b)) if backend == exact.RATIONAL else 1.0 / (k * len(b))
        for i in b:
            for j in b:
                xi[i, j] = w
    image = lens_iterate(sys, CouplingMatrix(k=k, C=xi), n)
    score = Fraction(0) if backend == exact.RATIONAL else 0.0
    for b in blocks:
        idx = np.asarray(b, dtype=int)
        score = score + image.C[np.ix_(idx, idx)].sum()
    return score


@dataclass(frozen=True, eq=False)
class WitnessResult:
    """Fine coupling steering one permutation neighborhood into another."""

    n: int
    fine_k: int
    xi: CouplingMatrix
    restricted_source: CouplingMatrix
    restricted_image: CouplingMatrix
    check_source: bool
    check_image: bool


def transitivity_witness(d: int, L: int, sigma, pi, epsilon=Fraction(1, 10**6)) -> WitnessResult:
    """Graph coupling at resolution d^{2L} moved by the L-step lens from
    the sigma-neighborhood exactly onto the pi-neighborhood.

    Cells at the fine resolution are pairs (i, s) of base cells read as
    prefix i and suffix s.  The witness transports (i, s) onto
    (sigma(i), pi(s)); the L-step lens shifts the suffix block into view,
    so the restriction moves from graph(sigma) to graph(pi), both exactly.
    """
    sigma = np.asarray(sigma, dtype=int)
    pi = np.asarray(pi, dtype=int)
    k = d**L
    fine_k = k * k
    if fine_k > SIZE_LIMIT:
        raise ResolutionGuard(f"needs d^(2L) = {fine_k} cells > {SIZE_LIMIT}")
    if len(sigma) != k or len(pi) != k:
        raise DimensionMismatch("sigma and pi must permute the d^L base cells")

    fine_perm = np.empty(fine_k, dtype=int)
    for v in range(fine_k):
        i, s = divmod(v, k)
        fine_perm[v] = int(sigma[i]) * k + int(pi[s])
    xi = graph_coupling(fine_perm)

    base = bernoulli_system(d, L)
    fine = bernoulli_system(d, 2 * L)
    ref = refinement_from_parent(base.partition, fine.partition,
                                 np.arange(fine_k) // k)

    restricted_source = restrict_coupling(xi, ref)
    image = lens_iterate(fine, xi, L)
    restricted_image = restrict_coupling(image, ref)

    check_source = in_neighborhood(
        restricted_source, NeighborhoodSpec(kind="permutation-diagonal",
                                            epsilon=epsilon, eta=sigma))
    check_image = in_neighborhood(
        restricted_image, NeighborhoodSpec(kind="permutation-diagonal",
                                           epsilon=epsilon, eta=pi))
    return WitnessResult(n=L, fine_k=fine_k, xi=xi,
                         restricted_source=restricted_source,
                         restricted_image=restricted_image,
                         check_source=check_source, check_image=check_image)


def _half_cells(sys: FiniteSystem) -> np.ndarray:
    cells = np.array([i for i, lab in enumerate(sys.partition.labels)
                      if lab.startswith("0")], dtype=int)
    if len(cells) * 2 != sys.k:
        raise DimensionMismatch("system cells do not split on a binary symbol")
    return cells


def entropy_factor_F(sys: FiniteSystem, lam: CouplingMatrix, n_values: int) -> list:
    """First n_values of n -> (lens^n lam)(A x A), A = cells labeled 0...

    Computed through the indicator vector: (lens^n C)(A x A) equals
    w_n^T C w_n with w_n = Q^n 1_A, so each step costs one matrix-vector
    product instead of a conjugation.
    """
    cells = _half_cells(sys)
    backend = exact.RATIONAL
    q, c = np.asarray(sys.Q), np.asarray(lam.C)
    if sys.backend == exact.FLOAT or lam.backend == exact.FLOAT:
        backend = exact.FLOAT
        q, c = exact.as_float(q), exact.as_float(c)
    w = exact.zeros(sys.k, backend)
    one = Fraction(1) if backend == exact.RATIONAL else 1.0
    for i in cells:
        w[i] = one
    values = []
    for _ in range(n_values):
        values.append(_quadratic(w, c))
        w = exact.mat_mul(q, w)
    return values


def _quadratic(w: np.ndarray, c: np.ndarray):
    if exact.is_rational_array(c) or exact.is_rational_array(w):
        return exact.mat_mul(exact.mat_mul(w.reshape(1, -1), c),
                             w.reshape(-1, 1))[0, 0]
    return float(w @ (c @ w))


@dataclass(frozen=True)
class BlockTarget:
    """Prescribed opening block of the entropy-factor sequence."""

    bits: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.bits:
            raise ValueError("block must be nonempty")
        for b in self.bits:
            if b != 0 and b != Fraction(1, 2):
                raise ValueError("block values must be 0 or 1/2")


def realize_entropy_block(block) -> CouplingMatrix:
    """Graph coupling over 2^n cylinder cells whose factor sequence opens
    with the given block of 0s and 1/2s.

    The cell map flips coordinate t when block[t] = 0 and keeps it when
    block[t] = 1/2; flipped coordinates can never agree (value 0), kept
    ones agree half the time (value 1/2).
    """
    if not isinstance(block, BlockTarget):
        block = BlockTarget(bits=tuple(Fraction(b) for b in block))
    n = len(block.bits)
    k = 2**n
    if k > SIZE_LIMIT:
        raise ResolutionGuard(f"needs 2^n = {k} cells > {SIZE_LIMIT}")
    flip = [b == 0 for b in block.bits]
    perm = np.empty(k, dtype=int)
    for v in range(k):
        word = index_word(v, 2, n)
        image = tuple(w ^ 1 if flip[t] else w for t, w in enumerate(word))
        idx = 0
        for symbol in image:
            idx = idx * 2 + symbol
        perm[v] = idx
    return graph_coupling(perm)


@dataclass(frozen=True, eq=False)
class CommuterResult:
    """Cell permutation commuting with the system, plus its graph coupling."""

    perm: np.ndarray
    coupling: CouplingMatrix
    commutation_residual: Fraction | float
    cycles_blocks: bool


def bernoulli_cyclic_commuter(d: int, ell: int, L: int) -> CommuterResult:
    """Symbol map adding 1 mod d to the first factor of a product alphabet.

    Over alphabet Z_d x Z_ell the per-symbol map (a, b) -> (a+1 mod d, b)
    induces a cell permutation S of the (d*ell)^L cylinder cells that
    commutes with the shift matrix exactly and cyclically permutes the
    blocks {first symbol has a-component i}.
    """
    D = d * ell
    k = D**L
    if k > SIZE_LIMIT:
        raise SizeGuard(f"(d*ell)^L = {k} cells > {SIZE_LIMIT}")
    shift = bernoulli_system(D, L)

    def symbol_map(s: int) -> int:
        a, b = divmod(s, ell)
        return ((a + 1) % d) * ell + b

    perm = np.empty(k, dtype=int)
    for v in range(k):
        word = index_word(v, D, L)
        idx = 0
        for s in word:
            idx = idx * D + symbol_map(s)
        perm[v] = idx
    coupling = graph_coupling(perm)
    residual = markov_commutation_residual(shift, coupling)

    cycles = True
    for v in range(k):
        a0 = index_word(v, D, L)[0] // ell
        a0_image = index_word(int(perm[v]), D, L)[0] // ell
        if a0_image != (a0 + 1) % d:
            cycles = False
            break
    return CommuterResult(perm=perm, coupling=coupling,
                          commutation_residual=residual, cycles_blocks=cycles)


def odometer_commuter(pi, m: int) -> np.ndarray:
    """Permutation of 2^m odometer cells applying pi to the first n digits.

    pi permutes {0 .. 2^n - 1}, the values of the low n digits; higher
    digits pass through.  Adding 2^n never touches the low digits, so the
    result commutes with the 2^n-th power of the odometer, verified here
    by composing both ways.
    """
    pi = np.asarray(pi, dtype=int)
    low = len(pi)
    if low & (low - 1) or low == 0:
        raise BadBlocks("pi must act on a power-of-two digit block")
    if sorted(pi.tolist()) != list(range(low)):
        raise BadBlocks("pi must be a permutation")
    k = 2**m
    if low > k:
        raise BadBlocks("digit block exceeds the odometer level")
    s = np.array([int(pi[v % low]) + (v - v % low) for v in range(k)], dtype=int)
    step = (np.arange(k) + low) % k
    if not np.array_equal(s[step], step[s]):
        raise ArithmeticError("commutation with the power failed")
    return s
