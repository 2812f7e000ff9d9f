"""Stock systems: rotations, odometers, shifts, interval exchanges, and
exact torus/group maps used by the conjugation experiments.

Conventions fixed here and relied on everywhere else:

* odometer cells are binary strings read least-significant-digit first,
  so adding one carries rightward: 000 -> 100 -> 010 -> 110 -> 001 -> ...
  Cell index is the integer value, and the map is +1 mod 2^m.
* shift-system cells are words read left to right as coordinates 0..L-1,
  indexed big-endian; the shift drops the first symbol and appends one new
  symbol at the end, giving the de Bruijn matrix Q[w, w'] = 1/d.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product

import numpy as np

from . import exact
from .errors import DimensionMismatch, NonInvertible, SizeGuard
from .partitions import FiniteSystem, make_uniform_partition, system_from_matrix, system_from_permutation

__all__ = [
    "SIZE_LIMIT",
    "IETSpec",
    "TorusPoint",
    "SkewSpec",
    "rotation_system",
    "odometer_system",
    "bernoulli_system",
    "iet_system",
    "word_index",
    "index_word",
    "torus_point",
    "skew_W_step",
    "skew_Tbar_conjugation",
    "skew_torus_restriction",
    "group_elements",
    "group_automorphism_check",
    "group_rotation_conjugation",
    "parse_system_spec",
]

SIZE_LIMIT = 4096


def rotation_system(k: int, s: int, backend: str = exact.RATIONAL) -> FiniteSystem:
    """Cyclic rotation on Z_k by s: cell a maps onto cell a + s mod k."""
    if k < 1:
        raise ValueError("k must be positive")
    perm = (np.arange(k) + s) % k
    return system_from_permutation(perm, backend=backend)


def odometer_system(m: int, backend: str = exact.RATIONAL) -> FiniteSystem:
    """Binary odometer truncated at level m: 2^m cells, one full cycle."""
    if m < 1:
        raise ValueError("m must be positive")
    k = 2**m
    if k > SIZE_LIMIT:
        raise SizeGuard(f"odometer level {m} needs {k} cells > {SIZE_LIMIT}")
    labels = tuple(format(v, f"0{m}b")[::-1] for v in range(k))
    perm = (np.arange(k) + 1) % k
    sys = system_from_permutation(perm, labels=labels, backend=backend)
    return sys


def word_index(word, d: int) -> int:
    """Big-endian index of a word over alphabet {0..d-1}."""
    idx = 0
    for symbol in word:
        idx = idx * d + int(symbol)
    return idx


def index_word(idx: int, d: int, length: int) -> tuple[int, ...]:
    word = []
    for _ in range(length):
        word.append(idx % d)
        idx //= d
    return tuple(reversed(word))


def bernoulli_system(d: int, L: int, backend: str = exact.RATIONAL) -> FiniteSystem:
    """Full shift on d symbols at cylinder resolution L (de Bruijn matrix).

    Cells are length-L words; Q[w, w'] = 1/d iff w' drops the first symbol
    of w and appends any new final symbol.
    """
    if d < 2 or L < 1:
        raise ValueError("need an alphabet of size >= 2 and L >= 1")
    k = d**L
    if k > SIZE_LIMIT:
        raise SizeGuard(f"d^L = {k} cells > {SIZE_LIMIT}")
    q = exact.zeros((k, k), backend)
    v = Fraction(1, d) if backend == exact.RATIONAL else 1.0 / d
    for w in range(k):
        base = (w % d ** (L - 1)) * d
        for c in range(d):
            q[w, base + c] = v
    labels = tuple("".join(map(str, index_word(w, d, L))) for w in range(k))
    part = make_uniform_partition(k, labels)
    return system_from_matrix(q, partition=part, exact_flag=False)


@dataclass(frozen=True, eq=False)
class IETSpec:
    """Interval exchange on n equal intervals: interval u moves to slot
    permutation[u] by translation."""

    n_intervals: int
    permutation: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.permutation) != list(range(self.n_intervals)):
            raise ValueError("permutation must be a bijection on the intervals")


def iet_system(spec: IETSpec, backend: str = exact.RATIONAL) -> FiniteSystem:
    return system_from_permutation(np.asarray(spec.permutation, dtype=int),
                                   backend=backend)


#
# Exact torus points and the affine skew machinery.
#

TorusPoint = tuple[Fraction, ...]


def torus_point(*coords) -> TorusPoint:
    return tuple(Fraction(c) % 1 for c in coords)


def skew_W_step(p: TorusPoint) -> TorusPoint:
    """One step of W(a, b, c) = (a, a+b, a+b+c) on the rational 3-torus."""
    a, b, c = p
    return torus_point(a, a + b, a + b + c)


def _tbar(alpha: Fraction, p: TorusPoint) -> TorusPoint:
    x, y, z = p
    return torus_point(x + alpha, x + y, x + y + z)


def _tbar_inv(alpha: Fraction, p: TorusPoint) -> TorusPoint:
    x, y, z = p
    return torus_point(x - alpha, y - x + alpha, z - y)


def _default_samples() -> list[TorusPoint]:
    grid = [Fraction(0), Fraction(1, 3), Fraction(2, 5), Fraction(5, 7)]
    return [torus_point(a, b, c) for a, b, c in iter_product(grid, grid, grid)]


def skew_Tbar_conjugation(t: TorusPoint, alpha, samples=None) -> TorusPoint:
    """Translation vector of Tbar o S_t o Tbar^{-1} where S_t adds t.

    Composes the three maps pointwise on rational sample points, checks the
    composite is one translation independent of the sample and of alpha's
    role, and returns that translation.  The result always equals
    skew_W_step(t) = (a, a+b, a+b+c).
    """
    alpha = Fraction(alpha)
    t = torus_point(*t)
    if samples is None:
        samples = _default_samples()
    vec = None
    for p in samples:
        q = _tbar_inv(alpha, p)
        q = torus_point(*(qi + ti for qi, ti in zip(q, t)))
        q = _tbar(alpha, q)
        delta = torus_point(*(qi - pi for qi, pi in zip(q, p)))
        if vec is None:
            vec = delta
        elif vec != delta:
            raise ArithmeticError("composite is not a single translation")
    return vec


def skew_torus_restriction(a, p2d: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    """W restricted to the invariant torus {first coordinate = a}: the
    affine map (b, c) -> (b + a, b + c + a)."""
    a = Fraction(a)
    b, c = (Fraction(x) for x in p2d)
    return (b + a) % 1, (b + c + a) % 1


#
# Rotations on finite abelian groups and their automorphism conjugations.
#

def group_elements(moduli: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [tuple(z) for z in iter_product(*(range(m) for m in moduli))]


def _apply_matrix(moduli, mat, z) -> tuple[int, ...]:
    r = len(moduli)
    return tuple(
        sum(int(mat[i][j]) * int(z[j]) for j in range(r)) % moduli[i]
        for i in range(r)
    )


def group_automorphism_check(moduli: tuple[int, ...], mat) -> None:
    """Raise NonInvertible unless z -> M z is an automorphism of the group."""
    r = len(moduli)
    mat = np.asarray(mat, dtype=int)
    if mat.shape != (r, r):
        raise DimensionMismatch("matrix shape must match the number of factors")
    size = 1
    for m in moduli:
        size *= m
    if size > SIZE_LIMIT:
        raise SizeGuard(f"group of order {size} > {SIZE_LIMIT}")
    # Well-definedness: column j is a homomorphism image of a generator of
    # order moduli[j], so M[i][j] * moduli[j] must vanish mod moduli[i].
    for i in range(r):
        for j in range(r):
            if (int(mat[i][j]) * moduli[j]) % moduli[i] != 0:
                raise NonInvertible(f"entry ({i},{j}) ignores the factor orders")
    images = {_apply_matrix(moduli, mat, z) for z in group_elements(moduli)}
    if len(images) != size:
        raise NonInvertible("matrix is not a bijection on the group")


def group_rotation_conjugation(moduli, mat, z) -> tuple[int, ...]:
    """Conjugate the rotation by z with the automorphism M: T R_z T^{-1}.

    Verifies pointwise over the whole group that the composite equals the
    rotation by M z, then returns M z.
    """
    moduli = tuple(int(m) for m in moduli)
    group_automorphism_check(moduli, mat)
    mat = np.asarray(mat, dtype=int)
    z = tuple(int(zi) % m for zi, m in zip(z, moduli))
    elements = group_elements(moduli)
    inverse = {_apply_matrix(moduli, mat, g): g for g in elements}
    mz = _apply_matrix(moduli, mat, z)
    for g in elements:
        pre = inverse[g]
        shifted = tuple((pi + zi) % m for pi, zi, m in zip(pre, z, moduli))
        composite = _apply_matrix(moduli, mat, shifted)
        expected = tuple((gi + wi) % m for gi, wi, m in zip(g, mz, moduli))
        if composite != expected:
            raise ArithmeticError("conjugation identity failed")
    return mz


@dataclass(frozen=True)
class SkewSpec:
    """Marker for the affine skew family; not a finite-partition system."""

    alpha: Fraction


def parse_system_spec(spec: str, backend: str = exact.RATIONAL):
    """Zoo grammar: rot:k=13,s=5 | odo:m=4 | bern:d=2,L=3 |
    iet:perm=2,0,1 | skew:alpha=1/7."""
    spec = spec.strip()
    if ":" not in spec:
        raise ValueError(f"malformed system spec {spec!r}")
    family, _, rest = spec.partition(":")
    family = family.strip()
    if family == "iet":
        key, _, value = rest.partition("=")
        if key.strip() != "perm":
            raise ValueError("iet spec takes perm=<comma-separated cells>")
        perm = tuple(int(x) for x in value.split(","))
        return iet_system(IETSpec(n_intervals=len(perm), permutation=perm),
                          backend=backend)
    params = {}
    for item in rest.split(","):
        key, _, value = item.partition("=")
        params[key.strip()] = value.strip()

    def take(*names):
        if set(params) != set(names):
            raise ValueError(
                f"{family} spec takes exactly {','.join(names)}; got {spec!r}")
        return [params[n] for n in names]

    if family == "rot":
        k, s = take("k", "s")
        return rotation_system(int(k), int(s), backend)
    if family == "odo":
        (m,) = take("m")
        return odometer_system(int(m), backend)
    if family == "bern":
        d, L = take("d", "L")
        return bernoulli_system(int(d), int(L), backend)
    if family == "skew":
        (alpha,) = take("alpha")
        return SkewSpec(alpha=Fraction(alpha))
    raise ValueError(f"unknown system family {family!r}")
