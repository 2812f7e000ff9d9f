"""Dual numeric backends: exact rational matrices and float64 matrices.

Rational matrices are numpy object arrays holding ``fractions.Fraction``;
float matrices are ordinary float64 arrays.  Helpers here dispatch on dtype
so callers never branch on the backend by hand.

Multiplication of rational matrices avoids per-entry Fraction arithmetic:
factor out one common denominator, multiply integer matrices (int64 when a
worst-case bound fits, arbitrary-precision Python ints otherwise), and
rebuild Fractions once at the end.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

import numpy as np

RATIONAL = "rational"
FLOAT = "float"

# Worst-case |entry| bound under which int64 accumulation cannot overflow.
_INT64_SAFE = 2**62


def is_rational_array(a: np.ndarray) -> bool:
    return a.dtype == object


def backend_of(a: np.ndarray) -> str:
    return RATIONAL if is_rational_array(a) else FLOAT


def frac_array(rows) -> np.ndarray:
    """Object array of Fractions from nested ints/Fractions/strings."""
    arr = np.array(
        [[Fraction(x) for x in row] for row in rows] if np.ndim(rows) == 2
        else [Fraction(x) for x in rows],
        dtype=object,
    )
    return arr


def zeros(shape, backend: str = RATIONAL) -> np.ndarray:
    if backend == RATIONAL:
        a = np.empty(shape, dtype=object)
        a[...] = Fraction(0)
        return a
    return np.zeros(shape)


def constant(shape, value, backend: str = RATIONAL) -> np.ndarray:
    if backend == RATIONAL:
        a = np.empty(shape, dtype=object)
        a[...] = Fraction(value)
        return a
    return np.full(shape, float(value))


def freeze(a: np.ndarray) -> np.ndarray:
    """Mark array read-only; value types in this package never mutate."""
    a.setflags(write=False)
    return a


def split_common(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Write a rational array as (integer numerators, common denominator)."""
    flat = a.ravel()
    den = 1
    for x in flat:
        den = den * x.denominator // math.gcd(den, x.denominator)
    num = np.empty(a.shape, dtype=object)
    nflat = num.ravel()
    for i, x in enumerate(flat):
        nflat[i] = x.numerator * (den // x.denominator)
    return num, den


def join_scaled(num: np.ndarray, den: int) -> np.ndarray:
    """Rebuild a Fraction array from integer numerators over one denominator."""
    flat = num.ravel()
    g = reduce(math.gcd, map(int, flat), den)
    if g > 1:
        den //= g
    out = np.empty(num.shape, dtype=object)
    oflat = out.ravel()
    if g > 1:
        for i, n in enumerate(flat):
            oflat[i] = Fraction(int(n) // g, den)
    else:
        for i, n in enumerate(flat):
            oflat[i] = Fraction(int(n), den)
    return out


def _int_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integer matmul with an int64 fast path guarded by a magnitude bound."""
    ma = max((abs(int(x)) for x in a.ravel()), default=0)
    mb = max((abs(int(x)) for x in b.ravel()), default=0)
    inner = a.shape[-1]
    if ma and mb and inner * ma * mb < _INT64_SAFE:
        return (a.astype(np.int64) @ b.astype(np.int64)).astype(object)
    return a @ b


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not is_rational_array(a):
        return a @ b
    na, da = split_common(a)
    nb, db = split_common(b)
    return join_scaled(_int_matmul(na, nb), da * db)


def mat_conjugate(q: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Return Q^T C Q with a single Fraction rebuild on the rational path."""
    if not is_rational_array(q):
        return q.T @ c @ q
    nq, dq = split_common(q)
    nc, dc = split_common(c)
    prod = _int_matmul(_int_matmul(nq.T, nc), nq)
    return join_scaled(prod, dq * dq * dc)


def mat_power(a: np.ndarray, n: int) -> np.ndarray:
    """Non-negative matrix power by binary exponentiation."""
    if n < 0:
        raise ValueError("mat_power expects n >= 0")
    k = a.shape[0]
    if is_rational_array(a):
        result = identity(k, RATIONAL)
    else:
        result = np.eye(k)
    base = a
    while n:
        if n & 1:
            result = mat_mul(result, base)
        n >>= 1
        if n:
            base = mat_mul(base, base)
    return result


def identity(k: int, backend: str = RATIONAL) -> np.ndarray:
    if backend == RATIONAL:
        a = zeros((k, k), RATIONAL)
        for i in range(k):
            a[i, i] = Fraction(1)
        return a
    return np.eye(k)


def l1_norm(a: np.ndarray):
    if is_rational_array(a):
        return sum(abs(x) for x in a.ravel())
    return float(np.abs(a).sum())


def l1_diff(a: np.ndarray, b: np.ndarray):
    return l1_norm(a - b)


def max_abs(a: np.ndarray):
    if is_rational_array(a):
        return max((abs(x) for x in a.ravel()), default=Fraction(0))
    return float(np.abs(a).max()) if a.size else 0.0


def mat_equal(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape != b.shape:
        return False
    if is_rational_array(a) or is_rational_array(b):
        return all(x == y for x, y in zip(a.ravel(), b.ravel()))
    return bool(np.array_equal(a, b))


def as_float(a: np.ndarray) -> np.ndarray:
    if is_rational_array(a):
        return a.astype(float)
    return np.asarray(a, dtype=float)


def as_rational(a: np.ndarray, max_denominator: int = 10**12) -> np.ndarray:
    """Float array to Fractions; exact inputs pass through unchanged."""
    if is_rational_array(a):
        return a
    out = np.empty(a.shape, dtype=object)
    oflat, flat = out.ravel(), a.ravel()
    for i, x in enumerate(flat):
        oflat[i] = Fraction(x).limit_denominator(max_denominator)
    return out


def matrix_of_permutation(perm, backend: str = RATIONAL) -> np.ndarray:
    """0/1 matrix M with M[perm[j], j] = 1 (column j sent to row perm[j])."""
    k = len(perm)
    m = zeros((k, k), backend)
    one = Fraction(1) if backend == RATIONAL else 1.0
    for j, i in enumerate(perm):
        m[int(i), j] = one
    return m


def permutation_of_matrix(q: np.ndarray):
    """Forward cell map tau with Q[a, tau(a)] = 1, or None if Q is not one."""
    k = q.shape[0]
    qf = as_float(q)
    perm = np.full(k, -1, dtype=int)
    for a in range(k):
        row = qf[a]
        ones = np.nonzero(row == 1.0)[0]
        if len(ones) != 1 or row.sum() != 1.0:
            return None
        perm[a] = ones[0]
    if len(set(perm.tolist())) != k:
        return None
    if is_rational_array(q):
        for a in range(k):
            for i in range(k):
                v = q[a, i]
                if v != (1 if perm[a] == i else 0):
                    return None
    return perm


def invert_permutation(perm: np.ndarray) -> np.ndarray:
    inv = np.empty(len(perm), dtype=int)
    inv[np.asarray(perm, dtype=int)] = np.arange(len(perm))
    return inv


def compose_permutations(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Composition p after q: j -> p[q[j]]."""
    return np.asarray(p, dtype=int)[np.asarray(q, dtype=int)]


def permutation_order(perm) -> int:
    perm = np.asarray(perm, dtype=int)
    seen = np.zeros(len(perm), dtype=bool)
    order = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        order = order * length // math.gcd(order, length)
    return order


def format_value(x) -> str | float | int:
    """JSON-friendly value: 'p/q' strings for rationals, numbers otherwise."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def parse_value(s):
    """Inverse of format_value: accepts 'p/q' strings and plain numbers."""
    if isinstance(s, str):
        return Fraction(s)
    if isinstance(s, (int, np.integer)):
        return Fraction(int(s))
    return float(s)


def gcd_reduce_row(row: np.ndarray) -> np.ndarray:
    g = reduce(math.gcd, map(int, row), 0)
    if g > 1:
        return row // g
    return row


def exact_nullspace(a: np.ndarray) -> list[np.ndarray]:
    """Basis of {x : A x = 0} over the rationals, by integer Gauss-Jordan.

    a: object array of Fractions or ints, shape (m, n).  Returns a list of
    Fraction vectors of length n.  Row operations stay in integers; each row
    is divided by its gcd to keep magnitudes tame.
    """
    if a.size == 0:
        return []
    if a.dtype != object:
        a = as_rational(a)
    work = a.copy()
    if any(isinstance(x, Fraction) for x in work.ravel()):
        work, _ = split_common(work)
    m, n = work.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        candidates = [i for i in range(r, m) if work[i, c] != 0]
        if not candidates:
            continue
        i0 = min(candidates, key=lambda i: abs(int(work[i, c])))
        if i0 != r:
            work[[r, i0]] = work[[i0, r]]
        p = int(work[r, c])
        for i in range(m):
            if i != r and work[i, c] != 0:
                work[i] = work[i] * p - work[r] * int(work[i, c])
                work[i] = gcd_reduce_row(work[i])
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = np.empty(n, dtype=object)
        v[...] = Fraction(0)
        v[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            if work[ri, fc] != 0:
                v[pc] = Fraction(-int(work[ri, fc]), int(work[ri, pc]))
        basis.append(v)
    return basis
