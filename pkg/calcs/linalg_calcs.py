# calcs/linalg_calcs.py

from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Type

import galois
import numpy as np

FieldArray = galois.FieldArray


@lru_cache(maxsize=None)
def field(p: int) -> Type[galois.FieldArray]:
    """
    Returns the prime field GF(p) as a galois FieldArray class.

    Parameters:
    - p: Prime characteristic.

    Returns:
    - FieldArray subclass for GF(p).
    """
    if not galois.is_prime(p):
        raise ValueError(f"Field characteristic must be prime, got {p}.")
    return galois.GF(p)


def characteristic(m: FieldArray) -> int:
    return type(m).characteristic


def matrix(p: int, entries, shape: Optional[Tuple[int, int]] = None) -> FieldArray:
    """
    Builds a matrix over GF(p) from integer entries, reducing them modulo p.

    Parameters:
    - p: Prime characteristic.
    - entries: Nested sequence (or array) of integers.
    - shape: Required when entries is empty, to fix the column count.

    Returns:
    - FieldArray of shape (rows, cols).
    """
    arr = np.asarray(entries, dtype=np.int64)
    if shape is not None:
        arr = arr.reshape(shape)
    if arr.ndim != 2:
        raise ValueError(f"Matrix entries must be two-dimensional, got shape {arr.shape}.")
    return field(p)(arr % p)


def vector(p: int, entries) -> FieldArray:
    arr = np.asarray(entries, dtype=np.int64).reshape(-1)
    return field(p)(arr % p)


def zeros(p: int, rows: int, cols: int) -> FieldArray:
    return field(p).Zeros((rows, cols))


def identity(p: int, n: int) -> FieldArray:
    if n == 0:
        return zeros(p, 0, 0)
    return field(p).Identity(n)


def as_int(m: FieldArray) -> np.ndarray:
    """
    Plain int64 view of a field array, for vectorized bulk arithmetic.
    """
    return np.asarray(m.view(np.ndarray), dtype=np.int64)


def matmul(a: FieldArray, b: FieldArray) -> FieldArray:
    """
    Matrix product that also accepts empty shapes.
    """
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"Cannot multiply shapes {a.shape} and {b.shape}.")
    p = characteristic(a)
    if 0 in a.shape or 0 in b.shape:
        return zeros(p, a.shape[0], b.shape[1])
    return a @ b


def hstack(p: int, blocks: Sequence[FieldArray], rows: int) -> FieldArray:
    parts = [as_int(b) for b in blocks if b.shape[1] > 0]
    if not parts:
        return zeros(p, rows, 0)
    return field(p)(np.hstack(parts))


def vstack(p: int, blocks: Sequence[FieldArray], cols: int) -> FieldArray:
    parts = [as_int(b) for b in blocks if b.shape[0] > 0]
    if not parts:
        return zeros(p, 0, cols)
    return field(p)(np.vstack(parts))


def block_diagonal(p: int, blocks: Sequence[FieldArray]) -> FieldArray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.int64)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = as_int(b)
        r += b.shape[0]
        c += b.shape[1]
    return field(p)(out)


def rref(m: FieldArray) -> Tuple[FieldArray, List[int]]:
    """
    Reduced row echelon form and its pivot columns.

    Parameters:
    - m: Matrix over GF(p).

    Returns:
    - Tuple containing:
        - The reduced row echelon form (same shape as m).
        - Pivot column indices, one per nonzero row, increasing.
    """
    if 0 in m.shape:
        return m.copy(), []
    reduced = m.row_reduce()
    dense = as_int(reduced)
    pivots = [int(np.argmax(row != 0)) for row in dense if np.any(row)]
    return reduced, pivots


def rank(m: FieldArray) -> int:
    return len(rref(m)[1])


def _kernel_from_rref(reduced: FieldArray, pivots: List[int], cols: int, p: int) -> List[FieldArray]:
    dense = as_int(reduced) if 0 not in reduced.shape else np.zeros(reduced.shape, dtype=np.int64)
    pivot_set = set(pivots)
    basis = []
    for free in range(cols):
        if free in pivot_set:
            continue
        v = np.zeros(cols, dtype=np.int64)
        v[free] = 1
        for row, pc in enumerate(pivots):
            v[pc] = (-dense[row, free]) % p
        basis.append(field(p)(v))
    return basis


def kernel_basis(m: FieldArray) -> List[FieldArray]:
    """
    Basis of the right kernel {v : m v = 0}.

    Parameters:
    - m: Matrix over GF(p).

    Returns:
    - List of cols - rank(m) linearly independent vectors, one per free column
      of the reduced row echelon form, in column order.
    """
    p = characteristic(m)
    reduced, pivots = rref(m)
    return _kernel_from_rref(reduced, pivots, m.shape[1], p)


def kernel_matrix(m: FieldArray) -> FieldArray:
    """
    Kernel basis as the columns of a (cols x nullity) matrix.
    """
    p = characteristic(m)
    basis = kernel_basis(m)
    if not basis:
        return zeros(p, m.shape[1], 0)
    return field(p)(np.stack([as_int(v) for v in basis], axis=1))


def solve(m: FieldArray, b: FieldArray) -> Optional[Tuple[FieldArray, List[FieldArray]]]:
    """
    Solves m x = b over GF(p).

    Parameters:
    - m: Matrix of shape (rows, cols).
    - b: Vector of length rows.

    Returns:
    - None when the system has no solution, otherwise a tuple containing:
        - A particular solution x (free variables set to zero).
        - A basis of the kernel of m; every solution is x plus a combination of it.
    """
    p = characteristic(m)
    rows, cols = m.shape
    if b.shape[0] != rows:
        raise ValueError(f"Right-hand side has length {b.shape[0]}, expected {rows}.")
    kernel = kernel_basis(m)
    if rows == 0:
        return field(p).Zeros(cols), kernel
    augmented = hstack(p, [m, b.reshape(rows, 1)], rows)
    reduced, pivots = rref(augmented)
    if pivots and pivots[-1] == cols:
        return None
    dense = as_int(reduced)
    x = np.zeros(cols, dtype=np.int64)
    for row, pc in enumerate(pivots):
        x[pc] = dense[row, cols]
    return field(p)(x), kernel


def column_space_basis(m: FieldArray) -> FieldArray:
    """
    The pivot columns of m, which form a basis of its column space.
    """
    _, pivots = rref(m)
    return m[:, pivots] if pivots else zeros(characteristic(m), m.shape[0], 0)


def extend_to_basis(basis: FieldArray, n: int) -> FieldArray:
    """
    Standard vectors completing the independent columns of basis to a basis of GF(p)^n.

    Parameters:
    - basis: Matrix (n x k) with linearly independent columns.
    - n: Ambient dimension.

    Returns:
    - Matrix (n x (n-k)) of chosen standard basis columns, in increasing index order.
    """
    p = characteristic(basis)
    k = basis.shape[1]
    if n == 0:
        return zeros(p, 0, 0)
    _, pivots = rref(hstack(p, [basis, identity(p, n)], n))
    chosen = [pc - k for pc in pivots if pc >= k]
    if len(pivots) - len(chosen) != k:
        raise ValueError("Columns passed to extend_to_basis are not linearly independent.")
    return identity(p, n)[:, chosen] if chosen else zeros(p, n, 0)


def express_in_basis(basis: FieldArray, values: FieldArray) -> FieldArray:
    """
    Coordinates X with basis @ X = values.

    Parameters:
    - basis: Matrix (n x k) with linearly independent columns.
    - values: Matrix (n x t) whose columns lie in the span of basis.

    Returns:
    - Matrix (k x t).
    """
    p = characteristic(basis)
    n, k = basis.shape
    t = values.shape[1]
    if k == 0 or t == 0:
        if t and np.any(as_int(values)):
            raise ValueError("Values do not lie in the span of the basis.")
        return zeros(p, k, t)
    reduced, pivots = rref(hstack(p, [basis, values], n))
    if pivots[:k] != list(range(k)) or len(pivots) != k:
        raise ValueError("Values do not lie in the span of the basis.")
    return reduced[:k, k:]


def in_span(basis: FieldArray, values: FieldArray) -> bool:
    """
    True iff every column of values lies in the column space of basis.
    """
    if values.shape[1] == 0:
        return True
    p = characteristic(values)
    both = hstack(p, [basis, values], values.shape[0])
    return rank(both) == rank(basis)


def is_invertible(m: FieldArray) -> bool:
    return m.shape[0] == m.shape[1] and rank(m) == m.shape[0]


def random_matrix(p: int, rows: int, cols: int, rng: np.random.Generator) -> FieldArray:
    return field(p)(rng.integers(0, p, size=(rows, cols), dtype=np.int64))


def random_invertible(p: int, n: int, rng: np.random.Generator) -> FieldArray:
    """
    Uniformly random invertible n x n matrix by rejection sampling.
    """
    while True:
        m = random_matrix(p, n, n, rng)
        if is_invertible(m):
            return m
