"""Complex matrices, permanents and the random-matrix ensembles.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; the helpers in this
module validate them at the boundaries instead of wrapping them in a class.

Ensembles:

* :func:`haar_unitary` -- Haar measure on U(m) (Ginibre + QR with phase fix).
* :func:`sample_gaussian_matrix` -- i.i.d. entries whose real and imaginary parts
  are N(0, sigma^2).
* :func:`sample_row_repeated_gaussian` -- the same, but row ``j`` of a smaller
  Gaussian matrix is repeated ``s_j`` times.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from itertools import permutations

import numba
import numpy as np

from .errors import DimensionError, ParameterError, SizeGuardError
from .rng import RngStream

NAIVE_MAX_N = 10
RYSER_MAX_N = 30
UNITARY_TOL = 1e-10


def as_complex_matrix(M, *, square: bool = False) -> np.ndarray:
    """Validate ``M`` as a finite 2-D complex matrix and return it as complex128."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError("matrix contains NaN or Inf entries")
    return A


def unitarity_defect(U) -> float:
    """max-norm of ``U^dagger U - I``."""
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[1]))))


def check_unitary(U, tol: float = UNITARY_TOL) -> np.ndarray:
    U = as_complex_matrix(U, square=True)
    defect = unitarity_defect(U)
    if defect > tol:
        raise ParameterError(f"matrix is not unitary: max|U^H U - I| = {defect:.3e} > {tol:g}")
    return U


# ---------------------------------------------------------------------------
# permanents


@lru_cache(maxsize=None)
def _permutation_table(n: int) -> np.ndarray:
    """All permutations of ``range(n)``, stored column-major: row ``i`` holds ``sigma(i)``."""
    table = np.array(list(permutations(range(n))), dtype=np.intp).reshape(-1, n)
    return np.ascontiguousarray(table.T)


def permanent_naive(M) -> complex:
    """Permanent by summing over all ``n!`` permutations.

    Slow on purpose: this is the reference the fast routine is checked against.
    Limited to ``n <= 10``.
    """
    A = as_complex_matrix(M, square=True)
    n = A.shape[0]
    if n > NAIVE_MAX_N:
        raise SizeGuardError(f"permanent_naive is limited to n <= {NAIVE_MAX_N}, got n = {n}")
    if n == 0:
        return 1 + 0j
    perms = _permutation_table(n)
    total = 0j
    chunk = 200_000
    for start in range(0, perms.shape[1], chunk):
        block = perms[:, start:start + chunk]
        acc = A[0].take(block[0])
        for i in range(1, n):
            acc *= A[i].take(block[i])
        total += acc.sum()
    return complex(total)


@numba.njit(cache=True, nogil=True)
def _ryser_gray(a):
    n = a.shape[0]
    rowsum = np.zeros(n, dtype=np.complex128)
    total = 0j
    gray = 0
    size = 0
    for k in range(1, 1 << n):
        j = 0
        while not (k >> j) & 1:
            j += 1
        if (gray >> j) & 1:
            for i in range(n):
                rowsum[i] -= a[i, j]
            size -= 1
        else:
            for i in range(n):
                rowsum[i] += a[i, j]
            size += 1
        gray ^= 1 << j
        prod = 1.0 + 0j
        for i in range(n):
            prod *= rowsum[i]
        if size & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        return -total
    return total


@numba.njit(cache=True, nogil=True)
def _ryser_stack(stack, out):
    for b in range(stack.shape[0]):
        out[b] = _ryser_gray(stack[b])


@numba.njit(cache=True, nogil=True)
def _ryser_row_selections(cols, rows, out):
    # permanent of cols[rows[b], :] for every b, without materialising the stack
    n = rows.shape[1]
    sub = np.empty((n, n), dtype=np.complex128)
    for b in range(rows.shape[0]):
        for i in range(n):
            r = rows[b, i]
            for j in range(n):
                sub[i, j] = cols[r, j]
        out[b] = _ryser_gray(sub)


def permanent_ryser(M) -> complex:
    """Permanent via Ryser's inclusion-exclusion formula in Gray-code order.

    Cost is ``O(2^n n)``. Limited to ``n <= 30``.
    """
    A = as_complex_matrix(M, square=True)
    n = A.shape[0]
    if n > RYSER_MAX_N:
        raise SizeGuardError(f"permanent_ryser is limited to n <= {RYSER_MAX_N}, got n = {n}")
    return complex(_ryser_gray(np.ascontiguousarray(A)))


def permanents(stack) -> np.ndarray:
    """Permanents of a stack of square matrices with shape ``(B, n, n)``."""
    S = np.ascontiguousarray(stack, dtype=np.complex128)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise DimensionError(f"expected a (B, n, n) stack, got shape {S.shape}")
    if S.shape[1] > RYSER_MAX_N:
        raise SizeGuardError(f"permanents are limited to n <= {RYSER_MAX_N}")
    out = np.empty(S.shape[0], dtype=np.complex128)
    _ryser_stack(S, out)
    return out


def permanents_of_row_selections(cols, rows) -> np.ndarray:
    """``Perm(cols[rows[b], :])`` for each row-index vector ``rows[b]``.

    ``cols`` is ``(m, n)`` and ``rows`` is an integer array ``(B, n)``; repeated
    indices inside one row vector are allowed.
    """
    C = np.ascontiguousarray(cols, dtype=np.complex128)
    R = np.ascontiguousarray(rows, dtype=np.int64)
    if R.ndim != 2 or C.ndim != 2 or R.shape[1] != C.shape[1]:
        raise DimensionError(f"incompatible shapes cols={C.shape} rows={R.shape}")
    if R.shape[1] > RYSER_MAX_N:
        raise SizeGuardError(f"permanents are limited to n <= {RYSER_MAX_N}")
    if R.size and (R.min() < 0 or R.max() >= C.shape[0]):
        raise DimensionError("row index out of range")
    out = np.empty(R.shape[0], dtype=np.complex128)
    _ryser_row_selections(C, R, out)
    return out


# ---------------------------------------------------------------------------
# random ensembles


def haar_unitary(m: int, rng: RngStream) -> np.ndarray:
    """Draw ``U`` from the Haar measure on U(m).

    QR-decomposes a complex Ginibre matrix and multiplies each column of ``Q``
    by the phase of the matching diagonal entry of ``R``; without that fix the
    result is not Haar distributed.
    """
    if m < 1:
        raise DimensionError(f"unitary dimension must be >= 1, got {m}")
    z = (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def _check_sigma(sigma: float) -> None:
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ParameterError(f"sigma must be a positive finite number, got {sigma}")


def sample_gaussian_matrix(n: int, sigma: float, rng: RngStream, size: int | None = None) -> np.ndarray:
    """``n x n`` matrix whose real and imaginary parts are i.i.d. N(0, sigma^2).

    With ``size`` given, returns a stack of shape ``(size, n, n)``.
    """
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    _check_sigma(sigma)
    shape = (n, n) if size is None else (size, n, n)
    return sigma * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


def sample_row_repeated_gaussian(S, sigma: float, rng: RngStream, size: int | None = None) -> np.ndarray:
    """Gaussian matrix with row structure given by the occupation list ``S``.

    A ``|S~| x n`` Gaussian matrix is drawn (``S~`` is ``S`` with zeros removed)
    and row ``j`` is copied ``S~_j`` times, giving an ``n x n`` matrix.
    """
    occ = np.asarray(S, dtype=np.int64)
    if occ.ndim != 1 or np.any(occ < 0):
        raise DimensionError("occupation list must be a 1-D array of non-negative integers")
    n = int(occ.sum())
    if n == 0:
        raise DimensionError("occupation list has total zero; nothing to sample")
    _check_sigma(sigma)
    reps = occ[occ > 0]
    k = len(reps)
    shape = (k, n) if size is None else (size, k, n)
    base = sigma * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    return np.repeat(base, reps, axis=-2)


# ---------------------------------------------------------------------------
# JSON matrix files


def matrix_to_json(M) -> dict:
    A = as_complex_matrix(M)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = np.asarray(obj["entries"], dtype=float)
    if entries.shape != (rows * cols, 2):
        raise DimensionError(
            f"expected {rows * cols} [re, im] pairs for a {rows}x{cols} matrix, got array of shape {entries.shape}"
        )
    return as_complex_matrix((entries[:, 0] + 1j * entries[:, 1]).reshape(rows, cols))


def haar_isometry_columns(m: int, n: int, rng: RngStream, size: int | None = None) -> np.ndarray:
    """First ``n`` columns of a Haar-random ``m x m`` unitary.

    Equal in distribution to ``haar_unitary(m, rng)[:, :n]`` but costs a reduced
    ``m x n`` QR instead of a full one.  With ``size`` given a stack
    ``(size, m, n)`` is returned.
    """
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m, got n={n}, m={m}")
    shape = (m, n) if size is None else (size, m, n)
    z = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]
