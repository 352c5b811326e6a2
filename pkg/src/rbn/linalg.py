"""Dense complex-matrix kernel: tensor products, partial traces and entropies.

All entropies are in nats.
"""
from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import (InvalidDimsError, InvalidOperatorError,
                     NotPositiveSemidefiniteError, InvalidArgumentError)

#: Absolute entrywise tolerance for matrix comparisons.
MATRIX_ATOL = 1e-10
#: Eigenvalues in ``[-EIG_CLAMP, 0)`` are treated as zero.
EIG_CLAMP = 1e-10


def _check_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidOperatorError(f"expected a nonempty square matrix, got shape {m.shape}")
    return m


def is_hermitian(m: np.ndarray, atol: float = MATRIX_ATOL) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=atol))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; ``a`` carries the slow index."""
    return np.kron(_check_square(a), _check_square(b))


def kron_all(*ops: np.ndarray) -> np.ndarray:
    out = _check_square(ops[0])
    for op in ops[1:]:
        out = np.kron(out, _check_square(op))
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduce ``m`` onto the sites listed in ``keep``.

    Parameters
    ----------
    m : ndarray
        Operator on the tensor product space described by ``dims``.
    dims : sequence of int
        Subsystem dimensions, first entry is the slowest index.
    keep : sequence of int
        Sites to keep. Output site order follows ascending site index.

    Returns
    -------
    ndarray
        The reduced operator of dimension ``prod(dims[keep])``.
    """
    m = _check_square(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise InvalidDimsError(f"dims {dims} do not factor a matrix of size {m.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep or len(keep) >= n or keep[0] < 0 or keep[-1] >= n:
        raise InvalidDimsError(f"keep={keep} must be a nonempty proper subset of range({n})")

    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    reduced = np.einsum(t, row + col, out)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(d_keep, d_keep)


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in descending order.

    The spectral decomposition is reconstructed and checked; a residual above
    ``1e-8`` (max entry) raises :class:`InvalidOperatorError`.
    """
    m = _check_square(m)
    if not is_hermitian(m):
        raise InvalidOperatorError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(m)
    residual = np.max(np.abs((v * w) @ v.conj().T - m))
    if residual > 1e-8:
        raise InvalidOperatorError(f"eigendecomposition residual {residual:.3g} too large")
    return w[::-1].copy()


def spectrum_entropy(lam: np.ndarray, axis=-1) -> np.ndarray:
    """``-sum(lam * ln lam)`` along ``axis`` with ``0 ln 0 = 0``.

    ``lam`` need not be normalized, which lets callers sum block spectra of
    block-diagonal states directly. Entries below ``-EIG_CLAMP`` raise.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.size and lam.min() < -EIG_CLAMP:
        raise NotPositiveSemidefiniteError(f"eigenvalue {lam.min():.3g} < -{EIG_CLAMP:g}")
    lam = np.clip(lam, 0.0, 1.0)
    safe = np.where(lam > 0.0, lam, 1.0)
    return -np.sum(lam * np.log(safe), axis=axis)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy ``-Tr rho ln rho`` in nats."""
    rho = _check_square(rho)
    if not is_hermitian(rho):
        raise InvalidOperatorError("density matrix is not Hermitian within tolerance")
    return float(spectrum_entropy(np.linalg.eigvalsh(rho)))


def shannon_entropy(p: Sequence[float]) -> float:
    """Shannon entropy of a probability vector, in nats."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidArgumentError("probability vector must be one-dimensional and nonempty")
    if p.min() < 0 or abs(p.sum() - 1.0) > 1e-12:
        raise InvalidArgumentError(f"not a probability vector: {p}")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))
