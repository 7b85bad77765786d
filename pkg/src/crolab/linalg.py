"""Dense Hermitian linear algebra helpers shared by the rest of the package.

Everything here is a pure function on numpy arrays.  Matrices are complex,
row-major, and composite indices follow the convention that subsystem 0 is the
slow (leftmost) Kronecker factor: a bipartite index is ``i0 * d1 + i1``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-9

LOG2 = np.log(2.0)


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor slowest."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def hermitianize(m: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (m + m†)/2."""
    m = np.asarray(m)
    return 0.5 * (m + m.conj().T)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: int | Sequence[int]) -> np.ndarray:
    """Trace out all subsystems except ``keep``.

    ``m`` is a square matrix on the tensor product of subsystems with local
    dimensions ``dims`` (subsystem 0 slowest).  ``keep`` is a subsystem index
    or a list of them; the result lives on the kept subsystems in their
    original order.  ``partial_trace(kron(a, b), [da, db], 0)`` equals
    ``tr(b) * a``.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    if isinstance(keep, (int, np.integer)):
        keep_set = {int(keep)}
    else:
        keep_set = {int(i) for i in keep}
    if not keep_set or not keep_set.issubset(range(len(dims))):
        raise ValueError(f"keep={keep!r} is not a valid subsystem subset for dims {dims}")

    t = m.reshape(dims + dims)
    for idx in sorted(set(range(len(dims))) - keep_set, reverse=True):
        half = t.ndim // 2
        t = np.trace(t, axis1=idx, axis2=idx + half)
    d_keep = int(np.prod([dims[i] for i in sorted(keep_set)]))
    return t.reshape(d_keep, d_keep)


def herm_eig(m: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and eigenvectors in
    the columns of ``v``, so that ``v @ diag(w) @ v†`` reconstructs ``m``.
    Raises if ``m`` is not Hermitian within ``tol``.
    """
    m = np.asarray(m)
    if not is_hermitian(m, tol):
        dev = float(np.max(np.abs(m - m.conj().T))) if m.ndim == 2 else float("nan")
        raise ValueError(f"matrix is not Hermitian within tol={tol:g} (deviation {dev:.3e})")
    w, v = np.linalg.eigh(hermitianize(m))
    return w, v


def psd_check(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True when ``m`` is Hermitian within ``tol`` and its spectrum is >= -tol."""
    if not is_hermitian(m, tol):
        return False
    w = np.linalg.eigvalsh(hermitianize(np.asarray(m)))
    return bool(w[0] >= -tol)


def assert_density_matrix(rho: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD within tol, unit trace)."""
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        raise ValueError(f"state is not Hermitian within tol={tol:g}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > max(tol, 1e3 * np.finfo(float).eps * rho.shape[0]):
        raise ValueError(f"state trace {tr:.12g} is not 1 within tol={tol:g}")
    w = np.linalg.eigvalsh(hermitianize(rho))
    if w[0] < -tol:
        raise ValueError(f"state has negative eigenvalue {w[0]:.3e} below -tol={-tol:g}")
    return rho


def von_neumann_entropy(rho: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """Von Neumann entropy of a density matrix, in bits.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero (and to 1 from above);
    anything below ``-tol`` is an error.  ``0 log 0`` counts as zero.
    """
    rho = assert_density_matrix(rho, tol)
    w = np.linalg.eigvalsh(hermitianize(rho))
    w = np.clip(w, 0.0, 1.0)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log(w)) / LOG2)


def dephase(m: np.ndarray, dims: Sequence[int], subsystems: Sequence[int]) -> np.ndarray:
    """Zero every entry whose row/column indices differ on ``subsystems``.

    This is the completely dephasing map applied to the listed subsystems of
    a composite matrix: ``dephase(m, [d], (0,))`` keeps only the diagonal,
    ``dephase(m, [d, d], (1,))`` dephases the fast factor only.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    mask = _dephase_mask(tuple(dims), tuple(sorted(int(s) for s in subsystems)))
    return m * mask


_MASK_CACHE: dict[tuple[tuple[int, ...], tuple[int, ...]], np.ndarray] = {}


def _dephase_mask(dims: tuple[int, ...], subsystems: tuple[int, ...]) -> np.ndarray:
    key = (dims, subsystems)
    cached = _MASK_CACHE.get(key)
    if cached is not None:
        return cached
    if not set(subsystems).issubset(range(len(dims))):
        raise ValueError(f"subsystems {subsystems} out of range for dims {dims}")
    total = int(np.prod(dims))
    idx = np.arange(total)
    digits = []
    rem = idx
    for d in reversed(dims):
        digits.append(rem % d)
        rem = rem // d
    digits = digits[::-1]  # digits[k] = index of subsystem k, slow first
    mask = np.ones((total, total), dtype=float)
    for s in subsystems:
        mask *= (digits[s][:, None] == digits[s][None, :]).astype(float)
    _MASK_CACHE[key] = mask
    return mask
