"""Dense complex linear algebra and quantum-state primitives.

Conventions used across the package:
  * all angular frequencies are stored in rad/s (the CLI converts from Hz
    at the boundary),
  * the qubit state |0> is the +1 eigenstate of sigma_z,
  * composite spaces are ordered qubit1 (x) qubit2 (x) oscillator with the
    Fock basis ascending.
"""
from __future__ import annotations

import string

import numpy as np
import scipy.linalg

_PAULI = {
    "0": np.eye(2, dtype=complex),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for axis in {"x", "y", "z", "0"}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def is_hermitian(a, tol: float = 1e-12) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def is_unitary(a, tol: float = 1e-12) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))) <= tol)


def is_density(rho, tol_trace: float = 1e-10, tol_eig: float = 1e-9) -> bool:
    """Hermitian, unit trace, positive semidefinite within tolerance."""
    rho = np.asarray(rho)
    if not is_hermitian(rho, 1e-10):
        return False
    if abs(np.trace(rho).real - 1.0) >= tol_trace:
        return False
    return bool(np.linalg.eigvalsh(rho).min() > -tol_eig)


def expm(a) -> np.ndarray:
    """Matrix exponential.

    Anti-Hermitian inputs take an eigendecomposition path, which keeps the
    result unitary to near machine precision; everything else falls back to
    scaling-and-squaring.
    """
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite entries in expm input")
    scale = max(1.0, float(np.max(np.abs(a))))
    h = 1j * a
    if np.max(np.abs(h - h.conj().T)) < 1e-12 * scale:
        # a = -i h with h Hermitian
        w, q = np.linalg.eigh(h)
        return (q * np.exp(-1j * w)) @ q.conj().T
    return scipy.linalg.expm(a)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(a, factor_dims, keep) -> np.ndarray:
    """Reduced operator over the kept factors of a composite space.

    factor_dims is the ordered list of factor dimensions whose product must
    equal the operator dimension; keep is an iterable of factor indices.
    Trace is preserved.
    """
    a = np.asarray(a)
    dims = [int(d) for d in factor_dims]
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError("keep indices out of range")
    d_total = int(np.prod(dims))
    if a.shape != (d_total, d_total):
        raise ValueError(
            f"operator shape {a.shape} inconsistent with factor dims {dims}")
    letters = string.ascii_lowercase
    if 2 * n > len(letters):
        raise ValueError("too many factors")
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for t in range(n):
        if t not in keep:
            col[t] = row[t]
    src = "".join(row) + "".join(col)
    dst = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    reduced = np.einsum(f"{src}->{dst}", a.reshape(dims + dims))
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reduced.reshape(d_keep, d_keep)


def thermal_oscillator_state(nbar: float, n_fock: int):
    """Truncated thermal oscillator state.

    p_n = nbar^n / (1+nbar)^(n+1), renormalized after truncation. Returns
    (rho, tail_mass) where tail_mass is the probability discarded by the
    truncation.
    """
    if nbar < 0:
        raise ValueError("nbar must be nonnegative")
    if n_fock < 2:
        raise ValueError("n_fock must be at least 2")
    n = np.arange(n_fock)
    p = nbar ** n / (1.0 + nbar) ** (n + 1)
    tail = float(1.0 - p.sum())
    rho = np.diag(p / p.sum()).astype(complex)
    return rho, tail


def destroy(n_fock: int) -> np.ndarray:
    """Fock-space lowering operator b (ascending basis)."""
    if n_fock < 2:
        raise ValueError("n_fock must be at least 2")
    return np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), 1).astype(complex)
