"""Unitary propagation: direct adaptive, monodromy, stroboscopic.

Three routes with overlapping domains so they can cross-check each other:

  propagate_direct  adaptive Runge-Kutta on dU/dt = -i H(t) U, any H
  monodromy         fixed-step Magnus over one period, periodic H only
  stroboscopic      partial-period products + monodromy powers, cheap at
                    times commensurate with the drive period

The fixed-step kernel is a two-point Gauss-Legendre Magnus rule: over a
step h with node values H1, H2,

  Heff = (h/2)(H1 + H2) + i (sqrt(3) h^2 / 12) [H1, H2]

and U_step = exp(-i Heff); local error O(h^5). For Bloch-vector (su(2))
fields the same rule acts on rotation vectors with the commutator replaced
by a cross product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import core
from .control import TimeDependentHamiltonian

_GL_LO = 0.5 - math.sqrt(3.0) / 6.0
_GL_HI = 0.5 + math.sqrt(3.0) / 6.0


@dataclass
class Propagator:
    at: Callable[[float], np.ndarray]
    method: str


def su2_from_rotvec(u: np.ndarray) -> np.ndarray:
    """exp(-i u . sigma / 2) for rotation vectors u of shape (..., 3)."""
    u = np.asarray(u, dtype=float)
    th = np.linalg.norm(u, axis=-1)
    half = 0.5 * th
    c = np.cos(half)
    # sin(th/2)/th, finite at th = 0
    snc = 0.5 * np.sinc(half / np.pi)
    ax = u[..., 0] * snc
    ay = u[..., 1] * snc
    az = u[..., 2] * snc
    out = np.empty(u.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = c - 1j * az
    out[..., 0, 1] = -1j * ax - ay
    out[..., 1, 0] = -1j * ax + ay
    out[..., 1, 1] = c + 1j * az
    return out


def rotation_from_su2(u: np.ndarray) -> np.ndarray:
    """SO(3) matrix R with U (v.sigma) U^dag = (R v).sigma, batched.

    Any global phase on u is stripped first, so u may be U(2).
    """
    u = np.asarray(u)
    det = (u[..., 0, 0] * u[..., 1, 1] - u[..., 0, 1] * u[..., 1, 0])
    u = u * np.exp(-0.5j * np.angle(det))[..., None, None]
    q0 = 0.5 * (u[..., 0, 0] + u[..., 1, 1]).real
    q1 = -0.5 * (u[..., 0, 1] + u[..., 1, 0]).imag
    q2 = 0.5 * (u[..., 1, 0] - u[..., 0, 1]).real
    q3 = 0.5 * (u[..., 1, 1] - u[..., 0, 0]).imag
    r = np.empty(u.shape[:-2] + (3, 3), dtype=float)
    r[..., 0, 0] = 1.0 - 2.0 * (q2 * q2 + q3 * q3)
    r[..., 0, 1] = 2.0 * (q1 * q2 - q0 * q3)
    r[..., 0, 2] = 2.0 * (q1 * q3 + q0 * q2)
    r[..., 1, 0] = 2.0 * (q1 * q2 + q0 * q3)
    r[..., 1, 1] = 1.0 - 2.0 * (q1 * q1 + q3 * q3)
    r[..., 1, 2] = 2.0 * (q2 * q3 - q0 * q1)
    r[..., 2, 0] = 2.0 * (q1 * q3 - q0 * q2)
    r[..., 2, 1] = 2.0 * (q2 * q3 + q0 * q1)
    r[..., 2, 2] = 1.0 - 2.0 * (q1 * q1 + q2 * q2)
    return r


def _reduce_chronological(us: np.ndarray) -> np.ndarray:
    """Time-ordered product U_{n-1} ... U_1 U_0 by pairwise tree reduction."""
    while us.shape[-3] > 1:
        n = us.shape[-3]
        if n % 2:
            head = np.matmul(us[..., 1:-1:2, :, :], us[..., 0:-1:2, :, :])
            us = np.concatenate([head, us[..., -1:, :, :]], axis=-3)
        else:
            us = np.matmul(us[..., 1::2, :, :], us[..., 0::2, :, :])
    return us[..., 0, :, :]


def propagate_bloch(bloch_fn, t0: float, t1: float, n_steps: int):
    """Batched SU(2) propagator over [t0, t1] from a Bloch-vector field.

    bloch_fn(t) takes a time array of shape (k,) and returns components of
    H = (1/2) v . sigma with shape (..., k, 3); leading axes are batch.
    Returns U(t1 <- t0) with shape (..., 2, 2).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    h = (t1 - t0) / n_steps
    k = np.arange(n_steps)
    v1 = np.asarray(bloch_fn(t0 + (k + _GL_LO) * h), dtype=float)
    v2 = np.asarray(bloch_fn(t0 + (k + _GL_HI) * h), dtype=float)
    u = 0.5 * h * (v1 + v2) - (math.sqrt(3.0) * h * h / 12.0) * np.cross(v1, v2)
    return _reduce_chronological(su2_from_rotvec(u))


def polar_project(a: np.ndarray) -> np.ndarray:
    """Nearest unitary in Frobenius norm, via SVD."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def _magnus_step(ham_eval, t0: float, h: float) -> np.ndarray:
    h1 = ham_eval(t0 + _GL_LO * h)
    h2 = ham_eval(t0 + _GL_HI * h)
    heff = 0.5 * h * (h1 + h2) \
        + 1j * (math.sqrt(3.0) * h * h / 12.0) * (h1 @ h2 - h2 @ h1)
    w, q = np.linalg.eigh(heff)
    return (q * np.exp(-1j * w)) @ q.conj().T


def propagate_direct(ham: TimeDependentHamiltonian, t_max: float,
                     tol: float = 1e-10) -> Propagator:
    """Adaptive integration of dU/dt = -i H(t) U on [0, t_max].

    Unitarity is monitored at evaluation: if ||U^dag U - I|| exceeds
    10 * tol the result is reprojected onto the unitary group.
    Time-independent Hamiltonians take an exact eigendecomposition path.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    dim = ham.eval(0.0).shape[0]
    eye = np.eye(dim, dtype=complex)

    if ham.period == 0.0:
        h0 = ham.eval(0.0)
        scale = max(np.abs(h0).max(), 1e-300)
        probes = (0.382 * t_max, t_max)
        if all(np.abs(ham.eval(tp) - h0).max() <= 1e-12 * scale
               for tp in probes):
            w, q = np.linalg.eigh(h0)
            qh = q.conj().T

            def at_const(t: float) -> np.ndarray:
                if t < -1e-15 or t > t_max * (1.0 + 1e-12):
                    raise ValueError("time outside propagation window")
                return (q * np.exp(-1j * w * t)) @ qh

            return Propagator(at=at_const, method="constant")

    from scipy.integrate import solve_ivp

    def rhs(t, y):
        u = y.reshape(dim, dim)
        return (-1j * (ham.eval(t) @ u)).ravel()

    sol = solve_ivp(rhs, (0.0, t_max), eye.ravel().astype(complex),
                    method="DOP853", rtol=tol, atol=tol, dense_output=True)
    if not sol.success:
        raise RuntimeError(f"direct propagation failed: {sol.message}")

    def at(t: float) -> np.ndarray:
        if t < -1e-15 or t > t_max * (1.0 + 1e-12):
            raise ValueError("time outside propagation window")
        if t <= 0.0:
            return eye.copy()
        u = sol.sol(min(t, t_max)).reshape(dim, dim)
        defect = np.abs(u.conj().T @ u - eye).max()
        if defect > 10.0 * tol:
            u = polar_project(u)
        return u

    return Propagator(at=at, method="direct")


def monodromy(ham: TimeDependentHamiltonian, substeps: int = 1024) -> np.ndarray:
    """Single-period propagator U(T <- 0) by fixed-step Magnus integration."""
    if not ham.period > 0:
        raise ValueError("monodromy requires a periodic Hamiltonian")
    if substeps < 1:
        raise ValueError("substeps must be at least 1")
    h = ham.period / substeps
    u = np.eye(ham.eval(0.0).shape[0], dtype=complex)
    for k in range(substeps):
        u = _magnus_step(ham.eval, k * h, h) @ u
    return u


def stroboscopic(ham: TimeDependentHamiltonian,
                 phases_per_period: int = 16,
                 substeps: int | None = None) -> Propagator:
    """Propagator specialized to times commensurate with the drive period.

    Precomputes partial-period products P_r = U(r T/P <- 0) and the
    monodromy M, then serves U(t) = P_r M^q for t = (q P + r) T/P using
    binary-exponentiation powers of M. Times must lie on that grid.
    """
    if not ham.period > 0:
        raise ValueError("stroboscopic propagation requires a periodic Hamiltonian")
    p = int(phases_per_period)
    if p < 1:
        raise ValueError("phases_per_period must be at least 1")
    if substeps is None:
        substeps = 32 * p
    substeps = int(math.ceil(substeps / p)) * p
    per_phase = substeps // p
    period = ham.period
    h = period / substeps
    dim = ham.eval(0.0).shape[0]
    eye = np.eye(dim, dtype=complex)

    partials = [eye.copy()]
    u = eye.copy()
    for k in range(substeps):
        u = _magnus_step(ham.eval, k * h, h) @ u
        if (k + 1) % per_phase == 0 and (k + 1) < substeps:
            partials.append(u.copy())
    mono = polar_project(u)
    powers = {0: mono}
    state = {"mults": 0}

    def _pow(q: int) -> np.ndarray:
        out = eye.copy()
        bit = 0
        while q:
            if bit not in powers:
                prev = powers[bit - 1]
                powers[bit] = polar_project(prev @ prev)
            if q & 1:
                out = powers[bit] @ out
                state["mults"] += 1
                if state["mults"] % 1024 == 0:
                    out = polar_project(out)
            q >>= 1
            bit += 1
        return out

    phase_dt = period / p

    def at(t: float) -> np.ndarray:
        if t < -1e-15:
            raise ValueError("time outside propagation window")
        j = int(math.floor(t / phase_dt + 1e-12))
        rem = t - j * phase_dt
        if not (abs(rem) < 1e-9 * period or abs(rem - phase_dt) < 1e-9 * period):
            raise ValueError("stroboscopic time must be a multiple of period / phases_per_period")
        if abs(rem - phase_dt) < 1e-9 * period:
            j += 1
        q, r = divmod(j, p)
        return partials[r] @ _pow(q)

    return Propagator(at=at, method="stroboscopic")
