"""Drive-scheme parametrization and rotating-frame Hamiltonians.

Balanced-control components Omega(t) = (Ox, Oy, Oz) per variant, with the
first-rotating-frame Hamiltonian H = (1/2) Omega . sigma:

  single_drive      (W1, 0, 0)
  double_drive      (W1, 2 W2 cos(wm t), 0)
  phase_modulated   (W1, 0, -2 W2 cos(wm t))
  circular_dressed  (W1, W2 cos(wm t + phi), W2 sin(wm t + phi))

where W1 = omega1, W2 = omega2 and wm = mod_freq. double_drive and
phase_modulated carry the sideband 2*W2 prefactor (omega2 is the second
Rabi frequency there); circular_dressed uses omega2 as the full dressed
Rabi frequency. The two-qubit gate module uses its own amplitude
convention, documented there.

Quasi-static noise: a fractional amplitude error eps multiplies Ox and Oy,
an additive detuning delta enters Oz only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import core

SINGLE_DRIVE = "single_drive"
DOUBLE_DRIVE = "double_drive"
PHASE_MODULATED = "phase_modulated"
CIRCULAR = "circular_dressed"
VARIANTS = (SINGLE_DRIVE, DOUBLE_DRIVE, PHASE_MODULATED, CIRCULAR)


@dataclass(frozen=True)
class ControlScheme:
    variant: str
    omega1: float
    omega2: float = 0.0
    mod_freq: float = 0.0
    phase: float = 0.0
    cross_corr: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown scheme variant {self.variant!r}")
        if not self.omega1 > 0:
            raise ValueError("omega1 must be positive")
        if self.omega2 < 0:
            raise ValueError("omega2 must be nonnegative")
        if self.variant == SINGLE_DRIVE and self.omega2 != 0.0:
            raise ValueError("single_drive forces omega2 = 0")
        if self.omega2 > 0 and not self.mod_freq > 0:
            raise ValueError("mod_freq must be positive when omega2 > 0")

    @property
    def period(self) -> float:
        """Fundamental period of the drive, 0 if time-independent."""
        return 2.0 * math.pi / self.mod_freq if self.omega2 > 0 else 0.0


@dataclass(frozen=True)
class NoiseModel:
    sigma_delta: float
    sigma_eps: float
    n_realizations: int = 2048
    seed: int = 0

    def __post_init__(self):
        if self.sigma_delta < 0 or self.sigma_eps < 0:
            raise ValueError("noise widths must be nonnegative")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be at least 1")

    @classmethod
    def from_t2_star(cls, t2_star: float, sigma_eps: float,
                     n_realizations: int = 2048, seed: int = 0):
        """sigma_delta = sqrt(2)/T2* for Gaussian quasi-static dephasing."""
        if not t2_star > 0:
            raise ValueError("t2_star must be positive")
        return cls(math.sqrt(2.0) / t2_star, sigma_eps, n_realizations, seed)


@dataclass(frozen=True)
class NoiseRealization:
    delta: float
    eps: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.eps)):
            raise ValueError("noise realization must be finite")


ZERO_NOISE = NoiseRealization(0.0, 0.0)


@dataclass
class TimeDependentHamiltonian:
    """period in seconds (0 if aperiodic); eval maps t to a Hermitian matrix.

    fourier, when present, lists (m, V_m) with V_{-m} = V_m^dag such that
    eval(t) = sum_m exp(-i m wm t) V_m at wm = 2 pi / period. h_static is
    the noise-free m = 0 block when the decomposition knows it.
    """
    period: float
    eval: Callable[[float], np.ndarray]
    fourier: list | None = None
    h_static: np.ndarray | None = None


def omega_vector(scheme: ControlScheme, t):
    """Instantaneous (Ox, Oy, Oz); vectorized, shape t.shape + (3,)."""
    t = np.asarray(t, dtype=float)
    wm = scheme.mod_freq
    zero = np.zeros_like(t)
    if scheme.variant == SINGLE_DRIVE:
        oy = zero
        oz = zero
    elif scheme.variant == DOUBLE_DRIVE:
        oy = 2.0 * scheme.omega2 * np.cos(wm * t)
        oz = zero
    elif scheme.variant == PHASE_MODULATED:
        oy = zero
        oz = -2.0 * scheme.omega2 * np.cos(wm * t)
    else:
        oy = scheme.omega2 * np.cos(wm * t + scheme.phase)
        oz = scheme.omega2 * np.sin(wm * t + scheme.phase)
    ox = np.full_like(t, scheme.omega1)
    return np.stack(np.broadcast_arrays(ox, oy, oz), axis=-1)


def first_frame_bloch(scheme: ControlScheme, t, eps=0.0, delta=0.0,
                      signal_g: float = 0.0, signal_freq: float = 0.0):
    """Noisy first-frame Bloch vector, optionally with a probe tone.

    eps and delta broadcast against t (e.g. shapes (N, 1) and (1, T)); the
    probe adds signal_g * cos(signal_freq * t) to the z component.
    Returns shape broadcast(...) + (3,) with H = (1/2) v . sigma.
    """
    v = omega_vector(scheme, t)
    ox = v[..., 0] * (1.0 + np.asarray(eps))
    oy = v[..., 1] * (1.0 + np.asarray(eps))
    oz = v[..., 2] + np.asarray(delta)
    if signal_g != 0.0:
        oz = oz + signal_g * np.cos(signal_freq * np.asarray(t, dtype=float))
    return np.stack(np.broadcast_arrays(ox, oy, oz), axis=-1)


def second_frame_bloch(scheme: ControlScheme, t, eps=0.0, delta=0.0):
    """Bloch vector of the second-frame Hamiltonian H_II = (1/2) v . sigma.

    The second frame rotates at wm about x: R = exp(+i wm t sx / 2) maps
    sy -> sy c - sz s, sz -> sz c + sy s with c = cos(wm t), s = sin(wm t).
    Aperiodic schemes use the resonant frame wm = omega1.
    """
    t = np.asarray(t, dtype=float)
    wm = effective_mod_freq(scheme)
    v = omega_vector(scheme, t)
    eps = np.asarray(eps)
    delta = np.asarray(delta)
    wx = scheme.omega1 * (1.0 + eps) - wm
    wy = v[..., 1] * (1.0 + eps)
    wz = v[..., 2] + delta
    c = np.cos(wm * t)
    s = np.sin(wm * t)
    vx = wx
    vy = wy * c + wz * s
    vz = -wy * s + wz * c
    return np.stack(np.broadcast_arrays(vx, vy, vz), axis=-1)


def effective_mod_freq(scheme: ControlScheme) -> float:
    """mod_freq, falling back to the resonant omega1 for aperiodic schemes."""
    return scheme.mod_freq if scheme.mod_freq > 0 else scheme.omega1


def effective_period(scheme: ControlScheme) -> float:
    """Strobe period: the drive period, or 2 pi / omega1 when aperiodic."""
    return 2.0 * math.pi / effective_mod_freq(scheme)


def rotating_frame_hamiltonian(scheme: ControlScheme,
                               noise: NoiseRealization = ZERO_NOISE
                               ) -> TimeDependentHamiltonian:
    """H_I(t) = (1/2)[Ox(1+eps) sx + Oy(1+eps) sy + (Oz+delta) sz]."""
    sx, sy, sz = core.pauli("x"), core.pauli("y"), core.pauli("z")

    def eval_h(t):
        v = first_frame_bloch(scheme, float(t), noise.eps, noise.delta)
        return 0.5 * (v[0] * sx + v[1] * sy + v[2] * sz)

    return TimeDependentHamiltonian(period=scheme.period, eval=eval_h)


def doubly_rotating_fourier(scheme: ControlScheme,
                            noise: NoiseRealization = ZERO_NOISE
                            ) -> TimeDependentHamiltonian:
    """Harmonic decomposition of the circular scheme's second-frame Hamiltonian.

    Returns eval(t) = sum_m exp(-i m wm t) V_m with the closed-form blocks

      H0 = (1/2)[(W1 - wm) sx + W2 sy]        (noise free, stored separately)
      V0 = (eps/2)[W1 sx + (W2/2) sy]
      V1 = (delta/4)(i sy + sz)
      V2 = (eps W2/8)(sy - i sz)

    and V_{-m} = V_m^dag; harmonic index h = 2. Defined for phase = 0 only.
    """
    if scheme.variant != CIRCULAR:
        raise ValueError(
            "fourier decomposition is defined for the circular_dressed variant")
    if scheme.phase != 0.0:
        raise ValueError("fourier decomposition requires phase = 0")
    if not scheme.mod_freq > 0:
        raise ValueError("fourier decomposition requires mod_freq > 0")
    w1, w2, wm = scheme.omega1, scheme.omega2, scheme.mod_freq
    sx, sy, sz = core.pauli("x"), core.pauli("y"), core.pauli("z")
    h0 = 0.5 * ((w1 - wm) * sx + w2 * sy)
    v0 = 0.5 * noise.eps * (w1 * sx + 0.5 * w2 * sy)
    v1 = 0.25 * noise.delta * (1j * sy + sz)
    v2 = 0.125 * noise.eps * w2 * (sy - 1j * sz)
    fourier = [(0, h0 + v0), (1, v1), (-1, v1.conj().T),
               (2, v2), (-2, v2.conj().T)]

    def eval_h(t):
        acc = np.zeros((2, 2), dtype=complex)
        for m, vm in fourier:
            acc = acc + np.exp(-1j * m * wm * t) * vm
        return acc

    return TimeDependentHamiltonian(period=2.0 * math.pi / wm, eval=eval_h,
                                    fourier=fourier, h_static=h0)


def optimal_detuning(variant: str, omega1: float, omega2: float,
                     c: float = 1.0, pm_as_double: bool = False) -> float:
    """Modulation frequency that cancels the leading amplitude-noise shift.

    circular_dressed: W1 + W2^2/(2 W1); double_drive: W1 + (c + 1/4) W2^2/W1.
    phase_modulated is resonant unless pm_as_double is set.
    """
    if not omega1 > 0:
        raise ValueError("omega1 must be positive")
    if variant == CIRCULAR:
        return omega1 + 0.5 * omega2 ** 2 / omega1
    if variant == DOUBLE_DRIVE or (variant == PHASE_MODULATED and pm_as_double):
        return omega1 + (c + 0.25) * omega2 ** 2 / omega1
    if variant == PHASE_MODULATED:
        return omega1
    raise ValueError(f"optimal detuning unsupported for variant {variant!r}")


def lab_waveform(scheme: ControlScheme, omega0: float, t):
    """Lab-frame control waveform f(t); export only, never integrated.

    f(t) = Ox cos(omega0 t - Iz) - Oy sin(omega0 t - Iz) with
    Iz = integral of Oz from 0 to t, evaluated in closed form per scheme.
    """
    t = np.asarray(t, dtype=float)
    v = omega_vector(scheme, t)
    wm, w2, phi = scheme.mod_freq, scheme.omega2, scheme.phase
    if scheme.variant in (SINGLE_DRIVE, DOUBLE_DRIVE):
        iz = np.zeros_like(t)
    elif scheme.variant == PHASE_MODULATED:
        iz = -2.0 * w2 * np.sin(wm * t) / wm
    else:
        iz = (w2 / wm) * (np.cos(phi) - np.cos(wm * t + phi))
    ph = omega0 * t - iz
    return v[..., 0] * np.cos(ph) - v[..., 1] * np.sin(ph)


def to_second_frame(ham: TimeDependentHamiltonian, mod_freq: float, t: float):
    """exp(+i wm t sx/2) H(t) exp(-i wm t sx/2) - (wm/2) sx."""
    sx = core.pauli("x")
    r = core.expm(0.5j * mod_freq * t * sx)
    return r @ ham.eval(t) @ r.conj().T - 0.5 * mod_freq * sx
