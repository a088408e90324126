import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dressedsim import control, core
from dressedsim.control import (CIRCULAR, ControlScheme, DOUBLE_DRIVE,
                                NoiseModel, NoiseRealization,
                                PHASE_MODULATED, SINGLE_DRIVE, ZERO_NOISE)


def circ(omega1=10.0, omega2=1.0, phase=0.0, mod_freq=None):
    if mod_freq is None:
        mod_freq = control.optimal_detuning(CIRCULAR, omega1, omega2)
    return ControlScheme(CIRCULAR, omega1, omega2, mod_freq, phase)


# ---- scheme validation -------------------------------------------------------

def test_scheme_validation():
    with pytest.raises(ValueError):
        ControlScheme("nope", 1.0)
    with pytest.raises(ValueError):
        ControlScheme(CIRCULAR, 0.0)
    with pytest.raises(ValueError):
        ControlScheme(CIRCULAR, 1.0, -0.5, 1.0)
    with pytest.raises(ValueError):
        ControlScheme(SINGLE_DRIVE, 1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        ControlScheme(CIRCULAR, 1.0, 0.5, 0.0)


def test_scheme_period():
    s = ControlScheme(CIRCULAR, 1.0, 0.5, 4.0)
    assert np.isclose(s.period, 2 * math.pi / 4.0)
    assert ControlScheme(SINGLE_DRIVE, 1.0).period == 0.0


def test_noise_model():
    nm = NoiseModel.from_t2_star(2.0, 0.01)
    assert np.isclose(nm.sigma_delta, math.sqrt(2.0) / 2.0)
    with pytest.raises(ValueError):
        NoiseModel(-1.0, 0.0)
    with pytest.raises(ValueError):
        NoiseModel.from_t2_star(0.0, 0.0)
    with pytest.raises(ValueError):
        NoiseRealization(np.nan, 0.0)


# ---- drive components --------------------------------------------------------

def test_omega_vector_components():
    t = np.linspace(0.0, 3.0, 7)
    wm = 2.5
    s = ControlScheme(DOUBLE_DRIVE, 4.0, 0.5, wm)
    v = control.omega_vector(s, t)
    assert np.allclose(v[:, 0], 4.0)
    assert np.allclose(v[:, 1], 2 * 0.5 * np.cos(wm * t))
    assert np.allclose(v[:, 2], 0.0)

    s = ControlScheme(PHASE_MODULATED, 4.0, 0.5, wm)
    v = control.omega_vector(s, t)
    assert np.allclose(v[:, 1], 0.0)
    assert np.allclose(v[:, 2], -2 * 0.5 * np.cos(wm * t))

    s = ControlScheme(CIRCULAR, 4.0, 0.5, wm, phase=0.3)
    v = control.omega_vector(s, t)
    assert np.allclose(v[:, 1], 0.5 * np.cos(wm * t + 0.3))
    assert np.allclose(v[:, 2], 0.5 * np.sin(wm * t + 0.3))
    assert np.allclose(np.hypot(v[:, 1], v[:, 2]), 0.5)


def test_first_frame_noise_insertion():
    s = circ()
    v0 = control.first_frame_bloch(s, 0.7)
    v = control.first_frame_bloch(s, 0.7, eps=0.02, delta=0.3)
    assert np.allclose(v[..., 0], v0[..., 0] * 1.02)
    assert np.allclose(v[..., 1], v0[..., 1] * 1.02)
    assert np.allclose(v[..., 2], v0[..., 2] + 0.3)


def test_first_frame_probe_tone():
    s = circ()
    t = np.array([0.0, 0.4, 1.1])
    v = control.first_frame_bloch(s, t, signal_g=0.05, signal_freq=3.0)
    v0 = control.first_frame_bloch(s, t)
    assert np.allclose(v[..., 2] - v0[..., 2], 0.05 * np.cos(3.0 * t))


# ---- second frame ------------------------------------------------------------

def test_circular_second_frame_constant():
    """The matched-rotation frame removes all time dependence (no noise)."""
    s = circ(omega1=10.0, omega2=1.3, phase=0.4)
    t = np.linspace(0.0, 10 * s.period, 500)
    v = control.second_frame_bloch(s, t)
    assert np.ptp(v, axis=0).max() < 1e-10
    want = np.array([10.0 - s.mod_freq,
                     1.3 * math.cos(0.4), 1.3 * math.sin(0.4)])
    assert np.allclose(v[0], want, atol=1e-12)


def test_double_drive_second_frame_oscillates():
    s = ControlScheme(DOUBLE_DRIVE, 10.0, 1.0,
                      control.optimal_detuning(DOUBLE_DRIVE, 10.0, 1.0))
    t = np.linspace(0.0, 4 * s.period, 800)
    v = control.second_frame_bloch(s, t)
    # counter-rotating part survives at amplitude ~ omega2
    assert np.ptp(v[:, 1]) > 0.9 * s.omega2


def test_second_frame_matches_unitary_transform():
    """Independent oracle: conjugate H_I(t) by exp(+i wm t sx/2) explicitly."""
    s = circ(omega1=7.0, omega2=0.9, phase=0.2)
    nr = NoiseRealization(delta=0.25, eps=0.015)
    ham = control.rotating_frame_hamiltonian(s, nr)
    sx, sy, sz = core.pauli("x"), core.pauli("y"), core.pauli("z")
    for t in (0.0, 0.31, 1.7, 4.4):
        v = control.second_frame_bloch(s, t, eps=nr.eps, delta=nr.delta)
        h2 = 0.5 * (v[0] * sx + v[1] * sy + v[2] * sz)
        want = control.to_second_frame(ham, s.mod_freq, t)
        assert np.abs(h2 - want).max() < 1e-12


def test_second_frame_aperiodic_uses_resonant_frame():
    s = ControlScheme(SINGLE_DRIVE, 5.0)
    assert control.effective_mod_freq(s) == 5.0
    assert np.isclose(control.effective_period(s), 2 * math.pi / 5.0)
    v = control.second_frame_bloch(s, 0.8, delta=0.1)
    # x component is W1(1+eps) - W1 = 0 at eps = 0
    assert np.isclose(v[0], 0.0)
    assert np.isclose(np.hypot(v[1], v[2]), 0.1)


# ---- fourier decomposition ---------------------------------------------------

def test_fourier_reconstruction():
    s = circ(omega1=10.0, omega2=1.0)
    nr = NoiseRealization(delta=0.3, eps=0.01)
    ham = control.doubly_rotating_fourier(s, nr)
    for t in (0.0, 0.17, 0.9, 2.3):
        recon = sum(np.exp(-1j * m * s.mod_freq * t) * vm
                    for m, vm in ham.fourier)
        assert np.abs(recon - ham.eval(t)).max() < 1e-12


def test_fourier_matches_frame_transform_oracle():
    s = circ(omega1=10.0, omega2=1.0)
    nr = NoiseRealization(delta=0.3, eps=0.01)
    ham = control.doubly_rotating_fourier(s, nr)
    hrf = control.rotating_frame_hamiltonian(s, nr)
    for t in (0.05, 0.41, 1.3):
        want = control.to_second_frame(hrf, s.mod_freq, t)
        assert np.abs(ham.eval(t) - want).max() < 1e-10


def test_fourier_static_block_and_hermiticity():
    s = circ(omega1=10.0, omega2=1.0)
    ham = control.doubly_rotating_fourier(s, ZERO_NOISE)
    sx, sy = core.pauli("x"), core.pauli("y")
    want = 0.5 * ((10.0 - s.mod_freq) * sx + 1.0 * sy)
    assert np.allclose(ham.h_static, want)
    terms = dict(ham.fourier)
    for m in (1, 2):
        assert np.allclose(terms[-m], terms[m].conj().T)
    assert core.is_hermitian(ham.eval(0.77))


def test_fourier_rejects_unsupported():
    with pytest.raises(ValueError):
        control.doubly_rotating_fourier(circ(phase=0.1))
    s = ControlScheme(DOUBLE_DRIVE, 10.0, 1.0, 10.0)
    with pytest.raises(ValueError):
        control.doubly_rotating_fourier(s)


# ---- detuning and waveform ---------------------------------------------------

def test_optimal_detuning_values():
    assert np.isclose(control.optimal_detuning(CIRCULAR, 10.0, 1.0),
                      10.0 + 0.5 / 10.0)
    assert np.isclose(control.optimal_detuning(DOUBLE_DRIVE, 10.0, 1.0),
                      10.0 + 1.25 / 10.0)
    assert control.optimal_detuning(PHASE_MODULATED, 10.0, 1.0) == 10.0
    assert np.isclose(
        control.optimal_detuning(PHASE_MODULATED, 10.0, 1.0,
                                 pm_as_double=True),
        10.0 + 1.25 / 10.0)
    with pytest.raises(ValueError):
        control.optimal_detuning(SINGLE_DRIVE, 10.0, 0.0)


def test_magic_detuning_self_consistency():
    """At omega2 = sqrt(2) omega1 the compensated point is exactly 2 omega1."""
    w1 = 3.7
    assert np.isclose(
        control.optimal_detuning(CIRCULAR, w1, math.sqrt(2.0) * w1),
        2.0 * w1, rtol=0, atol=1e-12)


def test_lab_waveform_phase_derivative():
    """d(phase)/dt must equal omega0 - Oz(t); check by finite difference."""
    s = circ(omega1=10.0, omega2=1.0, phase=0.3)
    w0 = 400.0
    t = 0.37
    h = 1e-6
    # recover instantaneous frequency from the waveform's analytic form
    wm, w2, phi = s.mod_freq, s.omega2, s.phase
    iz = lambda tt: (w2 / wm) * (math.cos(phi) - math.cos(wm * tt + phi))
    num = (iz(t + h) - iz(t - h)) / (2 * h)
    assert np.isclose(num, w2 * math.sin(wm * t + phi), atol=1e-6)
    f = control.lab_waveform(s, w0, np.array([0.0]))
    # at t = 0 the phase integral vanishes
    v0 = control.omega_vector(s, 0.0)
    assert np.isclose(f[0], v0[0])


def test_lab_waveform_single_drive():
    s = ControlScheme(SINGLE_DRIVE, 2.0)
    t = np.linspace(0, 1, 11)
    f = control.lab_waveform(s, 50.0, t)
    assert np.allclose(f, 2.0 * np.cos(50.0 * t))


# ---- property tests ----------------------------------------------------------

@given(w1=st.floats(0.1, 50.0), w2=st.floats(0.0, 20.0),
       phase=st.floats(-3.0, 3.0), t=st.floats(0.0, 20.0))
@settings(max_examples=60, deadline=None)
def test_circular_modulus_invariant(w1, w2, phase, t):
    """|Oy + i Oz| = omega2 at all times for the circular scheme."""
    mod = control.optimal_detuning(CIRCULAR, w1, w2)
    if w2 > 0:
        s = ControlScheme(CIRCULAR, w1, w2, mod, phase)
    else:
        s = ControlScheme(CIRCULAR, w1)
    v = control.omega_vector(s, t)
    assert np.isclose(np.hypot(v[..., 1], v[..., 2]), w2, atol=1e-9)


@given(w1=st.floats(0.1, 50.0), w2=st.floats(1e-3, 20.0))
@settings(max_examples=60, deadline=None)
def test_optimal_detuning_dominates_omega1(w1, w2):
    for variant in (CIRCULAR, DOUBLE_DRIVE):
        wm = control.optimal_detuning(variant, w1, w2)
        assert wm > w1
    s = ControlScheme(CIRCULAR, w1, w2,
                      control.optimal_detuning(CIRCULAR, w1, w2))
    v = control.second_frame_bloch(s, np.linspace(0, 3 * s.period, 50))
    assert np.ptp(v, axis=0).max() < 1e-8 * max(w1, w2)
