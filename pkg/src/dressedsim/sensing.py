"""AC-field sensing and clock-stability figures of merit.

A target field at omega_s couples to the qubit when it matches a
quasi-energy transition of the doubly-dressed spectrum,

  omega_s = wm + m sqrt((wm - omega1)^2 + omega2^2),  m in {-1, 0, +1}.

The effective coupling fraction alpha is measured operationally: a weak
probe of amplitude g on the z component drives population transfer between
the static doubly-dressed eigenstates at rate alpha * g; the rate is fitted
from stroboscopically sampled populations and inverted through the
detuned-Rabi relation so that alpha stays linear in g. Sensitivity gains
compare alpha * sqrt(T2) against the resonant single-drive reference.

Clock mode locks the drive ratios (omega2 = sqrt(2) omega1 for the circular
scheme, where the matching and detuning conditions coincide; omega2/omega1 =
0.03 for the amplitude-modulated comparison) and scores T2 across carrier
frequencies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import (CIRCULAR, ControlScheme, DOUBLE_DRIVE, NoiseModel,
                      SINGLE_DRIVE, effective_mod_freq, first_frame_bloch,
                      optimal_detuning)
from .ensemble import memory_fidelity
from .propagation import _reduce_chronological, su2_from_rotvec

SQRT8E = math.sqrt(8.0 / math.e)

_GL_LO = 0.5 - math.sqrt(3.0) / 6.0
_GL_HI = 0.5 + math.sqrt(3.0) / 6.0


class FitError(RuntimeError):
    """Probe response could not be fit in the linear regime."""


@dataclass(frozen=True)
class SensitivityParams:
    alpha: float
    t2: float
    prefactor_r: float = 1.0
    gamma: float = 1.0
    readout_c: float = 1.0


def sensitivity_eta(p: SensitivityParams) -> float:
    """Smallest detectable field per unit bandwidth, up to overall constants."""
    if not (p.alpha > 0 and p.t2 > 0):
        raise ValueError("alpha and t2 must be positive")
    return p.prefactor_r * SQRT8E / (p.gamma * p.readout_c * p.alpha
                                     * math.sqrt(p.t2))


@dataclass
class GainResult:
    gain: float
    alpha: float
    t2: float
    alpha_ref: float
    t2_ref: float
    lower_bound: bool = False


def matching_condition(scheme: ControlScheme, m: int = 1) -> float:
    """Signal frequency resonant with the quasi-energy branch m."""
    if m not in (-1, 0, 1):
        raise ValueError("m must be -1, 0, or +1")
    wm = effective_mod_freq(scheme)
    gap = math.hypot(wm - scheme.omega1, scheme.omega2)
    return wm + m * gap


def closed_form_alpha(scheme: ControlScheme, m: int = 1) -> float:
    """Leading-order coupling fraction of the circular scheme, (1 - m c)/4
    with c = (wm - omega1)/|z|; the single-drive reference value is 1/2."""
    if scheme.variant == SINGLE_DRIVE:
        return 0.5
    if scheme.variant != CIRCULAR:
        raise ValueError("closed form available for circular_dressed only")
    wm = effective_mod_freq(scheme)
    az = math.hypot(wm - scheme.omega1, scheme.omega2)
    if az == 0:
        raise ValueError("degenerate dressed gap")
    c = (wm - scheme.omega1) / az
    return 0.25 * (1.0 - m * c)


def matched_omega2(variant: str, omega1: float, omega_s: float, m: int = 1):
    """Second amplitude whose upper/lower branch matches omega_s, with the
    noise-optimal detuning applied self-consistently. Returns (omega2, mod)."""
    from scipy.optimize import brentq

    if variant == CIRCULAR:
        cdet = 0.5
    elif variant == DOUBLE_DRIVE:
        cdet = 1.25
    else:
        raise ValueError(f"unsupported variant {variant!r}")

    def mismatch(w2):
        wt = omega1 + cdet * w2 * w2 / omega1
        return wt + m * math.hypot(wt - omega1, w2) - omega_s

    w2 = brentq(mismatch, 1e-6 * omega1, 3.0 * omega1)
    return w2, omega1 + cdet * w2 * w2 / omega1


def matched_scheme(variant: str, omega1: float, omega_s: float,
                   m: int = 1) -> ControlScheme:
    w2, mod = matched_omega2(variant, omega1, omega_s, m)
    return ControlScheme(variant, omega1, w2, mod)


def hh_reference(omega_s: float) -> ControlScheme:
    """Resonant single-drive sensor locked to the signal frequency."""
    return ControlScheme(SINGLE_DRIVE, omega_s)


@dataclass(frozen=True)
class ClockConstraint:
    """Drive ratios locked to the carrier for clock operation."""
    variant: str
    omega2_ratio: float

    def build(self, omega1: float) -> ControlScheme:
        w2 = self.omega2_ratio * omega1
        if self.variant == CIRCULAR:
            mod = 2.0 * omega1
        else:
            mod = omega1 + w2 / math.sqrt(2.0)
        return ControlScheme(self.variant, omega1, w2, mod)


CLOCK_CIRCULAR = ClockConstraint(CIRCULAR, math.sqrt(2.0))
CLOCK_DOUBLE = ClockConstraint(DOUBLE_DRIVE, 0.03)


def clock_scheme(variant: str, omega1: float) -> ControlScheme:
    if variant == CIRCULAR:
        return CLOCK_CIRCULAR.build(omega1)
    if variant == DOUBLE_DRIVE:
        return CLOCK_DOUBLE.build(omega1)
    raise ValueError(f"unsupported clock variant {variant!r}")


CLOCK_OMEGA1_COEF = 2.0


def predicted_clock_omega1(sigma_eps: float, t2_star: float = 1.0) -> float:
    """Carrier maximizing the circular clock T2 under the locked ratios."""
    return CLOCK_OMEGA1_COEF / (sigma_eps * t2_star)


# ---- operational alpha extraction ------------------------------------------

def _span_propagators(bloch_fn, n_samp: int, dt: float, n_steps: int,
                      chunk: int = 256) -> np.ndarray:
    """SU(2) propagators over consecutive equal spans [i dt, (i+1) dt)."""
    hh = dt / n_steps
    spans = np.empty((n_samp, 2, 2), dtype=complex)
    for s0 in range(0, n_samp, chunk):
        s1 = min(s0 + chunk, n_samp)
        i = np.arange(s0, s1, dtype=float)[:, None]
        k = np.arange(n_steps, dtype=float)[None, :]
        t1 = i * dt + (k + _GL_LO) * hh
        t2 = i * dt + (k + _GL_HI) * hh
        v1 = np.asarray(bloch_fn(t1))
        v2 = np.asarray(bloch_fn(t2))
        u = 0.5 * hh * (v1 + v2) \
            - (math.sqrt(3.0) * hh * hh / 12.0) * np.cross(v1, v2)
        spans[s0:s1] = _reduce_chronological(su2_from_rotvec(u))
    return spans


def _alpha_once(scheme: ControlScheme, m: int, g: float, n_flops: float,
                n_samples: int, alpha_guess: float = 0.08) -> float:
    ws = matching_condition(scheme, m)
    wm = effective_mod_freq(scheme)
    tm = 2.0 * math.pi / wm
    z = (wm - scheme.omega1) + 1j * scheme.omega2
    w = z / abs(z) if abs(z) > 0 else 1.0
    vec = np.array([[w, -w], [1.0, 1.0]], dtype=complex) / math.sqrt(2.0)
    lo = vec[:, 0] / np.linalg.norm(vec[:, 0])
    hi = vec[:, 1] - lo * (lo.conj() @ vec[:, 1])
    hi /= np.linalg.norm(hi)

    t_max = n_flops * 2.0 * math.pi / (alpha_guess * g)
    k_per = max(1, round(t_max / n_samples / tm))
    dt = k_per * tm
    h = (2.0 * math.pi / max(wm, ws)) / 64.0
    n_steps = max(1, int(math.ceil(dt / h)))

    def bloch(t):
        return first_frame_bloch(scheme, t, signal_g=g, signal_freq=ws)

    spans = _span_propagators(bloch, n_samples, dt, n_steps)
    psi = lo.copy()
    pop = np.empty(n_samples)
    for i in range(n_samples):
        psi = spans[i] @ psi
        pop[i] = abs(hi.conj() @ psi) ** 2
    ts = np.arange(1, n_samples + 1) * dt

    freqs = np.fft.rfftfreq(n_samples, dt) * 2.0 * math.pi
    amp = np.abs(np.fft.rfft(pop - pop.mean()))
    k0 = int(np.argmax(amp[1:])) + 1
    dw = freqs[1] - freqs[0]

    def fit(wo):
        a = np.stack([np.ones_like(ts), np.cos(wo * ts), np.sin(wo * ts)],
                     axis=1)
        coef, *_ = np.linalg.lstsq(a, pop, rcond=None)
        return ((a @ coef - pop) ** 2).sum(), coef

    from scipy.optimize import minimize_scalar
    r = minimize_scalar(lambda x: fit(x)[0],
                        bounds=(max(dw / 4.0, freqs[k0] - 2 * dw),
                                freqs[k0] + 2 * dw),
                        method="bounded", options={"xatol": dw * 1e-6})
    _, coef = fit(r.x)
    b = math.hypot(coef[1], coef[2])
    omega_induced = r.x * math.sqrt(2.0 * b)
    return float(omega_induced / g)


def effective_coupling_alpha(scheme: ControlScheme, m: int = 1,
                             g_probe: float | None = None,
                             g_frac: float = 1e-3, n_flops: float = 1.5,
                             n_samples: int = 2048,
                             check_linearity: bool = True) -> float:
    """Measured coupling fraction alpha = Omega_induced / g of a probe tone.

    With check_linearity the extraction repeats at half the probe amplitude
    and must agree within 1%; disagreement means the response is not in the
    linear regime (raises FitError).
    """
    base = scheme.omega2 if scheme.omega2 > 0 else scheme.omega1
    g = g_probe if g_probe is not None else g_frac * base
    if not g > 0:
        raise ValueError("probe amplitude must be positive")
    a1 = _alpha_once(scheme, m, g, n_flops, n_samples)
    if check_linearity:
        a2 = _alpha_once(scheme, m, 0.5 * g, n_flops, n_samples)
        if not abs(a2 - a1) < 0.01 * abs(a1):
            raise FitError(
                f"alpha changed by {abs(a2 - a1) / abs(a1):.1%} on halving "
                "the probe; response is nonlinear")
    return a1


# ---- scans ------------------------------------------------------------------

@dataclass
class SensingScanResult:
    rows: list
    alpha_ref: float
    t2_ref: float
    records: list


def sensing_scan(omega1_grid, omega_s: float, noise: NoiseModel,
                 g_frac_circ: float = 1e-3, g_frac_dd: float = 0.05,
                 horizon_circ: float | None = None,
                 horizon_dd: float | None = None,
                 n_points: int = 1536, map_fn=map) -> SensingScanResult:
    """Sensitivity gain of both matched schemes across carrier frequencies.

    Points whose probe response fails the linearity gate are reported NaN.
    Default T2 windows scale as 1/sigma_eps; curves that never cross the
    threshold use the window end as a T2 lower bound. map_fn lets callers
    parallelize over grid points.
    """
    t2_star = math.sqrt(2.0) / noise.sigma_delta if noise.sigma_delta > 0 \
        else 1.0
    if horizon_circ is None:
        horizon_circ = 2.5 * t2_star / max(noise.sigma_eps, 1e-6)
    if horizon_dd is None:
        horizon_dd = 2.0 * t2_star / max(noise.sigma_eps, 1e-6)

    ref = hh_reference(omega_s)
    alpha_ref = effective_coupling_alpha(ref, m=0, g_frac=g_frac_circ)
    ref_curve = memory_fidelity(ref, noise, n_points=n_points)
    t2_ref = ref_curve.t2 if not ref_curve.beyond_horizon \
        else float(ref_curve.times[-1])

    def point(w1: float):
        rec_point = {"omega1": w1}
        gains = {}
        for variant, g_frac, horizon in (
                (CIRCULAR, g_frac_circ, horizon_circ),
                (DOUBLE_DRIVE, g_frac_dd, horizon_dd)):
            rec = {"variant": variant}
            try:
                sch = matched_scheme(variant, w1, omega_s)
                rec["omega2"] = sch.omega2
                rec["mod_freq"] = sch.mod_freq
                alpha = effective_coupling_alpha(sch, m=1, g_frac=g_frac)
                curve = memory_fidelity(sch, noise, horizon=horizon,
                                        n_points=n_points)
                t2 = curve.t2 if not curve.beyond_horizon \
                    else float(curve.times[-1])
                rec["alpha"] = alpha
                rec["t2"] = t2
                rec["lower_bound"] = curve.beyond_horizon
                gain = (alpha * math.sqrt(t2)) / (alpha_ref * math.sqrt(t2_ref))
            except (FitError, ValueError) as exc:
                rec["error"] = str(exc)
                gain = math.nan
            rec["gain"] = gain
            gains[variant] = gain
            rec_point[variant] = rec
        return (w1, gains[CIRCULAR], gains[DOUBLE_DRIVE]), rec_point

    results = list(map_fn(point, [float(w) for w in omega1_grid]))
    return SensingScanResult(rows=[r for r, _ in results],
                             alpha_ref=alpha_ref, t2_ref=t2_ref,
                             records=[c for _, c in results])


@dataclass
class ClockResult:
    rows: list
    best_t2_dd: float
    best_t2_circ: float
    omega1_best_dd: float
    omega1_best_circ: float
    ratio: float


def clock_comparison(omega1_grid, noise: NoiseModel,
                     horizon_circ: float | None = None,
                     horizon_dd: float | None = None,
                     n_points: int = 1536, map_fn=map) -> ClockResult:
    """T2 of both locked clock drives across carriers, and the best-case ratio."""
    t2_star = math.sqrt(2.0) / noise.sigma_delta if noise.sigma_delta > 0 \
        else 1.0
    se = max(noise.sigma_eps, 1e-6)
    if horizon_circ is None:
        horizon_circ = 3.25 * t2_star / se
    if horizon_dd is None:
        horizon_dd = 2.0 * t2_star / se

    def point(w1: float):
        c_dd = memory_fidelity(clock_scheme(DOUBLE_DRIVE, w1), noise,
                               horizon=horizon_dd, n_points=n_points)
        c_ci = memory_fidelity(clock_scheme(CIRCULAR, w1), noise,
                               horizon=horizon_circ, n_points=n_points)
        t2_dd = c_dd.t2 if not c_dd.beyond_horizon else float(c_dd.times[-1])
        t2_ci = c_ci.t2 if not c_ci.beyond_horizon else float(c_ci.times[-1])
        return w1, t2_dd, t2_ci

    rows = list(map_fn(point, [float(w) for w in omega1_grid]))
    arr = np.asarray(rows)
    i_dd = int(np.nanargmax(arr[:, 1]))
    i_ci = int(np.nanargmax(arr[:, 2]))
    best_dd = float(arr[i_dd, 1])
    best_ci = float(arr[i_ci, 2])
    return ClockResult(rows=rows, best_t2_dd=best_dd, best_t2_circ=best_ci,
                       omega1_best_dd=float(arr[i_dd, 0]),
                       omega1_best_circ=float(arr[i_ci, 0]),
                       ratio=best_ci / best_dd if best_dd > 0 else math.inf)
