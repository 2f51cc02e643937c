"""Averaged (ponderomotive) electron dynamics, integrated over the laser phase.

State variables are the cycle-averaged transverse position (x, y) and
longitudinal position z, all in units of R, and the averaged transverse
momentum (qx, qy) in units of m c.  The light-front momentum
q_minus = q0 - qz is a constant of motion and is carried, never integrated.

Equations (m = c = 1, delta = 1 / (omega R)):

    d q_perp / d phi = -(delta / q_minus) dU/d rho_perp
    d rho_perp / d phi = delta q_perp / q_minus
    d z / d phi = delta qz / q_minus

The focal functions see zeta = z / L = delta * z.  qz is closed with the
dressed mass shell q0^2 - qz^2 - q_perp^2 = 1 + 2U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numba
import numpy as np

from .core import DomainError, MC2_MEV, SimParams, StateError, StepError, r_to_cm
from .field import ENVELOPE_CODES, envelope_sq, potential_kernel

DEFAULT_STEP = 0.25

HISTORY_COLUMNS = ("phi", "x_over_R", "y_over_R", "z_over_R", "qx", "qy", "qz", "q0", "U")

# ensemble output columns
EXIT_COLUMNS = (
    "x", "y", "z", "qx", "qy", "W_MeV", "theta", "alpha", "X", "Y", "detected", "failed",
)


@dataclass(frozen=True)
class PonderomotiveState:
    phi: float
    x: float
    y: float
    z: float
    qx: float
    qy: float
    q_minus: float

    @property
    def q_perp(self) -> float:
        return math.hypot(self.qx, self.qy)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.qx, self.qy])


@dataclass(frozen=True)
class TrajectoryResult:
    exit_state: PonderomotiveState
    kinetic_energy: float
    polar_angle: float
    q_minus_drift: float
    lz_drift: float
    closure_residual: float
    step_count: int
    history: np.ndarray | None = None


class DetectorHit(NamedTuple):
    x_cm: float
    y_cm: float
    alpha: float


@numba.njit(cache=True)
def shell_qz(qx, qy, q_minus, u):
    # q_perp^2 is summed first so that swapping x and y is exact
    return 0.5 * ((1.0 + (qx * qx + qy * qy) + 2.0 * u) / q_minus - q_minus)


@numba.njit(cache=True)
def _rhs(x, y, z, qx, qy, amp, qm, delta, mu):
    if amp == 0.0:
        u = 0.0
        gx = 0.0
        gy = 0.0
    else:
        u, gx, gy = potential_kernel(x, y, delta * z, amp, mu)
    qz = shell_qz(qx, qy, qm, u)
    k = delta / qm
    return k * qx, k * qy, k * qz, -k * gx, -k * gy, u, qz


@numba.njit(cache=True)
def _closure(qx, qy, qz, qm, u):
    q0 = qz + qm
    return abs(q0 * q0 - qz * qz - (qx * qx + qy * qy) - 2.0 * u - 1.0)


@numba.njit(cache=True)
def _rk4_step(phi, h, x, y, z, qx, qy, qm, delta, omega_tau, amp0, mu, kind):
    hh = 0.5 * h
    amp_a = amp0 * envelope_sq(phi / omega_tau, kind)
    amp_b = amp0 * envelope_sq((phi + hh) / omega_tau, kind)
    amp_c = amp0 * envelope_sq((phi + h) / omega_tau, kind)
    a1, b1, c1, d1, e1, u1, z1 = _rhs(x, y, z, qx, qy, amp_a, qm, delta, mu)
    a2, b2, c2, d2, e2, u2, z2 = _rhs(
        x + hh * a1, y + hh * b1, z + hh * c1, qx + hh * d1, qy + hh * e1,
        amp_b, qm, delta, mu,
    )
    a3, b3, c3, d3, e3, u3, z3 = _rhs(
        x + hh * a2, y + hh * b2, z + hh * c2, qx + hh * d2, qy + hh * e2,
        amp_b, qm, delta, mu,
    )
    a4, b4, c4, d4, e4, u4, z4 = _rhs(
        x + h * a3, y + h * b3, z + h * c3, qx + h * d3, qy + h * e3,
        amp_c, qm, delta, mu,
    )
    w = h / 6.0
    res = max(
        _closure(qx, qy, z1, qm, u1),
        _closure(qx + hh * d1, qy + hh * e1, z2, qm, u2),
        _closure(qx + hh * d2, qy + hh * e2, z3, qm, u3),
        _closure(qx + h * d3, qy + h * e3, z4, qm, u4),
    )
    return (
        x + w * (a1 + 2.0 * (a2 + a3) + a4),
        y + w * (b1 + 2.0 * (b2 + b3) + b4),
        z + w * (c1 + 2.0 * (c2 + c3) + c4),
        qx + w * (d1 + 2.0 * (d2 + d3) + d4),
        qy + w * (e1 + 2.0 * (e2 + e3) + e4),
        res,
    )


@numba.njit(cache=True)
def _schedule(phi0, phi1, h):
    span = phi1 - phi0
    n_full = int(math.floor(span / h))
    last = span - n_full * h
    if last <= 1e-12 * span:
        last = 0.0
    return n_full, last


@numba.njit(cache=True)
def _integrate_path(x, y, z, qx, qy, qm, delta, omega_tau, amp0, mu, kind, h, phi0, phi1, record):
    n_full, last = _schedule(phi0, phi1, h)
    n_steps = n_full + (1 if last > 0.0 else 0)
    hist = np.empty((n_steps + 1 if record else 0, 9))
    worst = 0.0
    for k in range(n_steps):
        phi = phi0 + k * h
        if record:
            u = amp0 * envelope_sq(phi / omega_tau, kind)
            if u != 0.0:
                u = potential_kernel(x, y, delta * z, u, mu)[0]
            qz = shell_qz(qx, qy, qm, u)
            hist[k, 0] = phi
            hist[k, 1] = x
            hist[k, 2] = y
            hist[k, 3] = z
            hist[k, 4] = qx
            hist[k, 5] = qy
            hist[k, 6] = qz
            hist[k, 7] = qz + qm
            hist[k, 8] = u
        step = h if k < n_full else phi1 - phi
        x, y, z, qx, qy, res = _rk4_step(phi, step, x, y, z, qx, qy, qm, delta, omega_tau, amp0, mu, kind)
        if res > worst:
            worst = res
    if record:
        u = amp0 * envelope_sq(phi1 / omega_tau, kind)
        if u != 0.0:
            u = potential_kernel(x, y, delta * z, u, mu)[0]
        qz = shell_qz(qx, qy, qm, u)
        hist[n_steps, 0] = phi1
        hist[n_steps, 1] = x
        hist[n_steps, 2] = y
        hist[n_steps, 3] = z
        hist[n_steps, 4] = qx
        hist[n_steps, 5] = qy
        hist[n_steps, 6] = qz
        hist[n_steps, 7] = qz + qm
        hist[n_steps, 8] = u
    return x, y, z, qx, qy, worst, n_steps, hist


@numba.njit(cache=True)
def _integrate_batch(x0, y0, z0, qm, delta, omega_tau, amp0, mu, kind, h,
                     det_z, r1, r2, w_min, out):
    empty = False
    for i in range(x0.size):
        x, y, z, qx, qy, _, _, _ = _integrate_path(
            x0[i], y0[i], z0[i], 0.0, 0.0, qm, delta, omega_tau, amp0, mu, kind, h,
            -omega_tau, omega_tau, empty,
        )
        qz = shell_qz(qx, qy, qm, 0.0)
        q0 = qz + qm
        w = (q0 - 1.0) * MC2_MEV
        qp = math.hypot(qx, qy)
        theta = math.atan2(qp, qz)
        X = math.nan
        Y = math.nan
        alpha = math.nan
        ring = False
        if qz > 0.0:
            t = (det_z - z) / qz
            X = x + qx * t
            Y = y + qy * t
            alpha = math.atan2(Y, X)
            rr = math.hypot(X, Y)
            ring = r1 <= rr <= r2
        ok = (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)
              and math.isfinite(qx) and math.isfinite(qy))
        out[i, 0] = x
        out[i, 1] = y
        out[i, 2] = z
        out[i, 3] = qx
        out[i, 4] = qy
        out[i, 5] = w
        out[i, 6] = theta
        out[i, 7] = alpha
        out[i, 8] = X
        out[i, 9] = Y
        out[i, 10] = 1.0 if (ok and ring and w >= w_min) else 0.0
        out[i, 11] = 0.0 if ok else 1.0


def close_mass_shell(q_perp, q_minus, u):
    """Return (qz, q0) on the dressed mass shell.

    ``q_perp`` is a 2-vector (or an array with trailing axis 2).  With q_minus
    fixed, q0 - qz = q_minus and q0^2 - qz^2 - q_perp^2 = 1 + 2U give

        qz = [(1 + q_perp^2 + 2U) / q_minus - q_minus] / 2.
    """
    q_minus = np.asarray(q_minus, float)
    if np.any(q_minus <= 0):
        raise DomainError("q_minus must be > 0")
    qp = np.asarray(q_perp, float)
    qp2 = np.sum(qp * qp, axis=-1)
    qz = 0.5 * ((1.0 + qp2 + 2.0 * np.asarray(u, float)) / q_minus - q_minus)
    q0 = qz + q_minus
    if np.ndim(qz) == 0:
        return float(qz), float(q0)
    return qz, q0


def _kernel_args(params: SimParams):
    return (
        float(params.delta),
        float(params.omega_tau),
        float(params.amplitude),
        float(params.mu),
        ENVELOPE_CODES[params.envelope],
    )


def eom_rhs(state: PonderomotiveState, params: SimParams) -> np.ndarray:
    """d(x, y, z, qx, qy)/d phi at ``state``."""
    if not state.q_minus > 0:
        raise DomainError("q_minus must be > 0")
    delta, omega_tau, amp0, mu, kind = _kernel_args(params)
    amp = amp0 * envelope_sq(state.phi / omega_tau, kind)
    r = _rhs(state.x, state.y, state.z, state.qx, state.qy, amp, state.q_minus, delta, mu)
    return np.array(r[:5])


def check_step(step: float, params: SimParams) -> None:
    if not step > 0:
        raise StepError("step must be > 0")
    if step >= params.omega_tau / 10.0:
        raise StepError(
            f"step {step} too coarse for omega_tau = {params.omega_tau}"
        )


def integrate(
    state0: PonderomotiveState,
    params: SimParams,
    step: float = DEFAULT_STEP,
    phi_span: tuple[float, float] | None = None,
    record: bool = False,
) -> TrajectoryResult:
    """Fixed-step RK4 from ``phi_span[0]`` to ``phi_span[1]``.

    The default span is the envelope support [-omega_tau, omega_tau].  The last
    step is shortened to land on the end point.  With ``record`` the returned
    ``history`` has one row per step, columns ``HISTORY_COLUMNS``.
    """
    check_step(step, params)
    if not state0.q_minus > 0:
        raise DomainError("q_minus must be > 0")
    wt = params.omega_tau
    phi0, phi1 = (-wt, wt) if phi_span is None else map(float, phi_span)
    if phi0 > -wt or phi1 < wt:
        raise ValueError("phi_span must cover the envelope support")
    delta, omega_tau, amp0, mu, kind = _kernel_args(params)
    qm = state0.q_minus
    x, y, z, qx, qy, worst, n, hist = _integrate_path(
        state0.x, state0.y, state0.z, state0.qx, state0.qy, qm,
        delta, omega_tau, amp0, mu, kind, float(step), phi0, phi1, bool(record),
    )
    exit_state = PonderomotiveState(phi1, x, y, z, qx, qy, qm)
    w, theta = observables(exit_state, params)
    lz0 = state0.x * state0.qy - state0.y * state0.qx
    return TrajectoryResult(
        exit_state=exit_state,
        kinetic_energy=w,
        polar_angle=theta,
        q_minus_drift=exit_state.q_minus - state0.q_minus,
        lz_drift=(x * qy - y * qx) - lz0,
        closure_residual=worst,
        step_count=int(n),
        history=hist if record else None,
    )


def observables(exit_state: PonderomotiveState, params: SimParams) -> tuple[float, float]:
    """Final kinetic energy W [MeV] and polar angle theta [rad] outside the pulse."""
    if abs(exit_state.phi) < params.omega_tau:
        raise StateError("observables need a field-free state (|phi| >= omega_tau)")
    qz, q0 = close_mass_shell((exit_state.qx, exit_state.qy), exit_state.q_minus, 0.0)
    return (q0 - 1.0) * MC2_MEV, math.atan2(exit_state.q_perp, qz)


def theta_from_energy(w_mev, q_minus):
    """Polar angle fixed by kinetic energy and conserved q_minus (free motion).

    tan(theta) = sqrt(q_minus (2 q0 - q_minus) - 1) / (q0 - q_minus).
    """
    q0 = 1.0 + np.asarray(w_mev, float) / MC2_MEV
    qp2 = np.maximum(q_minus * (2.0 * q0 - q_minus) - 1.0, 0.0)
    return np.arctan2(np.sqrt(qp2), q0 - q_minus)


def detector_crossing(exit_state: PonderomotiveState, params: SimParams):
    """Straight-line crossing (X, Y) of the detector plane, in units of R, or None."""
    if abs(exit_state.phi) < params.omega_tau:
        raise StateError("ballistic flight needs a field-free state")
    qz, _ = close_mass_shell((exit_state.qx, exit_state.qy), exit_state.q_minus, 0.0)
    if qz <= 0:
        return None
    t = (params.detector.z - exit_state.z) / qz
    return exit_state.x + exit_state.qx * t, exit_state.y + exit_state.qy * t


def ballistic_hit(exit_state: PonderomotiveState, params: SimParams) -> DetectorHit | None:
    """Ring hit in cm with azimuth alpha, or None when the electron misses."""
    crossing = detector_crossing(exit_state, params)
    if crossing is None:
        return None
    X, Y = crossing
    det = params.detector
    if not det.r1 <= math.hypot(X, Y) <= det.r2:
        return None
    f = params.focal_radius_um
    return DetectorHit(r_to_cm(X, f), r_to_cm(Y, f), math.atan2(Y, X))


def integrate_batch(x0, y0, z0, params: SimParams, step: float = DEFAULT_STEP) -> np.ndarray:
    """Integrate many injections; returns an (N, len(EXIT_COLUMNS)) array.

    Every row depends only on its own initial position, so splitting a batch
    into chunks never changes the numbers.
    """
    check_step(step, params)
    x0, y0, z0 = (np.ascontiguousarray(np.broadcast_to(v, np.shape(x0)), dtype=float)
                  for v in (x0, y0, z0))
    out = np.empty((x0.size, len(EXIT_COLUMNS)))
    delta, omega_tau, amp0, mu, kind = _kernel_args(params)
    det = params.detector
    _integrate_batch(
        x0.ravel(), y0.ravel(), z0.ravel(), float(params.q_minus0),
        delta, omega_tau, amp0, mu, kind, float(step),
        float(det.z), float(det.r1), float(det.r2), float(params.w_threshold_mev), out,
    )
    return out


def with_mu(params: SimParams, mu: float) -> SimParams:
    return replace(params, mu=float(mu))
