"""Ponderomotive potential of a focused, linearly polarized Gaussian pulse.

Coordinates: ``rx, ry`` are transverse positions in units of the focal radius
R; ``zeta`` is the diffraction coordinate z / L with L = omega R^2, so the beam
parameter is ``w = 1 + 2i zeta``.  Potentials are in units of m (m c^2).

The azimuthal factor cos(2 psi), tan(psi) = rx / ry, is written as
(ry^2 - rx^2) / s with s = rx^2 + ry^2, and F2 = s * G2, which removes the
apparent singularity on the beam axis.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numba
import numpy as np

ENVELOPE_CODES = {"sin2": 0, "none": 1}


class FocalFunctions(NamedTuple):
    F1: np.ndarray | complex
    G2: np.ndarray | complex


class PotentialSample(NamedTuple):
    U: np.ndarray | float
    grad: tuple


@numba.njit(cache=True)
def envelope_sq(u, kind):
    """Square of the temporal envelope at phase ratio ``u = phi / omega_tau``."""
    if abs(u) >= 1.0:
        return 0.0
    if kind == 1:
        return 1.0
    c = math.cos(0.5 * math.pi * u)
    c2 = c * c
    return c2 * c2


@numba.njit(cache=True)
def focal_terms(s, zeta):
    """F1, G2 and their s-derivatives at squared radius ``s``."""
    iw = 1.0 / complex(1.0, 2.0 * zeta)
    e = np.exp(-s * iw)
    iw2 = iw * iw
    iw3 = iw2 * iw
    f1 = iw2 * (1.0 - s * iw) * e
    g2 = -iw3 * e
    df1 = -iw3 * (2.0 - s * iw) * e
    dg2 = -g2 * iw
    return f1, g2, df1, dg2


@numba.njit(cache=True)
def potential_kernel(rx, ry, zeta, amp, mu):
    """Return (U, dU/drx, dU/dry); ``amp`` is eta0^2 g^2 / 2.

    Only |exp(-s/w)|^2 enters U, so with 1/w = ar + i ai and d = |w|^-2 the
    bracket reduces to real arithmetic:

        B = K [1 - 2 s ar + s^2 d (1 + mu^2) - 2 mu c2 (ar - s d)],
        K = d^2 exp(-2 s ar),  c2 = ry^2 - rx^2.
    """
    s = rx * rx + ry * ry
    c2 = ry * ry - rx * rx
    d = 1.0 / (1.0 + 4.0 * zeta * zeta)
    ar = d
    k = d * d * math.exp(-2.0 * s * ar)
    sd = s * d
    r = ar - sd
    m2 = 1.0 + mu * mu
    q = 1.0 - 2.0 * s * ar + s * sd * m2
    b = q - 2.0 * mu * c2 * r
    # d/ds of the bracket with c2 held fixed, including K' = -2 ar K
    dbds = k * (-2.0 * ar * b - 2.0 * ar + 2.0 * sd * m2 + 2.0 * mu * c2 * d)
    kr = 4.0 * mu * k * r
    gx = dbds * (2.0 * rx) + kr * rx
    gy = dbds * (2.0 * ry) - kr * ry
    return amp * (k * b), amp * gx, amp * gy


@numba.njit(cache=True)
def _eval_many(rx, ry, zeta, phi, eta0, mu, omega_tau, kind, out):
    amp0 = 0.5 * eta0 * eta0
    for i in range(rx.size):
        amp = amp0 * envelope_sq(phi[i] / omega_tau, kind)
        u, gx, gy = potential_kernel(rx[i], ry[i], zeta[i], amp, mu)
        out[0, i] = u
        out[1, i] = gx
        out[2, i] = gy


@numba.njit(cache=True)
def _focal_many(s, zeta, f1, g2):
    for i in range(s.size):
        a, b, _, _ = focal_terms(s[i], zeta[i])
        f1[i] = a
        g2[i] = b


def envelope(u, kind: str = "sin2"):
    """Temporal envelope g(u), u = phi / omega_tau.

    ``sin2``: cos^2(pi u / 2) on |u| < 1 and zero outside, so g(0) = 1 and the
    total phase span of the pulse is 2 omega_tau.  ``none``: flat top on the
    same support.
    """
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    if kind == "none":
        g = np.where(inside, 1.0, 0.0)
    elif kind == "sin2":
        g = np.where(inside, np.cos(0.5 * np.pi * u) ** 2, 0.0)
    else:
        raise ValueError(f"unknown envelope {kind!r}")
    return g[()] if g.ndim == 0 else g


def eval_focal_functions(s, zeta) -> FocalFunctions:
    """Gaussian-beam focal functions F1 and G2 = F2 / s.

    F1 = w^-2 (1 - s/w) exp(-s/w),  G2 = -w^-3 exp(-s/w),  w = 1 + 2i zeta.
    """
    s, zeta = np.broadcast_arrays(np.asarray(s, float), np.asarray(zeta, float))
    if np.any(s < 0):
        raise ValueError("s = rho^2 must be >= 0")
    shape = s.shape
    f1 = np.empty(s.size, complex)
    g2 = np.empty(s.size, complex)
    _focal_many(np.ascontiguousarray(s).ravel(), np.ascontiguousarray(zeta).ravel(), f1, g2)
    if not shape:
        return FocalFunctions(complex(f1[0]), complex(g2[0]))
    return FocalFunctions(f1.reshape(shape), g2.reshape(shape))


def _evaluate(rx, ry, zeta, phi, params):
    arrs = np.broadcast_arrays(*(np.asarray(v, float) for v in (rx, ry, zeta, phi)))
    shape = arrs[0].shape
    flat = [np.ascontiguousarray(a).ravel() for a in arrs]
    out = np.empty((3, flat[0].size))
    _eval_many(
        *flat,
        float(params.eta0),
        float(params.mu),
        float(params.omega_tau),
        ENVELOPE_CODES[params.envelope],
        out,
    )
    if not shape:
        return out[0, 0], out[1, 0], out[2, 0]
    return tuple(o.reshape(shape) for o in out)


def potential(rx, ry, zeta, phi, params):
    """Ponderomotive potential U (units of m); broadcasts over array arguments."""
    return _evaluate(rx, ry, zeta, phi, params)[0]


def potential_gradient(rx, ry, zeta, phi, params):
    """Analytic transverse gradient (dU/drx, dU/dry)."""
    _, gx, gy = _evaluate(rx, ry, zeta, phi, params)
    return gx, gy


def potential_sample(rx, ry, zeta, phi, params) -> PotentialSample:
    u, gx, gy = _evaluate(rx, ry, zeta, phi, params)
    return PotentialSample(u, (gx, gy))
