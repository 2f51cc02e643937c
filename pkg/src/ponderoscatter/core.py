"""Physical configuration and the derived dimensionless parameter set.

Internal units: m = c = 1.  Momenta are in units of m*c, energies in m*c^2,
transverse and longitudinal positions in units of the focal radius R, and the
laser phase phi is dimensionless.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, asdict

MC2_MEV = 0.511
UM_PER_CM = 1.0e4

ENVELOPES = ("sin2", "none")


class ParameterError(ValueError):
    """Invalid or inconsistent physical parameters."""


class DomainError(ValueError):
    """A quantity left its domain of definition (e.g. q_minus <= 0)."""


class StepError(ValueError):
    """Integration step too coarse for the pulse envelope."""


class StateError(ValueError):
    """Operation requested on a state where it is undefined."""


class ConfigError(ValueError):
    """Ensemble or run configuration rejected."""


class EmptyError(ValueError):
    """No data to reduce."""


@dataclass(frozen=True)
class PhysicalConfig:
    """Laboratory-unit description of one run.

    Exactly one of ``eta0`` and ``a`` may be given; if neither is, ``a = 3``.
    """

    wavelength_um: float = 1.0
    focal_radius_um: float = 10.0
    omega_tau: float = 480.0
    eta0: float | None = None
    a: float | None = None
    mu: float = -1.55
    electron_kev: float = 10.0
    detector_z_cm: float = 11.66
    detector_r1_cm: float = 8.99
    detector_r2_cm: float = 9.89
    smoothing_deg: float = 5.5
    w_threshold_mev: float = 0.9
    envelope: str = "sin2"

    def intensity(self) -> float:
        """Peak intensity parameter eta0 (a / sqrt(2) when given as ``a``)."""
        if self.eta0 is not None and self.a is not None:
            raise ParameterError("give either eta0 or a, not both")
        if self.eta0 is not None:
            return float(self.eta0)
        a = 3.0 if self.a is None else float(self.a)
        return a / math.sqrt(2.0)

    def validate(self) -> None:
        positive = {
            "wavelength_um": self.wavelength_um,
            "focal_radius_um": self.focal_radius_um,
            "omega_tau": self.omega_tau,
            "electron_kev": self.electron_kev,
            "smoothing_deg": self.smoothing_deg,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value}")
        if not math.isfinite(self.mu):
            raise ParameterError("mu must be finite")
        if not 0 < self.detector_r1_cm < self.detector_r2_cm < self.detector_z_cm:
            raise ParameterError("need 0 < detector_r1 < detector_r2 < detector_z")
        if self.w_threshold_mev < 0:
            raise ParameterError("w_threshold_mev must be >= 0")
        if self.envelope not in ENVELOPES:
            raise ParameterError(f"envelope must be one of {ENVELOPES}")
        eta0 = self.intensity()
        if not (math.isfinite(eta0) and eta0 >= 0):
            raise ParameterError("intensity must be finite and >= 0")


@dataclass(frozen=True)
class Detector:
    """Ring detector in units of R: plane z, inner/outer radius."""

    z: float
    r1: float
    r2: float

    def to_cm(self, focal_radius_um: float) -> tuple[float, float, float]:
        scale = focal_radius_um / UM_PER_CM
        return self.z * scale, self.r1 * scale, self.r2 * scale


@dataclass(frozen=True)
class SimParams:
    delta: float
    delta_prime: float
    eta0: float
    mu: float
    omega_tau: float
    gamma0: float
    beta0: float
    q_minus0: float
    rayleigh_over_r: float
    detector: Detector
    focal_radius_um: float
    w_threshold_mev: float = 0.9
    smoothing_deg: float = 5.5
    envelope: str = "sin2"
    mc2_mev: float = field(default=MC2_MEV, init=False)

    @property
    def amplitude(self) -> float:
        """Peak potential eta0^2 / 2 in units of m."""
        return 0.5 * self.eta0 * self.eta0

    def as_dict(self) -> dict:
        return asdict(self)


def cm_to_r(length_cm: float, focal_radius_um: float) -> float:
    return length_cm * UM_PER_CM / focal_radius_um


def r_to_cm(length_r: float, focal_radius_um: float) -> float:
    return length_r * focal_radius_um / UM_PER_CM


def free_electron(kinetic_kev: float) -> tuple[float, float, float]:
    """Return (gamma, beta, q_minus) of an electron with the given kinetic energy.

    q_minus = gamma * (1 - beta) is evaluated as 1 / (gamma * (1 + beta)) to
    avoid cancellation at low energy.
    """
    if not kinetic_kev > 0:
        raise ParameterError("electron kinetic energy must be > 0")
    gamma = 1.0 + kinetic_kev / (MC2_MEV * 1.0e3)
    beta = math.sqrt(1.0 - 1.0 / (gamma * gamma))
    return gamma, beta, 1.0 / (gamma * (1.0 + beta))


def derive_sim_params(cfg: PhysicalConfig) -> SimParams:
    cfg.validate()
    delta = cfg.wavelength_um / (2.0 * math.pi * cfg.focal_radius_um)
    delta_prime = 1.0 / cfg.omega_tau
    if delta_prime > delta:
        raise ParameterError(
            f"pulse too short: 1/omega_tau = {delta_prime:.4g} exceeds "
            f"1/(omega R) = {delta:.4g}"
        )
    if delta > 0.1:
        warnings.warn(
            f"1/(omega R) = {delta:.3g} is not small; the averaged description "
            "loses accuracy",
            stacklevel=2,
        )
    gamma0, beta0, q_minus0 = free_electron(cfg.electron_kev)
    det = Detector(
        z=cm_to_r(cfg.detector_z_cm, cfg.focal_radius_um),
        r1=cm_to_r(cfg.detector_r1_cm, cfg.focal_radius_um),
        r2=cm_to_r(cfg.detector_r2_cm, cfg.focal_radius_um),
    )
    return SimParams(
        delta=delta,
        delta_prime=delta_prime,
        eta0=cfg.intensity(),
        mu=float(cfg.mu),
        omega_tau=float(cfg.omega_tau),
        gamma0=gamma0,
        beta0=beta0,
        q_minus0=q_minus0,
        rayleigh_over_r=1.0 / delta,
        detector=det,
        focal_radius_um=float(cfg.focal_radius_um),
        w_threshold_mev=float(cfg.w_threshold_mev),
        smoothing_deg=float(cfg.smoothing_deg),
        envelope=cfg.envelope,
    )


def derive_initial_state(params: SimParams, injection):
    """Electron at ``injection = (x0, y0, z0)`` (units of R) as the pulse front arrives.

    The leading edge of the envelope, phi = -omega_tau, defines the injection
    instant.  Transverse momentum is zero and q_minus is the free value.
    """
    from .dynamics import PonderomotiveState

    x0, y0, z0 = (float(v) for v in injection)
    if not all(math.isfinite(v) for v in (x0, y0, z0)):
        raise ParameterError("injection position must be finite")
    return PonderomotiveState(
        phi=-params.omega_tau,
        x=x0,
        y=y0,
        z=z0,
        qx=0.0,
        qy=0.0,
        q_minus=params.q_minus0,
    )
