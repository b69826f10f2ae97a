"""Initial data and spinor observables.

Gaussian spinor packets, energy eigen-packets and their mixtures; the
Cayley-Klein decomposition (R, Theta, Omega, Phi) with the derived Bloch
vector; local Bohmian velocity/momentum/energy; and operator expectation
values <P> and <H> by spectral quadrature.

Conventions
-----------
A packet is ``psi(s) = e^{i*phase0/2} * (cos(theta0/2) e^{i*omega0/2},
sin(theta0/2) e^{-i*omega0/2})^T * f_sigma(s) e^{i*k0*s}`` where
``f_sigma(x) = (2*pi*sigma^2)^{-1/4} exp(-x^2 / (4*sigma^2))``, so that
|psi|^2 is the N(0, sigma^2) density.

Energy eigen-packets carry the plane-wave eigenspinor angles
``theta_plus = atan2(m, k)`` (so tan(theta_plus) = m/k), ``omega_plus = 0``
and ``theta_minus = pi - theta_plus``, ``omega_minus = pi``.  These
diagonalize the free Hamiltonian H = ((P, m), (m, -P)) and give <H> = +-E.

The mixing angle ``vartheta`` appears in two distinct constructions:
``mixed_energy_eigen`` combines the literal eigen-spinors, while
``macroscopic`` uses the component mixture ``(cos(vartheta/2),
sin(vartheta/2))`` that the stationary-phase formulas are written in
(vartheta = 0 is the pure upper-component packet).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import (
    DomainError,
    IntegrationError,
    InfiniteMomentumError,
    NodeError,
    UndefinedSecantError,
    ValidationError,
)

__all__ = [
    "Spinor",
    "CayleyKlein",
    "PacketParams",
    "gaussian_amplitude",
    "make_initial_packet",
    "spinor_amplitudes",
    "cayley_klein",
    "cayley_klein_series",
    "spinor_from_cayley_klein",
    "bloch_vector",
    "bohmian_observables",
    "expected_momentum",
    "expected_energy",
    "truncation_half_width",
    "spa_regime_report",
]


# =============================================================================
# Value types
# =============================================================================

@dataclass(frozen=True)
class Spinor:
    """Two-component spinor value (scalar or array-valued components)."""

    minus: complex
    plus: complex

    @property
    def density(self):
        return np.abs(self.minus) ** 2 + np.abs(self.plus) ** 2

    @property
    def current(self):
        return np.abs(self.minus) ** 2 - np.abs(self.plus) ** 2

    @property
    def velocity(self):
        rho = self.density
        return self.current / rho


@dataclass(frozen=True)
class CayleyKlein:
    """Cayley-Klein parameters (R, Theta, Omega, Phi) of a spinor.

    theta in [0, pi]; omega wrapped to [-pi, pi); phi carries the matching
    2*pi shift so the reconstruction is exact (phi itself is only defined
    up to the usual phase ambiguity).
    """

    r: float
    theta: float
    omega: float
    phi: float


@dataclass(frozen=True)
class PacketParams:
    """Initial-data descriptor for a Gaussian spinor packet.

    sigma : position standard deviation (> 0)
    k0    : mean momentum (macroscopic runs use k0 = omega * p0)
    theta0, omega0 : initial Bloch angles, theta0 in [0, pi], omega0 in [0, 2*pi)
    mass  : microscopic m, or the large parameter omega in macroscopic mode
    phase0 : overall phase (Phi of the initial spinor), nonzero only for mixtures
    energy_sign : +-1 when the packet is an energy eigen-packet, else None
    mixing_theta : the mixing angle vartheta when built by a mixture constructor
    """

    sigma: float
    k0: float
    theta0: float
    omega0: float
    mass: float
    phase0: float = 0.0
    energy_sign: Optional[int] = None
    mixing_theta: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if not np.isfinite(self.k0):
            raise ValidationError("k0 must be finite")
        if not (0.0 <= self.theta0 <= np.pi):
            raise ValidationError(f"theta0 must lie in [0, pi], got {self.theta0}")
        if not (0.0 <= self.omega0 < 2 * np.pi):
            raise ValidationError(f"omega0 must lie in [0, 2*pi), got {self.omega0}")
        if not (np.isfinite(self.mass) and self.mass >= 0):
            raise ValidationError(f"mass must be >= 0, got {self.mass}")
        if self.energy_sign is not None:
            expect = _eigen_angles(self.k0, self.mass, self.energy_sign)
            if (abs(self.theta0 - expect[0]) > 1e-12
                    or abs(self.omega0 - expect[1]) > 1e-12):
                raise ValidationError(
                    "energy eigen-packet angles must match the plane-wave "
                    f"eigenspinor: expected (theta0, omega0) = {expect}"
                )

    # -- alternative constructors ---------------------------------------------

    @classmethod
    def energy_eigen(cls, sigma: float, k0: float, mass: float, sign: int = +1):
        """Gaussian packet aligned with the +-E plane-wave eigenspinor at k0."""
        if mass <= 0:
            raise ValidationError("energy eigen-packet requires mass > 0")
        if sign not in (+1, -1):
            raise ValidationError("sign must be +1 or -1")
        theta0, omega0 = _eigen_angles(k0, mass, sign)
        return cls(sigma=sigma, k0=k0, theta0=theta0, omega0=omega0, mass=mass,
                   energy_sign=sign)

    @classmethod
    def mixed_energy_eigen(cls, sigma: float, k0: float, mass: float, vartheta: float):
        """cos(vartheta/2) * (+E eigen-packet) + sin(vartheta/2) * (-E eigen-packet)."""
        if not (0.0 <= vartheta <= np.pi):
            raise ValidationError("vartheta must lie in [0, pi]")
        plus = cls.energy_eigen(sigma, k0, mass, +1)
        minus = cls.energy_eigen(sigma, k0, mass, -1)
        cm = (np.cos(vartheta / 2) * spinor_amplitudes(plus)[0]
              + np.sin(vartheta / 2) * spinor_amplitudes(minus)[0])
        cp = (np.cos(vartheta / 2) * spinor_amplitudes(plus)[1]
              + np.sin(vartheta / 2) * spinor_amplitudes(minus)[1])
        ck = cayley_klein(Spinor(cm, cp))
        omega0 = ck.omega % (2 * np.pi)
        # The wrap from [-pi, pi) to [0, 2*pi) shifts phi by the same 2*pi.
        phase0 = ck.phi + (2 * np.pi if ck.omega < 0 else 0.0)
        return cls(sigma=sigma, k0=k0, theta0=ck.theta, omega0=omega0, mass=mass,
                   phase0=phase0, mixing_theta=vartheta)

    @classmethod
    def macroscopic(cls, sigma: float, p0: float, omega: float, vartheta: float = 0.0):
        """Macroscopic-variable packet: momentum k = omega*p0, mass parameter omega.

        The spinor is the component mixture (cos(vartheta/2), sin(vartheta/2)),
        i.e. the basis the stationary-phase approximation is stated in;
        vartheta = 0 gives the pure upper-component data.
        """
        if not (0.0 <= vartheta <= np.pi):
            raise ValidationError("vartheta must lie in [0, pi]")
        if omega <= 0:
            raise ValidationError("omega must be > 0")
        return cls(sigma=sigma, k0=omega * p0, theta0=vartheta, omega0=0.0,
                   mass=omega, mixing_theta=vartheta)

    def rescaled(self, length: float) -> "PacketParams":
        """Rescale to macroscopic variables with characteristic length L.

        Positions and times shrink by L while momenta and the mass parameter
        grow by L, leaving the dynamics invariant.
        """
        if length <= 0:
            raise ValidationError("length must be > 0")
        return replace(self, sigma=self.sigma / length, k0=self.k0 * length,
                       mass=self.mass * length)


def _eigen_angles(k0: float, mass: float, sign: int) -> Tuple[float, float]:
    theta_plus = float(np.arctan2(mass, k0))
    if sign > 0:
        return theta_plus, 0.0
    return np.pi - theta_plus, np.pi


# =============================================================================
# Packet construction
# =============================================================================

def gaussian_amplitude(sigma: float, x):
    """f_sigma(x): square root of the N(0, sigma^2) density."""
    return (2 * np.pi * sigma**2) ** (-0.25) * np.exp(-np.asarray(x) ** 2 / (4 * sigma**2))


def spinor_amplitudes(p: PacketParams) -> Tuple[complex, complex]:
    """Constant spinor direction (c_minus, c_plus) of the initial data."""
    phase = np.exp(0.5j * p.phase0)
    cm = phase * np.cos(p.theta0 / 2) * np.exp(0.5j * p.omega0)
    cp = phase * np.sin(p.theta0 / 2) * np.exp(-0.5j * p.omega0)
    return complex(cm), complex(cp)


def make_initial_packet(p: PacketParams) -> Callable[[np.ndarray], Spinor]:
    """Return s -> Spinor evaluating the initial data (vectorized over s)."""
    cm, cp = spinor_amplitudes(p)
    sigma, k0 = p.sigma, p.k0

    def packet(s):
        envelope = gaussian_amplitude(sigma, s) * np.exp(1j * k0 * np.asarray(s))
        return Spinor(minus=cm * envelope, plus=cp * envelope)

    return packet


def spa_regime_report(p: PacketParams, factor: float = 10.0) -> dict:
    """Check 1/(omega*|p0|) << sigma << 1 for macroscopic/SPA use; warn, never reject."""
    wavelength = np.inf if p.k0 == 0 else 1.0 / abs(p.k0)
    lhs_ok = bool(p.sigma * abs(p.k0) >= factor)
    rhs_ok = bool(p.sigma * factor <= 1.0)
    report = {
        "wavelength": wavelength,
        "sigma": p.sigma,
        "sigma_over_wavelength": p.sigma * abs(p.k0),
        "sigma_vs_macro_scale": p.sigma,
        "wavelength_ok": lhs_ok,
        "macro_ok": rhs_ok,
        "ok": lhs_ok and rhs_ok,
    }
    if not report["ok"]:
        warnings.warn(
            "packet violates the SPA regime 1/(omega*p0) << sigma << 1: "
            f"sigma*|k0| = {report['sigma_over_wavelength']:.3g}, sigma = {p.sigma:.3g}",
            stacklevel=2,
        )
    return report


# =============================================================================
# Cayley-Klein decomposition and Bloch observables
# =============================================================================

def cayley_klein(psi: Spinor) -> CayleyKlein:
    """Decompose a spinor into (R, Theta, Omega, Phi)."""
    am = np.abs(psi.minus)
    ap = np.abs(psi.plus)
    r2 = am * am + ap * ap
    if r2 == 0:
        raise NodeError("zero spinor: Cayley-Klein angles undefined")
    arg_m = float(np.angle(psi.minus))
    arg_p = float(np.angle(psi.plus))
    omega = arg_m - arg_p
    phi = arg_m + arg_p
    if omega < -np.pi:
        omega += 2 * np.pi
        phi += 2 * np.pi
    elif omega >= np.pi:
        omega -= 2 * np.pi
        phi -= 2 * np.pi
    return CayleyKlein(
        r=float(np.sqrt(r2)),
        theta=float(2 * np.arctan2(ap, am)),
        omega=float(omega),
        phi=float(phi),
    )


def cayley_klein_series(minus: np.ndarray, plus: np.ndarray) -> dict:
    """Cayley-Klein parameters along a path, with Omega and Phi unwrapped by continuity.

    The component phases are unwrapped first, so Omega = arg(psi-) - arg(psi+)
    and Phi = arg(psi-) + arg(psi+) vary continuously and dPhi/dt is well
    defined along a trajectory.
    """
    minus = np.asarray(minus)
    plus = np.asarray(plus)
    r = np.sqrt(np.abs(minus) ** 2 + np.abs(plus) ** 2)
    theta = 2 * np.arctan2(np.abs(plus), np.abs(minus))
    arg_m = np.unwrap(np.angle(minus))
    arg_p = np.unwrap(np.angle(plus))
    return {"r": r, "theta": theta, "omega": arg_m - arg_p, "phi": arg_m + arg_p}


def spinor_from_cayley_klein(ck: CayleyKlein) -> Spinor:
    """Rebuild the spinor R e^{i Phi/2} (cos(Theta/2) e^{i Omega/2}, sin(Theta/2) e^{-i Omega/2})."""
    phase = ck.r * np.exp(0.5j * ck.phi)
    return Spinor(
        minus=phase * np.cos(ck.theta / 2) * np.exp(0.5j * ck.omega),
        plus=phase * np.sin(ck.theta / 2) * np.exp(-0.5j * ck.omega),
    )


def bloch_vector(ck: CayleyKlein) -> Tuple[float, float, float]:
    """Unit vector (sin(Theta)cos(Omega), sin(Theta)sin(Omega), cos(Theta)).

    The third component equals the Bohmian velocity of the spinor.
    """
    st = np.sin(ck.theta)
    return (float(st * np.cos(ck.omega)), float(st * np.sin(ck.omega)),
            float(np.cos(ck.theta)))


def bohmian_observables(ck: CayleyKlein, mass: float) -> Tuple[float, float, float]:
    """Local Bohmian (v, p, E) = (cos Theta, m cot(Theta) sec(Omega), m csc(Theta) sec(Omega))."""
    if ck.theta == 0.0 or ck.theta == np.pi:
        raise InfiniteMomentumError("theta in {0, pi}: Bohmian p and E diverge")
    if ck.omega == np.pi / 2 or ck.omega == -np.pi / 2:
        raise UndefinedSecantError("omega = +-pi/2: sec(Omega) undefined")
    st = np.sin(ck.theta)
    ct = np.cos(ck.theta)
    sec = 1.0 / np.cos(ck.omega)
    if st == 0.0:
        raise InfiniteMomentumError("sin(theta) underflowed to zero")
    v = float(ct)
    p = float(mass * (ct / st) * sec)
    e = float(mass * (1.0 / st) * sec)
    return v, p, e


# =============================================================================
# Operator expectation values
# =============================================================================

def truncation_half_width(p: PacketParams, t: float) -> float:
    """Half-width L for expectation-value grids: Gaussian tails are negligible beyond."""
    return max(10 * p.sigma, abs(p.k0) * t + 10 * p.sigma + t)


def _spinor_on_grid(psi_fn, s):
    out = psi_fn(s)
    if isinstance(out, Spinor):
        return np.asarray(out.minus, dtype=complex), np.asarray(out.plus, dtype=complex)
    minus, plus = out
    return np.asarray(minus, dtype=complex), np.asarray(plus, dtype=complex)


def _spectral_expectation(psi_fn, half_width, quad_tol, mass=None, max_points=2**17):
    """<P> (mass None) or <H> on a periodic grid, refined until stable."""
    n = 2048
    prev = None
    while n <= max_points:
        s = -half_width + (2 * half_width / n) * np.arange(n)
        ds = 2 * half_width / n
        minus, plus = _spinor_on_grid(psi_fn, s)
        k = 2 * np.pi * np.fft.fftfreq(n, d=ds)
        fm = np.fft.fft(minus)
        fp = np.fft.fft(plus)
        if mass is None:
            val = ds / n * float(np.sum(k * (np.abs(fm) ** 2 + np.abs(fp) ** 2)))
        else:
            kin = ds / n * float(np.sum(k * (np.abs(fm) ** 2 - np.abs(fp) ** 2)))
            cross = ds * float(np.sum(2 * np.real(np.conj(minus) * plus)))
            val = kin + mass * cross
        if prev is not None and abs(val - prev) <= quad_tol:
            return val, abs(val - prev)
        prev = val
        n *= 2
    raise IntegrationError(
        f"expectation value did not converge to {quad_tol:g}",
        partial=prev,
        residual=abs(val - prev),
    )


def expected_momentum(psi_fn, quad_tol: float, half_width: float) -> float:
    """<psi, P psi> with P = -i d/ds, by spectral differentiation on [-L, L]."""
    if quad_tol <= 0:
        raise DomainError("quad_tol must be > 0")
    val, _ = _spectral_expectation(psi_fn, half_width, quad_tol)
    return val


def expected_energy(psi_fn, mass: float, quad_tol: float, half_width: float) -> float:
    """<psi, H psi> with H = ((P, m), (m, -P)), by spectral differentiation on [-L, L]."""
    if quad_tol <= 0:
        raise DomainError("quad_tol must be > 0")
    val, _ = _spectral_expectation(psi_fn, half_width, quad_tol, mass=mass)
    return val
