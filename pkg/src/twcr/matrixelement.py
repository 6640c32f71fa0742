"""Twisted-photon emission amplitude for a channeled-electron transition.

The reduced amplitude is assembled in closed form. Per helicity component
m_s and cone-azimuth harmonic n of the dipole current contracted with the
polarization basis, the azimuth and longitudinal integrals collapse to

    m_fi = 2 pi sum_{m_s = -1..1} d^1_{m_s Lam}(theta_k)
               sum_{n = -2..2} c_n^{(m_s)} i^{m_o} e^{-i m_o Phi}
               intJ_{m_o}(Delta - A, B),        m_o = m - m_s - n,

where intJ is the closed form of the semi-infinite longitudinal integral

    intJ_q = int_0^inf e^{i Z (Delta - A)} J_q(Z B) dZ
           = H[Delta - A] * (i / S) * (i B / (S + Delta - A))^q,
    S = sqrt((Delta - A)^2 - B^2),
    A = (omega/c) cos Theta cos theta_k,  B = (omega/c) sin Theta sin theta_k,

with intJ_{-q} = (-1)^q intJ_q. The region |Delta - A| <= B (evanescent
longitudinal matching, where the closed form turns singular) contributes
zero and is counted as an approximation flag by the callers.

Conventions: the azimuth and longitudinal phases are the ones the printed
closed forms are stated in (e^{-i(m - m_s) phi}, e^{-i kappa_Z Z},
e^{+i Delta Z}; the matrix-element display carries the opposite signs but
only this choice assembles into the closed form above with its
m_o = m - m_s - n bookkeeping). The polarization basis is the printed
crystal-frame set eps_CR^{m_s} = e^{-i m_s Phi} R(Theta, Phi) chi_{m_s},
kept unconjugated. That basis is offset in cone azimuth from the wave
vector entering kappa_Z (see geometry), so the integrand is not exactly
transverse; the residual longitudinal admixture is what breaks the
distributions' cylindrical symmetry at large cone angles, as the reported
maps require. The assembled closed form is validated against an
independent numerical quadrature oracle in the same convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channeling import Transition
from .constants import C_LIGHT
from .geometry import EmissionGeometry, WaveVectorCrystal, ComplexVec3, Frame
from .specfun import bessel_j, wigner_d1

_SQRT2 = math.sqrt(2.0)
_HARMONICS = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class ZIntegralParams:
    """Arguments of the longitudinal closed form (all wave numbers rad/m)."""

    m_o: int
    delta: float
    a: float
    b: float

    def __post_init__(self):
        if self.b < 0.0:
            raise ValueError("b must be >= 0")


@dataclass(frozen=True)
class AmplitudeTerm:
    """One (m_s, n) term of the harmonic expansion of the amplitude:
    value = prefactor * i^{m_o} * exp(i f) * intJ_{m_o}, with f = -m_o * Phi
    the explicit linear angle phase."""

    m_s: int
    n: int
    prefactor: complex
    f: float

    def __post_init__(self):
        if abs(self.n) > 2:
            raise ValueError("harmonic offset |n| must be <= 2")


def z_integral(p: ZIntegralParams) -> complex:
    """Closed form of int_0^inf e^{iZ(Delta-A)} J_{m_o}(ZB) dZ (see module
    docstring); zero for Delta - A <= B."""
    return complex(_int_j(p.m_o, p.delta - p.a, np.asarray(p.b, dtype=float)))


def _int_j(m_o: int, d: np.ndarray | float, b: np.ndarray | float) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    b = np.asarray(b, dtype=float)
    q = abs(int(m_o))
    ok = d > b
    d_safe = np.where(ok, d, 1.0)
    b_safe = np.where(ok, b, 0.0)
    s = np.sqrt(np.maximum(d_safe * d_safe - b_safe * b_safe, 0.0))
    val = (1j / s) * (1j * b_safe / (s + d_safe)) ** q
    if m_o < 0 and q % 2:
        val = -val
    return np.where(ok, val, 0.0 + 0.0j)


def _bessel_phase(nu: int, a_z: float, phi: float) -> complex:
    """(-i)^nu J_nu(A_z) e^{i nu Phi}: the azimuth integral of a single
    complex harmonic against e^{-i A_z cos(phi - Phi)} divided by 2 pi."""
    return (-1j) ** nu * bessel_j(nu, a_z) * np.exp(1j * nu * phi)


def phi_integral_cos(m: int, m_s: int, n: int, f: float, a_z: float, phi: float) -> complex:
    """Closed form of the azimuth table integral

        int_0^{2pi} cos(f + n p) e^{-i(m - m_s) p - i A_z cos(p - Phi)} dp.

    The exponent carries the factor of i that makes the Jacobi-Anger
    expansion produce ordinary Bessel functions; the real-exponent reading
    (modified Bessel forms) lives in the oracles module for comparison.
    """
    if a_z < 0.0:
        raise ValueError("a_z must be >= 0")
    mu = m - m_s
    return math.pi * (
        np.exp(1j * f) * _bessel_phase(n - mu, a_z, phi)
        + np.exp(-1j * f) * _bessel_phase(-n - mu, a_z, phi)
    )


def phi_integral_sin(m: int, m_s: int, n: int, f: float, a_z: float, phi: float) -> complex:
    """As phi_integral_cos with a sin(f + n p) integrand."""
    if a_z < 0.0:
        raise ValueError("a_z must be >= 0")
    mu = m - m_s
    return -1j * math.pi * (
        np.exp(1j * f) * _bessel_phase(n - mu, a_z, phi)
        - np.exp(-1j * f) * _bessel_phase(-n - mu, a_z, phi)
    )


def alpha_fi(transition: Transition, k: WaveVectorCrystal, beta: float) -> ComplexVec3:
    """Dipole current vector in the crystal frame,
    ((Omega/c) kappa_Y, (Omega/c) kappa_X, beta kappa_X kappa_Y) <XY>_fi.
    """
    w = transition.omega_fi / C_LIGHT
    vec = np.array(
        [w * k.kappa_y, w * k.kappa_x, beta * k.kappa_x * k.kappa_y],
        dtype=complex,
    )
    return ComplexVec3(vec * transition.xy_factor, Frame.CRYSTAL)


def _eps_cr_components(m_s: int, theta, phi):
    """Components of eps_CR^{m_s} = e^{-i m_s Phi} R(Theta, Phi) chi_{m_s},
    vectorized over the angles."""
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    col1 = (cp * cp * ct + sp * sp, cp * sp * (ct - 1.0), -cp * st)
    col2 = (cp * sp * (ct - 1.0), sp * sp * ct + cp * cp, -sp * st)
    col3 = (st * cp, st * sp, ct)
    if m_s == 0:
        return tuple(np.asarray(c, dtype=complex) for c in col3)
    sgn = -1.0 if m_s == 1 else 1.0
    phase = np.exp(-1j * m_s * np.asarray(phi, dtype=float))
    # -+(col1 +- i col2)/sqrt2 = R chi_{+-1}
    return tuple(
        phase * sgn * (c1 + 1j * m_s * c2) / _SQRT2 for c1, c2 in zip(col1, col2)
    )


def _kappa_harmonics(theta, phi, kappa_perp, kappa_z):
    """Cone-azimuth harmonic coefficients of the crystal-frame wave-vector
    components: kappa_X(p) = sum_n X_n e^{i n p}, same for Y, and of the
    product kappa_X kappa_Y (orders up to |n| = 2)."""
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    px = kappa_z * st * cp
    py = kappa_z * st * sp
    qx = kappa_perp * (ct * cp * cp + sp * sp)
    rx = kappa_perp * (ct - 1.0) * cp * sp
    qy = rx
    ry = kappa_perp * (ct * sp * sp + cp * cp)
    x = {0: px + 0j, 1: (qx - 1j * rx) / 2.0, -1: (qx + 1j * rx) / 2.0}
    y = {0: py + 0j, 1: (qy - 1j * ry) / 2.0, -1: (qy + 1j * ry) / 2.0}
    xy = {
        n: sum(x[a] * y[n - a] for a in (-1, 0, 1) if abs(n - a) <= 1)
        for n in _HARMONICS
    }
    return x, y, xy


def twcr_amplitude(
    m: int,
    lam: int,
    theta_k: float,
    theta,
    phi,
    omega,
    delta,
    *,
    omega_fi: float,
    beta: float,
    xy_factor: complex,
    cr_limit: bool = False,
):
    """Reduced emission amplitude m_fi; array-valued over (theta, phi,
    omega, delta), which must broadcast together.

    cr_limit computes the ordinary channeling-radiation pipeline instead:
    the cone-azimuth integral replaced by 2 pi (only the n = 0 harmonic)
    and the longitudinal integral order forced to zero.
    """
    if lam not in (-1, 1):
        raise ValueError(f"helicity must be +1 or -1, got {lam!r}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)

    kappa_perp = omega / C_LIGHT * math.sin(theta_k)
    kappa_z = omega / C_LIGHT * math.cos(theta_k)
    a = omega / C_LIGHT * np.cos(theta) * math.cos(theta_k)
    b = omega / C_LIGHT * np.sin(theta) * math.sin(theta_k)
    d_minus_a = delta - a

    x, y, xy = _kappa_harmonics(theta, phi, kappa_perp, kappa_z)
    w = omega_fi / C_LIGHT

    harmonics = (0,) if cr_limit else _HARMONICS
    total = np.zeros(np.broadcast(theta, phi, omega, delta).shape, dtype=complex)
    for m_s in (-1, 0, 1):
        d1 = wigner_d1(m_s, lam, theta_k)
        ex, ey, ez = _eps_cr_components(m_s, theta, phi)
        for n in harmonics:
            c_n = xy_factor * (
                w * (y.get(n, 0.0) * ex + x.get(n, 0.0) * ey) + beta * xy[n] * ez
            )
            m_o = 0 if cr_limit else m - m_s - n
            total = total + (
                d1 * c_n * (1j) ** m_o * np.exp(-1j * m_o * phi)
                * _int_j(m_o, d_minus_a, b)
            )
    return 2.0 * math.pi * total


def amplitude_terms(
    transition: Transition,
    m: int,
    lam: int,
    geom: EmissionGeometry,
    beta: float,
) -> list[AmplitudeTerm]:
    """The fifteen (m_s, n) harmonic terms of the amplitude at one geometry;
    assemble_m_fi sums prefactor * i^{m_o} * e^{if} * intJ_{m_o} over them.
    """
    x, y, xy = _kappa_harmonics(geom.theta, geom.phi, geom.kappa_perp, geom.kappa_z)
    w = transition.omega_fi / C_LIGHT
    terms = []
    for m_s in (-1, 0, 1):
        d1 = wigner_d1(m_s, lam, geom.theta_k)
        ex, ey, ez = _eps_cr_components(m_s, geom.theta, geom.phi)
        for n in _HARMONICS:
            c_n = transition.xy_factor * (
                w * (y.get(n, 0.0) * ex + x.get(n, 0.0) * ey) + beta * xy[n] * ez
            )
            m_o = m - m_s - n
            terms.append(
                AmplitudeTerm(
                    m_s=m_s,
                    n=n,
                    prefactor=2.0 * math.pi * d1 * complex(c_n),
                    f=-m_o * geom.phi,
                )
            )
    return terms


def assemble_m_fi(
    transition: Transition,
    qn,
    geom: EmissionGeometry,
    delta: float,
    beta: float,
) -> complex:
    """Scalar reduced amplitude for one transition, photon quantum numbers
    qn (fields m, lam, theta_k) and geometry; delta is the longitudinal
    momentum transfer over hbar (rad/m)."""
    if abs(geom.theta_k - qn.theta_k) > 1e-12:
        raise ValueError("geometry and quantum numbers disagree on theta_k")
    return complex(
        twcr_amplitude(
            qn.m,
            qn.lam,
            qn.theta_k,
            geom.theta,
            geom.phi,
            geom.omega,
            delta,
            omega_fi=transition.omega_fi,
            beta=beta,
            xy_factor=transition.xy_factor,
        )
    )


def gated_fraction(theta, theta_k: float, omega, delta) -> float:
    """Fraction of nodes where the longitudinal closed form is zeroed
    (|Delta - A| <= B); recorded as an approximation flag."""
    theta = np.asarray(theta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    a = omega / C_LIGHT * np.cos(theta) * math.cos(theta_k)
    b = omega / C_LIGHT * np.sin(theta) * math.sin(theta_k)
    gated = (delta - a) <= b
    return float(np.mean(gated))
