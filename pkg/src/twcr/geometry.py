"""Frame bookkeeping for twisted-photon emission.

Two frames appear everywhere:

* crystal frame (X, Y, Z): Z along the channeling axis;
* photon frame (x, y, z): z along the twisted photon's cone axis, whose
  direction in the crystal frame is (Theta, Phi).

``rotation_matrix(Theta, Phi)`` maps photon-frame components to crystal-frame
components; it is the rotation by Theta about the node line
(-sin Phi, cos Phi, 0), i.e. R_z(Phi) R_y(Theta) R_z(-Phi).

Azimuth conventions (important): the crystal-frame polarization basis built
from the Wigner-d sum carries the photon cone azimuth measured so that the
vector at azimuth phi_k is transverse to the wave vector at azimuth
phi_k + Phi. Both constructions follow the standard printed forms; the
consistent transversal pairing is exercised by the property tests, and the
emission amplitude uses the manifestly consistent single-azimuth rotated
basis (see matrixelement).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C_LIGHT
from .specfun import wigner_d1_matrix


class Frame(enum.Enum):
    CRYSTAL = "crystal"
    PHOTON = "photon"


class FrameError(ValueError):
    """Raised when vectors from different frames are combined."""


_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ComplexVec3:
    """A complex 3-vector with an explicit frame tag."""

    components: np.ndarray
    frame: Frame

    def __post_init__(self):
        c = np.asarray(self.components, dtype=complex).reshape(3)
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("vector components must be finite")
        object.__setattr__(self, "components", c)

    def dot(self, other: "ComplexVec3") -> complex:
        """Bilinear dot product a.b (no conjugation)."""
        self._check_frame(other)
        return complex(np.dot(self.components, other.components))

    def inner(self, other: "ComplexVec3") -> complex:
        """Hermitian inner product <a|b> = conj(a).b."""
        self._check_frame(other)
        return complex(np.vdot(self.components, other.components))

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def _check_frame(self, other: "ComplexVec3") -> None:
        if self.frame is not other.frame:
            raise FrameError(
                f"cannot combine {self.frame.value}-frame and "
                f"{other.frame.value}-frame vectors without a rotation"
            )


@dataclass(frozen=True)
class EmissionGeometry:
    """The four emission angles plus the photon angular frequency.

    theta, phi: direction of the photon cone axis in the crystal frame;
    theta_k, phi_k: internal cone opening angle and cone azimuth;
    omega: photon angular frequency in rad/s.
    """

    theta: float
    phi: float
    theta_k: float
    phi_k: float
    omega: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must be in [0, pi], got {self.theta}")
        if not 0.0 <= self.theta_k < math.pi / 2:
            raise ValueError(f"theta_k must be in [0, pi/2), got {self.theta_k}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def kappa_perp(self) -> float:
        """Transverse wave number (omega/c) sin theta_k, rad/m."""
        return self.omega / C_LIGHT * math.sin(self.theta_k)

    @property
    def kappa_z(self) -> float:
        """Longitudinal wave number (omega/c) cos theta_k, rad/m."""
        return self.omega / C_LIGHT * math.cos(self.theta_k)


@dataclass(frozen=True)
class WaveVectorCrystal:
    """Photon wave vector in the crystal frame, rad/m."""

    kappa_x: float
    kappa_y: float
    kappa_z: float
    omega: float = field(default=0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.kappa_x, self.kappa_y, self.kappa_z])

    def modulus(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """Rotation taking photon-frame components to crystal-frame components.

    Maps (0, 0, 1) to (sin T cos P, sin T sin P, cos T). The trig form below
    is regular at theta = 0 (identity), so no explicit branch is needed for
    the removable singularity of the X/sqrt(X^2+Y^2) parameterization.
    """
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [cp * cp * ct + sp * sp, cp * sp * (ct - 1.0), cp * st],
            [cp * sp * (ct - 1.0), sp * sp * ct + cp * cp, sp * st],
            [-cp * st, -sp * st, ct],
        ]
    )


def spin_basis(m_s: int, frame: Frame = Frame.PHOTON) -> ComplexVec3:
    """Spin-projection eigenvectors chi_{m_s} of the photon spin-z operator.

    chi_0 = (0, 0, 1), chi_{+-1} = -+(1, +-i, 0)/sqrt(2); unit norm.
    """
    if m_s == 0:
        c = np.array([0.0, 0.0, 1.0], dtype=complex)
    elif m_s == 1:
        c = -np.array([1.0, 1.0j, 0.0]) / _SQRT2
    elif m_s == -1:
        c = np.array([1.0, -1.0j, 0.0]) / _SQRT2
    else:
        raise ValueError(f"m_s must be in {{-1, 0, 1}}, got {m_s!r}")
    return ComplexVec3(c, frame)


def polarization_photon_frame(lam: int, theta_k: float, phi_k: float) -> ComplexVec3:
    """Twisted-photon polarization in the photon frame,
    sum_{m_s} exp(-i m_s phi_k) d^1_{m_s lam}(theta_k) chi_{m_s}.
    """
    _check_helicity(lam)
    d = wigner_d1_matrix(theta_k)
    out = np.zeros(3, dtype=complex)
    for row, m_s in enumerate((-1, 0, 1)):
        out += (
            np.exp(-1j * m_s * phi_k)
            * d[row, lam + 1]
            * spin_basis(m_s).components
        )
    return ComplexVec3(out, Frame.PHOTON)


def _polarization_cr_any(mu: int, theta: float, phi: float) -> np.ndarray:
    d = wigner_d1_matrix(theta)
    out = np.zeros(3, dtype=complex)
    for row, m_s in enumerate((-1, 0, 1)):
        out += np.exp(-1j * m_s * phi) * d[row, mu + 1] * spin_basis(m_s).components
    return out


def polarization_cr(lam: int, theta: float, phi: float) -> ComplexVec3:
    """Channeling-radiation (plane-wave) polarization vector in the crystal
    frame: sum_{m_s} exp(-i m_s Phi) d^1_{m_s lam}(Theta) chi_{m_s}.

    Equals exp(-i lam Phi) * rotation_matrix(Theta, Phi) @ chi_lam.
    """
    _check_helicity(lam)
    return ComplexVec3(_polarization_cr_any(lam, theta, phi), Frame.CRYSTAL)


def polarization_twcr(
    lam: int, theta_k: float, phi_k: float, theta: float, phi: float
) -> ComplexVec3:
    """Twisted-photon polarization in the crystal frame,
    sum_{m_s} exp(-i m_s phi_k) d^1_{m_s lam}(theta_k) eps_CR^{m_s}(Theta, Phi),
    where eps_CR^{m_s} extends polarization_cr to m_s = 0.

    Unit norm; transverse to wavevector_crystal evaluated at cone azimuth
    phi_k + Phi (see module docstring on the azimuth conventions).
    """
    _check_helicity(lam)
    d = wigner_d1_matrix(theta_k)
    out = np.zeros(3, dtype=complex)
    for row, m_s in enumerate((-1, 0, 1)):
        out += (
            np.exp(-1j * m_s * phi_k)
            * d[row, lam + 1]
            * _polarization_cr_any(m_s, theta, phi)
        )
    return ComplexVec3(out, Frame.CRYSTAL)


def wavevector_crystal(geom: EmissionGeometry) -> WaveVectorCrystal:
    """Crystal-frame wave vector, R(Theta, Phi) applied to the photon-frame
    (kappa_perp cos phi_k, kappa_perp sin phi_k, kappa_z).

    The rotation construction guarantees |K| = omega/c exactly; it agrees
    with the componentwise trig expansion identically.
    """
    k_photon = np.array(
        [
            geom.kappa_perp * math.cos(geom.phi_k),
            geom.kappa_perp * math.sin(geom.phi_k),
            geom.kappa_z,
        ]
    )
    k = rotation_matrix(geom.theta, geom.phi) @ k_photon
    return WaveVectorCrystal(k[0], k[1], k[2], geom.omega)


def _check_helicity(lam: int) -> None:
    if lam not in (-1, 1):
        raise ValueError(f"helicity must be +1 or -1, got {lam!r}")
