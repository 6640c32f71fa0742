"""Physical constants used across the package (SI unless noted)."""

from scipy import constants as _const

CODE_VERSION = "0.1.0"

C_LIGHT = _const.c                      # m/s
HBAR = _const.hbar                      # J*s
E_CHARGE = _const.e                     # C
FINE_STRUCTURE = _const.alpha           # dimensionless
ELECTRON_MASS_EV = _const.m_e * _const.c**2 / _const.e        # eV
HBARC_EV_ANGSTROM = _const.hbar * _const.c / _const.e * 1e10  # eV*Angstrom

# hbar^2/(2 m_e) in eV*Angstrom^2; the transverse Schroedinger problem is
# solved in eV/Angstrom units and divides this by the Lorentz factor.
HBAR2_OVER_2ME_EV_A2 = HBARC_EV_ANGSTROM**2 / (2.0 * ELECTRON_MASS_EV)

# Continuum-potential Fourier prefactor 2*pi*hbar^2/m_e in eV*Angstrom^3
# (the Born-approximation conversion between electron scattering factors
# in Angstrom and potential-energy Fourier components).
POTENTIAL_PREFACTOR_EV_A3 = 4.0 * _const.pi * HBAR2_OVER_2ME_EV_A2
