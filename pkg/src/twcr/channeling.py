"""Transverse quantum states of an axially channeled electron.

The <100> atomic strings of a diamond-structure crystal project onto two
interpenetrating square sublattices (corner strings and center strings of a
cell of side a_p/2), so the thermally smeared continuum potential is periodic
on the a_p/2 square cell and its Fourier components live on the reciprocal
grid g = (4 pi m / a_p, 4 pi n / a_p).

The transverse problem is a Schroedinger-like equation with relativistic
mass gamma*m, solved in a plane-wave basis:

    phi(x, y) = exp(-i k . rho) sum_g C_g exp(-i g . rho),
    k(i_n) = (pi i_n / (5 a_p)) (1, 1),  i_n = 0..9,

i.e. each transverse band is sampled at ten quasimomentum points along the
cell diagonal. With a real, inversion-symmetric potential the Hamiltonian is
real symmetric for every i_n, and energies are in eV throughout.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import C_LIGHT, E_CHARGE, ELECTRON_MASS_EV, HBAR
from .constants import HBAR2_OVER_2ME_EV_A2, POTENTIAL_PREFACTOR_EV_A3

#: Number of quasimomentum samples per band.
N_SUBBANDS = 10

#: Cache format version; bump on any change to the solver or its inputs.
CACHE_VERSION = 1

# Doyle-Turner electron scattering factor coefficients,
# f(s) = sum_i a_i exp(-b_i s^2) with s = |g|/(4 pi) in 1/Angstrom.
_DOYLE_TURNER = {
    "Si": (
        (2.1293, 2.5333, 0.8349, 0.3216),        # a_i, Angstrom
        (57.7748, 16.4756, 2.8796, 0.3860),      # b_i, Angstrom^2
    ),
}


class ConfigurationError(ValueError):
    """Raised for unusable crystal/beam/pipeline configuration."""


class SolverError(RuntimeError):
    """Raised when the eigenproblem fails to produce usable states."""


@dataclass(frozen=True)
class CrystalConfig:
    """Crystal and basis-size configuration. Lengths in meters."""

    element: str = "Si"
    axis: str = "100"
    lattice_constant: float = 5.431e-10
    thermal_u1: float = 0.075e-10
    m_max: int = 10

    def __post_init__(self):
        if self.element not in _DOYLE_TURNER:
            raise ConfigurationError(
                f"crystal.element: unsupported element {self.element!r}; "
                f"known: {sorted(_DOYLE_TURNER)}"
            )
        if self.axis != "100":
            raise ConfigurationError(
                f"crystal.axis: only the <100> axis is supported, got {self.axis!r}"
            )
        if self.lattice_constant <= 0.0:
            raise ConfigurationError("crystal.lattice_constant: must be > 0")
        if self.thermal_u1 <= 0.0:
            raise ConfigurationError("crystal.thermal_u1: must be > 0")
        if self.m_max < 4:
            raise ConfigurationError("crystal.m_max: must be >= 4")

    @property
    def ap_angstrom(self) -> float:
        return self.lattice_constant * 1e10

    @property
    def u1_angstrom(self) -> float:
        return self.thermal_u1 * 1e10


@dataclass(frozen=True)
class BeamConfig:
    """Electron beam: total energy in MeV and incidence tilt in radians.

    theta0_azimuth is the azimuth of the tilt in the transverse plane;
    the default 45 degrees lies along the sampled quasimomentum diagonal.
    """

    energy_mev: float = 10.0
    theta0: float = 0.5e-3
    theta0_azimuth: float = math.pi / 4

    def __post_init__(self):
        if self.energy_mev * 1e6 <= ELECTRON_MASS_EV:
            raise ConfigurationError(
                "beam.energy_mev: total energy must exceed the electron rest energy"
            )
        if not 0.0 <= self.theta0 < 0.1:
            raise ConfigurationError("beam.theta0: expected a small angle in radians")

    @property
    def gamma(self) -> float:
        return self.energy_mev * 1e6 / ELECTRON_MASS_EV

    @property
    def beta(self) -> float:
        return math.sqrt(1.0 - 1.0 / self.gamma**2)

    @property
    def momentum_inv_angstrom(self) -> float:
        """gamma m beta c / hbar in 1/Angstrom."""
        return self.gamma * self.beta * ELECTRON_MASS_EV / (HBAR * C_LIGHT / E_CHARGE) * 1e-10


@dataclass(frozen=True, eq=False)
class BlochState:
    """One transverse eigenstate: band index, sub-band (quasimomentum) index,
    Fourier coefficients C[m + m_max, n + m_max], and energy in eV."""

    band: int
    subband: int
    coefficients: np.ndarray
    energy_ev: float
    m_max: int

    @property
    def k_angstrom(self) -> np.ndarray:
        """Quasimomentum vector in 1/Angstrom."""
        return self._k

    @property
    def ap_m(self) -> float:
        """Lattice constant in meters, attached at solve time."""
        return self._ap_m

    def with_lattice(self, k: np.ndarray, ap_m: float) -> "BlochState":
        object.__setattr__(self, "_k", np.asarray(k, dtype=float))
        object.__setattr__(self, "_ap_m", float(ap_m))
        return self


@dataclass(frozen=True, eq=False)
class Transition:
    """Radiative pair of Bloch states at the same sub-band index."""

    initial: BlochState
    final: BlochState
    omega_fi: float        # rad/s, positive for emission
    xy_factor: complex     # m^2


def scattering_factor(element: str, s_inv_angstrom: np.ndarray) -> np.ndarray:
    """Doyle-Turner electron scattering factor f(s), Angstrom."""
    if element not in _DOYLE_TURNER:
        raise ConfigurationError(f"unsupported element {element!r}")
    a, b = _DOYLE_TURNER[element]
    s2 = np.asarray(s_inv_angstrom, dtype=float) ** 2
    return sum(ai * np.exp(-bi * s2) for ai, bi in zip(a, b))


def continuum_potential_fourier(config: CrystalConfig, n_harmonics: int | None = None) -> np.ndarray:
    """Fourier components V_g (eV) of the thermally smeared 2D continuum
    potential on the reciprocal grid g = (4 pi m / a_p)(m, n),
    |m|, |n| <= n_harmonics (default 2*m_max, enough for all Hamiltonian
    differences).

    Returned as a complex (2N+1, 2N+1) array indexed [m + N, n + N]. With a
    corner string at the origin and a center string at (a_p/4)(1,1) the
    structure factor is 1 + (-1)^(m+n) and every component is real.
    """
    n = 2 * config.m_max if n_harmonics is None else int(n_harmonics)
    ap = config.ap_angstrom
    idx = np.arange(-n, n + 1)
    mm, nn = np.meshgrid(idx, idx, indexing="ij")
    g_unit = 4.0 * math.pi / ap
    g2 = g_unit**2 * (mm**2 + nn**2)
    s = np.sqrt(g2) / (4.0 * math.pi)
    structure = 1.0 + (-1.0) ** (mm + nn)
    debye_waller = np.exp(-0.5 * g2 * config.u1_angstrom**2)
    cell_area = (ap / 2.0) ** 2
    v = (
        -POTENTIAL_PREFACTOR_EV_A3
        * scattering_factor(config.element, s)
        * structure
        * debye_waller
        / (cell_area * ap)
    )
    return v.astype(complex)


def potential_on_grid(config: CrystalConfig, n_grid: int = 64, n_harmonics: int | None = None):
    """Real-space potential (eV) reconstructed from the Fourier sum on an
    n_grid x n_grid mesh over one a_p/2 cell centered on the corner string.

    Returns (x, y, U) with x, y in Angstrom.
    """
    v = continuum_potential_fourier(config, n_harmonics)
    n = (v.shape[0] - 1) // 2
    ap = config.ap_angstrom
    half = ap / 4.0
    x = np.linspace(-half, half, n_grid, endpoint=False)
    g = 4.0 * math.pi / ap * np.arange(-n, n + 1)
    ex = np.exp(-1j * np.outer(g, x))
    u = np.real(ex.T @ v @ ex)
    return x, x.copy(), u


def saddle_energy(config: CrystalConfig) -> float:
    """Potential (eV) at the midpoint between the two nearest strings,
    (a_p/8)(1, 1); the lowest inter-string barrier."""
    v = continuum_potential_fourier(config)
    n = (v.shape[0] - 1) // 2
    idx = np.arange(-n, n + 1)
    # g . rho at rho = (a_p/8)(1,1): (4 pi m / a_p)(a_p/8) = pi m / 2
    phase = np.exp(-1j * math.pi / 2.0 * (idx[:, None] + idx[None, :]))
    return float(np.real(np.sum(v * phase)))


def subband_quasimomentum(config: CrystalConfig, i_n: int) -> np.ndarray:
    """k(i_n) = (pi i_n / (5 a_p)) (1, 1), 1/Angstrom."""
    if not 0 <= i_n < N_SUBBANDS:
        raise ConfigurationError(f"i_n must be in [0, {N_SUBBANDS - 1}], got {i_n}")
    return math.pi * i_n / (5.0 * config.ap_angstrom) * np.array([1.0, 1.0])


def build_hamiltonian(config: CrystalConfig, beam: BeamConfig, i_n: int) -> np.ndarray:
    """Dense plane-wave Hamiltonian (eV) for sub-band i_n."""
    m_max = config.m_max
    idx = np.arange(-m_max, m_max + 1)
    mm, nn = [a.ravel() for a in np.meshgrid(idx, idx, indexing="ij")]
    g_unit = 4.0 * math.pi / config.ap_angstrom
    k = subband_quasimomentum(config, i_n)
    kx = k[0] + g_unit * mm
    ky = k[1] + g_unit * nn
    kinetic = HBAR2_OVER_2ME_EV_A2 / beam.gamma * (kx**2 + ky**2)

    v = continuum_potential_fourier(config, 2 * m_max)
    off = 2 * m_max
    h = np.real(v[mm[:, None] - mm[None, :] + off, nn[:, None] - nn[None, :] + off])
    h[np.diag_indices_from(h)] += kinetic
    return h


def solve_bloch(
    config: CrystalConfig,
    beam: BeamConfig,
    i_n: int,
    *,
    n_extra_bands: int = 3,
    n_bands: int | None = None,
) -> list[BlochState]:
    """Eigenstates for one sub-band index, sorted by transverse energy.

    Retains the bands whose energy lies below the inter-string saddle plus
    the first n_extra_bands above it, unless n_bands overrides the count.
    """
    h = build_hamiltonian(config, beam, i_n)
    if not np.all(np.isfinite(h)):
        raise SolverError("Hamiltonian contains non-finite entries")
    energies, vectors = np.linalg.eigh(h)
    if not np.all(np.isfinite(energies)):
        raise SolverError("eigensolver returned non-finite energies")

    if n_bands is None:
        barrier = saddle_energy(config)
        n_bound = int(np.searchsorted(energies, barrier))
        n_bands = max(n_bound, 1) + n_extra_bands
    n_bands = min(int(n_bands), energies.size)

    size = 2 * config.m_max + 1
    k = subband_quasimomentum(config, i_n)
    states = []
    for band in range(n_bands):
        coeff = vectors[:, band].reshape(size, size).astype(complex)
        state = BlochState(
            band=band,
            subband=i_n,
            coefficients=coeff,
            energy_ev=float(energies[band]),
            m_max=config.m_max,
        ).with_lattice(k, config.lattice_constant)
        states.append(state)
    return states


def reconstruct_wavefunction(state: BlochState, config: CrystalConfig, x, y) -> np.ndarray:
    """phi(x, y) from the Fourier coefficients; x, y 1D arrays in Angstrom."""
    idx = np.arange(-state.m_max, state.m_max + 1)
    g = 4.0 * math.pi / config.ap_angstrom * idx
    k = state.k_angstrom
    ex = np.exp(-1j * np.outer(g + k[0], np.asarray(x)))
    ey = np.exp(-1j * np.outer(g + k[1], np.asarray(y)))
    return ex.T @ state.coefficients @ ey


def populations(
    states: list[BlochState],
    beam: BeamConfig,
    crystal: CrystalConfig,
    *,
    kernel_width: float | None = None,
) -> dict[int, float]:
    """Initial band populations P_i(theta_0), normalized to sum to 1.

    Sudden-approximation overlap of the incident transverse plane wave with
    the Bloch states: the incident transverse momentum q = p*theta_0/hbar is
    matched against the sampled momenta k(i_n) + g with a Gaussian kernel
    one sub-band spacing wide, weighting each Fourier component |C_g|^2.
    """
    if not states:
        raise ConfigurationError("populations: no states supplied")
    q = beam.momentum_inv_angstrom * beam.theta0
    q_vec = q * np.array([math.cos(beam.theta0_azimuth), math.sin(beam.theta0_azimuth)])
    sigma = kernel_width or math.sqrt(2.0) * math.pi / (5.0 * crystal.ap_angstrom)

    weights: dict[int, float] = {}
    g_unit = 4.0 * math.pi / crystal.ap_angstrom
    idx = np.arange(-states[0].m_max, states[0].m_max + 1)
    gx, gy = np.meshgrid(g_unit * idx, g_unit * idx, indexing="ij")
    for state in states:
        k = state.k_angstrom
        d2 = (gx + k[0] - q_vec[0]) ** 2 + (gy + k[1] - q_vec[1]) ** 2
        w = float(np.sum(np.abs(state.coefficients) ** 2 * np.exp(-0.5 * d2 / sigma**2)))
        weights[state.band] = weights.get(state.band, 0.0) + w

    total = sum(weights.values())
    if total <= 0.0:
        raise ConfigurationError(
            "populations: zero total overlap; the beam tilt is far outside "
            "the sampled transverse momenta"
        )
    return {band: w / total for band, w in sorted(weights.items())}


def dipole_xy(initial: BlochState, final: BlochState) -> complex:
    """The cross dipole factor <XY>_fi (m^2), the x*y matrix element between
    two states at the same sub-band index:

        sum over coefficient pairs of
        conj(C_f) C_i (-1)^(dm+dn) a_p^2 / (16 pi^2 dm dn),

    with dm = m_f - m_i, dn = n_f - n_i; terms with dm = 0 or dn = 0 vanish
    (odd integrals over the string-centered cell), not poles.
    """
    if initial.m_max != final.m_max:
        raise ConfigurationError("dipole_xy: states from different basis sizes")
    if initial.subband != final.subband:
        raise ConfigurationError("dipole_xy: states from different sub-bands")
    m_max = initial.m_max
    idx = np.arange(-m_max, m_max + 1)
    diff = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = np.where(diff != 0, (-1.0) ** np.abs(diff) / np.where(diff != 0, diff, 1), 0.0)
    inner = k1 @ initial.coefficients @ k1.T
    total = np.sum(np.conj(final.coefficients) * inner)
    # a_p enters in meters so the factor carries SI length^2
    return complex(total * initial.ap_m**2 / (16.0 * math.pi**2))


def enumerate_transitions(
    states: list[BlochState],
    band_populations: dict[int, float],
    *,
    population_floor: float = 1e-4,
    dipole_rel_floor: float = 1e-6,
) -> list[Transition]:
    """All radiative pairs (same sub-band, Omega_fi > 0) whose initial band
    population and relative |<XY>|^2 pass the floors."""
    hbar_ev = HBAR / E_CHARGE
    by_subband: dict[int, list[BlochState]] = {}
    for s in states:
        by_subband.setdefault(s.subband, []).append(s)

    raw: list[Transition] = []
    for i_n in sorted(by_subband):
        group = sorted(by_subband[i_n], key=lambda s: s.band)
        for si in group:
            if band_populations.get(si.band, 0.0) < population_floor:
                continue
            for sf in group:
                if si.energy_ev <= sf.energy_ev or si.band == sf.band:
                    continue
                omega = (si.energy_ev - sf.energy_ev) / hbar_ev
                xy = dipole_xy(si, sf)
                raw.append(Transition(si, sf, omega, xy))

    if not raw:
        raise ConfigurationError(
            "no radiative transitions survive the population floor; the beam "
            "may be unbound or the floors too aggressive"
        )
    max_xy2 = max(abs(t.xy_factor) ** 2 for t in raw)
    if max_xy2 <= 0.0:
        raise ConfigurationError("all dipole factors vanish; no radiation")
    kept = [t for t in raw if abs(t.xy_factor) ** 2 >= dipole_rel_floor * max_xy2]
    if not kept:
        raise ConfigurationError("no transitions survive the dipole floor")
    return kept


@dataclass(eq=False)
class ChannelingSolution:
    """Solver artifacts shared by the distribution and CLI layers."""

    crystal: CrystalConfig
    beam: BeamConfig
    states: list[BlochState]
    band_populations: dict[int, float]
    transitions: list[Transition]
    saddle_ev: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_subbands(self) -> int:
        return N_SUBBANDS


def config_hash(crystal: CrystalConfig, beam: BeamConfig, n_extra_bands: int) -> str:
    payload = {
        "version": CACHE_VERSION,
        "crystal": [crystal.element, crystal.axis, crystal.lattice_constant,
                    crystal.thermal_u1, crystal.m_max],
        "beam": [beam.energy_mev, beam.theta0, beam.theta0_azimuth],
        "n_extra_bands": n_extra_bands,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def build_solution(
    crystal: CrystalConfig,
    beam: BeamConfig,
    *,
    population_floor: float = 1e-4,
    dipole_rel_floor: float = 1e-6,
    n_extra_bands: int = 3,
    cache_dir: str | Path | None = None,
) -> ChannelingSolution:
    """Solve all sub-bands, populate, and enumerate transitions.

    When cache_dir is given, eigenpairs are stored keyed by a hash of the
    crystal+beam configuration and the cache format version; a mismatch
    triggers recomputation.
    """
    states = _load_cached_states(crystal, beam, n_extra_bands, cache_dir)
    if states is None:
        states = []
        for i_n in range(N_SUBBANDS):
            states.extend(solve_bloch(crystal, beam, i_n, n_extra_bands=n_extra_bands))
        _store_cached_states(states, crystal, beam, n_extra_bands, cache_dir)

    pops = populations(states, beam, crystal)
    transitions = enumerate_transitions(
        states, pops,
        population_floor=population_floor,
        dipole_rel_floor=dipole_rel_floor,
    )
    ortho = _orthonormality_residual(states)
    return ChannelingSolution(
        crystal=crystal,
        beam=beam,
        states=states,
        band_populations=pops,
        transitions=transitions,
        saddle_ev=saddle_energy(crystal),
        diagnostics={
            "n_states": len(states),
            "n_bands": len({s.band for s in states}),
            "n_transitions": len(transitions),
            "orthonormality_residual": ortho,
        },
    )


def _orthonormality_residual(states: list[BlochState]) -> float:
    by_subband: dict[int, list[BlochState]] = {}
    for s in states:
        by_subband.setdefault(s.subband, []).append(s)
    worst = 0.0
    for group in by_subband.values():
        mat = np.array([s.coefficients.ravel() for s in group])
        gram = mat.conj() @ mat.T
        worst = max(worst, float(np.max(np.abs(gram - np.eye(len(group))))))
    return worst


def _cache_path(crystal, beam, n_extra_bands, cache_dir) -> Path | None:
    if cache_dir is None:
        return None
    key = config_hash(crystal, beam, n_extra_bands)
    return Path(cache_dir) / f"bloch_{key}.npz"


def _load_cached_states(crystal, beam, n_extra_bands, cache_dir):
    path = _cache_path(crystal, beam, n_extra_bands, cache_dir)
    if path is None or not path.exists():
        return None
    try:
        data = np.load(path)
        if int(data["version"]) != CACHE_VERSION:
            return None
        states = []
        size = 2 * crystal.m_max + 1
        for band, i_n, energy, coeff in zip(
            data["band"], data["subband"], data["energy_ev"], data["coefficients"]
        ):
            state = BlochState(
                band=int(band),
                subband=int(i_n),
                coefficients=coeff.reshape(size, size),
                energy_ev=float(energy),
                m_max=crystal.m_max,
            ).with_lattice(
                subband_quasimomentum(crystal, int(i_n)), crystal.lattice_constant
            )
            states.append(state)
        return states
    except Exception:
        return None


def _store_cached_states(states, crystal, beam, n_extra_bands, cache_dir) -> None:
    path = _cache_path(crystal, beam, n_extra_bands, cache_dir)
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        version=CACHE_VERSION,
        band=np.array([s.band for s in states]),
        subband=np.array([s.subband for s in states]),
        energy_ev=np.array([s.energy_ev for s in states]),
        coefficients=np.array([s.coefficients for s in states]),
    )
