"""Per-angle emission probability and angular-map generation.

For each transition the probability density at the photon-axis direction
(Theta, Phi) is evaluated at the kinematic endpoint of the longitudinal
momentum transfer,

    dW/dtheta_k = (alpha/4pi) sin(theta_k) (c beta Delta_max)
                  |m_fi(Delta_max)|^2 P_i(theta_0),

with Delta_max = omega_max cos(Theta - theta_k)/c, omega_max =
Omega_fi/(1 - beta), and the photon frequency fixed inside the amplitude by
energy conservation, omega = beta c Delta + Omega_fi. Maps sum both photon
helicities and all retained transitions, weight by the initial band
populations, and are max-normalized by default with the raw scale recorded
in metadata.

An alternative "integrated" mode integrates |m_fi(Delta)|^2 over Delta up
to Delta_max as a cross-check; the squared principal-value closed form has
a non-integrable 1/(Delta - Delta_res) at the phase-matching resonance, so
that mode excludes a small relative margin above Delta_res (the dropped
delta-function physics of a finite crystal). Output values are arbitrary
units either way.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channeling import BeamConfig, ChannelingSolution, ConfigurationError, CrystalConfig, Transition, build_solution
from .constants import C_LIGHT, CODE_VERSION, FINE_STRUCTURE
from .matrixelement import gated_fraction, twcr_amplitude

_TAM_CAP = 12


@dataclass(frozen=True)
class PhotonQuantumNumbers:
    """Total-angular-momentum projection m, helicity, and cone angle."""

    m: int
    lam: int = 1
    theta_k: float = math.radians(30.0)

    def __post_init__(self):
        if abs(self.m) > _TAM_CAP:
            raise ConfigurationError(f"photon.m: |m| must be <= {_TAM_CAP}, got {self.m}")
        if self.lam not in (-1, 1):
            raise ConfigurationError(f"photon.lam: must be +1 or -1, got {self.lam}")
        if not 0.0 < self.theta_k < math.pi / 2:
            raise ConfigurationError("photon.theta_k: must be in (0, pi/2)")


@dataclass(frozen=True)
class GridSpec:
    """Angular grid (degrees); Theta endpoint inclusive, Phi half-open."""

    theta_deg: np.ndarray
    phi_deg: np.ndarray

    def __post_init__(self):
        for name, arr in (("theta", self.theta_deg), ("phi", self.phi_deg)):
            a = np.asarray(arr, dtype=float)
            if a.ndim != 1 or a.size < 2 or not np.all(np.diff(a) > 0):
                raise ConfigurationError(f"grid.{name}: must be strictly increasing, size >= 2")
            object.__setattr__(self, f"{name}_deg", a)

    @classmethod
    def from_ranges(
        cls,
        theta_min_deg: float = 0.0,
        theta_max_deg: float = 6.0,
        theta_steps: int = 121,
        phi_min_deg: float = 0.0,
        phi_max_deg: float = 360.0,
        phi_steps: int = 181,
    ) -> "GridSpec":
        return cls(
            theta_deg=np.linspace(theta_min_deg, theta_max_deg, theta_steps),
            phi_deg=np.linspace(phi_min_deg, phi_max_deg, phi_steps, endpoint=False),
        )


@dataclass(eq=False)
class AngularMap:
    """2D grid of emission probabilities for fixed (m, theta_k)."""

    theta_deg: np.ndarray
    phi_deg: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (self.theta_deg.size, self.phi_deg.size):
            raise ValueError("values shape must be (n_theta, n_phi)")
        if np.any(self.values < 0.0):
            raise ValueError("map values must be nonnegative")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("Theta_deg,Phi_deg,value\n")
            for i, t in enumerate(self.theta_deg):
                for j, p in enumerate(self.phi_deg):
                    fh.write(f"{t:.6f},{p:.6f},{self.values[i, j]:.12e}\n")

    def to_json(self, path) -> None:
        payload = {
            "schema_version": 1,
            "metadata": self.metadata,
            "theta_deg": self.theta_deg.tolist(),
            "phi_deg": self.phi_deg.tolist(),
            "values": self.values.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")


def omega_max(transition, beta: float) -> float:
    """Maximum emitted frequency Omega_fi / (1 - beta), rad/s."""
    w = transition.omega_fi if isinstance(transition, Transition) else float(transition)
    if w <= 0.0:
        raise ValueError("omega_fi must be positive")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must be in (0, 1)")
    return w / (1.0 - beta)


def delta_max(omega_max_value: float, theta, theta_k: float):
    """Endpoint of the longitudinal momentum-transfer range,
    omega_max cos(Theta - theta_k)/c, clamped at zero when the cosine is
    negative (no kinematically allowed range). Array-friendly in theta."""
    theta = np.asarray(theta, dtype=float)
    return np.maximum(omega_max_value / C_LIGHT * np.cos(theta - theta_k), 0.0)


def emission_probability(
    transition: Transition,
    qn: PhotonQuantumNumbers,
    theta,
    phi,
    p_i: float,
    beam: BeamConfig,
    *,
    mode: str = "endpoint",
) -> np.ndarray:
    """Single-transition, single-helicity probability density (arbitrary
    units) at photon-axis direction(s) (theta, phi)."""
    beta = beam.beta
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    wmax = omega_max(transition, beta)
    dmax = delta_max(wmax, theta, qn.theta_k)

    if mode == "endpoint":
        amp2 = _endpoint_amp2(transition, qn.m, qn.lam, qn.theta_k, theta, phi, dmax, beta)
        weight = C_LIGHT * beta * dmax
    elif mode == "integrated":
        amp2, weight = _integrated_amp2(transition, qn.m, qn.lam, qn.theta_k, theta, phi, dmax, beta)
    else:
        raise ConfigurationError(f"mode: unknown evaluation mode {mode!r}")
    return (FINE_STRUCTURE / (4.0 * math.pi)) * math.sin(qn.theta_k) * weight * amp2 * p_i


def _photon_omega(delta, beta):
    """Photon frequency fixed by energy conservation, omega = beta c Delta,
    in the ultrarelativistic form the closed-form reduction assumes (the
    transition-frequency offset is a 1e-3 relative correction here, but
    keeping it would put a spurious singular ring of the principal-value
    closed form at Theta = theta_k)."""
    return beta * C_LIGHT * delta


def _endpoint_amp2(transition, m, lam, theta_k, theta, phi, dmax, beta):
    om = _photon_omega(dmax, beta)
    amp = twcr_amplitude(
        m, lam, theta_k, theta, phi, om, dmax,
        omega_fi=transition.omega_fi, beta=beta, xy_factor=transition.xy_factor,
    )
    return np.abs(amp) ** 2


# Gauss-Legendre nodes for the integrated cross-check mode.
_GL_NODES = 24
_RES_MARGIN = 0.01


def _integrated_amp2(transition, m, lam, theta_k, theta, phi, dmax, beta):
    """Integral of |m_fi(Delta)|^2 over the allowed Delta range, starting a
    relative margin above the phase-matching resonance Delta_res."""
    eta = theta - theta_k
    cos_eta = np.cos(eta)
    d_res = np.where(
        cos_eta > 0.0,
        transition.omega_fi / C_LIGHT * cos_eta / (1.0 - beta * cos_eta),
        0.0,
    )
    lo = d_res + _RES_MARGIN * np.maximum(dmax - d_res, 0.0)
    span = np.maximum(dmax - lo, 0.0)
    x, wq = np.polynomial.legendre.leggauss(_GL_NODES)
    acc = np.zeros(np.broadcast(theta, phi).shape)
    for xi, wi in zip(x, wq):
        d = lo + 0.5 * (xi + 1.0) * span
        om = beta * C_LIGHT * d + transition.omega_fi
        amp = twcr_amplitude(
            m, lam, theta_k, theta, phi, om, d,
            omega_fi=transition.omega_fi, beta=beta, xy_factor=transition.xy_factor,
        )
        acc = acc + wi * np.abs(amp) ** 2
    return acc, C_LIGHT * beta * 0.5 * span


def angular_map(
    beam: BeamConfig,
    crystal: CrystalConfig,
    qn: PhotonQuantumNumbers,
    grid: GridSpec | None = None,
    *,
    solution: ChannelingSolution | None = None,
    lambda_mode: str = "sum",
    mode: str = "endpoint",
    normalize: bool = True,
    cr_limit: bool = False,
    workers: int = 1,
    floors: dict | None = None,
) -> AngularMap:
    """Angular distribution over (Theta, Phi) for fixed (m, theta_k).

    Sums both helicities (lambda_mode="sum", the default) or only qn.lam
    (lambda_mode="single"), all retained transitions weighted by the band
    populations split uniformly over the ten sub-bands. Deterministic node
    ordering; workers > 1 distributes Theta rows over a process pool with
    bit-identical results.
    """
    if grid is None:
        grid = GridSpec.from_ranges()
    if lambda_mode not in ("sum", "single"):
        raise ConfigurationError(f"lambda_mode: must be 'sum' or 'single', got {lambda_mode!r}")
    if solution is None:
        floors = floors or {}
        solution = build_solution(
            crystal,
            beam,
            population_floor=floors.get("population", 1e-4),
            dipole_rel_floor=floors.get("dipole_rel", 1e-6),
        )

    theta = np.radians(grid.theta_deg)
    phi = np.radians(grid.phi_deg)
    lams = (-1, 1) if lambda_mode == "sum" else (qn.lam,)

    rows = _map_rows(
        theta, phi, solution, qn, lams, mode, cr_limit, workers
    )
    values = rows["values"]
    raw_max = float(values.max()) if values.size else 0.0
    if normalize and raw_max > 0.0:
        values = values / raw_max

    meta = {
        "m": qn.m,
        "theta_k_deg": math.degrees(qn.theta_k),
        "lambda_mode": lambda_mode,
        "mode": mode,
        "cr_limit": cr_limit,
        "normalized": bool(normalize),
        "raw_max": raw_max,
        "gated_fraction": rows["gated_fraction"],
        "beam": {"energy_mev": beam.energy_mev, "theta0_rad": beam.theta0},
        "crystal": {
            "element": crystal.element,
            "axis": crystal.axis,
            "lattice_constant_m": crystal.lattice_constant,
            "thermal_u1_m": crystal.thermal_u1,
            "m_max": crystal.m_max,
        },
        "n_transitions": len(solution.transitions),
        "code_version": CODE_VERSION,
    }
    return AngularMap(grid.theta_deg.copy(), grid.phi_deg.copy(), values, meta)


def _map_rows(theta, phi, solution, qn, lams, mode, cr_limit, workers):
    n_rows = theta.size
    if workers <= 1 or n_rows < 4:
        return _compute_rows((theta, phi, solution, qn, lams, mode, cr_limit))
    chunks = np.array_split(np.arange(n_rows), min(workers, n_rows))
    args = [(theta[c], phi, solution, qn, lams, mode, cr_limit) for c in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_compute_rows, args))
    values = np.concatenate([p["values"] for p in parts], axis=0)
    gated = float(np.mean([p["gated_fraction"] for p in parts]))
    return {"values": values, "gated_fraction": gated}


def _compute_rows(args):
    theta, phi, solution, qn, lams, mode, cr_limit = args
    if mode == "endpoint":
        values, gated = _endpoint_rows(theta, phi, solution, qn, lams, cr_limit)
    else:
        values, gated = _integrated_rows(theta, phi, solution, qn, lams, cr_limit)
    return {"values": values, "gated_fraction": gated}


def _endpoint_rows(theta, phi, solution, qn, lams, cr_limit):
    """Vectorized endpoint-mode accumulation over transitions.

    Exploits that the wave-vector harmonics scale linearly with omega and
    that Delta_max, omega, and the longitudinal closed form depend on Theta
    only, so all (Theta, Phi)-sized work per transition reduces to the 15
    (m_s, n) blocks shared by both helicities. Matches twcr_amplitude
    exactly (asserted in the test suite).
    """
    from .matrixelement import _eps_cr_components, _int_j, _kappa_harmonics
    from .specfun import wigner_d1

    beam = solution.beam
    beta = beam.beta
    theta_k = qn.theta_k
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    col = theta[:, None]

    # unit-frequency harmonic tables (omega scaled back in per transition)
    x_hat, y_hat, xy_hat = _kappa_harmonics(
        tt, pp, math.sin(theta_k) / C_LIGHT, math.cos(theta_k) / C_LIGHT
    )
    harmonics = (0,) if cr_limit else list(range(-2, 3))
    c1_hat = {}
    c2_hat = {}
    d1 = {}
    for m_s in (-1, 0, 1):
        ex, ey, ez = _eps_cr_components(m_s, tt, pp)
        for n in harmonics:
            c1_hat[m_s, n] = y_hat.get(n, 0.0) * ex + x_hat.get(n, 0.0) * ey
            c2_hat[m_s, n] = xy_hat[n] * ez
        for lam in lams:
            d1[m_s, lam] = wigner_d1(m_s, lam, theta_k)

    orders = sorted({0 if cr_limit else qn.m - m_s - n for m_s in (-1, 0, 1) for n in harmonics})
    phase_rows = {
        m_o: (1j) ** m_o * np.exp(-1j * m_o * phi)[None, :] for m_o in orders
    }

    cos_eta = np.cos(col - theta_k)
    values = np.zeros(tt.shape)
    gated = []
    prefactor = FINE_STRUCTURE / (4.0 * math.pi) * math.sin(theta_k) * C_LIGHT * beta
    for t in solution.transitions:
        p_i = solution.band_populations.get(t.initial.band, 0.0)
        weight = p_i / solution.n_subbands
        if weight <= 0.0:
            continue
        wmax = omega_max(t, beta)
        dmax = np.maximum(wmax / C_LIGHT * cos_eta, 0.0)
        om = beta * C_LIGHT * dmax + t.omega_fi
        a_col = om / C_LIGHT * np.cos(col) * math.cos(theta_k)
        b_col = om / C_LIGHT * np.sin(col) * math.sin(theta_k)
        gated.append(float(np.mean((dmax - a_col) <= b_col)))
        int_cols = {m_o: _int_j(m_o, dmax - a_col, b_col) for m_o in orders}

        s1 = t.xy_factor * (t.omega_fi / C_LIGHT) * om
        s2 = t.xy_factor * beta * om * om
        amps = {lam: np.zeros(tt.shape, dtype=complex) for lam in lams}
        for m_s in (-1, 0, 1):
            for n in harmonics:
                m_o = 0 if cr_limit else qn.m - m_s - n
                core = (
                    s1 * int_cols[m_o] * c1_hat[m_s, n]
                    + s2 * int_cols[m_o] * c2_hat[m_s, n]
                ) * phase_rows[m_o]
                for lam in lams:
                    amps[lam] += d1[m_s, lam] * core
        amp2 = sum(np.abs(a) ** 2 for a in amps.values())
        values += (2.0 * math.pi) ** 2 * prefactor * weight * dmax * amp2
    return values, float(np.mean(gated)) if gated else 0.0


def _integrated_rows(theta, phi, solution, qn, lams, cr_limit):
    beam = solution.beam
    beta = beam.beta
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    values = np.zeros(tt.shape)
    gated = []
    for t in solution.transitions:
        p_i = solution.band_populations.get(t.initial.band, 0.0)
        weight = p_i / solution.n_subbands
        if weight <= 0.0:
            continue
        wmax = omega_max(t, beta)
        dmax = delta_max(wmax, tt, qn.theta_k)
        om_end = beta * C_LIGHT * dmax + t.omega_fi
        gated.append(gated_fraction(tt, qn.theta_k, om_end, dmax))
        for lam in lams:
            amp2, w = _integrated_amp2(t, qn.m, lam, qn.theta_k, tt, pp, dmax, beta)
            values += (
                (FINE_STRUCTURE / (4.0 * math.pi)) * math.sin(qn.theta_k)
                * weight * w * amp2
            )
    return values, float(np.mean(gated)) if gated else 0.0


def map_correlation(a: AngularMap, b: AngularMap) -> float:
    """Pearson correlation between two maps on the same grid (shape metric)."""
    x = a.values.ravel()
    y = b.values.ravel()
    if x.shape != y.shape:
        raise ValueError("maps must share a grid")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        return 0.0
    return float(xc @ yc) / denom


def phi_anisotropy(amap: AngularMap) -> float:
    """std/mean of the values over Phi along the Theta ring holding the map
    maximum; 0 for a perfectly cylindrical distribution."""
    i_peak = int(np.argmax(amap.values.max(axis=1)))
    ring = amap.values[i_peak]
    mean = float(ring.mean())
    if mean == 0.0:
        return 0.0
    return float(ring.std()) / mean


def local_maxima(amap: AngularMap, min_fraction: float = 0.25):
    """Grid local maxima (8-neighborhood, periodic in Phi) above a fraction
    of the global maximum, merged into connected clusters.

    Returns a list of (theta_deg, phi_deg, value) cluster peaks.
    """
    v = amap.values
    if v.max() <= 0.0:
        return []
    shifted = []
    for dt in (-1, 0, 1):
        for dp in (-1, 0, 1):
            if dt == 0 and dp == 0:
                continue
            s = np.roll(v, dp, axis=1)
            if dt == -1:
                s = np.vstack([s[1:], np.full((1, v.shape[1]), -np.inf)])
            elif dt == 1:
                s = np.vstack([np.full((1, v.shape[1]), -np.inf), s[:-1]])
            shifted.append(s)
    is_max = np.logical_and.reduce([v >= s for s in shifted])
    is_max &= v >= min_fraction * v.max()

    # merge adjacent candidate nodes (flood fill, periodic in phi)
    seen = np.zeros_like(is_max, dtype=bool)
    peaks = []
    nt, npz = v.shape
    for i in range(nt):
        for j in range(npz):
            if not is_max[i, j] or seen[i, j]:
                continue
            stack = [(i, j)]
            cluster = []
            seen[i, j] = True
            while stack:
                a, b = stack.pop()
                cluster.append((a, b))
                for da in (-1, 0, 1):
                    for db in (-1, 0, 1):
                        na, nb = a + da, (b + db) % npz
                        if 0 <= na < nt and is_max[na, nb] and not seen[na, nb]:
                            seen[na, nb] = True
                            stack.append((na, nb))
            a_best, b_best = max(cluster, key=lambda ab: v[ab])
            peaks.append(
                (float(amap.theta_deg[a_best]), float(amap.phi_deg[b_best]), float(v[a_best, b_best]))
            )
    peaks.sort(key=lambda p: -p[2])
    return peaks
