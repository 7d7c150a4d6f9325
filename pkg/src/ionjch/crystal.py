"""Ion-chain geometry, radial normal modes and the derived model coefficients.

All lengths are in units of the Coulomb length scale
``l = (e^2 / 4 pi eps0 M omega_z^2)^(1/3)``, so the physical constants (ion
mass, charge, vacuum permittivity, ground-state spread ``x0``) never enter the
numerics. Energies handed to the Hamiltonian are in units of the JC coupling
``g = eta * Omega``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SolverError

#: Newton iteration budget for the force balance.
MAX_NEWTON_STEPS = 200

#: Fraction of the radial trap frequency above which the RWA guard trips.
RWA_FRACTION = 0.1


def _inverse_cubes(positions):
    u = np.asarray(positions, dtype=float)
    diff = np.abs(u[:, None] - u[None, :])
    with np.errstate(divide="ignore"):
        inv = 1.0 / diff**3
    np.fill_diagonal(inv, 0.0)
    return inv


def _check_positions(positions):
    u = np.asarray(positions, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise DomainError("positions must be a non-empty 1-D sequence")
    if np.any(np.diff(u) <= 0):
        raise DomainError("positions must be strictly increasing (duplicate or unordered ions)")
    return u


def _force_residual(u):
    # u_m - sum_{k<m} (u_m-u_k)^-2 + sum_{k>m} (u_m-u_k)^-2
    d = u[:, None] - u[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.sign(d) / d**2
    np.fill_diagonal(f, 0.0)
    return u - f.sum(axis=1)


def equilibrium_positions(n_ions, tolerance=1e-13):
    """Dimensionless equilibrium positions ``u_k`` of a linear ion chain.

    Solves the axial force balance with a damped Newton iteration started from
    uniformly spaced ions. The Jacobian of the force balance coincides with the
    mode matrix, so :func:`mode_matrix` is reused for it.

    Parameters
    ----------
    n_ions : int
        Number of ions, at least 1.
    tolerance : float
        Largest accepted force residual on any ion.

    Returns
    -------
    numpy.ndarray
        Strictly increasing positions, exactly antisymmetric about zero.
    """
    n = int(n_ions)
    if n < 1 or n != n_ions:
        raise DomainError(f"n_ions must be a positive integer, got {n_ions!r}")
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    if n == 1:
        return np.zeros(1)

    u = np.linspace(-1.0, 1.0, n) * 2 * (0.48 * n**0.56)
    res = _force_residual(u)
    norm = np.max(np.abs(res))
    for _ in range(MAX_NEWTON_STEPS):
        if norm < tolerance:
            break
        step = np.linalg.solve(mode_matrix(u), res)
        lam = 1.0
        while lam > 1e-12:
            trial = u - lam * step
            if np.all(np.diff(trial) > 0):
                trial_res = _force_residual(trial)
                trial_norm = np.max(np.abs(trial_res))
                if trial_norm < norm or trial_norm < tolerance:
                    break
            lam *= 0.5
        else:
            raise SolverError("equilibrium line search stalled", residual=norm)
        u, res, norm = trial, trial_res, trial_norm
    else:
        if norm >= tolerance:
            raise SolverError(
                f"equilibrium not converged after {MAX_NEWTON_STEPS} Newton steps", residual=norm
            )

    # enforce the reflection symmetry exactly
    u = 0.5 * (u - u[::-1])
    return u


def mode_matrix(positions):
    """Coulomb mode matrix ``A_km = delta_km + 2 sum_{s!=k} (delta_km - delta_sm)/|u_k-u_s|^3``."""
    u = _check_positions(positions)
    inv = _inverse_cubes(u)
    a = -2.0 * inv
    a[np.diag_indices_from(a)] = 1.0 + 2.0 * inv.sum(axis=1)
    return a


def _fix_signs(vectors):
    # largest-magnitude entry positive; argmax takes the lowest index on ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@dataclass(frozen=True)
class RadialModeSet:
    """Radial normal modes of the chain and their Bogoliubov data.

    Modes are indexed by ascending eigenvalue of the mode matrix, so index 0 is
    the center-of-mass mode and the last index is the lowest radial frequency.
    ``collective_frequencies`` are in units of ``omega_x``.
    """

    alpha: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column p is b^(p)
    gammas: np.ndarray
    thetas: np.ndarray
    collective_frequencies: np.ndarray

    @property
    def lowest_mode(self):
        """Eigenvector of the lowest-frequency radial mode."""
        return self.eigenvectors[:, -1]

    def cosh_deviation(self):
        """``cosh(theta_p) - 1`` for every mode."""
        return np.cosh(self.thetas) - 1.0


def radial_modes(a_matrix, alpha):
    """Diagonalize the mode matrix and attach squeezing parameters.

    ``gamma_p = 1 + alpha^2 (1 - lambda_p) / 2`` and
    ``theta_p = -ln(gamma_p) / 4``; the radial frequency of mode ``p`` is
    ``omega_x * sqrt(gamma_p)``.
    """
    a = np.asarray(a_matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("mode matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise DomainError("mode matrix must be symmetric")
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")

    lam, vec = np.linalg.eigh(0.5 * (a + a.T))
    vec = _fix_signs(vec)
    gammas = 1.0 + alpha**2 * (1.0 - lam) / 2.0
    if gammas[-1] <= 0:
        crit = math.sqrt(2.0 / (lam[-1] - 1.0))
        raise DomainError(
            f"linear chain unstable: gamma_N = {gammas[-1]:.6g} <= 0; alpha = {alpha} exceeds "
            f"the zig-zag threshold alpha_c = {crit:.6g}"
        )
    thetas = -0.25 * np.log(gammas)
    return RadialModeSet(
        alpha=float(alpha),
        eigenvalues=lam,
        eigenvectors=vec,
        gammas=gammas,
        thetas=thetas,
        collective_frequencies=np.sqrt(gammas),
    )


@dataclass(frozen=True)
class IonChainGeometry:
    """Local-phonon coefficients of the chain.

    ``site_frequencies[k] = -scale * sum_s |u_k-u_s|^-3`` and
    ``hopping[k, m] = scale * |u_k-u_m|^-3``, where ``scale`` is
    ``alpha*omega_z/2`` in whatever energy unit the caller chose (units of
    ``g`` for Hamiltonian work).
    """

    positions: np.ndarray
    scale: float
    site_frequencies: np.ndarray
    hopping: np.ndarray

    @property
    def n_ions(self):
        return self.positions.size

    def rescaled(self, scale):
        """Same geometry with a different overall coupling scale."""
        return coupling_geometry(self.positions, scale)

    def one_phonon_matrix(self, omega_x=0.0):
        """Single-excitation block ``(omega_x + omega_k) delta_km + t_km`` of the local-mode Hamiltonian."""
        return np.diag(omega_x + self.site_frequencies) + self.hopping


def coupling_geometry(positions, scale):
    """Site frequencies and hopping matrix for an explicit coupling scale."""
    u = _check_positions(positions)
    if scale < 0:
        raise DomainError("coupling scale must be non-negative")
    inv = _inverse_cubes(u)
    return IonChainGeometry(
        positions=u,
        scale=float(scale),
        site_frequencies=-scale * inv.sum(axis=1),
        hopping=scale * inv,
    )


def site_couplings(positions, alpha, omega_z_over_g):
    """Site frequencies and hopping in units of g with prefactor ``alpha*omega_z/2``."""
    if not alpha > 0 or not omega_z_over_g > 0:
        raise DomainError("alpha and omega_z_over_g must be positive")
    return coupling_geometry(positions, alpha * omega_z_over_g / 2.0)


@dataclass(frozen=True)
class SqueezedStateAmplitudes:
    """Even-Fock amplitudes ``c_n`` of a local squeezed vacuum, ``n = 0..cutoff``.

    ``deficit`` is the probability weight beyond the cutoff.
    """

    theta: float
    cutoff: int
    amplitudes: np.ndarray
    deficit: float


def squeezed_amplitudes(theta, cutoff, tail_terms=1_000_000):
    """Amplitudes on ``|2n>`` of a squeezed vacuum with squeezing angle ``theta``.

    ``c_n = sqrt((2n-1)!!/(2n)!!) tanh(theta)^n / sqrt(cosh theta)`` with the
    convention ``(-1)!! = 0!! = 1``. The deficit is summed from the tail terms
    directly so that it stays accurate (and monotone in ``cutoff``) far below
    double-precision round-off of ``1 - sum c_n^2``.
    """
    cutoff = int(cutoff)
    if cutoff < 0:
        raise DomainError("cutoff must be non-negative")
    th = math.tanh(theta)
    c = np.empty(cutoff + 1)
    c[0] = 1.0 / math.sqrt(math.cosh(theta))
    for n in range(1, cutoff + 1):
        c[n] = c[n - 1] * math.sqrt((2 * n - 1) / (2 * n)) * th

    x = th * th
    term = c[cutoff] ** 2
    tail = []
    n = cutoff
    for _ in range(tail_terms):
        n += 1
        term *= (2 * n - 1) / (2 * n) * x
        if term == 0.0 or term < 1e-300:
            break
        tail.append(term)
        if term < 1e-40 * max(tail[0], 1e-300):
            break
    else:
        # slowly converging tail (theta large): fall back to the complement
        tail = [max(0.0, 1.0 - math.fsum(c**2))]
    return SqueezedStateAmplitudes(
        theta=float(theta), cutoff=cutoff, amplitudes=c, deficit=math.fsum(tail)
    )


def laser_detuning(omega_x, delta):
    """Laser detuning ``delta_L = -omega_x - Delta`` for sideband offset ``Delta``."""
    return -omega_x - delta


def sideband_offset(omega_x, laser_detuning):
    """Inverse of :func:`laser_detuning`."""
    return -omega_x - laser_detuning


@dataclass(frozen=True)
class PhysicalTrapConfig:
    """Trap and laser parameters in physical angular-frequency units.

    Only ratios of these enter the model, so any common unit works.
    """

    n_ions: int
    omega_z: float
    omega_x: float
    rabi: float
    lamb_dicke: float
    delta: float = 0.0

    def __post_init__(self):
        if int(self.n_ions) != self.n_ions or self.n_ions < 1:
            raise DomainError("n_ions must be a positive integer")
        if not (self.omega_z > 0 and self.omega_x > 0):
            raise DomainError("trap frequencies must be positive")
        if not self.omega_x > self.omega_z:
            raise DomainError("omega_x must exceed omega_z for a linear chain")
        if self.lamb_dicke < 0:
            raise DomainError("lamb_dicke must be non-negative")
        if not self.rabi > 0:
            raise DomainError("rabi frequency must be positive")
        if not self.lamb_dicke * self.rabi > 0:
            raise DomainError("coupling g = lamb_dicke * rabi must be positive")

    @property
    def g(self):
        return self.lamb_dicke * self.rabi

    @property
    def alpha(self):
        return self.omega_z / self.omega_x

    @property
    def laser_detuning(self):
        return laser_detuning(self.omega_x, self.delta)


@dataclass(frozen=True)
class ModelParameters:
    """Dimensionless model inputs; energies in units of g."""

    n_ions: int
    alpha: float
    t_scale: float
    delta_over_g: float
    g: float = field(default=1.0, init=False)
    rwa_warning: bool = False

    def __post_init__(self):
        if self.t_scale < 0:
            raise DomainError("t_scale must be non-negative")


def physical_to_model(config):
    """Convert a :class:`PhysicalTrapConfig` to g units.

    The RWA flag is raised (and a :class:`UserWarning` emitted) when the
    largest hopping or ``g`` itself exceeds ``omega_x / 10``.
    """
    g = config.g
    alpha = config.alpha
    t_scale = alpha * config.omega_z / 2.0 / g
    omega_x_over_g = config.omega_x / g

    u = equilibrium_positions(config.n_ions)
    max_inv = _inverse_cubes(u).max() if u.size > 1 else 0.0
    limit = RWA_FRACTION * omega_x_over_g
    flag = bool(t_scale * max_inv > limit or 1.0 > limit)
    if flag:
        warnings.warn("hopping or g is not small against omega_x; RWA may be inaccurate", stacklevel=2)
    return ModelParameters(
        n_ions=config.n_ions,
        alpha=alpha,
        t_scale=t_scale,
        delta_over_g=config.delta / g,
        rwa_warning=flag,
    )
