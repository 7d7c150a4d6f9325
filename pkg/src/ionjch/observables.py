"""Ground-state diagnostics: site number fluctuations, Mott lobes, superfluid reference.

Fluctuations are reported as standard deviations,
``D X = sqrt(<X^2> - <X>^2)``, not as variances.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .crystal import coupling_geometry
from .errors import ConsistencyError, DomainError
from .fockspace import build_sector
from .hamiltonian import HamiltonianSpec, build
from .solver import ground_state


@dataclass(frozen=True)
class ObservableSet:
    """Per-site moments of the total, qubit and phonon excitation numbers."""

    mean_total: tuple
    var_total: tuple
    mean_qubit: tuple
    var_qubit: tuple
    mean_phonon: tuple
    n_sites: int
    total_excitations: int
    delta_over_g: float = float("nan")
    t_over_g: float = float("nan")
    degenerate: bool = False

    def to_dict(self):
        d = asdict(self)
        for key in ("mean_total", "var_total", "mean_qubit", "var_qubit", "mean_phonon"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, data):
        kw = dict(data)
        for key in ("mean_total", "var_total", "mean_qubit", "var_qubit", "mean_phonon"):
            kw[key] = tuple(float(x) for x in kw[key])
        return cls(**kw)


def _std(p, values, mean):
    # centered form; <X^2> - <X>^2 loses everything below ~1e-8 to cancellation
    return np.sqrt(p @ (values - mean) ** 2)


def measure(result, basis, delta_over_g=float("nan"), t_over_g=float("nan")):
    """Evaluate site observables on a ground state.

    All number operators are diagonal in the occupation basis, so the moments
    are weighted sums of basis occupations with weights ``|psi_i|^2``.
    """
    vec = np.asarray(result.vector)
    if vec.size != basis.dimension or (result.fingerprint and result.fingerprint != basis.fingerprint):
        raise ConsistencyError("ground state and basis belong to different sectors")
    p = vec**2
    p = p / p.sum()
    tot = basis.site_totals().astype(float)
    qub = basis.qubits.astype(float)
    pho = basis.phonons.astype(float)

    mean_tot = p @ tot
    mean_q = p @ qub
    return ObservableSet(
        mean_total=tuple(mean_tot.tolist()),
        var_total=tuple(_std(p, tot, mean_tot).tolist()),
        mean_qubit=tuple(mean_q.tolist()),
        var_qubit=tuple(_std(p, qub, mean_q).tolist()),
        mean_phonon=tuple((p @ pho).tolist()),
        n_sites=basis.n_sites,
        total_excitations=basis.total_excitations,
        delta_over_g=float(delta_over_g),
        t_over_g=float(t_over_g),
        degenerate=bool(result.degenerate),
    )


def single_site_ground_energy(n, delta_over_g):
    """Lowest energy of one ion with ``n`` excitations and no hopping, in units of g."""
    if n < 0:
        raise DomainError("n must be non-negative")
    if n == 0:
        return 0.0
    d = float(delta_over_g)
    return d / 2.0 - math.sqrt(d * d / 4.0 + n)


def single_site_ground_energy_numeric(n, delta_over_g, method="dense"):
    """Same quantity from diagonalizing the one-site sector Hamiltonian."""
    geo = coupling_geometry([0.0], 0.0)
    basis = build_sector(1, n)
    op = build(HamiltonianSpec(geo, delta_over_g), basis)
    return ground_state(op, method=method).energy


@dataclass(frozen=True)
class MottCurve:
    """Chemical potential ``mu(n) = E_g(n+1) - E_g(n)`` sampled over detuning.

    ``lobe_width`` holds ``mu(n+1) - mu(n)`` where ``mu(n+1)`` was requested,
    else it is ``None``.
    """

    n: int
    delta_over_g: np.ndarray
    mu: np.ndarray
    lobe_width: np.ndarray = field(default=None)


def mott_lobes(delta_grid, n_max, validate=False, tolerance=1e-9):
    """Chemical-potential curves ``mu(0..n_max)`` and lobe widths on a detuning grid.

    With ``validate=True`` every analytic energy is compared with a one-site
    numeric diagonalization and a :class:`ConsistencyError` is raised if they
    differ by more than ``tolerance``.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    grid = np.asarray(delta_grid, dtype=float)
    energies = np.array(
        [[single_site_ground_energy(n, d) for d in grid] for n in range(n_max + 2)]
    )
    if validate:
        for n in range(n_max + 2):
            for j, d in enumerate(grid):
                num = single_site_ground_energy_numeric(n, d)
                if abs(num - energies[n, j]) > tolerance:
                    raise ConsistencyError(
                        f"numeric E_g({n}, {d}) = {num} disagrees with analytic {energies[n, j]}"
                    )
    mu = np.diff(energies, axis=0)  # mu[n] = E(n+1) - E(n), n = 0..n_max
    curves = []
    for n in range(n_max + 1):
        width = mu[n + 1] - mu[n] if n + 1 <= n_max else None
        curves.append(MottCurve(n=n, delta_over_g=grid, mu=mu[n], lobe_width=width))
    return curves


def superfluid_reference(modes, basis, allow_incommensurate=False):
    """Superfluid state with every phonon in the lowest radial mode.

    Amplitude of phonon configuration ``(n_1..n_N)`` (all qubits in ``|g>``)
    is ``sqrt(M! / prod n_k!) prod b_k^{n_k}``; all other basis states get 0.
    """
    if modes.eigenvectors.shape[0] != basis.n_sites:
        raise ConsistencyError("mode set and basis have different numbers of sites")
    m = basis.total_excitations
    if m != basis.n_sites and not allow_incommensurate:
        raise DomainError(
            f"superfluid reference needs M = N (got M={m}, N={basis.n_sites}); "
            "pass allow_incommensurate=True to fill the lowest mode anyway"
        )
    b = modes.lowest_mode
    psi = np.zeros(basis.dimension)
    mask = basis.qubits.sum(axis=1) == 0
    log_mf = math.lgamma(m + 1)
    for i in np.flatnonzero(mask):
        occ = basis.phonons[i]
        coef = math.exp(0.5 * (log_mf - sum(math.lgamma(x + 1) for x in occ)))
        psi[i] = coef * np.prod(b**occ)
    return psi / np.linalg.norm(psi)

