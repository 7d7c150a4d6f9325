"""Detuning sweeps of the chain ground state and a rough phase labelling."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .crystal import coupling_geometry, equilibrium_positions
from .errors import DomainError, IonJCHError
from .fockspace import build_sector
from .hamiltonian import HamiltonianSpec, build
from .observables import ObservableSet, measure
from .solver import ground_state

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepSpec:
    n_ions: int = 5
    n_excitations: int = 5
    t_over_g: float = 0.3
    delta_min: float = -15.0
    delta_max: float = 15.0
    steps: int = 301
    include_site_frequencies: bool = True
    method: str = "auto"
    eps_mi: float = 0.1
    workers: int = 1

    def __post_init__(self):
        if self.steps < 2:
            raise DomainError("a sweep needs at least 2 grid points")
        if not self.delta_min < self.delta_max:
            raise DomainError("delta_min must be below delta_max")
        if self.n_ions < 1 or self.n_excitations < 0:
            raise DomainError("invalid sector size")
        if self.t_over_g < 0:
            raise DomainError("t_over_g must be non-negative")

    def grid(self):
        return np.linspace(self.delta_min, self.delta_max, self.steps)


@dataclass(frozen=True)
class SweepRow:
    delta_over_g: float
    observables: Optional[ObservableSet]
    energy: float
    gap: float
    degenerate: bool
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: list
    fingerprint: str
    version: str = field(default="")

    @property
    def n_failed(self):
        return sum(not r.ok for r in self.rows)

    def column(self, name, site=None):
        """Per-row values of a scalar field or of one site of an observable."""
        out = []
        for r in self.rows:
            if site is None:
                out.append(getattr(r, name))
            elif r.observables is None:
                out.append(np.nan)
            else:
                out.append(getattr(r.observables, name)[site])
        return np.array(out, dtype=float)

    def provenance(self):
        return {"spec": asdict(self.spec), "version": self.version, "basis_fingerprint": self.fingerprint}


def _solve_point(spec, geometry, basis, delta):
    try:
        hspec = HamiltonianSpec(geometry, float(delta), spec.include_site_frequencies)
        res = ground_state(build(hspec, basis), method=spec.method)
        obs = measure(res, basis, delta_over_g=float(delta), t_over_g=spec.t_over_g)
        return SweepRow(float(delta), obs, res.energy, res.gap, res.degenerate)
    except IonJCHError as exc:
        return SweepRow(float(delta), None, np.nan, np.nan, False, status=f"failed: {exc}")


def _solve_chunk(args):
    spec, geometry, basis, deltas = args
    return [_solve_point(spec, geometry, basis, d) for d in deltas]


def run_sweep(spec):
    """Ground state and observables at every detuning of ``spec.grid()``.

    Rows are computed independently, so the worker count only changes run
    time. Points whose solve fails are kept as rows with a ``failed`` status.
    """
    from . import __version__

    geometry = coupling_geometry(equilibrium_positions(spec.n_ions), spec.t_over_g)
    basis = build_sector(spec.n_ions, spec.n_excitations)
    grid = spec.grid()

    workers = max(1, int(spec.workers))
    if workers == 1:
        rows = _solve_chunk((spec, geometry, basis, grid))
    else:
        chunks = [c for c in np.array_split(grid, workers * 4) if c.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_solve_chunk, [(spec, geometry, basis, c) for c in chunks])
            rows = [row for part in parts for row in part]

    result = SweepResult(spec=spec, rows=rows, fingerprint=basis.fingerprint, version=__version__)
    if result.n_failed:
        log.warning("%d of %d sweep points failed", result.n_failed, len(rows))
    return result


PHASE_LABELS = ("qubit MI", "collective MI", "collective SF", "phononic SF")


def classify_site(var_total, var_qubit, eps_mi=0.1):
    """Heuristic label from the total and qubit number fluctuations of one site.

    A visual aid only: at finite chain length there are no sharp phase
    boundaries and the single threshold ``eps_mi`` is arbitrary.
    """
    small_total = var_total < eps_mi
    small_qubit = var_qubit < eps_mi
    if small_total:
        return "qubit MI" if small_qubit else "collective MI"
    return "phononic SF" if small_qubit else "collective SF"


def classify_phases(result, eps_mi=None):
    """Per-row, per-site heuristic labels; failed rows give ``None``."""
    eps = result.spec.eps_mi if eps_mi is None else eps_mi
    labels = []
    for row in result.rows:
        if row.observables is None:
            labels.append(None)
            continue
        obs = row.observables
        labels.append([classify_site(d, da, eps) for d, da in zip(obs.var_total, obs.var_qubit)])
    return labels


def default_workers():
    """Worker count from the ``PC_WORKERS`` environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("PC_WORKERS", "1")))
    except ValueError:
        return 1
