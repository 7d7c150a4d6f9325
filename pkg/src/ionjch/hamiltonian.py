"""Interaction-picture JCH Hamiltonian on a fixed-excitation sector.

In units of g,

    H = sum_k omega_k n_k + Delta sum_k s_k + sum_k (sigma_k^+ a_k + h.c.)
        + sum_{k>m} t_km (a_k^dag a_m + h.c.)

The chemical-potential term is constant on a sector and is left out.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .crystal import IonChainGeometry
from .errors import CapacityError, ConsistencyError, DomainError
from .fockspace import apply_ladder, fingerprint

FULL_SPACE_CAPACITY = 100_000


@dataclass(frozen=True)
class HamiltonianSpec:
    geometry: IonChainGeometry
    delta_over_g: float
    include_site_frequencies: bool = True
    uniform_hopping_override: Optional[float] = None

    @property
    def n_sites(self):
        return self.geometry.n_ions

    def coefficients(self):
        """Site frequencies and hopping matrix actually used (units of g)."""
        geo = self.geometry
        if self.uniform_hopping_override is not None:
            geo = geo.rescaled(self.uniform_hopping_override)
        omega = geo.site_frequencies if self.include_site_frequencies else np.zeros(geo.n_ions)
        return omega, geo.hopping

    @property
    def t_over_g(self):
        if self.uniform_hopping_override is not None:
            return float(self.uniform_hopping_override)
        return self.geometry.scale


@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """Real-symmetric sparse matrix stored as its upper triangle.

    ``rows``, ``cols`` and ``values`` hold the entries with ``row <= col`` in
    row-major sorted order.
    """

    dimension: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    fingerprint: str
    n_sites: int = 0
    total_excitations: int = 0

    @property
    def nnz(self):
        return self.values.size

    def to_sparse(self):
        """Full symmetric CSR matrix."""
        upper = sp.coo_matrix((self.values, (self.rows, self.cols)), shape=(self.dimension,) * 2)
        strict = sp.triu(upper, k=1)
        return (upper + strict.T).tocsr()

    def to_dense(self):
        return self.to_sparse().toarray()

    def dump(self, path):
        """Coordinate text dump: ``% N M dimension nnz`` then ``row col value`` lines."""
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"% {self.n_sites} {self.total_excitations} {self.dimension} {self.nnz}\n")
            for r, c, v in zip(self.rows, self.cols, self.values):
                fh.write(f"{r} {c} {v:.17g}\n")


def build(spec, basis):
    """Assemble the sector Hamiltonian for ``spec`` on ``basis``."""
    if spec.n_sites != basis.n_sites or basis.fingerprint != fingerprint(
        spec.n_sites, basis.total_excitations
    ):
        raise ConsistencyError(
            f"Hamiltonian for {spec.n_sites} sites cannot act on basis "
            f"{basis.fingerprint} with {basis.n_sites} sites"
        )
    omega, hopping = spec.coefficients()
    dim = basis.dimension
    n_sites = basis.n_sites

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [basis.phonons @ omega + spec.delta_over_g * basis.qubits.sum(axis=1)]

    # one term per unordered pair of states: sigma^+ a per site, and one hop
    # direction per site pair (the conjugate fills the lower triangle)
    for k in range(n_sites):
        act = apply_ladder(basis, "jc_lower", k)
        rows.append(act.source)
        cols.append(act.target)
        vals.append(act.factor)
        for m in range(k + 1, n_sites):
            if hopping[k, m] == 0:
                continue
            act = apply_ladder(basis, "hop", k, m)
            rows.append(act.source)
            cols.append(act.target)
            vals.append(hopping[k, m] * act.factor)

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals).astype(float)
    lo, hi = np.minimum(r, c), np.maximum(r, c)
    mat = sp.coo_matrix((v, (lo, hi)), shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    coo = mat.tocoo()
    if not np.all(np.isfinite(coo.data)):
        raise DomainError("non-finite Hamiltonian entry")
    return SymmetricOperator(
        dimension=dim,
        rows=coo.row.astype(np.int64),
        cols=coo.col.astype(np.int64),
        values=coo.data,
        fingerprint=basis.fingerprint,
        n_sites=n_sites,
        total_excitations=basis.total_excitations,
    )


# --- full truncated product space -------------------------------------------


def _local_ops(cutoff):
    # local site space |s, n>, index s*(cutoff+1) + n
    a = sp.diags(np.sqrt(np.arange(1, cutoff + 1.0)), 1)
    eye_b = sp.identity(cutoff + 1)
    sigma_plus = sp.csr_matrix(([1.0], ([1], [0])), shape=(2, 2))
    excited = sp.diags([0.0, 1.0])
    return {
        "a": sp.kron(sp.identity(2), a),
        "adag": sp.kron(sp.identity(2), a.T),
        "num": sp.kron(sp.identity(2), a.T @ a),
        "sigma_plus": sp.kron(sigma_plus, eye_b),
        "sigma_minus": sp.kron(sigma_plus.T, eye_b),
        "excited": sp.kron(excited, eye_b),
    }


def local_operator(name, site, n_sites, cutoff):
    """Single-site operator embedded in the truncated product space.

    ``name`` is one of ``a``, ``adag``, ``num``, ``sigma_plus``,
    ``sigma_minus``, ``excited``. Each site keeps phonon numbers
    ``0..cutoff``.
    """
    op = _local_ops(cutoff)[name]
    local_dim = 2 * (cutoff + 1)
    factors = [sp.identity(local_dim)] * n_sites
    factors[site] = op
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)


def full_space_excitations(n_sites, cutoff):
    """Total excitation number of every product state in the truncated space."""
    local = np.add.outer(np.arange(2), np.arange(cutoff + 1)).ravel()
    tot = np.zeros(1, dtype=np.int64)
    for _ in range(n_sites):
        tot = np.add.outer(tot, local).ravel()
    return tot


def full_space_operator(spec, cutoff):
    """Hamiltonian on the truncated product space, built from Kronecker products."""
    n_sites = spec.n_sites
    if (2 * (cutoff + 1)) ** n_sites > FULL_SPACE_CAPACITY:
        raise CapacityError(
            f"truncated space (2*({cutoff}+1))^{n_sites} exceeds {FULL_SPACE_CAPACITY} states"
        )
    omega, hopping = spec.coefficients()
    ops = {
        name: [local_operator(name, k, n_sites, cutoff) for k in range(n_sites)]
        for name in ("a", "adag", "num", "sigma_plus", "sigma_minus", "excited")
    }
    h = sum(omega[k] * ops["num"][k] + spec.delta_over_g * ops["excited"][k] for k in range(n_sites))
    for k in range(n_sites):
        h = h + ops["sigma_plus"][k] @ ops["a"][k] + ops["sigma_minus"][k] @ ops["adag"][k]
        for m in range(k):
            h = h + hopping[k, m] * (ops["adag"][k] @ ops["a"][m] + ops["a"][k] @ ops["adag"][m])
    return sp.csr_matrix(h)


def conservation_check(spec, cutoff_per_site, perturbation=None):
    """True iff the Hamiltonian has no elements between different excitation blocks.

    The operator is built independently of the sector machinery on the full
    truncated space. ``perturbation`` is an optional extra operator on that
    space (e.g. a bare creation operator) added before the scan.
    """
    h = full_space_operator(spec, cutoff_per_site)
    if perturbation is not None:
        h = h + perturbation
    coo = sp.coo_matrix(h)
    coo.eliminate_zeros()
    exc = full_space_excitations(spec.n_sites, cutoff_per_site)
    return bool(np.all(exc[coo.row] == exc[coo.col]))
