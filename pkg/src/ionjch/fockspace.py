"""Fixed-excitation basis of qubit and phonon occupations.

A basis state of an ``N``-site sector with ``M`` excitations is a pair of
words: qubit bits ``s_k`` (0 = ground, 1 = excited) and phonon counts ``n_k``
with ``sum(n_k + s_k) = M``. States are ordered lexicographically on
``(s_1..s_N, n_1..n_N)``.

Lookup keys pack each state into one integer: ``N`` phonon fields of
``bits`` bits each (at least 4, widened when ``M > 15``) followed by ``N``
single qubit bits. Site 0 occupies the most significant field.
"""

import hashlib
import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import CapacityError, ConsistencyError, DomainError

ORDERING_VERSION = "lex-qubit-phonon-v1"

DEFAULT_CAPACITY = 5_000_000


def sector_dimension(n_sites, total_excitations):
    """Closed-form dimension ``sum_q C(N,q) C(M-q+N-1, N-1)``."""
    n, m = n_sites, total_excitations
    return sum(comb(n, q) * comb(m - q + n - 1, n - 1) for q in range(min(n, m) + 1))


def _compositions(total, parts):
    # lexicographically ascending weak compositions
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def fingerprint(n_sites, total_excitations):
    """Short hash identifying a sector and its ordering convention."""
    text = f"N={n_sites};M={total_excitations};order={ORDERING_VERSION}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Enumerated sector of ``n_sites`` sites holding ``total_excitations`` quanta.

    ``qubits`` and ``phonons`` are ``(dimension, n_sites)`` integer arrays;
    row ``i`` is basis state ``i``.
    """

    n_sites: int
    total_excitations: int
    qubits: np.ndarray
    phonons: np.ndarray
    bits: int
    _index: dict = field(repr=False)

    @property
    def dimension(self):
        return self.qubits.shape[0]

    @property
    def fingerprint(self):
        return fingerprint(self.n_sites, self.total_excitations)

    @property
    def states(self):
        """Basis states as ``(qubits, phonons)`` tuple pairs."""
        return [
            (tuple(int(x) for x in s), tuple(int(x) for x in n))
            for s, n in zip(self.qubits, self.phonons)
        ]

    def site_totals(self):
        """Per-site excitation numbers ``n_k + s_k`` for every state."""
        return self.qubits + self.phonons

    def pack(self, qubits, phonons):
        """Integer keys of the given occupation arrays (broadcast over rows)."""
        q = np.asarray(qubits, dtype=np.int64)
        n = np.asarray(phonons, dtype=np.int64)
        ns = self.n_sites
        n_shift = (ns - 1 - np.arange(ns)) * self.bits + ns
        q_shift = ns - 1 - np.arange(ns)
        return (n << n_shift).sum(axis=-1) + (q << q_shift).sum(axis=-1)

    def index(self, qubits, phonons):
        """Ordinal of one configuration; ``KeyError`` if it is not in the sector."""
        return self._index[int(self.pack(qubits, phonons))]

    def lookup(self, keys):
        """Vectorized ordinal lookup; ``-1`` for keys outside the sector."""
        get = self._index.get
        return np.fromiter((get(int(k), -1) for k in keys), dtype=np.int64, count=len(keys))

    def dump(self, path):
        """Write the basis as text: header ``% N M dimension``, then ``s_1 .. s_N | n_1 .. n_N``."""
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"% {self.n_sites} {self.total_excitations} {self.dimension}\n")
            for s, n in zip(self.qubits, self.phonons):
                fh.write(" ".join(map(str, s)) + " | " + " ".join(map(str, n)) + "\n")


def build_sector(n_sites, total_excitations, capacity=DEFAULT_CAPACITY):
    """Enumerate all configurations of a fixed-excitation sector."""
    if int(n_sites) != n_sites or n_sites < 1:
        raise DomainError("n_sites must be a positive integer")
    if int(total_excitations) != total_excitations or total_excitations < 0:
        raise DomainError("total_excitations must be a non-negative integer")
    n, m = int(n_sites), int(total_excitations)
    dim = sector_dimension(n, m)
    if dim > capacity:
        raise CapacityError(f"sector N={n}, M={m} has dimension {dim} > cap {capacity}")

    qubits = np.empty((dim, n), dtype=np.int64)
    phonons = np.empty((dim, n), dtype=np.int64)
    row = 0
    for word in itertools.product((0, 1), repeat=n):
        rest = m - sum(word)
        if rest < 0:
            continue
        for comp in _compositions(rest, n):
            qubits[row] = word
            phonons[row] = comp
            row += 1
    assert row == dim

    bits = max(4, m.bit_length())
    if n * (bits + 1) > 63:
        raise CapacityError(f"N={n}, M={m} does not fit the 64-bit packed state key")
    basis = SectorBasis(n, m, qubits, phonons, bits, {})
    keys = basis.pack(qubits, phonons)
    basis._index.update((int(k), i) for i, k in enumerate(keys))
    return basis


@dataclass(frozen=True)
class LadderAction:
    """Sparse action of one operator: ``op |source> = factor |target>``."""

    source: np.ndarray
    target: np.ndarray
    factor: np.ndarray


LADDER_KINDS = ("jc_lower", "jc_raise", "hop")


def apply_ladder(basis, kind, site, to_site=None):
    """Action table of a number-conserving ladder term on every basis state.

    ``kind`` is one of

    * ``"jc_lower"``: ``sigma_k^+ a_k`` (phonon absorbed, qubit excited)
    * ``"jc_raise"``: ``sigma_k^- a_k^dag`` (qubit decays, phonon emitted)
    * ``"hop"``: ``a_site a_to_site^dag`` (one phonon moves ``site -> to_site``)

    States annihilated by the operator are omitted from the table.
    """
    n_sites = basis.n_sites
    if not 0 <= site < n_sites:
        raise DomainError(f"site {site} outside 0..{n_sites - 1}")
    q = basis.qubits.copy()
    n = basis.phonons.copy()
    if kind == "jc_lower":
        ok = (n[:, site] > 0) & (q[:, site] == 0)
        factor = np.sqrt(n[:, site])
        n[:, site] -= 1
        q[:, site] += 1
    elif kind == "jc_raise":
        ok = q[:, site] == 1
        factor = np.sqrt(n[:, site] + 1)
        n[:, site] += 1
        q[:, site] -= 1
    elif kind == "hop":
        if to_site is None or not 0 <= to_site < n_sites or to_site == site:
            raise DomainError("hop needs a distinct destination site")
        ok = n[:, site] > 0
        factor = np.sqrt(n[:, site] * (n[:, to_site] + 1.0))
        n[:, site] -= 1
        n[:, to_site] += 1
    else:
        raise DomainError(f"unknown ladder kind {kind!r}; expected one of {LADDER_KINDS}")

    source = np.flatnonzero(ok)
    target = basis.lookup(basis.pack(q[source], n[source]))
    if np.any(target < 0):
        raise ConsistencyError("ladder image left the sector")
    return LadderAction(source=source, target=target, factor=factor[source].astype(float))
