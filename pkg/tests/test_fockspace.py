import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionjch.errors import CapacityError, DomainError
from ionjch.fockspace import apply_ladder, build_sector, sector_dimension

from oracles import brute_force_sector


def test_single_site_doublet():
    basis = build_sector(1, 1)
    assert basis.dimension == 2
    assert basis.states == [((0,), (1,)), ((1,), (0,))]


def test_two_sites_one_excitation():
    assert build_sector(2, 1).dimension == 4
    assert len(brute_force_sector(2, 1)) == 4


def test_five_by_five_dimension():
    terms = [math.comb(5, q) * math.comb(9 - q, 4) for q in range(6)]
    assert terms == [126, 350, 350, 150, 25, 1]
    assert sector_dimension(5, 5) == 1002
    assert build_sector(5, 5).dimension == 1002
    assert len(brute_force_sector(5, 5)) == 1002


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("m", range(0, 7))
def test_dimension_formula_exhaustive(n, m):
    assert build_sector(n, m).dimension == sector_dimension(n, m)


@pytest.mark.parametrize("n,m", [(1, 3), (2, 2), (3, 3), (4, 2), (3, 5)])
def test_enumeration_matches_brute_force_order(n, m):
    assert build_sector(n, m).states == brute_force_sector(n, m)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 5), m=st.integers(0, 5))
def test_index_round_trip(n, m):
    basis = build_sector(n, m)
    for i, (q, ph) in enumerate(basis.states):
        assert basis.index(q, ph) == i
    assert np.all(basis.site_totals().sum(axis=1) == m)
    assert np.all(basis.phonons <= m)


def test_capacity_cap():
    with pytest.raises(CapacityError):
        build_sector(6, 6, capacity=100)


def test_invalid_sector():
    with pytest.raises(DomainError):
        build_sector(0, 1)
    with pytest.raises(DomainError):
        build_sector(2, -1)


def test_index_outside_sector():
    basis = build_sector(2, 1)
    with pytest.raises(KeyError):
        basis.index((0, 0), (1, 1))


def test_jc_lower_single_site():
    basis = build_sector(1, 1)
    act = apply_ladder(basis, "jc_lower", 0)
    assert act.source.tolist() == [basis.index((0,), (1,))]
    assert act.target.tolist() == [basis.index((1,), (0,))]
    assert act.factor.tolist() == [1.0]


def test_hop_bosonic_factor():
    basis = build_sector(2, 2)
    act = apply_ladder(basis, "hop", 0, 1)
    src = basis.index((0, 0), (2, 0))
    j = act.source.tolist().index(src)
    assert act.target[j] == basis.index((0, 0), (1, 1))
    assert act.factor[j] == pytest.approx(math.sqrt(2) * math.sqrt(1))


def test_excited_qubit_saturates():
    basis = build_sector(2, 2)
    act = apply_ladder(basis, "jc_lower", 0)
    sources = set(act.source.tolist())
    for i, (q, _) in enumerate(basis.states):
        if q[0] == 1:
            assert i not in sources


def test_vacuum_is_annihilated():
    basis = build_sector(2, 0)
    for kind, args in [("jc_lower", (0,)), ("jc_raise", (1,)), ("hop", (0, 1))]:
        assert apply_ladder(basis, kind, *args).source.size == 0


def test_unknown_kind():
    with pytest.raises(DomainError):
        apply_ladder(build_sector(1, 1), "sigma_x", 0)


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("m", range(0, 5))
def test_ladder_closure_exhaustive(n, m):
    basis = build_sector(n, m)
    totals = basis.site_totals().sum(axis=1)
    for k in range(n):
        acts = [apply_ladder(basis, "jc_lower", k), apply_ladder(basis, "jc_raise", k)]
        acts += [apply_ladder(basis, "hop", k, j) for j in range(n) if j != k]
        for act in acts:
            assert np.all(totals[act.target] == m)
            assert np.all(totals[act.source] == m)


def test_ladder_factors_against_occupations():
    basis = build_sector(3, 4)
    act = apply_ladder(basis, "hop", 2, 0)
    for s, t, f in zip(act.source, act.target, act.factor):
        n_src = basis.phonons[s]
        assert f == pytest.approx(math.sqrt(n_src[2] * (n_src[0] + 1)))
        expect = n_src.copy()
        expect[2] -= 1
        expect[0] += 1
        assert basis.phonons[t].tolist() == expect.tolist()
        assert basis.qubits[t].tolist() == basis.qubits[s].tolist()


def test_basis_dump(tmp_path):
    path = tmp_path / "basis.txt"
    build_sector(2, 1).dump(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "% 2 1 4"
    assert lines[1:] == ["0 0 | 0 1", "0 0 | 1 0", "0 1 | 0 0", "1 0 | 0 0"]


def test_wide_phonon_fields():
    basis = build_sector(2, 20)
    assert basis.bits == 5
    for i, (q, ph) in enumerate(basis.states):
        assert basis.index(q, ph) == i
