import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import positive, space_and, values
from doobweights.errors import ParameterError
from doobweights.filtration import build_dyadic
from doobweights.operators import NEVER
from doobweights.stopping import B_GRID, build_decomposition, verify_chain, verify_partition

D2 = build_dyadic(2)
SPIKE = np.array([4.0, 0, 0, 0])
ONES = np.ones(4)


def test_constant_f_single_cell():
    dec = build_decomposition(D2, np.full(4, 3.0), ONES, 2.0, 2.0)
    assert len(dec.cells) == 1
    (cell,) = dec.cells
    assert cell.k == 1  # 2 < 3 <= 4
    assert cell.B.all() and cell.A.all()
    assert np.all(dec.tau[1] == 0) and np.all(dec.tau[2] == NEVER)
    assert verify_partition(dec, D2, np.full(4, 3.0)).passed


def test_zero_f():
    dec = build_decomposition(D2, np.zeros(4), ONES, 2.0, 2.0)
    assert dec.cells == () and dec.integral() == 0
    assert verify_partition(dec, D2, np.zeros(4)).passed
    assert verify_chain(dec, D2, np.zeros(4), ONES, 2.0).passed


def test_spike_by_hand():
    dec = build_decomposition(D2, SPIKE, ONES, 2.0, 2.0)
    assert dec.maximal.tolist() == [4, 2, 1, 1]
    assert sorted({c.k for c in dec.cells}) == [-1, 0, 1]
    assert verify_partition(dec, D2, SPIKE).passed
    chain = verify_chain(dec, D2, SPIKE, ONES, 2.0)
    assert chain.passed, chain.summary()
    lhs = chain.checks[2].detail["lhs"]
    assert lhs == pytest.approx(5.5)
    assert chain.checks[2].detail["rhs"] >= 64


def test_unweighted_limit_constant():
    dec = build_decomposition(D2, SPIKE, ONES, 2.0, 1.01)
    chain = verify_chain(dec, D2, SPIKE, ONES, 2.0)
    (check,) = [c for c in chain.checks if c.name.startswith("b-grid")]
    assert check.detail["limit"] == pytest.approx(4.0)
    assert check.detail["constants"] == sorted(check.detail["constants"], reverse=True)
    assert len(check.detail["constants"]) == len(B_GRID)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        build_decomposition(D2, SPIKE, ONES, 2.0, 1.0)
    with pytest.raises(ParameterError):
        build_decomposition(D2, SPIKE, ONES, 1.0, 2.0)


def test_csv_columns():
    dec = build_decomposition(D2, SPIKE, ONES, 2.0, 2.0)
    lines = dec.to_csv().splitlines()
    assert lines[0] == "k,j,mass,vartheta,T,margin"
    assert len(lines) == len(dec.cells) + 1


@given(space_and(values), st.lists(positive, min_size=32, max_size=32),
       st.sampled_from([1.5, 2.0, 3.0]), st.sampled_from([1.1, 1.5, 2.0]))
def test_random_chain(case, vlist, p, b):
    space, f = case
    if space.n_leaves > 32:
        return
    v = np.array(vlist[: space.n_leaves])
    dec = build_decomposition(space, f, v, p, b)
    part = verify_partition(dec, space, f)
    assert part.passed, part.summary()
    chain = verify_chain(dec, space, f, v, p, b_grid=(2.0, 1.2, 1.05))
    assert chain.passed, chain.summary()


# -- corrupted decompositions are caught -----------------------------------------------


def test_detects_overlapping_cells():
    dec = build_decomposition(D2, SPIKE, ONES, 2.0, 2.0)
    cells = dec.cells + (dec.cells[0],)
    rep = verify_partition(dataclasses.replace(dec, cells=cells), D2, SPIKE)
    assert rep.first_failure().name == "B cells pairwise disjoint"


def test_detects_shifted_stopping_time():
    dec = build_decomposition(D2, SPIKE, ONES, 2.0, 2.0)
    tau = dict(dec.tau)
    k = min(tau)
    tau[k] = np.full(4, NEVER)
    rep = verify_partition(dataclasses.replace(dec, tau=tau), D2, SPIKE)
    assert not rep.passed
    assert rep.first_failure().name.startswith("{b^k < Mf")


def test_detects_deflated_T():
    dec = build_decomposition(D2, SPIKE, ONES, 2.0, 2.0)
    cells = tuple(dataclasses.replace(c, T=c.T * 1e-6) for c in dec.cells)
    rep = verify_chain(dataclasses.replace(dec, cells=cells), D2, SPIKE, ONES, 2.0)
    assert any(c.name.startswith("(i)") for c in rep.failures())
