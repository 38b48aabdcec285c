import math

import numpy as np
import pytest

from qmreadout.optimize import (
    A_SINGLE_AMP,
    A_TH,
    BRANCH_POINTS,
    BracketError,
    Optimum,
    branch_values,
    classical_benchmark,
    classical_crossing,
    closed_form,
    discrepancy,
    golden_section_max,
    numeric_optimize,
    scan_bracket,
    selective_fidelity,
    selective_squeeze_lossy,
    single_cell_fidelity,
    single_cell_lossy,
    two_cell_fidelity,
    two_cell_lossy,
    uniform_squeeze,
    uniform_squeeze_optimum,
)
from qmreadout.protocols import (
    SingleCellSpec,
    TwoCellSpec,
    selective_squeezing,
    single_cell_readout,
    two_cell_pipeline,
)

GRID = np.linspace(0.0, 0.99, 1000)


def test_a_th_value():
    assert A_TH == pytest.approx(0.5 * (3 - math.sqrt(7 / 3)), abs=1e-16)
    assert abs(A_TH - 0.736237384174) < 1e-12


def test_single_cell_examples():
    assert single_cell_lossy(0.0).fidelity == 0.75
    lo, hi = branch_values("single", A_SINGLE_AMP)
    assert abs(lo.fidelity - 0.5) < 1e-15 and abs(hi.fidelity - 0.5) < 1e-15
    assert abs(single_cell_lossy(0.04).fidelity - (0.75 - 3 * 0.04 / 16)) < 3e-4
    assert single_cell_lossy(0.9).branch == "amp" and single_cell_lossy(0.5).branch == "no-amp"


def test_two_cell_examples():
    o = two_cell_lossy(0.0)
    assert o.fidelity == 0.75 and o.kappa_sq == 2.0 and o.kappa2_sq == 2.0
    assert abs(two_cell_lossy(0.1).fidelity - 0.707309184994) < 1e-12
    assert abs(two_cell_fidelity(0.1) - two_cell_lossy(0.1).fidelity) < 1e-15
    h = 1e-7
    slope2 = (two_cell_fidelity(h) - two_cell_fidelity(0.0)) / h
    slope1 = (single_cell_fidelity(h) - single_cell_fidelity(0.0)) / h
    assert abs(slope2 / slope1 - 2) < 1e-5


def test_uniform_squeeze():
    assert uniform_squeeze(0.0) == 0.75
    r = 0.25 * math.log(3)
    assert abs(uniform_squeeze(r) - 6 / (6 + math.sqrt(3))) < 1e-15
    assert abs(uniform_squeeze(r) - 0.776) < 1e-3
    assert uniform_squeeze(20.0) < 1e-15
    o = uniform_squeeze_optimum()
    assert o.squeeze_r == pytest.approx(r) and o.fidelity == pytest.approx(uniform_squeeze(r), abs=1e-15)


def test_selective_examples():
    o = selective_squeeze_lossy(0.0)
    assert o.nbar == 0.0 and o.fidelity == 1.0
    F = selective_squeeze_lossy(0.03).fidelity
    assert abs(F - 0.962084927303) < 1e-12
    # the linear law 1 - 4A/3 misses the second-order term 22 A^2 / 9
    assert abs(F - (1 - 4 / 3 * 0.03)) < 22 / 9 * 0.03**2
    assert selective_squeeze_lossy(0.8).branch == "amp"


@pytest.mark.parametrize("A", [0.0, 0.5, 1.0 - 1e-9])
def test_domain(A):
    for f in (single_cell_lossy, two_cell_lossy, selective_squeeze_lossy):
        assert 0 < f(A).fidelity <= 1
    for f in (single_cell_lossy, two_cell_lossy, selective_squeeze_lossy):
        with pytest.raises(ValueError):
            f(1.0)


@pytest.mark.parametrize("scheme", sorted(BRANCH_POINTS))
def test_branch_continuity(scheme):
    lo, hi = branch_values(scheme, BRANCH_POINTS[scheme])
    assert abs(lo.nbar - hi.nbar) <= 1e-9
    assert abs(lo.kappa_sq - hi.kappa_sq) <= 1e-9
    assert abs(hi.amp_gain - 1.0) <= 1e-9
    with pytest.raises(ValueError):
        branch_values("double", 0.1)


def test_monotone_and_dominance():
    for f in (single_cell_fidelity, two_cell_fidelity, selective_fidelity):
        F = np.array([f(a) for a in GRID])
        assert np.all(np.diff(F) < 0)
    for a in GRID:
        assert selective_fidelity(a) >= single_cell_fidelity(a) - 1e-15
        assert single_cell_fidelity(a) >= two_cell_fidelity(a) - 1e-15


def test_optimum_invariant():
    for a in GRID[::37]:
        for o in (single_cell_lossy(a), two_cell_lossy(a), selective_squeeze_lossy(a)):
            assert abs(o.fidelity - 1 / (1 + o.nbar)) < 1e-15
    with pytest.raises(ValueError):
        Optimum(1.0, 1.0, 0.0, 1.0, "maybe")


def test_closed_forms_match_pipelines():
    for a in GRID[::10]:
        o = single_cell_lossy(a)
        res = single_cell_readout(SingleCellSpec(math.sqrt(o.kappa_sq), a, amp_gain=o.amp_gain))
        assert abs(res.fidelity - o.fidelity) < 1e-10
        assert abs(res.nbar - o.nbar) < 1e-10
        _, nbar, F = two_cell_pipeline(TwoCellSpec.unit_gain(a))
        assert abs(nbar - two_cell_lossy(a).nbar) < 1e-10 * max(1, nbar)
        s = selective_squeeze_lossy(a)
        res = single_cell_readout(
            SingleCellSpec(math.sqrt(s.kappa_sq), a, selective_squeezing(s.squeeze_V), s.amp_gain)
        )
        assert abs(res.nbar - s.nbar) < 1e-10 * max(1, s.nbar)


def test_selective_finite_squeezing_budget():
    # e^{2r} = 1e6 on the p~ modes stays within 1e-6 of the zero-variance closed form
    A = 0.3
    s = selective_squeeze_lossy(A)
    res = single_cell_readout(
        SingleCellSpec(math.sqrt(s.kappa_sq), A, selective_squeezing(s.squeeze_V, 1e6), s.amp_gain)
    )
    assert 0 < s.fidelity - res.fidelity < 1e-6


def test_classical_benchmark_crossings():
    assert classical_benchmark() == 0.5
    assert abs(classical_crossing(single_cell_fidelity) - 2 / 3) < 1e-12
    a2 = classical_crossing(two_cell_fidelity)
    assert abs(two_cell_fidelity(a2) - 0.5) < 1e-12
    assert abs(a2 - 0.388141681499) < 1e-11


def test_golden_section():
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-12)
    assert abs(x - 0.3) < 1e-6 and fx <= 0
    x, _ = golden_section_max(lambda x: x, 0.0, 1.0)
    assert x == 1.0


def test_bracket_failure():
    with pytest.raises(BracketError) as exc:
        scan_bracket(lambda x: float("nan"), 0.0, 1.0)
    assert exc.value.grid.size == 21


def test_numeric_single():
    o = numeric_optimize("single", 0.5)
    assert abs(o.kappa_sq - 4.0) < 1e-6 and abs(o.nbar - 2 / 3) < 1e-10
    assert discrepancy(o, closed_form("single", 0.5)) < 1e-6


def test_numeric_single_amp_branch():
    o = numeric_optimize("single", 0.8)
    assert o.branch == "amp"
    assert discrepancy(o, closed_form("single", 0.8)) < 1e-6


def test_numeric_uniform():
    o = numeric_optimize("uniform", 0.0)
    assert abs(math.exp(2 * o.squeeze_r) - math.sqrt(3)) < 1e-6
    assert abs(o.fidelity - 6 / (6 + math.sqrt(3))) < 1e-10


def test_numeric_selective_amp():
    o = numeric_optimize("selective", 0.9)
    c = closed_form("selective", 0.9)
    assert o.branch == c.branch == "amp"
    assert discrepancy(o, c) < 1e-6
    assert o.fidelity <= c.fidelity + 1e-9


def test_numeric_fixed_parameters():
    o = numeric_optimize("single", 0.3, frees=set())
    assert o.kappa_sq == pytest.approx(2 / 0.7) and o.fidelity == pytest.approx(single_cell_fidelity(0.3))


def test_numeric_errors():
    with pytest.raises(ValueError):
        numeric_optimize("double", 0.1)
    with pytest.raises(ValueError):
        numeric_optimize("bogus", 0.1)
    with pytest.raises(ValueError):
        numeric_optimize("single", 0.1, frees={"V"})
    with pytest.raises(ValueError):
        closed_form("uniform", 0.2)
