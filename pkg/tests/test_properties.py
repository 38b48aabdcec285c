"""Property-based checks of the structural invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qmreadout.gaussian import (
    CP_TOL,
    SYMPLECTIC_TOL,
    GaussianState,
    amplifier_channel,
    apply_channel,
    apply_unitary,
    beam_splitter,
    cp_min_eigenvalue,
    fidelity_coherent,
    loss_channel,
    phase_rotation,
    squeezer,
    symplectic_residual,
)
from qmreadout.optimize import selective_fidelity, single_cell_fidelity, two_cell_fidelity
from qmreadout.protocols import (
    SingleCellSpec,
    TwoCellSpec,
    sideband_cell_map,
    single_cell_channel,
    single_cell_pass,
    single_cell_readout,
    two_cell_channel,
    two_cell_relations,
    uniform_squeezing,
)
from qmreadout.temporal import inner, orthogonalize, profile

loss = st.floats(0.0, 0.99)
kappa = st.floats(0.05, 4.0)
reals = st.floats(-5.0, 5.0)


@st.composite
def physical_states(draw):
    # thermal state pushed through a random squeeze and rotation
    n = draw(st.floats(0.0, 3.0))
    r = draw(st.floats(0.0, 1.5))
    th = draw(st.floats(0.0, 2 * math.pi))
    st0 = GaussianState(("a",), [draw(reals), draw(reals)], (1 + 2 * n) * np.eye(2))
    return apply_unitary(apply_unitary(st0, squeezer("a", r)), phase_rotation("a", th))


@given(kappa)
def test_single_pass_symplectic(k):
    assert symplectic_residual(single_cell_pass(k).matrix) <= SYMPLECTIC_TOL


@given(kappa, st.sampled_from([1, -1]))
def test_sideband_map_symplectic(k, s):
    assert symplectic_residual(sideband_cell_map(k, s, "A").matrix) <= SYMPLECTIC_TOL


@settings(max_examples=30)
@given(kappa)
def test_two_cell_relations_symplectic(k):
    assert symplectic_residual(two_cell_relations(k).matrix) <= 10 * SYMPLECTIC_TOL * max(1.0, k**4)


@given(st.floats(0.0, 2.0))
def test_squeezer_beam_splitter_symplectic(r):
    assert symplectic_residual(squeezer("a", r).matrix) <= SYMPLECTIC_TOL
    assert symplectic_residual(beam_splitter("a", "b").matrix) <= SYMPLECTIC_TOL


@given(st.floats(0.0, 1.0), st.floats(1.0, 100.0))
def test_elementary_channels_cp(A, G):
    for ch in (loss_channel(A, "a"), amplifier_channel(G, ["a", "b"])):
        assert cp_min_eigenvalue(ch.X, ch.Y) >= -CP_TOL


@settings(max_examples=40)
@given(kappa, loss, st.floats(0.0, 1.0), st.floats(1.0, 5.0))
def test_single_cell_channel_cp(k, A, r, G):
    ch = single_cell_channel(SingleCellSpec(k, A, uniform_squeezing(r), G))
    assert cp_min_eigenvalue(ch.X, ch.Y) >= -CP_TOL


@settings(max_examples=30)
@given(loss)
def test_two_cell_channel_cp(A):
    ch = two_cell_channel(TwoCellSpec.unit_gain(A))
    assert cp_min_eigenvalue(ch.X, ch.Y) >= -CP_TOL


@given(physical_states(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_loss_composition(state, a1, a2):
    two = apply_channel(apply_channel(state, loss_channel(a1, "a")), loss_channel(a2, "a"))
    one = apply_channel(state, loss_channel(1 - (1 - a1) * (1 - a2), "a"))
    assert np.abs(two.cov - one.cov).max() <= 1e-12 * max(1.0, np.abs(state.cov).max())


@given(physical_states(), reals, reals, st.floats(0.0, 2 * math.pi))
def test_fidelity_rotation_invariance(state, tx, tp, th):
    R = phase_rotation("a", th)
    target = np.array([tx, tp])
    f0 = fidelity_coherent(state, "a", target)
    f1 = fidelity_coherent(apply_unitary(state, R), "a", R.matrix @ target)
    assert abs(f0 - f1) <= 1e-12
    assert 0.0 <= f0 <= 1.0 + 1e-12


@settings(max_examples=40)
@given(loss, st.complex_numbers(max_magnitude=4.0, allow_nan=False, allow_infinity=False))
def test_fidelity_alpha_independent(A, alpha):
    spec = SingleCellSpec.unit_gain(A)
    base = single_cell_readout(spec).fidelity
    shifted = single_cell_readout(spec, atomic_mean=math.sqrt(2) * np.array([alpha.real, alpha.imag])).fidelity
    assert abs(base - shifted) <= 1e-12


@given(loss)
def test_scheme_ordering(A):
    assert selective_fidelity(A) >= single_cell_fidelity(A) - 1e-15 >= two_cell_fidelity(A) - 2e-15


@settings(max_examples=30)
@given(st.integers(3, 400), st.floats(1.0, 50.0))
def test_orthogonalize_orthonormal(N, wt):
    fs = [profile("flat", N), profile("ramp", N), profile("cosine", N, wt)]
    try:
        basis, C = orthogonalize(fs)
    except ValueError:
        return  # dependent on coarse grids
    G = np.array([[inner(a, b) for b in basis] for a in basis])
    assert np.abs(G - np.eye(3)).max() <= 1e-10
    for i, f in enumerate(fs):
        rec = sum(C[i, j] * basis[j].samples for j in range(3))
        assert np.abs(rec - f.samples).max() <= 1e-10


@given(st.integers(1, 500), st.sampled_from(["flat", "ramp", "f3"]))
def test_profile_normalised(N, kind):
    p = profile(kind, N)
    if np.any(p.samples):
        assert abs(inner(p, p) - 1) <= 1e-10


@given(st.integers(2, 2000))
def test_polynomial_inner_products_exact(N):
    # midpoint rule is exact for integrands of degree <= 1
    f1, f3 = profile("flat", N), profile("f3", N)
    assert abs(inner(f1, f3)) <= 1e-12
