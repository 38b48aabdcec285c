import math

import numpy as np
import pytest

from qmreadout.temporal import RankError, TemporalProfile, inner, midpoints, mode_projector, orthogonalize, profile

R3 = math.sqrt(3)


def test_midpoints():
    assert np.allclose(midpoints(4), [0.125, 0.375, 0.625, 0.875])


@pytest.mark.parametrize("kind", ["flat", "ramp", "f3"])
@pytest.mark.parametrize("N", [2, 3, 10, 1001])
def test_polynomial_normalisation(kind, N):
    assert abs(inner(profile(kind, N), profile(kind, N)) - 1) < 1e-10


def test_flat_samples():
    assert np.array_equal(profile("flat", 7).samples, np.ones(7))


def test_f3_midpoint_and_ramp_start():
    f3 = profile("f3", 5)
    assert abs(f3.samples[2]) < 1e-15
    ramp = profile("ramp", 1000)
    # continuous shape carries the normalisation scale; it is O(1/N^2) away from sqrt3 at t = 0
    assert abs(ramp(0.0) - R3) < 1e-5


def test_inner_products():
    N = 400
    f1, f2, f3 = profile("flat", N), profile("ramp", N), profile("f3", N)
    assert abs(inner(f1, f1) - 1) < 1e-12
    assert abs(inner(f1, f2) - R3 / 2) < 1e-5
    assert abs(inner(f1, f3)) < 1e-14


def test_inner_grid_mismatch():
    with pytest.raises(ValueError):
        inner(profile("flat", 3), profile("flat", 4))
    with pytest.raises(ValueError):
        inner(profile("flat", 3, T=1.0), profile("flat", 3, T=2.0))


def test_orthogonalize_f1_f2():
    N = 2000
    basis, C = orthogonalize([profile("flat", N), profile("ramp", N)])
    assert np.allclose(basis[0].samples, 1.0)
    # f2 = (sqrt3/2) f1 + (1/2) f3 in the continuum
    assert abs(C[1, 0] - R3 / 2) < 1e-6 and abs(C[1, 1] - 0.5) < 1e-6
    assert np.allclose(basis[1].samples, profile("f3", N).samples, atol=1e-5)


def test_orthogonalize_reconstruction_and_orthonormality():
    N = 300
    fs = [profile(k, N, 37.0) for k in ("cosine", "sine", "f3_cosine", "f3_sine")]
    basis, C = orthogonalize(fs)
    G = np.array([[inner(a, b) for b in basis] for a in basis])
    assert np.abs(G - np.eye(4)).max() < 1e-10
    for i, f in enumerate(fs):
        rec = sum(C[i, j] * basis[j].samples for j in range(4))
        assert np.abs(rec - f.samples).max() < 1e-10
    assert np.allclose(C, np.tril(C))


def test_orthogonalize_single_and_rank():
    f = profile("ramp", 10)
    basis, C = orthogonalize([f])
    assert np.allclose(basis[0].samples, f.samples) and C[0, 0] == pytest.approx(1.0)
    with pytest.raises(RankError):
        orthogonalize([profile("flat", 10), profile("flat", 10)])
    with pytest.raises(ValueError):
        orthogonalize([])


def test_mode_projector():
    assert np.allclose(mode_projector(profile("flat", 4)), [0.5] * 4)
    c = mode_projector(profile("f3_sine", 50, 9.0), 50)
    assert abs(np.linalg.norm(c) - 1) < 1e-15
    # independent vacuum slices project to a vacuum mode
    assert abs(c @ np.eye(50) @ c - 1) < 1e-14
    with pytest.raises(ValueError):
        mode_projector(profile("f3", 1))
    with pytest.raises(ValueError):
        mode_projector(profile("flat", 4), 5)


def test_profile_errors():
    with pytest.raises(ValueError):
        profile("triangle", 4)
    with pytest.raises(ValueError):
        profile("cosine", 4)
    with pytest.raises(ValueError):
        profile("sine", 4, omega_t=-1.0)
    with pytest.raises(ValueError):
        profile("flat", 0)


def test_sideband_normalisation_and_crosstalk():
    wt = 300.0
    N = 30000
    c, s = profile("cosine", N, wt), profile("sine", N, wt)
    assert abs(inner(c, c) - 1) < 1e-10 and abs(inner(s, s) - 1) < 1e-10
    # cross-talk is O(1/OmegaT)
    assert abs(inner(c, s)) < 2 / wt


def test_custom_profile_has_no_shape():
    p = TemporalProfile([1.0, -1.0])
    assert p.N == 2
    with pytest.raises(TypeError):
        p(0.1)
