import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gspe import build_operator, diagonalize, evolve, overlaps
from gspe.spectral import (DegenerateGroundSpaceError, exact_cdf,
                           mixed_with_noise, weighted_cdf_2d,
                           weighted_cdf_commuting)

from conftest import TFIM3_TERMS, dense_from_terms, random_state


def test_diagonalize_z():
    s = diagonalize(build_operator([(1.0, "Z")]))
    assert np.allclose(s.eigenvalues, [-1.0, 1.0])
    assert s.gap == pytest.approx(2.0)
    assert s.tau == pytest.approx(math.pi / 3.0)


def test_diagonalize_x_eigenvectors():
    s = diagonalize(build_operator([(1.0, "X")]))
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    assert abs(abs(minus.conj() @ s.eigenvectors[:, 0]) - 1.0) < 1e-12
    assert abs(abs(plus.conj() @ s.eigenvectors[:, 1]) - 1.0) < 1e-12


def test_tfim_gap_matches_independent_solver(tfim3):
    _, s = tfim3
    ref = np.linalg.eigvalsh(dense_from_terms(TFIM3_TERMS))
    assert abs(s.gap - (ref[1] - ref[0])) <= 1e-10
    assert np.allclose(s.eigenvalues, ref, atol=1e-10)


def test_degenerate_ground_space_rejected():
    op = build_operator([(1.0, "ZZ"), (0.4, "XI")])
    with pytest.raises(DegenerateGroundSpaceError):
        diagonalize(op)


def test_eigenvector_matrix_unitary(tfim3):
    _, s = tfim3
    v = s.eigenvectors
    assert np.linalg.norm(v.conj().T @ v - np.eye(s.dim)) <= 1e-10


def test_normalized_spectrum_inside_third_pi(tfim3):
    _, s = tfim3
    scaled = s.scaled_eigenvalues
    assert scaled.min() >= -math.pi / 3 - 1e-12
    assert scaled.max() <= math.pi / 3 + 1e-12
    assert np.abs(scaled).max() == pytest.approx(math.pi / 3)


def test_overlaps_ground_state(tfim3):
    _, s = tfim3
    p = overlaps(s.ground_state(), s)
    assert p[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(p[1:] < 1e-12)


def test_overlaps_plus_state_on_z():
    s = diagonalize(build_operator([(1.0, "Z")]))
    p = overlaps(np.array([1, 1]) / math.sqrt(2), s)
    assert np.allclose(p, [0.5, 0.5])


def test_overlaps_sum_to_one(rng, tfim3):
    _, s = tfim3
    p = overlaps(random_state(rng, s.dim), s)
    assert abs(p.sum() - 1.0) <= 1e-10


def test_evolve_identity_at_zero(rng, tfim3):
    _, s = tfim3
    phi = random_state(rng, s.dim)
    assert np.allclose(evolve(s, phi, 0.0), phi, atol=1e-12)


def test_evolve_diagonal_phases():
    s = diagonalize(build_operator([(1.0, "Z")]))
    phi = np.array([1, 1]) / math.sqrt(2)
    out = evolve(s, phi, math.pi / 2)
    expected = np.array([np.exp(-1j * math.pi / 2),
                         np.exp(1j * math.pi / 2)]) / math.sqrt(2)
    assert np.allclose(out, expected, atol=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=25, deadline=None)
def test_evolve_group_law(t1, t2):
    s = diagonalize(build_operator(TFIM3_TERMS))
    phi = random_state(np.random.default_rng(5), s.dim)
    lhs = evolve(s, evolve(s, phi, t2), t1)
    assert np.allclose(lhs, evolve(s, phi, t1 + t2), atol=1e-9)
    assert abs(np.linalg.norm(lhs) - 1.0) <= 1e-10


def test_evolve_roundtrip(rng, tfim3):
    _, s = tfim3
    phi = random_state(rng, s.dim)
    assert np.allclose(evolve(s, evolve(s, phi, 1.7), -1.7), phi, atol=1e-10)


def test_exact_cdf_properties(rng, tfim3):
    _, s = tfim3
    p = overlaps(random_state(rng, s.dim), s)
    grid = np.linspace(-math.pi / 3 - 0.1, math.pi / 3 + 0.1, 800)
    values = exact_cdf(s, p, grid)
    assert np.all(np.diff(values) >= -1e-15)
    assert values[0] == 0.0
    assert values[-1] == pytest.approx(1.0, abs=1e-10)
    # right continuity on the grid: value at a jump equals the upper limit
    x0 = s.scaled_eigenvalues[0]
    assert exact_cdf(s, p, np.array([x0]))[0] == pytest.approx(p[0], abs=1e-12)


def test_weighted_cdf_2d_matches_commuting_diagonal(rng, tfim3):
    _, s = tfim3
    phi = random_state(rng, s.dim)
    o_diag = rng.uniform(-1, 1, size=s.dim)
    o_mat = s.eigenvectors @ np.diag(o_diag) @ s.eigenvectors.conj().T
    xs = np.linspace(-1.0, 1.0, 7)
    c2 = weighted_cdf_2d(s, phi, o_mat, xs, xs)
    c1 = np.array([weighted_cdf_commuting(s, phi, o_diag, float(x)) for x in xs])
    assert np.allclose(np.diag(c2).real, c1, atol=1e-10)
    assert np.abs(np.diag(c2).imag).max() <= 1e-10


def test_mixed_with_noise_overlap(rng, tfim3):
    _, s = tfim3
    noise = rng.normal(size=s.dim) + 1j * rng.normal(size=s.dim)
    phi = mixed_with_noise(s.ground_state(), noise, 0.37)
    assert overlaps(phi, s)[0] == pytest.approx(0.37, abs=1e-10)
