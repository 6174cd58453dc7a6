"""Shared fixtures and an independent dense oracle.

The oracle builders here deliberately avoid the package's own matrix
rendering so that dual-route checks (estimator vs dense algebra) stay
independent.
"""
import functools

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def kron_word(word: str) -> np.ndarray:
    return functools.reduce(np.kron, (SINGLE[c] for c in word))


def dense_from_terms(terms) -> np.ndarray:
    words = [w for _, w in terms]
    dim = 2 ** len(words[0])
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, word in terms:
        out += coeff * kron_word(word)
    return out


def random_state(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(dim, dim))
                        + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, dim: int, norm: float = 1.0) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (m + m.conj().T)
    return norm * h / np.linalg.norm(h, 2)


TFIM3_TERMS = [(-1.0, "ZZI"), (-1.0, "IZZ"),
               (-0.5, "XII"), (-0.5, "IXI"), (-0.5, "IIX")]

# criterion 5's stated Hamiltonian plus the smallest symmetry-breaking term
# that makes the ground state unique (the stated one is exactly degenerate)
VARIANT2Q_TERMS = [(1.0, "ZZ"), (0.4, "XI"), (0.2, "ZI")]


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def tfim3():
    from gspe import build_operator, diagonalize
    op = build_operator(TFIM3_TERMS)
    return op, diagonalize(op)


@pytest.fixture(scope="session")
def variant2q():
    from gspe import build_operator, diagonalize
    op = build_operator(VARIANT2Q_TERMS)
    return op, diagonalize(op)
