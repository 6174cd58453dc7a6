"""Pauli-string operator algebra.

Conventions: a Pauli word is a string over ``IXYZ`` read left to right, qubit 0
first.  Qubit 0 is the *most significant* tensor factor, i.e. the dense matrix
of a word is ``kron(m[word[0]], kron(m[word[1]], ...))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PAULI_AXES = "IXYZ"

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (k, c) with  a*b = i^k * c  for single-qubit Paulis.
_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}

DENSE_QUBIT_CAP = 12


class OperatorError(ValueError):
    """Malformed operator input (inconsistent words, bad coefficients, ...)."""


def _check_dense_size(n: int) -> None:
    if n > DENSE_QUBIT_CAP:
        raise OperatorError(f"dense rendering capped at {DENSE_QUBIT_CAP} qubits, got n={n}")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. ``ZZI`` on three qubits."""

    word: str

    def __post_init__(self):
        if not self.word or any(c not in PAULI_AXES for c in self.word):
            raise OperatorError(f"invalid Pauli word {self.word!r}")

    @property
    def n(self) -> int:
        return len(self.word)

    def matrix(self) -> np.ndarray:
        _check_dense_size(self.n)
        out = _SINGLE[self.word[0]]
        for c in self.word[1:]:
            out = np.kron(out, _SINGLE[c])
        return out

    def __str__(self) -> str:
        return self.word


def multiply_strings(a: PauliString, b: PauliString) -> tuple[int, PauliString]:
    """Product ``a @ b = i^k * c``; returns ``(k mod 4, c)`` with the phase
    tracked exactly as a power of i."""
    if a.n != b.n:
        raise OperatorError(f"qubit count mismatch: {a.n} vs {b.n}")
    k = 0
    chars = []
    for ca, cb in zip(a.word, b.word):
        dk, cc = _PRODUCT[(ca, cb)]
        k += dk
        chars.append(cc)
    return k % 4, PauliString("".join(chars))


def strings_commute(a: PauliString, b: PauliString) -> bool:
    """Two Pauli strings commute iff they anticommute on an even number of sites."""
    odd = sum(1 for ca, cb in zip(a.word, b.word)
              if ca != "I" and cb != "I" and ca != cb)
    return odd % 2 == 0


@dataclass(frozen=True)
class PauliOperator:
    """Real-weighted sum of Pauli strings over a common qubit register.

    Real coefficients make the dense matrix Hermitian.  Terms are stored
    merged and sorted by word; use :func:`build_operator` to construct.
    """

    terms: tuple[tuple[float, PauliString], ...]
    n: int

    def matrix(self) -> np.ndarray:
        _check_dense_size(self.n)
        out = np.zeros((2 ** self.n, 2 ** self.n), dtype=complex)
        for coeff, string in self.terms:
            out += coeff * string.matrix()
        return out

    def coefficient_norm(self) -> float:
        """Sum of |coefficients|, an upper bound on the spectral norm."""
        return float(sum(abs(c) for c, _ in self.terms))

    def __str__(self) -> str:
        return " + ".join(f"{c:g}*{s}" for c, s in self.terms) or "0"


def build_operator(terms) -> PauliOperator:
    """Build a :class:`PauliOperator` from ``(coefficient, word)`` pairs.

    Duplicate words are merged; exact zero coefficients are dropped after
    merging.  All words must share one qubit count and coefficients must be
    finite reals.
    """
    terms = list(terms)
    if not terms:
        raise OperatorError("empty term list")
    merged: dict[str, float] = {}
    n = None
    for coeff, word in terms:
        if isinstance(word, PauliString):
            word = word.word
        coeff = float(coeff)
        if not math.isfinite(coeff):
            raise OperatorError(f"non-finite coefficient {coeff!r} for {word!r}")
        string = PauliString(word)
        if n is None:
            n = string.n
        elif string.n != n:
            raise OperatorError(f"inconsistent word lengths: {string.n} vs {n}")
        merged[word] = merged.get(word, 0.0) + coeff
    kept = tuple(
        (c, PauliString(w)) for w, c in sorted(merged.items()) if c != 0.0
    )
    return PauliOperator(terms=kept, n=n)


def diagonal_operator(values) -> PauliOperator:
    """Z-word decomposition of a real diagonal matrix.

    ``values`` must have length ``2**n``.  The coefficient of the Z-word with
    support mask ``w`` is the Walsh transform ``2^-n * sum_b v_b (-1)^{popcount(w & b)}``.
    Used to realize synthetic spectra as genuine Pauli operators.
    """
    values = np.asarray(values, dtype=float)
    n = int(round(math.log2(values.size)))
    if 2 ** n != values.size:
        raise OperatorError(f"diagonal length {values.size} is not a power of two")
    terms = []
    for mask in range(2 ** n):
        signs = np.array([(-1) ** bin(mask & b).count("1") for b in range(2 ** n)])
        coeff = float(values @ signs) / 2 ** n
        if abs(coeff) > 1e-15:
            word = "".join("Z" if (mask >> (n - 1 - q)) & 1 else "I" for q in range(n))
            terms.append((coeff, word))
    if not terms:
        terms = [(0.0, "I" * n)]
        return PauliOperator(terms=tuple((c, PauliString(w)) for c, w in terms), n=n)
    return build_operator(terms)
