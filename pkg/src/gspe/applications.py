"""Worked applications: linear-system solution properties and 1RDM entries.

The linear-system route encodes A x = b into the gap-amplified Hamiltonian
family H'(s) acting on two ancilla qubits plus the system; properties of the
solution are read from the weighted CDF evaluated just above zero, where the
kernel of H'(1) carries |0>|+>|x>.  The 1RDM route expresses a_p^dag a_q
through Jordan-Wigner Majorana strings and estimates each product with the
general-unitary pipeline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import estimators, hadamard
from .estimators import (EstimateReport, EstimationConfig, EvolutionBudget,
                         PreconditionError, mom_schedule)
from .fourier import build_fourier_approx
from .pauli import PauliString, multiply_strings
from .seeding import stage_rng
from .spectral import (SpectralData, as_state, diagonalize, mixed_with_noise,
                       normalized)

KERNEL_TOL = 1e-8


@dataclass(frozen=True)
class LinearSystemInstance:
    """System A x = b with singular values of A inside [1/kappa, 1]."""

    a: np.ndarray
    b: np.ndarray
    kappa: float

    def __post_init__(self):
        svals = np.linalg.svd(self.a, compute_uv=False)
        if svals.max() > 1.0 + 1e-10:
            raise PreconditionError(f"largest singular value {svals.max()} > 1")
        if svals.min() < 1.0 / self.kappa - 1e-10:
            raise PreconditionError(
                f"smallest singular value {svals.min()} below 1/kappa")
        if abs(np.linalg.norm(self.b) - 1.0) > 1e-10:
            raise PreconditionError("right-hand side must be a unit vector")

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def solution_state(self) -> np.ndarray:
        return normalized(np.linalg.solve(self.a, self.b))


def random_linear_system(dim: int, kappa: float, rng) -> LinearSystemInstance:
    """Random instance whose singular values span [1/kappa, 1] exactly."""
    def haar(n):
        q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        return q * (np.diag(r) / np.abs(np.diag(r)))
    svals = np.linspace(1.0 / kappa, 1.0, dim)
    a = haar(dim) @ np.diag(svals) @ haar(dim).conj().T
    b = normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))
    return LinearSystemInstance(a=a, b=b, kappa=kappa)


def build_hg(a, b) -> np.ndarray:
    """Effective Hamiltonian A^dag (I - |b><b|) A; PSD with kernel A^{-1} b."""
    a = np.asarray(a, dtype=complex)
    b = normalized(b)
    proj = np.eye(a.shape[0], dtype=complex) - np.outer(b, b.conj())
    return a.conj().T @ proj @ a


def _abar(a: np.ndarray, s: float) -> np.ndarray:
    dim = a.shape[0]
    z = np.diag([1.0, -1.0]).astype(complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return (1.0 - s) * np.kron(z, np.eye(dim)) + s * np.kron(x, a)


def _bbar(b: np.ndarray) -> np.ndarray:
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    return np.kron(plus, normalized(b))


def build_gap_amplified(a, b, s: float) -> np.ndarray:
    """Gap-amplified Hamiltonian on two ancillas + system:
    sigma^+ (x) Abar(s)^dag (I - P_bbar)  +  sigma^- (x) (I - P_bbar) Abar(s).

    Its square is block diagonal with Abar^dag (I-P) Abar on top, so the
    spectrum is {0, 0, +-sqrt(lambda_i)}.
    """
    if not 0.0 <= s <= 1.0:
        raise PreconditionError(f"schedule parameter s must be in [0, 1], got {s}")
    a = np.asarray(a, dtype=complex)
    bbar = _bbar(np.asarray(b, dtype=complex))
    proj = np.eye(bbar.size, dtype=complex) - np.outer(bbar, bbar.conj())
    abar = _abar(a, s)
    sigma_plus = np.array([[0, 1], [0, 0]], dtype=complex)
    sigma_minus = sigma_plus.T
    return (np.kron(sigma_plus, abar.conj().T @ proj)
            + np.kron(sigma_minus, proj @ abar))


def qlss_target_state(inst: LinearSystemInstance) -> np.ndarray:
    """|0>|+>|x>, the kernel vector of H'(1) carrying the solution."""
    zero = np.array([1.0, 0.0])
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    return np.kron(zero, np.kron(plus, inst.solution_state()))


def assemble_observable(inst: LinearSystemInstance, m_operator) -> np.ndarray:
    """M~ = |0><0| (x) |+><+| (x) M on the enlarged register."""
    m_mat = (m_operator.matrix() if hasattr(m_operator, "matrix")
             else np.asarray(m_operator, dtype=complex))
    if m_mat.shape != (inst.dim, inst.dim):
        raise PreconditionError(f"observable shape {m_mat.shape} does not match "
                                f"system dimension {inst.dim}")
    p0 = np.array([[1.0, 0.0], [0.0, 0.0]])
    pplus = 0.5 * np.ones((2, 2))
    return np.kron(p0, np.kron(pplus, m_mat))


def _qlss_spectral(inst: LinearSystemInstance) -> tuple[SpectralData, float]:
    """Eigensystem of H'(1) (degeneracy gate bypassed: the kernel is twofold)
    and the level spacing gamma = smallest nonzero |eigenvalue|."""
    hbar = build_gap_amplified(inst.a, inst.b, 1.0)
    spectral = diagonalize(hbar, require_unique_ground_state=False)
    magnitudes = np.abs(spectral.eigenvalues)
    nonzero = magnitudes[magnitudes > KERNEL_TOL]
    if nonzero.size == 0:
        raise PreconditionError("amplified Hamiltonian has no nonzero levels")
    return spectral, float(nonzero.min())


def prepare_initial_state(inst: LinearSystemInstance, spectral: SpectralData,
                          mode: str, overlap: float, rng, *,
                          n_steps: int = 64, step_time: float = 2.0,
                          overlap_floor: float = 0.25) -> np.ndarray:
    """Initial state with the requested overlap on |0>|+>|x>.

    "oracle": the target mixed with noise supported on the strictly positive
    levels, realizing the requested overlap exactly.  "schedule": a
    discretized interpolation of e^{-i t H'(s_k)} applied to |0>|x(0)>; only
    the interface of the cited preparation routine, not its schedule.
    """
    target = qlss_target_state(inst)
    if mode == "oracle":
        positive = spectral.eigenvectors[:, spectral.eigenvalues > KERNEL_TOL]
        coeffs = rng.normal(size=positive.shape[1]) \
            + 1j * rng.normal(size=positive.shape[1])
        return mixed_with_noise(target, positive @ coeffs, overlap)
    if mode == "schedule":
        zero = np.array([1.0, 0.0])
        minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
        state = np.kron(zero, np.kron(minus, normalized(inst.b)))
        for step in range(1, n_steps + 1):
            hbar_s = build_gap_amplified(inst.a, inst.b, step / n_steps)
            evals, evecs = np.linalg.eigh(hbar_s)
            state = evecs @ (np.exp(-1j * step_time * evals)
                             * (evecs.conj().T @ state))
        achieved = float(np.abs(target.conj() @ state) ** 2)
        if achieved < overlap_floor:
            raise PreconditionError(
                f"schedule preparation reached overlap {achieved:.3f} "
                f"below floor {overlap_floor}")
        return state
    raise PreconditionError(f"unknown initial state mode {mode!r}")


def qlss_estimate(inst: LinearSystemInstance, m_operator, epsilon: float,
                  nu: float, initial_state_mode: str = "oracle", *,
                  overlap: float = 0.6, eta: float | None = None,
                  alpha: float | None = None, seed: int = 0,
                  n_g: int | None = None, k: int | None = None,
                  n_steps: int = 64, step_time: float = 2.0,
                  overlap_floor: float = 0.25) -> EstimateReport:
    """Estimate <x|M|x> for the solution of A x = b.

    The ground energy stage is skipped (the relevant level of H'(1) is zero by
    construction); the good point is tau*gamma/2 with gamma the smallest
    nonzero level.  M~ annihilating the kernel partner |1>|bbar> is asserted,
    not assumed.
    """
    spectral, gamma = _qlss_spectral(inst)
    m_tilde = assemble_observable(inst, m_operator)
    bbar_branch = np.kron(np.array([0.0, 1.0]), _bbar(inst.b))
    residual = np.linalg.norm(m_tilde @ bbar_branch)
    if residual > 1e-10:
        raise PreconditionError(
            f"observable does not annihilate the |1>|bbar> kernel branch "
            f"(residual {residual:.3e})")
    rng_prep = stage_rng(seed, "state-prep")
    phi0 = prepare_initial_state(inst, spectral, initial_state_mode, overlap,
                                 rng_prep, n_steps=n_steps,
                                 step_time=step_time,
                                 overlap_floor=overlap_floor)
    amps = spectral.to_eigenbasis(phi0)
    kernel_mask = np.abs(spectral.eigenvalues) <= KERNEL_TOL
    kernel_mass = float((np.abs(amps[kernel_mask]) ** 2).sum())
    eta = eta if eta is not None else 0.8 * overlap
    if kernel_mass < overlap_floor:
        raise PreconditionError(
            f"initial state overlap {kernel_mass:.3f} below floor {overlap_floor}")
    if alpha is None:
        alpha = max(1.0, float(np.linalg.norm(m_tilde, 2)))
    block = hadamard.embed_block(m_tilde, alpha)
    cfg = EstimationConfig(epsilon=epsilon, eta=eta, nu=nu, seed=seed,
                           gamma=gamma, n_g=n_g, k=k)
    x_good = spectral.tau * gamma / 2.0
    eps_local = epsilon / 4.0
    approx = build_fourier_approx(spectral.tau * gamma / 5.0,
                                  eta * eps_local / 8.0)
    budget = EvolutionBudget()
    e_plain = estimators.expectation_table_1d(spectral, phi0, approx.d)
    n_g1, k1 = mom_schedule(2.0 * approx.total_weight ** 2, eta, eps_local,
                            nu / 2.0, n_g, k)
    p0_bar = estimators._mom_1d(approx, e_plain, x_good, n_g1, k1,
                                stage_rng(seed, "overlap"), budget,
                                spectral.tau).real
    if p0_bar <= 0.0:
        raise estimators.EstimationError(
            f"overlap estimate {p0_bar} is not positive")
    e_table = estimators.expectation_table_2d(spectral, phi0, m_tilde, approx.d)
    nsq = estimators.block_norm_table(spectral, phi0, m_tilde, approx.d)
    n_g2, k2 = mom_schedule(2.0 * alpha ** 2 * approx.total_weight ** 4, eta,
                            eps_local, nu / 2.0, n_g, k)
    num = estimators._mom_2d(approx, e_table, x_good, n_g2, k2,
                             stage_rng(seed, "weighted"), budget,
                             spectral.tau, nsq_table=nsq, alpha=alpha)
    value = num / p0_bar
    x = inst.solution_state()
    m_mat = (m_operator.matrix() if hasattr(m_operator, "matrix")
             else np.asarray(m_operator, dtype=complex))
    exact = complex(x.conj() @ m_mat @ x)
    return EstimateReport(
        value=value, shots_used=n_g1 * k1 + n_g2 * k2, budget=budget,
        config=cfg,
        intermediate={"x_good": x_good, "p0_bar": p0_bar, "p0o0_bar": num,
                      "gamma": gamma, "alpha": alpha, "d_prop": approx.d,
                      "tau": spectral.tau, "exact": exact,
                      "kernel_mass": kernel_mass,
                      "error": abs(value - exact)})


# --- Majorana / Jordan-Wigner ---------------------------------------------------

@dataclass(frozen=True)
class MajoranaIndex:
    """Majorana label: gamma_{2p} for parity 0, gamma_{2p+1} for parity 1."""

    mode: int
    parity: int

    @property
    def flat(self) -> int:
        return 2 * self.mode + self.parity


def majorana_string(index, n_modes: int) -> PauliString:
    """Jordan-Wigner Majorana operator as a Pauli string:
    gamma_{2p} = Z^p X I^(n-p-1), gamma_{2p+1} = Z^p Y I^(n-p-1)."""
    flat = index.flat if isinstance(index, MajoranaIndex) else int(index)
    mode, parity = divmod(flat, 2)
    if not 0 <= mode < n_modes:
        raise PreconditionError(f"mode {mode} out of range for {n_modes} modes")
    letter = "X" if parity == 0 else "Y"
    return PauliString("Z" * mode + letter + "I" * (n_modes - mode - 1))


def majorana_product(a_index, b_index, n_modes: int) -> tuple[complex, PauliString]:
    """gamma_a gamma_b as (unit-modulus phase, single Pauli string)."""
    sa = majorana_string(a_index, n_modes)
    sb = majorana_string(b_index, n_modes)
    k, string = multiply_strings(sa, sb)
    return 1j ** k, string


def annihilation_matrix(mode: int, n_modes: int) -> np.ndarray:
    """Dense a_p = (gamma_{2p} + i gamma_{2p+1}) / 2, for test oracles."""
    g_even = majorana_string(2 * mode, n_modes).matrix()
    g_odd = majorana_string(2 * mode + 1, n_modes).matrix()
    return 0.5 * (g_even + 1j * g_odd)


def exact_1rdm_entry(spectral: SpectralData, p: int, q: int,
                     n_modes: int) -> complex:
    psi0 = spectral.ground_state()
    ap = annihilation_matrix(p, n_modes)
    aq = annihilation_matrix(q, n_modes)
    return complex(psi0.conj() @ (ap.conj().T @ (aq @ psi0)))


def estimate_1rdm_entry(spectral: SpectralData, phi0, p: int, q: int,
                        cfg: EstimationConfig) -> EstimateReport:
    """D_pq = <psi0| a_p^dag a_q |psi0> via the four-Majorana expansion.

    The energy stage and the overlap denominator are shared across the four
    products; identity products (p = q diagonal terms) are exact and cost no
    shots.  Each estimated product gets nu/(3 * count) of the failure budget.
    """
    phi0 = as_state(phi0, dim=spectral.dim)
    n_modes = int(round(math.log2(spectral.dim)))
    gamma = cfg.gamma if cfg.gamma is not None else spectral.gap
    eps_gse = gamma / 8.0
    gse = estimators.estimate_gse(
        spectral, phi0, replace(cfg, epsilon=eps_gse, gamma=gamma),
        nu=cfg.nu / 3.0, rng=stage_rng(cfg.seed, "gse"))
    x_good = estimators.good_point(gse.intermediate["x_star"], spectral.tau,
                                   gamma, epsilon=eps_gse)
    eps_local = cfg.epsilon / 4.0
    approx = build_fourier_approx(spectral.tau * gamma / 5.0,
                                  cfg.eta * eps_local / 8.0)
    budget = gse.budget
    e_plain = estimators.expectation_table_1d(spectral, phi0, approx.d)
    n_g, k1 = mom_schedule(2.0 * approx.total_weight ** 2, cfg.eta, eps_local,
                           cfg.nu / 3.0, cfg.n_g, cfg.k)
    p0_bar = estimators._mom_1d(approx, e_plain, x_good, n_g, k1,
                                stage_rng(cfg.seed, "overlap"), budget,
                                spectral.tau).real
    if p0_bar <= 0.0:
        raise estimators.EstimationError(
            f"overlap estimate {p0_bar} is not positive")
    shots = gse.shots_used + n_g * k1
    # D = (G1 - i G2 + i G3 + G4) / 4 over gamma products
    combos = [(1.0, 2 * p, 2 * q), (-1j, 2 * p + 1, 2 * q),
              (1j, 2 * p, 2 * q + 1), (1.0, 2 * p + 1, 2 * q + 1)]
    to_estimate = [c for c in combos if c[1] != c[2]]
    nu_each = cfg.nu / (3.0 * max(1, len(to_estimate)))
    n_g2, k2 = mom_schedule(2.0 * approx.total_weight ** 4, cfg.eta, eps_local,
                            nu_each, cfg.n_g, cfg.k)
    total = 0.0 + 0.0j
    for stage, (weight, a_idx, b_idx) in enumerate(combos):
        if a_idx == b_idx:
            total += weight  # gamma_a^2 = identity, expectation exactly 1
            continue
        phase, string = majorana_product(a_idx, b_idx, n_modes)
        e_table = estimators.expectation_table_2d(spectral, phi0,
                                                  string.matrix(), approx.d)
        num = estimators._mom_2d(approx, e_table, x_good, n_g2, k2,
                                 stage_rng(cfg.seed, "weighted", index=stage),
                                 budget, spectral.tau)
        total += weight * phase * (num / p0_bar)
        shots += n_g2 * k2
    value = total / 4.0
    return EstimateReport(
        value=value, shots_used=shots, budget=budget, config=cfg,
        intermediate={"x_good": x_good, "p0_bar": p0_bar,
                      "d_prop": approx.d, "gamma": gamma})
