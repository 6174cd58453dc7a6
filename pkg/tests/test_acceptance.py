"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Statistical criteria use fixed seed ranges; tolerances and trial
counts are pinned here, not configurable.
"""
import math
import time

import numpy as np
import pytest
from scipy import linalg as sla

from gspe import (EstimationConfig, build_operator, diagonalize, embed_block,
                  estimate_gse, estimate_gsprop_block,
                  estimate_gsprop_commutative, estimate_gsprop_general)
from gspe import cli
from gspe.applications import LinearSystemInstance, build_hg, qlss_estimate
from gspe.estimators import acdf_2d_exact
from gspe.fourier import (COEFF_DECAY_CONSTANT, build_fourier_approx,
                          evaluate_coefficients)
from gspe.hadamard import (block_circuit_distribution,
                           generalized_circuit_distribution,
                           generalized_second_moment,
                           outcome_distribution_1d, outcome_distribution_2d,
                           outcome_distribution_O)
from gspe.spectral import (DegenerateGroundSpaceError, mixed_with_noise,
                           weighted_cdf_2d)

from conftest import (TFIM3_TERMS, VARIANT2Q_TERMS, dense_from_terms,
                      random_hermitian, random_state, random_unitary)


def _report(criterion: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def _mean_xy(dist):
    return (dist["X"][0] - dist["X"][1]) + 1j * (dist["Y"][0] - dist["Y"][1])


# -- 1. Fourier construction ----------------------------------------------------

@pytest.mark.parametrize("delta,epsilon", [(0.2, 0.01), (0.1, 0.01), (0.2, 0.001)])
def test_criterion_1_fourier_construction(delta, epsilon):
    start = time.monotonic()
    approx = build_fourier_approx(delta, epsilon)
    full = evaluate_coefficients(approx.coefficients,
                                 np.linspace(-math.pi, math.pi, 20001))
    plateau = evaluate_coefficients(
        approx.coefficients, np.linspace(delta, math.pi - delta, 20001))
    trough = evaluate_coefficients(
        approx.coefficients, np.linspace(-math.pi + delta, -delta, 20001))
    sup = max(np.abs(plateau - 1.0).max(), np.abs(trough).max())
    js = np.abs(approx.js)
    decay = (np.abs(approx.coefficients[js > 0]) * js[js > 0]).max()
    elapsed = time.monotonic() - start
    ok = (full.min() >= -1e-9 and full.max() <= 1.0 + 1e-9
          and sup <= epsilon and decay <= COEFF_DECAY_CONSTANT
          and elapsed <= 30.0)
    _report("1", ok,
            f"delta={delta} eps={epsilon}: d={approx.d} sup={sup:.2e} "
            f"range=[{full.min():.1e},{full.max():.6f}] "
            f"decay={decay:.3f} time={elapsed:.1f}s")


# -- 2. Exhaustive unbiasedness ---------------------------------------------------

def test_criterion_2_exhaustive_unbiasedness():
    worst = 0.0
    rng = np.random.default_rng(2024)
    for trial in range(5):
        n = 1 + trial % 3
        dim = 2 ** n
        h = random_hermitian(rng, dim, norm=rng.uniform(0.5, 2.0))
        s = diagonalize(h)
        phi = random_state(rng, dim)
        o_unitary = random_unitary(rng, dim)
        o_hermitian = random_hermitian(rng, dim, norm=0.9)
        block = embed_block(o_hermitian, 1.0)
        for j in (-4, 0, 3):
            target = phi.conj() @ sla.expm(-1j * j * s.tau * h) @ phi
            worst = max(worst, abs(
                _mean_xy(outcome_distribution_1d(s, phi, j)) - target))
            target = phi.conj() @ o_unitary @ sla.expm(-1j * j * s.tau * h) @ phi
            worst = max(worst, abs(
                _mean_xy(outcome_distribution_O(s, phi, o_unitary, j)) - target))
        for j, j2 in ((0, 0), (2, -3), (-1, 4)):
            target = phi.conj() @ sla.expm(-1j * j * s.tau * h) @ o_unitary \
                @ sla.expm(-1j * j2 * s.tau * h) @ phi
            worst = max(worst, abs(
                _mean_xy(outcome_distribution_2d(s, phi, o_unitary, j, j2))
                - target))
        for t1, t2 in ((0.0, 0.0), (0.8, -0.5), (1.7, 2.1)):
            target = phi.conj() @ sla.expm(-1j * t2 * h) @ o_hermitian \
                @ sla.expm(-1j * t1 * h) @ phi
            _, pxp, pxm = block_circuit_distribution(s, phi, block, t1, t2, "I")
            _, pyp, pym = block_circuit_distribution(s, phi, block, t1, t2, "S")
            worst = max(worst, abs((pxp - pxm) + 1j * (pyp - pym) - target))
    _report("2", worst <= 1e-10,
            f"worst exhaustive-mean deviation {worst:.2e} across 4 circuit "
            "families x 5 instances")


# -- 3. Block-encoded variance reduction ------------------------------------------

def test_criterion_3_variance_reduction():
    rng = np.random.default_rng(31)
    worst_closed_form = 0.0
    reductions_ok = True
    for alpha in (2.0, 3.0, 5.0):
        for trial in range(5):
            n = 1 + trial % 2
            dim = 2 ** n
            h = random_hermitian(rng, dim, norm=1.0)
            s = diagonalize(h)
            phi = random_state(rng, dim)
            o = random_hermitian(rng, dim, norm=rng.uniform(0.5, 1.0))
            block = embed_block(o, alpha)
            t1, t2 = rng.uniform(-2, 2, size=2)
            nsq = float(np.linalg.norm(o @ (sla.expm(-1j * t1 * h) @ phi)) ** 2)
            e_real = float((phi.conj() @ sla.expm(-1j * t2 * h) @ o
                            @ sla.expm(-1j * t1 * h) @ phi).real)
            variances = {}
            for a in (1.0 / math.sqrt(alpha + 1.0), 1.0 / math.sqrt(2.0)):
                value = alpha / (2 * a * math.sqrt(1 - a * a))
                _, pp, pm = generalized_circuit_distribution(
                    s, phi, block, t1, t2, a, "I")
                exhaustive = value ** 2 * (pp + pm) - (value * (pp - pm)) ** 2
                closed = generalized_second_moment(nsq, alpha, a) - e_real ** 2
                worst_closed_form = max(worst_closed_form,
                                        abs(exhaustive - closed))
                variances[a] = exhaustive
            tuned = variances[1.0 / math.sqrt(alpha + 1.0)]
            plain = variances[1.0 / math.sqrt(2.0)]
            reductions_ok &= tuned <= plain + 1e-9
    _report("3", worst_closed_form <= 1e-9 and reductions_ok,
            f"closed-form deviation {worst_closed_form:.2e}; tuned gate "
            "variance never exceeds the Hadamard gate")


# -- 4. Ground state energy end to end ---------------------------------------------

def test_criterion_4_gsee_tfim():
    start = time.monotonic()
    s = diagonalize(build_operator(TFIM3_TERMS))
    noise_rng = np.random.default_rng(404)
    phi0 = mixed_with_noise(
        s.ground_state(),
        noise_rng.normal(size=s.dim) + 1j * noise_rng.normal(size=s.dim), 0.5)
    eta = 0.5  # equals the exact overlap of the perturbed state
    epsilon = s.gap / 10.0
    hits = 0
    for seed in range(50):
        cfg = EstimationConfig(epsilon=epsilon, eta=eta, nu=0.1, seed=seed)
        hits += abs(estimate_gse(s, phi0, cfg).value - s.eigenvalues[0]) <= epsilon
    elapsed = time.monotonic() - start
    _report("4", hits >= 40 and elapsed <= 300.0,
            f"TFIM-3q eps=gap/10={epsilon:.4f}: {hits}/50 within eps, "
            f"{elapsed:.0f}s")


# -- 5. General-observable property estimation --------------------------------------

def test_criterion_5_stated_instance_refused():
    """The stated two-qubit instance has an exactly degenerate ground space
    (the two terms anticommute, so H^2 is proportional to the identity): its
    gap is zero, no good point exists, and the target expectation is not even
    well defined.  The faithful behavior is an explicit refusal; the
    statistical contract is established on the minimally repaired instance in
    the companion test.  Full analysis lives in the decisions ledger.
    """
    stated = [(1.0, "ZZ"), (0.4, "XI")]
    evals = np.linalg.eigvalsh(dense_from_terms(stated))
    assert evals[1] - evals[0] <= 1e-12
    with pytest.raises(DegenerateGroundSpaceError):
        diagonalize(build_operator(stated))
    print("ACCEPTANCE 5 (stated instance): ill-posed - ground space exactly "
          "degenerate (gap 0); construction refuses; contract shown on the "
          "repaired instance")


def test_criterion_5_general_observable():
    s = diagonalize(build_operator(VARIANT2Q_TERMS))
    o_mat = build_operator([(1.0, "XI")]).matrix()
    psi0 = s.ground_state()
    exact = float((psi0.conj() @ o_mat @ psi0).real)
    noise_rng = np.random.default_rng(505)
    phi0 = mixed_with_noise(
        psi0, noise_rng.normal(size=4) + 1j * noise_rng.normal(size=4), 0.5)
    hits = 0
    for seed in range(50):
        cfg = EstimationConfig(epsilon=0.05, eta=0.4, nu=0.1, seed=seed)
        report = estimate_gsprop_general(s, phi0, o_mat, cfg)
        hits += abs(report.value.real - exact) <= 0.05
    _report("5", hits >= 40,
            f"non-commuting O on repaired 2q instance: {hits}/50 within 0.05 "
            f"of O0={exact:.4f}")


def test_statistical_contract_commutative():
    """Completes the per-pipeline ensemble contract: the commuting-observable
    pipeline over 50 seeded runs (the other pipelines are covered by the
    energy, general and block criteria)."""
    op = build_operator([(-1.0, "ZZI"), (-1.0, "IZZ"), (-0.3, "ZII")])
    s = diagonalize(op)
    o_mat = build_operator([(1.0, "ZZI")]).matrix()
    psi0 = s.ground_state()
    exact = float((psi0.conj() @ o_mat @ psi0).real)
    noise_rng = np.random.default_rng(707)
    phi0 = mixed_with_noise(
        psi0, noise_rng.normal(size=8) + 1j * noise_rng.normal(size=8), 0.5)
    hits = 0
    for seed in range(50):
        cfg = EstimationConfig(epsilon=0.05, eta=0.5, nu=0.1, seed=seed)
        report = estimate_gsprop_commutative(s, phi0, o_mat, cfg)
        hits += abs(report.value.real - exact) <= 0.05
    floor = 50 * (0.9 - 3 * math.sqrt(0.09 / 50))
    _report("statistical contract (commuting pipeline)", hits >= floor,
            f"{hits}/50 within 0.05 of O0={exact:.4f} (floor {floor:.0f})")


# -- 6. Block-encoded property estimation --------------------------------------------

def test_criterion_6_block_encoded():
    s = diagonalize(build_operator(VARIANT2Q_TERMS))
    o_mat = 0.5 * (build_operator([(1.0, "ZI")]).matrix()
                   + build_operator([(1.0, "XX")]).matrix())
    psi0 = s.ground_state()
    exact = float((psi0.conj() @ o_mat @ psi0).real)
    noise_rng = np.random.default_rng(606)
    phi0 = mixed_with_noise(
        psi0, noise_rng.normal(size=4) + 1j * noise_rng.normal(size=4), 0.5)
    hits = 0
    shots_alpha1 = None
    for seed in range(50):
        cfg = EstimationConfig(epsilon=0.05, eta=0.4, nu=0.1, seed=seed)
        report = estimate_gsprop_block(s, phi0, embed_block(o_mat, 1.0), cfg)
        hits += abs(report.value.real - exact) <= 0.05
        if shots_alpha1 is None:
            base = report.intermediate
            shots_alpha1 = report.shots_used - base["n_s"] * base["n_b"] \
                - base["n_g"] * base["k_overlap"]
    hits_alpha2 = 0
    shots_alpha2 = None
    for seed in range(5):
        cfg = EstimationConfig(epsilon=0.05, eta=0.4, nu=0.1, seed=1000 + seed)
        report = estimate_gsprop_block(s, phi0, embed_block(o_mat, 2.0), cfg)
        hits_alpha2 += abs(report.value.real - exact) <= 0.05
        if shots_alpha2 is None:
            base = report.intermediate
            shots_alpha2 = report.shots_used - base["n_s"] * base["n_b"] \
                - base["n_g"] * base["k_overlap"]
    ratio = shots_alpha2 / shots_alpha1
    ok = hits >= 40 and hits_alpha2 >= 4 and 2.0 <= ratio <= 6.0
    _report("6", ok,
            f"alpha=1: {hits}/50 within 0.05 of O0={exact:.4f}; alpha=2: "
            f"{hits_alpha2}/5 within eps, block-shot ratio {ratio:.2f} "
            "(target 4 +- 50%)")


# -- 7. Budget law ---------------------------------------------------------------------

def _sweep_config(**extra):
    config = {
        "mode": "gsprop-commutative",
        "instance": {"type": "synthetic",
                     "eigenvalues": [0.0, "gamma", 0.8, 1.0],
                     "overlaps": [0.5, 0.2, 0.2, 0.1]},
        "observable": {"n": 2, "terms": [{"coeff": 1.0, "word": "ZZ"}]},
        "epsilon": 0.1, "eta": 0.4, "nu": 0.2, "seed": 7,
        "shot_overrides": {"n_s": 3000, "n_b": 11, "n_g": 9, "k": 6000},
    }
    config.update(extra)
    return config


def test_criterion_7_budget_law():
    records = cli.sweep(_sweep_config(sweep={"gamma": [0.2, 0.4, 0.8]}))
    times = [r["max_evolution_time"] for r in records]
    ratios = [times[0] / times[1], times[1] / times[2]]
    gamma_ok = all(1.6 <= r <= 2.6 for r in ratios)

    eps_config = _sweep_config(sweep={"epsilon": [0.5, 0.05]})
    eps_config["instance"] = {"type": "synthetic",
                              "eigenvalues": [0.0, 0.4, 0.8, 1.0],
                              "overlaps": [0.5, 0.2, 0.2, 0.1]}
    eps_records = cli.sweep(eps_config)
    eps_times = [r["max_evolution_time"] for r in eps_records]
    eps_ratio = eps_times[1] / eps_times[0]
    _report("7", gamma_ok and eps_ratio <= 2.0,
            f"gamma-sweep max-time ratios {ratios[0]:.2f}, {ratios[1]:.2f} "
            f"(window [1.6, 2.6]); 10x epsilon sweep ratio {eps_ratio:.2f} <= 2")


# -- 8. Linear-system solution property ---------------------------------------------

def test_criterion_8_qlss():
    a = np.diag([1.0, 0.5, 1.0 / 3.0, 0.25]).astype(complex)
    b = np.ones(4) / 2.0
    inst = LinearSystemInstance(a=a, b=b, kappa=4.0)
    hg = build_hg(a, b)
    evals = np.linalg.eigvalsh(hg)
    smin = np.linalg.svd(a, compute_uv=False).min()
    structure_ok = abs(evals[0]) <= 1e-9 and evals[1] >= smin ** 2 - 1e-9
    m_op = build_operator([(1.0, "ZI")])
    x = inst.solution_state()
    exact = float((x.conj() @ m_op.matrix() @ x).real)
    hits = 0
    for seed in range(30):
        report = qlss_estimate(inst, m_op, 0.05, 0.1, "oracle",
                               overlap=0.6, seed=seed)
        hits += abs(report.value.real - exact) <= 0.05
    _report("8", structure_ok and hits >= 27,
            f"lambda0={evals[0]:.1e}, lambda1={evals[1]:.4f} >= "
            f"sigma_min^2={smin ** 2:.4f}; {hits}/30 within 0.05 of "
            f"<x|M|x>={exact:.4f}")


# -- 9. ACDF sandwich suites -----------------------------------------------------------

def test_criterion_9_acdf_sandwiches():
    delta, epsilon = 0.05, 0.01
    approx = build_fourier_approx(delta, epsilon)
    grid = np.arange(-math.pi / 3, math.pi / 3 + 1e-12, 1e-3)
    rng = np.random.default_rng(909)
    ok_1d = True
    for _ in range(10):
        k = int(rng.integers(2, 8))
        positions = rng.uniform(-math.pi / 3, math.pi / 3, size=k)
        weights = rng.dirichlet(np.ones(k))
        acdf = np.zeros_like(grid)
        for w, pos in zip(weights, positions):
            acdf += w * evaluate_coefficients(approx.coefficients, grid - pos)
        def cdf(x):
            return (weights[None, :] * (positions[None, :] <= x[:, None])).sum(axis=1)
        ok_1d &= bool(np.all(acdf >= cdf(grid - delta) - epsilon - 1e-9))
        ok_1d &= bool(np.all(acdf <= cdf(grid + delta) + epsilon + 1e-9))

    # 2-d suite on nonnegative diagonal measures (products of step factors)
    ok_2d = True
    for _ in range(10):
        k = int(rng.integers(2, 7))
        positions = rng.uniform(-math.pi / 3, math.pi / 3, size=k)
        weights = rng.dirichlet(np.ones(k)) * rng.uniform(0.5, 1.0)
        f_cols = np.stack([evaluate_coefficients(approx.coefficients,
                                                 grid - pos)
                           for pos in positions], axis=1)       # (nx, k)
        acdf2 = (f_cols * weights[None, :]) @ f_cols.T          # (nx, nx)
        step_lo = (positions[None, :] <= (grid - delta)[:, None]).astype(float)
        step_hi = (positions[None, :] <= (grid + delta)[:, None]).astype(float)
        cdf_lo = (step_lo * weights[None, :]) @ step_lo.T
        cdf_hi = (step_hi * weights[None, :]) @ step_hi.T
        ok_2d &= bool(np.all(acdf2 >= cdf_lo - 2 * epsilon - 1e-9))
        ok_2d &= bool(np.all(acdf2 <= cdf_hi + 2 * epsilon + 1e-9))
    _report("9", ok_1d and ok_2d,
            "1-d and 2-d sandwich bounds hold on 10 random spectral measures "
            "each at 1e-3 grid resolution")


def test_criterion_9_good_point_two_time_bias():
    """At a good point the two-time weighted ACDF reads the ground-level jump
    of a general Hermitian observable to within twice the Fourier budget."""
    rng = np.random.default_rng(911)
    eta, epsilon = 0.5, 0.05
    worst = 0.0
    for trial in range(10):
        h = random_hermitian(rng, 4, norm=1.0)
        s = diagonalize(h)
        if s.gap < 0.15:
            continue
        phi0 = mixed_with_noise(
            s.ground_state(), rng.normal(size=4) + 1j * rng.normal(size=4), 0.6)
        o_mat = random_hermitian(rng, 4, norm=1.0)
        budget = eta * epsilon
        approx = build_fourier_approx(s.tau * s.gap / 5.0, budget)
        x_good = s.tau * (s.eigenvalues[0] + s.gap / 2.0)
        acdf_val = acdf_2d_exact(approx, s, phi0, o_mat, x_good, x_good)
        jump = weighted_cdf_2d(s, phi0, o_mat,
                               np.array([s.scaled_eigenvalues[0]]),
                               np.array([s.scaled_eigenvalues[0]]))[0, 0]
        worst = max(worst, abs(acdf_val - jump))
    _report("9 (good point)", worst <= 2 * eta * epsilon,
            f"worst |two-time ACDF - ground jump| = {worst:.4f} <= "
            f"{2 * eta * epsilon}")
