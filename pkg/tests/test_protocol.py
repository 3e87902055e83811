import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from catbell import bosonic
from catbell.bell import PHI_MINUS, PHI_PLUS, state_from_fidelity
from catbell.noise import PRESETS, NoiseModel, dephase_fidelity, storage_time
from catbell.protocol import (
    analytic_0loss,
    dephase_alice,
    fidelity_to_bell,
    qber,
    run_protocol,
    simulate_fock,
)
from catbell.usd import UsdStrategy, usd_povm

ALPHA_GRID = np.linspace(0.3, 2.5, 12)
ETA_GRID = np.linspace(0.1, 1.0, 10)


def pipeline_oracle(m, alpha, eta):
    """Same protocol built from pure Kraus branches and dense POVM matrices."""
    code = bosonic.cat_code(m, alpha)
    d = code.dim
    up, down = np.array([1.0, 0]), np.array([0, 1.0])
    plus = (up + down) / math.sqrt(2)
    psi = (np.kron(np.kron(up, plus), code.zero_word) + np.kron(np.kron(down, plus), code.one_word)) / math.sqrt(2)
    rot = np.diag(bosonic.controlled_rotation_diag(m, d))
    U = np.kron(np.eye(2), rot)
    N = 2**m
    # Kraus branches are incoherent; frames are chosen per (syndrome, outcome) after summing them
    sigmas = {}
    for k, branch in bosonic.loss_kraus_vectors(psi, eta, n_qubits=2):
        j = (-k) % N
        M = (np.kron(np.eye(4), bosonic.number_mod_projector(m, j, d)) @ U @ branch).reshape(4, d)
        K = bosonic.loss_kraus(eta, k % N, d)
        a, b = K @ code.zero_word, K @ code.one_word
        out = usd_povm(a / np.linalg.norm(a), b / np.linalg.norm(b))
        for o, E in enumerate((out.e0, out.e1)):
            sigma = np.einsum("an,mn,bm->ab", M, E, M.conj())
            sigmas[j, o] = sigmas.get((j, o), 0) + sigma
    total = sum(_best_frame(s) for s in sigmas.values())
    P = np.trace(total).real
    return float(np.real(PHI_PLUS.conj() @ total @ PHI_PLUS) / P), float(P)


def _best_frame(sigma):
    # brute force over Bob's X flip and a fine grid of phase gates, then polish
    best, arg = -1.0, None
    X = np.array([[0, 1], [1, 0]])
    for flip in (np.eye(2), X):
        s = np.kron(np.eye(2), flip) @ sigma @ np.kron(np.eye(2), flip)
        for phi in np.linspace(0, 2 * np.pi, 721):
            u = np.kron(np.eye(2), np.diag([1, np.exp(1j * phi)]))
            t = u @ s @ u.conj().T
            f = np.real(PHI_PLUS.conj() @ t @ PHI_PLUS)
            if f > best:
                best, arg = f, t
    return arg


# analytic backend


def test_analytic_examples():
    F, P = analytic_0loss(1.3, 1.0)
    assert F == 1.0
    assert P == pytest.approx(1 - math.exp(-2 * 1.69))
    F, P = analytic_0loss(1e-6, 0.4)
    assert F == pytest.approx(1.0) and P == pytest.approx(0.0, abs=1e-11)
    F, P = analytic_0loss(1.0, 0.5)
    assert F == pytest.approx((1 + math.exp(-1)) / 2, abs=1e-12)
    assert F == pytest.approx(0.68394, abs=1e-5)
    assert P == pytest.approx(0.63212, abs=1e-5)


def test_analytic_rejects():
    with pytest.raises(ValueError):
        analytic_0loss(1.0, 0.0)


@given(st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0.05, 0.99))
def test_analytic_monotone(a1, a2, eta):
    lo, hi = sorted((a1, a2))
    Flo, Plo = analytic_0loss(lo, eta)
    Fhi, Phi = analytic_0loss(hi, eta)
    assert Fhi <= Flo + 1e-15
    assert Phi >= Plo - 1e-15


# Fock backend vs closed form


@pytest.mark.parametrize("alpha", [0.4, 1.1, 2.2])
def test_lossless_end_to_end(alpha):
    out = simulate_fock(0, alpha, 1.0)
    assert out.fidelity == pytest.approx(1.0, abs=1e-8)
    assert out.p_success == pytest.approx(1 - math.exp(-2 * alpha**2), abs=1e-9)


def test_fock_vs_analytic_example():
    out = simulate_fock(0, 1.0, 0.5)
    F, P = analytic_0loss(1.0, 0.5)
    assert abs(out.fidelity - F) <= 1e-6 and abs(out.p_success - P) <= 1e-6


def test_fock_vs_analytic_grid():
    worst = 0.0
    for a in ALPHA_GRID:
        for eta in ETA_GRID:
            out = simulate_fock(0, a, eta)
            F, P = analytic_0loss(a, eta)
            worst = max(worst, abs(out.fidelity - F), abs(out.p_success - P))
    assert worst <= 1e-6


@pytest.mark.parametrize("m,alpha,eta", [(0, 1.2, 0.7), (1, 1.2, 0.9), (1, 1.6, 0.4), (2, 1.4, 0.8), (2, 1.9, 0.5)])
def test_fock_vs_pipeline_oracle(m, alpha, eta):
    F, P = pipeline_oracle(m, alpha, eta)
    out = simulate_fock(m, alpha, eta)
    assert out.p_success == pytest.approx(P, abs=1e-10)
    assert out.fidelity == pytest.approx(F, abs=1e-5)
    assert out.fidelity >= F - 1e-10


def test_one_loss_beats_zero_loss():
    assert simulate_fock(1, 1.2, 0.9).fidelity > simulate_fock(0, 1.2, 0.9).fidelity


@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("eta", [0.2, 0.7, 1.0])
def test_output_state_structure(m, eta):
    out = simulate_fock(m, 1.5, eta)
    r = out.rho_ab
    assert bosonic.is_density_operator(r)
    mask = np.ones((4, 4), bool)
    mask[[0, 0, 3, 3], [0, 3, 0, 3]] = False
    assert np.max(np.abs(r[mask])) <= 1e-7
    assert abs(r[0, 0] - r[3, 3]) <= 1e-7
    assert 0.5 - 1e-9 <= out.fidelity <= 1 + 1e-9
    assert 0 <= out.p_success <= 1
    assert out.qber == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("eta", [0.3, 0.8])
def test_syndromes_sum_to_one(m, eta):
    out = simulate_fock(m, 1.4, eta)
    assert len(out.syndrome_distribution) == 2**m
    assert sum(p for _, p in out.syndrome_distribution) == pytest.approx(1.0, abs=1e-8)


def test_surrogate_scales_success_not_fidelity():
    base = simulate_fock(1, 1.3, 0.7)
    half = simulate_fock(1, 1.3, 0.7, UsdStrategy("surrogate", 0.5))
    assert half.p_success == pytest.approx(0.5 * base.p_success, rel=1e-12)
    assert half.fidelity == pytest.approx(base.fidelity, abs=1e-12)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        simulate_fock(3, 1.0, 0.5)
    with pytest.raises(ValueError):
        simulate_fock(0, 1.0, 1.5)


@pytest.mark.parametrize("eta", [0.3, 0.6, 0.9])
def test_fock_monotone_m0(eta):
    rows = [simulate_fock(0, a, eta) for a in np.arange(0.3, 2.51, 0.1)]
    assert all(b.fidelity <= a.fidelity + 1e-10 for a, b in zip(rows, rows[1:]))
    assert all(b.p_success >= a.p_success - 1e-10 for a, b in zip(rows, rows[1:]))


@pytest.mark.parametrize("m,x_max", [(1, 1.4), (2, 2.0)])
@pytest.mark.parametrize("eta", [0.3, 0.6, 0.9])
def test_success_monotone_before_revival(m, x_max, eta):
    grid = np.linspace(0.3, math.sqrt(x_max / eta), 25)
    P = [simulate_fock(m, a, eta).p_success for a in grid]
    assert all(b >= a - 1e-10 for a, b in zip(P, P[1:]))


@pytest.mark.parametrize("m,a_max", [(1, 1.4), (2, 1.7)])
@pytest.mark.parametrize("eta", [0.3, 0.6, 0.9])
def test_fidelity_monotone_at_moderate_amplitude(m, a_max, eta):
    F = [simulate_fock(m, a, eta).fidelity for a in np.linspace(0.3, a_max, 25)]
    assert all(b <= a + 1e-10 for a, b in zip(F, F[1:]))


def test_success_revives_for_cat_codes():
    # codeword overlap oscillates with |alpha|^2, so P is not monotone at large amplitude
    P = [simulate_fock(1, a, 0.9).p_success for a in np.arange(1.0, 2.0, 0.05)]
    assert any(b < a for a, b in zip(P, P[1:]))


# fidelity_to_bell and qber


def test_fidelity_to_bell_examples():
    assert fidelity_to_bell(np.outer(PHI_PLUS, PHI_PLUS.conj())) == pytest.approx(1.0)
    assert fidelity_to_bell(np.outer(PHI_MINUS, PHI_MINUS.conj())) == pytest.approx(1.0)
    assert fidelity_to_bell(np.eye(4) / 4) == pytest.approx(0.25)


def test_qber():
    assert qber(state_from_fidelity(0.8)) == pytest.approx(0.0)
    assert qber(np.eye(4) / 4) == pytest.approx(0.5)


@given(st.floats(0.5, 1.0), st.floats(0, 1))
def test_dephase_alice_matches_fidelity_map(F, f):
    rho = dephase_alice(state_from_fidelity(F), f)
    assert np.real(PHI_PLUS.conj() @ rho @ PHI_PLUS) == pytest.approx(0.5 + (F - 0.5) * f, abs=1e-12)


# run_protocol


def test_run_lossless_point():
    nm = NoiseModel()
    out = run_protocol(0, 1.0, 0.0, nm)
    assert out.fidelity == pytest.approx(1.0, abs=1e-12)
    assert out.rate == pytest.approx(out.p_success / nm.t_0)


def test_run_ten_km():
    out = run_protocol(0, 1.0, 10.0, NoiseModel())
    assert out.eta_tot == pytest.approx(10**-0.2, rel=1e-12)
    assert out.eta_tot == pytest.approx(0.631, abs=1e-3)
    assert out.fidelity_raw == pytest.approx((1 + math.exp(-2 * (1 - 10**-0.2))) / 2, abs=1e-12)
    assert out.fidelity_raw == pytest.approx(0.739, abs=1e-3)
    assert out.rate == pytest.approx(out.p_success / 50e-6)


def test_run_table1():
    out = run_protocol(0, 1.0, 10.0, PRESETS["table1"])
    assert np.isfinite(out.fidelity) and np.isfinite(out.p_success)
    F = dephase_fidelity(out.fidelity_raw, storage_time(10, PRESETS["table1"]), 1.0)
    assert out.fidelity == pytest.approx(F, abs=1e-12)


def test_run_backends_agree():
    nm = PRESETS["table1"]
    a = run_protocol(0, 0.9, 20, nm, backend="analytic")
    b = run_protocol(0, 0.9, 20, nm, backend="fock")
    assert a.fidelity == pytest.approx(b.fidelity, abs=1e-8)
    assert a.p_success == pytest.approx(b.p_success, abs=1e-8)
    with pytest.raises(ValueError):
        run_protocol(1, 0.9, 20, nm, backend="analytic")


def test_run_qber_offset():
    out = run_protocol(0, 1.0, 5.0, NoiseModel(q_int=0.03))
    assert out.qber == pytest.approx(0.03)


def test_deterministic():
    a = simulate_fock(2, 1.7, 0.6)
    b = simulate_fock(2, 1.7, 0.6)
    assert np.array_equal(a.rho_ab, b.rho_ab) and a.p_success == b.p_success
