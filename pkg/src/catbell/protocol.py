"""End-to-end simulation of atom-light-atom entanglement distribution.

Two backends produce the shared atomic state:

* ``analytic_0loss`` gives closed forms for the 0-loss (coherent-state) code.
* ``simulate_fock`` runs the full pipeline on density matrices over
  ``qubit A (x) qubit B (x) Fock``: codeword preparation, pure loss, Bob's
  controlled rotation, the photon-number-modulo syndrome, USD on the light,
  and an outcome-dependent frame correction on Bob's qubit.

Bob's entangling interaction is the controlled rotation exp(i pi n / 2^m),
i.e. the logical X of the order-m code; for m = 0 it is the parity of the
cavity reflection. Parity alone acts trivially on codewords with m >= 1.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import bosonic
from .bell import PHI_PLUS, state_from_fidelity
from .noise import dephasing_factor, storage_time, total_transmissivity
from .usd import TUB, strategy_povm

log = logging.getLogger(__name__)

MAX_M = 2
_SYNDROME_FLOOR = 1e-15


class UsdDegenerateError(ValueError):
    """No syndrome leaves distinguishable light states."""


@dataclass
class ProtocolOutcome:
    fidelity: float
    p_success: float
    rho_ab: np.ndarray
    syndrome_distribution: list = field(default_factory=list)
    rate: float = math.nan
    eta_tot: float = math.nan
    qber: float = 0.0
    fidelity_raw: float = math.nan  # before memory dephasing
    dim: int = 0


def analytic_0loss(alpha, eta_tot):
    """Closed-form (F, P) for the 0-loss code with ideal USD, before memory dephasing."""
    if not 0.0 < eta_tot <= 1.0:
        raise ValueError(f"eta_tot={eta_tot} outside (0, 1]")
    x = abs(alpha) ** 2
    F = 0.5 * (1.0 + math.exp(-2.0 * (1.0 - eta_tot) * x))
    P = -math.expm1(-2.0 * eta_tot * x)
    return F, P


def _pauli_z_frames():
    z = np.diag([1.0, -1.0])
    i2 = np.eye(2)
    return [np.kron(a, b) for a in (i2, z) for b in (i2, z)]


_Z_FRAMES = _pauli_z_frames()


def fidelity_to_bell(rho):
    """Largest <phi+|Z^a (x) Z^b rho Z^a (x) Z^b|phi+> over the four Z frames."""
    rho = np.asarray(rho)
    return max(float(np.real(PHI_PLUS.conj() @ U @ rho @ U.conj().T @ PHI_PLUS)) for U in _Z_FRAMES)


def qber(rho):
    """Z (x) Z anticorrelation probability."""
    rho = np.asarray(rho)
    return float(np.real(rho[1, 1] + rho[2, 2]) / np.real(np.trace(rho)))


_X_B = np.kron(np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]))


def frame_correct(sigma):
    """Apply the Bob-side correction X^x . diag(1, e^{i phi}) maximizing phi+ overlap.

    Works on unnormalized branches; returns the corrected matrix.
    """
    best = None
    for flip in (False, True):
        s = _X_B @ sigma @ _X_B if flip else sigma
        phase = np.angle(s[0, 3]) if abs(s[0, 3]) > 0 else 0.0
        u = np.kron(np.eye(2), np.diag([1.0, np.exp(1j * phase)]))
        s = u @ s @ u.conj().T
        f = float(np.real(PHI_PLUS.conj() @ s @ PHI_PLUS))
        if best is None or f > best[0]:
            best = (f, s)
    return best[1]


def _initial_state(code):
    d = code.dim
    up = np.array([1.0, 0.0])
    down = np.array([0.0, 1.0])
    plus = (up + down) / np.sqrt(2)
    psi = np.kron(np.kron(up, plus), code.zero_word) + np.kron(np.kron(down, plus), code.one_word)
    return psi / np.sqrt(2), d


def simulate_fock(m, alpha, eta_tot, usd_strategy=TUB, dim=None, eps=bosonic.EPS_TRUNC):
    """Density-matrix simulation of one protocol round.

    Every syndrome residue is retained and frame-corrected (for an order-m
    code all 2^m residues are within the correctable loss order). For each
    residue j the USD discriminates the two codewords after the smallest
    loss pattern consistent with j.
    """
    if not 0 <= m <= MAX_M:
        raise ValueError(f"code index m must be in 0..{MAX_M}")
    if not 0.0 < eta_tot <= 1.0:
        raise ValueError(f"eta_tot={eta_tot} outside (0, 1]")
    if dim is None:
        dim = bosonic.default_dim(abs(alpha), eps)
    code = bosonic.cat_code(m, alpha, dim, eps)
    psi, d = _initial_state(code)

    rho = np.outer(psi, psi.conj())
    rho = bosonic.apply_loss_channel(rho, eta_tot, n_qubits=2)
    # Bob's qubit is the second qubit; the rotation acts on its |down> branch
    phases = bosonic.rotation_phases(m, d)
    diag = np.concatenate([np.ones(d), phases, np.ones(d), phases])
    rho = diag[:, None] * rho * diag.conj()[None, :]

    r4 = rho.reshape(4, d, 4, d)
    modulus = 2**m
    n = np.arange(d)
    total = np.zeros((4, 4), dtype=complex)
    syndromes = []
    for j in range(modulus):
        mask = n % modulus == j
        block = r4[:, mask][:, :, :, mask]
        p_j = float(np.real(np.einsum("anan->", block)))
        syndromes.append((j, p_j))
        if p_j < _SYNDROME_FLOOR:
            continue
        k = (modulus - j) % modulus
        K = bosonic.loss_kraus(eta_tot, k, d) if k < d else np.zeros((d, d))
        pair = []
        for word in (code.zero_word, code.one_word):
            v = (K @ word)[mask]
            nv = np.linalg.norm(v)
            pair.append(v / nv if nv > 0 else v)
        if np.linalg.norm(pair[0]) == 0:
            continue
        povm = strategy_povm(usd_strategy, pair[0], pair[1])
        for vec in (povm.v0, povm.v1):
            if not np.any(vec):
                continue
            sigma = np.einsum("n,anbm,m->ab", vec.conj(), block, vec)
            total += frame_correct(sigma)

    p_success = float(np.real(np.trace(total)))
    if p_success <= 0.0:
        raise UsdDegenerateError("USD cannot separate the codewords at this amplitude")
    rho_ab = bosonic.renormalize(total)
    rho_ab = (rho_ab + rho_ab.conj().T) / 2
    F = float(np.real(PHI_PLUS.conj() @ rho_ab @ PHI_PLUS))
    return ProtocolOutcome(
        fidelity=F,
        p_success=p_success,
        rho_ab=rho_ab,
        syndrome_distribution=syndromes,
        eta_tot=eta_tot,
        qber=qber(rho_ab),
        fidelity_raw=F,
        dim=d,
    )


def dephase_alice(rho_ab, factor):
    """Pure dephasing of Alice's qubit: coherences between her |up>, |down> shrink by factor."""
    a = np.array([0, 0, 1, 1])
    scale = np.where(a[:, None] == a[None, :], 1.0, factor)
    return rho_ab * scale


def run_protocol(m, alpha, L_km, nm, usd_strategy=TUB, backend="auto", dim=None):
    """Full pipeline at distance L: losses, protocol, memory dephasing and rate.

    ``backend`` is ``"fock"``, ``"analytic"`` (m = 0 only) or ``"auto"``,
    which picks the analytic form for m = 0.
    """
    eta = total_transmissivity(nm, L_km, m)
    if backend == "auto":
        backend = "analytic" if m == 0 else "fock"
    if backend == "analytic":
        if m != 0:
            raise ValueError("analytic backend covers the 0-loss code only")
        F, P = analytic_0loss(alpha, eta)
        out = ProtocolOutcome(
            fidelity=F,
            p_success=P * usd_strategy.scale,
            rho_ab=state_from_fidelity(F),
            syndrome_distribution=[(0, 1.0)],
            eta_tot=eta,
            fidelity_raw=F,
        )
    elif backend == "fock":
        out = simulate_fock(m, alpha, eta, usd_strategy, dim=dim)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    f = dephasing_factor(storage_time(L_km, nm), nm.t_c)
    out.rho_ab = dephase_alice(out.rho_ab, f)
    out.fidelity = float(np.real(PHI_PLUS.conj() @ out.rho_ab @ PHI_PLUS))
    out.qber = min(0.5, max(0.0, qber(out.rho_ab)) + nm.q_int)
    out.rate = out.p_success / max(L_km * 1e3 / nm.c_f, nm.t_0)
    return out
