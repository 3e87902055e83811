"""Bosonic states and channels in a truncated Fock basis.

States are plain complex numpy vectors (amplitude of |n> at index n) and
density operators are square complex matrices. Joint qubit/light operators
use the ordering ``qubits (x) Fock`` so that a joint index is
``q * dim + n``.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

log = logging.getLogger(__name__)

EPS_TRUNC = 1e-12
SAFETY_MARGIN = 5
MIN_DIM = 4


class TruncationError(ValueError):
    """Raised when a Fock cutoff cannot represent the requested state."""


def choose_truncation(abs_alpha, eps=EPS_TRUNC):
    """Smallest cutoff whose Poisson(|alpha|^2) tail beyond ``dim - 1`` is below eps.

    Never returns less than ``MIN_DIM``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    mean = float(abs_alpha) ** 2
    if mean == 0.0:
        return MIN_DIM
    # poisson.sf(k) = P(N > k), so the tail beyond dim - 1 is sf(dim - 1)
    dim = MIN_DIM
    while poisson.sf(dim - 1, mean) >= eps:
        dim += 1
    return dim


def default_dim(abs_alpha, eps=EPS_TRUNC):
    """Cutoff used by the simulators: ``choose_truncation`` plus a safety margin."""
    return choose_truncation(abs_alpha, eps) + SAFETY_MARGIN


def _raw_coherent(alpha, dim):
    # amps[n] = amps[n-1] * alpha / sqrt(n); no factorials so large dim is safe
    amps = np.empty(dim, dtype=complex)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    return amps


def coherent_state(alpha, dim, eps=EPS_TRUNC):
    """Coherent state |alpha> renormalized over the truncated basis.

    Raises:
        TruncationError: if ``dim`` is below ``choose_truncation(|alpha|, eps)``.
    """
    need = choose_truncation(abs(alpha), eps)
    if dim < need:
        raise TruncationError(f"dim={dim} too small for |alpha|={abs(alpha):.4g} (need >= {need})")
    amps = _raw_coherent(complex(alpha), dim)
    return amps / np.linalg.norm(amps)


@dataclass(frozen=True)
class CatCode:
    """Order-m cat code: 2^m coherent components equally spaced in phase.

    ``norm_const`` is the squared norm of the unnormalized component sum for
    the zero codeword.
    """

    m: int
    alpha: complex
    zero_word: np.ndarray
    one_word: np.ndarray
    norm_const: float

    @property
    def loss_order(self):
        return 2**self.m - 1

    @property
    def dim(self):
        return len(self.zero_word)


def _cat_components(m, alpha, bit, dim):
    n_comp = 2**m
    phases = np.exp(1j * np.pi * (2 * np.arange(n_comp) + bit) / n_comp)
    return sum(_raw_coherent(complex(alpha) * ph, dim) for ph in phases)


def cat_codeword(m, alpha, bit, dim, eps=EPS_TRUNC):
    """Normalized codeword of the order-m cat code and its normalization constant.

    Bit 0 sums coherent states at phases ``2k pi / 2^m``; bit 1 at
    ``(2k + 1) pi / 2^m``.

    Returns:
        (amps, norm_const) where norm_const is the squared norm before
        normalization.
    """
    if m < 0:
        raise ValueError("code index m must be non-negative")
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    need = choose_truncation(abs(alpha), eps)
    if dim < need:
        raise TruncationError(f"dim={dim} too small for |alpha|={abs(alpha):.4g} (need >= {need})")
    raw = _cat_components(m, alpha, bit, dim)
    norm_const = float(np.vdot(raw, raw).real)
    if norm_const < 1e-300:
        raise ValueError("codeword vanishes for this amplitude")
    return raw / np.sqrt(norm_const), norm_const


def cat_code(m, alpha, dim=None, eps=EPS_TRUNC):
    if dim is None:
        dim = default_dim(abs(alpha), eps)
    zero, norm0 = cat_codeword(m, alpha, 0, dim, eps)
    one, _ = cat_codeword(m, alpha, 1, dim, eps)
    return CatCode(m=m, alpha=complex(alpha), zero_word=zero, one_word=one, norm_const=norm0)


def inner_product(a, b):
    """<a|b> for two Fock vectors of equal length."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def mean_photon_number(state):
    """Mean photon number of a Fock vector or density matrix."""
    state = np.asarray(state)
    n = np.arange(state.shape[0])
    if state.ndim == 1:
        return float(np.sum(n * np.abs(state) ** 2))
    return float(np.real(np.sum(n * np.diag(state))))


def _loss_weights(eta, k, dim):
    # w[n] = sqrt(C(n, k) eta^(n-k) (1-eta)^k) for n >= k, computed in log space
    n = np.arange(k, dim)
    if eta == 1.0:
        return np.ones(dim - k) if k == 0 else np.zeros(dim - k)
    if eta == 0.0:
        return np.where(n == k, 1.0, 0.0)
    logc = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return np.exp(0.5 * (logc + (n - k) * np.log(eta) + k * np.log1p(-eta)))


def loss_kraus(eta, k, dim):
    """Kraus operator K_k of the pure-loss channel with transmissivity eta.

    ``<n-k|K_k|n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k)``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not 0 <= k < dim:
        raise ValueError(f"need 0 <= k < dim, got k={k}, dim={dim}")
    K = np.zeros((dim, dim))
    if eta == 1.0:
        if k == 0:
            np.fill_diagonal(K, 1.0)
        return K
    w = _loss_weights(eta, k, dim)
    n = np.arange(k, dim)
    K[n - k, n] = w
    return K


def apply_loss_channel(rho, eta, n_qubits=0):
    """Pure-loss channel on the light mode of ``rho``.

    ``rho`` acts on ``(2**n_qubits) x dim``; qubits are untouched. The Kraus
    sum is evaluated with the shift structure of K_k rather than dense
    products, which keeps the cost at O(d^3) for a d-level mode.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    rho = np.asarray(rho, dtype=complex)
    q = 2**n_qubits
    total = rho.shape[0]
    if total % q:
        raise ValueError("matrix size not divisible by qubit dimension")
    dim = total // q
    if eta == 1.0:
        return rho.copy()
    r = rho.reshape(q, dim, q, dim)
    out = np.zeros_like(r)
    for k in range(dim):
        w = _loss_weights(eta, k, dim)
        if not np.any(w):
            continue
        block = r[:, k:, :, k:] * w[None, :, None, None] * w[None, None, None, :]
        out[:, : dim - k, :, : dim - k] += block
    return out.reshape(total, total)


def loss_kraus_vectors(psi, eta, n_qubits=0, atol=0.0):
    """Kraus branches ``(I (x) K_k)|psi>`` of a pure joint state.

    Equivalent to ``apply_loss_channel(|psi><psi|)`` as an ensemble; branches
    with norm at or below ``atol`` are dropped.
    """
    psi = np.asarray(psi, dtype=complex)
    q = 2**n_qubits
    dim = psi.size // q
    v = psi.reshape(q, dim)
    out = []
    for k in range(dim):
        branch = np.zeros_like(v)
        if eta == 1.0:
            if k:
                break
            branch = v.copy()
        else:
            branch[:, : dim - k] = v[:, k:] * _loss_weights(eta, k, dim)
        if np.linalg.norm(branch) > atol:
            out.append((k, branch.reshape(-1)))
    return out


def rotation_phases(m, dim):
    """Diagonal of exp(i pi n / 2^m); m = 0 gives the parity (-1)^n."""
    n = np.arange(dim)
    if m == 0:
        return np.where(n % 2, -1.0, 1.0).astype(complex)
    return np.exp(1j * np.pi * n / 2**m)


def controlled_rotation_diag(m, dim):
    """Diagonal of the qubit-controlled rotation on ``qubit (x) Fock``.

    The |up> branch (qubit index 0) is untouched; the |down> branch picks up
    exp(i pi n / 2^m).
    """
    return np.concatenate([np.ones(dim, dtype=complex), rotation_phases(m, dim)])


def controlled_parity(joint):
    """Controlled parity on a ``qubit (x) Fock`` density matrix or vector.

    Identity on |up>, (-1)^n on the light of the |down> branch.
    """
    return controlled_rotation(joint, 0)


def controlled_rotation(joint, m):
    """Controlled exp(i pi n / 2^m) on a ``qubit (x) Fock`` state."""
    joint = np.asarray(joint, dtype=complex)
    size = joint.shape[0]
    if size % 2:
        raise ValueError("joint dimension must be 2 * dim")
    d = controlled_rotation_diag(m, size // 2)
    if joint.ndim == 1:
        return d * joint
    if joint.shape != (size, size):
        raise ValueError("expected a square matrix")
    return d[:, None] * joint * d.conj()[None, :]


def number_mod_projector(m, j, dim):
    """Diagonal projector onto photon numbers n = j (mod 2^m)."""
    modulus = 2**m
    if not 0 <= j < modulus:
        raise ValueError(f"residue must satisfy 0 <= j < {modulus}")
    return np.diag((np.arange(dim) % modulus == j).astype(float))


def is_density_operator(rho, trace=1.0, herm_tol=1e-10, trace_tol=1e-9, eig_tol=1e-8):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        return False
    if trace is not None and abs(np.trace(rho).real - trace) > trace_tol:
        return False
    return bool(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) >= -eig_tol)


def renormalize(rho):
    tr = float(np.trace(rho).real)
    if tr <= 0:
        raise ValueError("cannot renormalize a zero-trace operator")
    log.debug("renormalizing branch with trace %.6g", tr)
    return rho / tr


def coherent_fidelity(rho, alpha):
    """<alpha|rho|alpha> at the cutoff of rho."""
    dim = rho.shape[0]
    v = _raw_coherent(complex(alpha), dim)
    v = v / np.linalg.norm(v)
    return float(np.real(np.vdot(v, rho @ v)))


def estimate_coherent_amplitude(psi):
    """Best-fit coherent amplitude <a> of a normalized Fock vector."""
    psi = np.asarray(psi)
    n = np.arange(1, psi.size)
    return complex(np.vdot(psi[:-1], np.sqrt(n) * psi[1:]))


def is_coherent(psi, tol=1e-9):
    """True if psi is a single coherent component (up to global phase)."""
    beta = estimate_coherent_amplitude(psi)
    ref = _raw_coherent(beta, len(psi))
    ref = ref / np.linalg.norm(ref)
    return abs(abs(np.vdot(ref, psi)) - 1.0) <= tol
