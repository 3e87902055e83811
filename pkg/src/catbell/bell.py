"""CHSH values for two-qubit states.

Qubit basis: index 0 is |up> (sigma_z = +1), index 1 is |down>. Two-qubit
ordering is {up-up, up-down, down-up, down-down}. Pauli matrices follow
sigma_x sigma_y = i sigma_z.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)

TSIRELSON = 2 * np.sqrt(2)


def _unit(v, tol=1e-10):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"expected a unit 3-vector, got {v}")
    return v


@dataclass(frozen=True)
class MeasurementSetting:
    """Bloch directions of Alice's (a0, a1) and Bob's (b0, b1) observables."""

    a0: np.ndarray
    a1: np.ndarray
    b0: np.ndarray
    b1: np.ndarray

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            object.__setattr__(self, name, _unit(getattr(self, name)))


def observable(n):
    """n . sigma for a unit Bloch vector n."""
    n = _unit(n)
    return n[0] * SX + n[1] * SY + n[2] * SZ


def chsh_operator(ms):
    A0, A1 = observable(ms.a0), observable(ms.a1)
    B0, B1 = observable(ms.b0), observable(ms.b1)
    return np.kron(A0, B0) + np.kron(A0, B1) + np.kron(A1, B0) - np.kron(A1, B1)


def chsh_value(rho, ms):
    return float(np.real(np.trace(np.asarray(rho) @ chsh_operator(ms))))


def state_from_fidelity(F):
    """F |phi+><phi+| + (1 - F) |phi-><phi-|."""
    if not 0.0 <= F <= 1.0:
        raise ValueError(f"F={F} outside [0, 1]")
    return F * np.outer(PHI_PLUS, PHI_PLUS.conj()) + (1 - F) * np.outer(PHI_MINUS, PHI_MINUS.conj())


def optimal_settings(F):
    """Settings maximizing CHSH on ``state_from_fidelity(F)``; tan(theta) = 2F - 1."""
    if not 0.5 <= F <= 1.0:
        raise ValueError(f"F={F} outside [1/2, 1]")
    theta = np.arctan(2 * F - 1)
    c, s = np.cos(theta), np.sin(theta)
    return MeasurementSetting(Z_AXIS, X_AXIS, c * Z_AXIS + s * X_AXIS, c * Z_AXIS - s * X_AXIS)


def s_max(F):
    if not 0.0 <= F <= 1.0:
        raise ValueError(f"F={F} outside [0, 1]")
    return float(2.0 * np.sqrt(1.0 + (2.0 * F - 1.0) ** 2))


def correlation_matrix(rho):
    """T_ij = tr[rho sigma_i (x) sigma_j]."""
    rho = np.asarray(rho)
    return np.array([[np.real(np.trace(rho @ np.kron(si, sj))) for sj in PAULIS] for si in PAULIS])


def s_max_numeric(rho):
    """Maximal CHSH value from the two largest eigenvalues of T^T T."""
    T = correlation_matrix(rho)
    lam = np.sort(np.linalg.eigvalsh(T.T @ T))[::-1]
    return float(2.0 * np.sqrt(max(lam[0] + lam[1], 0.0)))


def _sphere(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def _best_in_plane(T, u):
    # orthonormal v, w spanning the plane normal to u; best Bob direction pair
    # for this u gives S = 2 sqrt(|T u|^2 + max_{v perp u} |T v|^2)
    a = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    v = np.cross(u, a)
    v /= np.linalg.norm(v)
    w = np.cross(u, v)
    M = np.array([[T @ v @ (T @ v), T @ v @ (T @ w)], [T @ w @ (T @ v), T @ w @ (T @ w)]])
    vals, vecs = np.linalg.eigh(M)
    c = vecs[:, -1]
    return vals[-1], c[0] * v + c[1] * w


def _settings_from(T, u, v):
    Tu, Tv = T @ u, T @ v
    nu, nv = np.linalg.norm(Tu), np.linalg.norm(Tv)
    theta = np.arctan2(nv, nu)
    b0 = np.cos(theta) * u + np.sin(theta) * v
    b1 = np.cos(theta) * u - np.sin(theta) * v
    a0 = Tu / nu if nu > 1e-15 else Z_AXIS
    a1 = Tv / nv if nv > 1e-15 else X_AXIS
    return MeasurementSetting(a0, a1, b0, b1)


def s_max_search(rho, n_grid=64, passes=2):
    """Maximize CHSH by direct search over settings.

    The sum and difference of Bob's directions are orthogonal vectors u, v;
    u is gridded over the sphere in two angles, v is optimized within the
    plane normal to u, then the best grid point is refined locally.
    Alice's directions follow in closed form for fixed Bob settings.

    Returns:
        (S, MeasurementSetting)
    """
    T = correlation_matrix(rho)

    def score(angles):
        u = _sphere(*angles)
        best_perp, v = _best_in_plane(T, u)
        return float(np.linalg.norm(T @ u) ** 2 + best_perp), v

    center = np.array([np.pi / 2, np.pi])
    half = np.array([np.pi / 2, np.pi])
    best = (-1.0, center)
    for _ in range(passes + 1):
        thetas = np.linspace(center[0] - half[0], center[0] + half[0], n_grid)
        phis = np.linspace(center[1] - half[1], center[1] + half[1], n_grid)
        for th in thetas:
            for ph in phis:
                val, _ = score((th, ph))
                if val > best[0]:
                    best = (val, np.array([th, ph]))
        center = best[1]
        half = half * 4.0 / n_grid
    res = minimize(lambda a: -score(a)[0], best[1], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
    angles = res.x if -res.fun >= best[0] else best[1]
    u = _sphere(*angles)
    _, v = score(angles)
    ms = _settings_from(T, u, v)
    return chsh_value(rho, ms), ms


def fidelity_phi_plus(rho):
    return float(np.real(PHI_PLUS.conj() @ np.asarray(rho) @ PHI_PLUS))
