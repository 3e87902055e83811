"""Unambiguous discrimination of two pure states with equal priors."""

from dataclasses import dataclass

import numpy as np

from .bosonic import inner_product, is_coherent

STRATEGY_KINDS = ("tub", "bs0", "surrogate")


class InvalidStrategyError(ValueError):
    pass


@dataclass(frozen=True)
class UsdStrategy:
    """How the logical-Z readout is realized.

    ``tub`` reaches the theoretical bound, ``bs0`` is the beam-splitter
    scheme that attains it for single coherent components only, and
    ``surrogate`` is a stand-in for a lossy circuit whose success is
    ``kappa`` times the bound. The surrogate is a modelling knob, not a
    derived circuit.
    """

    kind: str = "tub"
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise InvalidStrategyError(f"unknown USD strategy {self.kind!r}; choose from {STRATEGY_KINDS}")
        if not 0.0 < self.kappa <= 1.0:
            raise InvalidStrategyError(f"kappa={self.kappa} outside (0, 1]")
        if self.kind != "surrogate" and self.kappa != 1.0:
            raise InvalidStrategyError("kappa must be 1 unless kind='surrogate'")

    @property
    def scale(self):
        return self.kappa if self.kind == "surrogate" else 1.0


TUB = UsdStrategy("tub")


@dataclass(frozen=True)
class UsdOutcome:
    p_success: float
    e0: np.ndarray
    e1: np.ndarray
    e_fail: np.ndarray
    # E_b = |v_b><v_b|; kept so callers can contract without dense matrices
    v0: np.ndarray
    v1: np.ndarray

    @property
    def povm_elements(self):
        return self.e0, self.e1, self.e_fail


def usd_bound(psi0, psi1):
    """Maximum equal-prior success probability, 1 - |<psi0|psi1>|."""
    return 1.0 - min(1.0, abs(inner_product(psi0, psi1)))


def usd_povm(psi0, psi1, scale=1.0, degenerate_tol=1e-12):
    """Symmetric two-state USD measurement.

    E_0 is proportional to the projector onto the part of span{psi0, psi1}
    orthogonal to psi1 (and vice versa), weighted by ``1 / (1 + |s|)`` with
    ``s = <psi0|psi1>``. ``scale`` in (0, 1] shrinks both detection elements,
    leaving the measurement unambiguous. Identical inputs give E_fail = I.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    psi1 = np.asarray(psi1, dtype=complex)
    s = inner_product(psi0, psi1)
    dim = psi0.size
    if 1.0 - abs(s) <= degenerate_tol:
        zero = np.zeros(dim, dtype=complex)
        z = np.zeros((dim, dim), dtype=complex)
        return UsdOutcome(0.0, z, z.copy(), np.eye(dim, dtype=complex), zero, zero.copy())
    norm = np.sqrt(1.0 - abs(s) ** 2)
    perp1 = (psi0 - np.conj(s) * psi1) / norm  # orthogonal to psi1
    perp0 = (psi1 - s * psi0) / norm  # orthogonal to psi0
    c = scale / (1.0 + abs(s))
    v0 = np.sqrt(c) * perp1
    v1 = np.sqrt(c) * perp0
    e0 = np.outer(v0, v0.conj())
    e1 = np.outer(v1, v1.conj())
    e_fail = np.eye(dim, dtype=complex) - e0 - e1
    p = 0.5 * (abs(np.vdot(v0, psi0)) ** 2 + abs(np.vdot(v1, psi1)) ** 2)
    return UsdOutcome(float(p), e0, e1, e_fail, v0, v1)


def check_strategy(strategy, psi0, psi1):
    if strategy.kind == "bs0" and not (is_coherent(psi0, 1e-8) and is_coherent(psi1, 1e-8)):
        raise InvalidStrategyError("bs0 applies only to single coherent components (0-loss code)")


def strategy_success(strategy, psi0, psi1):
    check_strategy(strategy, psi0, psi1)
    return strategy.scale * usd_bound(psi0, psi1)


def strategy_povm(strategy, psi0, psi1):
    check_strategy(strategy, psi0, psi1)
    return usd_povm(psi0, psi1, scale=strategy.scale)
