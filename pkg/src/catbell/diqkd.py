"""Asymptotic DI-QKD key rate from the CHSH value."""

import math
from dataclasses import dataclass

from .noise import C_FIBER

TSIRELSON = 2.0 * math.sqrt(2.0)
S_TOL = 1e-9


def binary_entropy(x):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def chi(S, with_flag=False):
    """Eve's information bound h((1 + sqrt((S/2)^2 - 1)) / 2).

    S below the local bound gives full leakage (1) and sets the flag.
    """
    if S > TSIRELSON + S_TOL:
        raise ValueError(f"S={S} exceeds the Tsirelson bound")
    if S < 2.0:
        return (1.0, True) if with_flag else 1.0
    S = min(S, TSIRELSON)
    val = binary_entropy(min(1.0, (1.0 + math.sqrt(max((S / 2.0) ** 2 - 1.0, 0.0))) / 2.0))
    return (val, False) if with_flag else val


def entanglement_rate(P, L_km, t_0, c_f=C_FIBER):
    """Heralded pairs per second: P / max(L / c_f, t_0)."""
    if not 0.0 <= P <= 1.0:
        raise ValueError(f"P={P} outside [0, 1]")
    if L_km < 0 or not t_0 > 0:
        raise ValueError("need L >= 0 and t_0 > 0")
    return P / max(L_km * 1e3 / c_f, t_0)


@dataclass(frozen=True)
class KeyRateInput:
    S: float
    Q: float = 0.0
    R_eg: float = 1.0

    def __post_init__(self):
        if self.S > TSIRELSON + S_TOL:
            raise ValueError(f"S={self.S} exceeds 2*sqrt(2)")
        if not 0.0 <= self.Q <= 0.5:
            raise ValueError(f"Q={self.Q} outside [0, 1/2]")
        if self.R_eg < 0:
            raise ValueError("R_eg must be non-negative")


@dataclass(frozen=True)
class KeyRate:
    rate: float
    raw: float
    leakage: float
    error_cost: float


def secret_key_rate(inp):
    """max(0, R_eg (1 - h(Q) - chi(S))); the unclamped value is kept in ``raw``."""
    leak = chi(inp.S)
    cost = binary_entropy(inp.Q)
    raw = inp.R_eg * (1.0 - cost - leak)
    return KeyRate(rate=max(0.0, raw), raw=raw, leakage=leak, error_cost=cost)
