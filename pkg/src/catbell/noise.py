"""Hardware inefficiencies, fiber loss and memory dephasing."""

import math
from dataclasses import asdict, dataclass, replace

C_FIBER = 2e8  # m/s


@dataclass(frozen=True)
class NoiseModel:
    """Efficiencies and timings of one protocol run.

    Reflection counts left as ``None`` take the defaults for code index m:
    Alice m + 1, Bob's syndrome m, Bob's entangling step 1.
    """

    eta_int: float = 1.0
    eta_dc: float = 1.0
    eta_uc: float = 1.0
    eta_d: float = 1.0
    gamma_db_per_km: float = 0.2
    t_c: float = math.inf
    t_0: float = 10e-6
    t_proc: float = 0.0
    alice_reflections: int | None = None
    bob_syndrome_reflections: int | None = None
    bob_entangle_reflections: int | None = None
    c_f: float = C_FIBER
    q_int: float = 0.0

    def __post_init__(self):
        problems = noise_violations(**asdict(self))
        if problems:
            raise ValueError("; ".join(problems))

    def reflections(self, m):
        """(alice, bob_syndrome, bob_entangle) reflection counts for code index m."""
        alice = m + 1 if self.alice_reflections is None else self.alice_reflections
        syn = m if self.bob_syndrome_reflections is None else self.bob_syndrome_reflections
        ent = 1 if self.bob_entangle_reflections is None else self.bob_entangle_reflections
        return alice, syn, ent

    @property
    def eta_c(self):
        return self.eta_dc * self.eta_uc

    def with_(self, **changes):
        return replace(self, **changes)


def noise_violations(**fields):
    """Every range problem in a set of NoiseModel field values."""
    out = []
    for name in ("eta_int", "eta_dc", "eta_uc", "eta_d"):
        v = fields[name]
        if not 0.0 <= v <= 1.0:
            out.append(f"{name}={v} outside [0, 1]")
    if fields["gamma_db_per_km"] < 0:
        out.append(f"gamma_db_per_km={fields['gamma_db_per_km']} must be >= 0")
    for name in ("t_c", "t_0", "c_f"):
        if not fields[name] > 0:
            out.append(f"{name}={fields[name]} must be > 0")
    if fields["t_proc"] < 0:
        out.append(f"t_proc={fields['t_proc']} must be >= 0")
    if not 0.0 <= fields["q_int"] <= 0.5:
        out.append(f"q_int={fields['q_int']} outside [0, 0.5]")
    for name in ("alice_reflections", "bob_syndrome_reflections", "bob_entangle_reflections"):
        v = fields[name]
        if v is not None and (int(v) != v or v < 0):
            out.append(f"{name}={v} must be a non-negative integer")
    return out


PRESETS = {
    # channel loss only
    "ideal": NoiseModel(),
    "table1": NoiseModel(eta_int=0.81, eta_dc=0.8, eta_uc=0.05, eta_d=0.97, t_c=1.0),
    "table1-altdc": NoiseModel(eta_int=0.81, eta_dc=0.356, eta_uc=0.05, eta_d=0.97, t_c=1.0),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def fiber_transmissivity(L_km, gamma_db_per_km=0.2):
    if L_km < 0:
        raise ValueError("distance must be non-negative")
    return 10.0 ** (-gamma_db_per_km * L_km / 10.0)


def total_transmissivity(nm, L_km, m):
    """Single effective transmissivity for all losses between Alice and Bob's USD."""
    n_refl = sum(nm.reflections(m))
    return nm.eta_int**n_refl * nm.eta_dc * nm.eta_uc * nm.eta_d * fiber_transmissivity(L_km, nm.gamma_db_per_km)


def storage_time(L_km, nm):
    """Time Alice's memory holds the qubit: fiber transit plus local processing."""
    if L_km < 0:
        raise ValueError("distance must be non-negative")
    return L_km * 1e3 / nm.c_f + nm.t_proc


def dephase_fidelity(F, t, t_c):
    """Exponential decay of the Bell coherence: F' = 1/2 + (F - 1/2) exp(-t / t_c)."""
    if not 0.5 - 1e-12 <= F <= 1.0 + 1e-12:
        raise ValueError(f"F={F} outside [1/2, 1]")
    if t < 0:
        raise ValueError("storage time must be non-negative")
    return 0.5 + (F - 0.5) * dephasing_factor(t, t_c)


def dephasing_factor(t, t_c):
    if math.isinf(t_c):
        return 1.0
    return math.exp(-t / t_c)
