"""Cat-code Bell test simulator and DI-QKD key-rate calculator."""

__version__ = "0.1.0"

from .bell import chsh_value, optimal_settings, s_max, s_max_numeric, state_from_fidelity
from .diqkd import KeyRateInput, binary_entropy, chi, entanglement_rate, secret_key_rate
from .noise import NoiseModel, PRESETS, total_transmissivity
from .protocol import ProtocolOutcome, analytic_0loss, run_protocol, simulate_fock
from .usd import UsdStrategy, usd_bound, usd_povm
