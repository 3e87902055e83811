"""Run configuration: flat ``[section]`` / ``key = value`` files.

Sections are ``[noise]``, ``[code]``, ``[usd]``, ``[sweep]`` and ``[output]``.
Numbers are SI (km, s, Hz); ``inf`` is accepted for ``t_c``; booleans are
``true``/``false``; strings may be quoted. Every problem in a file is
collected before :class:`ConfigError` is raised.
"""

import configparser
import dataclasses
import math
from dataclasses import dataclass, field

from .noise import PRESETS, NoiseModel, noise_violations
from .usd import STRATEGY_KINDS, UsdStrategy

DEFAULT_PRESET = "table1"

_NOISE_FLOAT = ("eta_int", "eta_dc", "eta_uc", "eta_d", "gamma_db_per_km", "t_c", "t_0", "t_proc", "c_f", "q_int")
_NOISE_INT = ("alice_reflections", "bob_syndrome_reflections", "bob_entangle_reflections")

SCHEMA = {
    "noise": {"preset": str, **{k: float for k in _NOISE_FLOAT}, **{k: int for k in _NOISE_INT}},
    "code": {"m": "intlist", "alpha": float, "backend": str, "eps_trunc": float},
    "usd": {"strategy": str, "kappa": float},
    "sweep": {
        "start": float,
        "stop": float,
        "step": float,
        "per_decade": int,
        "grid": "floatlist",
        "rate_hz": float,
        "distance_km": float,
        "margin": float,
        "max_distance_km": float,
        "distance_tol_km": float,
        "include_infinite": bool,
    },
    "output": {"dir": str, "precision": int},
}


class ConfigError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass
class RunConfig:
    preset: str = DEFAULT_PRESET
    noise: NoiseModel = field(default_factory=lambda: PRESETS[DEFAULT_PRESET])
    m: tuple = (0,)
    alpha: float | None = None
    backend: str = "auto"
    eps_trunc: float = 1e-12
    strategy: UsdStrategy = field(default_factory=UsdStrategy)
    sweep: dict = field(default_factory=dict)
    out_dir: str = "out"
    precision: int = 12

    def resolved(self):
        """Plain-dict view with every value spelled out, for metadata."""
        return {
            "noise": {"preset": self.preset, **dataclasses.asdict(self.noise)},
            "code": {"m": list(self.m), "alpha": self.alpha, "backend": self.backend, "eps_trunc": self.eps_trunc},
            "usd": {"strategy": self.strategy.kind, "kappa": self.strategy.kappa},
            "sweep": dict(sorted(self.sweep.items())),
            "output": {"dir": self.out_dir, "precision": self.precision},
        }


def _convert(raw, kind):
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        raw = raw[1:-1]
    if kind is str:
        return raw
    if kind is bool:
        if raw.lower() in ("true", "false"):
            return raw.lower() == "true"
        raise ValueError(f"expected true/false, got {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        v = float(raw)
        if math.isnan(v):
            raise ValueError("NaN not allowed")
        return v
    if kind == "intlist":
        return tuple(int(x) for x in raw.replace(",", " ").split())
    if kind == "floatlist":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    raise AssertionError(kind)


def parse_config(text, preset=None):
    """Parse and validate config text.

    ``preset`` (e.g. from a command-line flag) overrides the file's
    ``[noise] preset``; explicit noise keys always win over the preset.

    Raises:
        ConfigError: listing every unknown key and out-of-range value.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    problems = []
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"unparseable config: {exc}"]) from None

    values = {}
    for section in cp.sections():
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        for key, raw in cp.items(section):
            kind = SCHEMA[section].get(key)
            if kind is None:
                problems.append(f"unknown key {section}.{key}")
                continue
            try:
                values[(section, key)] = _convert(raw, kind)
            except ValueError as exc:
                problems.append(f"{section}.{key}: {exc}")

    cfg = RunConfig()
    name = preset or values.get(("noise", "preset"), DEFAULT_PRESET)
    if name not in PRESETS:
        problems.append(f"noise.preset: unknown preset {name!r} (choose from {sorted(PRESETS)})")
        name = DEFAULT_PRESET
    cfg.preset = name

    fields = dataclasses.asdict(PRESETS[name])
    fields.update((k, v) for (s, k), v in values.items() if s == "noise" and k != "preset")
    bad = noise_violations(**fields)
    problems.extend(f"noise.{p}" for p in bad)
    cfg.noise = PRESETS[name] if bad else NoiseModel(**fields)

    m = values.get(("code", "m"), (0,))
    if not m or any(not 0 <= x <= 2 for x in m):
        problems.append(f"code.m: each code index must be 0, 1 or 2, got {list(m)}")
    cfg.m = m
    cfg.alpha = values.get(("code", "alpha"))
    if cfg.alpha is not None and not cfg.alpha > 0:
        problems.append(f"code.alpha: must be > 0, got {cfg.alpha}")
    cfg.backend = values.get(("code", "backend"), "auto")
    if cfg.backend not in ("auto", "fock", "analytic"):
        problems.append(f"code.backend: expected auto, fock or analytic, got {cfg.backend!r}")
    cfg.eps_trunc = values.get(("code", "eps_trunc"), 1e-12)
    if not 0 < cfg.eps_trunc < 1:
        problems.append(f"code.eps_trunc: must lie in (0, 1), got {cfg.eps_trunc}")

    kind = values.get(("usd", "strategy"), "tub")
    kappa = values.get(("usd", "kappa"), 1.0)
    if kind not in STRATEGY_KINDS:
        problems.append(f"usd.strategy: expected one of {STRATEGY_KINDS}, got {kind!r}")
    elif kind != "surrogate" and kappa != 1.0:
        problems.append("usd.kappa: only allowed with strategy = surrogate")
    elif not 0 < kappa <= 1:
        problems.append(f"usd.kappa: must lie in (0, 1], got {kappa}")
    else:
        cfg.strategy = UsdStrategy(kind, kappa)

    sweep = {k: v for (s, k), v in values.items() if s == "sweep"}
    for key in ("rate_hz", "step", "max_distance_km", "distance_tol_km", "per_decade"):
        if key in sweep and not sweep[key] > 0:
            problems.append(f"sweep.{key}: must be > 0, got {sweep[key]}")
    for key in ("distance_km", "margin", "start"):
        if key in sweep and sweep[key] < 0:
            problems.append(f"sweep.{key}: must be >= 0, got {sweep[key]}")
    if "start" in sweep and "stop" in sweep and sweep["stop"] < sweep["start"]:
        problems.append("sweep.stop: must not be below sweep.start")
    if "grid" in sweep:
        g = sweep["grid"]
        if not g or any(b <= a for a, b in zip(g, g[1:])):
            problems.append("sweep.grid: must be non-empty and strictly increasing")
    cfg.sweep = sweep

    cfg.out_dir = values.get(("output", "dir"), "out")
    cfg.precision = values.get(("output", "precision"), 12)
    if not 1 <= cfg.precision <= 17:
        problems.append(f"output.precision: must lie in 1..17, got {cfg.precision}")

    if problems:
        raise ConfigError(problems)
    return cfg
