"""Parameter sweeps: S and key rate versus distance, memory time and amplitude."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .bell import s_max
from .diqkd import KeyRateInput, secret_key_rate
from .noise import NoiseModel
from .protocol import UsdDegenerateError, run_protocol
from .usd import TUB, UsdStrategy

DEFAULT_ALPHA_GRID = tuple(np.round(np.arange(0.1, 4.0 + 1e-9, 0.05), 10))
DEFAULT_DISTANCE_GRID = tuple(float(x) for x in range(0, 101))
DEFAULT_TC_GRID = tuple(10.0 ** (-5 + k / 9) for k in range(4 * 9 + 1))
VIOLATION_MARGIN = 0.01
ALPHA_MAX = 8.0

OK = "ok"
UNREACHABLE = "unreachable-rate"
NO_VIOLATION = "no-violation"


class UnreachableRateError(ValueError):
    pass


class NoRootError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    x: float
    alpha_used: float
    F: float
    P: float
    R_eg: float
    S: float
    skr: float
    status: str = OK


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and everything held fixed.

    Either ``rate_hz`` (alpha chosen as the smallest amplitude reaching that
    heralding rate) or a fixed ``alpha`` must be given for distance and
    coherence sweeps. ``distance_km`` is the fixed separation for the
    coherence and alpha sweeps.
    """

    variable: str
    grid: tuple
    m: int = 0
    noise: NoiseModel = field(default_factory=NoiseModel)
    strategy: UsdStrategy = TUB
    rate_hz: float | None = None
    alpha: float | None = None
    distance_km: float = 0.0
    backend: str = "auto"
    margin: float = VIOLATION_MARGIN
    workers: int = 1

    def __post_init__(self):
        if self.variable not in ("distance", "coherence_time", "alpha", "efficiency"):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        g = tuple(float(v) for v in self.grid)
        if not g:
            raise ValueError("sweep grid is empty")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        object.__setattr__(self, "grid", g)


def required_success_prob(rate_hz, L_km, t_0, c_f=2e8):
    """USD success probability needed to herald ``rate_hz`` pairs per second."""
    if not rate_hz > 0:
        raise ValueError("target rate must be positive")
    p = rate_hz * max(L_km * 1e3 / c_f, t_0)
    if p > 1.0:
        raise UnreachableRateError(f"rate {rate_hz} Hz needs P={p:.4g} > 1 at L={L_km} km")
    return p


def success_probability(alpha, m, L_km, nm, strategy=TUB, backend="auto"):
    if alpha == 0:
        return 0.0
    try:
        return run_protocol(m, alpha, L_km, nm, strategy, backend).p_success
    except UsdDegenerateError:
        return 0.0


def solve_alpha_for_rate(p_req, m, L_km, nm, strategy=TUB, backend="auto", scan_step=0.05, xtol=1e-10):
    """Smallest alpha whose USD success probability reaches ``p_req``.

    P(alpha) oscillates for m >= 1 once the codeword overlap passes through
    zero, so the first crossing is bracketed by a forward scan from 0 and
    then refined with Brent's method.
    """
    if not 0.0 < p_req < 1.0:
        raise ValueError(f"P_req={p_req} outside (0, 1)")

    def f(a):
        return success_probability(a, m, L_km, nm, strategy, backend) - p_req

    lo, hi = 0.0, scan_step
    while f(hi) < 0:
        if hi >= ALPHA_MAX:
            raise NoRootError(f"no alpha <= {ALPHA_MAX} reaches P={p_req:.4g} at L={L_km} km")
        lo, hi = hi, min(hi + scan_step, ALPHA_MAX)
    a = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    # land on the feasible side of the root
    while f(a) < 0:
        a += xtol
    return a


def evaluate(m, alpha, L_km, nm, strategy=TUB, backend="auto", x=None, margin=VIOLATION_MARGIN):
    out = run_protocol(m, alpha, L_km, nm, strategy, backend)
    S = s_max(min(1.0, max(0.0, out.fidelity)))
    key = secret_key_rate(KeyRateInput(S=S, Q=out.qber, R_eg=out.rate))
    status = OK if S > 2.0 + margin else NO_VIOLATION
    return SweepRow(
        x=L_km if x is None else x,
        alpha_used=float(alpha),
        F=out.fidelity,
        P=out.p_success,
        R_eg=out.rate,
        S=S,
        skr=key.rate,
        status=status,
    )


def _unreachable(x):
    nan = math.nan
    return SweepRow(x=x, alpha_used=nan, F=nan, P=nan, R_eg=nan, S=nan, skr=nan, status=UNREACHABLE)


def _alpha_for(spec, L_km):
    if spec.rate_hz is not None:
        p_req = required_success_prob(spec.rate_hz, L_km, spec.noise.t_0, spec.noise.c_f)
        return solve_alpha_for_rate(p_req, spec.m, L_km, spec.noise, spec.strategy, spec.backend)
    if spec.alpha is None:
        raise ValueError("sweep needs rate_hz or alpha")
    return spec.alpha


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def sweep_distance(spec):
    """One row per distance; alpha from the target rate (or fixed)."""

    def row(L):
        try:
            a = _alpha_for(spec, L)
        except (UnreachableRateError, NoRootError):
            return _unreachable(L)
        return evaluate(spec.m, a, L, spec.noise, spec.strategy, spec.backend, margin=spec.margin)

    return _map(row, spec.grid, spec.workers)


def sweep_coherence(spec):
    """One row per memory coherence time at fixed distance."""
    L = spec.distance_km
    try:
        a = _alpha_for(spec, L)
    except (UnreachableRateError, NoRootError):
        return [_unreachable(tc) for tc in spec.grid]

    def row(tc):
        return evaluate(spec.m, a, L, spec.noise.with_(t_c=tc), spec.strategy, spec.backend, x=tc, margin=spec.margin)

    return _map(row, spec.grid, spec.workers)


def saturation_onset(rows, tol=1e-3):
    """Smallest t_c after which S gains less than ``tol`` over the next decade."""
    pts = [(r.x, r.S) for r in rows if r.status != UNREACHABLE and math.isfinite(r.x)]
    for i, (tc, s) in enumerate(pts):
        later = [s2 for tc2, s2 in pts[i:] if tc2 <= 10 * tc * (1 + 1e-9)]
        if pts[-1][0] < 10 * tc * (1 - 1e-9):
            break
        if max(later) - s < tol:
            return tc
    return math.nan


def sweep_alpha_skr(spec):
    L = spec.distance_km

    def row(a):
        return evaluate(spec.m, a, L, spec.noise, spec.strategy, spec.backend, x=a, margin=spec.margin)

    return _map(row, spec.grid, spec.workers)


def best_alpha(m, L_km, nm, strategy=TUB, objective="skr", rate_hz=None, grid=DEFAULT_ALPHA_GRID, backend="auto"):
    """Grid search plus bounded golden-section refinement of S or key rate over alpha.

    With ``rate_hz`` only amplitudes reaching that rate are admissible, and
    the smallest admissible amplitude is always a candidate.

    Returns:
        (alpha, SweepRow)
    """
    if objective not in ("S", "skr"):
        raise ValueError("objective must be 'S' or 'skr'")
    lo = 0.0
    if rate_hz is not None:
        p_req = required_success_prob(rate_hz, L_km, nm.t_0, nm.c_f)
        lo = solve_alpha_for_rate(p_req, m, L_km, nm, strategy, backend)

    def score(a):
        r = evaluate(m, a, L_km, nm, strategy, backend)
        return getattr(r, objective), r

    cands = sorted({a for a in grid if a > lo} | ({lo} if lo > 0 else set()))
    if not cands:
        cands = [lo]
    scored = [(score(a), a) for a in cands]
    i = max(range(len(scored)), key=lambda k: scored[k][0][0])
    (best_val, best_row), best_a = scored[i]
    left = cands[max(i - 1, 0)]
    right = cands[min(i + 1, len(cands) - 1)]
    if right > left:
        res = minimize_scalar(lambda a: -score(a)[0], bounds=(left, right), method="bounded", options={"xatol": 1e-6})
        if -res.fun > best_val:
            best_a = float(res.x)
            best_val, best_row = score(best_a)
    return best_a, best_row


@dataclass(frozen=True)
class ViolationRange:
    crossing_km: float
    status: str
    alpha_at_crossing: float = math.nan
    margin: float = VIOLATION_MARGIN


def violation_range(m, nm, strategy=TUB, rate_hz=None, alpha=None, margin=VIOLATION_MARGIN,
                    L_max=500.0, step=10.0, tol=0.1, backend="auto"):
    """Distance at which S drops to 2 + margin.

    S never falls strictly below 2 for the states produced here (F > 1/2
    always), so a violation counts only when S exceeds 2 by ``margin``.
    With ``rate_hz`` the amplitude maximizing S at that rate is used at
    each distance; otherwise ``alpha`` is held fixed.
    """
    if rate_hz is None and alpha is None:
        raise ValueError("need rate_hz or alpha")

    def s_at(L):
        try:
            if rate_hz is not None:
                a, r = best_alpha(m, L, nm, strategy, "S", rate_hz, backend=backend)
            else:
                a, r = alpha, evaluate(m, alpha, L, nm, strategy, backend)
        except (UnreachableRateError, NoRootError):
            return -math.inf, math.nan
        return r.S, a

    def violates(L):
        return s_at(L)[0] > 2.0 + margin

    if not violates(0.0):
        return ViolationRange(0.0, "no-violation-at-0", margin=margin)
    lo, hi = 0.0, step
    while violates(hi):
        lo = hi
        if hi >= L_max:
            return ViolationRange(L_max, "beyond-range", s_at(L_max)[1], margin)
        hi = min(hi + step, L_max)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if violates(mid):
            lo = mid
        else:
            hi = mid
    L = 0.5 * (lo + hi)
    return ViolationRange(L, OK, s_at(lo)[1], margin)


def summarize(rows):
    ok = [r for r in rows if r.status != UNREACHABLE]
    if not ok:
        return {"rows": len(rows), "max_S": None, "argmax_S_x": None, "max_skr": None, "argmax_skr_x": None}
    rs = max(ok, key=lambda r: r.S)
    rk = max(ok, key=lambda r: r.skr)
    return {
        "rows": len(rows),
        "max_S": rs.S,
        "argmax_S_x": rs.x,
        "max_skr": rk.skr,
        "argmax_skr_x": rk.x,
        "argmax_skr_alpha": rk.alpha_used,
    }
