"""Accelerated subspace-minimization conjugate gradient method with BB steps.

Directions live in ``span{g_k, s_{k-1}}`` and come from a two-dimensional
quadratic model; four cases are distinguished (see :func:`direction`).  Step
sizes satisfy a nonmonotone Wolfe condition against a Zhang-Hager style
reference value, and an optional quadratic-interpolation factor rescales steps
that were accepted on the first trial.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import defaults

FunGrad = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    LINE_SEARCH_FAILURE = "LineSearchFailure"


class NotDescentError(ValueError):
    """The line search was handed a non-descent direction."""


class LineSearchFailure(RuntimeError):
    pass


class CallbackError(RuntimeError):
    def __init__(self, iteration: int, cause: BaseException):
        self.iteration = iteration
        super().__init__(f"objective callback failed at iteration {iteration}: {cause!r}")


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = defaults.EPSILON
    max_iters: int = defaults.MAX_ITERS
    c1: float = defaults.WOLFE_C1
    c2: float = defaults.WOLFE_C2
    memory: int = defaults.NONMONOTONE_MEMORY
    decay: float = defaults.NONMONOTONE_DECAY
    curvature_floor: float = defaults.CURVATURE_FLOOR
    conjugacy_xi: float = defaults.CONJUGACY_XI
    delta_floor: float = defaults.DELTA_FLOOR
    bb_clamp: tuple[float, float] = defaults.BB_CLAMP
    eta_clamp: tuple[float, float] = defaults.ETA_CLAMP
    restart_interval: Optional[int] = None  # None: problem dimension
    powell_restart: float = defaults.POWELL_RESTART
    acceleration: bool = True
    alpha_max: float = defaults.ALPHA_MAX
    ls_max_evals: int = defaults.LS_MAX_EVALS
    approx_wolfe_eps: float = defaults.APPROX_WOLFE_EPS
    check_wolfe: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not self.bb_clamp[0] < self.bb_clamp[1]:
            raise ValueError("bb_clamp must satisfy alpha_min < alpha_max")
        if self.memory < 1:
            raise ValueError("nonmonotone memory must be >= 1")
        if not 0 <= self.decay <= 1:
            raise ValueError("nonmonotone decay must lie in [0, 1]")


@dataclass
class IterationRecord:
    k: int
    case: int
    f: float
    grad_inf_norm: float
    gtd: float
    alpha: float
    eta: float
    armijo_ok: bool
    curvature_ok: bool
    approximate: bool = False  # accepted by the approximate Wolfe test


@dataclass
class SolveReport:
    theta_star: np.ndarray
    f_star: float
    grad_inf_norm: float
    iters: int
    status: Status
    case_counts: dict = field(default_factory=lambda: {1: 0, 2: 0, 3: 0, 4: 0})
    accel_hits: int = 0
    evaluations: int = 0
    trace: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def direction(
    g: np.ndarray,
    s: Optional[np.ndarray],
    y: Optional[np.ndarray],
    config: SolverConfig = SolverConfig(),
    restart: bool = False,
) -> tuple[np.ndarray, int]:
    """Search direction and the case (1-4) that produced it.

    Cases 1-3 need a previous step ``s`` with ``sᵀy >= curvature_floor·|s||y|``.
    Case 1 (pure ``s`` direction) is taken when ``g`` is nearly orthogonal to
    ``y``; case 2 when the model determinant is safely positive; case 3
    otherwise.  Any failed gate, a restart, or a degenerate result falls back
    to case 4, ``d = -g``.
    """
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite gradient")
    steepest = (-g, 4)
    if restart or s is None or y is None:
        return steepest
    sy = float(s @ y)
    ns, ny = math.sqrt(s @ s), math.sqrt(y @ y)
    if not sy > 0 or sy < config.curvature_floor * ns * ny:
        return steepest
    gg = float(g @ g)
    if not gg > 0:
        return steepest  # |g|^2 underflowed
    gy = float(g @ y)
    gs = float(g @ s)
    ng = math.sqrt(gg)

    if abs(gy) <= config.conjugacy_xi * ng * ny:
        u, v, case = 0.0, -gs / sy, 1
    else:
        rho_k = 1.5 * (ny * ny / sy) * gg
        delta = rho_k * sy - gy * gy
        if delta > config.delta_floor * rho_k * sy:
            u = (gy * gs - sy * gg) / delta
            v = (gy * gg - rho_k * gs) / delta
            case = 2
        else:
            t = gy * gs / (sy * gg)
            u = -1.0 + t
            v = (1.0 - t) * gy / sy - gs / sy
            case = 3
    d = u * g + v * s
    gtd = float(g @ d)
    if not np.all(np.isfinite(d)) or not gtd < -1e-12 * ng * math.sqrt(d @ d):
        return steepest
    return d, case


@dataclass
class LineSearchResult:
    alpha: float
    f: float
    df: float
    evals: int
    first_trial: bool
    approximate: bool = False


def _trial_point(lo, f_lo, df_lo, hi, f_hi):
    width = hi - lo
    curv = f_hi - f_lo - df_lo * width
    t = None
    if math.isfinite(f_hi) and curv > 0:
        t = lo - df_lo * width * width / (2.0 * curv)
    lo_safe, hi_safe = lo + 0.1 * width, hi - 0.1 * width
    if t is None or not lo_safe <= t <= hi_safe:
        t = lo + 0.5 * width
    return t


def line_search(
    phi: Callable[[float], "tuple[float, float]"],
    alpha0: float,
    config: SolverConfig = SolverConfig(),
    *,
    f0: Optional[float] = None,
    df0: Optional[float] = None,
    reference: Optional[float] = None,
) -> LineSearchResult:
    """Find ``alpha`` with ``phi(alpha) <= R + c1 alpha phi'(0)`` and ``phi'(alpha) >= c2 phi'(0)``.

    ``phi(t)`` returns ``(value, derivative)``.  ``R`` defaults to ``phi(0)``
    (monotone Armijo).  Once function values stop resolving the decrease, the
    Hager-Zhang approximate test ``phi'(alpha) <= (2 c1 - 1) phi'(0)`` with
    ``phi(alpha) <= phi(0) + approx_wolfe_eps |phi(0)|`` stands in for Armijo; it
    is equivalent to Armijo on quadratics.  Raises :class:`NotDescentError` if
    ``phi'(0) >= 0`` and :class:`LineSearchFailure` if no acceptable step is
    bracketed.
    """
    if f0 is None or df0 is None:
        f0, df0 = phi(0.0)
    if not df0 < 0:
        raise NotDescentError(f"phi'(0) = {df0} is not negative")
    ref = f0 if reference is None else max(reference, f0)
    c1, c2 = config.c1, config.c2
    alpha_max = config.alpha_max
    alpha = min(alpha0, alpha_max)
    if not alpha > 0:
        raise ValueError("initial step must be positive")

    noise = config.approx_wolfe_eps * abs(f0)
    lo, f_lo, df_lo = 0.0, f0, df0
    hi, f_hi = math.inf, math.inf
    for evals in range(1, config.ls_max_evals + 1):
        f, df = phi(alpha)
        finite = math.isfinite(f) and math.isfinite(df)
        if finite and c2 * df0 <= df <= (2 * c1 - 1) * df0 and f <= f0 + noise and f > ref + c1 * alpha * df0:
            return LineSearchResult(alpha, f, df, evals, evals == 1, approximate=True)
        # a descending point that fails Armijo only within the noise band still bounds from below
        buried = f <= f0 + noise and df < 0
        if not finite or (f > ref + c1 * alpha * df0 and not buried):
            hi, f_hi = alpha, (f if math.isfinite(f) else math.inf)
        elif df < c2 * df0:
            lo, f_lo, df_lo = alpha, f, df
        else:
            return LineSearchResult(alpha, f, df, evals, evals == 1)
        if math.isinf(hi):
            if alpha >= alpha_max:
                break
            alpha = min(defaults.LS_EXPAND * alpha, alpha_max)
        else:
            if hi - lo <= 1e-16 * max(1.0, hi):
                break
            alpha = _trial_point(lo, f_lo, df_lo, hi, f_hi)
    raise LineSearchFailure(f"no Wolfe step found (bracket [{lo:g}, {hi:g}])")


def interpolation_factor(phi0: float, dphi0: float, phi1: float, eta_clamp=defaults.ETA_CLAMP) -> float:
    """Minimizer of the quadratic through ``phi(0)``, ``phi'(0)`` and ``phi(1)``.

    Returns 1 when the interpolant has no positive curvature or is not finite.
    """
    curv = phi1 - phi0 - dphi0
    if not (math.isfinite(curv) and math.isfinite(dphi0)) or curv <= 0 or dphi0 >= 0:
        return 1.0
    eta = -dphi0 / (2.0 * curv)
    return float(min(max(eta, eta_clamp[0]), eta_clamp[1]))


@dataclass
class Acceleration:
    eta: float
    theta: np.ndarray
    f: float
    g: np.ndarray


def accelerate(fg: FunGrad, theta, alpha, d, f0, gtd, f1, config: SolverConfig = SolverConfig()) -> Optional[Acceleration]:
    """Try ``theta + eta alpha d``; ``None`` unless it beats the plain step value ``f1``."""
    eta = interpolation_factor(f0, alpha * gtd, f1, config.eta_clamp)
    if eta == 1.0:
        return None
    trial = theta + (eta * alpha) * d
    f, g = fg(trial)
    if not (math.isfinite(f) and np.all(np.isfinite(g))) or not f < f1:
        return None
    return Acceleration(eta, trial, float(f), g)


def solve(fg: FunGrad, theta0, config: SolverConfig = SolverConfig()) -> SolveReport:
    """Minimize a smooth function given by ``fg(theta) -> (value, gradient)``."""
    x = np.array(theta0, dtype=float)
    n = x.size
    interval = config.restart_interval or max(n, 1)
    evaluations = 0
    k = 0

    def call(point):
        nonlocal evaluations
        evaluations += 1
        try:
            f, g = fg(point)
        except Exception as exc:
            raise CallbackError(k, exc) from exc
        return float(f), np.asarray(g, dtype=float)

    f, g = call(x)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise FloatingPointError("objective or gradient not finite at the starting point")

    report = SolveReport(x, f, float(np.max(np.abs(g), initial=0.0)), 0, Status.MAX_ITERS)
    s = y = g_prev = None
    C, Q = f, 1.0
    history = deque([f], maxlen=config.memory)
    status = Status.MAX_ITERS

    while True:
        gnorm = float(np.max(np.abs(g), initial=0.0))
        if gnorm <= config.epsilon:
            status = Status.CONVERGED
            break
        if k >= config.max_iters:
            break

        gg = float(g @ g)
        restart = (
            s is None
            or k % interval == 0
            or (g_prev is not None and abs(float(g @ g_prev)) >= config.powell_restart * gg)
        )
        d, case = direction(g, s, y, config, restart=restart)
        gtd = float(g @ d)

        if case == 4:
            alpha0 = 1.0 / gnorm
            if s is not None:
                sy = float(s @ y)
                if sy > 0:
                    alpha0 = float(s @ s) / sy
            alpha0 = min(max(alpha0, defaults.BB_SAFE[0]), defaults.BB_SAFE[1])
            alpha0 = min(max(alpha0, config.bb_clamp[0]), config.bb_clamp[1])
        else:
            alpha0 = 1.0

        if config.memory == 1:
            ref = f
        else:
            ref = min(C, max(history))

        cache = {}

        def phi(t, x=x, d=d):
            pt = x + t * d
            ft, gt = call(pt)
            cache[t] = (pt, ft, gt)
            return ft, float(gt @ d)

        try:
            ls = line_search(phi, alpha0, config, f0=f, df0=gtd, reference=ref)
        except LineSearchFailure:
            status = Status.LINE_SEARCH_FAILURE
            break
        x_new, f_new, g_new = cache[ls.alpha]
        armijo_ok = ls.approximate or f_new <= max(ref, f) + config.c1 * ls.alpha * gtd
        curvature_ok = ls.df >= config.c2 * gtd
        if config.check_wolfe and not (armijo_ok and curvature_ok):
            raise AssertionError(f"Wolfe conditions violated at iteration {k}")
        report.case_counts[case] += 1

        eta = 1.0
        finished = float(np.max(np.abs(g_new), initial=0.0)) <= config.epsilon
        if not finished and config.acceleration and ls.first_trial:
            acc = accelerate(call, x, ls.alpha, d, f, gtd, f_new, config)
            if acc is not None:
                eta, x_new, f_new, g_new = acc.eta, acc.theta, acc.f, acc.g
                report.accel_hits += 1

        if config.record_trace:
            report.trace.append(
                IterationRecord(k, case, f, gnorm, gtd, ls.alpha, eta, bool(armijo_ok), bool(curvature_ok), ls.approximate)
            )

        s, y, g_prev = x_new - x, g_new - g, g
        x, f, g = x_new, f_new, g_new
        k += 1
        Q_next = config.decay * Q + 1.0
        C = (config.decay * Q * C + f) / Q_next
        Q = Q_next
        history.append(f)

    report.theta_star = x
    report.f_star = f
    report.grad_inf_norm = float(np.max(np.abs(g), initial=0.0))
    report.iters = k
    report.status = status
    report.evaluations = evaluations
    return report
