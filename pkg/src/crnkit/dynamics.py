"""Mass-action dynamics: vector field, adaptive embedded Runge-Kutta
integration that refuses to cross the boundary, piecewise-constant rate
selections from a tempering (the differential-inclusion semantics), steady
states, and free-energy evaluation along trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .birch import NoConvergence, g_alpha, grad_g_alpha, _orthonormal_H
from .network import ReactionNetwork, StoichiometryInfo, Tempering, stoichiometric_subspace

_MODES = ("constant-mid", "constant-sampled", "piecewise-constant", "fixed")


@dataclass(frozen=True)
class RatePolicy:
    """How rate constants are selected from a tempering over time.

    constant-mid: interval midpoints, fixed in time.
    constant-sampled: one uniform draw per reaction at t = 0.
    piecewise-constant: fresh uniform draws every dt time units.
    fixed: the supplied rates (validated against the tempering).
    """

    mode: str
    seed: int = 0
    dt: float = 0.1
    rates: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.mode == "fixed" and self.rates is None:
            raise ValueError("fixed policy needs rates")
        if self.mode == "piecewise-constant" and self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    rate_log: tuple[tuple[float, tuple[float, ...]], ...]
    events: tuple[dict, ...]

    def rates_at(self, t: float) -> np.ndarray:
        k = self.rate_log[0][1]
        for t0, kk in self.rate_log:
            if t0 <= t:
                k = kk
            else:
                break
        return np.array(k)


@dataclass(frozen=True)
class SteadyState:
    x: tuple[float, ...]
    residual: float


def mass_action_rhs(net: ReactionNetwork, k, x) -> np.ndarray:
    """Sum over reactions of k_r * x**source_r * (target_r - source_r).

    Monomials x**y are componentwise powers (0**0 = 1); states that make a
    monomial undefined (zeros with negative exponents, negative coordinates
    with fractional exponents) raise ValueError.
    """
    Y = net.source_matrix()
    F = net.flux_matrix()
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        mono = np.prod(np.power(x[None, :], Y), axis=1)
    if not np.all(np.isfinite(mono)):
        raise ValueError(f"monomials undefined at x = {x}")
    return (k * mono) @ F


def _rhs_factory(net: ReactionNetwork):
    Y = net.source_matrix()
    F = net.flux_matrix()

    def rhs(k, x):
        with np.errstate(all="ignore"):
            mono = np.prod(np.power(x[None, :], Y), axis=1)
        if not np.all(np.isfinite(mono)):
            return None
        return (k * mono) @ F

    return rhs


def _mass_action_jacobian(net: ReactionNetwork, k, x):
    Y = net.source_matrix()
    F = net.flux_matrix()
    with np.errstate(all="ignore"):
        mono = np.prod(np.power(x[None, :], Y), axis=1)
    w = np.asarray(k, dtype=float) * mono
    return F.T @ (w[:, None] * (Y / x[None, :]))


# Dormand-Prince 5(4) pair; the last row of A doubles as the 5th-order
# weights (FSAL), BHAT is the embedded 4th-order estimate.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _float_bounds(tempering: Tempering):
    """Float interval endpoints guaranteed to lie inside the exact rational
    intervals, so sampled rates pass exact containment checks."""
    lo = np.empty(len(tempering))
    hi = np.empty(len(tempering))
    for i, (l, h) in enumerate(tempering.intervals):
        lf, hf = float(l), float(h)
        if Fraction(lf) < l:
            lf = np.nextafter(lf, np.inf)
        if Fraction(hf) > h:
            hf = np.nextafter(hf, -np.inf)
        lo[i], hi[i] = lf, hf
    return lo, hi


def _sample_rates(lo, hi, rng) -> np.ndarray:
    return lo + rng.random(len(lo)) * (hi - lo)


def simulate(net: ReactionNetwork, tempering: Tempering | None, policy: RatePolicy,
             x0, t_end: float, rtol: float = 1e-8, atol: float = 1e-10,
             h_min: float = 1e-12, fixed_h: float | None = None,
             watch_box=None, max_steps: int = 5_000_000) -> Trajectory:
    """Integrate the mass-action system with rates selected by the policy.

    Embedded 5(4) pair with adaptive steps; a step is rejected when the
    error estimate exceeds one or when it would make any coordinate
    nonpositive.  When no positive step above h_min works, a
    boundary-approach event is emitted and integration stops (states are
    never clamped).  Rates are constant within each policy segment and
    logged per segment.  fixed_h disables adaptivity (error control and
    rejection are skipped, positivity still stops the run).  watch_box, if
    given as (lo, hi) arrays, logs entered-set / left-set events.

    Raises:
        ValueError: t_end <= 0, bad tolerances, nonpositive x0.
    """
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0):
        raise ValueError(f"x0 must be strictly positive, got {x0}")
    if tempering is None:
        tempering = Tempering(tuple((Fraction(1), Fraction(1)) for _ in net.reactions))
    if len(tempering) != net.n_reactions:
        raise ValueError("tempering length does not match reaction count")
    lo, hi = _float_bounds(tempering)
    rng = np.random.default_rng(np.random.SeedSequence(policy.seed))
    if policy.mode == "fixed":
        base_rates = np.asarray(policy.rates, dtype=float)
        if not tempering.contains([Fraction(float(r)) for r in base_rates]):
            raise ValueError(f"fixed rates {policy.rates} outside the tempering")
    elif policy.mode == "constant-mid":
        base_rates = tempering.midpoints()
    elif policy.mode == "constant-sampled":
        base_rates = _sample_rates(lo, hi, rng)
    else:
        base_rates = None  # resampled per segment

    if policy.mode == "piecewise-constant":
        seg_edges = list(np.arange(0.0, t_end, policy.dt)) + [t_end]
        if seg_edges[-2] >= t_end:
            seg_edges.pop(-2)
    else:
        seg_edges = [0.0, t_end]

    rhs = _rhs_factory(net)
    times = [0.0]
    states = [x0.copy()]
    rate_log = []
    events = []
    x = x0.copy()
    t = 0.0
    h = fixed_h if fixed_h is not None else min(1e-3, t_end / 10)
    steps = 0
    inside = None
    if watch_box is not None:
        blo, bhi = (np.asarray(watch_box[0], float), np.asarray(watch_box[1], float))
        inside = bool(np.all(x >= blo) and np.all(x <= bhi))
        if inside:
            events.append({"type": "entered-set", "time": 0.0})
    stopped = False
    for si in range(len(seg_edges) - 1):
        t_seg_end = seg_edges[si + 1]
        if policy.mode == "piecewise-constant":
            k = _sample_rates(lo, hi, rng)
        else:
            k = base_rates
        rate_log.append((seg_edges[si], tuple(float(v) for v in k)))
        f_now = rhs(k, x)
        if f_now is None:
            events.append({"type": "boundary-approach", "time": t})
            stopped = True
            break
        while t < t_seg_end - 1e-14 * max(1.0, t_seg_end):
            steps += 1
            if steps > max_steps:
                events.append({"type": "step-limit", "time": t})
                stopped = True
                break
            h_try = min(h, t_seg_end - t)
            K = np.empty((7, len(x)))
            K[0] = f_now
            bad = False
            err = np.inf
            positive = False
            for stage in range(1, 7):
                xs = x + h_try * (_DP_A[stage] @ K[:stage])
                fs = rhs(k, xs)
                if fs is None:
                    bad = True
                    break
                K[stage] = fs
            if not bad:
                x_new = x + h_try * (_DP_B5 @ K)
                err_vec = h_try * ((_DP_B5 - _DP_B4) @ K)
                sc = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
                err = float(np.sqrt(np.mean((err_vec / sc) ** 2)))
                positive = bool(np.all(x_new > 0) and np.all(np.isfinite(x_new)))
            if fixed_h is not None:
                if bad or not positive:
                    events.append({"type": "boundary-approach", "time": t})
                    stopped = True
                    break
                accept = True
            else:
                accept = (not bad) and positive and err <= 1.0
            if accept:
                t = t + h_try
                x = x_new
                f_now = K[6]  # FSAL: last stage is f at the accepted point
                times.append(t)
                states.append(x.copy())
                if inside is not None:
                    now_in = bool(np.all(x >= blo) and np.all(x <= bhi))
                    if now_in and not inside:
                        events.append({"type": "entered-set", "time": t})
                    elif inside and not now_in:
                        events.append({"type": "left-set", "time": t})
                    inside = now_in
                if fixed_h is None:
                    h = h_try * float(np.clip(0.9 * err ** -0.2 if err > 0 else 5.0, 0.2, 5.0))
            else:
                if bad or not positive:
                    h = h_try * 0.5
                else:
                    h = h_try * float(np.clip(0.9 * err ** -0.2, 0.2, 5.0))
                if h < h_min:
                    events.append({"type": "boundary-approach", "time": t})
                    stopped = True
                    break
        if stopped:
            break
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        rate_log=tuple(rate_log),
        events=tuple(events),
    )


def conservation_residual(traj: Trajectory, stoich: StoichiometryInfo) -> float:
    """Max over recorded times of ||A (x(t) - x(0))|| for the conservation
    rows A; identically zero when there are no conservation laws."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    A = stoich.Hperp_matrix()
    if A.shape[0] == 0:
        return 0.0
    diffs = traj.states - traj.states[0]
    return float(np.max(np.linalg.norm(diffs @ A.T, axis=1)))


def find_steady_state(net: ReactionNetwork, k, x0, tol: float = 1e-10,
                      max_iter: int = 80, seed: int = 0) -> SteadyState:
    """Positive steady state in the stoichiometric class of x0.

    Damped Newton on the reduced system B^T f(x0 + B t) = 0 (B an
    orthonormal basis of the stoichiometric subspace), restarted from x0
    plus 8 random in-class perturbations; if all starts stall, integrates
    to t = 50 and polishes from there.

    Raises:
        NoConvergence: no positive steady state found (legitimately
        possible, e.g. any network whose rhs never vanishes).
    """
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0):
        raise ValueError(f"x0 must be strictly positive, got {x0}")
    k = np.asarray(k, dtype=float)
    stoich = stoichiometric_subspace(net)
    B = _orthonormal_H(stoich)
    d = B.shape[1]
    rhs = _rhs_factory(net)
    if d == 0:
        f = rhs(k, x0)
        return SteadyState(tuple(x0), float(np.linalg.norm(f)))

    def newton(t_start):
        t = t_start.copy()
        x = x0 + B @ t
        if np.any(x <= 0):
            return None
        for _ in range(max_iter):
            f = rhs(k, x)
            if f is None:
                return None
            F = B.T @ f
            nrm = np.linalg.norm(F)
            if nrm <= tol:
                return x
            try:
                J = B.T @ _mass_action_jacobian(net, k, x) @ B
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                return None
            s = 1.0
            improved = False
            while s >= 1e-14:
                tn = t + s * step
                xn = x0 + B @ tn
                if np.all(xn > 0):
                    fn = rhs(k, xn)
                    if fn is not None and np.linalg.norm(B.T @ fn) < nrm:
                        t, x = tn, xn
                        improved = True
                        break
                s *= 0.5
            if not improved:
                return None
        return None

    rng = np.random.default_rng(seed)
    starts = [np.zeros(d)]
    for _ in range(8):
        starts.append(rng.standard_normal(d) * 0.3 * float(np.linalg.norm(x0)))
    for t_start in starts:
        x = newton(t_start)
        if x is not None:
            f = rhs(k, x)
            return SteadyState(tuple(x), float(np.linalg.norm(f)))
    # last resort: ride the flow toward an attractor, then polish
    try:
        traj = simulate(
            net, None, RatePolicy("fixed", rates=tuple(float(v) for v in k)),
            x0, t_end=50.0, rtol=1e-9, atol=1e-12,
        )
        x_end = traj.states[-1]
        if np.all(x_end > 0):
            x = newton(B.T @ (x_end - x0))
            if x is not None:
                f = rhs(k, x)
                return SteadyState(tuple(x), float(np.linalg.norm(f)))
    except ValueError:
        pass
    raise NoConvergence(f"no positive steady state found from x0 = {x0}")


def g_along(traj: Trajectory, net: ReactionNetwork, alpha=None) -> np.ndarray:
    """Per-sample free energy and its instantaneous derivative: rows
    (t, g(x(t)), <log(x/alpha), f(x(t))>), alpha defaulting to all ones."""
    n = traj.states.shape[1]
    alpha = np.ones(n) if alpha is None else np.asarray(alpha, dtype=float)
    out = np.empty((len(traj.times), 3))
    for i, (t, x) in enumerate(zip(traj.times, traj.states)):
        kk = traj.rates_at(t)
        f = mass_action_rhs(net, kk, x)
        out[i] = (t, g_alpha(x, alpha), float(grad_g_alpha(x, alpha) @ f))
    return out
