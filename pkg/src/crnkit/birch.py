"""Pseudo-Helmholtz free energy, Birch points by strictly convex
minimization over an affine slice of the positive orthant, and empirical
verifiers for the behaviour of toric rays near the conservation subspace.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .network import StoichiometryInfo


class NoConvergence(Exception):
    """Iteration budget exhausted; carries the last iterate and residual."""

    def __init__(self, message: str, last=None, residual: float | None = None):
        super().__init__(message)
        self.last = last
        self.residual = residual


@dataclass(frozen=True)
class ToricRay:
    """The curve theta -> base * theta**direction (componentwise), theta >= 1;
    theta = 1 gives the base point."""

    base: tuple[float, ...]
    direction: tuple[float, ...]

    def point(self, theta: float) -> np.ndarray:
        if theta < 1:
            raise ValueError(f"theta must be >= 1, got {theta}")
        return np.array(self.base) * theta ** np.array(self.direction)


@dataclass(frozen=True)
class BirchSolution:
    point: tuple[float, ...]
    residual: float
    iterations: int


def g_alpha(x, alpha) -> float:
    """Sum of x_i log(x_i / alpha_i) - x_i with 0 log 0 = 0.

    Continuous up to the boundary of the nonnegative orthant.

    Raises:
        ValueError: alpha not strictly positive, or x negative.
    """
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    if np.any(x < 0):
        raise ValueError(f"x must be nonnegative, got {x}")
    pos = x > 0
    out = -x.sum()
    out += float(np.sum(x[pos] * np.log(x[pos] / alpha[pos])))
    return out


def grad_g_alpha(x, alpha) -> np.ndarray:
    """Componentwise log(x / alpha); requires x strictly positive."""
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    if np.any(x <= 0):
        raise ValueError(f"gradient needs x > 0, got {x}")
    return np.log(x / alpha)


def _orthonormal_H(stoich: StoichiometryInfo) -> np.ndarray:
    """n x d matrix with orthonormal columns spanning H (d may be 0)."""
    k = len(stoich.H_basis)
    n = len(stoich.Hperp_basis[0]) if stoich.Hperp_basis else (
        len(stoich.H_basis[0]) if k else 0
    )
    if k == 0:
        return np.zeros((n, 0))
    M = stoich.H_matrix().T  # n x k
    Q, _ = np.linalg.qr(M)
    return Q[:, :k]


def birch_point(stoich: StoichiometryInfo, x0, alpha, tol: float = 1e-12,
                start_t=None, max_iter: int = 200) -> BirchSolution:
    """The unique point of (x0 + H) in the open orthant where log(x/alpha)
    is orthogonal to H.

    Found by minimizing the strictly convex g_alpha over {x0 + Bt > 0} with
    damped Newton steps (Armijo backtracking, halving against the
    boundary); after three consecutive rejected Newton directions the step
    falls back to steepest descent.  The residual reported is
    max(||P_H log(x/alpha)||, ||A (x - x0)||) with A the conservation rows.

    Degenerate subspaces short-circuit: with H^perp = {0} the answer is
    alpha itself, with H = {0} it is x0.

    Raises:
        NoConvergence: iteration cap exceeded (carries last iterate).
        ValueError: nonpositive x0/alpha or bad tolerance.
    """
    x0 = np.asarray(x0, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(x0 <= 0) or np.any(alpha <= 0):
        raise ValueError("x0 and alpha must be strictly positive")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    A = stoich.Hperp_matrix()
    B = _orthonormal_H(stoich)
    d = B.shape[1]

    def residual_of(x):
        r1 = np.linalg.norm(B.T @ np.log(x / alpha)) if d else 0.0
        r2 = np.linalg.norm(A @ (x - x0)) if A.shape[0] else 0.0
        return max(r1, r2)

    if d == 0:
        return BirchSolution(tuple(x0), residual_of(x0), 0)
    if A.shape[0] == 0:
        return BirchSolution(tuple(alpha), residual_of(alpha), 0)

    t = np.zeros(d) if start_t is None else np.asarray(start_t, dtype=float)
    x = x0 + B @ t
    if np.any(x <= 0):
        raise ValueError("starting point must be strictly positive")
    failed_newton = 0
    for it in range(1, max_iter + 1):
        g = B.T @ np.log(x / alpha)
        if residual_of(x) <= tol:
            return BirchSolution(tuple(x), residual_of(x), it - 1)
        H = B.T @ (B / x[:, None])
        use_newton = failed_newton < 3
        if use_newton:
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                step = -g
                use_newton = False
        else:
            step = -g
        dx = B @ step
        s = 1.0
        while np.any(x + s * dx <= 0):
            s *= 0.5
            if s < 1e-18:
                break
        f0 = g_alpha(x, alpha)
        slope = float(g @ step)
        accepted = False
        while s >= 1e-18:
            xn = x + s * dx
            if np.all(xn > 0) and g_alpha(xn, alpha) <= f0 + 1e-4 * s * slope:
                accepted = True
                break
            s *= 0.5
        if accepted:
            t = t + s * step
            x = x0 + B @ t
            failed_newton = 0 if use_newton else failed_newton
        else:
            failed_newton += 1
            if failed_newton > 6:
                break
    if residual_of(x) <= tol:
        return BirchSolution(tuple(x), residual_of(x), max_iter)
    raise NoConvergence(
        f"no convergence to {tol} within {max_iter} iterations",
        last=tuple(x),
        residual=residual_of(x),
    )


# ---------------------------------------------------------------------------
# empirical verifiers


def _project_onto_polyhedron(z, A, b, max_active: int | None = None):
    """Euclidean projection onto {x >= 0, A x = b} by enumerating active
    (zeroed) coordinate sets; returns (point, distance).  Exponential in the
    dimension, meant for small systems."""
    z = np.asarray(z, dtype=float)
    n = len(z)
    best = None
    idx = list(range(n))
    for k in range(n + 1):
        for zeros in itertools.combinations(idx, k):
            free = [i for i in idx if i not in zeros]
            if not free:
                x = np.zeros(n)
                if A.shape[0] and np.linalg.norm(A @ x - b) > 1e-9:
                    continue
                cand = x
            else:
                Af = A[:, free] if A.shape[0] else np.zeros((0, len(free)))
                # minimize ||xf - zf||^2 subject to Af xf = b
                m = Af.shape[0]
                KKT = np.block(
                    [[np.eye(len(free)), Af.T], [Af, np.zeros((m, m))]]
                )
                rhs = np.concatenate([z[free], b])
                try:
                    sol = np.linalg.lstsq(KKT, rhs, rcond=None)[0]
                except np.linalg.LinAlgError:
                    continue
                xf = sol[: len(free)]
                if np.any(xf < -1e-9):
                    continue
                if m and np.linalg.norm(Af @ xf - b) > 1e-7 * (1 + np.linalg.norm(b)):
                    continue
                cand = np.zeros(n)
                cand[free] = np.maximum(xf, 0.0)
            dist = float(np.linalg.norm(cand - z))
            if best is None or dist < best[1]:
                best = (cand, dist)
        if best is not None and k >= 1:
            # deeper active sets cannot improve once we have an interior hit
            if best[1] == 0.0:
                break
    return best


def _unit(v):
    nrm = np.linalg.norm(v)
    return v / nrm if nrm > 0 else v


def _direction_samples(stoich: StoichiometryInfo, n: int, count: int, rng):
    """Unit directions in and near H^perp (plus a few generic ones)."""
    B = _orthonormal_H(stoich)
    Aperp = stoich.Hperp_matrix()
    if Aperp.shape[0]:
        Qperp, _ = np.linalg.qr(Aperp.T)
        Qperp = Qperp[:, : Aperp.shape[0]]
    else:
        Qperp = np.zeros((n, 0))
    out = []
    eps_grid = [0.0, 1e-3, 1e-2, 1e-1, 0.3, 1.0]
    while len(out) < count:
        if Qperp.shape[1]:
            u = Qperp @ rng.standard_normal(Qperp.shape[1])
            u = _unit(u)
            v = B @ rng.standard_normal(B.shape[1]) if B.shape[1] else np.zeros(n)
            v = _unit(v)
            eps = eps_grid[len(out) % len(eps_grid)]
            w = _unit(u + eps * v)
        else:
            w = _unit(rng.standard_normal(n))
        if np.linalg.norm(w) > 0:
            out.append(w)
    return out


def verify_birch_boundary(stoich: StoichiometryInfo, x0, alpha,
                          samples: int = 100, theta_max: float = 1e6,
                          o_radius: float = 0.5, seed: int = 0,
                          tol: float = 1e-10) -> dict:
    """Empirically check that toric rays from alpha in directions near
    H^perp stay away from the invariant polyhedron outside a ball O around
    the Birch point.

    For sampled (w, theta) the reported quantity is a valid lower bound on
    the distance from alpha * theta**w to P minus O: the larger of the
    distance to P and the distance to the complement of O.

    Returns:
        dict with min_distance, per_direction list, violations (samples
        landing in P outside O), and the Birch point used; verdict is
        "empirical" by construction.
    """
    x0 = np.asarray(x0, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    n = len(x0)
    xhat = np.array(birch_point(stoich, x0, alpha, tol=tol).point)
    A = stoich.Hperp_matrix()
    b = A @ x0 if A.shape[0] else np.zeros(0)
    rng = np.random.default_rng(seed)
    thetas = np.geomspace(1.0, theta_max, 40)
    per_direction = []
    violations = []
    for w in _direction_samples(stoich, n, max(1, samples), rng):
        dmin = np.inf
        for theta in thetas:
            z = alpha * theta ** w
            if not np.all(np.isfinite(z)):
                continue
            proj = _project_onto_polyhedron(z, A, b)
            dist_P = proj[1] if proj else np.inf
            dist_notO = max(0.0, o_radius - float(np.linalg.norm(z - xhat)))
            bound = max(dist_P, dist_notO)
            if bound == 0.0:
                violations.append({"w": [float(v) for v in w], "theta": float(theta)})
            dmin = min(dmin, bound)
        per_direction.append(
            {"w": [float(v) for v in w], "min_bound": float(dmin)}
        )
    return {
        "birch_point": [float(v) for v in xhat],
        "o_radius": o_radius,
        "min_distance": float(min(p["min_bound"] for p in per_direction)),
        "per_direction": per_direction,
        "violations": violations,
        "verdict": "empirical",
    }


def estimate_mu(stoich: StoichiometryInfo, x0, alpha, o_radius: float,
                samples: int = 400, theta_max: float = 1e6,
                seed: int = 0, membership_band: float = 1e-3) -> float:
    """Lower-bound estimate of the uniform projection bound: the minimum of
    ||P_H w|| over sampled unit directions whose toric ray from alpha meets
    the invariant polyhedron outside the ball O of the given radius around
    the Birch point.

    Directions in H^perp never qualify (their rays meet P only at the Birch
    point, inside O), so they are excluded automatically.  The estimate is
    monotone nonincreasing in the sample count for a fixed seed and
    monotone nondecreasing in o_radius for fixed samples.
    """
    x0 = np.asarray(x0, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    n = len(x0)
    xhat = np.array(birch_point(stoich, x0, alpha).point)
    A = stoich.Hperp_matrix()
    b = A @ x0 if A.shape[0] else np.zeros(0)
    B = _orthonormal_H(stoich)
    rng = np.random.default_rng(seed)
    thetas = np.geomspace(1.0, theta_max, 200)
    mu = np.inf
    for w in _direction_samples(stoich, n, samples, rng):
        Z = alpha[None, :] * thetas[:, None] ** w[None, :]
        finite = np.all(np.isfinite(Z), axis=1)
        Z = Z[finite]
        if not len(Z):
            continue
        miss = (
            np.linalg.norm(Z @ A.T - b, axis=1) / (1 + np.linalg.norm(Z, axis=1))
            if A.shape[0]
            else np.zeros(len(Z))
        )
        ok = (miss <= membership_band) & np.all(Z >= -1e-9, axis=1)
        ok &= np.linalg.norm(Z - xhat, axis=1) >= o_radius
        if np.any(ok):
            mu = min(mu, float(np.linalg.norm(B.T @ w)) if B.shape[1] else 0.0)
    return float(mu)
