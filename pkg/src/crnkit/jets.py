"""Jet-frame diagnostics: pulls along toric rays, reaction levels
(sustaining / draining / inessential), the fundamental argmax-stabilization
check, domination monitoring for draining reactions, the worst-case
sum-of-pulls cutoff scan, and unit-jet extraction from direction sequences.

All quantities here are floating point; exact cross-checks live in the
geometry module (max_subset / super_chain on rationals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .classify import arrangement_normals
from .network import ReactionNetwork, Reaction, Tempering, stoichiometric_subspace
from .birch import _orthonormal_H


@dataclass(frozen=True)
class Frame:
    """Mutually orthogonal unit vectors w_1..w_l (checked to 1e-12)."""

    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        V = np.array(self.vectors)
        G = V @ V.T
        if np.max(np.abs(G - np.eye(len(V)))) > 1e-12:
            raise ValueError("frame vectors must be orthonormal to 1e-12")

    def __len__(self):
        return len(self.vectors)

    @property
    def w1(self) -> np.ndarray:
        return np.array(self.vectors[0])


def make_frame(*vectors) -> Frame:
    """Normalize, orthogonalize (stably), and wrap the given directions."""
    out = []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        for u in out:
            v = v - (v @ u) * u
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            raise ValueError("frame directions are linearly dependent")
        out.append(v / nrm)
    return Frame(tuple(tuple(float(x) for x in v) for v in out))


@dataclass(frozen=True)
class JetSchedule:
    """Coefficient and theta schedules for building unit jets.

    beta_kind "power" is the default hierarchy beta_j(i) = i**(-(j-1));
    "decaying" is the stress schedule beta_j(i) = exp(-(j-1) i^2) whose
    theta(i)**beta_2(i) stays bounded.  theta_kind "exp" is theta(i) = e^i;
    "slow" is theta(i) = 1 + 1/i.
    """

    beta_kind: str = "power"
    theta_kind: str = "exp"

    def __post_init__(self):
        if self.beta_kind not in ("power", "decaying"):
            raise ValueError(f"unknown beta schedule {self.beta_kind!r}")
        if self.theta_kind not in ("exp", "slow"):
            raise ValueError(f"unknown theta schedule {self.theta_kind!r}")

    def beta(self, j: int, i: float) -> float:
        if self.beta_kind == "power":
            return float(i) ** (-(j - 1))
        return math.exp(-(j - 1) * float(i) ** 2)

    def log_theta(self, i: float) -> float:
        if self.theta_kind == "exp":
            return float(i)
        return math.log1p(1.0 / float(i))

    def theta(self, i: float) -> float:
        return math.exp(self.log_theta(i))

    def coefficients(self, i: float, ell: int) -> np.ndarray:
        return np.array([self.beta(j, i) for j in range(1, ell + 1)])

    def direction(self, frame: Frame, i: float) -> np.ndarray:
        """The unit vector w(i) = normalize(sum beta_j(i) w_j)."""
        V = np.array(frame.vectors)
        v = self.coefficients(i, len(frame)) @ V
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class ReactionJetClass:
    kind: str  # "inessential" | "sustaining" | "draining"
    level: int | None


def pull(reaction: Reaction, w, theta: float) -> float:
    """<w, target - source> * theta ** <w, source>, theta > 1."""
    if theta <= 1:
        raise ValueError(f"theta must exceed 1, got {theta}")
    w = np.asarray(w, dtype=float)
    flux = np.array([float(c) for c in reaction.flux])
    src = np.array([float(c) for c in reaction.source.coeffs])
    return float((w @ flux) * theta ** (w @ src))


def _log_pull(reaction: Reaction, w, log_theta: float) -> tuple[int, float]:
    """(sign, log |pull|) so huge thetas never overflow."""
    w = np.asarray(w, dtype=float)
    flux = np.array([float(c) for c in reaction.flux])
    src = np.array([float(c) for c in reaction.source.coeffs])
    a = float(w @ flux)
    if a == 0.0:
        return 0, -np.inf
    return (1 if a > 0 else -1), math.log(abs(a)) + float(w @ src) * log_theta


def level_and_type(reaction: Reaction, frame: Frame, tol: float = 1e-10) -> ReactionJetClass:
    """Least frame level whose inner product with the reaction vector is
    nonzero decides the class: negative = sustaining, positive = draining,
    all zero = inessential."""
    flux = np.array([float(c) for c in reaction.flux])
    for j, w in enumerate(frame.vectors, start=1):
        d = float(np.asarray(w) @ flux)
        if abs(d) > tol:
            return ReactionJetClass("sustaining" if d < 0 else "draining", j)
    return ReactionJetClass("inessential", None)


def jets_fundamental_check(Q, frame: Frame, schedule: JetSchedule,
                           i_range, tie_tol: float = 1e-9) -> dict:
    """Check that the argmax of <w(i), .> over Q stabilizes to the iterated
    maximal subset along the frame.

    Returns a report with the expected index set, the per-i argmax sets,
    and stabilized_at: the first i after which the argmax stays equal to
    the expectation through the end of i_range (None if it never does).
    """
    Q = [tuple(float(x) for x in q) for q in Q]
    if not Q:
        raise ValueError("empty point set")
    V = np.array(Q)
    expected = Q
    for w in frame.vectors:
        vals = [float(np.asarray(w) @ np.array(q)) for q in expected]
        top = max(vals)
        scale = max(1.0, max(abs(v) for v in vals))
        expected = [q for q, v in zip(expected, vals) if top - v <= tie_tol * scale]
    expected_idx = {i for i, q in enumerate(Q) if q in [tuple(e) for e in expected]}
    argmax_sets = []
    i_list = list(i_range)
    for i in i_list:
        # unnormalized combination: positive scaling never moves an argmax
        v = schedule.coefficients(i, len(frame)) @ np.array(frame.vectors)
        vals = V @ v
        top = float(vals.max())
        scale = max(1.0, float(np.abs(vals).max()))
        idx = {int(j) for j in np.nonzero(top - vals <= tie_tol * scale)[0]}
        argmax_sets.append((i, idx))
    stabilized_at = None
    for pos in range(len(argmax_sets)):
        if all(s == expected_idx for _, s in argmax_sets[pos:]):
            stabilized_at = argmax_sets[pos][0]
            break
    return {
        "expected": sorted(expected_idx),
        "argmax_sets": [(i, sorted(s)) for i, s in argmax_sets],
        "stabilized_at": stabilized_at,
        "stabilized": stabilized_at is not None,
    }


def domination_monitor(net: ReactionNetwork, frame: Frame, schedule: JetSchedule,
                       i_range=None, threshold: float = 1e3) -> dict:
    """For every draining reaction, look for a sustaining reaction whose
    pull outgrows it along the jet w(i), theta(i).

    Ratios are tracked in log10; a draining reaction counts as dominated
    when its best ratio is strictly increasing over the last decade of the
    index range and ends above the threshold.  This is finite-range
    evidence, not a proof.  When w_1 is orthogonal to the stoichiometric
    subspace a warning is attached (domination can legitimately fail
    there).
    """
    if i_range is None:
        i_range = np.unique(np.rint(np.geomspace(1, 5000, 60)).astype(int))
    i_list = [float(i) for i in i_range]
    stoich = stoichiometric_subspace(net)
    B = _orthonormal_H(stoich)
    w1 = frame.w1
    proj = float(np.linalg.norm(B.T @ w1)) if B.shape[1] else 0.0
    warning = None
    if proj < 1e-9:
        warning = (
            "w1 is orthogonal to the stoichiometric subspace; "
            "pull domination may fail along this frame"
        )
    classes = [level_and_type(r, frame) for r in net.reactions]
    sustaining = [i for i, c in enumerate(classes) if c.kind == "sustaining"]
    draining = [i for i, c in enumerate(classes) if c.kind == "draining"]
    directions = [schedule.direction(frame, i) for i in i_list]
    log_thetas = [schedule.log_theta(i) for i in i_list]
    logs = np.full((net.n_reactions, len(i_list)), -np.inf)
    for r_idx, r in enumerate(net.reactions):
        for col, (w, lt) in enumerate(zip(directions, log_thetas)):
            _, lv = _log_pull(r, w, lt)
            logs[r_idx, col] = lv
    entries = []
    for d in draining:
        best = None
        for s in sustaining:
            with np.errstate(invalid="ignore"):
                series = logs[s] - logs[d]
            # both pulls underflowing to zero gives an indeterminate ratio;
            # record it as such rather than claiming growth
            series = np.where(np.isinf(logs[s]) & np.isinf(logs[d]), np.nan, series)
            key = series[-1]
            if (
                best is None
                or (np.isnan(best[1][-1]) and not np.isnan(key))
                or (not np.isnan(key) and key > best[1][-1])
            ):
                best = (s, series)
        if best is None:
            entries.append(
                {
                    "draining": d,
                    "partner": None,
                    "series": [],
                    "increasing_last_decade": False,
                    "terminal_ratio_log10": -np.inf,
                    "dominated": False,
                }
            )
            continue
        s_idx, series = best
        log10r = np.clip(series / math.log(10), -1e300, 1e300)
        i_max = i_list[-1]
        last = [c for c, i in enumerate(i_list) if i >= i_max / 10]
        increasing = all(
            log10r[last[j + 1]] > log10r[last[j]] for j in range(len(last) - 1)
        )
        terminal = float(log10r[-1])
        entries.append(
            {
                "draining": d,
                "partner": s_idx,
                "series": [[i_list[c], float(log10r[c])] for c in range(len(i_list))],
                "increasing_last_decade": bool(increasing),
                "terminal_ratio_log10": terminal,
                "dominated": bool(increasing and terminal > math.log10(threshold)),
            }
        )
    return {
        "warning": warning,
        "classes": [(c.kind, c.level) for c in classes],
        "entries": entries,
        "all_dominated": all(e["dominated"] for e in entries),
        "evidence": "finite-range",
    }


# ---------------------------------------------------------------------------
# worst-case sum of pulls


def _worst_case_margin(net: ReactionNetwork, tempering: Tempering, w) -> float:
    """Leading-order margin of the worst-case sum of pulls as theta grows:
    over the exactly computed dominant tier (sources maximizing <w, y>),
    the largest worst-case k_r <w, flux_r>.  Negative margins mean the sum
    is eventually negative along w; zero marks the transition."""
    w_exact = tuple(Fraction(float(x)) for x in w)
    sources = [r.source.coeffs for r in net.reactions]
    vals = [sum(a * b for a, b in zip(w_exact, y)) for y in sources]
    top = max(vals)
    lo, hi = tempering.lows(), tempering.highs()
    margin = -np.inf
    for r_idx, r in enumerate(net.reactions):
        if vals[r_idx] != top:
            continue
        coeff = float(np.asarray(w, dtype=float) @ net.flux_matrix()[r_idx])
        k = hi[r_idx] if coeff > 0 else lo[r_idx]
        margin = max(margin, k * coeff)
    return float(margin)


def cutoff_scan(net: ReactionNetwork, tempering: Tempering | None, x0,
                theta_grid=None, direction_samples: int = 400, seed: int = 0,
                near_zero_delta: float = 0.02, membership_band: float = 1e-3,
                cluster_gap: float = 0.1) -> dict:
    """Scan directions for a uniform cutoff theta beyond which the
    worst-case sum of pulls is negative.

    The sum S(w, theta) = sum_r k_r theta**<w, y_r> <w, flux_r> is linear
    in each k_r, so the tempering's worst case is exact at interval
    endpoints (hi where the pull coefficient is positive, lo where it is
    negative).  Directions are uniform unit samples plus every
    classification-arrangement face representative (normalized); theta
    points must put theta**w inside the invariant polyhedron of x0 (within
    a relative band; trivially satisfied when there are no conservation
    laws).

    theta_hat is the least grid theta from which on every eligible sample
    is negative.  Violations that persist into the top two decades of the
    grid mean no cutoff was found in range: theta_hat None, with the
    violating directions listed.  Near-zero direction clusters are
    detected through the leading-order margin (see _worst_case_margin)
    rather than the raw sum, which stays bounded away from zero even along
    transition directions.

    Membership of theta**w in the invariant polyhedron is trivial without
    conservation laws; with exactly one law the crossing theta is refined
    by bisection (the grid alone almost never lands on the measure-zero
    crossing); with two or more laws a relative-miss band is used, which
    under-reports eligible pairs.
    """
    if tempering is None:
        tempering = Tempering(tuple((Fraction(1), Fraction(1)) for _ in net.reactions))
    x0 = np.asarray(x0, dtype=float)
    n = net.n_species
    if theta_grid is None:
        theta_grid = np.geomspace(1.5, 1e6, 50)
    theta_grid = np.asarray(sorted(theta_grid), dtype=float)
    rng = np.random.default_rng(seed)
    dirs = []
    while len(dirs) < direction_samples:
        v = rng.standard_normal(n)
        nrm = np.linalg.norm(v)
        if nrm > 1e-12:
            dirs.append(v / nrm)
    face_reps = []
    for f in _face_representatives(net):
        v = np.array([float(x) for x in f])
        nrm = np.linalg.norm(v)
        if nrm > 0:
            face_reps.append(v / nrm)
    all_dirs = face_reps + dirs
    stoich = stoichiometric_subspace(net)
    A = stoich.Hperp_matrix()
    b = A @ x0 if A.shape[0] else np.zeros(0)
    Y = net.source_matrix()
    F = net.flux_matrix()
    lo, hi = tempering.lows(), tempering.highs()

    def sum_of_pulls(w, thetas):
        wy = Y @ w
        coeff = F @ w
        k_worst = np.where(coeff > 0, hi, lo)
        with np.errstate(over="ignore"):
            return np.asarray(thetas)[:, None] ** wy[None, :] @ (k_worst * coeff)

    # bad_theta[di] = largest theta at which the worst-case sum is >= 0 at
    # an eligible point along direction di (-inf if none)
    bad_theta = np.full(len(all_dirs), -np.inf)
    for di, w in enumerate(all_dirs):
        if A.shape[0] == 0:
            thetas = theta_grid
        elif A.shape[0] == 1:
            thetas = _ray_crossings(A[0], float(b[0]), w, theta_grid)
        else:
            with np.errstate(over="ignore"):
                Z = theta_grid[:, None] ** w[None, :]
            finite = np.all(np.isfinite(Z), axis=1)
            miss = np.full(len(theta_grid), np.inf)
            miss[finite] = np.linalg.norm(
                Z[finite] @ A.T - b, axis=1
            ) / (1 + np.linalg.norm(Z[finite], axis=1))
            thetas = theta_grid[miss <= membership_band]
        if len(thetas) == 0:
            continue
        S = sum_of_pulls(w, thetas)
        hit = np.isfinite(S) & (S >= 0)
        if np.any(hit):
            bad_theta[di] = float(np.max(np.asarray(thetas)[hit]))
    worst = float(np.max(bad_theta))
    theta_max = float(theta_grid[-1])
    violating = []
    if worst == -np.inf:
        theta_hat = float(theta_grid[0])
    elif worst >= theta_max / 100:
        theta_hat = None
        for di in np.nonzero(bad_theta >= theta_max / 100)[0]:
            violating.append([float(v) for v in all_dirs[di]])
    else:
        theta_hat = float(theta_grid[np.searchsorted(theta_grid, worst, "right")])
    margins = np.array([_worst_case_margin(net, tempering, w) for w in all_dirs])
    near = [di for di in range(len(all_dirs)) if margins[di] >= -near_zero_delta]
    clusters = _cluster_directions([all_dirs[di] for di in near],
                                   [margins[di] for di in near], cluster_gap)
    return {
        "theta_hat": theta_hat,
        "violating_directions": violating,
        "near_zero_clusters": clusters,
        "n_directions": len(all_dirs),
        "theta_grid": [float(t) for t in theta_grid],
        "margin_delta": near_zero_delta,
    }


def _ray_crossings(a, b0: float, w, theta_grid, band: float = 1e-9,
                   bisect_steps: int = 80) -> np.ndarray:
    """Thetas in [grid min, grid max] where <a, theta**w> = b0, located by
    sign-change bisection over the grid (plus grid points already on the
    hyperplane to relative tolerance band)."""
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)

    def phi(theta):
        with np.errstate(over="ignore"):
            z = theta ** w
        if not np.all(np.isfinite(z)):
            return np.inf
        return float(a @ z) - b0

    vals = np.array([phi(t) for t in theta_grid])
    crossings = []
    scale = 1.0 + abs(b0)
    for ti, v in enumerate(vals):
        if np.isfinite(v) and abs(v) <= band * scale:
            crossings.append(float(theta_grid[ti]))
    for ti in range(len(theta_grid) - 1):
        va, vb = vals[ti], vals[ti + 1]
        if not (np.isfinite(va) and np.isfinite(vb)):
            continue
        if va == 0.0 or vb == 0.0 or va * vb > 0:
            continue
        lo_t, hi_t = float(theta_grid[ti]), float(theta_grid[ti + 1])
        f_lo = va
        for _ in range(bisect_steps):
            mid = math.sqrt(lo_t * hi_t)
            f_mid = phi(mid)
            if f_mid == 0.0:
                lo_t = hi_t = mid
                break
            if (f_lo < 0) == (f_mid < 0):
                lo_t, f_lo = mid, f_mid
            else:
                hi_t = mid
        crossings.append(math.sqrt(lo_t * hi_t))
    return np.array(sorted(set(crossings)))


def _face_representatives(net: ReactionNetwork):
    from .geometry import LimitExceeded, enumerate_faces

    try:
        faces = enumerate_faces(arrangement_normals(net))
    except LimitExceeded:
        return []
    return [f.representative for f in faces]


def _cluster_directions(dirs, margins, gap: float):
    """Group unit directions by angular proximity; each cluster reports the
    member with the largest margin as its center."""
    if not dirs:
        return []
    D = np.array(dirs)
    m = len(dirs)
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(m):
        for j in range(i + 1, m):
            cosang = float(np.clip(D[i] @ D[j], -1.0, 1.0))
            if math.acos(cosang) <= gap:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        center = max(members, key=lambda i: margins[i])
        out.append(
            {
                "center": [float(v) for v in dirs[center]],
                "size": len(members),
                "max_margin": float(margins[center]),
            }
        )
    out.sort(key=lambda c: c["center"])
    return out


# ---------------------------------------------------------------------------
# unit-jet extraction


def extract_unit_jet(sequence, dim: int | None = None, zero_tol: float = 1e-9,
                     min_per_level: int = 5) -> tuple[list[int], Frame]:
    """Extract an approximate unit jet (subsequence + frame) from a finite
    sequence of unit vectors.

    Mirrors the accumulation-point recursion: take the latest direction as
    the level's limit, keep indices with a positive component along it,
    project the kept residuals onto its orthogonal complement, and recurse
    until the residuals vanish (or dim levels are found).  The surviving
    indices are then greedily thinned so every consecutive coefficient
    ratio beta_j / beta_{j+1} is strictly increasing.

    Raises:
        ValueError: fewer than min_per_level usable indices at some level.
    """
    W = [np.asarray(w, dtype=float) for w in sequence]
    if not W:
        raise ValueError("empty sequence")
    n = len(W[0])
    dim = n if dim is None else dim
    active = list(range(len(W)))
    residuals = {i: W[i].copy() for i in active}
    frame_vecs: list[np.ndarray] = []
    while len(frame_vecs) < dim:
        nonzero = [i for i in active if np.linalg.norm(residuals[i]) > zero_tol]
        if not nonzero:
            break
        anchor = residuals[nonzero[-1]]
        anchor = anchor / np.linalg.norm(anchor)
        keep = [i for i in nonzero if float(residuals[i] @ anchor) > zero_tol]
        if len(keep) < min_per_level:
            raise ValueError(
                f"only {len(keep)} usable directions at level "
                f"{len(frame_vecs) + 1}; need at least {min_per_level}"
            )
        frame_vecs.append(anchor)
        active = keep
        for i in active:
            r = residuals[i]
            residuals[i] = r - float(r @ anchor) * anchor
    if not frame_vecs:
        raise ValueError("no accumulation direction above tolerance")
    V = np.array(frame_vecs)
    betas = {i: V @ W[i] for i in active}
    ell = len(frame_vecs)
    kept: list[int] = []
    for i in active:
        b = betas[i]
        if np.any(b[:ell] <= zero_tol):
            continue
        if kept:
            prev = betas[kept[-1]]
            ratios_ok = all(
                b[j] / b[j + 1] > prev[j] / prev[j + 1] for j in range(ell - 1)
            )
            if not ratios_ok:
                continue
        kept.append(i)
    if len(kept) < min_per_level:
        raise ValueError(
            f"only {len(kept)} indices survive the ratio monotonicity thinning; "
            f"need at least {min_per_level}"
        )
    return kept, make_frame(*frame_vecs)
