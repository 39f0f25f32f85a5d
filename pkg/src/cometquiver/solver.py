"""Damped least-squares solver for the hyperpolygon equations and rank-based
dimension counts at its solutions."""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._linalg import numerical_rank
from .errors import FewArms, InvalidLevel, LengthMismatch, NotConverged
from .moment import ResidualReport, hyperpolygon_blocks, blocks_to_vector, hyperpolygon_residual
from .quiver import CometQuiver, dim_hyperpolygon_space
from .rep import Representation, gauge_orbit_tangent_basis, layout, random_representation, to_flat

log = logging.getLogger(__name__)

THREADS_ENV = "COMETQUIVER_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class SolveOptions:
    max_iterations: int = 500
    tolerance: float = 1e-11
    starts: int = 8
    seed: int = 0
    initial_damping: float = 1e-3
    min_damping: float = 1e-15
    max_damping: float = 1e12
    scale: float | None = None
    workers: int | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1 or self.starts < 1:
            raise ValueError("iteration and start counts must be at least 1")
        if self.initial_damping <= 0:
            raise ValueError("initial damping must be positive")


@dataclass
class SolveResult:
    representation: Representation
    report: ResidualReport
    alpha: np.ndarray
    converged: bool
    start: int
    iterations: int
    start_residuals: list = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.report.aggregate


class _Problem:
    """Residual and exact Jacobian on the free complex coordinates."""

    def __init__(self, q: CometQuiver, alpha: np.ndarray, polygon: bool):
        self.q = q
        self.alpha = alpha
        self.lay = layout(q)
        mask = ~self.lay.y_mask() if polygon else np.ones(self.lay.complex_dim, dtype=bool)
        self.free = np.flatnonzero(mask)
        self.n = 2 * self.free.size

    def full(self, u: np.ndarray) -> np.ndarray:
        u = np.ascontiguousarray(u)
        z = np.zeros(u.shape[:-1] + (self.lay.complex_dim,), dtype=complex)
        z[..., self.free] = u.view(complex)
        return z

    def residual(self, u: np.ndarray) -> np.ndarray:
        rep = self.lay.unpack(self.full(u))
        return blocks_to_vector(hyperpolygon_blocks(self.q, rep, self.alpha))

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        # the residual is quadratic, so a unit central difference is exact
        eye = np.eye(self.n)
        batch = np.concatenate([u + eye, u - eye])
        f = self.residual(batch)
        return ((f[: self.n] - f[self.n:]) / 2.0).T


def _levenberg_marquardt(prob: _Problem, u0: np.ndarray, opts: SolveOptions):
    u = u0.copy()
    f = prob.residual(u)
    cost = float(f @ f)
    if prob.n == 0:
        return u, math.sqrt(cost), 0
    jac = prob.jacobian(u)
    smax = np.linalg.norm(jac, 2) if jac.size else 0.0
    lam = opts.initial_damping * max(smax**2, 1e-300)
    nu = 2.0
    target = (opts.tolerance * 1e-3) ** 2
    stalls = 0
    it = 0
    usv = np.linalg.svd(jac, full_matrices=False)
    for it in range(1, opts.max_iterations + 1):
        if cost <= target:
            break
        left, s, vh = usv
        proj = left.T @ f
        step = -(vh.T @ (s / (s**2 + lam) * proj))
        u_new = u + step
        f_new = prob.residual(u_new)
        cost_new = float(f_new @ f_new)
        # predicted decrease of the linear model
        pred = float(np.sum((s**2 / (s**2 + lam)) * proj**2 * (2.0 - s**2 / (s**2 + lam))))
        if cost_new < cost:
            rho = (cost - cost_new) / pred if pred > 0 else 1.0
            small = cost - cost_new <= 1e-15 * cost
            u, f, cost = u_new, f_new, cost_new
            lam = max(lam * max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3), opts.min_damping * smax**2)
            nu = 2.0
            jac = prob.jacobian(u)
            usv = np.linalg.svd(jac, full_matrices=False)
            stalls = stalls + 1 if small else 0
        else:
            lam *= nu
            nu *= 2.0
            stalls += 1
        if lam > opts.max_damping * max(smax**2, 1.0) or stalls > 8:
            break
    return u, math.sqrt(cost), it


def _check_level(q: CometQuiver, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.size != q.n:
        raise LengthMismatch(f"alpha has {alpha.size} entries, quiver has {q.n} arms")
    if np.any(alpha <= 0):
        raise InvalidLevel("alpha entries must be positive")
    if q.g == 0 and q.n and all(a.is_minimal for a in q.arms) and q.n < q.r + 1:
        warnings.warn(
            f"minimal genus-0 comet with n={q.n} < r+1={q.r + 1} arms", FewArms, stacklevel=3
        )
    return alpha


def _run(q: CometQuiver, alpha, opts: SolveOptions, polygon: bool) -> SolveResult:
    opts = opts or SolveOptions()
    alpha = _check_level(q, alpha)
    prob = _Problem(q, alpha, polygon)
    scale = opts.scale if opts.scale is not None else (math.sqrt(float(np.mean(alpha))) if q.n else 1.0)
    children = np.random.SeedSequence(opts.seed).spawn(opts.starts)

    def one(idx):
        rep0 = random_representation(q, np.random.default_rng(children[idx]), scale)
        z0 = layout(q).pack(rep0)
        u0 = np.ascontiguousarray(z0[prob.free]).view(float).copy()
        u, res, its = _levenberg_marquardt(prob, u0, opts)
        return idx, u, res, its

    workers = opts.workers or default_workers()
    if workers > 1 and opts.starts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, range(opts.starts)))
    else:
        runs = [one(i) for i in range(opts.starts)]
    runs.sort(key=lambda t: (t[2], t[0]))
    idx, u, res, its = runs[0]
    rep = layout(q).unpack(prob.full(u))
    report = hyperpolygon_residual(q, rep, alpha)
    converged = report.aggregate < opts.tolerance
    log.debug("best start %d: residual %.3e after %d iterations", idx, report.aggregate, its)
    result = SolveResult(
        representation=rep,
        report=report,
        alpha=alpha,
        converged=converged,
        start=idx,
        iterations=its,
        start_residuals=[r for _, _, r, _ in sorted(runs)],
    )
    return result


def solve(q: CometQuiver, alpha, opts: SolveOptions | None = None, strict: bool = True) -> SolveResult:
    """Find (x, y, a, b) solving all six hyperpolygon equations at level ``alpha``."""
    result = _run(q, alpha, opts or SolveOptions(), polygon=False)
    if strict and not result.converged:
        raise NotConverged(f"no start reached tolerance (best {result.residual:.3e})", result)
    return result


def solve_polygon(q: CometQuiver, alpha, opts: SolveOptions | None = None, strict: bool = True) -> SolveResult:
    """Solve with y = b = 0 held fixed (points of the polygon locus)."""
    result = _run(q, alpha, opts or SolveOptions(), polygon=True)
    if strict and not result.converged:
        raise NotConverged(f"polygon did not close (best {result.residual:.3e})", result)
    return result


# ---------------------------------------------------------------------------
# dimension counts


@dataclass
class DimensionReport:
    ambient_real_dim: int
    constraint_rank: int
    level_set_real_dim: int
    gauge_orbit_real_dim: int
    quotient_real_dim: int
    quotient_complex_dim: float
    predicted_complex_dim: int
    constraint_gap: float
    gauge_gap: float
    singular: bool
    stabilizer_dim: int = 0

    @property
    def gap(self) -> float:
        return min(self.constraint_gap, self.gauge_gap)

    @property
    def matches_prediction(self) -> bool:
        return not self.singular and self.quotient_complex_dim == self.predicted_complex_dim

    def to_dict(self) -> dict:
        return {
            "ambient_real_dim": self.ambient_real_dim,
            "constraint_rank": self.constraint_rank,
            "level_set_real_dim": self.level_set_real_dim,
            "gauge_orbit_real_dim": self.gauge_orbit_real_dim,
            "quotient_real_dim": self.quotient_real_dim,
            "quotient_complex_dim": self.quotient_complex_dim,
            "predicted_complex_dim": self.predicted_complex_dim,
            "constraint_gap": _finite(self.constraint_gap),
            "gauge_gap": _finite(self.gauge_gap),
            "gap": _finite(self.gap),
            "singular": self.singular,
            "stabilizer_dim": self.stabilizer_dim,
        }


def _finite(v: float):
    return v if math.isfinite(v) else None


REGULAR_GAP = 1e3


def constraint_jacobian(q: CometQuiver, rep: Representation, alpha) -> np.ndarray:
    """Real Jacobian of the flattened hyperpolygon residual at ``rep``."""
    prob = _Problem(q, np.asarray(alpha, dtype=float), polygon=False)
    return prob.jacobian(to_flat(rep))


def dimension_report(q: CometQuiver, rep: Representation, alpha) -> DimensionReport:
    jac = constraint_jacobian(q, rep, alpha)
    ambient = jac.shape[1]
    c_rank, c_gap, _ = numerical_rank(jac)
    orbit = gauge_orbit_tangent_basis(q, rep)
    g_rank, g_gap, _ = numerical_rank(orbit) if orbit.size else (0, float("inf"), None)
    level = ambient - c_rank
    quotient = level - g_rank
    cdim = quotient // 2 if quotient % 2 == 0 else quotient / 2
    # a rank drop of the orbit map means a nontrivial infinitesimal stabilizer
    stabilizer = orbit.shape[0] - g_rank
    singular = min(c_gap, g_gap) < REGULAR_GAP or stabilizer > 0
    return DimensionReport(
        ambient_real_dim=ambient,
        constraint_rank=c_rank,
        level_set_real_dim=level,
        gauge_orbit_real_dim=g_rank,
        quotient_real_dim=quotient,
        quotient_complex_dim=cdim,
        predicted_complex_dim=dim_hyperpolygon_space(q, warn=False),
        constraint_gap=c_gap,
        gauge_gap=g_gap,
        singular=singular,
        stabilizer_dim=stabilizer,
    )
