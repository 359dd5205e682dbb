"""Dual solver for granular-ball epsilon-SVR.

The dual maximizes

    -1/2 ||A||^2 - 1/2 B^2 + ||A|| B + beta.y_hat - eps * sum(alpha + alpha*)

over 0 <= alpha, alpha* <= C with sum(beta) = 0, where beta = alpha - alpha*,
||A||^2 = beta' G beta (G the kernel matrix over ball centers) and
B = beta.r. Because ||A|| is a norm the objective is not quadratic, so it is
maximized by projected gradient ascent with a monotone backtracking search
(optionally accelerated, see ``solve_dual``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .data import NumericalError

NORM_FLOOR = 1e-12
STEP_RULES = ("accel", "bb", "fixed")


@dataclass(frozen=True)
class DualProblem:
    gram: np.ndarray
    radii: np.ndarray
    y_hat: np.ndarray
    epsilon: float
    C: float

    def __post_init__(self):
        G = np.asarray(self.gram, dtype=float)
        r = np.asarray(self.radii, dtype=float).ravel()
        y = np.asarray(self.y_hat, dtype=float).ravel()
        n = y.size
        if G.shape != (n, n) or r.size != n:
            raise ValueError(f"dimension mismatch: gram {G.shape}, radii {r.size}, y_hat {n}")
        if self.epsilon < 0 or not self.C > 0:
            raise ValueError("need epsilon >= 0 and C > 0")
        if np.any(r < 0):
            raise ValueError("radii must be nonnegative")
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "y_hat", y)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "C", float(self.C))

    @property
    def n(self) -> int:
        return self.y_hat.size


@dataclass
class DualSolution:
    alpha: np.ndarray
    alpha_star: np.ndarray
    objective: float = float("nan")
    kkt_residual: float = float("nan")
    iterations: int = 0
    converged: bool = False
    trace: list | None = field(default=None, repr=False)

    @property
    def beta(self) -> np.ndarray:
        return self.alpha - self.alpha_star


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 10000
    tol: float = 1e-6
    step_rule: str = "accel"  # "accel" (monotone FISTA), "bb" (spectral trial step) or "fixed"
    trace: bool = False

    def __post_init__(self):
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.max_iter < 0 or not self.tol > 0:
            raise ValueError("need max_iter >= 0 and tol > 0")


@dataclass(frozen=True)
class WeightRepr:
    beta: np.ndarray
    norm_A: float
    B: float
    norm_w: float
    bias: float
    clamped: bool = False

    @property
    def scale(self) -> float:
        """Factor ||w|| / ||A|| mapping sum(beta_i k(c_i, x)) to w.phi(x)."""
        return self.norm_w / self.norm_A if self.norm_A >= NORM_FLOOR else 0.0


def _check(p: DualProblem, alpha, alpha_star):
    alpha = np.asarray(alpha, dtype=float)
    alpha_star = np.asarray(alpha_star, dtype=float)
    if alpha.shape != (p.n,) or alpha_star.shape != (p.n,):
        raise ValueError(f"dual vectors must have length {p.n}")
    return alpha, alpha_star


def _value(p: DualProblem, beta, total, Gb):
    norm_A = math.sqrt(max(0.0, float(beta @ Gb)))
    B = float(beta @ p.radii)
    gap = norm_A - B
    return -0.5 * gap * gap + float(beta @ p.y_hat) - p.epsilon * total


def objective_forms(p: DualProblem, alpha, alpha_star) -> tuple[float, float]:
    """(expanded, completed-square) forms of the dual objective."""
    alpha, alpha_star = _check(p, alpha, alpha_star)
    beta = alpha - alpha_star
    norm_A = math.sqrt(max(0.0, float(beta @ p.gram @ beta)))
    B = float(beta @ p.radii)
    lin = float(beta @ p.y_hat) - p.epsilon * float(alpha.sum() + alpha_star.sum())
    expanded = -0.5 * norm_A ** 2 - 0.5 * B ** 2 + norm_A * B + lin
    square = -0.5 * (norm_A - B) ** 2 + lin
    return expanded, square


def dual_objective(p: DualProblem, s: DualSolution) -> float:
    expanded, square = objective_forms(p, s.alpha, s.alpha_star)
    scale = max(1.0, abs(expanded), abs(square))
    if abs(expanded - square) > 1e-10 * scale:
        raise NumericalError(f"objective forms disagree: {expanded} vs {square}")
    return expanded


def _gradient(p: DualProblem, beta, Gb):
    norm_A = math.sqrt(max(0.0, float(beta @ Gb)))
    gap = norm_A - float(beta @ p.radii)
    # subgradient 0 for the Gb/||A|| term at the nonsmooth point ||A|| = 0
    dir_A = Gb / norm_A if norm_A >= NORM_FLOOR else 0.0
    core = -gap * (dir_A - p.radii)
    return core + p.y_hat - p.epsilon, -core - p.y_hat - p.epsilon


def dual_gradient(p: DualProblem, s: DualSolution) -> tuple[np.ndarray, np.ndarray]:
    alpha, alpha_star = _check(p, s.alpha, s.alpha_star)
    beta = alpha - alpha_star
    return _gradient(p, beta, p.gram @ beta)


def project_feasible(alpha, alpha_star, C: float) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean projection onto the box [0, C] intersected with sum(alpha - alpha*) = 0."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    s = np.atleast_1d(np.asarray(alpha_star, dtype=float))
    return _backend.project_box_hyperplane(a, s, float(C))


def _pg_norm(a, s, ga, gs, C):
    pa, ps = _backend.project_box_hyperplane(a + ga, s + gs, C)
    return math.sqrt(float(((pa - a) ** 2).sum() + ((ps - s) ** 2).sum()))


def solve_dual(p: DualProblem, cfg: SolverConfig = SolverConfig(), start: DualSolution | None = None) -> DualSolution:
    """Projected gradient ascent from the origin (or ``start``).

    Every rule starts from the step 1 / (trace(G)/n + 1), projects each trial
    point onto the feasible set and halves the step until the objective does
    not drop, so the accepted objective values never decrease. Stops when the
    projected-gradient norm ||P(x + g) - x|| reaches ``tol``.

    * ``"fixed"``: always retry the base step.
    * ``"bb"``: Barzilai-Borwein trial step from the previous move.
    * ``"accel"``: monotone FISTA. Steps are taken from an extrapolated point;
      the curvature estimate doubles until the quadratic lower model holds and
      relaxes by 10% afterwards. The iterate only moves when the objective
      improves, otherwise momentum restarts. The RBF Gram over ball centers is close to
      low rank, so the objective is almost linear along many directions and
      momentum makes a large difference there.

    All rules also stop, with ``converged=False``, once no projected step from
    the current point raises the objective at double precision.

    ``trace`` records (objective, projected-gradient norm) per iteration.
    """
    n = p.n
    if not (np.isfinite(p.gram).all() and np.isfinite(p.y_hat).all() and np.isfinite(p.radii).all()):
        raise NumericalError("non-finite Gram matrix or ball statistics")
    if start is None:
        a = np.zeros(n)
        s = np.zeros(n)
    else:
        a, s = project_feasible(start.alpha, start.alpha_star, p.C)
    if cfg.step_rule == "accel":
        return _solve_accel(p, cfg, a, s)
    return _solve_plain(p, cfg, a, s)


def _solve_plain(p: DualProblem, cfg: SolverConfig, a, s) -> DualSolution:
    n = p.n
    C = p.C
    base_step = 1.0 / (float(np.trace(p.gram)) / n + 1.0)
    beta = a - s
    Gb = p.gram @ beta
    f = _value(p, beta, float(a.sum() + s.sum()), Gb)
    if not math.isfinite(f):
        raise NumericalError("non-finite dual objective at start")
    ga, gs = _gradient(p, beta, Gb)
    pg = _pg_norm(a, s, ga, gs, C)
    trace = [(f, pg)] if cfg.trace else None
    step = base_step
    it = 0
    converged = False
    while it < cfg.max_iter:
        if pg <= cfg.tol:
            converged = True
            break
        t = step
        accepted = False
        while t > 1e-16 * base_step:
            na, ns = _backend.project_box_hyperplane(a + t * ga, s + t * gs, C)
            nbeta = na - ns
            nGb = p.gram @ nbeta
            nf = _value(p, nbeta, float(na.sum() + ns.sum()), nGb)
            if not math.isfinite(nf):
                raise NumericalError("non-finite dual objective")
            if nf >= f:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break  # no ascent possible at floating-point resolution
        nga, ngs = _gradient(p, nbeta, nGb)
        if cfg.step_rule == "bb":
            dx = np.concatenate([na - a, ns - s])
            dg = np.concatenate([nga - ga, ngs - gs])
            curv = -float(dx @ dg)
            step = float(dx @ dx) / curv if curv > 1e-300 else base_step * 1e3
            step = min(max(step, 1e-10 * base_step), 1e10 * base_step)
        else:
            step = base_step
        a, s, beta, Gb, f, ga, gs = na, ns, nbeta, nGb, nf, nga, ngs
        it += 1
        pg = _pg_norm(a, s, ga, gs, C)
        if trace is not None:
            trace.append((f, pg))
    else:
        converged = pg <= cfg.tol
    return DualSolution(alpha=a, alpha_star=s, objective=f, kkt_residual=pg,
                        iterations=it, converged=converged, trace=trace)


def _solve_accel(p: DualProblem, cfg: SolverConfig, a, s) -> DualSolution:
    lip = float(np.trace(p.gram)) / p.n + 1.0  # inverse of the initial step
    try:
        a, s, f, pg, it, trace = _backend.accel_ascent(
            p.gram, p.radii, p.y_hat, p.epsilon, p.C, lip, a, s, int(cfg.max_iter), float(cfg.tol), cfg.trace)
    except ArithmeticError as exc:
        raise NumericalError(str(exc)) from None
    return DualSolution(alpha=np.asarray(a), alpha_star=np.asarray(s), objective=f, kkt_residual=pg,
                        iterations=it, converged=pg <= cfg.tol, trace=trace)


def oracle_grid_solve(p: DualProblem, grid_steps: int = 200, refine_steps: int = 41) -> DualSolution:
    """Exhaustive grid search (tests only; n <= 3).

    The grid runs over alpha_1..alpha_n and alpha*_1..alpha*_{n-1}; alpha*_n
    is then fixed by the equality constraint and the point kept only if it
    lands inside [0, C]. One refinement pass searches a finer grid spanning
    one coarse cell around the best point.
    """
    n = p.n
    if n > 3:
        raise ValueError("oracle_grid_solve supports n <= 3")
    C = p.C
    coarse = np.linspace(0.0, C, grid_steps + 1)
    best = _grid_best(p, [coarse] * (2 * n - 1))
    h = C / grid_steps
    axes = [np.linspace(max(0.0, v - h), min(C, v + h), refine_steps) for v in best[1]]
    refined = _grid_best(p, axes)
    f, free = max(best, refined, key=lambda b: b[0])
    a = np.array(free[:n])
    s = np.array(list(free[n:]) + [a.sum() - sum(free[n:])])
    return DualSolution(alpha=a, alpha_star=s, objective=f, kkt_residual=float("nan"),
                        iterations=0, converged=True)


def _grid_best(p: DualProblem, axes):
    n = p.n
    G, r, y, eps, C = p.gram, p.radii, p.y_hat, p.epsilon, p.C
    best_f = -np.inf
    best_x = None
    # chunk over the first axis to bound memory
    for v0 in axes[0]:
        mesh = np.meshgrid(*axes[1:], indexing="ij") if len(axes) > 1 else []
        cols = [np.full(mesh[0].shape if mesh else (1,), v0)] + [m_ for m_ in mesh]
        cols = [c.ravel() for c in cols]
        alpha = cols[:n]
        astar = cols[n:]
        last = sum(alpha) - (sum(astar) if astar else 0.0)
        astar = astar + [last]
        ok = (last >= -1e-12) & (last <= C + 1e-12)
        if not np.any(ok):
            continue
        alpha = [c[ok] for c in alpha]
        astar = [np.clip(c[ok], 0.0, C) for c in astar]
        beta = [alpha[i] - astar[i] for i in range(n)]
        quad = sum(G[i, j] * beta[i] * beta[j] for i in range(n) for j in range(n))
        norm_A = np.sqrt(np.maximum(quad, 0.0))
        B = sum(r[i] * beta[i] for i in range(n))
        f = (-0.5 * (norm_A - B) ** 2 + sum(y[i] * beta[i] for i in range(n))
             - eps * sum(alpha[i] + astar[i] for i in range(n)))
        k = int(np.argmax(f))
        if f[k] > best_f:
            best_f = float(f[k])
            best_x = [float(alpha[i][k]) for i in range(n)] + [float(astar[i][k]) for i in range(n - 1)]
    return best_f, best_x


def recover_weights(p: DualProblem, s: DualSolution, free_tol: float = 1e-8) -> WeightRepr:
    """Weight norm and bias from a dual solution.

    ||w|| = max(0, ||A|| - B). The bias averages the active tube constraints
    over free multipliers; without any, it is the midpoint of the interval the
    KKT inequalities allow.
    """
    beta = s.alpha - s.alpha_star
    Gb = p.gram @ beta
    norm_A = math.sqrt(max(0.0, float(beta @ Gb)))
    B = float(beta @ p.radii)
    clamped = norm_A - B < 0
    norm_w = max(0.0, norm_A - B)
    scale = norm_w / norm_A if norm_A >= NORM_FLOOR else 0.0
    # g_i = y_hat_i + ||w|| r_i - w.c_i ; upper constraint active => b = g_i - eps
    g = p.y_hat + norm_w * p.radii - scale * Gb
    eps, C = p.epsilon, p.C
    lo_tol, hi_tol = free_tol * C, C * (1.0 - free_tol)
    free_a = (s.alpha > lo_tol) & (s.alpha < hi_tol)
    free_s = (s.alpha_star > lo_tol) & (s.alpha_star < hi_tol)
    estimates = np.concatenate([g[free_a] - eps, g[free_s] + eps])
    if estimates.size:
        bias = float(estimates.mean())
    else:
        at_zero_a = s.alpha <= lo_tol
        at_c_a = s.alpha >= hi_tol
        at_zero_s = s.alpha_star <= lo_tol
        at_c_s = s.alpha_star >= hi_tol
        lower = np.concatenate([g[at_zero_a] - eps, g[at_c_s] + eps])
        upper = np.concatenate([g[at_c_a] - eps, g[at_zero_s] + eps])
        lb = lower.max() if lower.size else None
        ub = upper.min() if upper.size else None
        if lb is not None and ub is not None:
            bias = 0.5 * (lb + ub)
        else:
            bias = float(lb if lb is not None else ub)
    return WeightRepr(beta=beta, norm_A=norm_A, B=B, norm_w=norm_w, bias=float(bias), clamped=bool(clamped))
