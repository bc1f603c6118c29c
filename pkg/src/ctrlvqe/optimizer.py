"""Bound-constrained minimization of the pulse cost and multi-start
orchestration.

The minimizer is scipy's L-BFGS-B behind a contract this package relies
on: every accepted iterate is feasible, accepted costs are non-increasing,
termination is on projected-gradient norm / cost change / iteration cap,
a non-finite objective aborts with the offending parameter point, and
results are deterministic for a fixed seed and configuration.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .errors import NumericalAbort
from .objective import EnergyReport
from .pulsegrid import PulseSchedule

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class OptimizerConfig:
    memory_pairs: int = 10
    max_iters: int = 5000
    grad_tol: float = 1e-9            # projected-gradient infinity norm, hartree/GHz
    cost_tol: float = 1e-10           # relative cost change between accepted iterates
    energy_success_threshold: float = 1e-8  # hartree vs the reference ground energy
    max_line_search: int = 40


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    energy: float
    leakage: float

    def to_dict(self):
        return {"iteration": self.iteration, "cost": self.cost,
                "energy": self.energy, "leakage": self.leakage}


@dataclass
class RunResult:
    schedule: PulseSchedule
    report: EnergyReport
    iterations: int
    n_evaluations: int
    converged: bool
    success: bool
    seed: int | None
    energy_error: float
    grad_norm: float
    history: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "converged": self.converged,
            "success": self.success,
            "iterations": self.iterations,
            "n_evaluations": self.n_evaluations,
            "energy_hartree": self.report.energy,
            "energy_error_hartree": self.energy_error,
            "leakage_fraction": self.report.leakage_fraction,
            "penalty_hartree": self.report.penalty,
            "total_cost_hartree": self.report.total_cost,
            "projected_grad_norm": self.grad_norm,
        }


def projected_gradient(x, g, lower, upper):
    """Gradient with components pointing out of the box zeroed."""
    pg = g.copy()
    at_lower = x <= lower
    at_upper = x >= upper
    pg[at_lower & (g > 0)] = 0.0
    pg[at_upper & (g < 0)] = 0.0
    return pg


def minimize(fun_and_grad, x0, lower, upper, cfg: OptimizerConfig = OptimizerConfig(),
             keep_history: bool = False):
    """Minimize fun_and_grad(x) -> (cost, grad, extras) over the box.

    ``extras`` is an arbitrary per-evaluation payload (the pulse problem
    passes its EnergyReport); the payload of the final point is returned.
    Returns (x_opt, cost, extras, info dict).
    """
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 < lower - 1e-12) or np.any(x0 > upper + 1e-12):
        raise ValueError("x0 violates bounds")
    cache: dict = {}
    history: list = []
    n_evals = [0]

    def wrapped(x):
        cost, grad, extras = fun_and_grad(x)
        n_evals[0] += 1
        if not np.isfinite(cost) or not np.all(np.isfinite(grad)):
            raise NumericalAbort(
                f"objective returned a non-finite value at x = {x.tolist()}", x=x)
        cache.clear()
        cache[x.tobytes()] = (cost, grad, extras)
        return cost, grad

    def callback(xk):
        key = xk.tobytes()
        if key in cache and keep_history:
            cost, _, extras = cache[key]
            history.append((len(history), cost, extras))

    res = scipy_minimize(
        wrapped, x0, jac=True, method="L-BFGS-B",
        bounds=list(zip(lower, upper)),
        callback=callback,
        options={
            "maxiter": cfg.max_iters,
            "maxcor": cfg.memory_pairs,
            "ftol": cfg.cost_tol,
            "gtol": cfg.grad_tol,
            "maxls": cfg.max_line_search,
            "maxfun": cfg.max_iters * (cfg.max_line_search + 2),
        },
    )
    # final payload at the solution point
    cost, grad, extras = fun_and_grad(res.x)
    info = {
        "converged": bool(res.status == 0),
        "iterations": int(res.nit),
        "n_evaluations": n_evals[0] + 1,
        "message": str(res.message),
        "grad_norm": float(np.max(np.abs(projected_gradient(res.x, grad, lower, upper)))),
        "history": history,
    }
    return np.asarray(res.x), float(cost), extras, info


def _run_seed(args):
    problem, seed, cfg, keep_history = args
    return problem.run_single(seed, cfg, keep_history=keep_history)


def multistart(problem, n_starts: int, seed0: int, cfg: OptimizerConfig = OptimizerConfig(),
               threads: int | None = None, keep_history: bool = False):
    """Independent minimizations from random_schedule(seed0 + i).

    Returns (results ordered by seed, success_probability). Deterministic
    for fixed seed0 regardless of execution order or thread count.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    seeds = [seed0 + i for i in range(n_starts)]
    jobs = [(problem, s, cfg, keep_history) for s in seeds]
    threads = threads if threads is not None else (os.cpu_count() or 1)
    if threads > 1 and n_starts > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_seed, jobs))
    else:
        results = [_run_seed(j) for j in jobs]
    n_success = sum(1 for r in results if r.success)
    return results, n_success / n_starts
