"""Simplex search over circuit parameters.

The objective adds, to the mismatch count, the 1-Wasserstein distance
between the sampled outcome distribution and the target class's
representative distribution, divided by ``2**n - 1`` so that it lies in
[0, 1]. The distance makes the landscape graded where the mismatch count
alone is flat, so the search keeps moving toward the class interior after
the target class is first hit.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..domain import DominancePartition, abstract_output
from ..errors import ValidationError
from .base import BudgetExhausted, LossSpec, Objective, OptimizerConfig

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


def wasserstein_1d(p, q):
    """W1 between distributions on the ordered outcomes 0..n-1 with unit spacing."""
    return float(np.abs(np.cumsum(np.asarray(p) - np.asarray(q))[:-1]).sum())


def nelder_mead(f, x0, step, max_evals, xatol=1e-4, fatol=1e-9):
    """Minimize ``f`` from ``x0``; returns ``(x, fx, n_evals)``.

    ``step`` is the per-coordinate offset of the initial simplex vertices.
    ``f`` may raise to stop early; the exception propagates.
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    simplex = [x0]
    for i in range(n):
        v = x0.copy()
        v[i] += step[i]
        simplex.append(v)
    simplex = np.array(simplex)
    fs = np.array([f(v) for v in simplex])
    evals = n + 1
    while evals < max_evals:
        order = np.argsort(fs, kind="stable")
        simplex, fs = simplex[order], fs[order]
        if np.abs(fs[1:] - fs[0]).max() <= fatol and np.abs(simplex[1:] - simplex[0]).max() <= xatol:
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + REFLECT * (centroid - simplex[-1])
        fr = f(xr)
        evals += 1
        if fr < fs[0]:
            xe = centroid + EXPAND * (xr - centroid)
            fe = f(xe)
            evals += 1
            simplex[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
        else:
            inside = fr >= fs[-1]
            xc = centroid + CONTRACT * ((simplex[-1] if inside else xr) - centroid)
            fc = f(xc)
            evals += 1
            if fc < min(fr, fs[-1]):
                simplex[-1], fs[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + SHRINK * (simplex[i] - simplex[0])
                    fs[i] = f(simplex[i])
                    evals += 1
    best = int(np.argmin(fs))
    return simplex[best], fs[best], evals


class QuantumParamSolver(BaseEstimator):
    """Finds circuit parameters whose sampled output lands in a target class tuple.

    ``simplex_size`` is the initial simplex edge as a fraction of each
    parameter's range. A simplex runs until it collapses; it does not stop
    at the first hit, so the returned parameters sit close to the
    representative distribution. A simplex that collapses without reaching
    the target is restarted from a fresh random point until the budget is
    spent.
    """

    def __init__(self, shots=10_000, simplex_size=0.5, budget=200, seed=0, reg_weight=1.0):
        self.shots = shots
        self.simplex_size = simplex_size
        self.budget = budget
        self.seed = seed
        self.reg_weight = reg_weight

    def fit(self, qsut, target):
        if self.shots <= 0:
            raise ValidationError("shots must be > 0")
        if self.budget <= 0:
            raise ValidationError("budget must be > 0")
        sut = qsut.with_shots(self.shots)
        space = target.space
        dom_idx = next((j for j, s in enumerate(space.schemes) if isinstance(s, DominancePartition)), None)
        if dom_idx is None:
            raise ValidationError("target space has no distribution-valued dimension")
        scheme = space.schemes[dom_idx]
        reference = scheme.canonical_distribution(target.classes[dom_idx])
        norm = max(scheme.n_outcomes - 1, 1)

        def shaping(point):
            outputs = sut.evaluate(point)
            return abstract_output(space, outputs), wasserstein_1d(outputs[dom_idx], reference) / norm

        domain = sut.input_domain
        obj = Objective(sut, target, LossSpec(self.reg_weight), self.budget, shaping=shaping, domain=domain)
        rng = np.random.default_rng(self.seed)
        lo, hi = domain.lower, domain.upper
        trace = []

        def f(x):
            value = obj(x)
            trace.append(obj.best[0])
            return value

        try:
            # restart from a fresh point whenever a simplex collapses short of the target
            while obj.best is None or obj.best[1] or obj.best[4]:
                x0 = lo + rng.random(len(domain)) * (hi - lo)
                step = self.simplex_size * (hi - lo)
                # point the first simplex edge inward when it would leave the box
                step = np.where(x0 + step > hi, -step, step)
                nelder_mead(f, x0, step, self.budget - obj.calls)
        except BudgetExhausted:
            pass
        self.outcome_ = obj.outcome(trace, "quantum")
        self.best_input_ = self.outcome_.best_input
        return self


def solve_quantum_params(qsut, target, config=None, spec=None):
    config = config or OptimizerConfig(strategy="quantum")
    spec = spec or LossSpec()
    solver = QuantumParamSolver(
        shots=config.shots,
        simplex_size=config.simplex_size,
        budget=config.budget,
        seed=config.seed,
        reg_weight=spec.reg_weight,
    )
    return solver.fit(qsut, target).outcome_
