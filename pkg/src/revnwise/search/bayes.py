"""Gaussian-process search with Expected Improvement.

The GP regresses the scalar loss on inputs rescaled to the unit box. The
kernel is a squared exponential whose length scale is picked per
iteration from a small grid by marginal likelihood. Each acquisition step
scores ``n_acquisition`` uniform candidates, then polishes the best ``n_restarts``
of them with L-BFGS-B. If the kernel matrix cannot be factored even with jitter,
the remaining budget is spent on uniform random search and the outcome is
flagged ``fallback``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.special import ndtr
from scipy.stats import qmc
from sklearn.base import BaseEstimator

from ..errors import ValidationError
from .base import BudgetExhausted, LossSpec, Objective, OptimizerConfig

LENGTH_SCALES = (0.05, 0.1, 0.2, 0.4, 0.8)
JITTER = 1e-6


class _GP:
    def __init__(self, X, y):
        self.X = X
        self.mean = y.mean()
        self.scale = y.std() or 1.0
        self.y = (y - self.mean) / self.scale
        best = None
        for ls in LENGTH_SCALES:
            K = _kernel(X, X, ls) + JITTER * np.eye(len(X))
            try:
                L = np.linalg.cholesky(K)
            except np.linalg.LinAlgError:
                continue
            alpha = cho_solve((L, True), self.y)
            lml = -0.5 * self.y @ alpha - np.log(np.diag(L)).sum()
            if best is None or lml > best[0]:
                best = (lml, ls, L, alpha)
        if best is None:
            raise np.linalg.LinAlgError("kernel matrix not positive definite")
        _, self.ls, self.L, self.alpha = best

    def predict(self, Z):
        Ks = _kernel(self.X, Z, self.ls)
        mu = Ks.T @ self.alpha
        v = solve_triangular(self.L, Ks, lower=True)
        var = np.clip(1.0 - (v * v).sum(axis=0), 1e-12, None)
        return mu, np.sqrt(var)

    def expected_improvement(self, Z, y_best, xi):
        mu, sd = self.predict(np.atleast_2d(Z))
        best = (y_best - self.mean) / self.scale
        imp = best - mu - xi
        z = imp / sd
        return imp * ndtr(z) + sd * np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)


def _kernel(A, B, ls):
    d2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(-1)
    return np.exp(-0.5 * d2 / ls**2)


class BayesianSolver(BaseEstimator):
    """Inverse mapper for continuous input domains.

    Runs ``max(5, 2 d)`` Latin-hypercube points, then up to ``T``
    acquisition steps, never exceeding ``budget`` oracle calls.
    """

    def __init__(self, T=50, xi=0.01, n_acquisition=1000, budget=200, seed=0, reg_weight=1.0,
                 n_restarts=1):
        self.T = T
        self.xi = xi
        self.n_acquisition = n_acquisition
        self.budget = budget
        self.seed = seed
        self.reg_weight = reg_weight
        self.n_restarts = n_restarts

    def fit(self, sut, target, domain=None):
        domain = domain or sut.input_domain
        if domain.categorical_mask.any():
            raise ValidationError("Bayesian search needs an all-continuous input domain")
        if self.budget <= 0:
            raise ValidationError("budget must be > 0")
        obj = Objective(sut, target, LossSpec(self.reg_weight), self.budget, domain=domain)
        rng = np.random.default_rng(self.seed)
        lo, hi = domain.lower, domain.upper
        d = len(domain)

        def f(u):
            return obj(lo + u * (hi - lo))

        U, y, trace = [], [], []
        fallback = False
        try:
            n0 = max(5, 2 * d)
            for u in qmc.LatinHypercube(d=d, seed=rng).random(n0):
                U.append(u)
                y.append(f(u))
                if y[-1] == 0.0:
                    break
            trace.append(obj.best[0])
            for _ in range(self.T if obj.best[0] > 0.0 else 0):
                if fallback:
                    u = rng.random(d)
                else:
                    try:
                        u = self._propose(np.array(U), np.array(y), rng, d)
                    except np.linalg.LinAlgError:
                        fallback = True
                        u = rng.random(d)
                U.append(u)
                y.append(f(u))
                trace.append(obj.best[0])
                if y[-1] == 0.0:
                    break
        except BudgetExhausted:
            if not trace or trace[-1] != obj.best[0]:
                trace.append(obj.best[0])
        self.outcome_ = obj.outcome(trace, "bayesian", fallback=fallback)
        self.best_input_ = self.outcome_.best_input
        return self

    def _propose(self, U, y, rng, d):
        gp = _GP(U, y)
        y_best = y.min()
        cand = rng.random((self.n_acquisition, d))
        ei = gp.expected_improvement(cand, y_best, self.xi)
        starts = cand[np.argsort(-ei, kind="stable")[: self.n_restarts]]
        best_u, best_ei = starts[0], ei.max()

        def neg(u):
            return -gp.expected_improvement(u, y_best, self.xi)[0]

        for s in starts:
            res = minimize(neg, s, method="L-BFGS-B", bounds=[(0.0, 1.0)] * d, options={"maxiter": 30})
            if -res.fun > best_ei:
                best_u, best_ei = np.clip(res.x, 0.0, 1.0), -res.fun
        # a repeated point would make the kernel matrix singular
        if np.min(np.abs(U - best_u).max(axis=1)) < 1e-9:
            best_u = cand[np.argmax(ei)]
            if np.min(np.abs(U - best_u).max(axis=1)) < 1e-9:
                best_u = rng.random(d)
        return best_u


def solve_bayesian(sut, target, domain=None, config=None, spec=None):
    config = config or OptimizerConfig(strategy="bayesian")
    spec = spec or LossSpec()
    solver = BayesianSolver(
        T=config.T,
        xi=config.xi,
        n_acquisition=config.n_acquisition,
        budget=config.budget,
        seed=config.seed,
        reg_weight=spec.reg_weight,
    )
    return solver.fit(sut, target, domain).outcome_
