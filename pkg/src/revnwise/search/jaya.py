"""Population search with the Jaya update.

Each generation keeps the ``elite`` best members and moves every other
member toward the current best and away from the current worst::

    x' = x + r1 * (best - |x|) - r2 * (worst - |x|)

with fresh uniform ``r1, r2`` per coordinate, clamped to the bounds.
Categorical coordinates are resampled uniformly with probability
``mutation_rate`` and kept otherwise. A member only takes its candidate
when the candidate is no worse, which matters on the plateaus of the
mismatch-count loss.

The update contracts the population onto the best member, after which it
stops exploring. Whenever a generation fails to improve the best loss, the
next one rebuilds every non-elite member from the best member with each
coordinate redrawn uniformly with probability ``restart_rate`` (at least
one coordinate per member). Few redrawn coordinates keep the output
dimensions that already match while probing the one that does not.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ValidationError
from .base import BudgetExhausted, LossSpec, Objective, OptimizerConfig


class _Solved(Exception):
    pass


class JayaSolver(BaseEstimator):
    """Inverse mapper: ``fit(sut, target)`` searches for an input realizing ``target``.

    Stops at the first zero-loss point, when the oracle budget runs out,
    or after ``generations``. The result is in ``outcome_``.
    """

    def __init__(self, population=20, generations=100, elite=4, budget=200, seed=0,
                 reg_weight=1.0, mutation_rate=0.2, restart_rate=0.1):
        self.population = population
        self.generations = generations
        self.elite = elite
        self.budget = budget
        self.seed = seed
        self.reg_weight = reg_weight
        self.mutation_rate = mutation_rate
        self.restart_rate = restart_rate

    def fit(self, sut, target, domain=None):
        if self.budget <= 0:
            raise ValidationError("budget must be > 0")
        if not 0 <= self.elite < self.population:
            raise ValidationError("elite size must be smaller than the population")
        domain = domain or sut.input_domain
        obj = Objective(sut, target, LossSpec(self.reg_weight), self.budget, domain=domain)
        rng = np.random.default_rng(self.seed)
        lo, hi = domain.lower, domain.upper
        cat = domain.categorical_mask
        n_labels = np.array([len(getattr(d, "labels", ())) for d in domain.dimensions])
        p = len(domain)

        def score(vec):
            f = obj(vec)
            if f == 0.0:
                raise _Solved
            return f

        P = domain.sample(rng, self.population)
        fit = np.full(self.population, np.inf)
        trace = []
        try:
            for i in range(self.population):
                fit[i] = score(P[i])
            trace.append(obj.best[0])
            stalled = False
            for _ in range(self.generations):
                before = obj.best[0]
                order = np.argsort(fit, kind="stable")
                # ties are common under the mismatch-count loss; pick among them at random
                best = P[rng.choice(np.flatnonzero(fit == fit[order[0]]))].copy()
                worst = P[rng.choice(np.flatnonzero(fit == fit[order[-1]]))].copy()
                restart = stalled and self.restart_rate > 0
                for i in order[self.elite:]:
                    x = P[i]
                    if restart:
                        cand = best.copy()
                        redraw = rng.random(p) < self.restart_rate
                        if not redraw.any():
                            redraw[rng.integers(p)] = True
                        fresh = domain.sample(rng, 1)[0]
                        cand[redraw] = fresh[redraw]
                    else:
                        r1, r2 = rng.random(p), rng.random(p)
                        cand = np.clip(x + r1 * (best - np.abs(x)) - r2 * (worst - np.abs(x)), lo, hi)
                        if cat.any():
                            flip = cat & (rng.random(p) < self.mutation_rate)
                            cand[cat] = x[cat]
                            cand[flip] = rng.integers(0, n_labels[flip])
                    fc = score(cand)
                    if restart or fc <= fit[i]:
                        P[i] = cand
                        fit[i] = fc
                trace.append(obj.best[0])
                stalled = obj.best[0] >= before
        except (BudgetExhausted, _Solved):
            if not trace or trace[-1] != obj.best[0]:
                trace.append(obj.best[0])
        self.outcome_ = obj.outcome(trace, "metaheuristic")
        self.best_input_ = self.outcome_.best_input
        return self


def solve_metaheuristic(sut, target, domain=None, config=None, spec=None):
    config = config or OptimizerConfig()
    spec = spec or LossSpec()
    solver = JayaSolver(
        population=config.population,
        generations=config.generations,
        elite=config.elite,
        budget=config.budget,
        seed=config.seed,
        reg_weight=spec.reg_weight,
    )
    return solver.fit(sut, target, domain).outcome_
