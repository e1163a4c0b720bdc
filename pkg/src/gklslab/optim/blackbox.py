from __future__ import annotations

import numpy as np


class BudgetExhausted(Exception):
    """Raised when an optimizer asks for an evaluation after the run is over."""


class BlackBox:
    """Budgeted objective on ``[-1, 1]^D``.

    Optimizers only see :meth:`evaluate`, :meth:`evaluate_batch`, the
    dimension and the remaining budget.  The known optimum value is kept
    private and used for the stopping rule and the error trace.
    """

    def __init__(self, func, dim: int, budget: int, optimum: float = 0.0,
                 stop_error: float = 0.0, batch_func=None):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        if stop_error < 0:
            raise ValueError("stop_error must be >= 0")
        self._func = func
        self._batch = batch_func
        self.dim = int(dim)
        self.budget = int(budget)
        self._optimum = float(optimum)
        self._stop_error = float(stop_error)
        self.n_evals = 0
        self.best_x = None
        self.best_value = np.inf
        self._improvements: list[tuple[int, float]] = []

    @classmethod
    def from_problem(cls, problem, budget: int, stop_error: float = 0.0) -> "BlackBox":
        return cls(problem.evaluate, problem.dim, budget, problem.global_value,
                   stop_error, problem.evaluate_many)

    @property
    def lower(self) -> np.ndarray:
        return -np.ones(self.dim)

    @property
    def upper(self) -> np.ndarray:
        return np.ones(self.dim)

    @property
    def remaining(self) -> int:
        return self.budget - self.n_evals

    @property
    def done(self) -> bool:
        return self.n_evals >= self.budget or self._reached()

    def _reached(self) -> bool:
        return self.best_value - self._optimum <= self._stop_error

    def _record(self, x, value: float) -> None:
        self.n_evals += 1
        if value < self.best_value:
            self.best_value = value
            self.best_x = np.array(x, dtype=float)
            self._improvements.append((self.n_evals, value))

    def evaluate(self, x) -> float:
        if self.done:
            raise BudgetExhausted
        value = float(self._func(np.asarray(x, dtype=float)))
        self._record(x, value)
        return value

    def evaluate_batch(self, X) -> np.ndarray:
        """Evaluate rows in order; returns only the prefix evaluated before the
        budget ran out or the stop error was reached."""
        if self.done:
            raise BudgetExhausted
        X = np.atleast_2d(np.asarray(X, dtype=float))
        X = X[: self.remaining]
        if self._batch is not None:
            values = np.asarray(self._batch(X), dtype=float)
        else:
            values = np.array([float(self._func(x)) for x in X])
        for k, (x, v) in enumerate(zip(X, values)):
            self._record(x, float(v))
            if self._reached():
                return values[: k + 1]
        return values

    def error_trace(self) -> list[tuple[int, float]]:
        return [(e, v - self._optimum) for e, v in self._improvements]
