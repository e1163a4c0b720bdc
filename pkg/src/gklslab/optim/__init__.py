"""Reference optimizers behind one run contract.

>>> from gklslab.optim import OptimizerConfig, run_optimizer, BlackBox
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..bench import RunTrace
from ..rng import make_rng
from . import de_lpr as _de
from . import direct_lite as _direct
from . import random_search as _rs
from .blackbox import BlackBox, BudgetExhausted
from .de_lpr import InvalidParameters


class UnknownOptimizer(KeyError):
    pass


REGISTRY = {
    "random_search": (_rs.random_search, _rs.DEFAULTS),
    "de_lpr": (_de.de_lpr, _de.DEFAULTS),
    "direct_lite": (_direct.direct_lite, _direct.DEFAULTS),
}


def list_optimizers() -> dict:
    """Name -> default parameter map."""
    return {name: dict(defaults) for name, (_, defaults) in REGISTRY.items()}


@dataclass(frozen=True)
class OptimizerConfig:
    name: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def validate(self) -> "OptimizerConfig":
        if self.name not in REGISTRY:
            raise UnknownOptimizer(f"unknown optimizer {self.name!r}; known: {sorted(REGISTRY)}")
        unknown = set(self.params) - set(REGISTRY[self.name][1])
        if unknown:
            raise InvalidParameters(f"unknown parameters for {self.name}: {sorted(unknown)}")
        return self

    def resolved_params(self) -> dict:
        params = dict(REGISTRY[self.name][1])
        params.update(self.params)
        return params


def run_optimizer(config: OptimizerConfig, box: BlackBox, budget: int | None = None,
                  stop_error: float | None = None, problem_id: str = "") -> RunTrace:
    """Run ``config`` on ``box`` and return the improvement trace.

    ``budget`` and ``stop_error``, when given, must agree with the box (the
    box enforces them).
    """
    config.validate()
    if budget is not None and budget != box.budget:
        raise ValueError(f"budget {budget} does not match the black box ({box.budget})")
    if stop_error is not None and stop_error != box._stop_error:
        raise ValueError("stop_error does not match the black box")
    func, _ = REGISTRY[config.name]
    rng = make_rng(config.seed)
    try:
        info = func(box, rng, **config.resolved_params())
    except BudgetExhausted:
        info = {}
    assert box.n_evals <= box.budget
    return RunTrace(problem_id, config.name, int(config.seed), box.error_trace(),
                    box.n_evals, box.budget, info or {})


__all__ = [
    "BlackBox",
    "BudgetExhausted",
    "InvalidParameters",
    "OptimizerConfig",
    "UnknownOptimizer",
    "list_optimizers",
    "run_optimizer",
]


def run_on_problem(config: OptimizerConfig, problem, budget: int,
                   stop_error: float = 1e-8, problem_id: str | None = None) -> RunTrace:
    box = BlackBox.from_problem(problem, budget, stop_error)
    pid = problem_id if problem_id is not None else f"p{problem.problem_index:04d}"
    return run_optimizer(config, box, problem_id=pid)


__all__.append("run_on_problem")
