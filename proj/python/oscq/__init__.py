"""Floquet multipliers and Q factors of oscillator steady states."""

import json

from . import _oscq
from ._oscq import (AnalysisError, Error, ParameterError, eigen_spectrum, equivalence_gap,
                    negative_power, q_from_lambda2, ql1, ql2)

__all__ = [
    "AnalysisError", "Error", "ParameterError", "analyze", "balance_point", "eigen_spectrum",
    "equivalence_gap", "models", "negative_power", "perturb", "q_factor", "q_from_lambda2",
    "ql1", "ql2",
]


def models():
    """Model name -> default parameters."""
    return {name: dict(params) for name, params in _oscq.models()}


def analyze(model, method="trap", steps_per_cycle=2000, unit_tol=1e-4, **params):
    """Steady state and multipliers as the dict the CLI prints for `q`."""
    return json.loads(_oscq.analyze(model, list(params.items()), method, steps_per_cycle, unit_tol))


def perturb(model, eps=1e-3, cycles=20, direction="lambda2", seed=0, **params):
    return json.loads(_oscq.perturb(model, list(params.items()), eps, cycles, direction, seed))


def q_factor(multipliers, unit_tol=1e-4):
    verdict, n_unit, lambda2, q = _oscq.verdict([complex(m) for m in multipliers], unit_tol)
    return {"verdict": verdict, "n_unit": n_unit, "lambda2_modulus": lambda2, "q": q}


def balance_point(gain, steepness, grid):
    return _oscq.balance_point(gain, steepness, list(grid))
