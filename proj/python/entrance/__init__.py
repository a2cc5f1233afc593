"""Simulation and entrance-boundary diagnostics for nonlinear branching processes.

Specs and simulation settings are plain dicts in the CLI config schema
(see docs/schema.md); results come back as dicts.
"""

import json

from . import _core
from ._core import DomainError, NumericalError, PreconditionError, SpecError

__version__ = _core.__version__

__all__ = [
    "DomainError", "NumericalError", "PreconditionError", "SpecError",
    "logistic_csbp", "logistic_drift_only", "null_spec",
    "validate", "classify", "simulate", "passage", "markov_decomposition", "flow",
    "gronwall", "entrance_profile", "semigroup_cauchy", "moment_convergence",
    "fdd_convergence", "run",
]


def _dump(obj):
    return "" if obj is None else json.dumps(obj)


def logistic_csbp(c=1.0, alpha=1.5, scale=1.0):
    """gamma0 = -(c/2) x^2, gamma1 = gamma2 = x, stable(alpha) jumps."""
    return {
        "gamma0": {"kind": "logistic_drift", "c": c},
        "gamma1": {"kind": "linear", "slope": 1},
        "gamma2": {"kind": "linear", "slope": 1},
        "nu": {"kind": "stable", "alpha": alpha, "c": scale},
    }


def logistic_drift_only(c=1.0):
    zero = {"kind": "zero"}
    return {"gamma0": {"kind": "logistic_drift", "c": c}, "gamma1": zero, "gamma2": zero,
            "nu": {"kind": "none"}}


def null_spec():
    zero = {"kind": "zero"}
    return {"gamma0": zero, "gamma1": zero, "gamma2": zero, "nu": {"kind": "none"}}


def validate(spec, grid=None):
    return json.loads(_core.validate(_dump(spec), grid))


def classify(spec, grid=None):
    return json.loads(_core.classify(_dump(spec), grid))


def simulate(spec, x0, sim=None, n_paths=1, workers=1):
    return json.loads(_core.simulate(_dump(spec), x0, _dump(sim), n_paths, workers))


def passage(spec, x0, b, sim=None, n_paths=1000, workers=1, theta=None):
    return json.loads(_core.passage(_dump(spec), x0, b, _dump(sim), n_paths, workers, theta))


def markov_decomposition(spec, x, x_mid, b, sim=None, n_paths=1000, workers=1):
    return json.loads(_core.markov_decomposition(_dump(spec), x, x_mid, b, _dump(sim), n_paths, workers))


def flow(spec, initial_values, sim=None, n_realizations=1, workers=1):
    return json.loads(_core.flow(_dump(spec), list(initial_values), _dump(sim), n_realizations, workers))


def gronwall(spec, x, y, t, n_realizations, sim=None, theta=None, workers=1):
    return json.loads(_core.gronwall(_dump(spec), x, y, t, n_realizations, _dump(sim), theta, workers))


def entrance_profile(spec, b_grid, x_grid, t, sim=None, n_paths=1000, workers=1):
    return json.loads(_core.entrance_profile(_dump(spec), list(b_grid), list(x_grid), t, _dump(sim),
                                             n_paths, workers))


def semigroup_cauchy(spec, t, x_grid, sim=None, n_paths=1000, lam=1.0, workers=1):
    return json.loads(_core.semigroup_cauchy(_dump(spec), t, list(x_grid), _dump(sim), n_paths, lam,
                                             workers))


def moment_convergence(spec, power, b, x_grid, sim=None, n_paths=1000, workers=1):
    return json.loads(_core.moment_convergence(_dump(spec), power, b, list(x_grid), _dump(sim), n_paths,
                                               workers))


def fdd_convergence(spec, times, x_grid, x_ref, sim=None, n_paths=1000, workers=1):
    return json.loads(_core.fdd_convergence(_dump(spec), list(times), list(x_grid), x_ref, _dump(sim),
                                            n_paths, workers))


def run(command, config, seed=None, workers=1, out_dir=None, **overrides):
    """Same as the `entrance` executable; returns (exit_code, log).

    Keyword overrides use double underscores for dots: sim__dt=1e-4.
    """
    pairs = [(k.replace("__", "."), json.dumps(v)) for k, v in overrides.items()]
    return _core.run(command, str(config), seed, workers, None if out_dir is None else str(out_dir), pairs)
