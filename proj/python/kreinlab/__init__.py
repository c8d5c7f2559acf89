"""Resolvent convergence of cut-off sequences for semibounded extensions of
a singular 1D Schrödinger operator. Configs are plain dicts keyed by section."""

import json

from . import _core
from ._core import NumericalError, __version__, form_bound

__all__ = [
    "NumericalError",
    "__version__",
    "config_hash",
    "default_config",
    "form_bound",
    "lowest_eigenvalues",
    "oracle_suite",
    "parse_config",
    "run_admissibility",
    "run_convergence",
    "run_spectrum_tracking",
]


def default_config():
    return json.loads(_core.default_config())


def parse_config(text):
    return json.loads(_core.parse_config(text))


def _dump(config):
    return "" if config is None else json.dumps(config)


def config_hash(config):
    return _core.config_hash(_dump(config))


def lowest_eigenvalues(spec, config=None, n=0.0, k=3):
    return _core.lowest_eigenvalues(_dump(config), spec, n, k)


def run_convergence(config=None):
    """Report dict: config, config_hash, warnings, metadata and the CSV text."""
    return json.loads(_core.run_convergence(_dump(config)))


def run_admissibility(config=None):
    return json.loads(_core.run_admissibility(_dump(config)))


def run_spectrum_tracking(config=None, k=3):
    return json.loads(_core.run_spectrum_tracking(_dump(config), k))


def oracle_suite(seeds=100, dim=8, codim=2, general_specs=3):
    result = _core.oracle_suite(seeds, dim, codim, general_specs)
    result["failures"] = [json.loads(line) for line in result["failures"].splitlines()]
    return result
