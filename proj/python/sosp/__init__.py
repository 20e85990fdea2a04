"""Python front end for the sosp library.

Harness calls accept a config as a dict (or JSON text) and return decoded
results; CSV outputs are returned as text.
"""

import json

try:
    from . import _sosp
except ImportError:  # build-tree layout: extension next to, not inside, the package
    import _sosp

ConfigError = _sosp.ConfigError
InputError = _sosp.InputError
ContractError = _sosp.ContractError
BudgetError = _sosp.BudgetError
Oracle = _sosp.Oracle

version = _sosp.version
derive_seed = _sosp.derive_seed
psi = _sosp.psi
phi = _sosp.phi
lambda_fn = _sosp.lambda_fn
prog = _sosp.prog
progress_deadline = _sosp.progress_deadline
solve_cubic = _sosp.solve_cubic
sgd_hvp_rvr_params = _sosp.sgd_hvp_rvr_params
fit_slope = _sosp.fit_slope


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def normalize_config(config):
    """Config with every default filled in."""
    return json.loads(_sosp.normalize_config(_text(config)))


def make_oracle(config, eps, seed):
    return _sosp.Oracle(_text(config), eps, seed)


def solve(config):
    """Returns (manifest dict, trajectory CSV text)."""
    manifest, trajectory = _sosp.run_solve(_text(config))
    return json.loads(manifest), trajectory


def sweep(config):
    """Returns (rows CSV text, summary dict with fits, medians and warnings)."""
    rows, summary = _sosp.run_sweep(_text(config))
    return rows, json.loads(summary)


def lowerbound(config):
    """Returns (runs CSV text, trajectory CSV text, summary dict)."""
    runs, trajectories, summary = _sosp.run_lowerbound(_text(config))
    return runs, trajectories, json.loads(summary)


def verify(suites=("all",)):
    return json.loads(_sosp.run_verify(list(suites)))
