"""Numerical tolerances shared across the package.

Each default can be overridden through an environment variable, read at
call time so that the CLI and tests may adjust them without reloading.
"""

from __future__ import annotations

import os

_DEFAULTS = {
    "svd_rel_tol": ("ALTFLOW_SVD_REL_TOL", 1e-10),
    "feasibility_tol": ("ALTFLOW_FEASIBILITY_TOL", 1e-8),
    "eig_phase_tol": ("ALTFLOW_EIG_PHASE_TOL", 1e-9),
    "dependence_tol": ("ALTFLOW_DEPENDENCE_TOL", 1e-10),
}


def get(name: str) -> float:
    """Return the tolerance called `name`, honouring env overrides."""
    env, default = _DEFAULTS[name]
    raw = os.environ.get(env)
    if raw is None:
        return default
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{env} must be positive, got {raw!r}")
    return value


def names() -> list[str]:
    return list(_DEFAULTS)
