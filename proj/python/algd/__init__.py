"""Python surface over the C++ core.

The extension module `_algd` exposes the deterministic RNG streams, the
variance-exploding noise schedule, the toy constrained environments, the
(augmented) Lagrangian energies, and the guided-score estimators. Set
ALGD_EXT_DIR to load the extension from a CMake build tree instead of an
installed wheel.
"""

import os
import sys

_ext_dir = os.environ.get("ALGD_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

from _algd import (  # noqa: E402
    DualState,
    EnergyEval,
    EnergyFn,
    EnvSpec,
    EnvState,
    NoiseSchedule,
    RngStream,
    ScoreTarget,
    StepResult,
    aug_lagrangian,
    aug_lagrangian_grad_a,
    build_schedule,
    dual_update,
    forward_perturb,
    gaussian_mollified_score,
    lagrangian,
    lagrangian_grad_a,
    make_energy_fn,
    make_env_spec,
    mc_score_target,
    quadrature_score,
    reset_env,
    step_env,
)

__all__ = [
    "DualState",
    "EnergyEval",
    "EnergyFn",
    "EnvSpec",
    "EnvState",
    "NoiseSchedule",
    "RngStream",
    "ScoreTarget",
    "StepResult",
    "aug_lagrangian",
    "aug_lagrangian_grad_a",
    "build_schedule",
    "dual_update",
    "forward_perturb",
    "gaussian_mollified_score",
    "lagrangian",
    "lagrangian_grad_a",
    "make_energy_fn",
    "make_env_spec",
    "mc_score_target",
    "quadrature_score",
    "reset_env",
    "step_env",
]
