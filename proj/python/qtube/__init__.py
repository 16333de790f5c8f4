"""Quantum dynamics on a tube with a position-dependent fibre radius.

The heavy lifting lives in the compiled extension; this package re-exports
it. When installed as a wheel the extension sits inside the package; for
in-tree builds it is importable from the build directory instead.
"""

try:
    from . import _core
except ImportError:  # built in-tree: the extension sits on sys.path directly
    import _core

_NAMES = [
    "PhysicsConstants",
    "RadiusProfile",
    "TubeGeometry",
    "brute_force_full",
    "capacity_S",
    "classical_effective_potential",
    "delta_v_eff_from_S",
    "delta_v_eff_from_b",
    "eigenvalue",
    "eta_of_path",
    "evolve_reduced_1d",
    "fit_convergence_order",
    "gaussian_moment_residual",
    "history_reduced_brute_force",
    "history_measure_factor",
    "min_winding_sigma",
    "reduced_propagator_matrix",
    "run_experiment_json",
    "scalar_curvature",
    "semiclassical_action",
    "short_time_full",
    "short_time_mode",
    "validate_experiment_json",
    "world_function_geodesic",
    "world_function_taylor",
]

for _name in _NAMES:
    globals()[_name] = getattr(_core, _name)

__all__ = list(_NAMES)
