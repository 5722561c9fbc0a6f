"""Numeric tolerances shared by every module.

Values are absolute unless noted. Tests and the CLI read them from here so a
single edit retunes the whole package.
"""

MAX_HILBERT_DIM = 65536

TOLERANCES = {
    # linop
    "hermitian": 1e-10,
    "unitary": 1e-12,
    "density_trace": 1e-10,
    "density_psd": 1e-10,
    "fidelity_clamp": 1e-12,
    "state_norm": 1e-12,
    # intragates
    "gate_match": 1e-10,
    "spectator_trace_distance_gate": 1e-10,
    # dynamics
    "norm_drift_report": 1e-8,
    "norm_drift_abort": 1e-6,
    "spectator_trace_distance": 1e-6,
    "mono_poly_population": 1e-6,
    "loop_closure": 1e-6,
    "fock_doubling_fidelity": 1e-7,
    "effective_limit_population": 1e-2,
    # experiments
    "matched_fidelity_floor": 1e-6,
    "matched_fidelity_std": 1e-7,
    "cross_platform": 1e-12,
    "relabel_symmetry": 1e-9,
}
