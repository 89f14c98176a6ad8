"""
Physics constants, reference parameter sets and command-line vocabularies.
"""

# Exit Codes
# ==========

EXIT_SUCCESS = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_UNCERTIFIED = 3
EXIT_USAGE = 64

# Reference Parameter Sets
# ========================
# (Omega, G, omega) used by the verification suite and the README examples.
# Branch -1 is the normalizable one when omega + Omega > 0.

ACCEPTANCE_PARAMETERS = {
    "Omega": 2.0,
    "G": 0.5,
    "omega": 1.0,
    "branch": -1,
}

DECOUPLED_PARAMETERS = {
    "Omega": 2.0,
    "G": 0.0,
    "omega": 1.0,
    "branch": -1,
}

# Fock levels the Berry phase and correspondence routines are exercised on
REFERENCE_LEVELS = [0, 1, 2, 5]

# Sweep Vocabulary
# ================
# Command-line parameter name -> ModelParams field

SWEEPABLE_PARAMETERS = {
    "omega-cap": "Omega",
    "g": "G",
    "drive": "omega",
}

SWEEP_QUANTITIES = [
    "Gamma",
    "E_n",
    "gamma_closed",
    "gamma_quadrature",
    "gamma_evolution",
    "hannay_closed",
    "hannay_quadrature",
    "correspondence_residual",
]

# Run-configuration file keys -> RunConfig fields
CONFIG_FILE_KEYS = {
    "omega_cap": "Omega",
    "g": "G",
    "drive": "omega",
    "branch": "branch",
    "n": "n",
    "nmax": "n_max",
    "cutoff": "cutoff",
    "margin": "boundary_margin",
    "cutoff_policy": "cutoff_policy",
    "tol_ode": "tol_ode",
    "tol_quad": "tol_quad",
    "tol_assert": "tol_assert",
    "format": "format",
    "out": "out",
}

OUTPUT_FORMATS = ["text", "csv", "json"]

# 17 significant digits round-trip every IEEE double
FLOAT_FORMAT = ".17g"
