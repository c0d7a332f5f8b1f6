"""Default run settings shared by the client and the command line."""

RUN_DEFAULTS = {
    'firings': 100,
    'replications': 5,
    'alpha': 0.05,
    'max_states': 10_000,
    'cpn_steps': 50,
    'loc_tolerance': 1e-6,
    'smt_timeout': 30.0,
}
