# This file contains the default parameters of the experiments
# The parameters are stored in a dictionary with the experiment name as the key
# The value is a dictionary with the following keys:
# - claim: the claim the experiment asserts, as printed by `sslab list`
# - config: overrides of the ExperimentConfig field defaults
# - options: experiment-specific knobs passed through ExperimentConfig.options

experiment_parameters = {
    "prop51": {
        "claim": "E[Z_T^(1)] < 1 with defect above p(T)^2/(1+p(T)), E[Z_T^(beta)] = 1 with no "
                 "Follmer-beta explosions; direct and explosion defect estimators agree",
        "config": {
            "n_paths": 100000,
            "n_steps": 4096,
        },
        "options": {
            "sweep_T": [0.25, 1.0, 4.0],
            "sweep_beta": [1.5, 2.0, 4.0],
            "sweep_paths": 20000,
            "sweep_steps": 1024,
            "barrier_paths": 100000,
            "explosion_bound": 1e-4,
            "cutoffs": [],
        },
    },
    "example1": {
        "claim": "S has positive drift before tau under P, passes the supermartingale test "
                 "under P^(beta), and Z^(1) S = 1 on every path",
        "config": {
            "n_paths": 20000,
            "n_steps": 1024,
        },
        "options": {
            "identity_tolerance": 1e-12,
            "window_exposure": 36.0,
            "conditional_levels": 4,
        },
    },
    "example2": {
        "claim": "E[log X_T] - E[log S_T] <= 0 for constant-fraction strategies, "
                 "with equality at pi = 1, also for pi < 0",
        "config": {
            "n_paths": 20000,
            "n_steps": 1024,
        },
        "options": {
            "fractions": [-0.5, 0.0, 0.25, 0.5, 0.75, 1.0],
            "tolerance": 1e-3,
            "window_exposure": 36.0,
        },
    },
    "lattice-duality": {
        "claim": "NUPBR <=> D_loc, NUPBR_C <=> D_sup, NA+NUPBR <=> M_loc, NA_C+NUPBR_C <=> M_sup "
                 "on every generated lattice; utility conjugacy gap < 1e-8",
        "config": {
            "n_paths": 2,
        },
        "options": {
            "utility_instances": 60,
            "conjugacy_tolerance": 1e-8,
            "closed_form_tolerance": 1e-10,
            "c_maximal_trials": 100,
        },
    },
    "negishi": {
        "claim": "Negishi weights reproduce the individual optima to 1e-10 and "
                 "U(X_T;lambda) <= U(S_T;lambda) + Z_T (X_T - S_T) on every path",
        "config": {
            "n_paths": 10000,
            "n_steps": 1024,
        },
        "options": {
            "shares": [0.4, 0.6],
            "fractions": [0.0, 0.25, 0.5, 0.75, 1.0],
            "roundtrip_tolerance": 1e-10,
            "scale": 2.0,
        },
    },
    "patching": {
        "claim": "the patched deflator Y makes Y S a local martingale on every bin while an "
                 "individual Y^k S fails off its own holding set",
        "config": {
            "n_paths": 20000,
            "n_steps": 1024,
        },
        "options": {
            "switch": 0.5,
            "offset": 1.0,
            "lattice_up": 2.0,
            "lattice_down": 0.5,
            "lattice_depth": 2,
            "beliefs": [0.6, 0.4],
        },
    },
    "repr-agent": {
        "claim": "U(x) = Z_T S_T^gamma x^(1-gamma)/(1-gamma) has U'(S_T) = Z_T and makes "
                 "holding the supply optimal; lattice agents share the unique deflator",
        "config": {
            "n_paths": 20000,
            "n_steps": 1024,
        },
        "options": {
            "fractions": [0.0, 0.25, 0.5, 0.75, 1.0],
            "marginal_tolerance": 1e-12,
            "lattice_depth": 2,
        },
    },
}
