def get_default_opts(disc=-4):

    default_opts = {
        'debug': False,  # Will enable extra consistency checks and outputs
        'verbose': 1,  # 0: silent, 1: stage banners and timings, 2: per-level diagnostics
        'workers': 1,  # joblib n_jobs for sharded enumeration and BFS level expansion
        'max_orbit_size': 2_000_000,  # Orbit BFS stops and flags a partial result beyond this many classes
        'schema': 'heiscount/v1',  # Tag written into every JSON output
        'disc': disc,  # Fundamental discriminant of the imaginary quadratic field
        'generators': None,  # JSON generator file; None uses the built-in set (D = -4 only)
        'mertens': {
            's_values': [1, 4, 16, 64, 256, 1024],
            'ideal': None,  # HNF integers (h11, h12, h22) of a congruence ideal m; None means O_K
        },
        'equidist': {
            's': 256,
            'window': [0.0, 1.0, 0.0, 1.0, 0.0, 1.0],  # (Re w, Im w, Im w0) ranges
            'grid': 3,  # k x k x k boxes
            'normalization': 'lattice',  # 'lattice' (lattice-density constant) or 'stated'
        },
        'chains': {
            'eps': [1 / 2, 1 / 4, 1 / 8],
            'max_depth': 24,
            'saturation_levels': 3,  # Empty levels required before a count is reported as saturated
            'covolume': None,  # Covol of the seed chain stabiliser; None uses the Q(i) value pi/3
            'n0': 4,  # Order of the pointwise stabiliser of the seed chain
            'n_samples': 64,  # Points per chain in geometry export
            'window': [0.0, 1.0, 0.0, 1.0, 0.0, 1.0],  # Center window for the equidistribution statistic
            'grid': 1,
        },
        'cubic': {
            's_values': [2.0, 4.0, 8.0, 16.0],
            'max_depth': 8,
            'iota0': 1,  # Index of the stabiliser of the fixed-point pair, reported only
            'n0': 1,
            'ndigits': 9,  # Rounding used in fixed-point pair keys
            # Translation search radius around a pair of complexity x: scale * sqrt(s / x) + margin
            'radius_scale': 2.0,
            'radius_margin': 2.0,
        },
        'zeta': {
            'method': 'series',  # 'series' or 'hurwitz'
            'series_terms': 1_000_000,
        },
        'quadrature': {
            'epsabs': 1e-12,
            'epsrel': 1e-11,
            'limit': 200,
            'fd_step': 1e-5,  # Central difference step, refined once by Richardson extrapolation
            'jacobian_method': 'fd',  # 'fd' or 'jax'
        },
        'verify': {
            'seed': 20231017,
            'n_pairs': 10_000,
            'n_triples': 1000,
            'n_words': 1000,
            'word_length': 8,
            'n_chains': 1000,
            'n_chain_samples': 720,
            'oracle_s': 20,
        },
    }

    return default_opts
