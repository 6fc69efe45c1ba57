import numpy as np

from martpara import EdgeCoefficients, Measure, build_lattice


def random_setup(arity, depth, seed, sparsity=0.2, mu_sparsity=None, nu_sparsity=None):
    """Seeded (lattice, mu, nu, beta, f) tuple used across module tests."""
    lat = build_lattice(arity, depth)
    rng = np.random.default_rng(seed)
    n = lat.n_leaves
    mu_sparsity = sparsity if mu_sparsity is None else mu_sparsity
    nu_sparsity = sparsity if nu_sparsity is None else nu_sparsity

    def masses(s):
        vals = 1.0 - rng.random(n)
        vals[rng.random(n) < s] = 0.0
        return vals

    mu = Measure(lat, masses(mu_sparsity))
    nu = Measure(lat, masses(nu_sparsity))
    beta = EdgeCoefficients(
        lat, [rng.standard_normal((lat.level_size(d), arity)) for d in range(depth)]
    )
    f = rng.standard_normal(n)
    return lat, mu, nu, beta, f
