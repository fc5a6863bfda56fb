import math
from collections import namedtuple

import numpy as np

from heiscount import chains, counting, cxhyp, heis, picard
from heiscount.exceptions import QuadratureException, UnsupportedFieldException
from heiscount.heis import HeisIntElem, HeisPt
from heiscount.helper import log
from heiscount.quadint import QuadInt, make_field

CheckResult = namedtuple('CheckResult', ['group', 'name', 'passed', 'value', 'detail'])

CHECK_GROUPS = ('integrals', 'metrics', 'group', 'chains', 'oracle')


def _check(group, name, passed, value=None, detail=''):
    return CheckResult(group, name, bool(passed), value, detail)


def check_integrals(opts):
    quad_opts = opts['quadrature']
    results = []
    for n in (2, 3, 4):
        try:
            mu = cxhyp.verify_mu_integral(n, quad_opts)
        except QuadratureException as e:
            results.append(_check('integrals', f'mu_integral_n{n}', False, e.abserr, str(e)))
            continue
        results.append(_check('integrals', f'mu_integral_n{n}', abs(mu.numeric - mu.closed) < 1e-6, mu.numeric,
                              f"closed {mu.closed!r}, displayed/closed {mu.displayed / mu.closed!r}"))

        horo = cxhyp.verify_horoball_volume(n, quad_opts)
        results.append(_check('integrals', f'horoball_ratio_n{n}', abs(horo.numeric - horo.closed) < 1e-9,
                              horo.numeric, f"closed {horo.closed!r}"))

    cp = cxhyp.verify_cprime(2, quad_opts)
    results.append(_check('integrals', 'cprime_n2', abs(cp.numeric - 4 / 3) < 1e-9, cp.numeric))

    jac, det = cxhyp.jacobian_of_F(method=quad_opts['jacobian_method'], step=quad_opts['fd_step'])
    results.append(_check('integrals', 'chart_jacobian_det', abs(det - 0.25) < 1e-6, det,
                          f"method {quad_opts['jacobian_method']}"))

    gc = cxhyp.geometric_constants(2)
    expected = gc.skin_horoball ** 2 / (4 * gc.bowen_margulis)
    results.append(_check('integrals', 'horoball_pair_constant', math.isclose(gc.c_horo_horo, expected,
                                                                              rel_tol=1e-12), gc.c_horo_horo))
    return results


def _random_points(rng, n, scale=3.0):
    zeta = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    u = scale ** 2 * rng.standard_normal(n)
    return zeta, u


def check_metrics(opts):
    rng = np.random.default_rng(opts['verify']['seed'])
    n = opts['verify']['n_pairs']
    results = []

    z1, u1 = _random_points(rng, n)
    z2, u2 = _random_points(rng, n)
    d = heis.cygan_array(z1, u1, z2, u2)
    dp = heis.cygan_prime_array(z1, u1, z2, u2)
    dpp = heis.cygan_second_array(z1, u1, z2, u2)
    tol = 1e-12 * np.maximum(d, 1)
    results.append(_check('metrics', 'sandwich',
                          np.all(d / math.sqrt(2) <= dpp + tol) and np.all(dpp <= d + tol)))
    results.append(_check('metrics', 'prime_ratio', np.all(d <= dp + tol) and np.all(dp <= math.sqrt(2) * d + tol)))

    zg, ug = _random_points(rng, n)
    shifted = [heis.heis_mul(HeisPt(a, b), HeisPt(c, e)) for a, b, c, e in zip(zg, ug, z1, u1)]
    shifted2 = [heis.heis_mul(HeisPt(a, b), HeisPt(c, e)) for a, b, c, e in zip(zg, ug, z2, u2)]
    worst = 0.0
    for metric, ref in ((heis.cygan_array, d), (heis.cygan_prime_array, dp), (heis.cygan_second_array, dpp)):
        moved = metric(np.array([p.zeta for p in shifted]), np.array([p.u for p in shifted]),
                       np.array([p.zeta for p in shifted2]), np.array([p.u for p in shifted2]))
        worst = max(worst, float(np.max(np.abs(moved - ref) / np.maximum(ref, 1))))
    results.append(_check('metrics', 'left_invariance', worst < 1e-9, worst))

    lam = rng.uniform(0.1, 10, n)
    dil = heis.cygan_array(lam * z1, lam ** 2 * u1, lam * z2, lam ** 2 * u2)
    err = float(np.max(np.abs(dil - lam * d) / np.maximum(lam * d, 1)))
    results.append(_check('metrics', 'dilation_homogeneity', err < 1e-9, err))

    z3, u3 = _random_points(rng, n)
    d13 = heis.cygan_array(z1, u1, z3, u3)
    d32 = heis.cygan_array(z3, u3, z2, u2)
    results.append(_check('metrics', 'triangle_inequality', np.all(d <= d13 + d32 + tol)))

    n_triples = opts['verify']['n_triples']
    worst = 0.0
    for _ in range(n_triples):
        xi = HeisPt(complex(*rng.standard_normal(2)), float(rng.standard_normal()))
        x, y, z = [cxhyp.SiegelPt(complex(*rng.standard_normal(2)), float(rng.standard_normal()),
                                  float(rng.uniform(0.1, 3))) for _ in range(3)]
        resid = cxhyp.busemann(xi, x, y) + cxhyp.busemann(xi, y, z) - cxhyp.busemann(xi, x, z)
        worst = max(worst, abs(resid))
    results.append(_check('metrics', 'busemann_cocycle', worst < 1e-9, worst))

    s = 7.0
    value = cxhyp.busemann_inf(cxhyp.SiegelPt(0j, 0.0, 1.0), cxhyp.SiegelPt(0j, 0.0, s))
    results.append(_check('metrics', 'busemann_horoball', abs(value - 0.5 * math.log(s)) < 1e-15, value))
    return results


def random_word(rng, gens, length):
    word = picard.SUqMat.identity(gens[0].field)
    for i in rng.integers(0, len(gens), length):
        word = word * gens[i]
    return word


def parabolic_generators(field):
    i = field.gen()
    one = field.one()
    gens = [picard.heis_to_matrix(HeisIntElem(one, one + i)),
            picard.heis_to_matrix(HeisIntElem(one, one - i)),
            picard.heis_to_matrix(HeisIntElem(i, field.zero()))]
    gens += [g.inv() for g in gens]
    return gens + [picard.diag_unit(u) for u in field.units]


def check_group(opts, field=None):
    field = make_field(opts['disc']) if field is None else field
    try:
        gens = picard.default_generators(field)
    except UnsupportedFieldException as e:
        return [_check('group', 'default_generators', False, None, str(e))]

    rng = np.random.default_rng(opts['verify']['seed'])
    results = [_check('group', 'generator_membership', all(picard.check_membership(g) for g in gens))]
    s = picard.sigma(field)
    results.append(_check('group', 'sigma_involution', s * s == picard.SUqMat.identity(field)))

    n_words = opts['verify']['n_words']
    length = opts['verify']['word_length']
    words_ok = all(picard.check_membership(random_word(rng, gens, int(rng.integers(1, length + 1))))
                   for _ in range(n_words))
    results.append(_check('group', 'word_membership', words_ok, n_words))

    parabolic = parabolic_generators(field)
    seed = (field.zero(), field.one(), field.zero())
    invariant = True
    for _ in range(n_words):
        v = random_word(rng, gens, length).apply(seed)
        if not v[2]:
            continue
        gamma = random_word(rng, parabolic, length)
        invariant &= picard.canonical_key(gamma.apply(v), field) == picard.canonical_key(v, field)
    results.append(_check('group', 'canonical_invariance', invariant, n_words))
    return results


def random_polar(rng, field, bound=6):
    while True:
        v = tuple(QuadInt(field, int(x), int(y)) for x, y in rng.integers(-bound, bound + 1, (3, 2)))
        if v[2] and picard.hermitian_form(v) > 0:
            return chains.PolarPoint(v)


def center_error(c1: HeisPt, c2: HeisPt) -> float:
    """
    Max-norm distance of the (zeta, u) coordinates, relative to the size of c1
    """
    scale = max(1.0, abs(c1.zeta), abs(c1.u))
    return max(abs(c1.zeta - c2.zeta), abs(c1.u - c2.u)) / scale


def check_chains(opts, field=None):
    field = make_field(opts['disc']) if field is None else field
    rng = np.random.default_rng(opts['verify']['seed'])
    k = opts['verify']['n_chain_samples']
    worst_diam = worst_center = worst_sphere = 0.0
    for _ in range(opts['verify']['n_chains']):
        P = random_polar(rng, field)
        geom = chains.chain_from_polar(P)
        samples = chains.sample_chain(P, k)
        worst_diam = max(worst_diam, abs(chains.sampled_diameter(samples) - geom.diam) / geom.diam)
        c1 = geom.center
        c2 = chains.chain_center_by_reflexion(P)
        # coordinates, not the gauge: its fourth root amplifies rounding
        worst_center = max(worst_center, center_error(c1, c2))
        worst_sphere = max(worst_sphere, chains.hypersphere_residual(samples), chains.line_residual(P, samples))
    return [
        _check('chains', 'sampled_diameter', worst_diam < 1e-4, worst_diam),
        _check('chains', 'center_agreement', worst_center < 1e-9, worst_center),
        _check('chains', 'samples_on_chain', worst_sphere < 1e-9, worst_sphere),
    ]


def check_oracle(opts, field=None):
    field = make_field(opts['disc']) if field is None else field
    s_values = list(range(1, opts['verify']['oracle_s'] + 1))
    fast = counting.mertens_counts(field, s_values)
    slow = counting.mertens_bruteforce(field, s_values)
    mismatches = [s for s, a, b in zip(s_values, fast, slow) if a != b]
    return [_check('oracle', 'mertens_bruteforce', not mismatches, fast[-1],
                   f"mismatch at s = {mismatches}" if mismatches else '')]


def run_checks(opts, groups=CHECK_GROUPS):
    checks = {
        'integrals': check_integrals,
        'metrics': check_metrics,
        'group': check_group,
        'chains': check_chains,
        'oracle': check_oracle,
    }
    results = []
    for group in groups:
        if opts['verbose'] > 0:
            log(f"VERIFYING {group.upper()}")
        results += checks[group](opts)
    return results
