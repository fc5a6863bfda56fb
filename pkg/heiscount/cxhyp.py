from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma, factorial

from heiscount.exceptions import DegenerateGeometryException, QuadratureException
from heiscount.heis import HeisPt
from heiscount.quadint import QuadInt


@dataclass(frozen=True)
class SiegelPt:
    """
    Horospherical coordinates (zeta, u, t) of complex hyperbolic 2-space, t > 0
    """
    zeta: complex
    u: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DegenerateGeometryException(f"Height t = {self.t} is not positive")

    def to_w(self):
        return siegel_to_w(self.zeta, self.u, self.t)


def siegel_to_w(zeta, u, t=0.0):
    return (abs(zeta) ** 2 + t - 1j * u) / 2, zeta


def siegel_from_w(w0, w) -> SiegelPt:
    return SiegelPt(complex(w), float(-2 * np.imag(w0)), float(2 * np.real(w0) - abs(w) ** 2))


def _coords(p):
    if isinstance(p, SiegelPt):
        return p.zeta, p.u, p.t
    return p.zeta, p.u, 0.0


def cygan_siegel(x, y) -> float:
    zx, ux, tx = _coords(x)
    zy, uy, ty = _coords(y)
    val = abs(zx - zy) ** 2 + abs(tx - ty) + 1j * (ux - uy + 2 * (zx * np.conj(zy)).imag)
    return math.sqrt(abs(val))


def busemann_inf(x: SiegelPt, y: SiegelPt) -> float:
    return 0.5 * math.log(y.t / x.t)


def busemann(xi: HeisPt, x: SiegelPt, y: SiegelPt) -> float:
    dx = cygan_siegel(x, xi)
    dy = cygan_siegel(y, xi)
    if dx == 0 or dy == 0:
        raise DegenerateGeometryException("Busemann function at distance zero from its boundary point")
    return 0.5 * math.log(y.t * dx ** 4 / (x.t * dy ** 4))


def siegel_involution(p: SiegelPt) -> SiegelPt:
    w0, w = p.to_w()
    if w0 == 0:
        raise DegenerateGeometryException("The involution is undefined at w0 = 0")
    return siegel_from_w(1 / w0, w / w0)


def project_to_vertical_geodesic(p: HeisPt) -> SiegelPt:
    if p.zeta == 0 and p.u == 0:
        raise DegenerateGeometryException("The origin is an endpoint of the vertical geodesic")
    return SiegelPt(0j, 0.0, math.hypot(abs(p.zeta) ** 2, p.u))


def cygan_second_at_origin(w0, w) -> float:
    # d''(p, 0)^2 = 4|w0|^2 / (2|w0| + |w|^2) for the boundary point p = (w0, w)
    return math.sqrt(4 * abs(w0) ** 2 / (2 * abs(w0) + abs(w) ** 2))


def horoball_gap(s) -> float:
    if s < 1:
        raise DegenerateGeometryException(f"Horoball height {s} is below 1")
    return 0.5 * math.log(s)


def common_perp_length(c_g: QuadInt) -> float:
    if not c_g:
        raise DegenerateGeometryException("c_g = 0: the element fixes infinity and the horoballs are not disjoint")
    return 0.5 * math.log(c_g.norm()) - math.log(2)


def chain_perp_length(diam) -> float:
    if not diam > 0:
        raise DegenerateGeometryException(f"Chain diameter {diam} is not positive")
    return -math.log(diam / 2)


def cubic_perp_length(complexity) -> float:
    if not complexity > 0:
        raise DegenerateGeometryException(f"Complexity {complexity} is not positive")
    return math.log(math.sqrt(2) * complexity)


GeomConstants = namedtuple('GeomConstants', [
    'n',
    'c_horo_horo', 'c_horo_geod', 'c_horo_cxgeod',
    'bowen_margulis', 'skin_horoball', 'skin_geodesic', 'skin_cxgeodesic',
    'sphere_volume', 'patterson_ratio',
])


def geometric_constants(n) -> GeomConstants:
    if n < 2:
        raise ValueError(f"Complex hyperbolic dimension n = {n} must be at least 2")
    fn = math.factorial
    bm = (2 * n - 1) * math.pi ** n / (2 ** (2 * n - 3) * fn(n - 1))
    return GeomConstants(
        n=n,
        c_horo_horo=4 ** n * fn(n) / ((2 * n - 1) * math.pi ** n),
        c_horo_geod=4 ** n * fn(n) ** 2 / (fn(2 * n) * (2 * n - 1) * math.pi),
        c_horo_cxgeod=4 * (n - 1) / ((2 * n - 1) * math.pi),
        bowen_margulis=bm,
        skin_horoball=4.0 * n,
        skin_geodesic=2 * math.pi ** (n - 1) * fn(n) / fn(2 * n - 1),
        skin_cxgeodesic=math.pi ** (n - 1) / (4 ** (n - 2) * fn(n - 2)),
        sphere_volume=2 * math.pi ** n / fn(n - 1),
        patterson_ratio=(2 * n - 1) / 2 ** (2 * n - 1),
    )


QuadratureCheck = namedtuple('QuadratureCheck', ['numeric', 'closed', 'abserr', 'displayed'], defaults=[None])


def _quadrature_opts(opts):
    if opts is None:
        opts = {}
    return opts.get('epsabs', 1e-12), opts.get('epsrel', 1e-11), opts.get('limit', 200)


def mu_integral_closed(n):
    # sqrt(pi) (n-2)! Gamma(n - 1/2) / (2n-2)!
    return math.pi / (4 ** (n - 1) * (n - 1))


def mu_integral_displayed(n):
    # The value with Gamma(n + 1/2) in place of Gamma(n - 1/2); larger by n - 1/2
    return (2 * n - 1) * math.pi / (2 ** (2 * n - 1) * (n - 1))


def verify_mu_integral(n, opts=None, tol=1e-6) -> QuadratureCheck:
    if n not in (2, 3, 4):
        raise ValueError(f"n = {n} outside the supported range 2..4")
    epsabs, epsrel, _ = _quadrature_opts(opts)

    def integrand(r, s):
        return 2 * s ** (n - 2) / ((s + 1) ** 2 + r ** 2) ** n

    numeric, abserr = integrate.dblquad(integrand, 0, np.inf, 0, np.inf, epsabs=epsabs, epsrel=epsrel)
    if not abserr < tol:
        raise QuadratureException(f"mu integral for n = {n} reached only abserr = {abserr}", abserr=abserr)
    return QuadratureCheck(numeric, mu_integral_closed(n), abserr, mu_integral_displayed(n))


def cprime_closed(n):
    return 2.0 ** (1 - n) * math.sqrt(math.pi) * float(factorial(n, exact=True)) / ((n - 1) * gamma(n + 0.5))


def verify_cprime(n, opts=None, tol=1e-9) -> QuadratureCheck:
    if n not in (2, 3, 4):
        raise ValueError(f"n = {n} outside the supported range 2..4")
    epsabs, epsrel, limit = _quadrature_opts(opts)

    def integrand(theta):
        c = np.cos(theta)
        return c ** (n - 2) / (1 + c) ** n

    numeric, abserr = integrate.quad(integrand, -np.pi / 2, np.pi / 2, epsabs=epsabs, epsrel=epsrel, limit=limit)
    if not abserr < tol:
        raise QuadratureException(f"c'_{n} quadrature reached only abserr = {abserr}", abserr=abserr)
    return QuadratureCheck(numeric, cprime_closed(n), abserr)


def verify_horoball_volume(n, opts=None) -> QuadratureCheck:
    """
    Horosphere volume over horoball volume for a unit patch of the boundary of H_1
    """
    epsabs, epsrel, limit = _quadrature_opts(opts)
    ball, abserr = integrate.quad(lambda t: 1 / (4 * t ** (n + 1)), 1, np.inf,
                                  epsabs=epsabs, epsrel=epsrel, limit=limit)
    sphere = 0.5
    return QuadratureCheck(sphere / ball, 2.0 * n, abserr)


def chart_F(x):
    """
    (Re xi, Im xi, r, s) -> (Re zeta, Im zeta, u, t), the geodesic chart at the boundary point (0, 0)
    """
    xi = complex(x[0], x[1])
    r, s = x[2], x[3]
    e = math.exp(2 * s)
    h = abs(xi) ** 2 - 1j * r
    den = 1 + h * e
    zeta = xi / den
    u = -(h / den).imag
    t = e * (abs(xi) ** 4 + r ** 2) / abs(den) ** 2
    return np.array([zeta.real, zeta.imag, u, t])


def jacobian_fd(f, x0, step=1e-5):
    x0 = np.asarray(x0, dtype=np.float64)

    def central(h):
        jac = np.empty((len(f(x0)), len(x0)))
        for i in range(len(x0)):
            e = np.zeros_like(x0)
            e[i] = h
            jac[:, i] = (f(x0 + e) - f(x0 - e)) / (2 * h)
        return jac

    # one Richardson level removes the h^2 term
    return (4 * central(step / 2) - central(step)) / 3


def jacobian_of_F(point=(0.0, 0.0, 1.0, 0.0), method='fd', step=1e-5):
    """
    Jacobian matrix of chart_F at point and its determinant
    """
    if method == 'fd':
        jac = jacobian_fd(chart_F, point, step=step)
    elif method == 'jax':
        from heiscount import cxhyp_ag
        jac = cxhyp_ag.chart_F_jacobian(point)
    else:
        raise ValueError(f"Unknown jacobian method {method}")
    return jac, float(np.linalg.det(jac))
