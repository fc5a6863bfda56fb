# Everything here is traced by jax and has to stay differentiable
# - Do not import functions that are not compatible with jax
# - jax numpy used here, in double precision
# - No in-place array assignment (x[i] = ...), build results with np.stack
# - Keep complex arithmetic explicit in real and imaginary parts

import numpy
import jax
from jax import jit, jacfwd as jacobian  # jacfwd is recommended for 'tall' Jacobians, jacrev for 'wide'
import jax.numpy as np

jax.config.update("jax_enable_x64", True)


def chart_F(x):
    # (Re xi, Im xi, r, s) -> (Re zeta, Im zeta, u, t)
    xr, xi, r, s = x[0], x[1], x[2], x[3]
    e = np.exp(2 * s)
    n2 = xr ** 2 + xi ** 2

    # den = 1 + (|xi|^2 - i r) e^{2s}
    den_r = 1 + n2 * e
    den_i = -r * e
    den_abs2 = den_r ** 2 + den_i ** 2

    zeta_r = (xr * den_r + xi * den_i) / den_abs2
    zeta_i = (xi * den_r - xr * den_i) / den_abs2

    # (|xi|^2 - i r) / den
    q_i = (-r * den_r - n2 * den_i) / den_abs2
    u = -q_i
    t = e * (n2 ** 2 + r ** 2) / den_abs2

    return np.stack([zeta_r, zeta_i, u, t])


_chart_F_jacobian = jit(jacobian(chart_F))


def chart_F_jacobian(point):
    return numpy.asarray(_chart_F_jacobian(np.asarray(point, dtype=np.float64)), dtype=numpy.float64)
