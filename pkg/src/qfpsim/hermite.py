"""Orthonormal Hermite functions and Gauss-Hermite projection helpers.

The Hermite functions psi_k (eigenfunctions of the number operator) are
evaluated by the stable three-term recurrence; Gauss-Hermite weights are
folded with the exp(x^2) factor analytically, so the "total weights" stay
representable at high node counts where the raw weights underflow.
"""

import numpy as np
from numpy.polynomial.hermite import hermgauss


def hermite_functions(nmax: int, x):
    """psi_0..psi_{nmax-1} at points x, shape (nmax, len(x)).

    psi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) exp(-x^2/2), via
    psi_k = sqrt(2/k) x psi_{k-1} - sqrt((k-1)/k) psi_{k-2}.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((nmax,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(2, nmax):
        out[k] = np.sqrt(2.0 / k) * x * out[k - 1] - np.sqrt((k - 1) / k) * out[k - 2]
    return out


def gauss_hermite_total(m: int):
    """Nodes x_i and total weights W_i = w_i exp(x_i^2) for m-point quadrature.

    W_i = 1/(m psi_{m-1}(x_i)^2) avoids the w_i underflow; with these,
    integral f(x) dx ~= sum_i W_i f(x_i) for f decaying like the Hermite
    functions.
    """
    x, _ = hermgauss(m)
    psi = hermite_functions(m, x)
    return x, 1.0 / (m * psi[m - 1] ** 2)


def project_kernel(kernel_fn, n: int, quad_nodes: int):
    """Fock matrix rho_ij = integral psi_i(x) K(x, y) psi_j(y) dx dy.

    kernel_fn(x_col, y_row) must broadcast over a meshgrid.
    """
    x, w = gauss_hermite_total(quad_nodes)
    psi = hermite_functions(n, x)
    k = kernel_fn(x[:, None], x[None, :])
    b = psi * w[None, :]
    return b @ k @ b.T


def project_wavefunction(fn, n: int, quad_nodes: int):
    """Fock coefficients c_i = integral psi_i(x) f(x) dx."""
    x, w = gauss_hermite_total(quad_nodes)
    psi = hermite_functions(n, x)
    return (psi * w[None, :]) @ fn(x)
