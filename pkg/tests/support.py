"""Shared oracles and random-field generators for the test suite.

The manufactured 1D problem uses phi*(x) = eps cos(2 pi x) with identity
base, for which u'' = 1 - 4 pi^2 eps cos(2 pi x) and the right-hand side
A = (1/u'')'' has the closed form implemented in `manufactured_rhs_values`
(hand-differentiated; cross-checked against sympy in test_potential).
"""

from __future__ import annotations

from itertools import product

import numpy as np

from abreu import (
    Potential,
    QuadraticBase,
    ScalarField,
    convexity_margin,
    make_grid,
)

EPS = 0.01
DELTA = 4.0 * np.pi**2 * EPS

# frozen sympy values for the manufactured problem (eps = 1/100):
#   A = d^2/dx^2 [ (1 - 4 pi^2 eps cos(2 pi x))^{-1} ]
A_AT_0 = -42.54993728716309
A_AT_EIGHTH = -4.7822071249037332
A_AT_QUARTER = 12.305781677763896
# F_0(eps cos) = -log((1 + sqrt(1 - delta^2)) / 2)
FUNCTIONAL_AT_STAR = 0.0414607993416872
# curvature of the metric psi = eps cos(2 pi x):  S = -(1/4)(1/v'')(log v'')''
S_AT_0 = -10.637484321790772
S_AT_QUARTER = 1.538222709720487


def grid1d(n=64):
    return make_grid(1, [n])


def manufactured_phi_values(x, eps=EPS):
    return eps * np.cos(2.0 * np.pi * x)


def manufactured_rhs_values(x, eps=EPS):
    """Closed form of (1/u'')'' for u'' = 1 - 4 pi^2 eps cos(2 pi x)."""
    delta = 4.0 * np.pi**2 * eps
    c = np.cos(2.0 * np.pi * x)
    s = np.sin(2.0 * np.pi * x)
    g = 1.0 / (1.0 - delta * c)
    return -delta * (2.0 * np.pi) ** 2 * g**2 * (c - 2.0 * delta * s**2 * g)


def manufactured_problem(n=64, eps=EPS):
    """(grid, A, phi_star) for the 1D manufactured solve."""
    grid = grid1d(n)
    x = grid.coordinate_arrays()[0]
    rhs = manufactured_rhs_values(x, eps)
    a = ScalarField(grid, rhs - rhs.mean())
    phi_star = ScalarField(grid, manufactured_phi_values(x, eps))
    return grid, a, phi_star


def manufactured_potential(n=64, eps=EPS):
    grid = grid1d(n)
    x = grid.coordinate_arrays()[0]
    return Potential(
        QuadraticBase.identity(1), ScalarField(grid, manufactured_phi_values(x, eps))
    )


def random_band_limited(grid, rng, max_mode=3, amplitude=1.0):
    """Random real trigonometric polynomial with |k|_inf <= max_mode,
    zero mean, normalized to the requested sup amplitude."""
    vals = np.zeros(grid.shape)
    coords = grid.coordinate_arrays()
    for k in product(range(-max_mode, max_mode + 1), repeat=grid.dim):
        if all(kk == 0 for kk in k):
            continue
        phase = 2.0 * np.pi * sum(kk * c for kk, c in zip(k, coords))
        vals += rng.normal() * np.cos(phase) + rng.normal() * np.sin(phase)
    top = np.max(np.abs(vals))
    if top > 0.0:
        vals *= amplitude / top
    return ScalarField(grid, vals - vals.mean())


def random_convex_potential(grid, rng, margin=0.5, max_mode=2):
    """Random potential rescaled so the Hessian margin is exactly `margin`.

    The Hessian is affine in the perturbation, so scaling phi by s moves
    the margin linearly: margin(s phi) = 1 - s (1 - margin(phi)).
    """
    f = random_band_limited(grid, rng, max_mode=max_mode, amplitude=1.0)
    probe = Potential(QuadraticBase.identity(grid.dim), f)
    m = convexity_margin(probe)
    scale = (1.0 - margin) / (1.0 - m) if m < 1.0 else 1.0
    return Potential(
        QuadraticBase.identity(grid.dim), ScalarField(grid, scale * f.values)
    )
