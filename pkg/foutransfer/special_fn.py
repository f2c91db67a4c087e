"""Gamma/Beta functions and right-sided Riemann-Liouville operators.

Grid functions are treated as piecewise linear between grid points and the
power-law weights (s - t)^(alpha - 1) are integrated in closed form against
that interpolant, cell by cell. On a uniform grid the resulting weights only
depend on the cell offset, so each operator is a cached upper-triangular
matrix acting on the grid values.
"""

import logging
import math
from functools import lru_cache

import numpy as np
import scipy.special as sp

from .errors import DomainError
from .grid import Grid, GridFunction

log = logging.getLogger(__name__)


def gamma(x: float) -> float:
	x = float(x)
	if not (math.isfinite(x) and x > 0):
		raise DomainError(f"gamma is only defined here for x > 0, got {x}")
	return float(sp.gamma(x))


def beta(a: float, b: float) -> float:
	a, b = float(a), float(b)
	if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0):
		raise DomainError(f"beta requires positive arguments, got ({a}, {b})")
	return math.exp(sp.gammaln(a) + sp.gammaln(b) - sp.gammaln(a + b))


def _check_alpha(alpha: float) -> float:
	alpha = float(alpha)
	if not 0 < alpha < 1:
		raise DomainError(f"alpha must lie in (0,1), got {alpha}")
	return alpha


@lru_cache(maxsize=32)
def fractional_integral_matrix(grid: Grid, alpha: float) -> np.ndarray:
	"""Weights W with I^alpha_{T-}[g](t_i) = (W @ g)[i]."""
	alpha = _check_alpha(alpha)
	n = grid.steps
	log.debug(f"Building I^{alpha} matrix for {grid}")
	m = np.arange(n, dtype=float)
	power = (m + 1) ** alpha - m**alpha
	a_weights = power / alpha
	b_weights = ((m + 1) ** (alpha + 1) - m ** (alpha + 1)) / (
		alpha + 1
	) - m * a_weights
	scale = grid.step**alpha / sp.gamma(alpha)
	matrix = np.zeros((n + 1, n + 1))
	for offset in range(n):
		rows = np.arange(n - offset)
		matrix[rows, rows + offset] += scale * (
			a_weights[offset] - b_weights[offset]
		)
		matrix[rows, rows + offset + 1] += scale * b_weights[offset]
	matrix.flags.writeable = False
	return matrix


@lru_cache(maxsize=32)
def fractional_derivative_matrix(grid: Grid, alpha: float) -> np.ndarray:
	"""Weights D with I^{-alpha}_{T-}[g](t_i) = (D @ g)[i].

	Uses the Marchaud form
	(1/Gamma(1-alpha)) [g(t)(T-t)^-alpha + alpha int_t^T (g(t)-g(s))(s-t)^(-alpha-1) ds].
	The value at T is taken from the last interior point.
	"""
	alpha = _check_alpha(alpha)
	n = grid.steps
	log.debug(f"Building I^-{alpha} matrix for {grid}")
	scale = grid.step**-alpha
	m = np.arange(1, n, dtype=float)
	tail = m**-alpha - (m + 1) ** -alpha
	e_weights = np.concatenate(([0.0], scale * tail / alpha))
	f_weights = np.concatenate(
		(
			[scale / (1 - alpha)],
			scale
			* (
				((m + 1) ** (1 - alpha) - m ** (1 - alpha)) / (1 - alpha)
				- m * tail / alpha
			),
		)
	)
	matrix = np.zeros((n + 1, n + 1))
	for offset in range(n):
		rows = np.arange(n - offset)
		matrix[rows, rows] += alpha * e_weights[offset]
		matrix[rows, rows + offset] += alpha * (
			f_weights[offset] - e_weights[offset]
		)
		matrix[rows, rows + offset + 1] -= alpha * f_weights[offset]
	interior = np.arange(n)
	matrix[interior, interior] += (grid.horizon - grid.points[:n]) ** -alpha
	matrix[n] = matrix[n - 1]
	matrix /= sp.gamma(1 - alpha)
	matrix.flags.writeable = False
	return matrix


def frac_integral_right(g: GridFunction, alpha: float) -> GridFunction:
	matrix = fractional_integral_matrix(g.grid, _check_alpha(alpha))
	return GridFunction(g.grid, matrix @ g.values)


def frac_derivative_right(g: GridFunction, alpha: float) -> GridFunction:
	matrix = fractional_derivative_matrix(g.grid, _check_alpha(alpha))
	return GridFunction(g.grid, matrix @ g.values)


def right_operator_matrix(grid: Grid, order: float) -> np.ndarray:
	"""Matrix of I^order_{T-} for a signed order in (-1, 1)."""
	if order > 0:
		return fractional_integral_matrix(grid, order)
	if order < 0:
		return fractional_derivative_matrix(grid, -order)
	return np.eye(grid.steps + 1)


def riemann_liouville_right(g: GridFunction, order: float) -> GridFunction:
	if not -1 < order < 1:
		raise DomainError(f"order must lie in (-1,1), got {order}")
	return GridFunction(g.grid, right_operator_matrix(g.grid, order) @ g.values)
