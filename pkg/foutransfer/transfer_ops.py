"""Integrand operators K*, (K*)^-1, L*, (L*)^-1 of the transfer principle.

All four are evaluated from their fractional forms on grid functions. The
results follow a power law at both ends of [0, T] unless H = 1/2; the value
stored at the origin is the mean of that power law over the first cell.
"""

import logging
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .grid import (
	Grid,
	GridFunction,
	IntegrandFunction,
	IntegrandRole,
	power_law_cell_mean,
)
from .kernels import (
	FouParams,
	KernelMatrix,
	check_hurst,
	gridpoint_exponential_integral,
	kernel_K,
	operator_constant,
)
from .special_fn import right_operator_matrix

log = logging.getLogger(__name__)


def _require_finite(g: GridFunction) -> np.ndarray:
	values = np.asarray(g.values, dtype=float)
	if not np.all(np.isfinite(values)):
		raise DomainError("integrand values must be finite")
	return values


def _fill_origin(values: np.ndarray, exponent: float) -> np.ndarray:
	far = values[2] if len(values) > 4 else None
	values[0] = power_law_cell_mean(values[1], far, exponent)
	return values


def _fractional_form(
	g: GridFunction, hurst: float, order: float, constant: float
) -> np.ndarray:
	"""constant * t^(1/2-H) I^order_{T-}[(.)^(H-1/2) g](t) on t_1..t_n."""
	grid = g.grid
	t = grid.points[1:]
	weighted = np.zeros(grid.steps + 1)
	weighted[1:] = t ** (hurst - 0.5) * _require_finite(g)[1:]
	values = right_operator_matrix(grid, order) @ weighted
	values[1:] *= constant * t ** (0.5 - hurst)
	return values


def apply_K_star(g: GridFunction, hurst: float) -> IntegrandFunction:
	"""K*g, turning an fBm integrand into the matching Brownian integrand."""
	hurst = check_hurst(hurst)
	if hurst == 0.5:
		return IntegrandFunction(g.grid, _require_finite(g).copy())
	exponent = -abs(hurst - 0.5)
	values = _fractional_form(
		g, hurst, hurst - 0.5, operator_constant(hurst)
	)
	return IntegrandFunction(
		g.grid,
		_fill_origin(values, exponent),
		IntegrandRole.BM,
		origin_exponent=exponent,
		terminal_exponent=hurst - 0.5,
	)


def apply_K_star_inv(g: GridFunction, hurst: float) -> IntegrandFunction:
	hurst = check_hurst(hurst)
	if hurst == 0.5:
		return IntegrandFunction(
			g.grid, _require_finite(g).copy(), IntegrandRole.FBM
		)
	exponent = 0.5 - hurst
	values = _fractional_form(
		g, hurst, 0.5 - hurst, 1.0 / operator_constant(hurst)
	)
	return IntegrandFunction(
		g.grid,
		_fill_origin(values, exponent),
		IntegrandRole.FBM,
		origin_exponent=exponent,
		terminal_exponent=exponent,
	)


@lru_cache(maxsize=16)
def _l_star_bracket(params: FouParams, grid: Grid) -> np.ndarray:
	"""theta e^(-theta s) int_t^s K(u,t) e^(theta u) du - K(s,t).

	Rows are cell midpoints s, columns grid points t; zero unless s > t.
	"""
	n = grid.steps
	inner = gridpoint_exponential_integral(params, grid)
	inner_mid = 0.5 * (inner[:n] + inner[1:])
	anchors = grid.points if params.hurst == 0.5 else grid.points[1:]
	bracket = np.zeros((n, n + 1))
	first = n + 1 - len(anchors)
	bracket[:, first:] = params.theta * np.exp(
		-params.theta * grid.midpoints
	)[:, None] * inner_mid[:, first:] - kernel_K(
		params.hurst, grid.midpoints[:, None], anchors[None, :]
	)
	bracket[grid.midpoints[:, None] <= grid.points[None, :]] = 0.0
	bracket.flags.writeable = False
	return bracket


def apply_L_star(g: GridFunction, params: FouParams) -> IntegrandFunction:
	"""L*g, turning an fOU integrand into the matching Brownian integrand."""
	grid = g.grid
	n = grid.steps
	theta, sigma = params.theta, params.sigma
	values = _require_finite(g)
	if params.hurst == 0.5:
		fractional = values.copy()
	else:
		fractional = _fractional_form(
			g, params.hurst, params.hurst - 0.5, operator_constant(params.hurst)
		)
	inner = gridpoint_exponential_integral(params, grid)
	boundary = -values * theta * sigma * np.exp(-theta * grid.horizon) * inner[n]
	bracket = _l_star_bracket(params, grid)
	cell_means = 0.5 * (values[:n] + values[1:])
	difference = theta * sigma * grid.step * (
		cell_means @ bracket - values * bracket.sum(axis=0)
	)
	result = sigma * fractional + boundary + difference
	exponent = -abs(params.hurst - 0.5)
	if params.hurst != 0.5:
		_fill_origin(result, exponent)
	return IntegrandFunction(
		grid,
		result,
		IntegrandRole.BM,
		origin_exponent=exponent,
		terminal_exponent=params.hurst - 0.5,
	)


def _tail_integral(h: IntegrandFunction) -> np.ndarray:
	"""int_t^T h(s) ds at every grid point, trapezoidal outside the
	power-law end cells."""
	values, step = h.values, h.grid.step
	cells = 0.5 * step * (values[:-1] + values[1:])
	for cell, near, far, exponent in h.singular_cells():
		cells[cell] = step * power_law_cell_mean(near, far, exponent)
	return np.concatenate((np.cumsum(cells[::-1])[::-1], [0.0]))


def apply_L_star_inv(g: GridFunction, params: FouParams) -> IntegrandFunction:
	"""(L*)^-1 g = [h + theta int_t^T h(s) ds] / sigma with h = (K*)^-1 g.

	Follows from dB^H = (dU + theta U dt) / sigma and int h dB^H = int g dW.
	"""
	h = apply_K_star_inv(g, params.hurst)
	values = (h.values + params.theta * _tail_integral(h)) / params.sigma
	return IntegrandFunction(
		g.grid,
		values,
		IntegrandRole.FOU,
		origin_exponent=h.origin_exponent,
		terminal_exponent=h.terminal_exponent,
	)


def kernel_difference_form(g: GridFunction, matrix: KernelMatrix) -> np.ndarray:
	"""Cell weights c_k = sum_j g(t_j) (A[j+1,k] - A[j,k]).

	For X = A dW the left-point sum of g against X equals sum_k c_k dW_k, the
	discrete counterpart of g(t) k(T,t) + int_t^T [g(s)-g(t)] k(ds,t).
	"""
	g.grid.check_same(matrix.grid)
	n = g.grid.steps
	return g.values[:n] @ np.diff(matrix.entries, axis=0)
