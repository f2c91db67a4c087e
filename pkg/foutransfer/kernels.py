"""Volterra kernels linking Brownian motion, fBm and the fOU process.

Pointwise kernels use the hypergeometric closed forms of the
Molchan-Golosov kernel and its inverse, written with the argument
1 - s/t in [0, 1). The grid discretization freezes the slowly varying part
of each kernel at the cell midpoint and integrates the leading power law of
the cells touching the diagonal and the origin in closed form. Diagonal
cells of the inverse are reciprocals of the forward ones, so each new
increment is recovered exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.special as sp
from scipy.integrate import quad

from .config import conf
from .consts import KernelRole
from .errors import KernelSingularityError, ParameterError
from .grid import Grid
from .special_fn import gamma

log = logging.getLogger(__name__)


def quad_limit() -> int:
	return conf().numerics.quad_limit


@dataclass(frozen=True)
class FouParams:
	theta: float
	sigma: float
	hurst: float

	def __post_init__(self):
		if not (math.isfinite(self.theta) and self.theta > 0):
			raise ParameterError("theta", "theta must be positive")
		if not (math.isfinite(self.sigma) and self.sigma > 0):
			raise ParameterError("sigma", "sigma must be positive")
		check_hurst(self.hurst)


def check_hurst(hurst: float) -> float:
	if not (math.isfinite(hurst) and 0 < hurst < 1):
		raise ParameterError("hurst", "hurst must lie in (0,1)")
	return float(hurst)


def _hurst_of(params: FouParams | float) -> float:
	if isinstance(params, FouParams):
		return params.hurst
	return check_hurst(params)


def fbm_covariance(hurst: float, t, s):
	"""R_H(t,s) = (t^2H + s^2H - |t-s|^2H) / 2"""
	two_h = 2 * check_hurst(hurst)
	t, s = np.asarray(t, dtype=float), np.asarray(s, dtype=float)
	return 0.5 * (
		np.abs(t) ** two_h + np.abs(s) ** two_h - np.abs(t - s) ** two_h
	)


def normalizing_constant(hurst: float) -> float:
	"""c_H = sqrt(2H Gamma(3/2-H) / (Gamma(H+1/2) Gamma(2-2H)))"""
	hurst = check_hurst(hurst)
	return math.sqrt(
		2
		* hurst
		* gamma(1.5 - hurst)
		/ (gamma(hurst + 0.5) * gamma(2 - 2 * hurst))
	)


def operator_constant(hurst: float) -> float:
	"""Constant in front of the fractional-operator forms of K and K*."""
	return normalizing_constant(hurst) * gamma(hurst + 0.5)


def _check_support(hurst: float, t: np.ndarray, s: np.ndarray) -> np.ndarray:
	inside = s < t
	if hurst != 0.5 and np.any(inside & (s <= 0)):
		raise KernelSingularityError(
			"kernel evaluated at s = 0 where it is singular"
		)
	return inside


def _k_regular(hurst: float, t, s):
	"""Smooth factor of K_H(t,s) = (t-s)^(H-1/2) * _k_regular(t,s)."""
	return (
		normalizing_constant(hurst)
		* (t / s) ** (0.5 - hurst)
		* sp.hyp2f1(hurst - 0.5, 2 * hurst, hurst + 0.5, 1 - s / t)
	)


def _k_inv_regular(hurst: float, t, s):
	"""Smooth factor of K_H^-1(t,s) = (t-s)^(1/2-H) * _k_inv_regular(t,s)."""
	return (
		(t / s) ** (hurst - 0.5)
		* sp.hyp2f1(0.5 - hurst, 1.0, 1.5 - hurst, 1 - s / t)
		/ (operator_constant(hurst) * gamma(1.5 - hurst))
	)


def _evaluate(hurst: float, t, s, regular, exponent: float):
	t, s = np.broadcast_arrays(
		np.asarray(t, dtype=float), np.asarray(s, dtype=float)
	)
	inside = _check_support(hurst, t, s)
	values = np.zeros(t.shape)
	if hurst == 0.5:
		values[inside] = 1.0
	elif np.any(inside):
		ti, si = t[inside], s[inside]
		values[inside] = (ti - si) ** exponent * regular(hurst, ti, si)
	return values if values.ndim else float(values)


def kernel_K(hurst: float, t, s):
	"""Molchan-Golosov kernel K_H(t,s), zero for s >= t."""
	hurst = check_hurst(hurst)
	return _evaluate(hurst, t, s, _k_regular, hurst - 0.5)


def kernel_K_inv(hurst: float, t, s):
	"""Inverse kernel K_H^-1(t,s) turning fBm increments back into W."""
	hurst = check_hurst(hurst)
	return _evaluate(hurst, t, s, _k_inv_regular, 0.5 - hurst)


def molchan_golosov_branch(hurst: float, t: float, s: float) -> float:
	"""K_H(t,s) from its branch integrals, by algebraic-weight quadrature."""
	hurst = check_hurst(hurst)
	if s >= t:
		return 0.0
	if hurst == 0.5:
		return 1.0
	if s <= 0:
		raise KernelSingularityError("kernel evaluated at s = 0")
	c_h = normalizing_constant(hurst)
	if hurst > 0.5:
		integral, _ = quad(
			lambda u: u ** (hurst - 0.5),
			s,
			t,
			weight="alg",
			wvar=(hurst - 1.5, 0.0),
			limit=quad_limit(),
		)
		return c_h * (hurst - 0.5) * s ** (0.5 - hurst) * integral
	integral, _ = quad(
		lambda u: u ** (hurst - 1.5),
		s,
		t,
		weight="alg",
		wvar=(hurst - 0.5, 0.0),
		limit=quad_limit(),
	)
	return c_h * (
		(t / s) ** (hurst - 0.5) * (t - s) ** (hurst - 0.5)
		- (hurst - 0.5) * s ** (0.5 - hurst) * integral
	)


def inverse_branch(hurst: float, t: float, s: float) -> float:
	"""K_H^-1(t,s) for H < 1/2 as a plain fractional integral."""
	hurst = check_hurst(hurst)
	if hurst >= 0.5:
		raise ParameterError("hurst", "the integral branch needs hurst < 1/2")
	if s >= t:
		return 0.0
	integral, _ = quad(
		lambda u: u ** (hurst - 0.5),
		s,
		t,
		weight="alg",
		wvar=(-0.5 - hurst, 0.0),
		limit=quad_limit(),
	)
	return (
		s ** (0.5 - hurst)
		* integral
		/ (operator_constant(hurst) * gamma(0.5 - hurst))
	)


def _exp_integral(theta: float, start, length):
	"""int_start^{start+length} e^(theta w) dw"""
	return np.exp(theta * start) * np.expm1(theta * length) / theta


def _power_mean_factor(exponent: float) -> float:
	"""Cell mean of x^p over [0, h] divided by its midpoint value."""
	return 2.0**exponent / (1.0 + exponent)


def exponential_kernel_integral(
	hurst: float, theta: float, grid: Grid, anchors: np.ndarray
) -> np.ndarray:
	"""J[i, j] = int_{a_j}^{t_i} K_H(w, a_j) e^(theta w) dw, zero if t_i <= a_j."""
	anchors = np.asarray(anchors, dtype=float)
	n, step = grid.steps, grid.step
	cells = np.clip(
		np.floor(anchors / step + 1e-9).astype(int), 0, grid.steps - 1
	)
	partial = (cells + 1) * step - anchors
	first = (
		kernel_K(hurst, anchors + partial / 2, anchors)
		* _power_mean_factor(hurst - 0.5)
		* _exp_integral(theta, anchors, partial)
	)
	starts = grid.points[:n]
	full = kernel_K(
		hurst, grid.midpoints[:, None], anchors[None, :]
	) * _exp_integral(theta, starts, step)[:, None]
	full[np.arange(n)[:, None] <= cells[None, :]] = 0.0
	cumulative = np.vstack((np.zeros(len(anchors)), np.cumsum(full, axis=0)))
	reached = np.arange(n + 1)[:, None] > cells[None, :]
	return np.where(reached, first[None, :] + cumulative, 0.0)


@lru_cache(maxsize=16)
def midpoint_exponential_integral(params: FouParams, grid: Grid) -> np.ndarray:
	log.debug(f"Computing midpoint exponential integrals for {params}")
	table = exponential_kernel_integral(
		params.hurst, params.theta, grid, grid.midpoints
	)
	table.flags.writeable = False
	return table


@lru_cache(maxsize=16)
def gridpoint_exponential_integral(params: FouParams, grid: Grid) -> np.ndarray:
	"""Inner map J(t_k, t_i) with grid-point anchors.

	Column 0 is only filled for H = 1/2, where the kernel is regular at 0.
	"""
	log.debug(f"Computing grid-point exponential integrals for {params}")
	first = 0 if params.hurst == 0.5 else 1
	table = np.zeros((grid.steps + 1, grid.steps + 1))
	table[:, first : grid.steps] = exponential_kernel_integral(
		params.hurst, params.theta, grid, grid.points[first : grid.steps]
	)
	table.flags.writeable = False
	return table


def _l_scalar(params: FouParams, t: float, s: float) -> float:
	if s >= t:
		return 0.0
	hurst, theta, sigma = params.hurst, params.theta, params.sigma
	if hurst == 0.5:
		return sigma * math.exp(-theta * (t - s))
	if s <= 0:
		raise KernelSingularityError("kernel evaluated at s = 0")
	inner, _ = quad(
		lambda w: _k_regular(hurst, w, s) * math.exp(theta * (w - t)),
		s,
		t,
		weight="alg",
		wvar=(hurst - 0.5, 0.0),
		limit=quad_limit(),
	)
	return sigma * kernel_K(hurst, t, s) - theta * sigma * inner


_l_vectorized = np.vectorize(_l_scalar, otypes=[float], excluded={0})


def kernel_L(params: FouParams, t, s):
	"""L(t,s) = sigma K_H(t,s) - theta sigma e^-theta t int_s^t K_H(u,s) e^theta u du"""
	values = _l_vectorized(params, t, s)
	return values if values.ndim else float(values)


def _l_inv_scalar(params: FouParams, t: float, s: float) -> float:
	if s >= t:
		return 0.0
	hurst, theta, sigma = params.hurst, params.theta, params.sigma
	if hurst == 0.5:
		return (1.0 + theta * (t - s)) / sigma
	if s <= 0:
		raise KernelSingularityError("kernel evaluated at s = 0")
	area, _ = quad(
		lambda r: _k_inv_regular(hurst, t, r),
		s,
		t,
		weight="alg",
		wvar=(0.0, 0.5 - hurst),
		limit=quad_limit(),
	)
	return (kernel_K_inv(hurst, t, s) + theta * area) / sigma


_l_inv_vectorized = np.vectorize(_l_inv_scalar, otypes=[float], excluded={0})


def kernel_L_inv(params: FouParams, t, s):
	"""L^-1(t,s) = [K_H^-1(t,s) + theta int_s^t K_H^-1(t,r) dr] / sigma

	From W_t = int K_H^-1(t,r) dB^H_r with dB^H = (dU + theta U dr) / sigma.
	"""
	values = _l_inv_vectorized(params, t, s)
	return values if values.ndim else float(values)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
	"""Row i applied to increments dX approximates int_0^t_i k(t_i, s) dX_s."""

	grid: Grid
	entries: np.ndarray
	role: KernelRole
	params: FouParams | float

	def apply(self, increments: np.ndarray) -> np.ndarray:
		return self.entries @ increments

	def csv_rows(self):
		"""Nonzero entries as (i, j, value), row-major."""
		rows, cols = np.nonzero(self.entries)
		for i, j in zip(rows, cols):
			yield int(i), int(j), float(self.entries[i, j])


def _cell_corrections(grid: Grid, diagonal: float, origin: float):
	n = grid.steps
	rows = np.arange(n + 1)[:, None]
	cols = np.arange(n)[None, :]
	diagonal_factors = np.where(
		cols == rows - 1, _power_mean_factor(diagonal), 1.0
	)
	origin_factors = np.where(cols == 0, _power_mean_factor(origin), 1.0)
	return diagonal_factors, np.broadcast_to(origin_factors, (n + 1, n))


def _forward_entries(hurst: float, grid: Grid):
	t = grid.points[:, None]
	s = grid.midpoints[None, :]
	diagonal_factors, origin_factors = _cell_corrections(
		grid, hurst - 0.5, -abs(hurst - 0.5)
	)
	entries = kernel_K(hurst, t, s) * diagonal_factors * origin_factors
	# first cell carries both singularities; Var B_{t_1} = t_1^2H fixes it
	entries[1, 0] = grid.step ** (hurst - 0.5)
	return entries, origin_factors


def _inverse_entries(hurst: float, grid: Grid) -> np.ndarray:
	t = grid.points[:, None]
	s = grid.midpoints[None, :]
	diagonal_factors, origin_factors = _cell_corrections(
		grid, 0.5 - hurst, 0.5 - hurst
	)
	entries = kernel_K_inv(hurst, t, s) * diagonal_factors * origin_factors
	# the newest increment must come back exactly: D^Kinv[k,k] D^K[k,k] = 1
	forward = discretize(KernelRole.K, hurst, grid).entries
	cells = np.arange(grid.steps)
	entries[cells + 1, cells] = 1.0 / forward[cells + 1, cells]
	return entries


def _langevin_inverse(
	entries: np.ndarray, params: FouParams, grid: Grid
) -> np.ndarray:
	"""Compose a K^-1 matrix with dB^H = (dU + theta U dt) / sigma, U
	integrated by the trapezoidal rule."""
	suffix = np.cumsum(entries[:, ::-1], axis=1)[:, ::-1]
	return (
		entries + params.theta * grid.step * (suffix - 0.5 * entries)
	) / params.sigma


@lru_cache(maxsize=32)
def discretize(
	role: KernelRole, params: FouParams | float, grid: Grid
) -> KernelMatrix:
	"""Discretize a kernel into an (n+1) x n increments-to-values matrix."""
	hurst = _hurst_of(params)
	if role in (KernelRole.L, KernelRole.L_INV) and not isinstance(
		params, FouParams
	):
		raise ParameterError("params", f"role {role.value} needs FouParams")
	log.debug(f"Discretizing {role.value} kernel for {params} on {grid}")
	match role:
		case KernelRole.K:
			entries, _ = _forward_entries(hurst, grid)
		case KernelRole.L:
			forward, origin_factors = _forward_entries(hurst, grid)
			inner = midpoint_exponential_integral(params, grid)
			decay = np.exp(-params.theta * grid.points)[:, None]
			entries = params.sigma * (
				forward - params.theta * decay * inner * origin_factors
			)
		case KernelRole.K_INV:
			entries = _inverse_entries(hurst, grid)
		case KernelRole.L_INV:
			entries = _langevin_inverse(
				_inverse_entries(hurst, grid), params, grid
			)
	entries.flags.writeable = False
	return KernelMatrix(grid, entries, role, params)
