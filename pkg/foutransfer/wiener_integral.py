"""Wiener integrals of deterministic grid integrands and the transfer identities."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .consts import ProcessKind
from .grid import (
	GridFunction,
	IntegrandFunction,
	IntegrandRole,
	cell_weights,
)
from .kernels import FouParams, fbm_covariance
from .simulation import Path, expect_process
from .transfer_ops import (
	apply_K_star,
	apply_K_star_inv,
	apply_L_star,
	apply_L_star_inv,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WienerIntegralResult:
	value: float
	variance_estimate: float | None = None
	role: IntegrandRole = IntegrandRole.BM


def _role_of(f: GridFunction) -> IntegrandRole:
	return f.role if isinstance(f, IntegrandFunction) else IntegrandRole.BM


def integrate(f: GridFunction, x: Path) -> WienerIntegralResult:
	"""Left-point sum of f against the increments of x.

	End cells where f follows a power law use the fitted cell mean instead
	of the left-point value.
	"""
	f.grid.check_same(x.grid)
	value = float(cell_weights(f) @ x.increments)
	return WienerIntegralResult(value, role=_role_of(f))


def integrate_by_parts(f: GridFunction, x: Path) -> WienerIntegralResult:
	"""f(T) X_T - f(0) X_0 - int_0^T X_t f'(t) dt for differentiable f."""
	f.grid.check_same(x.grid)
	t = f.grid.points
	derivative = np.gradient(f.values, t)
	value = (
		f.values[-1] * x.values[-1]
		- f.values[0] * x.values[0]
		- trapezoid(x.values * derivative, t)
	)
	return WienerIntegralResult(float(value), role=_role_of(f))


def l2_norm_squared(f: GridFunction) -> float:
	"""int_0^T f(t)^2 dt, trapezoidal except in power-law end cells."""
	if isinstance(f, IntegrandFunction):
		return float(np.sum(f.cell_square_integrals()))
	return float(trapezoid(f.values**2, f.grid.points))


def gram_form_variance(f: GridFunction, covariance: np.ndarray) -> float:
	"""Variance of the left-point sum of f against a process whose
	covariance on the grid points is given."""
	increments = np.diff(np.diff(covariance, axis=0), axis=1)
	weights = f.values[:-1]
	return float(weights @ increments @ weights)


def fbm_integral_variance(g: GridFunction, hurst: float) -> float:
	t = g.grid.points
	return gram_form_variance(
		g, fbm_covariance(hurst, t[:, None], t[None, :])
	)


def transfer_integral_to_bm(
	g: GridFunction, params: FouParams, w: Path
) -> WienerIntegralResult:
	"""int g dU computed as int (L* g) dW on the generating Brownian motion."""
	expect_process(w, ProcessKind.BM)
	transferred = apply_L_star(g, params)
	return WienerIntegralResult(
		integrate(transferred, w).value,
		l2_norm_squared(transferred),
		IntegrandRole.FOU,
	)


def transfer_integral_to_fou(
	f: GridFunction, params: FouParams, u: Path
) -> WienerIntegralResult:
	"""int f dW computed as int ((L*)^-1 f) dU."""
	expect_process(u, ProcessKind.FOU)
	transferred = apply_L_star_inv(f, params)
	return WienerIntegralResult(
		integrate(transferred, u).value, l2_norm_squared(f), IntegrandRole.BM
	)


def transfer_integral_fbm_to_bm(
	g: GridFunction, hurst: float, w: Path
) -> WienerIntegralResult:
	"""int g dB^H computed as int (K* g) dW."""
	expect_process(w, ProcessKind.BM)
	transferred = apply_K_star(g, hurst)
	return WienerIntegralResult(
		integrate(transferred, w).value,
		l2_norm_squared(transferred),
		IntegrandRole.FBM,
	)


def transfer_integral_bm_to_fbm(
	f: GridFunction, hurst: float, b: Path
) -> WienerIntegralResult:
	"""int f dW computed as int ((K*)^-1 f) dB^H."""
	expect_process(b, ProcessKind.FBM)
	transferred = apply_K_star_inv(f, hurst)
	return WienerIntegralResult(
		integrate(transferred, b).value, l2_norm_squared(f), IntegrandRole.BM
	)
