"""Built-in numerical checks behind the verify command.

Each suite returns VerifyCheck records; a check passes when its value does
not exceed its tolerance.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import ToleranceSettings
from .consts import KernelRole, ProcessKind, VerifySuite
from .grid import Grid, GridFunction, indicator
from .kernels import (
	FouParams,
	discretize,
	fbm_covariance,
	kernel_L,
	kernel_L_inv,
)
from .prediction import (
	conditional_mean,
	conditional_mean_weights,
	fou_covariance,
	predict,
)
from .simulation import (
	Path,
	SeedSpec,
	bm_from_fbm,
	bm_from_fou,
	fbm_from_bm,
	fbm_from_fou,
	fou_from_bm,
	fou_from_fbm,
	sample_bm,
	sample_paths,
)
from .transfer_ops import apply_K_star
from .wiener_integral import (
	fbm_integral_variance,
	integrate,
	l2_norm_squared,
	transfer_integral_fbm_to_bm,
	transfer_integral_to_bm,
)

log = logging.getLogger(__name__)

ROUND_TRIP_PATHS = 8
PREDICTION_REALIZATIONS = 100


@dataclass(frozen=True)
class VerifyCheck:
	name: str
	value: float
	tolerance: float

	@property
	def passed(self) -> bool:
		return bool(np.isfinite(self.value) and self.value <= self.tolerance)


@dataclass(frozen=True)
class VerifyContext:
	params: FouParams
	grid: Grid
	master_seed: int
	paths: int = 10_000
	tolerances: ToleranceSettings = field(default_factory=ToleranceSettings)
	workers: int = 1
	batch_size: int = 64

	def brownian(self, index: int) -> Path:
		return sample_bm(self.grid, SeedSpec(self.master_seed, index))


def _sup(values: np.ndarray) -> float:
	return float(np.max(np.abs(values)))


def _test_integrands(grid: Grid) -> dict[str, GridFunction]:
	return {
		"one": GridFunction.from_callable(grid, np.ones_like),
		"t": GridFunction.from_callable(grid, lambda t: t),
		"sin": GridFunction.from_callable(grid, np.sin),
		"indicator": indicator(grid, grid.horizon / 2),
	}


def gram_suite(ctx: VerifyContext) -> list[VerifyCheck]:
	"""Gram matrix of the discretized K against R_H."""
	hurst, grid = ctx.params.hurst, ctx.grid
	entries = discretize(KernelRole.K, hurst, grid).entries
	gram = entries @ entries.T * grid.step
	t = grid.points
	exact = fbm_covariance(hurst, t[:, None], t[None, :])
	scale = float(exact[-1, -1])
	checks = [
		VerifyCheck(
			"gram_max_relative_error",
			_sup(gram - exact) / scale,
			ctx.tolerances.gram_relative,
		)
	]
	if hurst == 0.5:
		checks.append(
			VerifyCheck(
				"gram_bm_reduction",
				_sup(gram - np.minimum(t[:, None], t[None, :])),
				ctx.tolerances.reduction,
			)
		)
	return checks


def _ou_reductions(ctx: VerifyContext) -> list[VerifyCheck]:
	params, grid = ctx.params, ctx.grid
	t = grid.points[1:, None]
	s = grid.midpoints[None, :]
	below = s < t
	lag = np.where(below, t - s, 0.0)
	l_error = np.where(
		below,
		kernel_L(params, t, s) - params.sigma * np.exp(-params.theta * lag),
		0.0,
	)
	l_inv_error = np.where(
		below,
		kernel_L_inv(params, t, s) - (1 + params.theta * lag) / params.sigma,
		0.0,
	)
	return [
		VerifyCheck("L_ou_reduction", _sup(l_error), ctx.tolerances.reduction),
		VerifyCheck(
			"L_inv_ou_reduction", _sup(l_inv_error), ctx.tolerances.reduction
		),
	]


def _relative_error(approx: Path, exact: Path) -> float:
	return _sup(approx.values - exact.values) / _sup(exact.values)


def _round_trip_errors(w: Path, params: FouParams) -> dict[str, float]:
	u = fou_from_bm(w, params)
	b = fbm_from_bm(w, params.hurst)
	return {
		"bm_fou_bm": _relative_error(bm_from_fou(u, params), w),
		"fou_bm_fou": _relative_error(
			fou_from_bm(bm_from_fou(u, params), params), u
		),
		"bm_fbm_bm": _relative_error(bm_from_fbm(b, params.hurst), w),
		"fbm_fou_fbm": _relative_error(
			fbm_from_fou(fou_from_fbm(b, params), params), b
		),
	}


def roundtrip_suite(ctx: VerifyContext) -> list[VerifyCheck]:
	"""Path round trips through the transfer transforms and their refinement."""
	count = min(ctx.paths, ROUND_TRIP_PATHS)
	fine = [
		_round_trip_errors(ctx.brownian(i), ctx.params) for i in range(count)
	]
	checks = [
		VerifyCheck(
			f"roundtrip_{name}_max_relative_error",
			max(errors[name] for errors in fine),
			ctx.tolerances.roundtrip_relative,
		)
		for name in fine[0]
	]
	if ctx.grid.steps % 2 == 0 and ctx.grid.steps >= 8:
		coarse_grid = Grid(ctx.grid.horizon, ctx.grid.steps // 2)
		fine_total = coarse_total = 0.0
		for i in range(count):
			w = ctx.brownian(i)
			coarse = Path(coarse_grid, w.values[::2], ProcessKind.BM)
			u = fou_from_bm(w, ctx.params)
			fine_total += _sup(bm_from_fou(u, ctx.params).values - w.values)
			u_coarse = fou_from_bm(coarse, ctx.params)
			coarse_total += _sup(
				bm_from_fou(u_coarse, ctx.params).values - coarse.values
			)
		# ratio below the threshold fails the check
		ratio = coarse_total / fine_total if fine_total > 0 else np.inf
		checks.append(
			VerifyCheck(
				"roundtrip_refinement_ratio_inverse",
				1.0 / ratio,
				1.0 / ctx.tolerances.refinement_ratio,
			)
		)
	if ctx.params.hurst == 0.5:
		checks.extend(_ou_reductions(ctx))
	return checks


def _variance_z_score(samples: np.ndarray, target: float) -> float:
	squares = samples**2
	standard_error = np.std(squares, ddof=1) / np.sqrt(len(samples))
	return float(abs(np.mean(squares) - target) / standard_error)


def isometry_suite(ctx: VerifyContext) -> list[VerifyCheck]:
	"""Monte Carlo checks of the fBm isometry and the fOU covariance."""
	params, grid = ctx.params, ctx.grid
	fbm_paths = sample_paths(
		ProcessKind.FBM,
		grid,
		params,
		ctx.master_seed,
		ctx.paths,
		ctx.workers,
		ctx.batch_size,
	)
	checks = []
	integrands = _test_integrands(grid)
	for name in ("one", "t"):
		g = integrands[name]
		norm = l2_norm_squared(apply_K_star(g, params.hurst))
		samples = np.array([integrate(g, b).value for b in fbm_paths])
		checks.append(
			VerifyCheck(
				f"isometry_{name}_z_score",
				_variance_z_score(samples, norm),
				ctx.tolerances.monte_carlo_se,
			)
		)
		checks.append(
			VerifyCheck(
				f"isometry_{name}_gram_form_relative_error",
				abs(fbm_integral_variance(g, params.hurst) - norm) / norm,
				ctx.tolerances.gram_relative,
			)
		)
	middle = grid.steps // 2
	products = np.array(
		[
			u.values[middle] * u.values[-1]
			for u in sample_paths(
				ProcessKind.FOU,
				grid,
				params,
				ctx.master_seed,
				ctx.paths,
				ctx.workers,
				ctx.batch_size,
			)
		]
	)
	exact = fou_covariance(params, grid.points[middle], grid.horizon)
	standard_error = np.std(products, ddof=1) / np.sqrt(len(products))
	checks.append(
		VerifyCheck(
			"fou_covariance_z_score",
			float(abs(np.mean(products) - exact) / standard_error),
			ctx.tolerances.monte_carlo_se,
		)
	)
	return checks


def transfer_integral_suite(ctx: VerifyContext) -> list[VerifyCheck]:
	"""Coupled int g dU = int L*g dW and int g dB^H = int K*g dW."""
	params, grid = ctx.params, ctx.grid
	checks = []
	for name, g in _test_integrands(grid).items():
		fou_worst = fbm_worst = 0.0
		for i in range(min(ctx.paths, ROUND_TRIP_PATHS)):
			w = ctx.brownian(i)
			direct = integrate(g, fou_from_bm(w, params)).value
			transferred = transfer_integral_to_bm(g, params, w).value
			fou_worst = max(
				fou_worst, abs(direct - transferred) / (1 + abs(direct))
			)
			direct = integrate(g, fbm_from_bm(w, params.hurst)).value
			transferred = transfer_integral_fbm_to_bm(g, params.hurst, w).value
			fbm_worst = max(
				fbm_worst, abs(direct - transferred) / (1 + abs(direct))
			)
		checks.append(
			VerifyCheck(
				f"transfer_fou_{name}",
				fou_worst,
				ctx.tolerances.transfer_integral,
			)
		)
		checks.append(
			VerifyCheck(
				f"transfer_fbm_{name}",
				fbm_worst,
				ctx.tolerances.transfer_integral,
			)
		)
	return checks


def prediction_suite(ctx: VerifyContext) -> list[VerifyCheck]:
	"""Conditional law against Gaussian conditioning on the grid values."""
	params, grid = ctx.params, ctx.grid
	n = grid.steps
	u = float(grid.points[n // 2])
	targets = grid.points[[round(0.6 * n), round(0.8 * n), n]]
	first = fou_from_bm(ctx.brownian(0), params)
	result = predict(first, params, u, targets, oracle=True)
	oracle = result.oracle
	scale = np.sqrt(np.diag(oracle.covariance))
	weights = conditional_mean_weights(params, grid, u, targets)
	mean_worst = markov_worst = 0.0
	for i in range(min(ctx.paths, PREDICTION_REALIZATIONS)):
		path = first if i == 0 else fou_from_bm(ctx.brownian(i), params)
		mean = conditional_mean(path, params, u, targets, weights)
		mean_worst = max(
			mean_worst, float(np.max(np.abs(mean - oracle.mean(path)) / scale))
		)
		if params.hurst == 0.5:
			markov = np.exp(-params.theta * (targets - u)) * path.values[n // 2]
			markov_worst = max(
				markov_worst,
				float(np.max(np.abs(mean - markov) / np.sqrt(result.variance))),
			)
	tolerance = ctx.tolerances.prediction_relative
	checks = [
		VerifyCheck("prediction_mean_vs_oracle", mean_worst, tolerance),
		VerifyCheck(
			"prediction_cov_vs_oracle",
			_sup(result.covariance - oracle.covariance)
			/ _sup(oracle.covariance),
			tolerance,
		),
	]
	if params.hurst == 0.5:
		checks.append(
			VerifyCheck("prediction_mean_vs_markov", markov_worst, tolerance)
		)
	return checks


SUITES = {
	VerifySuite.GRAM: gram_suite,
	VerifySuite.ROUNDTRIP: roundtrip_suite,
	VerifySuite.ISOMETRY: isometry_suite,
	VerifySuite.TRANSFER_INTEGRAL: transfer_integral_suite,
	VerifySuite.PREDICTION: prediction_suite,
}


def run_suite(suite: VerifySuite, ctx: VerifyContext) -> list[VerifyCheck]:
	if suite == VerifySuite.ALL:
		return [check for name in SUITES for check in run_suite(name, ctx)]
	log.info(f"Running {suite.value} suite")
	checks = SUITES[suite](ctx)
	for check in checks:
		log.debug(
			f"{check.name}: {check.value} (tolerance {check.tolerance}) "
			f"{'pass' if check.passed else 'FAIL'}"
		)
	return checks
