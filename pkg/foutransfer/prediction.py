"""Conditional law of the fOU process given its past on [0, u]."""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.integrate import quad

from .config import conf
from .consts import ProcessKind
from .errors import DomainError, EmptyHistoryError
from .grid import (
	Grid,
	GridFunction,
	IntegrandFunction,
	IntegrandRole,
	cell_weights,
)
from .kernels import (
	FouParams,
	fbm_covariance,
	gridpoint_exponential_integral,
	kernel_L,
	quad_limit,
)
from .simulation import Path, expect_process
from .transfer_ops import apply_L_star_inv

log = logging.getLogger(__name__)


def _ou_product_integral(params: FouParams, t, s, lower, upper) -> float:
	"""int_lower^upper L(t,v) L(s,v) dv for H = 1/2."""
	theta, sigma = params.theta, params.sigma
	return (
		sigma**2
		* math.exp(-theta * (t + s))
		* (math.exp(2 * theta * upper) - math.exp(2 * theta * lower))
		/ (2 * theta)
	)


def kernel_product_integral(
	params: FouParams, t: float, s: float, lower: float, upper: float
) -> float:
	"""int_lower^upper L(t,v) L(s,v) dv by adaptive quadrature."""
	if upper <= lower:
		return 0.0
	if params.hurst == 0.5:
		return _ou_product_integral(params, t, s, lower, upper)
	value, error = quad(
		lambda v: kernel_L(params, t, v) * kernel_L(params, s, v),
		lower,
		upper,
		limit=quad_limit(),
	)
	log.debug(f"L-product integral on [{lower}, {upper}]: {value} +- {error}")
	return value


class FouCovariance:
	"""Covariance R(t,s) = Cov[U_t, U_s] of the fOU process started at 0."""

	def __init__(self, params: FouParams, refinement: int | None = None):
		self.params = params
		self.refinement = (
			refinement or conf().numerics.covariance_refinement
		)
		self._values: dict[tuple[float, float], float] = {}

	def __call__(self, t: float, s: float) -> float:
		key = (min(t, s), max(t, s))
		if key not in self._values:
			self._values[key] = kernel_product_integral(
				self.params, t, s, 0.0, min(t, s)
			)
		return self._values[key]

	def matrix(self, times) -> np.ndarray:
		"""Covariance on many times at once.

		Uses U_t = sigma [B_t - theta e^(-theta t) int_0^t B_r e^(theta r) dr]
		and trapezoidal double quadrature against R_H on a refined grid that
		contains every requested time.
		"""
		times = np.asarray(times, dtype=float)
		theta, sigma, hurst = (
			self.params.theta,
			self.params.sigma,
			self.params.hurst,
		)
		top = float(np.max(times))
		if top <= 0:
			return np.zeros((len(times), len(times)))
		nodes = np.union1d(np.linspace(0.0, top, self.refinement + 1), times)
		positions = np.searchsorted(nodes, times)
		widths = np.diff(nodes)
		cells = np.arange(len(widths))[None, :] < positions[:, None]
		half = 0.5 * widths[None, :] * cells
		weights = np.zeros((len(times), len(nodes)))
		weights[:, :-1] += half
		weights[:, 1:] += half
		growth = np.exp(theta * nodes)
		weighted = weights * growth[None, :]
		cross = fbm_covariance(hurst, times[:, None], nodes[None, :])
		decay = np.exp(-theta * times)
		single = theta * (cross @ weighted.T) * decay[None, :]
		double = (
			theta**2
			* (weighted @ fbm_covariance(hurst, nodes[:, None], nodes[None, :]))
			@ weighted.T
			* np.outer(decay, decay)
		)
		result = sigma**2 * (
			fbm_covariance(hurst, times[:, None], times[None, :])
			- single
			- single.T
			+ double
		)
		return 0.5 * (result + result.T)


@lru_cache(maxsize=8)
def _covariance_for(params: FouParams) -> FouCovariance:
	return FouCovariance(params)


def fou_covariance(params: FouParams, t: float, s: float) -> float:
	"""int_0^{t^s} L(t,v) L(s,v) dv"""
	return _covariance_for(params)(t, s)


def conditional_cov(
	params: FouParams,
	t: float,
	s: float,
	u: float,
	cross_check: bool = True,
	tolerance: float = 1e-10,
) -> float:
	"""R(t,s|u) = int_u^{t^s} L(t,v) L(s,v) dv"""
	if min(t, s) < u:
		raise DomainError("conditional covariance needs t, s >= u")
	value = kernel_product_integral(params, t, s, u, min(t, s))
	if cross_check and u > 0:
		two_term = fou_covariance(params, t, s) - kernel_product_integral(
			params, t, s, 0.0, u
		)
		if abs(two_term - value) > tolerance * max(1.0, abs(value)):
			log.warning(
				f"conditional covariance forms disagree at ({t}, {s}|{u}): "
				f"{value} vs {two_term}"
			)
	return value


def _history_grid(grid: Grid, u: float) -> Grid:
	if u <= 0:
		raise EmptyHistoryError("empty history")
	steps = grid.index_of(u)
	if steps < 2:
		raise DomainError("the observed history must span two grid steps")
	return grid.restrict(steps)


def psi_weights(
	params: FouParams, grid: Grid, u: float, t: float
) -> GridFunction:
	"""Psi(t, .|u) = (L*)^-1 [L(t,.) - L(u,.)] on the history grid [0, u].

	L(u,s) = sigma K(u,s) - theta sigma e^(-theta u) J(u,s) diverges at s = u
	for H < 1/2. On [0, u] its sigma K(u,.) part maps to 1 + theta (u - s)
	under (L*)^-1, so only the regular remainder goes through the grid
	operator.
	"""
	history = _history_grid(grid, u)
	k = history.steps
	if t < u:
		raise DomainError(f"target {t} precedes the base time {u}")
	if t == u:
		return GridFunction(history, np.zeros(k + 1))
	theta, sigma = params.theta, params.sigma
	v = history.points
	inner = gridpoint_exponential_integral(params, history)[k]
	g = np.empty(k + 1)
	start = 0 if params.hurst == 0.5 else 1
	g[start:] = (
		kernel_L(params, t, v[start:])
		+ theta * sigma * math.exp(-theta * u) * inner[start:]
	)
	g[0] = g[start]
	regular = apply_L_star_inv(GridFunction(history, g), params)
	return IntegrandFunction(
		history,
		regular.values - (1.0 + theta * (u - v)),
		IntegrandRole.FOU,
		origin_exponent=regular.origin_exponent,
		terminal_exponent=regular.terminal_exponent,
	)


def psi(
	params: FouParams, t: float, s: float, u: float, steps: int = 256
) -> float:
	"""Psi(t, s|u) on a uniform history grid of the given resolution."""
	if not 0 <= s <= u:
		raise DomainError("psi needs 0 <= s <= u")
	history = Grid(u, steps) if u > 0 else None
	if history is None:
		raise EmptyHistoryError("empty history")
	return psi_weights(params, history, u, t)(s)


def conditional_mean_weights(
	params: FouParams, grid: Grid, u: float, targets
) -> np.ndarray:
	"""Rows of Psi(t_k, .|u) per history cell, the cells next to the ends
	carrying the mean of Psi's power law."""
	return np.array(
		[cell_weights(psi_weights(params, grid, u, float(t))) for t in targets]
	)


def _history_index(u_path: Path, u: float, targets) -> int:
	expect_process(u_path, ProcessKind.FOU)
	if u > u_path.grid.horizon:
		raise DomainError(f"base time {u} lies beyond the observed path")
	if u <= 0:
		raise EmptyHistoryError("empty history")
	if np.any(np.asarray(targets, dtype=float) < u):
		raise DomainError("prediction targets must not precede the base time")
	return u_path.grid.index_of(u)


def conditional_mean(
	u_path: Path, params: FouParams, u: float, targets, weights=None
) -> np.ndarray:
	"""m(t) = U_u + int_0^u Psi(t,s|u) dU_s for each target t."""
	k = _history_index(u_path, u, targets)
	if weights is None:
		weights = conditional_mean_weights(params, u_path.grid, u, targets)
	return u_path.values[k] + weights @ u_path.increments[:k]


@dataclass
class OracleResult:
	weights: np.ndarray
	covariance: np.ndarray
	jitter: float = 0.0

	def mean(self, u_path: Path) -> np.ndarray:
		k = self.weights.shape[1]
		return self.weights @ u_path.values[1 : k + 1]


def gaussian_conditioning_oracle(
	params: FouParams,
	grid: Grid,
	u: float,
	targets,
	refinement: int | None = None,
) -> OracleResult:
	"""Conditional mean weights and covariance of the targets given U at
	every grid point in (0, u], by Schur complement."""
	targets = np.asarray(targets, dtype=float)
	covariance = FouCovariance(params, refinement)
	k = grid.index_of(u) if u > 0 else 0
	if k == 0:
		return OracleResult(np.zeros((len(targets), 0)), covariance.matrix(targets))
	past = grid.points[1 : k + 1]
	joint = covariance.matrix(np.concatenate((past, targets)))
	past_cov = joint[:k, :k]
	cross = joint[k:, :k]
	jitter = 0.0
	try:
		factor = scipy.linalg.cho_factor(past_cov, lower=True)
	except np.linalg.LinAlgError:
		scale = float(np.max(np.diag(past_cov)))
		jitter = conf().numerics.schur_jitter * scale
		log.warning(f"past covariance near singular; adding jitter {jitter}")
		factor = scipy.linalg.cho_factor(
			past_cov + jitter * np.eye(k), lower=True
		)
	weights = scipy.linalg.cho_solve(factor, cross.T).T
	conditional = joint[k:, k:] - weights @ cross.T
	return OracleResult(weights, 0.5 * (conditional + conditional.T), jitter)


@dataclass
class PredictionResult:
	base_time: float
	targets: np.ndarray
	mean: np.ndarray
	covariance: np.ndarray
	diagnostics: dict = field(default_factory=dict)
	oracle: OracleResult | None = None
	oracle_mean: np.ndarray | None = None

	@property
	def variance(self) -> np.ndarray:
		return np.diag(self.covariance)


def predict(
	u_path: Path,
	params: FouParams,
	u: float,
	targets,
	oracle: bool = False,
	refinement: int | None = None,
) -> PredictionResult:
	targets = np.asarray(targets, dtype=float)
	mean = conditional_mean(u_path, params, u, targets)
	covariance = np.array(
		[
			[conditional_cov(params, t, s, u, cross_check=False) for s in targets]
			for t in targets
		]
	)
	result = PredictionResult(
		u,
		targets,
		mean,
		covariance,
		diagnostics={
			"history_steps": u_path.grid.index_of(u),
			"quad_limit": quad_limit(),
		},
	)
	if oracle:
		result.oracle = gaussian_conditioning_oracle(
			params, u_path.grid, u, targets, refinement
		)
		result.oracle_mean = result.oracle.mean(u_path)
		result.diagnostics["oracle_jitter"] = result.oracle.jitter
	log.info(f"Predicted {len(targets)} targets from base time {u}")
	return result
