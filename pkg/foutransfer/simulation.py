"""Path generation for W, fBm and fOU and the transforms between them."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
from more_itertools import chunked
from scipy.integrate import cumulative_trapezoid

from .config import conf
from .consts import KernelRole, ProcessKind, TransferDirection
from .errors import CovarianceFactorizationError, DomainError
from .grid import Grid
from .kernels import FouParams, check_hurst, discretize, fbm_covariance

log = logging.getLogger(__name__)


@dataclass
class Path:
	grid: Grid
	values: np.ndarray
	process: ProcessKind
	params: FouParams | float | None = None
	metadata: dict = field(default_factory=dict)

	def __post_init__(self):
		self.values = np.asarray(self.values, dtype=float)
		if self.values.shape != (self.grid.steps + 1,):
			raise DomainError(
				f"path has {self.values.shape} values for a grid of "
				f"{self.grid.steps} steps"
			)
		if not np.all(np.isfinite(self.values)):
			raise DomainError("path values must be finite")

	@property
	def increments(self) -> np.ndarray:
		return np.diff(self.values)


@dataclass(frozen=True)
class SeedSpec:
	master_seed: int
	path_index: int = 0

	def rng(self) -> np.random.Generator:
		"""Independent stream keyed by (master seed, path index)."""
		sequence = np.random.SeedSequence(
			[self.master_seed & 0xFFFFFFFFFFFFFFFF, self.path_index]
		)
		return np.random.default_rng(sequence)


def expect_process(path: Path, process: ProcessKind) -> None:
	if path.process != process:
		raise DomainError(
			f"expected a {process.value} path, got {path.process.value}"
		)


def _through_kernel(
	path: Path, role: KernelRole, params, process: ProcessKind
) -> Path:
	matrix = discretize(role, params, path.grid)
	path.grid.check_same(matrix.grid)
	return Path(path.grid, matrix.apply(path.increments), process, params)


def sample_bm(grid: Grid, seed: SeedSpec) -> Path:
	increments = seed.rng().normal(scale=np.sqrt(grid.step), size=grid.steps)
	return Path(
		grid, np.concatenate(([0.0], np.cumsum(increments))), ProcessKind.BM
	)


def fbm_from_bm(w: Path, hurst: float) -> Path:
	"""B^H_t = int_0^t K_H(t,s) dW_s"""
	expect_process(w, ProcessKind.BM)
	if check_hurst(hurst) == 0.5:
		return Path(w.grid, w.values.copy(), ProcessKind.FBM, hurst)
	return _through_kernel(w, KernelRole.K, hurst, ProcessKind.FBM)


def bm_from_fbm(b: Path, hurst: float) -> Path:
	"""W_t = int_0^t K_H^-1(t,s) dB^H_s"""
	expect_process(b, ProcessKind.FBM)
	if check_hurst(hurst) == 0.5:
		return Path(b.grid, b.values.copy(), ProcessKind.BM)
	return _through_kernel(b, KernelRole.K_INV, hurst, ProcessKind.BM)


def fou_from_bm(w: Path, params: FouParams) -> Path:
	"""U_t = int_0^t L(t,s) dW_s"""
	expect_process(w, ProcessKind.BM)
	return _through_kernel(w, KernelRole.L, params, ProcessKind.FOU)


def bm_from_fou(u: Path, params: FouParams) -> Path:
	"""W_t = int_0^t L^-1(t,s) dU_s"""
	expect_process(u, ProcessKind.FOU)
	path = _through_kernel(u, KernelRole.L_INV, params, ProcessKind.BM)
	path.params = None
	return path


def fou_from_fbm(b: Path, params: FouParams) -> Path:
	"""U_t = sigma [B_t - theta e^(-theta t) int_0^t B_s e^(theta s) ds]"""
	expect_process(b, ProcessKind.FBM)
	t = b.grid.points
	weighted = cumulative_trapezoid(
		b.values * np.exp(params.theta * t), t, initial=0.0
	)
	values = params.sigma * (
		b.values - params.theta * np.exp(-params.theta * t) * weighted
	)
	return Path(b.grid, values, ProcessKind.FOU, params)


def fbm_from_fou(u: Path, params: FouParams) -> Path:
	"""Langevin inversion B_t = (U_t + theta int_0^t U_s ds) / sigma"""
	expect_process(u, ProcessKind.FOU)
	area = cumulative_trapezoid(u.values, u.grid.points, initial=0.0)
	return Path(
		u.grid,
		(u.values + params.theta * area) / params.sigma,
		ProcessKind.FBM,
		params.hurst,
	)


@lru_cache(maxsize=8)
def _fbm_factor(grid: Grid, hurst: float) -> tuple[np.ndarray, float]:
	t = grid.points[1:]
	covariance = fbm_covariance(hurst, t[:, None], t[None, :])
	try:
		return scipy.linalg.cholesky(covariance, lower=True), 0.0
	except np.linalg.LinAlgError:
		scale = float(np.max(np.diag(covariance)))
		jitter = conf().numerics.cholesky_jitter * scale
		log.warning(
			f"fBm covariance not positive definite for H={hurst}, "
			f"n={grid.steps}; adding jitter {jitter}"
		)
	try:
		factor = scipy.linalg.cholesky(
			covariance + jitter * np.eye(len(t)), lower=True
		)
	except np.linalg.LinAlgError as e:
		raise CovarianceFactorizationError(
			f"Cholesky factorization failed for H={hurst} with "
			f"n={grid.steps}; use a smaller n"
		) from e
	return factor, jitter


def fbm_exact(grid: Grid, hurst: float, seed: SeedSpec) -> Path:
	"""Exact fBm sample from the Cholesky factor of the grid covariance."""
	factor, jitter = _fbm_factor(grid, check_hurst(hurst))
	values = np.zeros(grid.steps + 1)
	values[1:] = factor @ seed.rng().standard_normal(grid.steps)
	return Path(
		grid, values, ProcessKind.FBM, hurst, metadata={"jitter": jitter}
	)


def stationary_connection(u: Path, v0: float, params: FouParams) -> Path:
	"""V_t = e^(-theta t) v0 + U_t"""
	expect_process(u, ProcessKind.FOU)
	values = np.exp(-params.theta * u.grid.points) * v0 + u.values
	return Path(
		u.grid,
		values,
		ProcessKind.FOU,
		params,
		metadata={"initial_value": v0},
	)


def transform_path(
	path: Path, direction: TransferDirection, params: FouParams
) -> Path:
	expect_process(path, direction.source)
	match direction:
		case TransferDirection.BM_TO_FBM:
			return fbm_from_bm(path, params.hurst)
		case TransferDirection.FBM_TO_BM:
			return bm_from_fbm(path, params.hurst)
		case TransferDirection.BM_TO_FOU:
			return fou_from_bm(path, params)
		case TransferDirection.FOU_TO_BM:
			return bm_from_fou(path, params)
		case TransferDirection.FBM_TO_FOU:
			return fou_from_fbm(path, params)
		case TransferDirection.FOU_TO_FBM:
			return fbm_from_fou(path, params)


def sample_path(
	process: ProcessKind, grid: Grid, seed: SeedSpec, params: FouParams
) -> Path:
	"""One path of the requested process driven by sample_bm(seed)."""
	w = sample_bm(grid, seed)
	match process:
		case ProcessKind.BM:
			return w
		case ProcessKind.FBM:
			return fbm_from_bm(w, params.hurst)
		case ProcessKind.FOU:
			return fou_from_bm(w, params)


def sample_paths(
	process: ProcessKind,
	grid: Grid,
	params: FouParams,
	master_seed: int,
	count: int,
	workers: int = 1,
	batch_size: int = 64,
) -> list[Path]:
	"""Paths 0..count-1; the result does not depend on the worker count."""
	if count < 1:
		raise DomainError("at least one path is required")
	# warm the kernel caches before threads share them
	sample_path(process, grid, SeedSpec(master_seed, 0), params)

	def run_batch(indices: list[int]) -> list[Path]:
		return [
			sample_path(process, grid, SeedSpec(master_seed, i), params)
			for i in indices
		]

	batches = list(chunked(range(count), batch_size))
	log.debug(
		f"Sampling {count} {process.value} paths in {len(batches)} batches "
		f"with {workers} workers"
	)
	if workers <= 1:
		results = [run_batch(batch) for batch in batches]
	else:
		with ThreadPoolExecutor(max_workers=workers) as executor:
			results = list(executor.map(run_batch, batches))
	return [path for batch in results for path in batch]
