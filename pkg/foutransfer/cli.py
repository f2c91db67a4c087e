"""Commands behind the foutransfer command line."""

import logging
from pathlib import Path as FilePath
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .config import ToleranceSettings
from .consts import (
	DEFAULT_SEED,
	KernelRole,
	ProcessKind,
	TransferDirection,
	VerifySuite,
)
from .csv_io import (
	read_paths,
	write_kernel_matrix,
	write_meta,
	write_paths,
	write_prediction,
	write_round_trip_errors,
	write_verify_report,
)
from .errors import DomainError
from .grid import Grid
from .kernels import (
	FouParams,
	discretize,
	normalizing_constant,
	operator_constant,
)
from .prediction import predict
from .simulation import SeedSpec, fbm_exact, sample_paths, transform_path
from .verification import VerifyCheck, VerifyContext, run_suite

log = logging.getLogger(__name__)

DIRECTION_KERNELS = {
	TransferDirection.BM_TO_FBM: KernelRole.K,
	TransferDirection.FBM_TO_BM: KernelRole.K_INV,
	TransferDirection.BM_TO_FOU: KernelRole.L,
	TransferDirection.FOU_TO_BM: KernelRole.L_INV,
}


class RunConfig(BaseModel):
	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	command: str
	params: FouParams
	grid: Grid
	paths: int = Field(default=1, ge=1)
	seed: int = Field(default=DEFAULT_SEED, ge=0)
	output_dir: FilePath
	workers: int = Field(default=1, ge=1, le=64)
	batch_size: int = Field(default=64, ge=1)
	refinement: int = Field(default=2048, ge=16)
	tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)

	def meta_entries(self) -> dict[str, Any]:
		hurst = self.params.hurst
		entries = {
			"command": self.command,
			"version": __version__,
			"theta": self.params.theta,
			"sigma": self.params.sigma,
			"hurst": hurst,
			"T": self.grid.horizon,
			"n": self.grid.steps,
			"paths": self.paths,
			"seed": self.seed,
			"workers": self.workers,
			"batch_size": self.batch_size,
			"covariance_refinement": self.refinement,
			"c_H": normalizing_constant(hurst),
			"operator_constant": operator_constant(hurst),
		}
		for name, value in self.tolerances.model_dump().items():
			entries[f"tolerance.{name}"] = value
		return entries


def _finish(
	config: RunConfig, files: list[FilePath], **extra
) -> list[FilePath]:
	entries = config.meta_entries()
	entries.update(extra)
	files.append(write_meta(config.output_dir / "meta.txt", entries))
	for file in files:
		log.info(f"Wrote {file}")
	return files


def cmd_simulate(
	config: RunConfig, process: ProcessKind, method: str = "transfer"
) -> list[FilePath]:
	"""Sample paths and write paths.csv with meta.txt."""
	extra: dict[str, Any] = {"process": process.value, "method": method}
	if method == "cholesky":
		if process != ProcessKind.FBM:
			raise DomainError("the cholesky method only samples fbm")
		paths = [
			fbm_exact(
				config.grid, config.params.hurst, SeedSpec(config.seed, i)
			)
			for i in range(config.paths)
		]
		extra["jitter"] = paths[0].metadata["jitter"]
	else:
		paths = sample_paths(
			process,
			config.grid,
			config.params,
			config.seed,
			config.paths,
			config.workers,
			config.batch_size,
		)
	log.info(f"Sampled {len(paths)} {process.value} paths")
	files = [write_paths(config.output_dir / "paths.csv", paths)]
	return _finish(config, files, **extra)


def cmd_transfer(
	config: RunConfig,
	input_file: FilePath,
	direction: TransferDirection,
	round_trip: bool = False,
	dump_kernel: bool = False,
) -> list[FilePath]:
	"""Transform every path of the input file; the grid is the file's own."""
	sources = read_paths(input_file, direction.source)
	targets = [
		transform_path(path, direction, config.params) for path in sources
	]
	files = [write_paths(config.output_dir / "transferred.csv", targets)]
	if round_trip:
		errors = []
		for path_id, (source, target) in enumerate(zip(sources, targets)):
			back = transform_path(target, direction.inverse, config.params)
			sup_error = float(np.max(np.abs(back.values - source.values)))
			sup_norm = float(np.max(np.abs(source.values)))
			log.debug(f"Path {path_id}: round trip error {sup_error}")
			errors.append((path_id, sup_error, sup_norm))
		files.append(
			write_round_trip_errors(
				config.output_dir / "round_trip_errors.csv", errors
			)
		)
	if dump_kernel:
		role = DIRECTION_KERNELS.get(direction)
		if role is None:
			log.warning(f"direction {direction.value} has no kernel matrix")
		else:
			hurst_only = role in (KernelRole.K, KernelRole.K_INV)
			matrix = discretize(
				role,
				config.params.hurst if hurst_only else config.params,
				sources[0].grid,
			)
			files.append(
				write_kernel_matrix(
					config.output_dir / f"kernel_{role.value}.csv", matrix
				)
			)
	return _finish(
		config,
		files,
		input=input_file,
		direction=direction.value,
		input_T=sources[0].grid.horizon,
		input_n=sources[0].grid.steps,
	)


def cmd_predict(
	config: RunConfig,
	input_file: FilePath,
	base_time: float,
	targets: list[float],
	oracle: bool = False,
	path_id: int = 0,
) -> list[FilePath]:
	"""Conditional mean and covariance of the fOU path at the targets."""
	paths = read_paths(input_file, ProcessKind.FOU)
	if not 0 <= path_id < len(paths):
		raise DomainError(f"path_id {path_id} not in the input file")
	path = paths[path_id]
	path.params = config.params
	result = predict(
		path, config.params, base_time, targets, oracle, config.refinement
	)
	files = list(write_prediction(config.output_dir, result))
	return _finish(
		config,
		files,
		input=input_file,
		path_id=path_id,
		u=base_time,
		targets=" ".join(repr(float(t)) for t in targets),
		**{f"diagnostics.{k}": v for k, v in result.diagnostics.items()},
	)


def cmd_verify(
	config: RunConfig, suite: VerifySuite
) -> tuple[list[FilePath], list[VerifyCheck]]:
	ctx = VerifyContext(
		config.params,
		config.grid,
		config.seed,
		config.paths,
		config.tolerances,
		config.workers,
		config.batch_size,
	)
	checks = run_suite(suite, ctx)
	failed = [check.name for check in checks if not check.passed]
	if failed:
		log.error(f"{len(failed)} checks failed: {', '.join(failed)}")
	else:
		log.info(f"All {len(checks)} checks passed")
	files = [
		write_verify_report(config.output_dir / "verify_report.csv", checks)
	]
	files = _finish(config, files, suite=suite.value, failed=len(failed))
	return files, checks

