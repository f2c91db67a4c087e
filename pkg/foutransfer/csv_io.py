"""CSV schemas of the command line outputs and the run metadata file."""

import csv
import logging
from pathlib import Path as FilePath
from typing import Iterable, Sequence

import numpy as np

from .consts import ProcessKind
from .errors import CsvFormatError, FouTransferError
from .grid import Grid
from .kernels import KernelMatrix
from .prediction import PredictionResult
from .simulation import Path

log = logging.getLogger(__name__)

PATH_FIELDS = ["t", "value"]
MULTI_PATH_FIELDS = ["path_id", "t", "value"]
KERNEL_FIELDS = ["i", "j", "value"]
PREDICTION_FIELDS = ["t", "mean", "var"]
ORACLE_FIELDS = ["oracle_mean", "oracle_var"]
COVARIANCE_FIELDS = ["t1", "t2", "value"]
ROUND_TRIP_FIELDS = ["path_id", "sup_error", "sup_norm"]
REPORT_FIELDS = ["check_name", "value", "tolerance", "pass"]


def format_float(value: float) -> str:
	"""Shortest repr that reads back to the same double."""
	return repr(float(value))


def _write_rows(
	file_path: FilePath, fields: list[str], rows: Iterable[Sequence]
) -> FilePath:
	file_path.parent.mkdir(parents=True, exist_ok=True)
	with file_path.open("w", newline="", encoding="UTF-8") as f:
		writer = csv.writer(f, lineterminator="\n")
		writer.writerow(fields)
		count = 0
		for row in rows:
			writer.writerow(
				format_float(v) if isinstance(v, (float, np.floating)) else v
				for v in row
			)
			count += 1
	log.debug(f"Wrote {count} rows to {file_path}")
	return file_path


def write_paths(file_path: FilePath, paths: Sequence[Path]) -> FilePath:
	"""One path as t,value; several as path_id,t,value."""
	if len(paths) == 1:
		path = paths[0]
		return _write_rows(
			file_path, PATH_FIELDS, zip(path.grid.points, path.values)
		)
	return _write_rows(
		file_path,
		MULTI_PATH_FIELDS,
		(
			(path_id, t, value)
			for path_id, path in enumerate(paths)
			for t, value in zip(path.grid.points, path.values)
		),
	)


def _parse_float(file_path: FilePath, line: int, field: str, raw) -> float:
	if raw is None or raw == "":
		raise CsvFormatError(str(file_path), line, f"missing {field}")
	try:
		value = float(raw)
	except ValueError:
		raise CsvFormatError(
			str(file_path), line, f"{field} is not a number: {raw!r}"
		)
	if not np.isfinite(value):
		raise CsvFormatError(str(file_path), line, f"{field} is not finite")
	return value


def _grid_from_times(
	file_path: FilePath, times: list[float], first_line: int
) -> Grid:
	if len(times) < 3:
		raise CsvFormatError(
			str(file_path), first_line, "a path needs at least three points"
		)
	if times[0] != 0.0:
		raise CsvFormatError(str(file_path), first_line, "paths must start at t=0")
	try:
		grid = Grid(times[-1], len(times) - 1)
	except FouTransferError as e:
		raise CsvFormatError(str(file_path), first_line, str(e)) from e
	misaligned = np.abs(np.asarray(times) - grid.points) > 1e-9 * grid.horizon
	if np.any(misaligned):
		offset = int(np.argmax(misaligned))
		raise CsvFormatError(
			str(file_path), first_line + offset, "times are not uniformly spaced"
		)
	return grid


def read_paths(file_path: FilePath, process: ProcessKind) -> list[Path]:
	"""Read a t,value or path_id,t,value file into paths of one process."""
	file_path = FilePath(file_path)
	with file_path.open(newline="", encoding="UTF-8") as f:
		reader = csv.DictReader(f)
		fields = reader.fieldnames or []
		if fields not in (PATH_FIELDS, MULTI_PATH_FIELDS):
			raise CsvFormatError(
				str(file_path),
				1,
				f"expected header {','.join(PATH_FIELDS)} or "
				f"{','.join(MULTI_PATH_FIELDS)}, got {','.join(fields)}",
			)
		series: dict[int, tuple[int, list[float], list[float]]] = {}
		for row in reader:
			line = reader.line_num
			if None in row:
				raise CsvFormatError(str(file_path), line, "too many columns")
			path_id = 0
			if "path_id" in row:
				try:
					path_id = int(row["path_id"])
				except (TypeError, ValueError):
					raise CsvFormatError(
						str(file_path), line, f"bad path_id {row['path_id']!r}"
					)
			first_line, times, values = series.setdefault(path_id, (line, [], []))
			times.append(_parse_float(file_path, line, "t", row["t"]))
			values.append(_parse_float(file_path, line, "value", row["value"]))
	if not series:
		raise CsvFormatError(str(file_path), 2, "no data rows")
	paths = []
	for path_id in sorted(series):
		first_line, times, values = series[path_id]
		grid = _grid_from_times(file_path, times, first_line)
		paths.append(
			Path(grid, np.array(values), process, metadata={"path_id": path_id})
		)
	log.info(f"Read {len(paths)} {process.value} paths from {file_path}")
	return paths


def write_kernel_matrix(file_path: FilePath, matrix: KernelMatrix) -> FilePath:
	return _write_rows(file_path, KERNEL_FIELDS, matrix.csv_rows())


def write_prediction(
	directory: FilePath, result: PredictionResult
) -> tuple[FilePath, FilePath]:
	"""prediction.csv (t,mean,var plus oracle columns) and prediction_cov.csv"""
	fields = list(PREDICTION_FIELDS)
	columns = [result.targets, result.mean, result.variance]
	if result.oracle is not None:
		fields += ORACLE_FIELDS
		columns += [result.oracle_mean, np.diag(result.oracle.covariance)]
	mean_file = _write_rows(
		directory / "prediction.csv", fields, zip(*columns)
	)
	cov_file = _write_rows(
		directory / "prediction_cov.csv",
		COVARIANCE_FIELDS,
		(
			(t1, t2, result.covariance[i, j])
			for i, t1 in enumerate(result.targets)
			for j, t2 in enumerate(result.targets)
		),
	)
	return mean_file, cov_file


def write_round_trip_errors(
	file_path: FilePath, errors: Iterable[tuple[int, float, float]]
) -> FilePath:
	return _write_rows(file_path, ROUND_TRIP_FIELDS, errors)


def write_verify_report(file_path: FilePath, checks) -> FilePath:
	return _write_rows(
		file_path,
		REPORT_FIELDS,
		(
			(
				check.name,
				check.value,
				check.tolerance,
				"true" if check.passed else "false",
			)
			for check in checks
		),
	)


def write_meta(file_path: FilePath, entries: dict) -> FilePath:
	"""key = value lines, in insertion order."""
	file_path.parent.mkdir(parents=True, exist_ok=True)
	with file_path.open("w", encoding="UTF-8", newline="\n") as f:
		for key, value in entries.items():
			if isinstance(value, (float, np.floating)):
				value = format_float(value)
			f.write(f"{key} = {value}\n")
	return file_path
