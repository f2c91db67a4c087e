import logging
import sys
from pathlib import Path
from types import TracebackType
from typing import Type

from platformdirs import user_log_path

import foutransfer.global_vars as global_vars
from foutransfer.consts import APP_AUTHOR, APP_NAME


def get_log_file_path() -> Path:
	"""Log file in the portable user_data folder when present, otherwise in
	the platform log directory"""
	log_file_path = Path(f"{APP_NAME}.log")
	if global_vars.user_data_path:
		return global_vars.user_data_path / log_file_path
	return (
		user_log_path(APP_NAME, APP_AUTHOR, ensure_exists=True) / log_file_path
	)


def setup_logging(level: str, log_file: bool = True) -> None:
	level = level.upper()
	if level == "OFF":
		level = "NOTSET"
	handlers: list[logging.Handler] = [logging.StreamHandler()]
	if log_file:
		handlers.append(logging.FileHandler(get_log_file_path(), mode='w'))
	logging.basicConfig(
		level=level,
		format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
		handlers=handlers,
		force=True,
	)


def logging_uncaught_exceptions(
	exc_type: Type[BaseException],
	exc_value: BaseException,
	exc_traceback: TracebackType,
) -> None:
	if issubclass(exc_type, KeyboardInterrupt):
		logging.info("Keyboard interrupt")
		return
	logging.getLogger(exc_type.__module__).error(
		"Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback)
	)


def install_excepthook() -> None:
	sys.excepthook = logging_uncaught_exceptions
