import logging
from functools import cache
from pathlib import Path

from pydantic import BaseModel, Field

from foutransfer.consts import DEFAULT_OUTPUT_DIR

from .config_enums import LogLevelEnum
from .config_helper import (
	FouTransferBaseSettings,
	get_settings_config_dict,
)

log = logging.getLogger(__name__)

config_file_name = "config.yml"


class GeneralSettings(BaseModel):
	log_level: LogLevelEnum = Field(default=LogLevelEnum.INFO)
	log_to_file: bool = Field(default=True)


class NumericsSettings(BaseModel):
	quad_limit: int = Field(default=200, ge=10)
	covariance_refinement: int = Field(default=2048, ge=16)
	cholesky_jitter: float = Field(default=1e-12, gt=0)
	schur_jitter: float = Field(default=1e-10, gt=0)


class ToleranceSettings(BaseModel):
	gram_relative: float = Field(default=0.01, gt=0)
	reduction: float = Field(default=1e-10, gt=0)
	roundtrip_relative: float = Field(default=0.05, gt=0)
	refinement_ratio: float = Field(default=1.3, gt=0)
	transfer_integral: float = Field(default=0.05, gt=0)
	prediction_relative: float = Field(default=0.02, gt=0)
	monte_carlo_se: float = Field(default=3.0, gt=0)


class RuntimeSettings(BaseModel):
	workers: int = Field(default=1, ge=1, le=64)
	batch_size: int = Field(default=64, ge=1)


class FouTransferConfig(FouTransferBaseSettings):
	model_config = get_settings_config_dict(config_file_name)

	output_dir: Path = Field(default=Path(DEFAULT_OUTPUT_DIR))
	general: GeneralSettings = Field(default_factory=GeneralSettings)
	numerics: NumericsSettings = Field(default_factory=NumericsSettings)
	tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)
	runtime: RuntimeSettings = Field(default_factory=RuntimeSettings)


@cache
def get_foutransfer_config() -> FouTransferConfig:
	log.debug("Loading foutransfer config")
	return FouTransferConfig()
