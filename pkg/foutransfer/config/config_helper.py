import logging
from pathlib import Path

from platformdirs import user_config_path as get_user_config_path
from pydantic_settings import (
	BaseSettings,
	PydanticBaseSettingsSource,
	SettingsConfigDict,
	YamlConfigSettingsSource,
)

import foutransfer.global_vars as global_vars
from foutransfer.consts import APP_AUTHOR, APP_NAME

log = logging.getLogger(__name__)


class FouTransferBaseSettings(BaseSettings):
	@classmethod
	def settings_customise_sources(
		cls,
		settings_cls: type[BaseSettings],
		init_settings: PydanticBaseSettingsSource,
		env_settings: PydanticBaseSettingsSource,
		dotenv_settings: PydanticBaseSettingsSource,
		file_secret_settings: PydanticBaseSettingsSource,
	) -> tuple[PydanticBaseSettingsSource, ...]:
		"""Settings are loaded in the following order, later sources
		overriding earlier ones:
		1. YAML file
		2. Environment variables
		3. Initial settings
		"""
		return (init_settings, env_settings, YamlConfigSettingsSource(settings_cls))


def get_user_config_dir() -> Path:
	return get_user_config_path(APP_NAME, APP_AUTHOR, roaming=True)


def get_config_file_paths(file_path: str) -> list[Path]:
	search_config_paths = []
	if global_vars.user_data_path:
		search_config_paths.append(global_vars.user_data_path / file_path)
	search_config_paths.append(get_user_config_dir() / file_path)
	return search_config_paths


def search_existing_path(paths: list[Path]) -> Path:
	for p in paths:
		if p.exists() or p.parent.exists():
			return p
	return paths[-1]


def get_settings_config_dict(file_path: str) -> SettingsConfigDict:
	return SettingsConfigDict(
		env_prefix="FOUTRANSFER_",
		env_nested_delimiter="__",
		extra="ignore",
		yaml_file=search_existing_path(get_config_file_paths(file_path)),
		yaml_file_encoding="UTF-8",
	)

