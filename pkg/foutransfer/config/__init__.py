from .config_enums import LogLevelEnum
from .main_config import (
	FouTransferConfig,
	GeneralSettings,
	NumericsSettings,
	RuntimeSettings,
	ToleranceSettings,
)
from .main_config import get_foutransfer_config as conf

__all__ = [
	"conf",
	"FouTransferConfig",
	"GeneralSettings",
	"LogLevelEnum",
	"NumericsSettings",
	"RuntimeSettings",
	"ToleranceSettings",
]
