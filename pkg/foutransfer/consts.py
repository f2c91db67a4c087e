from enum import Enum, IntEnum

APP_NAME = "foutransfer"
APP_AUTHOR = "foutransfer"
DEFAULT_SEED = 20240101
DEFAULT_OUTPUT_DIR = "foutransfer_output"


class ExitCode(IntEnum):
	OK = 0
	VERIFICATION_FAILED = 1
	USAGE_ERROR = 2


class ProcessKind(Enum):
	BM = "bm"
	FBM = "fbm"
	FOU = "fou"


class KernelRole(Enum):
	K = "K"
	K_INV = "K_inv"
	L = "L"
	L_INV = "L_inv"


class TransferDirection(Enum):
	BM_TO_FBM = "bm-fbm"
	FBM_TO_BM = "fbm-bm"
	BM_TO_FOU = "bm-fou"
	FOU_TO_BM = "fou-bm"
	FBM_TO_FOU = "fbm-fou"
	FOU_TO_FBM = "fou-fbm"

	@property
	def source(self) -> ProcessKind:
		return ProcessKind(self.value.split("-")[0])

	@property
	def target(self) -> ProcessKind:
		return ProcessKind(self.value.split("-")[1])

	@property
	def inverse(self) -> "TransferDirection":
		return TransferDirection(f"{self.target.value}-{self.source.value}")


class VerifySuite(Enum):
	GRAM = "gram"
	ROUNDTRIP = "roundtrip"
	ISOMETRY = "isometry"
	TRANSFER_INTEGRAL = "transfer-integral"
	PREDICTION = "prediction"
	ALL = "all"
