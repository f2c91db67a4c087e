"""Exceptions raised by the foutransfer library."""


class FouTransferError(Exception):
	"""Base class of all library errors"""


class DomainError(FouTransferError, ValueError):
	"""Argument outside the domain of a function"""


class ParameterError(DomainError):
	"""Invalid model or grid parameter"""

	def __init__(self, name: str, message: str):
		super().__init__(message)
		self.name = name


class KernelSingularityError(DomainError):
	pass


class GridMismatchError(FouTransferError, ValueError):
	pass


class CovarianceFactorizationError(FouTransferError, ArithmeticError):
	pass


class EmptyHistoryError(FouTransferError, ValueError):
	pass


class CsvFormatError(FouTransferError, ValueError):
	def __init__(self, path: str, line: int, message: str):
		super().__init__(f"{path}:{line}: {message}")
		self.path = path
		self.line = line
