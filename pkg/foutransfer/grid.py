"""Uniform time grids and the functions sampled on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import DomainError, GridMismatchError, ParameterError


@dataclass(frozen=True)
class Grid:
	"""Uniform discretization t_i = i*T/n of [0, T]."""

	horizon: float
	steps: int

	def __post_init__(self):
		if not (math.isfinite(self.horizon) and self.horizon > 0):
			raise ParameterError("T", "T must be a positive finite number")
		if self.steps < 2:
			raise ParameterError("n", "n must be at least 2")

	@property
	def step(self) -> float:
		return self.horizon / self.steps

	@cached_property
	def points(self) -> np.ndarray:
		points = np.arange(self.steps + 1, dtype=float) * self.step
		points[-1] = self.horizon
		points.flags.writeable = False
		return points

	@cached_property
	def midpoints(self) -> np.ndarray:
		midpoints = (np.arange(self.steps, dtype=float) + 0.5) * self.step
		midpoints.flags.writeable = False
		return midpoints

	def index_of(self, time: float) -> int:
		"""Index of a grid-aligned time, raising for off-grid values."""
		position = time / self.step
		index = round(position)
		if abs(position - index) > 1e-9 * max(1.0, position):
			raise DomainError(f"time {time} is not aligned with the grid")
		if not 0 <= index <= self.steps:
			raise DomainError(f"time {time} lies outside [0, {self.horizon}]")
		return index

	def restrict(self, steps: int) -> Grid:
		"""Grid on [0, t_steps] sharing this grid's spacing."""
		if steps == self.steps:
			return self
		return Grid(horizon=steps * self.step, steps=steps)

	def check_same(self, other: Grid) -> None:
		if self != other:
			raise GridMismatchError(
				f"grid mismatch: {self} does not match {other}"
			)


@dataclass
class GridFunction:
	grid: Grid
	values: np.ndarray

	def __post_init__(self):
		self.values = np.asarray(self.values, dtype=float)
		if self.values.shape != (self.grid.steps + 1,):
			raise GridMismatchError(
				f"expected {self.grid.steps + 1} values, got {self.values.shape}"
			)
		if not np.all(np.isfinite(self.values)):
			raise DomainError("grid function values must be finite")

	@classmethod
	def from_callable(cls, grid: Grid, func, **kwargs) -> GridFunction:
		return cls(grid, np.asarray(func(grid.points), dtype=float), **kwargs)

	def __call__(self, time: float) -> float:
		return float(np.interp(time, self.grid.points, self.values))


class IntegrandRole(Enum):
	"""Process an integrand is integrated against."""

	BM = "bm"
	FBM = "fbm"
	FOU = "fou"


def power_law_fit(
	near: float, far: float | None, exponent: float
) -> tuple[float, float]:
	"""Offset a and scale b*h^e of f ~ a + b x^e through f(h) and f(2h).

	Without a second value the offset is taken as zero.
	"""
	if far is None:
		return 0.0, near
	scale = (far - near) / (2.0**exponent - 1.0)
	return near - scale, scale


def power_law_cell_mean(
	near: float, far: float | None, exponent: float
) -> float:
	offset, scale = power_law_fit(near, far, exponent)
	return offset + scale / (1.0 + exponent)


@dataclass
class IntegrandFunction(GridFunction):
	role: IntegrandRole = IntegrandRole.BM
	# power-law exponent e of f(t) ~ a + b t^e as t -> 0
	origin_exponent: float = field(default=0.0)
	# same, in the distance T - t to the right end
	terminal_exponent: float = field(default=0.0)

	def singular_cells(self):
		"""(cell, f at distance h, f at distance 2h, exponent) for each end
		cell whose integrand follows a power law."""
		n = self.grid.steps
		short = n < 4
		cells = []
		if self.origin_exponent != 0.0:
			far = None if short else self.values[2]
			cells.append((0, self.values[1], far, self.origin_exponent))
		if self.terminal_exponent != 0.0:
			far = None if short else self.values[n - 2]
			cells.append(
				(n - 1, self.values[n - 1], far, self.terminal_exponent)
			)
		return cells

	def cell_weights(self) -> np.ndarray:
		"""Left-point values, with power-law cell means in the end cells."""
		weights = self.values[:-1].copy()
		for cell, near, far, exponent in self.singular_cells():
			weights[cell] = power_law_cell_mean(near, far, exponent)
		return weights

	def cell_square_integrals(self) -> np.ndarray:
		step = self.grid.step
		squared = self.values**2
		cells = 0.5 * step * (squared[:-1] + squared[1:])
		for cell, near, far, exponent in self.singular_cells():
			if exponent <= -0.5:
				raise DomainError("integrand is not square integrable")
			offset, scale = power_law_fit(near, far, exponent)
			cells[cell] = step * (
				offset**2
				+ 2 * offset * scale / (1.0 + exponent)
				+ scale**2 / (1.0 + 2.0 * exponent)
			)
		return cells


def cell_weights(f: GridFunction) -> np.ndarray:
	"""Per-cell weights of f in a left-point Wiener sum."""
	if isinstance(f, IntegrandFunction):
		return f.cell_weights()
	return f.values[:-1]


def indicator(grid: Grid, level: float, role=IntegrandRole.BM):
	"""The indicator 1_[0, level) sampled on the grid."""
	return IntegrandFunction(
		grid, (grid.points < level - 1e-12 * grid.horizon).astype(float), role
	)
