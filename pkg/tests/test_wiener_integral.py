import unittest

import numpy as np

from foutransfer.consts import ProcessKind
from foutransfer.errors import DomainError, GridMismatchError
from foutransfer.grid import Grid, GridFunction, IntegrandFunction, indicator
from foutransfer.kernels import FouParams
from foutransfer.simulation import (
	Path,
	SeedSpec,
	fbm_from_bm,
	fou_from_bm,
	sample_bm,
)
from foutransfer.wiener_integral import (
	fbm_integral_variance,
	integrate,
	integrate_by_parts,
	l2_norm_squared,
	transfer_integral_bm_to_fbm,
	transfer_integral_to_bm,
	transfer_integral_to_fou,
)


class TestIntegrals(unittest.TestCase):
	def setUp(self):
		self.grid = Grid(1.0, 2048)
		self.w = sample_bm(self.grid, SeedSpec(11))

	def test_constant_integrand(self):
		one = GridFunction.from_callable(self.grid, np.ones_like)
		self.assertAlmostEqual(
			integrate(one, self.w).value, self.w.values[-1], places=12
		)
		self.assertAlmostEqual(
			integrate_by_parts(one, self.w).value, self.w.values[-1], places=12
		)

	def test_by_parts_agrees_with_left_point_sum(self):
		g = GridFunction.from_callable(self.grid, lambda t: t)
		self.assertAlmostEqual(
			integrate(g, self.w).value,
			integrate_by_parts(g, self.w).value,
			delta=1e-2,
		)

	def test_indicator_stops_the_path(self):
		g = indicator(self.grid, 0.5)
		self.assertAlmostEqual(
			integrate(g, self.w).value, self.w.values[1024], places=12
		)

	def test_grid_mismatch(self):
		g = GridFunction.from_callable(Grid(1.0, 16), np.ones_like)
		with self.assertRaises(GridMismatchError):
			integrate(g, self.w)


class TestNorms(unittest.TestCase):
	def test_plain_norm(self):
		grid = Grid(2.0, 64)
		one = GridFunction.from_callable(grid, np.ones_like)
		self.assertAlmostEqual(l2_norm_squared(one), 2.0, places=12)

	def test_singular_origin(self):
		grid = Grid(1.0, 4096)
		values = np.ones(grid.steps + 1)
		values[1:] = grid.points[1:] ** -0.2
		f = IntegrandFunction(grid, values, origin_exponent=-0.2)
		self.assertAlmostEqual(l2_norm_squared(f), 1 / 0.6, delta=0.05)

	def test_not_square_integrable(self):
		grid = Grid(1.0, 8)
		f = IntegrandFunction(grid, np.ones(9), origin_exponent=-0.5)
		with self.assertRaises(DomainError):
			l2_norm_squared(f)

	def test_singular_terminal(self):
		grid = Grid(1.0, 4096)
		values = np.ones(grid.steps + 1)
		values[:-1] = (1.0 - grid.points[:-1]) ** -0.2
		f = IntegrandFunction(grid, values, terminal_exponent=-0.2)
		self.assertAlmostEqual(l2_norm_squared(f), 1 / 0.6, delta=0.01)

	def test_power_law_with_offset(self):
		grid = Grid(1.0, 64)
		h = grid.step
		f = IntegrandFunction.from_callable(
			grid, lambda t: 2.0 + 3.0 * t**0.3, origin_exponent=0.3
		)
		self.assertAlmostEqual(
			f.cell_weights()[0], 2.0 + 3.0 * h**0.3 / 1.3, places=12
		)
		self.assertAlmostEqual(
			f.cell_square_integrals()[0],
			h * (4.0 + 12.0 * h**0.3 / 1.3 + 9.0 * h**0.6 / 1.6),
			places=12,
		)

	def test_integrate_uses_cell_means(self):
		grid = Grid(1.0, 64)
		w = sample_bm(grid, SeedSpec(8))
		values = np.ones(grid.steps + 1)
		values[1:] = grid.points[1:] ** -0.3
		f = IntegrandFunction(grid, values, origin_exponent=-0.3)
		self.assertAlmostEqual(
			integrate(f, w).value,
			float(f.cell_weights() @ w.increments),
			places=12,
		)
		self.assertAlmostEqual(
			f.cell_weights()[0], grid.step**-0.3 / 0.7, places=10
		)

	def test_fbm_variance_of_constant(self):
		grid = Grid(1.0, 128)
		one = GridFunction.from_callable(grid, np.ones_like)
		self.assertAlmostEqual(fbm_integral_variance(one, 0.7), 1.0, places=12)


class TestTransferIdentities(unittest.TestCase):
	def setUp(self):
		self.grid = Grid(1.0, 512)
		self.w = sample_bm(self.grid, SeedSpec(3))

	def _check_fou_transfer(self, params: FouParams, g: GridFunction):
		u = fou_from_bm(self.w, params)
		direct = integrate(g, u).value
		transferred = transfer_integral_to_bm(g, params, self.w)
		self.assertLess(
			abs(direct - transferred.value), 0.05 * (1 + abs(direct))
		)
		self.assertGreater(transferred.variance_estimate, 0.0)

	def test_fou_transfer_ou(self):
		params = FouParams(1.0, 1.0, 0.5)
		for g in (
			GridFunction.from_callable(self.grid, np.ones_like),
			GridFunction.from_callable(self.grid, np.sin),
		):
			self._check_fou_transfer(params, g)

	def test_fou_transfer_long_memory(self):
		params = FouParams(1.0, 1.0, 0.7)
		self._check_fou_transfer(
			params, GridFunction.from_callable(self.grid, np.ones_like)
		)

	def test_transfer_to_fou_recovers_brownian_integral(self):
		params = FouParams(1.0, 2.0, 0.5)
		u = fou_from_bm(self.w, params)
		f = GridFunction.from_callable(self.grid, np.ones_like)
		result = transfer_integral_to_fou(f, params, u)
		self.assertAlmostEqual(result.value, self.w.values[-1], delta=0.05)
		self.assertAlmostEqual(result.variance_estimate, 1.0, places=10)

	def test_transfer_to_fou_long_memory(self):
		f = GridFunction.from_callable(self.grid, np.ones_like)
		w_end = self.w.values[-1]
		for hurst in (0.3, 0.7):
			with self.subTest(hurst=hurst):
				params = FouParams(1.0, 2.0, hurst)
				u = fou_from_bm(self.w, params)
				result = transfer_integral_to_fou(f, params, u)
				self.assertLess(
					abs(result.value - w_end), 0.05 * (1 + abs(w_end))
				)

	def test_brownian_to_fbm_long_memory(self):
		b = fbm_from_bm(self.w, 0.7)
		f = GridFunction.from_callable(self.grid, np.cos)
		direct = integrate(f, self.w).value
		self.assertLess(
			abs(transfer_integral_bm_to_fbm(f, 0.7, b).value - direct),
			0.05 * (1 + abs(direct)),
		)

	def test_brownian_to_fbm_identity(self):
		b = Path(self.grid, self.w.values, ProcessKind.FBM, 0.5)
		f = GridFunction.from_callable(self.grid, np.cos)
		self.assertAlmostEqual(
			transfer_integral_bm_to_fbm(f, 0.5, b).value,
			integrate(f, self.w).value,
			places=12,
		)

	def test_wrong_driver(self):
		f = GridFunction.from_callable(self.grid, np.ones_like)
		with self.assertRaises(DomainError):
			transfer_integral_to_fou(f, FouParams(1, 1, 0.5), self.w)


if __name__ == '__main__':
	unittest.main()
