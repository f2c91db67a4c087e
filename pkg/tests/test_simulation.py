import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from scipy.stats import ks_2samp

from foutransfer.consts import ProcessKind, TransferDirection
from foutransfer.errors import DomainError
from foutransfer.grid import Grid
from foutransfer.kernels import FouParams, fbm_covariance
from foutransfer.simulation import (
	Path,
	SeedSpec,
	bm_from_fbm,
	bm_from_fou,
	fbm_exact,
	fbm_from_bm,
	fbm_from_fou,
	fou_from_bm,
	fou_from_fbm,
	sample_bm,
	sample_path,
	sample_paths,
	stationary_connection,
	transform_path,
)


class TestSeeding(unittest.TestCase):
	def test_same_seed_same_path(self):
		grid = Grid(1.0, 32)
		assert_array_equal(
			sample_bm(grid, SeedSpec(42, 3)).values,
			sample_bm(grid, SeedSpec(42, 3)).values,
		)

	def test_path_index_changes_stream(self):
		grid = Grid(1.0, 32)
		self.assertFalse(
			np.array_equal(
				sample_bm(grid, SeedSpec(42, 0)).values,
				sample_bm(grid, SeedSpec(42, 1)).values,
			)
		)

	def test_paths_independent_of_workers(self):
		grid = Grid(1.0, 64)
		params = FouParams(1.0, 1.0, 0.7)
		serial = sample_paths(ProcessKind.FOU, grid, params, 42, 10)
		threaded = sample_paths(
			ProcessKind.FOU, grid, params, 42, 10, workers=4, batch_size=3
		)
		for a, b in zip(serial, threaded):
			assert_array_equal(a.values, b.values)

	def test_paths_require_count(self):
		with self.assertRaises(DomainError):
			sample_paths(
				ProcessKind.BM, Grid(1.0, 8), FouParams(1, 1, 0.5), 1, 0
			)


class TestTransforms(unittest.TestCase):
	def setUp(self):
		self.grid = Grid(1.0, 512)
		self.w = sample_bm(self.grid, SeedSpec(2024))

	def test_fbm_reduces_to_brownian_motion(self):
		b = fbm_from_bm(self.w, 0.5)
		assert_array_equal(b.values, self.w.values)
		self.assertEqual(b.process, ProcessKind.FBM)

	def test_ou_kernel_sum(self):
		params = FouParams(1.0, 2.0, 0.5)
		u = fou_from_bm(self.w, params)
		t = self.grid.points[:, None]
		mid = self.grid.midpoints[None, :]
		weights = np.where(mid < t, 2.0 * np.exp(-(t - mid)), 0.0)
		assert_allclose(u.values, weights @ self.w.increments, atol=1e-10)

	def test_round_trip_through_fou(self):
		for hurst in (0.3, 0.5, 0.7):
			with self.subTest(hurst=hurst):
				params = FouParams(1.0, 1.0, hurst)
				back = bm_from_fou(fou_from_bm(self.w, params), params)
				error = np.max(np.abs(back.values - self.w.values))
				self.assertLess(error, 0.05 * np.max(np.abs(self.w.values)))

	def test_round_trip_through_fbm(self):
		for hurst in (0.3, 0.75):
			with self.subTest(hurst=hurst):
				back = bm_from_fbm(fbm_from_bm(self.w, hurst), hurst)
				error = np.max(np.abs(back.values - self.w.values))
				self.assertLess(error, 0.05 * np.max(np.abs(self.w.values)))

	def test_round_trip_improves_under_refinement(self):
		params = FouParams(1.0, 1.0, 0.75)
		coarse = Path(Grid(1.0, 128), self.w.values[::4], ProcessKind.BM)
		errors = []
		for w in (coarse, self.w):
			back = bm_from_fou(fou_from_bm(w, params), params)
			errors.append(np.max(np.abs(back.values - w.values)))
		self.assertLess(errors[1], errors[0])

	def test_fou_inverse_goes_through_fbm(self):
		for hurst in (0.3, 0.7):
			with self.subTest(hurst=hurst):
				params = FouParams(2.0, 1.5, hurst)
				u = fou_from_bm(self.w, params)
				assert_allclose(
					bm_from_fou(u, params).values,
					bm_from_fbm(fbm_from_fou(u, params), hurst).values,
					atol=1e-10,
				)

	def test_transforms_are_linear(self):
		params = FouParams(1.0, 1.0, 0.3)
		other = sample_bm(self.grid, SeedSpec(2025))
		combined = Path(
			self.grid, 2.0 * self.w.values - 0.5 * other.values, ProcessKind.BM
		)
		for transform in (
			lambda w: fbm_from_bm(w, 0.3),
			lambda w: fou_from_bm(w, params),
			lambda w: bm_from_fou(fou_from_bm(w, params), params),
		):
			assert_allclose(
				transform(combined).values,
				2.0 * transform(self.w).values - 0.5 * transform(other).values,
				atol=1e-10,
			)

	def test_small_theta_reduces_to_scaled_fbm(self):
		params = FouParams(1e-8, 1.5, 0.7)
		u = fou_from_bm(self.w, params)
		b = fbm_from_bm(self.w, 0.7)
		assert_allclose(u.values, 1.5 * b.values, atol=1e-6)
		assert_allclose(
			bm_from_fou(u, params).values,
			bm_from_fbm(b, 0.7).values,
			atol=1e-6,
		)

	def test_transforms_are_adapted(self):
		params = FouParams(1.0, 1.0, 0.3)
		changed = self.w.values.copy()
		changed[257:] += 1.0
		other = Path(self.grid, changed, ProcessKind.BM)
		for transform in (
			lambda w: fbm_from_bm(w, 0.3),
			lambda w: fou_from_bm(w, params),
			lambda w: bm_from_fou(fou_from_bm(w, params), params),
		):
			assert_allclose(
				transform(self.w).values[:257],
				transform(other).values[:257],
				atol=1e-12,
			)

	def test_langevin_round_trip(self):
		params = FouParams(1.0, 1.0, 0.7)
		b = fbm_from_bm(self.w, 0.7)
		back = fbm_from_fou(fou_from_fbm(b, params), params)
		error = np.max(np.abs(back.values - b.values))
		self.assertLess(error, 0.01 * np.max(np.abs(b.values)))

	def test_wrong_process(self):
		params = FouParams(1.0, 1.0, 0.7)
		with self.assertRaises(DomainError):
			bm_from_fou(self.w, params)
		with self.assertRaises(DomainError):
			transform_path(self.w, TransferDirection.FOU_TO_BM, params)

	def test_transform_dispatch(self):
		params = FouParams(1.0, 1.0, 0.7)
		u = transform_path(self.w, TransferDirection.BM_TO_FOU, params)
		self.assertEqual(u.process, ProcessKind.FOU)
		assert_array_equal(u.values, fou_from_bm(self.w, params).values)

	def test_sample_path_drives_all_processes_with_one_seed(self):
		params = FouParams(1.0, 1.0, 0.5)
		seed = SeedSpec(9, 1)
		bm = sample_path(ProcessKind.BM, self.grid, seed, params)
		fbm = sample_path(ProcessKind.FBM, self.grid, seed, params)
		assert_array_equal(bm.values, fbm.values)

	def test_stationary_connection(self):
		params = FouParams(2.0, 1.0, 0.7)
		u = fou_from_bm(self.w, params)
		v = stationary_connection(u, 0.5, params)
		self.assertEqual(v.values[0], 0.5)
		assert_allclose(
			v.values - u.values, 0.5 * np.exp(-2.0 * self.grid.points)
		)


class TestCholeskySampler(unittest.TestCase):
	def test_exact_fbm(self):
		grid = Grid(1.0, 64)
		path = fbm_exact(grid, 0.7, SeedSpec(1))
		self.assertEqual(path.values[0], 0.0)
		self.assertEqual(path.metadata["jitter"], 0.0)
		self.assertEqual(path.process, ProcessKind.FBM)

	def test_exact_fbm_variance(self):
		grid = Grid(1.0, 16)
		ends = np.array(
			[fbm_exact(grid, 0.3, SeedSpec(5, i)).values[-1] for i in range(4000)]
		)
		# Var(B_T) = 1, standard error of the sample variance is about 0.022
		self.assertLess(abs(np.var(ends) - 1.0), 0.1)


class TestFbmLaw(unittest.TestCase):
	def test_kernel_paths_match_covariance(self):
		grid = Grid(1.0, 128)
		hurst = 0.7
		paths = np.array(
			[
				fbm_from_bm(sample_bm(grid, SeedSpec(12, i)), hurst).values
				for i in range(4000)
			]
		)
		middle, end = paths[:, 64], paths[:, -1]
		# standard errors are about 0.02 for these moments
		self.assertAlmostEqual(np.mean(end**2), 1.0, delta=0.1)
		self.assertAlmostEqual(
			np.mean(middle * end),
			float(fbm_covariance(hurst, 0.5, 1.0)),
			delta=0.1,
		)

	def test_kernel_and_cholesky_samplers_agree(self):
		grid = Grid(1.0, 32)
		hurst = 0.3
		kernel = np.array(
			[
				fbm_from_bm(sample_bm(grid, SeedSpec(4, i)), hurst).values[16]
				for i in range(4000)
			]
		)
		exact = np.array(
			[fbm_exact(grid, hurst, SeedSpec(6, i)).values[16] for i in range(4000)]
		)
		self.assertAlmostEqual(np.var(kernel), np.var(exact), delta=0.1)
		self.assertGreater(ks_2samp(kernel, exact).pvalue, 1e-3)

	def test_self_similarity(self):
		# B_{at} has the law of a^H B_t, so Var(B_T) = T^2H on any horizon
		grid = Grid(4.0, 64)
		hurst = 0.75
		ends = np.array(
			[
				fbm_from_bm(sample_bm(grid, SeedSpec(21, i)), hurst).values[-1]
				for i in range(4000)
			]
		)
		self.assertAlmostEqual(np.var(ends) / 4.0 ** (2 * hurst), 1.0, delta=0.1)

	def test_stationary_increments(self):
		grid = Grid(1.0, 64)
		hurst = 0.3
		early, late = [], []
		for i in range(4000):
			b = fbm_from_bm(sample_bm(grid, SeedSpec(33, i)), hurst).values
			if i % 2:
				late.append(b[48] - b[32])
			else:
				early.append(b[16] - b[0])
		self.assertGreater(ks_2samp(early, late).pvalue, 1e-3)


if __name__ == '__main__':
	unittest.main()
