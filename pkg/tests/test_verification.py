import unittest

import numpy as np

from foutransfer.consts import VerifySuite
from foutransfer.grid import Grid
from foutransfer.kernels import FouParams
from foutransfer.verification import VerifyContext, run_suite


def _checks_by_name(checks):
	return {check.name: check for check in checks}


class TestFractionalSuites(unittest.TestCase):
	def setUp(self):
		self.ctx = VerifyContext(
			FouParams(1.0, 1.0, 0.7), Grid(1.0, 256), master_seed=3, paths=4
		)

	def test_roundtrip_suite(self):
		checks = _checks_by_name(run_suite(VerifySuite.ROUNDTRIP, self.ctx))
		for name in ("bm_fou_bm", "bm_fbm_bm", "fou_bm_fou", "fbm_fou_fbm"):
			with self.subTest(name=name):
				self.assertTrue(
					checks[f"roundtrip_{name}_max_relative_error"].passed
				)
		# errors shrink when the grid is refined
		self.assertLess(checks["roundtrip_refinement_ratio_inverse"].value, 1.0)
		self.assertNotIn("L_inv_ou_reduction", checks)

	def test_gram_suite(self):
		checks = run_suite(VerifySuite.GRAM, self.ctx)
		self.assertEqual(len(checks), 1)
		self.assertLess(checks[0].value, 0.05)

	def test_transfer_integral_suite(self):
		checks = _checks_by_name(
			run_suite(VerifySuite.TRANSFER_INTEGRAL, self.ctx)
		)
		self.assertEqual(len(checks), 8)
		for name in ("one", "t", "sin"):
			for process in ("fou", "fbm"):
				with self.subTest(name=name, process=process):
					self.assertTrue(checks[f"transfer_{process}_{name}"].passed)

	def test_rough_roundtrip_suite(self):
		ctx = VerifyContext(
			FouParams(2.0, 0.5, 0.3), Grid(1.0, 256), master_seed=8, paths=2
		)
		checks = _checks_by_name(run_suite(VerifySuite.ROUNDTRIP, ctx))
		self.assertTrue(checks["roundtrip_bm_fou_bm_max_relative_error"].passed)
		self.assertTrue(
			np.isfinite(checks["roundtrip_refinement_ratio_inverse"].value)
		)


class TestBrownianSuites(unittest.TestCase):
	def test_ou_reductions_pass(self):
		ctx = VerifyContext(
			FouParams(1.0, 2.0, 0.5), Grid(1.0, 64), master_seed=1, paths=2
		)
		checks = _checks_by_name(run_suite(VerifySuite.ROUNDTRIP, ctx))
		self.assertTrue(checks["L_ou_reduction"].passed)
		self.assertTrue(checks["L_inv_ou_reduction"].passed)
		gram = _checks_by_name(run_suite(VerifySuite.GRAM, ctx))
		self.assertTrue(gram["gram_bm_reduction"].passed)


if __name__ == '__main__':
	unittest.main()
