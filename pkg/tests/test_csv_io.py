import tempfile
import unittest
from pathlib import Path as FilePath

import numpy as np
from numpy.testing import assert_array_equal

from foutransfer.consts import ProcessKind
from foutransfer.csv_io import read_paths, write_meta, write_paths
from foutransfer.errors import CsvFormatError
from foutransfer.grid import Grid
from foutransfer.simulation import SeedSpec, sample_bm


class TestPathFiles(unittest.TestCase):
	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.dir = FilePath(self.tmp.name)
		self.grid = Grid(1.0, 16)

	def tearDown(self):
		self.tmp.cleanup()

	def _write(self, text: str) -> FilePath:
		file = self.dir / "input.csv"
		file.write_text(text, encoding="UTF-8")
		return file

	def test_single_path_schema(self):
		path = sample_bm(self.grid, SeedSpec(1))
		file = write_paths(self.dir / "paths.csv", [path])
		lines = file.read_text(encoding="UTF-8").splitlines()
		self.assertEqual(lines[0], "t,value")
		self.assertEqual(len(lines), 18)
		[read] = read_paths(file, ProcessKind.BM)
		assert_array_equal(read.values, path.values)
		self.assertEqual(read.grid, self.grid)

	def test_multi_path_schema(self):
		paths = [sample_bm(self.grid, SeedSpec(1, i)) for i in range(3)]
		file = write_paths(self.dir / "paths.csv", paths)
		self.assertTrue(
			file.read_text(encoding="UTF-8").startswith("path_id,t,value\n")
		)
		read = read_paths(file, ProcessKind.FOU)
		self.assertEqual(len(read), 3)
		self.assertEqual(read[2].process, ProcessKind.FOU)
		assert_array_equal(read[2].values, paths[2].values)

	def test_bad_header(self):
		file = self._write("time,value\n0,0\n")
		with self.assertRaises(CsvFormatError) as cm:
			read_paths(file, ProcessKind.BM)
		self.assertEqual(cm.exception.line, 1)

	def test_bad_number_reports_line(self):
		file = self._write("t,value\n0,0\n0.5,abc\n1,2\n")
		with self.assertRaises(CsvFormatError) as cm:
			read_paths(file, ProcessKind.BM)
		self.assertEqual(cm.exception.line, 3)
		self.assertIn(":3:", str(cm.exception))

	def test_uneven_times(self):
		file = self._write("t,value\n0,0\n0.4,1\n1,2\n")
		with self.assertRaises(CsvFormatError) as cm:
			read_paths(file, ProcessKind.BM)
		self.assertEqual(cm.exception.line, 3)

	def test_meta(self):
		file = write_meta(self.dir / "meta.txt", {"hurst": 0.7, "n": 8})
		self.assertEqual(
			file.read_text(encoding="UTF-8"), "hurst = 0.7\nn = 8\n"
		)


if __name__ == '__main__':
	unittest.main()
