import unittest
import math
import json
from io import StringIO

import numpy as np

from marimba.melody import Melody
from marimba.spectra import (EmpiricalCDF, gap_cdf, arc_cdf_values, arc_cdf_model,
                             arc_total_mass, mixture_cdf, peel_orthospectrum,
                             SeparationVerdict, classify_separating,
                             single_note_sides, export_cdf_csv,
                             export_estimate_json)
from marimba.errors import (OutOfRange, TooFewNotes, MultiLabel, NonNegativeChi,
                            QuadratureNotConverged, NegativeResidual, NoDetection)


def single_note(gaps: list[float]) -> Melody:
    times = 0.5 + np.concatenate(([0.0], np.cumsum(gaps)))
    return Melody(["S"] * len(times), times, float(times[-1]) + 1.0)


class GapCDFTestCase(unittest.TestCase):
    def setUp(self):
        self.melody = Melody(["C", "D", "C", "D"], [1.0, 2.0, 4.0, 7.0], 10.0)
        self.grid = np.array([0.0, 1.0, 2.0, 3.0])

    def testValues(self):
        cdf = gap_cdf(self.melody, 1, self.grid)
        np.testing.assert_allclose(cdf.values, [0.0, 1 / 3, 2 / 3, 1.0])
        self.assertEqual(cdf.n, 3)
        self.assertEqual(list(cdf.samples), [1.0, 2.0, 3.0])

    def testSteps(self):
        cdf = gap_cdf(self.melody, 2, np.array([0.0, 3.0, 5.0]))
        np.testing.assert_allclose(cdf.values, [0.0, 0.5, 1.0])
        with self.assertRaises(TooFewNotes):
            gap_cdf(self.melody, 4)
        with self.assertRaises(OutOfRange):
            gap_cdf(self.melody, 0)

    def testParity(self):
        even = gap_cdf(self.melody, 1, self.grid, parity="even", total=3)
        odd = gap_cdf(self.melody, 1, self.grid, parity="odd", total=3)
        np.testing.assert_allclose(even.values, [0.0, 1 / 3, 1 / 3, 2 / 3])
        whole = gap_cdf(self.melody, 1, self.grid)
        np.testing.assert_allclose(even.values + odd.values, whole.values)
        with self.assertRaises(OutOfRange):
            gap_cdf(self.melody, 1, self.grid, parity="third")

    def testDefaultGrid(self):
        cdf = gap_cdf(self.melody)
        self.assertEqual(cdf.grid[0], 0.0)
        self.assertEqual(cdf.values[-1], 1.0)

    def testInvalidGrid(self):
        with self.assertRaises(OutOfRange):
            EmpiricalCDF(np.array([0.0, 1.0]), np.array([0.0]), n=1)
        with self.assertRaises(OutOfRange):
            EmpiricalCDF(np.array([1.0, 0.0]), np.array([0.0, 0.0]), n=1)

    def testNoise(self):
        cdf = gap_cdf(self.melody, 1, self.grid)
        self.assertEqual(cdf.noise()[0], 0.0)
        self.assertAlmostEqual(cdf.noise()[1], math.sqrt(2 / 27))


class ArcModelTestCase(unittest.TestCase):
    def testZeroBeforeArcLength(self):
        values = arc_cdf_values(4.0, 1.0, np.array([0.0, 0.5, 1.0]))
        self.assertTrue(np.all(values == 0.0))

    def testTotalMass(self):
        value = arc_cdf_values(4.0, 1.0, np.array([12.0]), nodes=512)[0]
        self.assertAlmostEqual(value, arc_total_mass(4.0, 1.0), delta=1e-5)
        self.assertAlmostEqual(arc_total_mass(4.0, 1.0),
                               math.log(1.0 / math.tanh(0.5)) / 4.0)

    def testMonotone(self):
        grid = np.linspace(0.0, 8.0, 401)
        values = arc_cdf_values(3.0, 0.7, grid)
        self.assertTrue(np.all(np.diff(values) >= -1e-12))
        self.assertLess(values[-1], arc_total_mass(3.0, 0.7) + 1e-9)

    def testQuadratureMethodsAgree(self):
        grid = np.linspace(1.0, 6.0, 26)
        gauss = arc_cdf_values(4.0, 0.9, grid, method="gauss", nodes=256)
        midpoint = arc_cdf_values(4.0, 0.9, grid, method="midpoint")
        np.testing.assert_allclose(gauss, midpoint, atol=1e-6)

    def testModel(self):
        grid = np.linspace(0.0, 6.0, 61)
        model = arc_cdf_model(4.0, 1.0, grid, nodes=256)
        self.assertEqual(model.nodes, 512)
        self.assertLessEqual(model.refinement, 1e-6)
        np.testing.assert_allclose(model.values,
                                   arc_cdf_values(4.0, 1.0, grid, nodes=512))

    def testNotConverged(self):
        grid = np.linspace(0.0, 6.0, 61)
        with self.assertRaises(QuadratureNotConverged):
            arc_cdf_model(4.0, 1.0, grid, method="midpoint", nodes=2, tolerance=1e-12)

    def testInvalid(self):
        with self.assertRaises(OutOfRange):
            arc_cdf_values(0.0, 1.0, np.array([2.0]))
        with self.assertRaises(OutOfRange):
            arc_cdf_values(1.0, 1.0, np.array([2.0]), method="simpson")


class PeelTestCase(unittest.TestCase):
    def setUp(self):
        self.grid = np.linspace(0.0, 4.0, 2001)
        self.cdf = mixture_cdf(4.0, [(1.0, 2), (1.5, 1)], self.grid)

    def testRecoverSynthetic(self):
        estimate = peel_orthospectrum(self.cdf, 4.0, detect_threshold=1e-4, max_entries=2)
        self.assertEqual(len(estimate.entries), 2)
        self.assertAlmostEqual(estimate.entries[0].length, 1.0, delta=1e-5)
        self.assertAlmostEqual(estimate.entries[1].length, 1.5, delta=1e-5)
        self.assertEqual([e.multiplicity for e in estimate.entries], [2, 1])
        self.assertLess(estimate.diagnostics["max_residual"], 1e-4)

    def testNoDetection(self):
        empty = EmpiricalCDF(self.grid, np.zeros(len(self.grid)), n=None)
        with self.assertRaises(NoDetection):
            peel_orthospectrum(empty, 4.0)

    def testNegativeResidual(self):
        # a too short multicurve overestimates each arc
        with self.assertRaises(NegativeResidual):
            peel_orthospectrum(self.cdf, 2.0, detect_threshold=1e-4)

    def testStepMismatch(self):
        melody = single_note([1.0, 2.0, 1.5, 2.5])
        with self.assertRaises(OutOfRange):
            peel_orthospectrum(gap_cdf(melody, 1), 4.0, k=2)
        with self.assertRaises(OutOfRange):
            peel_orthospectrum(self.cdf, 4.0, max_entries=0)

    def testExport(self):
        estimate = peel_orthospectrum(self.cdf, 4.0, detect_threshold=1e-4, max_entries=2)
        file = StringIO()
        export_estimate_json(estimate, file, {"spec_hash": "abc"})
        record = json.loads(file.getvalue())
        self.assertEqual(record["k"], 1)
        self.assertEqual(record["spec_hash"], "abc")
        self.assertEqual(len(record["entries"]), 2)

        file = StringIO()
        export_cdf_csv(self.cdf, file)
        lines = file.getvalue().splitlines()
        self.assertEqual(lines[0], "T,value")
        self.assertEqual(len(lines), len(self.grid) + 1)


class SingleNoteTestCase(unittest.TestCase):
    def testSeparating(self):
        melody = single_note([1.0, 2.0] * 10)
        report = classify_separating(melody)
        self.assertEqual(report.verdict, SeparationVerdict.SEPARATING)
        self.assertEqual(report.m_even, 1.0)
        self.assertEqual(report.m_odd, 2.0)

    def testNonSeparating(self):
        melody = single_note([1.0, 1.5, 1.2, 1.0, 1.4, 1.3])
        report = classify_separating(melody)
        self.assertEqual(report.verdict, SeparationVerdict.NONSEPARATING_OR_NONGENERIC)
        self.assertEqual(report.as_dict()["verdict"], "nonseparating_or_nongeneric")

    def testRequiresSingleNote(self):
        with self.assertRaises(MultiLabel):
            classify_separating(Melody(["C", "D", "C"], [1.0, 2.0, 3.0], 4.0))
        with self.assertRaises(TooFewNotes):
            classify_separating(single_note([1.0]))

    def testSides(self):
        melody = single_note([1.0, 3.0] * 20)
        report = single_note_sides(melody, -2)
        self.assertEqual(report.area_total, 4.0 * math.pi)
        fractions = [side.fraction for side in report.sides]
        self.assertAlmostEqual(sum(fractions), 1.0)
        self.assertAlmostEqual(fractions[0], 0.25)
        self.assertAlmostEqual(sum(side.area for side in report.sides), 4.0 * math.pi)
        self.assertEqual([side.bottom for side in report.sides], [1.0, 3.0])
        self.assertEqual(report.sides[0].parity, "even")
        with self.assertRaises(NonNegativeChi):
            single_note_sides(melody, 0)
