import unittest

from marimba.surface import build_surface, seam_length
from marimba.arcs import (ArcClass, SideCrossing, develop_arc, orthogeodesic_length,
                          find_orthoarcs, reference_arc_classes,
                          enumerate_arc_classes, orthospectrum_oracle,
                          oracle_coverage)
from marimba.errors import OutOfRange, InvalidRealization, BudgetExceeded

from .common import genus2_spec, SLOW_TESTS


class OrthoArcTestCase(unittest.TestCase):
    def setUp(self):
        # twists do not change the seams between the two labeled curves
        self.surface = build_surface(genus2_spec())

    def testShortestArcsAreSeams(self):
        spectrum = orthospectrum_oracle(self.surface, 1, 1.8)
        self.assertEqual(len(spectrum), 1)
        length, count = spectrum[0]
        self.assertAlmostEqual(length, seam_length(1.0, 1.0, 1.0), places=8)
        self.assertEqual(count, 4)

    def testSeamArcFeet(self):
        for arc in find_orthoarcs(self.surface, 1, 1.8):
            labels = {self.surface.cuffs[arc.start.gluing].label,
                      self.surface.cuffs[arc.stop.gluing].label}
            self.assertEqual(labels, {"C", "D"})

    def testAgreesWithExhaustiveSearch(self):
        pruned = find_orthoarcs(self.surface, 1, 2.0)
        reference = reference_arc_classes(self.surface, 1, 2.0, max_depth=4)
        self.assertEqual(len(pruned), len(reference))
        for first, second in zip(pruned, reference):
            self.assertAlmostEqual(first.length, second.length, places=8)

    def testSortedByLength(self):
        arcs = find_orthoarcs(self.surface, 1, 4.0)
        lengths = [arc.length for arc in arcs]
        self.assertEqual(lengths, sorted(lengths))
        self.assertTrue(all(length <= 4.0 for length in lengths))
        classes = enumerate_arc_classes(self.surface, 1, 4.0)
        self.assertEqual(classes, [arc.arc_class for arc in arcs])

    def testClassLengthIsStable(self):
        for arc in find_orthoarcs(self.surface, 1, 4.0):
            again = orthogeodesic_length(self.surface, arc.arc_class)
            self.assertAlmostEqual(again.length, arc.length, places=10)

    def testCoverage(self):
        spectrum = orthospectrum_oracle(self.surface, 1, 4.0)
        coverage = oracle_coverage(spectrum, self.surface.gamma_length)
        self.assertGreater(coverage, 0.0)
        self.assertLessEqual(coverage, 1.0)
        shorter = oracle_coverage(spectrum[:1], self.surface.gamma_length)
        self.assertLessEqual(shorter, coverage)

    def testInvalidArguments(self):
        with self.assertRaises(OutOfRange):
            find_orthoarcs(self.surface, 0, 2.0)
        with self.assertRaises(OutOfRange):
            find_orthoarcs(self.surface, 1, 0.0)
        with self.assertRaises(OutOfRange):
            find_orthoarcs(self.surface, 1, 2.0, order="random")
        with self.assertRaises(OutOfRange):
            reference_arc_classes(self.surface, 1, 2.0, max_depth=-1)

    def testBudget(self):
        with self.assertRaises(BudgetExceeded):
            find_orthoarcs(self.surface, 1, 6.0, budget=1)

    def testDevelopErrors(self):
        gamma = sorted(ref for ref in self.surface.half_sides
                       if self.surface.is_gamma_side(*ref))
        start = gamma[0]
        # seams are not on the multicurve
        with self.assertRaises(OutOfRange):
            develop_arc(self.surface, ArcClass((start[0], 1), (), start))
        other_cell = (start[0] + 1) % len(self.surface.cells)
        word = (SideCrossing(other_cell, 1),)
        with self.assertRaises(InvalidRealization):
            develop_arc(self.surface, ArcClass(start, word, start))
        with self.assertRaises(InvalidRealization):
            develop_arc(self.surface, ArcClass(start, (SideCrossing(start[0], 1, 5),), start))

    def testDevelopedEmptyWord(self):
        start = (0, 0)
        end = (0, 2)
        self.assertTrue(self.surface.is_gamma_side(*start))
        self.assertTrue(self.surface.is_gamma_side(*end))
        arc = orthogeodesic_length(self.surface, ArcClass(start, (), end))
        self.assertAlmostEqual(arc.length, seam_length(1.0, 1.0, 1.0), places=9)

    def assertContainsArcs(self, found, reference):
        for arc in reference:
            self.assertTrue(any(abs(other.length - arc.length) < 1e-8
                                and other.start.gluing == arc.start.gluing
                                and other.stop.gluing == arc.stop.gluing
                                for other in found),
                            f"missing arc of length {arc.length}")

    def testPruningKeepsShortArcs(self):
        pruned = find_orthoarcs(self.surface, 1, 3.0)
        reference = reference_arc_classes(self.surface, 1, 3.0, max_depth=4)
        self.assertGreaterEqual(len(pruned), len(reference))
        self.assertContainsArcs(pruned, reference)

    def testShortTwoStepArcs(self):
        pruned = find_orthoarcs(self.surface, 2, 3.6)
        for arc in pruned:
            self.assertGreaterEqual(arc.length, 2.0 * seam_length(1.0, 1.0, 1.0) - 1e-8)
        reference = reference_arc_classes(self.surface, 2, 3.6, max_depth=3)
        self.assertContainsArcs(pruned, reference)

    @unittest.skipUnless(SLOW_TESTS, "slow arc search")
    def testTwoStepArcs(self):
        arcs = find_orthoarcs(self.surface, 2, 4.0)
        for arc in arcs:
            self.assertGreaterEqual(arc.length, 2.0 * seam_length(1.0, 1.0, 1.0) - 1e-8)
