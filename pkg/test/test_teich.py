import unittest
import math

import numpy as np

from marimba.surface import build_surface
from marimba.arcs import ArcClass
from marimba.teich import (TwistArc, TwistFamily, two_step_components,
                           two_step_length, twist_variety_residual)
from marimba.errors import OutOfRange, UnknownLabel, WrongStepCount

from .common import genus2_spec, SLOW_TESTS


def synthetic_family() -> TwistFamily:
    halves = [(1.0, 1.2, 0.3), (0.8, 1.5, -0.4), (1.1, 0.9, 1.0)]
    placeholder = ArcClass((0, 0), (), (0, 2), k=2)
    arcs = []
    for l1, l2, d in halves:
        a = math.sinh(l1) * math.sinh(l2)
        b = math.cosh(l1) * math.cosh(l2)
        arcs.append(TwistArc(arc_class=placeholder, a=a, b=b, d=d,
                             delta=d - halves[0][2],
                             length=math.acosh(a * math.cosh(d) + b)))
    return TwistFamily(genus2_spec(), "g2", tuple(arcs))


class TwistFormulaTestCase(unittest.TestCase):
    def setUp(self):
        self.family = synthetic_family()

    def testResidualVanishesOnFamily(self):
        for theta in (-0.5, 0.0, 0.25, 0.7, 2.0):
            residual = twist_variety_residual(self.family, self.family.cosh_lengths(theta))
            np.testing.assert_allclose(residual, 0.0, atol=1e-9)

    def testResidualOffFamily(self):
        x = self.family.cosh_lengths(0.25)
        x[1] += 0.1
        residual = twist_variety_residual(self.family, x)
        self.assertGreater(abs(residual[0]), 1e-3)

    def testLengthAtZeroTwist(self):
        for i, arc in enumerate(self.family.arcs):
            self.assertAlmostEqual(self.family.length(i, 0.0), arc.length)

    def testLengthDerivative(self):
        h = 1e-6
        for i in range(self.family.r):
            numeric = (self.family.length(i, 0.4 + h) - self.family.length(i, 0.4 - h)) / (2 * h)
            self.assertAlmostEqual(self.family.length_derivative(i, 0.4), numeric, places=6)

    def testMinimumAtOppositeOffset(self):
        # the length is smallest when the feet line up
        arc = self.family.arcs[1]
        self.assertAlmostEqual(self.family.length_derivative(1, -arc.d), 0.0)

    def testSpecAt(self):
        spec = self.family.spec_at(0.5)
        self.assertAlmostEqual(spec.gluing("g2").twist, 0.7 + 0.5)
        self.assertEqual(spec.gluing("g0").twist, 0.3)

    def testInvalid(self):
        with self.assertRaises(OutOfRange):
            TwistFamily(genus2_spec(), "g2", self.family.arcs[:1])
        with self.assertRaises(OutOfRange):
            two_step_length(self.family, 3, 0.0)
        with self.assertRaises(OutOfRange):
            twist_variety_residual(self.family, [2.0, 3.0])
        with self.assertRaises(OutOfRange):
            twist_variety_residual(self.family, [0.5, 100.0, 100.0])

    def testAsDict(self):
        record = self.family.as_dict()
        self.assertEqual(record["cuff"], "g2")
        self.assertEqual(len(record["arcs"]), 3)


class TwistFamilyTestCase(unittest.TestCase):
    def testFromSpecErrors(self):
        with self.assertRaises(OutOfRange):
            TwistFamily.from_spec(genus2_spec(), "g2", r=1)
        with self.assertRaises(UnknownLabel):
            TwistFamily.from_spec(genus2_spec(), "nope")

    def testComponentsNeedTwoSteps(self):
        surface = build_surface(genus2_spec())
        with self.assertRaises(WrongStepCount):
            two_step_components(surface, ArcClass((0, 0), (), (0, 2), k=1))

    def testShortGeometricFamily(self):
        # long cuffs keep the seams and the 2-step arcs short
        family = TwistFamily.from_spec(genus2_spec(lengths=(4.0, 4.0, 4.0)), "g2", r=2)
        self.assertEqual(family.r, 2)
        for i, arc in enumerate(family.arcs):
            self.assertGreater(arc.a, 0.0)
            self.assertAlmostEqual(two_step_length(family, i, 0.0), arc.length, places=7)
        residual = twist_variety_residual(family, family.cosh_lengths(-0.4))
        np.testing.assert_allclose(residual, 0.0, atol=1e-8)

    @unittest.skipUnless(SLOW_TESTS, "slow arc search")
    def testGeometricFamily(self):
        family = TwistFamily.from_spec(genus2_spec(), "g2", r=3)
        self.assertEqual(family.r, 3)
        self.assertEqual(family.spec.labels, ["g2"])
        self.assertEqual(family.arcs[0].delta, 0.0)
        for i, arc in enumerate(family.arcs):
            self.assertAlmostEqual(family.length(i, 0.0), arc.length, places=7)
        residual = twist_variety_residual(family, family.cosh_lengths(0.3))
        np.testing.assert_allclose(residual, 0.0, atol=1e-8)
