import unittest

import numpy as np

from marimba.surface import build_surface, validate_spec
from marimba.flow import TraceConfig, CrossSectionState, trace
from marimba.melody import melody_from_log, isomelody_report, IsomelodyVerdict
from marimba.constructions import (SymmetricFamilyParams, symmetric_family_marimba,
                                   half_twist_partner, is_half_twist_pair,
                                   transport_half_twist, deck_involution,
                                   check_deck_involution, CoverCocycle,
                                   cyclic_cover, lift_state,
                                   cover_state_projection)
from marimba.errors import (OutOfRange, NotInFamily, OnGamma, CocycleOrderViolation,
                            SheetOutOfRange, UnknownLabel)

from .common import genus2_spec, center_state


class SymmetricFamilyTestCase(unittest.TestCase):
    def setUp(self):
        params = SymmetricFamilyParams(l_alpha=2.0, l_beta=1.5, twist_alpha=0.25)
        self.spec = symmetric_family_marimba(params)
        self.partner = half_twist_partner(self.spec)

    def testParams(self):
        with self.assertRaises(OutOfRange):
            SymmetricFamilyParams(l_alpha=0.0, l_beta=1.0)
        with self.assertRaises(OutOfRange):
            SymmetricFamilyParams(l_alpha=1.0, l_beta=1.0, label_alpha="x", label_beta="x")

    def testSurface(self):
        self.assertEqual(validate_spec(self.spec), [])
        surface = build_surface(self.spec)
        self.assertEqual(len(surface.cells), 4)
        self.assertEqual(surface.chi, -2)
        self.assertEqual(surface.labels, ["alpha", "beta"])

    def testPartner(self):
        self.assertAlmostEqual(self.partner.gluing("alpha").twist, 1.25)
        self.assertEqual(self.partner.gluing("beta"), self.spec.gluing("beta"))
        self.assertTrue(is_half_twist_pair(self.spec, self.partner))
        self.assertFalse(is_half_twist_pair(self.spec, self.spec))
        self.assertFalse(is_half_twist_pair(self.spec, half_twist_partner(self.partner)))
        self.assertNotEqual(self.spec.spec_hash(), self.partner.spec_hash())

    def testDeckInvolution(self):
        for spec in (self.spec, self.partner):
            surface = build_surface(spec)
            permutation = deck_involution(surface)
            self.assertEqual(permutation, {0: 2, 1: 3, 2: 0, 3: 1})
            self.assertEqual(check_deck_involution(surface), [])

    def testNotInFamily(self):
        with self.assertRaises(NotInFamily):
            half_twist_partner(genus2_spec())
        with self.assertRaises(NotInFamily):
            deck_involution(build_surface(genus2_spec()))
        with self.assertRaises(NotInFamily):
            transport_half_twist(self.spec, self.spec, center_state(build_surface(self.spec)))

    def testTransport(self):
        surface = build_surface(self.spec)
        start = center_state(surface, cell=1, direction=1.3)
        moved = transport_half_twist(self.spec, self.partner, start)
        self.assertEqual(moved, start)
        with self.assertRaises(OnGamma):
            transport_half_twist(self.spec, self.partner, CrossSectionState("alpha", 0.5, 1.0))

    def testPartnersPlayTheSameMelody(self):
        surface = build_surface(self.spec)
        partner = build_surface(self.partner)
        cfg = TraceConfig(max_length=300.0)
        for cell, direction in ((0, 0.7), (3, 2.9)):
            start = center_state(surface, cell, direction)
            first = trace(surface, start, cfg)
            second = trace(partner, transport_half_twist(self.spec, self.partner, start), cfg)
            self.assertGreater(len(first), 0)
            self.assertEqual(first.notes, second.notes)
            np.testing.assert_allclose(first.times, second.times, rtol=0.0, atol=1e-8)

    def testIsomelodyReportOfPartners(self):
        surface = build_surface(self.spec)
        partner = build_surface(self.partner)
        cfg = TraceConfig(max_length=500.0)
        start = center_state(surface, 2, 0.4)
        first = melody_from_log(trace(surface, start, cfg))
        second = melody_from_log(trace(partner, start, cfg))
        report = isomelody_report(first, second)
        self.assertEqual(report.verdict, IsomelodyVerdict.CONSISTENT)


class CoverTestCase(unittest.TestCase):
    def setUp(self):
        self.spec = genus2_spec()
        self.cocycle = CoverCocycle(2, {"g0": 1, "g1": 1})
        self.cover = cyclic_cover(self.spec, self.cocycle)

    def testCoverSpec(self):
        self.assertEqual(self.cover.sheets, 2)
        self.assertEqual(len(self.cover.pieces), 4)
        self.assertEqual(len(self.cover.gluings), 6)
        self.assertEqual(validate_spec(self.cover), [])
        self.assertEqual(self.cover.gluing("g0#1").b.piece, "P1#0")
        self.assertEqual(self.cover.gluing("g2#1").b.piece, "P1#1")

    def testEulerCharacteristic(self):
        for modulus, weights in ((2, {"g0": 1, "g1": 1}), (3, {"g0": 1, "g1": 2})):
            cover = cyclic_cover(self.spec, CoverCocycle(modulus, weights))
            surface = build_surface(cover)
            self.assertEqual(surface.chi, modulus * -2)
            self.assertEqual(surface.labels, ["C", "D"])
            self.assertAlmostEqual(surface.label_length("C"), modulus * 2.0)

    def testLiftedMelody(self):
        base = build_surface(self.spec)
        for modulus, weights in ((2, {"g0": 1, "g1": 1}), (3, {"g0": 1, "g1": 2})):
            cover = cyclic_cover(self.spec, CoverCocycle(modulus, weights))
            surface = build_surface(cover)
            start = center_state(base, 1, 2.2)
            cfg = TraceConfig(max_length=200.0)
            below = trace(base, start, cfg)
            for sheet in range(modulus):
                above = trace(surface, lift_state(cover, start, sheet), cfg)
                self.assertEqual(above.notes, below.notes)
                np.testing.assert_allclose(above.times, below.times, rtol=0.0, atol=1e-8)

    def testLiftsAreSeparateCurves(self):
        cover = cyclic_cover(self.spec, CoverCocycle(3, {"g0": 1, "g1": 2}))
        for base in self.spec.gluings:
            if base.label is None:
                continue
            lifts = [g for g in cover.gluings if g.label == base.label]
            self.assertEqual(len(lifts), 3)
            self.assertTrue(all(g.length == base.length for g in lifts))
        surface = build_surface(cover)
        self.assertAlmostEqual(surface.label_length("C"), 3 * 2.0)

    def testOrderViolation(self):
        with self.assertRaises(CocycleOrderViolation):
            cyclic_cover(self.spec, CoverCocycle(2, {"g0": 1}))
        with self.assertRaises(CocycleOrderViolation):
            cyclic_cover(self.spec, CoverCocycle(4, {"g0": 1, "g1": 2}))
        with self.assertRaises(OutOfRange):
            cyclic_cover(self.spec, CoverCocycle(2, {"g0": 1, "g1": 1, "h": 1}))
        with self.assertRaises(OutOfRange):
            cyclic_cover(self.cover, self.cocycle)

    def testCocycle(self):
        cocycle = CoverCocycle.parse(3, "g0=1, g1=5")
        self.assertEqual(cocycle.weight("g1"), 2)
        self.assertEqual(cocycle.weight("g2"), 0)
        with self.assertRaises(OutOfRange):
            CoverCocycle.parse(3, "g0")
        with self.assertRaises(OutOfRange):
            CoverCocycle.parse(3, "g0=one")
        with self.assertRaises(OutOfRange):
            CoverCocycle(0)

    def testLiftState(self):
        base = build_surface(self.spec)
        start = center_state(base, 3)
        lifted = lift_state(self.cover, start, 1)
        self.assertEqual(lifted.cell, 7)
        self.assertEqual(lift_state(self.cover, start, 2), lift_state(self.cover, start, 0))
        with self.assertRaises(SheetOutOfRange):
            lift_state(self.cover, start, -1)
        self.assertEqual(cover_state_projection(self.cover, lifted), (start, 1))

    def testLiftCrossSection(self):
        state = CrossSectionState("g0", 0.5, 1.0)
        lifted = lift_state(self.cover, state, 1)
        self.assertEqual(lifted.cuff, "g0#1")
        self.assertEqual(cover_state_projection(self.cover, lifted), (state, 1))
        with self.assertRaises(UnknownLabel):
            lift_state(self.cover, CrossSectionState("h", 0.5, 1.0), 0)
        with self.assertRaises(OutOfRange):
            cover_state_projection(self.cover, state)
