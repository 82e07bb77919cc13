import unittest
import math

import numpy as np

from marimba.melody import (Melody, Motif, FrequencyEstimate, melody_from_log,
                            shift, motif_played_at, motif_frequency,
                            note_frequency, length_from_frequency,
                            expected_note_frequency, expected_return_time,
                            default_battery, isomelody_report, IsomelodyVerdict)
from marimba.surface import build_surface
from marimba.flow import (CrossingLog, CrossingEntry, CrossSectionState, TraceConfig,
                          trace, sample_liouville)
from marimba.errors import (OutOfRange, UnknownLabel, EmptyLog, LabelMismatch,
                            NonNegativeChi)

from .common import genus2_spec, SLOW_TESTS


def alternating(count: int, step: float = 1.0) -> Melody:
    labels = ["C" if i % 2 == 0 else "D" for i in range(count)]
    times = [step * (i + 1) for i in range(count)]
    return Melody(labels, times, step * (count + 1))


class MelodyTestCase(unittest.TestCase):
    def testInvalid(self):
        with self.assertRaises(OutOfRange):
            Melody(["C", "D"], [1.0, 1.0], 5.0)
        with self.assertRaises(OutOfRange):
            Melody(["C"], [6.0], 5.0)
        with self.assertRaises(OutOfRange):
            Melody(["C"], [-1.0], 5.0)
        with self.assertRaises(OutOfRange):
            Melody(["C"], [1.0, 2.0], 5.0)
        with self.assertRaises(UnknownLabel):
            Melody(["X"], [1.0], 5.0, label_set=["C", "D"])

    def testLabelSet(self):
        m = Melody(["D", "C", "D"], [1.0, 2.0, 3.0], 4.0)
        self.assertEqual(m.label_set, ["D", "C"])
        self.assertEqual(list(m.codes), [0, 1, 0])
        m = Melody(["C"], [1.0], 4.0, label_set=["C", "D"])
        self.assertEqual(note_frequency(m, "D").count, 0)

    def testGaps(self):
        m = Melody(["C", "D", "C", "D"], [1.0, 2.0, 4.0, 7.0], 10.0)
        self.assertEqual(list(m.gaps(1)), [1.0, 2.0, 3.0])
        self.assertEqual(list(m.gaps(2)), [3.0, 5.0])

    def testShift(self):
        m = alternating(9)
        shifted = shift(m, 2.5)
        self.assertEqual(shifted.labels, m.labels[2:])
        self.assertEqual(shifted.times[0], 0.5)
        self.assertEqual(shifted.horizon, m.horizon - 2.5)
        self.assertIs(shift(m, 0.0), m)
        with self.assertRaises(OutOfRange):
            shift(m, m.horizon)

    def testFromLog(self):
        start = CrossSectionState("g0", 0.5, 1.0)
        entries = [CrossingEntry(1.0, "g0", "C", 0.1, 1.0),
                   CrossingEntry(2.5, "g1", "D", 0.2, 2.0)]
        log = CrossingLog(start=start, entries=entries, length=3.0,
                          labels=["C", "D"], config=TraceConfig(max_length=3.0))
        m = melody_from_log(log)
        self.assertEqual(m.notes, [("C", 1.0), ("D", 2.5)])
        self.assertEqual(m.horizon, 3.0)

        empty = CrossingLog(start=start, entries=[], length=3.0,
                            labels=["C"], config=TraceConfig(max_length=3.0))
        with self.assertRaises(EmptyLog):
            melody_from_log(empty)


class MotifTestCase(unittest.TestCase):
    def setUp(self):
        self.melody = alternating(9)

    def testInvalidMotif(self):
        with self.assertRaises(OutOfRange):
            Motif(("C", "D"), ())
        with self.assertRaises(OutOfRange):
            Motif(("C", "D"), (0.0,), 0.1)
        with self.assertRaises(OutOfRange):
            Motif(("C", "D", "C"), (2.0, 1.0), 0.1)
        with self.assertRaises(OutOfRange):
            Motif(("C", "D"), (1.0,), 0.0)

    def testPlayedAt(self):
        motif = Motif(("C", "D"), (0.9,), 0.2)
        self.assertTrue(motif_played_at(self.melody, motif, 0))
        self.assertFalse(motif_played_at(self.melody, motif, 1))
        self.assertFalse(motif_played_at(self.melody, motif, 8))
        late = Motif(("C", "D"), (1.5,), 0.2)
        self.assertFalse(motif_played_at(self.melody, late, 0))

    def testWindowIsClosed(self):
        self.assertTrue(motif_played_at(self.melody, Motif(("C", "D"), (1.0,), 0.5), 0))
        self.assertTrue(motif_played_at(self.melody, Motif(("C", "D"), (0.5,), 0.5), 0))

    def testFrequency(self):
        motif = Motif(("C", "D"), (0.9,), 0.2)
        estimate = motif_frequency(self.melody, motif)
        # occurrences must end before the horizon 10 - 1.1
        self.assertEqual(estimate.count, 4)
        self.assertAlmostEqual(estimate.horizon, 8.9)
        self.assertAlmostEqual(estimate.value, 4 / 8.9)
        self.assertAlmostEqual(estimate.std_error, 2 / 8.9)

    def testFrequencyAgreesWithPlayedAt(self):
        rng = np.random.default_rng(3)
        times = np.cumsum(rng.exponential(1.0, 400))
        labels = list(rng.choice(["C", "D", "E"], 400))
        m = Melody(labels, times, float(times[-1]) + 1.0)
        motif = Motif(("C", "E"), (0.5,), 0.7)
        limit = m.horizon - motif.span
        expected = sum(1 for j in range(len(m))
                       if m.times[j] <= limit and motif_played_at(m, motif, j))
        self.assertEqual(motif_frequency(m, motif).count, expected)

    def testDegenerateMotif(self):
        estimate = motif_frequency(self.melody, Motif.note("C"))
        self.assertEqual(estimate, note_frequency(self.melody, "C"))
        self.assertEqual(estimate.count, 5)
        with self.assertRaises(UnknownLabel):
            note_frequency(self.melody, "E")

    def testMotifLongerThanHorizon(self):
        with self.assertRaises(OutOfRange):
            motif_frequency(self.melody, Motif(("C", "D"), (9.5,), 1.0))


class LengthTestCase(unittest.TestCase):
    def testLengthFromFrequency(self):
        f = FrequencyEstimate.from_count(100, 50.0)
        estimate = length_from_frequency(f, -2)
        self.assertAlmostEqual(estimate.value, 4.0 * math.pi ** 2)
        self.assertAlmostEqual(estimate.error, 2.0 * math.pi ** 2 * 10.0 / 50.0)
        self.assertFalse(estimate.degenerate)

    def testExpectedFrequencyInverts(self):
        f = expected_note_frequency(2.0, -2)
        estimate = length_from_frequency(FrequencyEstimate(f, 1000, 1.0, 0.0), -2)
        self.assertAlmostEqual(estimate.value, 2.0)
        self.assertAlmostEqual(expected_return_time(4.0, -2), math.pi ** 2 / 2.0)

    def testDegenerate(self):
        with self.assertLogs("marimba.melody", level="WARNING"):
            estimate = length_from_frequency(FrequencyEstimate.from_count(0, 10.0), -2)
        self.assertTrue(estimate.degenerate)
        self.assertEqual(estimate.value, 0.0)

    def testNonNegativeChi(self):
        with self.assertRaises(NonNegativeChi):
            length_from_frequency(FrequencyEstimate.from_count(3, 1.0), 0)
        with self.assertRaises(NonNegativeChi):
            expected_note_frequency(1.0, 2)
        with self.assertRaises(OutOfRange):
            expected_return_time(0.0, -2)


class TraceStatisticsTestCase(unittest.TestCase):
    def setUp(self):
        spec = genus2_spec(lengths=(0.8, 1.0, 1.3), labels=("C", "D", "E"))
        self.surface = build_surface(spec)
        self.lengths = {"C": 0.8, "D": 1.0, "E": 1.3}
        cfg = TraceConfig(max_length=2e4)
        self.melodies = [melody_from_log(trace(self.surface, sample_liouville(self.surface, seed), cfg))
                         for seed in (1, 2)]

    def testLengthsWithinErrorBars(self):
        for melody in self.melodies:
            for label, length in self.lengths.items():
                estimate = length_from_frequency(note_frequency(melody, label), -2)
                self.assertLessEqual(abs(estimate.value - length), 5.0 * estimate.error, label)

    def testIndependentTracesAreConsistent(self):
        first, second = self.melodies
        report = isomelody_report(first, second, alpha=1e-3)
        self.assertEqual(report.verdict, IsomelodyVerdict.CONSISTENT, report.table())
        self.assertEqual(len(report.comparisons), len(default_battery(first)))


@unittest.skipUnless(SLOW_TESTS, "long Monte Carlo trace")
class LengthRecoveryTestCase(unittest.TestCase):
    def setUp(self):
        spec = genus2_spec(lengths=(0.8, 1.0, 1.3), labels=("C", "D", "E"))
        self.surface = build_surface(spec)
        self.lengths = {"C": 0.8, "D": 1.0, "E": 1.3}
        cfg = TraceConfig(max_length=1e6)
        self.melodies = [melody_from_log(trace(self.surface, sample_liouville(self.surface, seed), cfg))
                         for seed in (1, 2)]

    def testRecoveredLengths(self):
        for melody in self.melodies:
            for label, length in self.lengths.items():
                estimate = length_from_frequency(note_frequency(melody, label), -2)
                self.assertLess(abs(estimate.value - length) / length, 0.02, label)

    def testCrossingRate(self):
        rate = len(self.melodies[0]) / self.melodies[0].horizon
        self.assertLess(abs(rate - expected_note_frequency(3.1, -2)) / rate, 0.01)

    def testSeedsAgree(self):
        first, second = self.melodies
        for label in self.lengths:
            a = note_frequency(first, label)
            b = note_frequency(second, label)
            combined = math.hypot(a.std_error, b.std_error)
            self.assertLessEqual(abs(a.value - b.value), 4.0 * combined, label)


class IsomelodyTestCase(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(17)
        times = np.cumsum(rng.exponential(1.0, 2000))
        labels = ["C" if i % 2 == 0 else "D" for i in range(2000)]
        self.melody = Melody(labels, times, float(times[-1]) + 1.0)

    def testBattery(self):
        battery = default_battery(self.melody)
        self.assertEqual(len(battery), 2 + 4 * 9)
        self.assertEqual(battery[0], Motif.note("C"))
        self.assertEqual(default_battery(Melody(["C"], [1.0], 2.0)), [Motif.note("C")])

    def testSelfConsistent(self):
        report = isomelody_report(self.melody, self.melody)
        self.assertEqual(report.verdict, IsomelodyVerdict.CONSISTENT)
        self.assertIsNone(report.witness)
        self.assertTrue(all(c.z == 0.0 for c in report.comparisons))
        self.assertIn("verdict: consistent", report.table())

    def testDistinguished(self):
        other = Melody(["C"] * len(self.melody), self.melody.times,
                       self.melody.horizon, label_set=["C", "D"])
        report = isomelody_report(self.melody, other)
        self.assertEqual(report.verdict, IsomelodyVerdict.DISTINGUISHED)
        assert report.witness is not None
        self.assertGreater(abs(report.witness.z), report.threshold)
        self.assertEqual(report.as_dict()["verdict"], "distinguished")

    def testLabelMismatch(self):
        other = Melody(["C", "E"], [1.0, 2.0], 3.0)
        with self.assertRaises(LabelMismatch):
            isomelody_report(self.melody, other)

    def testAlpha(self):
        with self.assertRaises(OutOfRange):
            isomelody_report(self.melody, self.melody, alpha=1.0)
