# test_flow.py
#
# Date: 2026-09-25
#

import unittest
import math
import time
from io import StringIO

import numpy as np
from scipy import stats

from marimba.surface import build_surface
from marimba.flow import (TraceConfig, CrossSectionState, InteriorState, trace,
                          first_return, reverse, trace_many, sample_liouville,
                          sample_cross_section, make_rng, dump_log, load_log,
                          format_time)
from marimba.hyp2 import PointH2, UnitTangentH2
from marimba.errors import OutOfRange, UnknownLabel

from .common import genus2_spec, center_state, assert_close, SLOW_TESTS


def circular_gap(a: float, b: float, period: float) -> float:
    gap = (a - b) % period
    return min(gap, period - gap)


class TraceConfigTestCase(unittest.TestCase):
    def testBounds(self):
        with self.assertRaises(OutOfRange):
            TraceConfig(max_length=0.0)
        with self.assertRaises(OutOfRange):
            TraceConfig()
        with self.assertRaises(OutOfRange):
            TraceConfig(max_crossings=0)
        with self.assertRaises(OutOfRange):
            TraceConfig(max_length=10.0, renorm_period=0)

    def testDictRoundTrip(self):
        cfg = TraceConfig(max_crossings=20)
        self.assertEqual(TraceConfig.from_dict(cfg.as_dict()), cfg)
        self.assertIsNone(cfg.as_dict()["max_length"])


class TraceTestCase(unittest.TestCase):
    def setUp(self):
        self.surface = build_surface(genus2_spec())

    def testDeterministic(self):
        start = sample_liouville(self.surface, 42)
        cfg = TraceConfig(max_length=200.0)
        first = trace(self.surface, start, cfg, seed=42)
        second = trace(self.surface, sample_liouville(self.surface, 42), cfg, seed=42)
        self.assertEqual(first.entries, second.entries)
        self.assertEqual(first.spec_hash, self.surface.spec_hash)

    def testDiagnostics(self):
        cfg = TraceConfig(max_length=500.0)
        log = trace(self.surface, center_state(self.surface, 2, 1.9), cfg)
        steps = log.diagnostics.steps
        # cells are hexagons of area π, a chord is about one unit long
        self.assertGreater(steps, 100)
        self.assertLess(steps, 5000)
        self.assertEqual(log.diagnostics.renormalizations, steps // cfg.renorm_period)

    @unittest.skipUnless(SLOW_TESTS, "long trace")
    def testLongTraceSpeed(self):
        started = time.perf_counter()
        log = trace(self.surface, sample_liouville(self.surface, 5), TraceConfig(max_length=1e7))
        elapsed = time.perf_counter() - started
        self.assertLess(elapsed, 60.0)
        rate = len(log) / log.length
        self.assertLess(abs(rate - 4.0 / (2.0 * math.pi ** 2)) / rate, 0.01)

    def testTimesIncrease(self):
        log = trace(self.surface, center_state(self.surface), TraceConfig(max_length=300.0))
        times = log.times
        self.assertGreater(len(times), 0)
        self.assertTrue(np.all(np.diff(times) > 0.0))
        self.assertGreater(times[0], 0.0)
        self.assertLessEqual(times[-1], 300.0)
        self.assertEqual(log.length, 300.0)
        for entry in log.entries:
            self.assertIn(entry.label, ("C", "D"))
            self.assertGreater(abs(math.sin(entry.theta)), 0.0)
            cuff = self.surface.cuffs[entry.cuff]
            self.assertEqual(cuff.label, entry.label)
            self.assertTrue(0.0 <= entry.x < cuff.length)

    def testCrossingBound(self):
        log = trace(self.surface, center_state(self.surface), TraceConfig(max_crossings=7))
        self.assertEqual(len(log), 7)
        self.assertEqual(log.length, log.entries[-1].time)

    def testLongerTraceExtendsShorter(self):
        start = center_state(self.surface, cell=1, direction=2.1)
        short = trace(self.surface, start, TraceConfig(max_length=100.0))
        long = trace(self.surface, start, TraceConfig(max_length=200.0))
        self.assertEqual(long.entries[:len(short)], short.entries)

    def testCrossingRate(self):
        # crossings per unit length approach ℓ(Γ) / (π² |χ|)
        rate = self.surface.gamma_length / (math.pi ** 2 * abs(self.surface.chi))
        length = 3000.0
        counts = []
        for seed in (1, 2, 3):
            start = sample_liouville(self.surface, seed)
            counts.append(len(trace(self.surface, start, TraceConfig(max_length=length))))
        expected = rate * length
        self.assertLess(abs(np.mean(counts) - expected), 0.2 * expected)

    def testFirstReturnReversibility(self):
        state = CrossSectionState("g0", 0.7, 1.1)
        returned, time = first_return(self.surface, state)
        back, back_time = first_return(self.surface, reverse(returned))
        assert_close(self, back_time, time, 1e-8)
        self.assertEqual(back.cuff, state.cuff)
        length = self.surface.cuffs[state.cuff].length
        self.assertLess(circular_gap(back.x, state.x, length), 1e-8)
        self.assertLess(circular_gap(back.theta, state.theta + math.pi, 2.0 * math.pi), 1e-8)

    def testCrossSectionStartOnBothSides(self):
        for theta in (0.9, 0.9 + math.pi):
            log = trace(self.surface, CrossSectionState("g1", 0.4, theta),
                        TraceConfig(max_crossings=3))
            self.assertEqual(len(log), 3)
            self.assertGreater(log.entries[0].time, 0.0)

    def testUnlabeledCuff(self):
        with self.assertRaises(UnknownLabel):
            trace(self.surface, CrossSectionState("g2", 0.4, 1.0), TraceConfig(max_crossings=1))
        with self.assertRaises(UnknownLabel):
            trace(self.surface, CrossSectionState("nope", 0.4, 1.0), TraceConfig(max_crossings=1))

    def testStartOutsideCell(self):
        far = InteriorState(0, UnitTangentH2(PointH2(0.0, 100.0), 0.0))
        with self.assertRaises(OutOfRange):
            trace(self.surface, far, TraceConfig(max_length=1.0))
        with self.assertRaises(OutOfRange):
            trace(self.surface, CrossSectionState("g0", 5.0, 1.0), TraceConfig(max_length=1.0))

    def testTraceManySequential(self):
        starts = [sample_liouville(self.surface, seed) for seed in (5, 6)]
        cfg = TraceConfig(max_length=100.0)
        logs = trace_many(self.surface, starts, cfg, workers=1, seeds=[5, 6])
        for start, seed, log in zip(starts, (5, 6), logs):
            self.assertEqual(log.entries, trace(self.surface, start, cfg).entries)
            self.assertEqual(log.seed, seed)


class SamplingTestCase(unittest.TestCase):
    def setUp(self):
        self.surface = build_surface(genus2_spec())

    def testLiouvilleInCell(self):
        for seed in range(20):
            state = sample_liouville(self.surface, seed)
            hexagon = self.surface.cells[state.cell].hexagon
            self.assertTrue(hexagon.contains(state.vector.base, 1e-9))

    def testCrossSection(self):
        for seed in range(20):
            state = sample_cross_section(self.surface, seed)
            cuff = self.surface.cuffs[state.cuff]
            self.assertIsNotNone(cuff.label)
            self.assertTrue(0.0 <= state.x < cuff.length)
            self.assertGreater(abs(math.sin(state.theta)), 1e-9)

    def testCrossSectionDistribution(self):
        rng = make_rng(11)
        states = [sample_cross_section(self.surface, rng) for _ in range(2000)]
        folded = [math.fmod(state.theta, math.pi) for state in states]
        result = stats.kstest(folded, lambda t: (1.0 - np.cos(t)) / 2.0)
        self.assertGreater(result.pvalue, 1e-3)
        positions = [state.x / self.surface.cuffs[state.cuff].length for state in states]
        self.assertGreater(stats.kstest(positions, "uniform").pvalue, 1e-3)

    def testFirstReturnPreservesMeasure(self):
        rng = make_rng(12)
        states = [first_return(self.surface, sample_cross_section(self.surface, rng))[0]
                  for _ in range(2000)]
        folded = [math.fmod(state.theta, math.pi) for state in states]
        result = stats.kstest(folded, lambda t: (1.0 - np.cos(t)) / 2.0)
        self.assertGreater(result.pvalue, 1e-3)
        positions = [state.x / self.surface.cuffs[state.cuff].length for state in states]
        self.assertGreater(stats.kstest(positions, "uniform").pvalue, 1e-3)
        # the curve is hit proportionally to its length
        share = sum(1 for state in states if state.cuff == "g0") / len(states)
        self.assertLess(abs(share - 0.5), 0.05)

    def testSeeds(self):
        self.assertEqual(make_rng(7).random(), make_rng(7).random())
        generator = np.random.default_rng(0)
        self.assertIs(make_rng(generator), generator)
        with self.assertRaises(OutOfRange):
            make_rng(-1)


class LogTestCase(unittest.TestCase):
    def setUp(self):
        self.surface = build_surface(genus2_spec())
        self.log = trace(self.surface, center_state(self.surface),
                         TraceConfig(max_length=150.0), seed=11)

    def testDumpLoad(self):
        file = StringIO()
        dump_log(self.log, file)
        file.seek(0)
        loaded = load_log(file)
        self.assertEqual(loaded.notes, self.log.notes)
        self.assertEqual(loaded.spec_hash, self.log.spec_hash)
        self.assertEqual(loaded.seed, 11)
        self.assertEqual(loaded.config, self.log.config)
        self.assertEqual(loaded.start, self.log.start)
        self.assertEqual(list(loaded.times),
                         [format_time(t) for t in self.log.times])

    def testHeaderOnFirstLine(self):
        file = StringIO()
        dump_log(self.log, file)
        lines = file.getvalue().splitlines()
        self.assertEqual(len(lines), len(self.log) + 1)
        self.assertIn('"type": "header"', lines[0])

    def testBrokenLog(self):
        with self.assertRaises(OutOfRange):
            load_log(StringIO(""))
        with self.assertRaises(OutOfRange):
            load_log(StringIO('{"i": 0}\n'))
        with self.assertRaises(OutOfRange):
            load_log(StringIO("not json\n"))
