from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from geoprop.config import GeodesyConfig
from geoprop.exceptions import EmptySet
from geoprop.models import GeoPoint, WeightedPointSet
from geoprop.services.geodesy import distances_to
from geoprop.services.robust_stats import (
    l1_median,
    lower_median,
    mad_dispersion,
    summarize,
    summarize_groups,
    weighted_objective,
)

from .helpers import SANTIAGO, SEOUL, offset


def random_set(rng, n, weighted=False) -> WeightedPointSet:
    points = [GeoPoint(rng.uniform(30, 40), rng.uniform(120, 130)) for _ in range(n)]
    weights = rng.integers(1, 6, size=n).tolist() if weighted else None
    return WeightedPointSet.of(points, weights)


def brute_force_medoid(s: WeightedPointSet) -> GeoPoint:
    return min(s.points, key=lambda p: (weighted_objective(s, p), p.lat, p.lon))


class LowerMedianTests(SimpleTestCase):

    def test_odd_and_even(self):
        self.assertEqual(lower_median([9.0, 1.0, 5.0]), 5.0)
        self.assertEqual(lower_median([4.0, 1.0, 3.0, 2.0]), 2.0)

    def test_empty(self):
        with self.assertRaises(EmptySet):
            lower_median([])


class L1MedianTests(SimpleTestCase):

    def test_single_point(self):
        self.assertEqual(l1_median(WeightedPointSet.of([SEOUL])), SEOUL)

    def test_coincident_points(self):
        self.assertEqual(l1_median(WeightedPointSet.of([SEOUL, SEOUL, SEOUL])), SEOUL)

    def test_empty_set(self):
        with self.assertRaises(EmptySet):
            l1_median(WeightedPointSet.of([]))

    def test_seven_points_match_exhaustive_search(self):
        rng = np.random.default_rng(7)
        s = random_set(rng, 7)
        self.assertEqual(l1_median(s), brute_force_medoid(s))

    def test_random_weighted_sets_match_exhaustive_search(self):
        rng = np.random.default_rng(2024)
        for _ in range(500):
            s = random_set(rng, int(rng.integers(1, 11)), weighted=True)
            self.assertEqual(l1_median(s), brute_force_medoid(s))

    def test_result_does_not_depend_on_input_order(self):
        rng = np.random.default_rng(8)
        s = random_set(rng, 9, weighted=True)
        order = rng.permutation(len(s))
        shuffled = WeightedPointSet.of([s.points[i] for i in order], [s.weights[i] for i in order])
        self.assertEqual(l1_median(s), l1_median(shuffled))

    def test_refinement_never_increases_objective(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            s = random_set(rng, int(rng.integers(2, 11)), weighted=True)
            medoid = l1_median(s)
            refined = l1_median(s, refine=True)
            self.assertLessEqual(weighted_objective(s, refined), weighted_objective(s, medoid) * (1 + 1e-9))

    def test_refined_median_does_not_depend_on_input_order(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            s = random_set(rng, int(rng.integers(3, 12)), weighted=True)
            order = rng.permutation(len(s))
            shuffled = WeightedPointSet.of([s.points[i] for i in order], [s.weights[i] for i in order])
            self.assertEqual(summarize(s, refine=True), summarize(shuffled, refine=True))

    def test_refinement_moves_off_data_points(self):
        # 정삼각형 꼭짓점: 기하 중앙값은 내부에 있다
        corners = [offset(SEOUL, 10.0, azimuth) for azimuth in (0.0, 120.0, 240.0)]
        s = WeightedPointSet.of(corners)
        refined = l1_median(s, refine=True)
        self.assertNotIn(refined, corners)
        self.assertLess(weighted_objective(s, refined), weighted_objective(s, l1_median(s)))

    def test_outlier_does_not_drag_center(self):
        cluster = [offset(SEOUL, float(km), 45.0 * km) for km in range(1, 10)]
        center = l1_median(WeightedPointSet.of(cluster + [SANTIAGO]))
        self.assertIn(center, cluster)
        self.assertLess(distances_to([center.lat], [center.lon], SEOUL)[0], 10_000.0)


class MadDispersionTests(SimpleTestCase):

    def test_coincident_points(self):
        self.assertEqual(mad_dispersion(WeightedPointSet.of([SEOUL] * 3), SEOUL), 0.0)

    def test_odd_length_median(self):
        s = WeightedPointSet.of([offset(SEOUL, 1.0, 10.0), offset(SEOUL, 5.0, 100.0), offset(SEOUL, 9.0, 200.0)])
        self.assertAlmostEqual(mad_dispersion(s, SEOUL), 5.0, places=5)

    def test_even_length_takes_lower_middle(self):
        rng = np.random.default_rng(10)
        s = random_set(rng, 10)
        center = GeoPoint(35.0, 125.0)
        lats, lons, _ = s.arrays()
        expected = np.sort(distances_to(lats, lons, center))[4] / 1000.0
        self.assertEqual(mad_dispersion(s, center), expected)

    def test_weights_are_ignored(self):
        points = [offset(SEOUL, 1.0), offset(SEOUL, 2.0), offset(SEOUL, 30.0)]
        unweighted = mad_dispersion(WeightedPointSet.of(points), SEOUL)
        weighted = mad_dispersion(WeightedPointSet.of(points, [1, 1, 100]), SEOUL)
        self.assertEqual(unweighted, weighted)


class SummarizeTests(SimpleTestCase):

    def test_single_point(self):
        summary = summarize(WeightedPointSet.of([SEOUL]))
        self.assertEqual((summary.center, summary.dispersion_km, summary.n), (SEOUL, 0.0, 1))

    def test_coincident_points(self):
        summary = summarize(WeightedPointSet.of([SEOUL] * 3))
        self.assertEqual((summary.center, summary.dispersion_km, summary.n), (SEOUL, 0.0, 3))

    def test_matches_composition_of_median_and_dispersion(self):
        rng = np.random.default_rng(9)
        s = random_set(rng, 9, weighted=True)
        summary = summarize(s)
        center = l1_median(s)
        self.assertEqual(summary.center, center)
        self.assertAlmostEqual(summary.dispersion_km, mad_dispersion(s, center), places=9)
        self.assertEqual(summary.n, 9)
        self.assertFalse(summary.refined)

    def test_batched_groups_match_individual_summaries(self):
        rng = np.random.default_rng(12)
        sets = [random_set(rng, int(rng.integers(1, 8)), weighted=True) for _ in range(20)]
        batched = summarize_groups([s.arrays() for s in sets])
        for s, summary in zip(sets, batched):
            single = summarize(s)
            self.assertEqual(summary.center, single.center)
            self.assertEqual(summary.n, single.n)
            self.assertAlmostEqual(summary.dispersion_km, single.dispersion_km, places=9)

    def test_empty_group_is_rejected(self):
        with self.assertRaises(EmptySet):
            summarize_groups([(np.zeros(0), np.zeros(0), np.zeros(0))])

    def test_group_larger_than_pair_batch_matches_full_matrix(self):
        rng = np.random.default_rng(13)
        big = random_set(rng, 60, weighted=True)
        small = random_set(rng, 5)
        groups = [small.arrays(), big.arrays(), small.arrays()]
        full = summarize_groups(groups)
        full_refined = summarize_groups([big.arrays()], refine=True)

        # 60점 = 1770쌍, 행 블록은 100 // 60 = 1행씩
        with mock.patch.object(GeodesyConfig, 'PAIR_BATCH', 100):
            blocked = summarize_groups(groups)
            blocked_refined = summarize_groups([big.arrays()], refine=True)

        for expected, actual in zip(full + full_refined, blocked + blocked_refined):
            self.assertEqual(actual.center, expected.center)
            self.assertEqual((actual.n, actual.refined), (expected.n, expected.refined))
            self.assertAlmostEqual(actual.dispersion_km, expected.dispersion_km, places=9)
        self.assertEqual(blocked[1].center, brute_force_medoid(big))
