import random
from collections import Counter

from django.test import SimpleTestCase

from geoprop.exceptions import AmbiguousName
from geoprop.models import GazetteerEntry, GeoPoint
from geoprop.services import Gazetteer, ToponymMatcher, build_unambiguous, geotag_by_toponym, toponym_references

from .helpers import SANTIAGO, SEOUL, offset

# (이름, 사용자 수, GPS ↔ 사전 좌표 거리 km, 포함 여부)
BOUNDARY_CASES = [
    ('Alpha', 5, 49.0, True),
    ('Bravo', 4, 1.0, False),
    ('Charlie', 5, 51.0, False),
    ('Delt', 5, 1.0, False),
    ('Echo City', 5, 1.0, True),
    ('Foxtrot', 6, 49.0, True),
    ('Hotel', 5, 51.0, False),
    ('India', 4, 49.0, False),
]


def boundary_fixture():
    entries = []
    observations = []
    for k, (name, n_users, km, _) in enumerate(BOUNDARY_CASES):
        place = GeoPoint(10.0 * k - 30.0, 20.0 * k - 60.0)
        entries.append(GazetteerEntry(name, place))
        for i in range(n_users):
            observations.append((f"{name}-{i}", name, offset(place, km, 360.0 * i / n_users)))
    return Gazetteer(entries), observations


class GazetteerTests(SimpleTestCase):

    def setUp(self):
        self.gazetteer = Gazetteer([
            GazetteerEntry('Seoul', SEOUL),
            GazetteerEntry('Seoul', SEOUL),
            GazetteerEntry('Springfield', GeoPoint(39.78, -89.65)),
            GazetteerEntry('Springfield', GeoPoint(42.10, -72.59)),
        ])

    def test_exact_lookup(self):
        self.assertEqual(self.gazetteer.lookup('Seoul'), SEOUL)
        self.assertEqual(self.gazetteer.lookup(' Seoul '), SEOUL)
        self.assertIsNone(self.gazetteer.lookup('seoul'))

    def test_duplicate_rows_with_same_point_are_not_ambiguous(self):
        self.assertFalse(self.gazetteer.is_ambiguous('Seoul'))
        self.assertEqual(len(self.gazetteer), 2)

    def test_ambiguous_name(self):
        self.assertTrue(self.gazetteer.is_ambiguous('Springfield'))
        with self.assertRaises(AmbiguousName):
            self.gazetteer.lookup('Springfield')

    def test_names(self):
        self.assertEqual(self.gazetteer.names(), ['Seoul', 'Springfield'])
        self.assertIn('Seoul', self.gazetteer)
        self.assertNotIn('Busan', self.gazetteer)


class BuildUnambiguousTests(SimpleTestCase):

    def test_boundary_fixture(self):
        gazetteer, observations = boundary_fixture()
        gazetteer.add(GazetteerEntry('Springfield', GeoPoint(39.78, -89.65)))
        gazetteer.add(GazetteerEntry('Springfield', GeoPoint(42.10, -72.59)))
        observations += [('x1', 'Springfield', SEOUL), ('x2', 'Nowhere', SEOUL)]

        stats = {}
        toponyms = build_unambiguous(observations, gazetteer, stats=stats)

        self.assertEqual(sorted(toponyms.entries), sorted(name for name, *_, keep in BOUNDARY_CASES if keep))
        self.assertEqual(stats, {'too_few_users': 2, 'too_far': 2, 'too_short': 1, 'ambiguous': 1, 'unmatched': 1})

    def test_stats_of_retained_names(self):
        gazetteer, observations = boundary_fixture()
        toponyms = build_unambiguous(observations, gazetteer)
        alpha = toponyms.stats['Alpha']
        self.assertEqual(alpha.n_users, 5)
        self.assertAlmostEqual(alpha.median_gps_discrepancy_km, 49.0, places=5)
        self.assertEqual(toponyms.entries['Alpha'], alpha.gazetteer_location)

    def test_four_users_within_a_kilometer_are_too_few(self):
        gazetteer = Gazetteer([GazetteerEntry('Valparaiso', GeoPoint(-33.05, -71.62))])
        observations = [(f"u{i}", 'Valparaiso', offset(GeoPoint(-33.05, -71.62), 0.5, 90.0 * i)) for i in range(4)]
        self.assertEqual(len(build_unambiguous(observations, gazetteer)), 0)

    def test_short_name_is_excluded(self):
        la = GeoPoint(34.05, -118.24)
        gazetteer = Gazetteer([GazetteerEntry('LA', la)])
        observations = [(f"u{i}", 'LA', offset(la, 2.0, 3.6 * i)) for i in range(100)]
        stats = {}
        self.assertNotIn('LA', build_unambiguous(observations, gazetteer, stats=stats))
        self.assertEqual(stats['too_short'], 1)

    def test_stricter_thresholds_never_add_names(self):
        gazetteer, observations = boundary_fixture()
        for parameter, values in (
            ('min_users', [1, 3, 4, 5, 6, 7]),
            ('max_median_km', [1000.0, 50.0, 49.5, 10.0, 0.5]),
            ('min_chars', [1, 4, 5, 6, 8, 10]),
        ):
            with self.subTest(parameter=parameter):
                names = [set(build_unambiguous(observations, gazetteer, **{parameter: v}).entries) for v in values]
                for looser, stricter in zip(names, names[1:]):
                    self.assertLessEqual(stricter, looser)
                self.assertGreater(len(names[0]), len(names[-1]))

    def test_observation_order_does_not_matter(self):
        gazetteer, observations = boundary_fixture()
        expected = build_unambiguous(observations, gazetteer)
        for seed in range(3):
            shuffled = list(observations)
            random.Random(seed).shuffle(shuffled)
            result = build_unambiguous(shuffled, gazetteer)
            self.assertEqual(result.entries, expected.entries)
            self.assertEqual(result.stats, expected.stats)

    def test_repeated_observations_of_one_user_count_once(self):
        gazetteer = Gazetteer([GazetteerEntry('Incheon', GeoPoint(37.46, 126.70))])
        observations = [('same-user', 'Incheon', GeoPoint(37.46, 126.70))] * 10
        self.assertEqual(len(build_unambiguous(observations, gazetteer)), 0)


class ToponymMatcherTests(SimpleTestCase):

    def setUp(self):
        gazetteer, observations = boundary_fixture()
        gazetteer.add(GazetteerEntry('Santiago, Chile', SANTIAGO))
        gazetteer.add(GazetteerEntry('Santiago', GeoPoint(42.88, -8.54)))
        for i in range(5):
            observations.append((f"sc{i}", 'Santiago, Chile', SANTIAGO))
            observations.append((f"sg{i}", 'Santiago', GeoPoint(42.88, -8.54)))
        self.toponyms = build_unambiguous(observations, gazetteer)
        self.matcher = ToponymMatcher(self.toponyms)

    def test_single_match(self):
        self.assertEqual(geotag_by_toponym('protest in Santiago, Chile tomorrow', self.toponyms), SANTIAGO)

    def test_no_toponym(self):
        self.assertIsNone(geotag_by_toponym('nothing to see here', self.matcher))

    def test_snippet_table(self):
        table = [
            ('Alpha', 'Alpha'),
            ('(Alpha)', 'Alpha'),
            ('Alpha, Alpha and Alpha', 'Alpha'),
            ('Alphabet soup', None),
            ('alpha', None),
            ('Alpha and Foxtrot', None),
            ('Echo City tonight', 'Echo City'),
            ('Echo Citywide', None),
            ('Echo', None),
            ('Santiago, Chile', 'Santiago, Chile'),
            ('Santiago', 'Santiago'),
            ('Santiago, Chile and Santiago', None),
            ('at Santiago, Chileans cheered', 'Santiago'),
            ('Bravo', None),
            ('Delt', None),
            ('Foxtrot!', 'Foxtrot'),
            ('#Foxtrot', 'Foxtrot'),
            ('Foxtrot_2', None),
            ('', None),
            ('FoxtrotAlpha', None),
        ]
        for text, expected in table:
            with self.subTest(text=text):
                self.assertEqual(self.matcher.match(text), expected)

    def test_match_counts(self):
        stats = Counter()
        for text in ('Alpha', 'Alpha and Foxtrot', 'nothing'):
            self.matcher.match(text, stats)
        self.assertEqual(stats, Counter({'matched': 1, 'ambiguous': 1, 'no_match': 1}))

    def test_empty_set_matches_nothing(self):
        self.assertIsNone(geotag_by_toponym('Alpha', build_unambiguous([], Gazetteer())))

    def test_references_keep_single_match_documents(self):
        documents = [('d2', 'Alpha and Foxtrot'), ('d1', 'Foxtrot rally'), ('d3', 'no place'), ('d0', 'Alpha')]
        stats = Counter()
        references = toponym_references(documents, self.toponyms, stats)
        self.assertEqual(list(references), ['d0', 'd1'])
        self.assertEqual(references['d1'], self.toponyms.entries['Foxtrot'])
        self.assertEqual(stats['ambiguous'], 1)
        self.assertEqual(stats['no_match'], 1)
