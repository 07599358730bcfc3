from django.test import SimpleTestCase

from geoprop.exceptions import InvalidConfig
from geoprop.services import build_graph
from geoprop.services.synthetic import generate, generate_shares

from .helpers import oracle_km


class GenerateTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.dataset = generate(users=500, cities=8, radius_km=10.0, label_fraction=0.2, seed=11)

    def test_same_seed_same_dataset(self):
        again = generate(users=500, cities=8, radius_km=10.0, label_fraction=0.2, seed=11)
        self.assertEqual(again.mentions, self.dataset.mentions)
        self.assertEqual(again.truth, self.dataset.truth)
        self.assertEqual(again.labels, self.dataset.labels)

    def test_different_seed_differs(self):
        other = generate(users=500, cities=8, radius_km=10.0, label_fraction=0.2, seed=12)
        self.assertNotEqual(other.truth, self.dataset.truth)

    def test_homes_stay_near_their_city(self):
        for user, home in self.dataset.truth.items():
            city = self.dataset.cities[self.dataset.city_of[user]]
            self.assertLessEqual(oracle_km(home, city), 0.45 * 10.0 + 1e-6)

    def test_friends_share_a_city_and_are_reciprocated(self):
        graph = build_graph(self.dataset.mentions)
        self.assertGreater(graph.n_edges, 0)
        for a, b, weight in graph.edges():
            self.assertEqual(self.dataset.city_of[a], self.dataset.city_of[b])
            self.assertGreaterEqual(weight, 1)
            self.assertLessEqual(oracle_km(self.dataset.truth[a], self.dataset.truth[b]), 10.0)

    def test_label_count_and_values(self):
        self.assertEqual(len(self.dataset.labels), 100)
        for user, label in self.dataset.labels.items():
            self.assertEqual(label.location, self.dataset.truth[user])
        self.assertEqual(len(self.dataset.unlabeled), 400)
        self.assertEqual(self.dataset.unlabeled, sorted(self.dataset.unlabeled))

    def test_invalid_parameters(self):
        for kwargs in (
            {'users': 1},
            {'cities': 0},
            {'radius_km': 0.0},
            {'label_fraction': 1.5},
            {'friends_per_user': 0},
        ):
            with self.subTest(**kwargs):
                with self.assertRaises(InvalidConfig):
                    generate(**kwargs)


class GenerateSharesTests(SimpleTestCase):

    def test_sharers_come_from_the_document_city(self):
        dataset = generate(users=300, cities=3, seed=2)
        shares, references = generate_shares(dataset, documents=20, sharers_per_document=4, seed=2)

        self.assertEqual(len(references), 20)
        self.assertEqual(len(shares), 80)
        for share in shares:
            city = dataset.cities[dataset.city_of[share.user]]
            self.assertEqual(references[share.url], city)

        again, _ = generate_shares(dataset, documents=20, sharers_per_document=4, seed=2)
        self.assertEqual(again, shares)

    def test_no_city_large_enough(self):
        dataset = generate(users=4, cities=2, seed=0)
        with self.assertRaises(InvalidConfig):
            generate_shares(dataset, sharers_per_document=10)
