import json
from io import StringIO

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from geoprop.models import Provenance
from geoprop.serializers import FlatFileReader, fmt_coord, manifest_path

from .helpers import SANTIAGO, SEOUL, TempDirMixin, offset


def run(*args):
    out = StringIO()
    call_command(*[str(a) for a in args], stdout=out, stderr=StringIO())
    return out.getvalue()


def label_line(user, point, source='GPS_MEDIAN'):
    return f"{user}\t{fmt_coord(point.lat)}\t{fmt_coord(point.lon)}\t{source}"


class CommandTestCase(TempDirMixin, SimpleTestCase):

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as cm:
            run(*args)
        self.assertEqual(cm.exception.returncode, code)


class GraphBuildCommandTests(CommandTestCase):

    def test_reciprocated_pair_becomes_one_edge(self):
        mentions = self.write('mentions.tsv', ['# src\tdst\tcount', 'a\tb\t3', 'b\ta\t1', 'a\tc\t5'])
        graph = self.tmp / 'graph.tsv'
        run('graph_build', '--mentions', mentions, '--out', graph)

        self.assertEqual(FlatFileReader(strict=True).read_graph(graph), [('a', 'b', 1)])
        manifest = json.loads(manifest_path(graph).read_text(encoding='utf-8'))
        self.assertEqual(manifest['subcommand'], 'graph_build')
        self.assertEqual(manifest['inputs'], {'mentions': str(mentions)})
        self.assertEqual(manifest['parameters']['strict'], False)

    def test_unreciprocated_only_gives_empty_graph(self):
        mentions = self.write('mentions.tsv', ['a\tb\t3', 'c\td\t1'])
        graph = self.tmp / 'graph.tsv'
        run('graph_build', '--mentions', mentions, '--out', graph)
        self.assertEqual(FlatFileReader(strict=True).read_graph(graph), [])

    def test_strict_malformed_input_is_usage_error(self):
        mentions = self.write('mentions.tsv', ['a\tb\t3', 'broken line'])
        self.assertExitCode(2, 'graph_build', '--mentions', mentions, '--out', self.tmp / 'graph.tsv', '--strict')
        self.assertFalse((self.tmp / 'graph.tsv').exists())

    def test_lenient_malformed_input_is_skipped(self):
        mentions = self.write('mentions.tsv', ['a\tb\t3', 'broken line', 'b\ta\t2'])
        graph = self.tmp / 'graph.tsv'
        output = run('graph_build', '--mentions', mentions, '--out', graph)
        self.assertIn('--strict', output)
        self.assertEqual(FlatFileReader(strict=True).read_graph(graph), [('a', 'b', 2)])

    def test_lenient_skips_non_utf8_line(self):
        mentions = self.tmp / 'mentions.tsv'
        mentions.write_bytes(b'a\tb\t3\n\xff\xfe\tb\t1\nb\ta\t2\n')
        graph = self.tmp / 'graph.tsv'
        run('graph_build', '--mentions', mentions, '--out', graph)
        self.assertEqual(FlatFileReader(strict=True).read_graph(graph), [('a', 'b', 2)])

        self.assertExitCode(2, 'graph_build', '--mentions', mentions, '--out', self.tmp / 'strict.tsv', '--strict')

    def test_missing_input(self):
        self.assertExitCode(2, 'graph_build', '--mentions', self.tmp / 'absent.tsv', '--out', self.tmp / 'graph.tsv')


class LabelsBuildCommandTests(CommandTestCase):

    def test_gps_wins_over_self_report(self):
        gps = self.write('gps.tsv', [f"u1\t{SEOUL.lat}\t{SEOUL.lon}"] * 3)
        gazetteer = self.write('gazetteer.tsv', [f"Santiago\t{SANTIAGO.lat}\t{SANTIAGO.lon}"])
        profiles = self.write('profiles.tsv', ['u1\tSantiago', 'u2\tSantiago', 'u3\tAtlantis'])
        out = self.tmp / 'labels.tsv'
        run('labels_build', '--gps', gps, '--profiles', profiles, '--gazetteer', gazetteer, '--out', out)

        labels = FlatFileReader(strict=True).read_labels(out)
        self.assertEqual(sorted(labels), ['u1', 'u2'])
        self.assertEqual(labels['u1'].location, SEOUL)
        self.assertEqual(labels['u1'].source, 'GPS_MEDIAN')
        self.assertEqual(labels['u2'].source, 'SELF_REPORT')

    def test_no_inputs(self):
        self.assertExitCode(2, 'labels_build', '--out', self.tmp / 'labels.tsv')

    def test_profiles_need_gazetteer(self):
        profiles = self.write('profiles.tsv', ['u1\tSantiago'])
        self.assertExitCode(2, 'labels_build', '--profiles', profiles, '--out', self.tmp / 'labels.tsv')


class LocateCommandTests(CommandTestCase):

    def star_inputs(self, leaves):
        graph = self.write('graph.tsv', [f"center\t{leaf}\t1" for leaf in leaves])
        labels = self.write('labels.tsv', [label_line(leaf, point) for leaf, point in leaves.items()])
        return graph, labels

    def test_star_center_is_located(self):
        graph, labels = self.star_inputs({
            'a': offset(SEOUL, 2.0, 0.0), 'b': offset(SEOUL, 3.0, 120.0), 'c': offset(SEOUL, 4.0, 240.0),
        })
        out, report = self.tmp / 'estimates.tsv', self.tmp / 'report.csv'
        run('locate', '--graph', graph, '--labels', labels, '--out', out, '--report', report)

        estimates = FlatFileReader(strict=True).read_locations(out)
        self.assertEqual(estimates['center'].provenance, Provenance.INFERRED)
        self.assertEqual(estimates['a'].provenance, Provenance.GROUND_TRUTH)

        frame = pd.read_csv(report)
        self.assertEqual(frame['iteration'].tolist()[0], 0)
        self.assertEqual(frame['located_count'].tolist()[:2], [3, 4])
        self.assertTrue(manifest_path(report).is_file())

    def test_dispersed_star_center_is_absent(self):
        graph, labels = self.star_inputs({'a': SEOUL, 'b': SANTIAGO, 'c': offset(SEOUL, 2000.0, 90.0)})
        out = self.tmp / 'estimates.tsv'
        run('locate', '--graph', graph, '--labels', labels, '--out', out)
        self.assertNotIn('center', FlatFileReader(strict=True).read_locations(out))

    def test_thread_count_gives_identical_files(self):
        synthetic = self.tmp / 'synthetic'
        run('synthesize', '--users', 400, '--cities', 4, '--documents', 0, '--seed', 7, '--out-dir', synthetic)
        graph = self.tmp / 'graph.tsv'
        run('graph_build', '--mentions', synthetic / 'mentions.tsv', '--out', graph)

        outputs = []
        for threads in (1, 8):
            out = self.tmp / f"estimates-{threads}.tsv"
            run('locate', '--graph', graph, '--labels', synthetic / 'labels.tsv', '--out', out,
                '--threads', threads, '--chunk-size', 16)
            outputs.append(out.read_bytes())
        self.assertEqual(outputs[0], outputs[1])

    def test_thread_count_gives_identical_files_at_scale(self):
        synthetic = self.tmp / 'synthetic'
        run('synthesize', '--users', 10000, '--cities', 100, '--documents', 0, '--seed', 13, '--out-dir', synthetic)
        graph = self.tmp / 'graph.tsv'
        run('graph_build', '--mentions', synthetic / 'mentions.tsv', '--out', graph)

        outputs = {}
        for threads in (1, 2, 8):
            out = self.tmp / f"estimates-{threads}.tsv"
            run('locate', '--graph', graph, '--labels', synthetic / 'labels.tsv', '--out', out, '--threads', threads)
            outputs[threads] = out.read_bytes()
        self.assertGreater(outputs[1].count(b'INFERRED'), 5000)
        self.assertEqual(outputs[2], outputs[1])
        self.assertEqual(outputs[8], outputs[1])

    def test_invalid_gamma(self):
        graph, labels = self.star_inputs({'a': SEOUL})
        self.assertExitCode(2, 'locate', '--graph', graph, '--labels', labels, '--out', self.tmp / 'e.tsv',
                            '--gamma-km', 0)

    def test_invalid_threads(self):
        graph, labels = self.star_inputs({'a': SEOUL})
        self.assertExitCode(2, 'locate', '--graph', graph, '--labels', labels, '--out', self.tmp / 'e.tsv',
                            '--threads', 0)

    def test_empty_graph_is_runtime_error(self):
        graph = self.write('graph.tsv', ['# u\tv\tweight'])
        labels = self.write('labels.tsv', [label_line('a', SEOUL)])
        self.assertExitCode(1, 'locate', '--graph', graph, '--labels', labels, '--out', self.tmp / 'e.tsv')


class GeotagCommandTests(CommandTestCase):

    def setUp(self):
        super().setUp()
        self.locations = self.write('locations.tsv', [
            label_line(f"s{i}", offset(SEOUL, 0.5 * i, 90.0 * i)) for i in range(4)
        ])

    def test_geotag_with_pattern(self):
        shares = self.write('shares.tsv', [
            *[f"HTTP://YouTube.com/watch?v=x#t={i}\ts{i}" for i in range(4)],
            *[f"http://flickr.com/p/1\ts{i}" for i in range(4)],
            'http://youtube.com/watch?v=y\ts0',
            'garbage\ts1',
        ])
        out = self.tmp / 'geotags.tsv'
        run('geotag', '--shares', shares, '--locations', self.locations, '--out', out, '--url-pattern', '.*youtube.*')

        results = {r.url: r for r in FlatFileReader(strict=True).read_geotags(out)}
        self.assertEqual(sorted(results), ['http://youtube.com/watch?v=x', 'http://youtube.com/watch?v=y'])
        self.assertTrue(results['http://youtube.com/watch?v=x'].is_geotagged)
        self.assertEqual(results['http://youtube.com/watch?v=x'].distinct_located_users, 4)
        self.assertFalse(results['http://youtube.com/watch?v=y'].is_geotagged)

    def test_bad_pattern(self):
        shares = self.write('shares.tsv', ['http://a\ts0'])
        self.assertExitCode(2, 'geotag', '--shares', shares, '--locations', self.locations,
                            '--out', self.tmp / 'g.tsv', '--url-pattern', '[unclosed')


class ToponymAndAlignCommandTests(CommandTestCase):

    def test_toponyms(self):
        gazetteer = self.write('gazetteer.tsv', [
            f"Santiago, Chile\t{SANTIAGO.lat}\t{SANTIAGO.lon}",
            "Rome\t41.9\t12.5",
        ])
        observations = self.write('observations.tsv', [
            *[f"u{i}\tSantiago, Chile\t{SANTIAGO.lat}\t{SANTIAGO.lon}" for i in range(6)],
            *[f"r{i}\tRome\t41.9\t12.5" for i in range(6)],
        ])
        out = self.tmp / 'toponyms.tsv'
        run('toponyms', '--observations', observations, '--gazetteer', gazetteer, '--out', out)

        toponyms = FlatFileReader(strict=True).read_toponyms(out)
        self.assertEqual(list(toponyms.entries), ['Santiago, Chile'])
        self.assertEqual(toponyms.stats['Santiago, Chile'].n_users, 6)

    def test_references_from_document_text(self):
        toponyms = self.write('toponyms.tsv', [
            f"Santiago, Chile\t{SANTIAGO.lat}\t{SANTIAGO.lon}\t6\t0.000",
            f"Seoul\t{SEOUL.lat}\t{SEOUL.lon}\t9\t1.500",
        ])
        documents = self.write('documents.tsv', [
            'http://b.example/2\tmarch in Santiago, Chile today',
            'http://a.example/1\tSeoul and Santiago, Chile',
            'http://c.example/3\tno place here',
            'http://d.example/4\t' + r'Seoul\nnight',
        ])
        out = self.tmp / 'references.tsv'
        output = run('evaluate', 'references', '--documents', documents, '--toponyms', toponyms, '--out', out)

        references = FlatFileReader(strict=True).read_references(out)
        self.assertEqual(list(references), ['http://b.example/2', 'http://d.example/4'])
        self.assertEqual(references['http://d.example/4'], SEOUL)
        self.assertIn('ambiguous: 1', output)
        self.assertEqual(json.loads(manifest_path(out).read_text(encoding='utf-8'))['subcommand'], 'evaluate references')

    def test_align_transfers_locations(self):
        locations = self.write('locations.tsv', [label_line('u1', SEOUL), label_line('u2', SANTIAGO)])
        profiles = self.write('profiles.tsv', [
            'u1\tmy blog http://www.mia.tumblr.com/',
            'u2\tnothing here',
            'u3\thttp://ghost.tumblr.com',
        ])
        out = self.tmp / 'accounts.tsv'
        run('align', '--profiles', profiles, '--locations', locations, '--out', out)

        accounts = FlatFileReader(strict=True).read_locations(out)
        self.assertEqual(list(accounts), ['mia.tumblr.com'])
        self.assertEqual(accounts['mia.tumblr.com'].location, SEOUL)


class PipelineTests(CommandTestCase):

    def test_synthetic_pipeline(self):
        synthetic = self.tmp / 'synthetic'
        run('synthesize', '--users', 1500, '--cities', 10, '--documents', 30, '--seed', 3, '--out-dir', synthetic)
        graph = self.tmp / 'graph.tsv'
        run('graph_build', '--mentions', synthetic / 'mentions.tsv', '--out', graph)

        estimates = self.tmp / 'estimates.tsv'
        run('locate', '--graph', graph, '--labels', synthetic / 'labels.tsv', '--out', estimates)

        cv, cv_records = self.tmp / 'cv.csv', self.tmp / 'cv_records.csv'
        run('evaluate', 'cv', '--graph', graph, '--labels', synthetic / 'labels.tsv', '--out', cv,
            '--records-out', cv_records, '--seed', 1)
        row = pd.read_csv(cv).iloc[0]
        self.assertEqual(row['n_holdout'], 30)
        self.assertLessEqual(row['median_km'], 10.0)
        cv_manifest = json.loads(manifest_path(cv).read_text(encoding='utf-8'))
        self.assertEqual(cv_manifest['subcommand'], 'evaluate cv')
        self.assertEqual(cv_manifest['seed'], 1)

        cdf = self.tmp / 'cdf.csv'
        run('evaluate', 'cdf', '--records', cv_records, '--out', cdf, '--grid', '1,10,100')
        frame = pd.read_csv(cdf)
        self.assertEqual(frame.columns.tolist(), ['threshold_km', 'fraction'])
        self.assertEqual(frame['fraction'].tolist(), sorted(frame['fraction'].tolist()))
        self.assertEqual(frame['fraction'].iloc[-1], 1.0)

        geotags = self.tmp / 'geotags.tsv'
        run('geotag', '--shares', synthetic / 'shares.tsv', '--locations', estimates, '--out', geotags)
        joined = self.tmp / 'joined.csv'
        run('evaluate', 'join', '--results', geotags, '--references', synthetic / 'doc_truth.tsv', '--out', joined)
        records = pd.read_csv(joined)
        self.assertGreater(len(records), 0)
        self.assertTrue((records['discrepancy_km'] <= 10.0).all())

        summary = self.tmp / 'summary.csv'
        run('evaluate', 'summary', '--records', joined, '--out', summary,
            '--max-dispersion-km', 100, '--max-dispersion-km', 1)
        frame = pd.read_csv(summary)
        self.assertEqual(len(frame), 3)
        self.assertTrue(pd.isna(frame['max_dispersion_km'].iloc[0]))
        self.assertEqual(frame['max_dispersion_km'].iloc[1:].tolist(), [1.0, 100.0])
        self.assertEqual(frame['n'].iloc[0], len(records))

        for mode in ('coverage', 'characteristic', 'scatter'):
            with self.subTest(mode=mode):
                out = self.tmp / f"{mode}.csv"
                run('evaluate', mode, '--records', joined, '--out', out)
                self.assertGreater(len(pd.read_csv(out)), 0)

    def test_evaluate_requires_a_mode(self):
        with self.assertRaises(CommandError):
            run('evaluate')
