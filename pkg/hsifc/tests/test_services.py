import json
import tempfile
from pathlib import Path
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from hsifc.data import write_csv_dataset
from hsifc.envi import write_envi_cube, write_label_raster
from hsifc.exceptions import ConfigError, ExperimentError, SamplingError
from hsifc.serializers import load_run_config
from hsifc.services import ExperimentService, RunConfig, derive_seeds

from .factories import SMALL_HIDDEN, gaussian_dataset, toy_config, toy_scene


class SeedTests(SimpleTestCase):

    def test_derived_seeds_are_stable_and_distinct(self):
        first, second = derive_seeds(3), derive_seeds(3)
        self.assertEqual(first, second)
        self.assertEqual(set(first), {'split', 'balance', 'init', 'shuffle'})
        self.assertEqual(len(set(first.values())), 4)
        self.assertNotEqual(derive_seeds(4), first)


class PipelineTests(SimpleTestCase):

    def setUp(self):
        self.ds = gaussian_dataset(per_class=(200, 200, 200), bands=4, separation=4.0, seed=0)

    @override_settings(
        HSIFC_EPOCHS=100, HSIFC_BATCH_SIZE=256, HSIFC_LEARNING_RATE=1e-3,
        HSIFC_TEST_FRACTION=0.2, HSIFC_DEFAULT_HIDDEN=[250, 300, 400, 300],
    )
    def test_toy_pipeline_reaches_99_percent(self):
        """Réglages par défaut : architecture 250/300/400/300, 100 époques, batch 256"""
        config = RunConfig(csv='toy.csv')
        self.assertIsNone(config.hidden_sizes)
        for seed in range(5):
            with self.subTest(seed=seed):
                result = ExperimentService.run_pipeline(self.ds, config, seed)
                self.assertEqual(list(result.network.spec.hidden_sizes), [250, 300, 400, 300])
                self.assertGreaterEqual(result.metrics.oa, 99.0)
                self.assertEqual(result.leakage_overlap, 0)
                self.assertEqual(result.test_size, 120)
                self.assertEqual(result.train_size, 480)

    def test_unbalanced_input_is_balanced_after_split(self):
        ds = gaussian_dataset(per_class=(200, 120, 60), seed=1)
        result = ExperimentService.run_pipeline(ds, toy_config(epochs=2), 0)
        self.assertEqual(result.balance_plan.target_count, 160)
        self.assertEqual(result.train_size, 3 * 160)
        self.assertEqual(result.leakage_overlap, 0)

    def test_no_balance(self):
        ds = gaussian_dataset(per_class=(200, 120, 60), seed=1)
        result = ExperimentService.run_pipeline(ds, toy_config(epochs=2, balance=False), 0)
        self.assertIsNone(result.balance_plan)
        self.assertEqual(result.train_size, 160 + 96 + 48)

    def test_pre_split_balancing_leaks(self):
        ds = gaussian_dataset(per_class=(200, 120, 60), seed=1)
        config = toy_config(epochs=2, balance_order='pre_split_unsafe', i_understand_leakage=True)
        with self.assertLogs('hsifc.services', level='WARNING'):
            result = ExperimentService.run_pipeline(ds, config, 0)
        self.assertGreater(result.leakage_overlap, 0)

    def test_unsafe_order_requires_acknowledgment(self):
        with self.assertRaises(ConfigError):
            toy_config(balance_order='pre_split_unsafe')

    def test_band_subset(self):
        result = ExperimentService.run_pipeline(self.ds, toy_config(epochs=2, band_k=2), 0)
        self.assertEqual(len(result.bands), 2)
        self.assertEqual(result.network.spec.input_size, 2)
        self.assertEqual(result.stats.bands, 2)

    def test_same_seed_same_network(self):
        first = ExperimentService.run_pipeline(self.ds, toy_config(epochs=3), 7)
        second = ExperimentService.run_pipeline(self.ds, toy_config(epochs=3), 7)
        for name, param in first.network.parameters().items():
            np.testing.assert_array_equal(param, second.network.parameters()[name])
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_report_content(self):
        report = ExperimentService.run_pipeline(self.ds, toy_config(epochs=2), 0).to_dict()
        self.assertEqual(report['architecture'], [4] + SMALL_HIDDEN + [3])
        self.assertEqual(len(report['metrics']['per_class']), 3)
        self.assertEqual(len(report['metrics']['confusion']), 3)
        self.assertEqual(len(report['train_report']['loss_history']), 2)
        json.dumps(report)


class ExperimentTests(SimpleTestCase):

    def setUp(self):
        self.ds = gaussian_dataset(per_class=(200, 200, 200), bands=4, separation=4.0, seed=0)

    def test_repeats_use_consecutive_seeds(self):
        summary = ExperimentService.run_experiments(toy_config(), 5, base_seed=10, dataset=(self.ds, None))
        self.assertEqual(summary.seeds, [10, 11, 12, 13, 14])
        self.assertEqual(summary.repeats, 5)
        self.assertLess(summary.std_oa, 2.0)

    def test_single_repeat_matches_pipeline(self):
        config = toy_config(epochs=3)
        summary = ExperimentService.run_experiments(config, 1, base_seed=2, dataset=(self.ds, None))
        single = ExperimentService.run_pipeline(self.ds, config, 2)
        self.assertEqual(summary.mean_oa, single.metrics.oa)
        self.assertEqual(summary.std_oa, 0.0)

    def test_same_base_seed_same_summary(self):
        config = toy_config(epochs=2)
        first = ExperimentService.run_experiments(config, 2, 0, dataset=(self.ds, None))
        second = ExperimentService.run_experiments(config, 2, 0, dataset=(self.ds, None))
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_failure_carries_repeat_index(self):
        calls = {'n': 0}
        original = ExperimentService.run_pipeline

        def flaky(ds, config, seed, descriptor=None):
            calls['n'] += 1
            if calls['n'] == 2:
                raise SamplingError("classe vide")
            return original(ds, config, seed, descriptor)

        with mock.patch.object(ExperimentService, 'run_pipeline', side_effect=flaky):
            with self.assertRaises(ExperimentError) as ctx:
                ExperimentService.run_experiments(toy_config(epochs=1), 3, 0, dataset=(self.ds, None))
        self.assertEqual(ctx.exception.repeat, 1)
        self.assertEqual(ctx.exception.module, 'sampling')
        self.assertIn('répétition 1', str(ctx.exception))

    def test_unexpected_failure_carries_repeat_index(self):
        with mock.patch.object(ExperimentService, 'run_pipeline', side_effect=ZeroDivisionError("division par zéro")):
            with self.assertRaises(ExperimentError) as ctx:
                ExperimentService.run_experiments(toy_config(epochs=1), 2, 0, dataset=(self.ds, None))
        self.assertEqual(ctx.exception.repeat, 0)
        self.assertIsInstance(ctx.exception.cause, ZeroDivisionError)
        self.assertIn('ZeroDivisionError', str(ctx.exception))

    def test_repeats_must_be_positive(self):
        with self.assertRaises(ConfigError):
            ExperimentService.run_experiments(toy_config(), 0, 0, dataset=(self.ds, None))


class LoadDatasetTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_csv_source(self):
        write_csv_dataset(gaussian_dataset(per_class=(5, 6)), self.dir / 'toy.csv')
        ds, descriptor, gt = ExperimentService.load_dataset(RunConfig(csv=str(self.dir / 'toy.csv')))
        self.assertEqual(len(ds), 11)
        self.assertIsNone(descriptor)
        self.assertIsNone(gt)

    def test_envi_source(self):
        cube, gt = toy_scene()
        write_envi_cube(cube, self.dir / 'scene.hdr')
        write_label_raster(gt, self.dir / 'scene_gt.hdr')
        config = RunConfig(cube=str(self.dir / 'scene.hdr'), gt=str(self.dir / 'scene_gt.hdr'))
        ds, _, loaded_gt = ExperimentService.load_dataset(config)
        self.assertEqual(len(ds), int(np.count_nonzero(gt.labels)))
        np.testing.assert_array_equal(loaded_gt.labels, gt.labels)

    def test_registered_dataset_uses_data_root(self):
        cube, gt = toy_scene(bands=4)
        folder = self.dir / 'botswana'
        write_envi_cube(cube, folder / 'botswana.hdr')
        write_label_raster(gt, folder / 'botswana_gt.hdr')
        with self.assertLogs('hsifc.services', level='WARNING'):
            ds, descriptor, _ = ExperimentService.load_dataset(RunConfig(dataset='botswana', data_dir=str(self.dir)))
        self.assertEqual(descriptor.name, 'botswana')
        self.assertEqual(ds.num_classes, 14)

    @override_settings(HSIFC_DATA_DIR=Path('/nonexistent/hsi'))
    def test_missing_registered_files(self):
        with self.assertRaises(FileNotFoundError) as ctx:
            ExperimentService.load_dataset(RunConfig(dataset='salinas'))
        self.assertIn('salinas.hdr', str(ctx.exception))


class RunConfigTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, payload):
        path = self.dir / 'run.json'
        path.write_text(json.dumps(payload))
        return path

    @override_settings(HSIFC_EPOCHS=12, HSIFC_SEED=5)
    def test_precedence(self):
        path = self.write_config({'csv': 'toy.csv', 'epochs': 40, 'batch_size': 64})
        config = load_run_config(path, {'epochs': 3, 'seed': None})
        self.assertEqual(config.epochs, 3)
        self.assertEqual(config.batch_size, 64)
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.csv, str((self.dir / 'toy.csv').resolve()))

    @override_settings(HSIFC_EPOCHS=7, HSIFC_BATCH_SIZE=32, HSIFC_LEARNING_RATE=0.01, HSIFC_TEST_FRACTION=0.3, HSIFC_SEED=9)
    def test_direct_construction_reads_settings(self):
        config = RunConfig(csv='toy.csv')
        self.assertEqual(
            (config.epochs, config.batch_size, config.learning_rate, config.test_fraction, config.seed),
            (7, 32, 0.01, 0.3, 9),
        )
        self.assertEqual(RunConfig(csv='toy.csv', epochs=2).epochs, 2)

    def test_settings_defaults(self):
        config = load_run_config(None, {'dataset': 'IndianPines'})
        self.assertEqual(config.dataset, 'indian_pines')
        self.assertTrue(config.balance)
        self.assertEqual(config.balance_order, 'post_split')
        self.assertEqual(config.test_fraction, 0.2)
        self.assertEqual(config.repeats, 30)

    def test_invalid_configurations(self):
        cases = [
            {},
            {'dataset': 'houston'},
            {'csv': 'a.csv', 'cube': 'b.hdr', 'gt': 'c.hdr'},
            {'cube': 'b.hdr'},
            {'csv': 'a.csv', 'balance_order': 'pre_split_unsafe'},
            {'csv': 'a.csv', 'bands': [1, 2], 'band_k': 2},
            {'csv': 'a.csv', 'bands': [1, 1]},
            {'csv': 'a.csv', 'test_fraction': 1.0},
            {'csv': 'a.csv', 'epochs': -1},
            {'csv': 'a.csv', 'unknown_key': 1},
        ]
        for payload in cases:
            with self.subTest(payload=payload), self.assertRaises(ConfigError):
                load_run_config(None, payload)

    def test_invalid_json(self):
        path = self.dir / 'run.json'
        path.write_text("{csv: ")
        with self.assertRaises(ConfigError):
            load_run_config(path)

    def test_missing_config_file(self):
        with self.assertRaises(FileNotFoundError):
            load_run_config(self.dir / 'absent.json')
