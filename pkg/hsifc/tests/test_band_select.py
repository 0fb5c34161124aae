import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from hsifc.band_select import (
    DIVERGENCE_EPSILON,
    ScatterSummary,
    divergence_score,
    greedy_band_selection,
    project_bands,
    read_band_list,
    scatter_summary,
    write_band_list,
)
from hsifc.data import PixelDataset
from hsifc.exceptions import BandSelectionError

from .factories import counts_dataset, gaussian_dataset, informative_band_dataset


def two_class_example():
    return PixelDataset(np.array([[0.0], [2.0], [4.0], [6.0]]), [1, 1, 2, 2], np.arange(4), 2)


class ScatterTests(SimpleTestCase):

    def test_worked_example(self):
        summary = scatter_summary(two_class_example())
        np.testing.assert_allclose(summary.within, [1.0])
        np.testing.assert_allclose(summary.between, [4.0])
        np.testing.assert_allclose(summary.priors, [0.5, 0.5])

    def test_identical_class_distributions(self):
        signatures = np.tile(np.array([[1.0, 5.0], [3.0, 7.0]]), (2, 1))
        ds = PixelDataset(signatures, [1, 1, 2, 2], np.arange(4), 2)
        np.testing.assert_allclose(scatter_summary(ds).between, [0.0, 0.0], atol=1e-15)

    def test_law_of_total_variance(self):
        for seed in range(5):
            ds = gaussian_dataset(per_class=(40, 17, 63), bands=6, separation=1.5, seed=seed)
            summary = scatter_summary(ds)
            np.testing.assert_allclose(summary.within + summary.between, ds.signatures.var(axis=0), rtol=1e-10)
            self.assertTrue(np.all(summary.within >= 0))
            self.assertTrue(np.all(summary.between >= 0))

    def test_single_class_rejected(self):
        with self.assertRaises(BandSelectionError):
            scatter_summary(counts_dataset([10, 0]))


class DivergenceTests(SimpleTestCase):

    def test_worked_example(self):
        summary = scatter_summary(two_class_example())
        self.assertAlmostEqual(divergence_score(summary, [0]), 4 / (1 + DIVERGENCE_EPSILON))

    def test_zero_within_scatter_stays_finite(self):
        summary = ScatterSummary(np.array([0.0]), np.array([2.0]), np.array([0.5, 0.5]))
        score = divergence_score(summary, [0])
        self.assertTrue(np.isfinite(score))
        self.assertAlmostEqual(score / (2.0 / DIVERGENCE_EPSILON), 1.0)

    def test_scale_invariance(self):
        ds = gaussian_dataset(per_class=(30, 30, 30), bands=5, separation=1.0, seed=1)
        scaled = ds.with_signatures(ds.signatures * 7.5)
        for subset in ([0], [1, 3], [0, 1, 2, 3, 4]):
            with self.subTest(subset=subset):
                before = divergence_score(scatter_summary(ds), subset)
                after = divergence_score(scatter_summary(scaled), subset)
                self.assertAlmostEqual(after / before, 1.0, places=9)

    def test_empty_subset(self):
        with self.assertRaises(BandSelectionError):
            divergence_score(scatter_summary(two_class_example()), [])


class GreedySelectionTests(SimpleTestCase):

    def test_informative_band_selected_first(self):
        for seed in range(20):
            with self.subTest(seed=seed):
                ds = informative_band_dataset(seed)
                self.assertEqual(greedy_band_selection(ds, 1), [2])

    def test_first_pick_maximizes_single_band_score(self):
        ds = informative_band_dataset(3)
        summary = scatter_summary(ds)
        scores = [divergence_score(summary, [b]) for b in range(ds.bands)]
        self.assertEqual(greedy_band_selection(ds, 1)[0], int(np.argmax(scores)))

    def test_k_equals_band_count(self):
        ds = gaussian_dataset(per_class=(20, 20), bands=6, seed=0)
        self.assertEqual(sorted(greedy_band_selection(ds, 6)), list(range(6)))

    def test_permuting_bands_permutes_selection(self):
        ds = gaussian_dataset(per_class=(40, 25, 30), bands=6, separation=0.7, seed=5)
        permutation = np.array([3, 0, 5, 1, 4, 2])
        permuted = ds.with_signatures(ds.signatures[:, permutation])
        original = greedy_band_selection(ds, 4)
        mapped = [int(permutation[b]) for b in greedy_band_selection(permuted, 4)]
        self.assertEqual(mapped, original)

    def test_ties_go_to_lowest_index(self):
        signatures = np.array([[0.0, 0.0], [2.0, 2.0], [4.0, 4.0], [6.0, 6.0]])
        ds = PixelDataset(signatures, [1, 1, 2, 2], np.arange(4), 2)
        self.assertEqual(greedy_band_selection(ds, 2), [0, 1])

    def test_k_out_of_range(self):
        ds = gaussian_dataset(per_class=(5, 5), bands=3)
        for k in (0, 4):
            with self.subTest(k=k), self.assertRaises(BandSelectionError):
                greedy_band_selection(ds, k)


class ProjectionTests(SimpleTestCase):

    def test_single_band(self):
        ds = gaussian_dataset(per_class=(4, 4), bands=3, seed=0)
        projected = project_bands(ds, [2])
        np.testing.assert_array_equal(projected.signatures, ds.signatures[:, [2]])
        np.testing.assert_array_equal(projected.labels, ds.labels)

    def test_identity(self):
        ds = gaussian_dataset(per_class=(4, 4), bands=3, seed=0)
        np.testing.assert_array_equal(project_bands(ds, [0, 1, 2]).signatures, ds.signatures)

    def test_invalid_indices(self):
        ds = gaussian_dataset(per_class=(4, 4), bands=3, seed=0)
        for bands in ([0, 0], [3], [-1]):
            with self.subTest(bands=bands), self.assertRaises(BandSelectionError):
                project_bands(ds, bands)

    def test_band_list_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_band_list([7, 2, 11], Path(tmp) / 'bands.txt')
            self.assertEqual(path.read_text(), "7\n2\n11\n")
            self.assertEqual(read_band_list(path), [7, 2, 11])

    def test_band_list_rejects_garbage(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bands.txt'
            path.write_text("3\nquatre\n")
            with self.assertRaises(BandSelectionError):
                read_band_list(path)
