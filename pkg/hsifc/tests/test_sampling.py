import numpy as np
from django.test import SimpleTestCase

from hsifc.datasets import all_descriptors, dataset_descriptor
from hsifc.exceptions import SamplingError
from hsifc.sampling import (
    balance_by_duplication,
    holdout_count,
    leakage_overlap,
    plan_balance,
    stratified_split,
)

from .factories import counts_dataset, gaussian_dataset

BALANCED_COUNTS = {
    'indian_pines': 1964,
    'salinas': 9016,
    'botswana': 251,
    'pavia_university': 14919,
    # le chiffre publié est 52778 ; ceil(0.2 * 65971) = 13195 test laisse 52776
    'pavia_centre': 52776,
}


class HoldoutCountTests(SimpleTestCase):

    def test_ceiling(self):
        self.assertEqual(holdout_count(46, 0.2), 10)
        self.assertEqual(holdout_count(20, 0.2), 4)
        self.assertEqual(holdout_count(1, 0.2), 1)

    def test_exact_products_are_not_rounded_up(self):
        # 0.2 * 3090 vaut 618.0000000000001 en flottant
        self.assertEqual(holdout_count(3090, 0.2), 618)
        self.assertEqual(holdout_count(65971, 0.2), 13195)


class StratifiedSplitTests(SimpleTestCase):

    def test_test_counts_match_reference_denominators(self):
        for descriptor in all_descriptors():
            with self.subTest(name=descriptor.name):
                ds = counts_dataset(descriptor.class_counts)
                split = stratified_split(ds, 0.2, seed=0)
                expected = [total for _, total in descriptor.reference_per_class]
                np.testing.assert_array_equal(split.test.class_counts(), expected)
                np.testing.assert_array_equal(
                    split.train.class_counts() + split.test.class_counts(), descriptor.class_counts
                )

    def test_indian_pines_examples(self):
        ds = counts_dataset(dataset_descriptor('indian_pines').class_counts)
        test_counts = stratified_split(ds, 0.2, seed=7).test.class_counts()
        self.assertEqual(test_counts[0], 10)
        self.assertEqual(test_counts[1], 286)
        self.assertEqual(test_counts[-1], 19)

    def test_partition_is_disjoint_and_complete(self):
        ds = gaussian_dataset(per_class=(17, 31, 8), seed=4)
        split = stratified_split(ds, 0.2, seed=11)
        indices = np.concatenate([split.train.pixel_index, split.test.pixel_index])
        self.assertEqual(len(np.intersect1d(split.train.pixel_index, split.test.pixel_index)), 0)
        np.testing.assert_array_equal(np.sort(indices), ds.pixel_index)

    def test_same_seed_same_split(self):
        ds = gaussian_dataset(seed=2)
        first = stratified_split(ds, 0.2, seed=5)
        second = stratified_split(ds, 0.2, seed=5)
        np.testing.assert_array_equal(first.test.pixel_index, second.test.pixel_index)

    def test_different_seeds_differ(self):
        ds = gaussian_dataset(seed=2)
        first = stratified_split(ds, 0.2, seed=5)
        second = stratified_split(ds, 0.2, seed=6)
        self.assertFalse(np.array_equal(first.test.pixel_index, second.test.pixel_index))

    def test_single_record_class_goes_to_test(self):
        ds = counts_dataset([1, 10])
        split = stratified_split(ds, 0.2, seed=0)
        np.testing.assert_array_equal(split.test.class_counts(), [1, 2])
        np.testing.assert_array_equal(split.train.class_counts(), [0, 8])

    def test_empty_class_rejected(self):
        ds = counts_dataset([5, 0, 5])
        with self.assertRaises(SamplingError):
            stratified_split(ds, 0.2, seed=0)

    def test_fraction_out_of_range(self):
        ds = counts_dataset([5, 5])
        for fraction in (0.0, 1.0, -0.1):
            with self.subTest(fraction=fraction), self.assertRaises(SamplingError):
                stratified_split(ds, fraction, seed=0)


class BalanceTests(SimpleTestCase):

    def test_balanced_counts_match_reference(self):
        for name, expected in BALANCED_COUNTS.items():
            with self.subTest(name=name):
                ds = counts_dataset(dataset_descriptor(name).class_counts)
                split = stratified_split(ds, 0.2, seed=0)
                balanced = balance_by_duplication(split.train, seed=0)
                np.testing.assert_array_equal(balanced.class_counts(), expected)

    def test_pavia_centre_reported_count_differs_by_two(self):
        descriptor = dataset_descriptor('pavia_centre')
        self.assertEqual(descriptor.reported_balanced_count - BALANCED_COUNTS['pavia_centre'], 2)

    def test_duplicates_are_exact_copies_within_class(self):
        ds = gaussian_dataset(per_class=(50, 12, 3), seed=9)
        balanced = balance_by_duplication(ds, seed=1)
        np.testing.assert_array_equal(balanced.class_counts(), [50, 50, 50])
        # les originaux restent en tête
        np.testing.assert_array_equal(balanced.pixel_index[:len(ds)], ds.pixel_index)
        for row in range(len(ds), len(balanced)):
            source = ds.pixel_index.tolist().index(balanced.pixel_index[row])
            self.assertEqual(balanced.labels[row], ds.labels[source])
            np.testing.assert_array_equal(balanced.signatures[row], ds.signatures[source])

    def test_already_balanced_is_unchanged(self):
        ds = gaussian_dataset(per_class=(10, 10), seed=0)
        self.assertIs(balance_by_duplication(ds, seed=0), ds)

    def test_plan(self):
        plan = plan_balance(counts_dataset([3, 7, 5]))
        self.assertEqual(plan.target_count, 7)
        self.assertEqual(plan.per_class_duplicates, [(1, 4), (2, 0), (3, 2)])
        self.assertEqual(plan.total_duplicates, 6)

    def test_missing_class_cannot_be_balanced(self):
        with self.assertRaises(SamplingError):
            balance_by_duplication(counts_dataset([3, 0, 5]), seed=0)


class LeakageTests(SimpleTestCase):

    def test_split_then_balance_never_leaks(self):
        for seed in range(10):
            ds = gaussian_dataset(per_class=(60, 25, 9), seed=seed)
            split = stratified_split(ds, 0.2, seed=seed)
            balanced = balance_by_duplication(split.train, seed=seed)
            self.assertEqual(leakage_overlap(balanced, split.test), 0)

    def test_balance_then_split_leaks(self):
        ds = gaussian_dataset(per_class=(200, 120, 60), seed=0)
        split = stratified_split(balance_by_duplication(ds, seed=0), 0.2, seed=0)
        self.assertGreater(leakage_overlap(split.train, split.test), 0)

    def test_overlap_counts_pairs(self):
        ds = counts_dataset([4])
        train = ds.subset([0, 0, 1])
        test = ds.subset([0, 0, 2])
        self.assertEqual(leakage_overlap(train, test), 4)
