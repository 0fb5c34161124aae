"""
Découpage stratifié entraînement / test et équilibrage par duplication.

Le test est tiré AVANT tout équilibrage : chaque classe c de n_c pixels
fournit exactement ceil(test_fraction * n_c) pixels de test, le reste part
en entraînement. Les classes d'entraînement sont ensuite complétées jusqu'à
l'effectif de la plus grande par tirage avec remise dans la même classe.

Générateur : numpy.random.default_rng (PCG64), graine explicite.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

import numpy as np

from .data import PixelDataset
from .exceptions import SamplingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitResult:
    train: PixelDataset
    test: PixelDataset
    seed: int


@dataclass(frozen=True)
class BalancePlan:
    """target_count = effectif de la plus grande classe d'entraînement"""
    target_count: int
    per_class_duplicates: List[Tuple[int, int]]

    @property
    def total_duplicates(self):
        return sum(dup for _, dup in self.per_class_duplicates)

    def as_dict(self):
        return {
            'target_count': self.target_count,
            'per_class_duplicates': {str(label): dup for label, dup in self.per_class_duplicates},
        }


def holdout_count(n_records: int, test_fraction: float) -> int:
    """ceil(test_fraction * n) en arithmétique exacte (0.2 * 3090 = 618, pas 619)"""
    return math.ceil(Fraction(repr(float(test_fraction))) * n_records)


def stratified_split(ds: PixelDataset, test_fraction: float = 0.2, seed: int = 0) -> SplitResult:
    """Tire ceil(test_fraction * n_c) pixels de test par classe, uniformément"""
    if not 0 < test_fraction < 1:
        raise SamplingError(f"test_fraction doit être dans ]0, 1[, reçu {test_fraction}")
    if len(ds) == 0:
        raise SamplingError("Impossible de découper un jeu de données vide")

    rng = np.random.default_rng(seed)
    test_rows = []
    for label in range(1, ds.num_classes + 1):
        rows = np.flatnonzero(ds.labels == label)
        if len(rows) == 0:
            raise SamplingError(f"La classe {label} n'a aucun pixel")
        chosen = rng.permutation(rows)[:holdout_count(len(rows), test_fraction)]
        test_rows.append(chosen)

    is_test = np.zeros(len(ds), dtype=bool)
    is_test[np.concatenate(test_rows)] = True

    split = SplitResult(
        train=ds.subset(np.flatnonzero(~is_test)),
        test=ds.subset(np.flatnonzero(is_test)),
        seed=seed,
    )
    logger.debug("Découpage (graine %d) : %d entraînement / %d test", seed, len(split.train), len(split.test))
    return split


def plan_balance(train: PixelDataset) -> BalancePlan:
    """Nombre de duplications nécessaires par classe"""
    if len(train) == 0:
        raise SamplingError("Impossible d'équilibrer un jeu d'entraînement vide")
    counts = train.class_counts()
    missing = [label for label, count in enumerate(counts, start=1) if count == 0]
    if missing:
        raise SamplingError(f"Classes absentes de l'entraînement, impossible de les dupliquer : {missing}")
    target = int(counts.max())
    return BalancePlan(
        target_count=target,
        per_class_duplicates=[(label, target - int(count)) for label, count in enumerate(counts, start=1)],
    )


def balance_by_duplication(train: PixelDataset, seed: int = 0) -> PixelDataset:
    """
    Complète chaque classe jusqu'à target_count par copies exactes tirées avec
    remise dans la classe. Les enregistrements d'origine sont conservés en tête ;
    les copies gardent le pixel_index de leur source.
    """
    plan = plan_balance(train)
    if plan.total_duplicates == 0:
        return train

    rng = np.random.default_rng(seed)
    extra = []
    for label, duplicates in plan.per_class_duplicates:
        if duplicates:
            rows = np.flatnonzero(train.labels == label)
            extra.append(rng.choice(rows, size=duplicates, replace=True))

    balanced = train.subset(np.concatenate([np.arange(len(train))] + extra))
    logger.debug("Équilibrage : %d copies ajoutées, %d par classe", plan.total_duplicates, plan.target_count)
    return balanced


def leakage_overlap(train: PixelDataset, test: PixelDataset) -> int:
    """Nombre de paires (entraînement, test) partageant le même pixel_index"""
    train_ids, train_counts = np.unique(train.pixel_index, return_counts=True)
    test_ids, test_counts = np.unique(test.pixel_index, return_counts=True)
    _, in_train, in_test = np.intersect1d(train_ids, test_ids, assume_unique=True, return_indices=True)
    return int(np.sum(train_counts[in_train].astype(np.int64) * test_counts[in_test]))
