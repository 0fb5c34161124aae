"""
Métriques de classification (matrice de confusion, OA, AA), agrégation des
répétitions d'expérience et rendu des cartes de classification.
"""

import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import List, Mapping, Optional, Sequence

import numpy as np
from PIL import Image
from sklearn.metrics import confusion_matrix as sk_confusion_matrix

from .data import LabelRaster
from .exceptions import EvaluationError

logger = logging.getLogger(__name__)

# Couleur 0 = fond (noir), puis 16 couleurs bien distinctes pour les classes 1..16
DEFAULT_PALETTE = (
    (0, 0, 0),
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
    (170, 110, 40), (255, 250, 200), (128, 0, 0), (170, 255, 195),
)


def round_half_up(value: float, digits: int = 1) -> float:
    """Arrondi « commercial » (98.25 -> 98.3), utilisé pour l'affichage"""
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Lignes = classe vraie, colonnes = classe prédite (classe c en position c-1)"""
    counts: np.ndarray
    class_names: Optional[Sequence[str]] = None

    @property
    def num_classes(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())

    def row_sums(self):
        return self.counts.sum(axis=1)


def confusion_matrix(true_labels, predicted_labels, num_classes: int, class_names=None) -> ConfusionMatrix:
    true_labels = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64).reshape(-1)
    if len(true_labels) != len(predicted_labels):
        raise EvaluationError(f"{len(true_labels)} labels vrais pour {len(predicted_labels)} prédictions")
    for name, labels in (('vrais', true_labels), ('prédits', predicted_labels)):
        if len(labels) and (labels.min() < 1 or labels.max() > num_classes):
            raise EvaluationError(f"Labels {name} hors de l'intervalle 1..{num_classes}")

    if len(true_labels) == 0:
        counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    else:
        counts = sk_confusion_matrix(true_labels, predicted_labels, labels=np.arange(1, num_classes + 1))
    return ConfusionMatrix(counts=counts.astype(np.int64), class_names=class_names)


def overall_accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EvaluationError("Matrice de confusion vide : OA indéfinie")
    return 100.0 * float(np.trace(cm.counts)) / cm.total


def per_class_accuracy(cm: ConfusionMatrix) -> np.ndarray:
    rows = cm.row_sums()
    absent = np.flatnonzero(rows == 0)
    if absent.size:
        raise EvaluationError(f"Classes absentes du jeu de test : {(absent + 1).tolist()}")
    return np.diag(cm.counts) / rows


def average_accuracy(cm: ConfusionMatrix) -> float:
    return 100.0 * float(per_class_accuracy(cm).mean())


@dataclass(frozen=True)
class MetricsReport:
    oa: float
    aa: float
    per_class: np.ndarray
    confusion: ConfusionMatrix

    def to_dict(self):
        names = self.confusion.class_names or [f'classe {c}' for c in range(1, self.confusion.num_classes + 1)]
        rows = self.confusion.row_sums()
        return {
            'oa': self.oa,
            'aa': self.aa,
            'oa_rounded': round_half_up(self.oa),
            'aa_rounded': round_half_up(self.aa),
            'per_class': [
                {
                    'class': c + 1,
                    'name': names[c],
                    'correct': int(self.confusion.counts[c, c]),
                    'total': int(rows[c]),
                    'accuracy': float(self.per_class[c]),
                }
                for c in range(self.confusion.num_classes)
            ],
            'confusion': self.confusion.counts.tolist(),
        }


def metrics_report(true_labels, predicted_labels, num_classes: int, class_names=None) -> MetricsReport:
    cm = confusion_matrix(true_labels, predicted_labels, num_classes, class_names)
    return MetricsReport(
        oa=overall_accuracy(cm),
        aa=average_accuracy(cm),
        per_class=per_class_accuracy(cm),
        confusion=cm,
    )


def reference_confusion(descriptor) -> ConfusionMatrix:
    """
    Matrice reconstruite à partir des résultats de référence par classe
    (bien classés, effectif de test) : les erreurs d'une classe sont
    placées dans la colonne de la classe suivante. OA et AA n'en dépendent pas.
    """
    per_class = descriptor.reference_per_class
    if not per_class:
        raise EvaluationError(f"Aucun résultat de référence pour {descriptor.name}")
    size = len(per_class)
    counts = np.zeros((size, size), dtype=np.int64)
    for c, (correct, total) in enumerate(per_class):
        counts[c, c] = correct
        counts[c, (c + 1) % size] += total - correct
    return ConfusionMatrix(counts=counts, class_names=descriptor.class_names)


@dataclass
class ExperimentSummary:
    seeds: List[int] = field(default_factory=list)
    oa: List[float] = field(default_factory=list)
    aa: List[float] = field(default_factory=list)

    @property
    def repeats(self):
        return len(self.oa)

    @property
    def mean_oa(self):
        return float(np.mean(self.oa))

    @property
    def std_oa(self):
        return float(np.std(self.oa))

    @property
    def mean_aa(self):
        return float(np.mean(self.aa))

    @property
    def std_aa(self):
        return float(np.std(self.aa))

    def add(self, seed, report: MetricsReport):
        self.seeds.append(int(seed))
        self.oa.append(float(report.oa))
        self.aa.append(float(report.aa))

    def to_dict(self):
        return {
            'repeats': self.repeats,
            'seeds': list(self.seeds),
            'per_repeat': [
                {'repeat': r, 'seed': seed, 'oa': oa, 'aa': aa}
                for r, (seed, oa, aa) in enumerate(zip(self.seeds, self.oa, self.aa))
            ],
            'oa_mean': self.mean_oa,
            'oa_std': self.std_oa,
            'aa_mean': self.mean_aa,
            'aa_std': self.std_aa,
            'oa_mean_rounded': round_half_up(self.mean_oa),
            'aa_mean_rounded': round_half_up(self.mean_aa),
        }


def render_map(gt: LabelRaster, predictions: Mapping[int, int], path, palette=None) -> Path:
    """
    Écrit une image PPM binaire (P6) de lines x samples pixels : fond noir,
    classe c dans la couleur palette[c]. `predictions` associe pixel_index
    (offset à plat dans le raster) -> classe prédite.
    """
    palette = np.asarray(palette if palette is not None else DEFAULT_PALETTE, dtype=np.uint8)
    labeled = gt.labeled_indices()
    if set(predictions) != set(labeled.tolist()):
        missing = len(set(labeled.tolist()) - set(predictions))
        extra = len(set(predictions) - set(labeled.tolist()))
        raise EvaluationError(
            f"Les prédictions ne couvrent pas exactement les pixels étiquetés ({missing} manquant(s), {extra} en trop)"
        )

    classes = np.zeros(gt.lines * gt.samples, dtype=np.int64)
    if len(labeled):
        classes[labeled] = [predictions[int(i)] for i in labeled]
    if classes.max() >= len(palette) or classes.min() < 0:
        raise EvaluationError(f"Palette de {len(palette) - 1} couleurs insuffisante pour la classe {classes.max()}")

    rgb = palette[classes].reshape(gt.lines, gt.samples, 3)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(rgb)).save(path, format='PPM')
    logger.info("Carte de classification écrite : %s (%d x %d)", path, gt.samples, gt.lines)
    return path
