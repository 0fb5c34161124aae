"""
Types de données hyperspectrales et préparation des signatures.

- SpectralCube : raster 3-D (bandes x lignes x colonnes), ordre BSQ
- LabelRaster : carte de vérité terrain, 0 = fond non étiqueté
- PixelDataset : signatures spectrales étiquetées, une ligne par pixel
- BandStats : moyenne / écart-type par bande, ajustés sur l'entraînement
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DataFormatError, HsifcError, ShapeMismatchError

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8


def _frozen(array, dtype):
    out = np.ascontiguousarray(array, dtype=dtype)
    if out is array:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpectralCube:
    """Cube hyperspectral ; `values` a la forme (bands, lines, samples)"""
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 3 or 0 in self.values.shape:
            raise ShapeMismatchError(f"Cube attendu en 3-D non vide, reçu {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DataFormatError("Le cube contient des valeurs NaN ou infinies")
        object.__setattr__(self, 'values', _frozen(self.values, np.float32))

    @property
    def bands(self):
        return self.values.shape[0]

    @property
    def lines(self):
        return self.values.shape[1]

    @property
    def samples(self):
        return self.values.shape[2]

    def pixel(self, line, sample):
        """Signature du pixel (line, sample)"""
        return self.values[:, line, sample]

    def pixels(self, flat_indices=None):
        """Matrice (pixels x bandes) ; restreinte aux offsets fournis si besoin"""
        flat = self.values.reshape(self.bands, -1)
        if flat_indices is not None:
            flat = flat[:, flat_indices]
        return flat.T


@dataclass(frozen=True)
class LabelRaster:
    """Carte de classes alignée sur un cube ; `labels` a la forme (lines, samples)"""
    labels: np.ndarray

    def __post_init__(self):
        if self.labels.ndim != 2 or 0 in self.labels.shape:
            raise ShapeMismatchError(f"Raster de labels attendu en 2-D non vide, reçu {self.labels.shape}")
        if np.any(self.labels < 0):
            raise DataFormatError("Le raster de labels contient des valeurs négatives")
        object.__setattr__(self, 'labels', _frozen(self.labels, np.int64))

    @property
    def lines(self):
        return self.labels.shape[0]

    @property
    def samples(self):
        return self.labels.shape[1]

    @property
    def num_classes(self):
        return int(self.labels.max())

    def class_counts(self):
        """Effectif de chaque classe 1..C (le fond est ignoré)"""
        counts = np.bincount(self.labels.ravel(), minlength=self.num_classes + 1)
        return {label: int(counts[label]) for label in range(1, self.num_classes + 1) if counts[label]}

    def labeled_indices(self):
        return np.flatnonzero(self.labels.ravel())


@dataclass(frozen=True)
class PixelDataset:
    """
    Enregistrements (signature, label, pixel_index) stockés en colonnes.

    Les labels vont de 1 à num_classes ; pixel_index est l'offset à plat dans
    le raster source (ou le numéro de ligne pour un CSV).
    """
    signatures: np.ndarray
    labels: np.ndarray
    pixel_index: np.ndarray
    num_classes: int

    def __post_init__(self):
        signatures = np.asarray(self.signatures, dtype=np.float64)
        if signatures.ndim != 2:
            raise ShapeMismatchError(f"Signatures attendues en 2-D, reçu {signatures.shape}")
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        pixel_index = np.asarray(self.pixel_index, dtype=np.int64).reshape(-1)
        if not (len(signatures) == len(labels) == len(pixel_index)):
            raise ShapeMismatchError("Signatures, labels et indices n'ont pas la même longueur")
        if len(labels) and (labels.min() < 1 or labels.max() > self.num_classes):
            raise DataFormatError(
                f"Labels hors de l'intervalle 1..{self.num_classes} (le fond 0 n'est jamais une classe)"
            )
        object.__setattr__(self, 'signatures', _frozen(signatures, np.float64))
        object.__setattr__(self, 'labels', _frozen(labels, np.int64))
        object.__setattr__(self, 'pixel_index', _frozen(pixel_index, np.int64))
        object.__setattr__(self, 'num_classes', int(self.num_classes))

    def __len__(self):
        return len(self.labels)

    @property
    def bands(self):
        return self.signatures.shape[1]

    def class_counts(self):
        """Vecteur des effectifs, position c-1 pour la classe c"""
        return np.bincount(self.labels, minlength=self.num_classes + 1)[1:]

    def subset(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        return PixelDataset(self.signatures[rows], self.labels[rows], self.pixel_index[rows], self.num_classes)

    def with_signatures(self, signatures):
        return PixelDataset(signatures, self.labels, self.pixel_index, self.num_classes)


@dataclass(frozen=True)
class BandStats:
    """Statistiques de standardisation par bande (convention population)"""
    mean: np.ndarray
    stddev: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'mean', _frozen(self.mean, np.float64))
        object.__setattr__(self, 'stddev', _frozen(self.stddev, np.float64))
        if self.mean.shape != self.stddev.shape or self.mean.ndim != 1:
            raise ShapeMismatchError("mean et stddev doivent être des vecteurs de même longueur")

    @property
    def bands(self):
        return len(self.mean)

    @classmethod
    def identity(cls, bands):
        return cls(np.zeros(bands), np.ones(bands))


def extract_labeled_pixels(cube: SpectralCube, gt: LabelRaster) -> PixelDataset:
    """Une entrée par pixel étiqueté ; le fond (label 0) n'est jamais utilisé"""
    if (cube.lines, cube.samples) != (gt.lines, gt.samples):
        raise ShapeMismatchError(
            f"Cube {cube.lines}x{cube.samples} et vérité terrain {gt.lines}x{gt.samples} ne correspondent pas"
        )
    indices = gt.labeled_indices()
    labels = gt.labels.ravel()[indices]
    signatures = cube.pixels(indices).astype(np.float64)
    logger.info("%d pixels étiquetés extraits (%d bandes, %d classes)", len(indices), cube.bands, gt.num_classes)
    return PixelDataset(signatures, labels, indices, gt.num_classes)


def fit_band_stats(train: PixelDataset) -> BandStats:
    """Moyenne et écart-type (diviseur n) de chaque bande, plancher 1e-8"""
    if len(train) == 0:
        raise HsifcError("Impossible d'ajuster les statistiques sur un jeu vide", module='hsi_data')
    mean = train.signatures.mean(axis=0)
    stddev = train.signatures.std(axis=0)
    clamped = stddev < STD_FLOOR
    if clamped.any():
        logger.warning("%d bande(s) constante(s) : écart-type ramené à %g", int(clamped.sum()), STD_FLOOR)
    return BandStats(mean, np.maximum(stddev, STD_FLOOR))


def apply_standardization(ds: PixelDataset, stats: BandStats) -> PixelDataset:
    """x -> (x - mean_b) / stddev_b ; labels et indices inchangés"""
    if stats.bands != ds.bands:
        raise ShapeMismatchError(f"Statistiques sur {stats.bands} bandes, jeu de données sur {ds.bands}")
    return ds.with_signatures((ds.signatures - stats.mean) / stats.stddev)


def load_csv_dataset(path, num_classes: Optional[int] = None) -> PixelDataset:
    """
    Lit un jeu `label,v1,...,vB` (sans en-tête). pixel_index = numéro de ligne.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            table = np.loadtxt(path, delimiter=',', ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise DataFormatError(f"CSV invalide ({path}) : {e}") from e

    if table.size == 0 or table.shape[1] < 2:
        raise DataFormatError(f"CSV vide ou sans bande : {path}")

    raw_labels = table[:, 0]
    if not np.all(np.isfinite(table)):
        raise DataFormatError(f"CSV avec valeurs non finies : {path}")
    if np.any(raw_labels != np.round(raw_labels)):
        raise DataFormatError(f"Labels non entiers dans {path}")
    labels = raw_labels.astype(np.int64)
    if labels.min() < 1:
        raise DataFormatError(f"Label {labels.min()} invalide dans {path} (les labels commencent à 1)")

    classes = num_classes or int(labels.max())
    return PixelDataset(table[:, 1:], labels, np.arange(len(labels)), classes)


def write_csv_dataset(ds: PixelDataset, path) -> None:
    """Écrit `label,v1,...,vB` avec 9 chiffres significatifs"""
    table = np.column_stack([ds.labels.astype(np.float64), ds.signatures])
    np.savetxt(path, table, delimiter=',', fmt=['%d'] + ['%.9g'] * ds.bands)
