"""
Sélection de bandes par divergence (rapport de dispersions inter / intra-classe).

Pour chaque bande b, avec les probabilités a priori pi_c = n_c / n :
    s_W[b] = somme_c pi_c * var_c(b)                 (variance population)
    s_B[b] = somme_c pi_c * (mu_c(b) - mu(b))^2
et pour un sous-ensemble S :
    J(S) = somme_{b in S} s_B[b] / (somme_{b in S} s_W[b] + 1e-12)

La recherche est gloutonne : on ajoute à chaque pas la bande qui maximise J
du sous-ensemble agrandi, la plus petite bande en cas d'égalité.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np

from .data import PixelDataset
from .exceptions import BandSelectionError

logger = logging.getLogger(__name__)

DIVERGENCE_EPSILON = 1e-12


@dataclass(frozen=True)
class ScatterSummary:
    within: np.ndarray
    between: np.ndarray
    priors: np.ndarray

    @property
    def bands(self):
        return len(self.within)


def scatter_summary(ds: PixelDataset) -> ScatterSummary:
    counts = ds.class_counts()
    present = np.flatnonzero(counts)
    if len(present) < 2:
        raise BandSelectionError(f"Au moins 2 classes non vides sont nécessaires, {len(present)} trouvée(s)")

    priors = counts / counts.sum()
    overall_mean = ds.signatures.mean(axis=0)
    within = np.zeros(ds.bands)
    between = np.zeros(ds.bands)
    for position in present:
        rows = ds.signatures[ds.labels == position + 1]
        within += priors[position] * rows.var(axis=0)
        between += priors[position] * (rows.mean(axis=0) - overall_mean) ** 2
    return ScatterSummary(within=within, between=between, priors=priors)


def _check_indices(bands: Sequence[int], total: int, allow_empty=False) -> np.ndarray:
    indices = np.asarray(list(bands), dtype=np.int64)
    if not allow_empty and indices.size == 0:
        raise BandSelectionError("Le sous-ensemble de bandes est vide")
    if indices.size and (indices.min() < 0 or indices.max() >= total):
        raise BandSelectionError(f"Indice de bande hors de 0..{total - 1} : {indices.tolist()}")
    if len(np.unique(indices)) != len(indices):
        raise BandSelectionError(f"Indices de bande en double : {indices.tolist()}")
    return indices


def divergence_score(summary: ScatterSummary, subset: Sequence[int]) -> float:
    indices = _check_indices(subset, summary.bands)
    return float(summary.between[indices].sum() / (summary.within[indices].sum() + DIVERGENCE_EPSILON))


def greedy_band_selection(ds: PixelDataset, k: int) -> List[int]:
    """Retourne k indices de bande (base 0) dans l'ordre de sélection"""
    if not 1 <= k <= ds.bands:
        raise BandSelectionError(f"k doit être dans 1..{ds.bands}, reçu {k}")

    summary = scatter_summary(ds)
    available = np.ones(ds.bands, dtype=bool)
    selected = []
    between_sum, within_sum = 0.0, 0.0
    for _ in range(k):
        scores = (between_sum + summary.between) / (within_sum + summary.within + DIVERGENCE_EPSILON)
        scores[~available] = -np.inf
        best = int(np.argmax(scores))
        selected.append(best)
        available[best] = False
        between_sum += summary.between[best]
        within_sum += summary.within[best]

    logger.info("%d bandes sélectionnées sur %d, J = %.4f", k, ds.bands, divergence_score(summary, selected))
    return selected


def project_bands(ds: PixelDataset, bands: Sequence[int]) -> PixelDataset:
    """Restreint les signatures aux bandes données, dans l'ordre donné"""
    indices = _check_indices(bands, ds.bands)
    return ds.with_signatures(ds.signatures[:, indices])


def write_band_list(bands: Sequence[int], path) -> Path:
    """Un indice par ligne, dans l'ordre de sélection"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(''.join(f'{int(b)}\n' for b in bands), encoding='utf-8')
    return path


def read_band_list(path) -> List[int]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Liste de bandes introuvable : {path}")
    bands = []
    for number, line in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            bands.append(int(line))
        except ValueError as e:
            raise BandSelectionError(f"Ligne {number} de {path} n'est pas un indice de bande : '{line}'") from e
    if not bands:
        raise BandSelectionError(f"Liste de bandes vide : {path}")
    _check_indices(bands, max(bands) + 1)
    return bands
