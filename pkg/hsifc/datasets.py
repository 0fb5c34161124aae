"""
Registre des cinq images hyperspectrales de référence.

Les descripteurs sont stockés en JSON dans hsifc/registry/ : bandes,
noms et effectifs des classes, architecture enregistrée et résultats de
référence par classe (bien classés / effectif de test).
"""

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple

from django.conf import settings

from .exceptions import ConfigError

REGISTRY_DIR = Path(__file__).resolve().parent / 'registry'

DATASET_NAMES = ('indian_pines', 'salinas', 'pavia_centre', 'pavia_university', 'botswana')


@dataclass(frozen=True)
class DatasetDescriptor:
    """Description d'un jeu de données enregistré"""
    name: str
    title: str
    bands: int
    hidden_sizes: Tuple[int, ...]
    class_names: Tuple[str, ...]
    class_counts: Tuple[int, ...]
    reference_oa: float
    reference_aa: float
    reference_per_class: Tuple[Tuple[int, int], ...] = field(default=())
    reported_balanced_count: Optional[int] = None

    @property
    def num_classes(self):
        return len(self.class_names)

    @property
    def total_labeled(self):
        return sum(self.class_counts)

    def as_dict(self):
        return {
            'name': self.name,
            'title': self.title,
            'bands': self.bands,
            'num_classes': self.num_classes,
            'hidden_sizes': list(self.hidden_sizes),
            'class_names': list(self.class_names),
            'class_counts': list(self.class_counts),
            'reference_oa': self.reference_oa,
            'reference_aa': self.reference_aa,
        }


def normalize_name(name: str) -> str:
    """'IndianPines', 'indian-pines' ou 'Indian Pines' -> 'indian_pines'"""
    snake = re.sub(r'(?<=[a-z])(?=[A-Z])', '_', name.strip())
    return re.sub(r'[\s\-]+', '_', snake).lower()


@lru_cache(maxsize=None)
def dataset_descriptor(name: str) -> DatasetDescriptor:
    """Retourne le descripteur enregistré ; ConfigError si le nom est inconnu"""
    key = normalize_name(name)
    if key not in DATASET_NAMES:
        raise ConfigError(
            f"Jeu de données inconnu : '{name}' (attendu : {', '.join(DATASET_NAMES)})"
        )

    with open(REGISTRY_DIR / f'{key}.json', 'r', encoding='utf-8') as f:
        raw = json.load(f)

    reference = raw.get('reference', {})
    return DatasetDescriptor(
        name=raw['name'],
        title=raw['title'],
        bands=int(raw['bands']),
        hidden_sizes=tuple(raw['hidden_sizes']),
        class_names=tuple(raw['class_names']),
        class_counts=tuple(raw['class_counts']),
        reference_oa=float(reference.get('oa', 0.0)),
        reference_aa=float(reference.get('aa', 0.0)),
        reference_per_class=tuple(tuple(pair) for pair in reference.get('per_class', [])),
        reported_balanced_count=raw.get('reported_balanced_count'),
    )


def all_descriptors() -> List[DatasetDescriptor]:
    return [dataset_descriptor(name) for name in DATASET_NAMES]


def dataset_paths(name: str, data_root=None) -> Tuple[Path, Path]:
    """
    Emplacements attendus (cube, vérité terrain) sous la racine des données :
    <root>/<name>/<name>.hdr et <root>/<name>/<name>_gt.hdr
    """
    key = dataset_descriptor(name).name
    root = Path(data_root) if data_root else Path(settings.HSIFC_DATA_DIR)
    folder = root / key
    return folder / f'{key}.hdr', folder / f'{key}_gt.hdr'


def dataset_available(name: str, data_root=None) -> bool:
    cube_path, gt_path = dataset_paths(name, data_root)
    return cube_path.exists() and gt_path.exists()
