#!/usr/bin/env python
"""
Vérifie que les jeux de données convertis sont en place sous HSIFC_DATA_DIR.
Lance ça avant les expériences sur données réelles.
"""

import os
import sys
from pathlib import Path

# Setup path
sys.path.insert(0, str(Path(__file__).parent))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

try:
    import django
    django.setup()
except Exception as e:
    print(f"❌ Erreur Django setup: {e}")
    sys.exit(1)

from django.conf import settings

from hsifc.datasets import DATASET_NAMES, dataset_descriptor, dataset_paths
from hsifc.envi import read_header
from hsifc.exceptions import HsifcError


def check_data_dir():
    """Vérifie que la racine des données existe"""
    root = Path(settings.HSIFC_DATA_DIR)
    if root.is_dir():
        print(f"✅ Racine des données : {root}")
        return True
    print(f"❌ Racine des données introuvable : {root}")
    print()
    print("📝 Définis HSIFC_DATA_DIR dans .env, par exemple :")
    print()
    print("   HSIFC_DATA_DIR=/chemin/vers/data")
    print()
    return False


def check_dataset(name):
    """Vérifie en-têtes et dimensions d'un jeu enregistré"""
    descriptor = dataset_descriptor(name)
    cube_path, gt_path = dataset_paths(name)

    missing = [path for path in (cube_path, gt_path) if not path.exists()]
    if missing:
        print(f"⚠️  {descriptor.title} : absent ({missing[0]})")
        return False

    try:
        cube = read_header(cube_path)
        gt = read_header(gt_path)
    except (HsifcError, FileNotFoundError) as e:
        print(f"❌ {descriptor.title} : {e}")
        return False

    if cube['bands'] != descriptor.bands:
        print(f"❌ {descriptor.title} : {cube['bands']} bandes, {descriptor.bands} attendues")
        return False
    if (cube['lines'], cube['samples']) != (gt['lines'], gt['samples']):
        print(f"❌ {descriptor.title} : cube et vérité terrain de tailles différentes")
        return False

    print(f"✅ {descriptor.title} : {cube['lines']} x {cube['samples']} x {cube['bands']}")
    return True


def main():
    print()
    print("╔" + "=" * 58 + "╗")
    print("║" + " " * 15 + "🔍 CHECK JEUX DE DONNÉES" + " " * 19 + "║")
    print("╚" + "=" * 58 + "╝")
    print()

    if not check_data_dir():
        return False

    print()
    present = [name for name in DATASET_NAMES if check_dataset(name)]

    print()
    print("=" * 60)
    if not present:
        print("⚠️  Aucun jeu de données utilisable : les tests real_data seront ignorés.")
        print("=" * 60)
        return False

    print(f"🎉 {len(present)}/{len(DATASET_NAMES)} jeux prêts.")
    print("=" * 60)
    print()
    print("📖 Prochaines étapes :")
    print()
    print(f"   python manage.py info --dataset {present[0]}")
    print(f"   python manage.py experiment --dataset {present[0]} --repeats 5")
    print("   python manage.py test hsifc --tag real_data")
    print()
    return True


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
