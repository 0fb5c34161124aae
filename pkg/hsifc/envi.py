"""
Lecture / écriture du sous-ensemble ENVI utilisé par les jeux de données.

En-tête texte `clé = valeur` (analysé par spectral) + fichier binaire BSQ.
Types pris en charge : 2 (int16), 4 (float32), 12 (uint16) ; byte order 0 ou 1.
"""

import logging
from pathlib import Path

import numpy as np
import spectral.io.envi as envi

from .data import LabelRaster, SpectralCube
from .exceptions import DataFormatError, UnsupportedFormatError

logger = logging.getLogger(__name__)

ENVI_DTYPES = {
    2: 'i2',
    4: 'f4',
    12: 'u2',
}
INTEGER_TYPES = (2, 12)

# Extensions essayées pour le fichier binaire compagnon
PAYLOAD_SUFFIXES = ('', '.img', '.raw', '.dat', '.bsq')


def read_header(header_path):
    """
    Analyse l'en-tête et retourne les champs utiles.

    Returns:
        dict avec samples, lines, bands, data_type, byte_order, header_offset
    """
    header_path = Path(header_path)
    if not header_path.exists():
        raise FileNotFoundError(f"En-tête ENVI introuvable : {header_path}")

    try:
        raw = envi.read_envi_header(str(header_path))
    except Exception as e:
        raise DataFormatError(f"En-tête ENVI illisible ({header_path}) : {e}") from e

    fields = {}
    for key in ('samples', 'lines', 'bands', 'data type', 'byte order'):
        if key not in raw:
            raise DataFormatError(f"Clé '{key}' absente de {header_path}")
        try:
            fields[key.replace(' ', '_')] = int(str(raw[key]).strip())
        except ValueError as e:
            raise DataFormatError(f"Valeur non entière pour '{key}' dans {header_path}") from e

    fields['header_offset'] = int(str(raw.get('header offset', '0')).strip() or 0)
    fields['interleave'] = str(raw.get('interleave', '')).strip().lower()

    if min(fields['samples'], fields['lines'], fields['bands']) < 1:
        raise DataFormatError(f"Dimensions non positives dans {header_path}")
    if fields['interleave'] != 'bsq':
        raise UnsupportedFormatError(
            f"Interleave '{fields['interleave']}' non pris en charge (seul bsq l'est) : {header_path}"
        )
    if fields['data_type'] not in ENVI_DTYPES:
        raise UnsupportedFormatError(
            f"Type de données {fields['data_type']} non pris en charge (2, 4 ou 12) : {header_path}"
        )
    if fields['byte_order'] not in (0, 1):
        raise DataFormatError(f"Byte order {fields['byte_order']} invalide dans {header_path}")
    return fields


def find_payload(header_path):
    """Fichier binaire compagnon : même nom sans suffixe, .img, .raw, .dat ou .bsq"""
    header_path = Path(header_path)
    stem = header_path.with_suffix('')
    for suffix in PAYLOAD_SUFFIXES:
        candidate = stem.with_name(stem.name + suffix)
        if candidate.is_file():
            return candidate
    raise DataFormatError(f"Fichier binaire introuvable pour {header_path}")


def _read_bsq(header_path):
    fields = read_header(header_path)
    payload = find_payload(header_path)

    dtype = np.dtype(('<' if fields['byte_order'] == 0 else '>') + ENVI_DTYPES[fields['data_type']])
    count = fields['bands'] * fields['lines'] * fields['samples']
    expected = fields['header_offset'] + count * dtype.itemsize
    actual = payload.stat().st_size
    if actual != expected:
        raise DataFormatError(
            f"Taille de {payload} incorrecte : {actual} octets, {expected} attendus"
        )

    data = np.fromfile(payload, dtype=dtype, count=count, offset=fields['header_offset'])
    logger.debug("%s lu : %d x %d x %d (type %d)", payload.name,
                 fields['lines'], fields['samples'], fields['bands'], fields['data_type'])
    return fields, data.reshape(fields['bands'], fields['lines'], fields['samples'])


def load_envi_cube(header_path) -> SpectralCube:
    """Charge un cube ENVI BSQ ; les types entiers sont convertis sans perte en float32"""
    _, data = _read_bsq(header_path)
    values = data.astype(np.float32)
    if not np.all(np.isfinite(values)):
        raise DataFormatError(f"Valeurs NaN ou infinies dans le cube {header_path}")
    return SpectralCube(values)


def load_label_raster(header_path) -> LabelRaster:
    """Charge une vérité terrain mono-bande entière ; 0 = fond"""
    fields, data = _read_bsq(header_path)
    if fields['bands'] != 1:
        raise DataFormatError(f"Vérité terrain attendue sur une bande, {fields['bands']} trouvées")
    if fields['data_type'] not in INTEGER_TYPES:
        raise UnsupportedFormatError(f"Vérité terrain de type {fields['data_type']} : un type entier est requis")
    labels = data[0].astype(np.int64)
    if labels.min() < 0:
        raise DataFormatError(f"Labels négatifs dans {header_path}")
    return LabelRaster(labels)


def write_envi_cube(cube: SpectralCube, header_path, dtype=np.float32, byte_order=0) -> Path:
    """Écrit l'en-tête et le binaire .img (BSQ) relus à l'identique par load_envi_cube"""
    header_path = Path(header_path)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    # spectral attend un tableau (lignes, colonnes, bandes)
    image = np.ascontiguousarray(cube.values.transpose(1, 2, 0)).astype(dtype)
    envi.save_image(str(header_path), image, dtype=dtype, interleave='bsq',
                    byteorder=byte_order, ext='.img', force=True)
    return header_path


def write_label_raster(gt: LabelRaster, header_path) -> Path:
    header_path = Path(header_path)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    image = gt.labels.astype(np.uint16)[:, :, np.newaxis]
    envi.save_image(str(header_path), image, dtype=np.uint16, interleave='bsq',
                    byteorder=0, ext='.img', force=True)
    return header_path
