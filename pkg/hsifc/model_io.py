"""
Format de modèle HSM1.

Tout est en petit-boutiste :

    magic            4 octets  b'HSM1'
    version          u16       1
    L                u16       nombre de couches Dense (cachées + sortie)
    dims             u32 x (L + 1)   entrée, cachées..., sortie
    bn_epsilon       f64
    bn_momentum      f64
    pour chaque bloc caché, en float32 :
        W (sorties x entrées, par lignes), b, gamma, beta, running_mean, running_var
    couche de sortie, en float32 : W, b
    S                u32       nombre de bandes des statistiques
    mean             f64 x S
    stddev           f64 x S

La taille totale doit correspondre exactement à ce que décrit l'en-tête.
"""

import logging
import struct
from pathlib import Path

import numpy as np

from .data import BandStats
from .exceptions import ModelFormatError
from .network import HiddenBlock, Network, NetworkSpec

logger = logging.getLogger(__name__)

MAGIC = b'HSM1'
VERSION = 1
PARAM_DTYPE = np.dtype('<f4')
STATS_DTYPE = np.dtype('<f8')


def save_model(net: Network, stats: BandStats, path) -> Path:
    dims = net.spec.layer_dims
    if stats.bands != net.spec.input_size:
        raise ModelFormatError(
            f"Statistiques sur {stats.bands} bandes pour un réseau à {net.spec.input_size} entrées"
        )

    chunks = [
        MAGIC,
        struct.pack('<HH', VERSION, len(dims) - 1),
        struct.pack(f'<{len(dims)}I', *dims),
        struct.pack('<dd', net.spec.bn_epsilon, net.spec.bn_momentum),
    ]
    for block in net.blocks:
        for array in (block.weight, block.bias, block.gamma, block.beta, block.running_mean, block.running_var):
            chunks.append(np.ascontiguousarray(array, dtype=PARAM_DTYPE).tobytes())
    chunks.append(np.ascontiguousarray(net.out_weight, dtype=PARAM_DTYPE).tobytes())
    chunks.append(np.ascontiguousarray(net.out_bias, dtype=PARAM_DTYPE).tobytes())
    chunks.append(struct.pack('<I', stats.bands))
    chunks.append(stats.mean.astype(STATS_DTYPE).tobytes())
    chunks.append(stats.stddev.astype(STATS_DTYPE).tobytes())

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = b''.join(chunks)
    path.write_bytes(payload)
    logger.info("Modèle enregistré : %s (%d octets)", path, len(payload))
    return path


class _Reader:
    def __init__(self, payload, path):
        self.payload = payload
        self.path = path
        self.offset = 0

    def take(self, size):
        if self.offset + size > len(self.payload):
            raise ModelFormatError(f"Fichier modèle tronqué : {self.path}")
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, shape):
        count = int(np.prod(shape))
        raw = self.take(count * dtype.itemsize)
        return np.frombuffer(raw, dtype=dtype).astype(dtype.newbyteorder('='), copy=True).reshape(shape)


def load_model(path):
    """
    Returns:
        (Network en mode inférence, BandStats)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier modèle introuvable : {path}")
    reader = _Reader(path.read_bytes(), path)

    if reader.take(4) != MAGIC:
        raise ModelFormatError(f"{path} n'est pas un modèle HSM1 (magic incorrect)")
    version, layers = reader.unpack('<HH')
    if version != VERSION:
        raise ModelFormatError(f"Version HSM1 {version} non prise en charge (attendu {VERSION})")
    if layers < 2:
        raise ModelFormatError(f"Nombre de couches invalide : {layers}")
    dims = reader.unpack(f'<{layers + 1}I')
    bn_epsilon, bn_momentum = reader.unpack('<dd')

    try:
        spec = NetworkSpec(
            input_size=dims[0], hidden_sizes=dims[1:-1], output_size=dims[-1],
            bn_epsilon=bn_epsilon, bn_momentum=bn_momentum,
        )
    except Exception as e:
        raise ModelFormatError(f"En-tête HSM1 incohérent : {e}") from e

    blocks = []
    for fan_in, fan_out in zip(dims[:-2], dims[1:-1]):
        weight = reader.array(PARAM_DTYPE, (fan_out, fan_in))
        vectors = [reader.array(PARAM_DTYPE, (fan_out,)) for _ in range(5)]
        blocks.append(HiddenBlock(weight, *vectors))
    out_weight = reader.array(PARAM_DTYPE, (dims[-1], dims[-2]))
    out_bias = reader.array(PARAM_DTYPE, (dims[-1],))

    (bands,) = reader.unpack('<I')
    if bands != dims[0]:
        raise ModelFormatError(f"Statistiques sur {bands} bandes pour un réseau à {dims[0]} entrées")
    mean = reader.array(STATS_DTYPE, (bands,))
    stddev = reader.array(STATS_DTYPE, (bands,))
    if reader.offset != len(reader.payload):
        raise ModelFormatError(
            f"{len(reader.payload) - reader.offset} octets en trop à la fin de {path}"
        )

    net = Network(spec=spec, blocks=blocks, out_weight=out_weight, out_bias=out_bias, training=False)
    logger.debug("Modèle chargé : %s, couches %s", path, dims)
    return net, BandStats(mean, stddev)
