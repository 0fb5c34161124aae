"""
Réseau entièrement connecté avec normalisation par batch.

Chaque bloc caché : Dense -> BatchNorm -> ReLU. La couche de sortie est une
Dense seule ; la classe prédite est l'indice du logit maximal (+1).

Conventions :
- poids Dense de forme (sorties, entrées), stockés en ligne
- BN en entraînement : statistiques du batch (variance biaisée, diviseur N)
  et mise à jour running <- momentum * running + (1 - momentum) * batch
- BN en inférence : statistiques courantes, jamais modifiées
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Tuple

import numpy as np

from .data import PixelDataset
from .exceptions import NetworkError

logger = logging.getLogger(__name__)

PREDICT_CHUNK = 8192


@dataclass(frozen=True)
class NetworkSpec:
    input_size: int
    hidden_sizes: Tuple[int, ...]
    output_size: int
    bn_epsilon: float = 1e-5
    bn_momentum: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, 'hidden_sizes', tuple(int(size) for size in self.hidden_sizes))
        if self.input_size < 1 or self.output_size < 1:
            raise NetworkError("input_size et output_size doivent être positifs")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise NetworkError(f"Couches cachées invalides : {self.hidden_sizes}")
        if not 0 < self.bn_momentum < 1:
            raise NetworkError(f"bn_momentum doit être dans ]0, 1[, reçu {self.bn_momentum}")
        if self.bn_epsilon <= 0:
            raise NetworkError("bn_epsilon doit être strictement positif")

    @property
    def layer_dims(self):
        """(entrée, cachées..., sortie)"""
        return (self.input_size,) + self.hidden_sizes + (self.output_size,)


@dataclass
class HiddenBlock:
    weight: np.ndarray
    bias: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray


@dataclass
class Network:
    spec: NetworkSpec
    blocks: List[HiddenBlock]
    out_weight: np.ndarray
    out_bias: np.ndarray
    training: bool = True

    @property
    def dtype(self):
        return self.out_weight.dtype

    def parameters(self) -> Dict[str, np.ndarray]:
        """Paramètres entraînables, dans l'ordre de sérialisation"""
        params = {}
        for k, block in enumerate(self.blocks):
            params[f'blocks.{k}.weight'] = block.weight
            params[f'blocks.{k}.bias'] = block.bias
            params[f'blocks.{k}.gamma'] = block.gamma
            params[f'blocks.{k}.beta'] = block.beta
        params['output.weight'] = self.out_weight
        params['output.bias'] = self.out_bias
        return params

    def eval(self):
        self.training = False
        return self

    def train(self):
        self.training = True
        return self


class BlockTrace(NamedTuple):
    """Valeurs intermédiaires d'un bloc caché, conservées pour la rétropropagation"""
    inputs: np.ndarray
    normalized: np.ndarray
    inv_std: np.ndarray
    pre_activation: np.ndarray


def parameter_count(spec: NetworkSpec) -> int:
    """Scalaires entraînables : Dense (poids + biais) et affine BN (gamma, beta)"""
    dims = spec.layer_dims
    dense = sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))
    return dense + 2 * sum(spec.hidden_sizes)


def init_network(spec: NetworkSpec, seed: int, dtype=np.float32) -> Network:
    """Poids ~ N(0, 2 / fan_in), biais 0, gamma 1, beta 0, stats courantes (0, 1)"""
    rng = np.random.default_rng(seed)
    dims = spec.layer_dims

    def he(fan_out, fan_in):
        return (rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in)).astype(dtype)

    blocks = []
    for fan_in, fan_out in zip(dims[:-2], dims[1:-1]):
        blocks.append(HiddenBlock(
            weight=he(fan_out, fan_in),
            bias=np.zeros(fan_out, dtype=dtype),
            gamma=np.ones(fan_out, dtype=dtype),
            beta=np.zeros(fan_out, dtype=dtype),
            running_mean=np.zeros(fan_out, dtype=dtype),
            running_var=np.ones(fan_out, dtype=dtype),
        ))

    return Network(
        spec=spec,
        blocks=blocks,
        out_weight=he(dims[-1], dims[-2]),
        out_bias=np.zeros(dims[-1], dtype=dtype),
        training=True,
    )


def _check_batch(net: Network, batch) -> np.ndarray:
    x = np.asarray(batch, dtype=net.dtype)
    if x.ndim != 2 or x.shape[1] != net.spec.input_size:
        raise NetworkError(f"Batch de forme {x.shape}, {net.spec.input_size} bandes attendues")
    return x


def run_layers(net: Network, batch, training: bool, update_running: bool = False):
    """
    Passe avant complète.

    Returns:
        (logits N x C, liste de BlockTrace par bloc caché)
    """
    x = _check_batch(net, batch)
    if training and len(x) < 2:
        raise NetworkError("Un batch d'entraînement doit contenir au moins 2 enregistrements")

    eps = net.spec.bn_epsilon
    momentum = net.spec.bn_momentum
    traces = []
    for block in net.blocks:
        z = x @ block.weight.T + block.bias
        if training:
            mean = z.mean(axis=0)
            var = z.var(axis=0)
            if update_running:
                block.running_mean[...] = momentum * block.running_mean + (1 - momentum) * mean
                block.running_var[...] = momentum * block.running_var + (1 - momentum) * var
        else:
            mean = block.running_mean
            var = block.running_var
        inv_std = 1.0 / np.sqrt(var + eps)
        normalized = (z - mean) * inv_std
        pre_activation = block.gamma * normalized + block.beta
        traces.append(BlockTrace(x, normalized, inv_std, pre_activation))
        x = np.maximum(pre_activation, 0)

    logits = x @ net.out_weight.T + net.out_bias
    return logits, traces


def forward(net: Network, batch) -> np.ndarray:
    """Logits N x C ; en mode entraînement, met à jour les statistiques courantes"""
    logits, _ = run_layers(net, batch, training=net.training, update_running=net.training)
    return logits


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def _label_positions(net: Network, labels, n_rows) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if len(labels) != n_rows:
        raise NetworkError(f"{len(labels)} labels pour {n_rows} enregistrements")
    if len(labels) and (labels.min() < 1 or labels.max() > net.spec.output_size):
        raise NetworkError(f"Labels hors de l'intervalle 1..{net.spec.output_size}")
    return labels - 1


def batch_loss(net: Network, batch, labels) -> float:
    """Entropie croisée moyenne en mode entraînement, sans toucher aux statistiques courantes"""
    logits, _ = run_layers(net, batch, training=True, update_running=False)
    positions = _label_positions(net, labels, len(logits))
    return float(-log_softmax(logits)[np.arange(len(logits)), positions].mean())


def loss_and_gradients(net: Network, batch, labels, update_running_stats: bool = True):
    """
    Entropie croisée softmax moyenne et gradients analytiques exacts
    (Dense, BN par statistiques du batch, ReLU).

    Returns:
        (loss, dict nom -> gradient, même forme que net.parameters())
    """
    logits, traces = run_layers(net, batch, training=True, update_running=update_running_stats)
    n = len(logits)
    positions = _label_positions(net, labels, n)

    log_probs = log_softmax(logits)
    loss = float(-log_probs[np.arange(n), positions].mean())

    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), positions] -= 1
    dlogits /= n

    last_activation = np.maximum(traces[-1].pre_activation, 0)
    grads = {
        'output.weight': dlogits.T @ last_activation,
        'output.bias': dlogits.sum(axis=0),
    }
    upstream = dlogits @ net.out_weight

    for k in reversed(range(len(net.blocks))):
        block, trace = net.blocks[k], traces[k]
        dy = upstream * (trace.pre_activation > 0)
        grads[f'blocks.{k}.gamma'] = (dy * trace.normalized).sum(axis=0)
        grads[f'blocks.{k}.beta'] = dy.sum(axis=0)

        dxhat = dy * block.gamma
        dz = (trace.inv_std / n) * (
            n * dxhat - dxhat.sum(axis=0) - trace.normalized * (dxhat * trace.normalized).sum(axis=0)
        )
        grads[f'blocks.{k}.weight'] = dz.T @ trace.inputs
        grads[f'blocks.{k}.bias'] = dz.sum(axis=0)
        upstream = dz @ block.weight

    params = net.parameters()
    return loss, {name: grads[name].astype(params[name].dtype, copy=False) for name in params}


def predict_signatures(net: Network, signatures) -> np.ndarray:
    """argmax des logits + 1 ; en cas d'égalité, la plus petite classe l'emporte"""
    if net.training:
        raise NetworkError("predict exige un réseau en mode inférence")
    signatures = np.asarray(signatures)
    if signatures.ndim != 2 or signatures.shape[1] != net.spec.input_size:
        raise NetworkError(
            f"Le modèle attend {net.spec.input_size} bandes, les données en ont "
            f"{signatures.shape[1] if signatures.ndim == 2 else '?'}"
        )
    out = np.empty(len(signatures), dtype=np.int64)
    for start in range(0, len(signatures), PREDICT_CHUNK):
        logits, _ = run_layers(net, signatures[start:start + PREDICT_CHUNK], training=False)
        out[start:start + PREDICT_CHUNK] = np.argmax(logits, axis=1) + 1
    return out


def predict(net: Network, ds: PixelDataset) -> np.ndarray:
    return predict_signatures(net, ds.signatures)
