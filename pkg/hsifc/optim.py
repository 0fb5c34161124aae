"""
Optimiseur Adam (moments adaptatifs avec correction de biais).
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .exceptions import NetworkError

# Un batch de moins de 2 enregistrements n'a pas de variance pour la BN
MIN_BATCH = 2


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparamètres d'entraînement (non précisés par le protocole : valeurs standard)"""
    epochs: int = 100
    batch_size: int = 256
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise NetworkError(f"epochs doit être positif ou nul, reçu {self.epochs}")
        if self.batch_size < MIN_BATCH:
            raise NetworkError(f"batch_size doit être au moins {MIN_BATCH} (normalisation par batch), reçu {self.batch_size}")
        if self.learning_rate <= 0:
            raise NetworkError(f"learning_rate doit être strictement positif, reçu {self.learning_rate}")


@dataclass
class OptimizerState:
    """Moments m et v par paramètre, compteur de pas t"""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def for_parameters(cls, params: Dict[str, np.ndarray]):
        return cls(
            m={name: np.zeros_like(p) for name, p in params.items()},
            v={name: np.zeros_like(p) for name, p in params.items()},
        )


def adam_update(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
                state: OptimizerState, cfg: TrainConfig) -> OptimizerState:
    """Met à jour `params` sur place"""
    state.t += 1
    bias1 = 1.0 - cfg.beta1 ** state.t
    bias2 = 1.0 - cfg.beta2 ** state.t

    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise NetworkError(f"Gradient de forme {grad.shape} pour le paramètre {name} {param.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)

        m, v = state.m[name], state.v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * grad
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * (grad * grad)

        m_hat = m / bias1
        v_hat = v / bias2
        param -= (cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_epsilon)).astype(param.dtype, copy=False)
    return state


def adam_step(net, grads, state: OptimizerState, cfg: TrainConfig):
    """Un pas d'Adam sur les paramètres entraînables du réseau"""
    adam_update(net.parameters(), grads, state, cfg)
    return net, state
