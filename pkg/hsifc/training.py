"""
Boucle d'entraînement par mini-batchs mélangés.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .data import PixelDataset
from .exceptions import NetworkError
from .network import Network, loss_and_gradients, predict
from .optim import MIN_BATCH, OptimizerState, TrainConfig, adam_step

logger = logging.getLogger(__name__)


@dataclass
class TrainReport:
    loss_history: List[float] = field(default_factory=list)
    final_train_accuracy: float = 0.0
    seconds: float = 0.0

    def as_dict(self):
        return {
            'loss_history': [float(loss) for loss in self.loss_history],
            'final_train_accuracy': float(self.final_train_accuracy),
        }


def train(net: Network, train_set: PixelDataset, cfg: TrainConfig):
    """
    Entraîne `net` sur place : `epochs` passes de mini-batchs mélangés
    (graine cfg.shuffle_seed). Le dernier batch incomplet est conservé s'il
    contient au moins 2 enregistrements. Le réseau termine en mode inférence.

    Returns:
        (net, TrainReport)
    """
    if cfg.batch_size > len(train_set):
        raise NetworkError(f"batch_size {cfg.batch_size} supérieur à la taille du jeu ({len(train_set)})")
    if train_set.bands != net.spec.input_size:
        raise NetworkError(f"Le réseau attend {net.spec.input_size} bandes, le jeu en a {train_set.bands}")

    started = time.perf_counter()
    report = TrainReport()
    features = train_set.signatures.astype(net.dtype)
    labels = train_set.labels
    rng = np.random.default_rng(cfg.shuffle_seed)
    state = OptimizerState.for_parameters(net.parameters())

    net.train()
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_set))
        total, seen = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            if len(rows) < MIN_BATCH:
                continue
            loss, grads = loss_and_gradients(net, features[rows], labels[rows])
            adam_step(net, grads, state, cfg)
            total += loss * len(rows)
            seen += len(rows)
        report.loss_history.append(total / seen)
        logger.debug("Époque %d/%d : perte %.5f", epoch + 1, cfg.epochs, report.loss_history[-1])

    net.eval()
    if len(train_set):
        report.final_train_accuracy = float(np.mean(predict(net, train_set) == labels))
    report.seconds = time.perf_counter() - started
    logger.info(
        "Entraînement terminé : %d époques, précision d'entraînement %.4f (%.1f s)",
        cfg.epochs, report.final_train_accuracy, report.seconds,
    )
    return net, report
