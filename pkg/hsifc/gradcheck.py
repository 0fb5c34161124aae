"""
Vérification des gradients analytiques par différences finies centrées.
"""

import logging
from typing import Callable, Dict, Optional

import numpy as np

from .exceptions import NetworkError
from .network import NetworkSpec, batch_loss, init_network, loss_and_gradients, parameter_count

logger = logging.getLogger(__name__)

MAX_CHECK_PARAMETERS = 5000
DEFAULT_STEP = 1e-5
# En dessous, l'écart relève du bruit d'arrondi (ex. biais Dense avant BN, gradient nul)
DEFAULT_ABS_TOL = 1e-9
RELATIVE_FLOOR = 1e-8


def numeric_gradients(net, batch, labels, step: float = DEFAULT_STEP) -> Dict[str, np.ndarray]:
    """Différences centrées (f(p + h) - f(p - h)) / 2h pour chaque composante"""
    numeric = {}
    for name, param in net.parameters().items():
        grad = np.zeros_like(param, dtype=np.float64)
        flat = param.reshape(-1)
        out = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = batch_loss(net, batch, labels)
            flat[i] = original - step
            minus = batch_loss(net, batch, labels)
            flat[i] = original
            out[i] = (plus - minus) / (2 * step)
        numeric[name] = grad
    return numeric


def max_relative_error(analytic: Dict[str, np.ndarray], numeric: Dict[str, np.ndarray],
                       abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """max |a - n| / max(|a| + |n|, 1e-8) sur toutes les composantes"""
    worst = 0.0
    for name, expected in numeric.items():
        a = np.asarray(analytic[name], dtype=np.float64)
        diff = np.abs(a - expected)
        relative = diff / np.maximum(np.abs(a) + np.abs(expected), RELATIVE_FLOOR)
        relative[diff <= abs_tol] = 0.0
        if relative.size:
            worst = max(worst, float(relative.max()))
    return worst


def gradient_check(spec: NetworkSpec, seed: int, batch, labels=None,
                   step: float = DEFAULT_STEP, abs_tol: float = DEFAULT_ABS_TOL,
                   grad_transform: Optional[Callable[[Dict[str, np.ndarray]], Dict[str, np.ndarray]]] = None) -> float:
    """
    Compare gradients analytiques et numériques sur un petit réseau en double
    précision. gamma et beta sont perturbés aléatoirement pour que la branche
    affine de la BN soit réellement testée.

    `grad_transform` permet d'altérer les gradients analytiques avant
    comparaison (injection de fautes).
    """
    if parameter_count(spec) > MAX_CHECK_PARAMETERS:
        raise NetworkError(
            f"gradient_check limité à {MAX_CHECK_PARAMETERS} paramètres, {parameter_count(spec)} demandés"
        )

    batch = np.asarray(batch, dtype=np.float64)
    rng = np.random.default_rng(seed)
    net = init_network(spec, seed, dtype=np.float64)
    for block in net.blocks:
        block.gamma[...] = rng.uniform(0.5, 1.5, size=block.gamma.shape)
        block.beta[...] = rng.normal(0.0, 0.1, size=block.beta.shape)
    if labels is None:
        labels = rng.integers(1, spec.output_size + 1, size=len(batch))

    _, analytic = loss_and_gradients(net, batch, labels, update_running_stats=False)
    if grad_transform is not None:
        analytic = grad_transform(analytic)
    numeric = numeric_gradients(net, batch, labels, step=step)

    error = max_relative_error(analytic, numeric, abs_tol=abs_tol)
    logger.debug("gradient_check %s (graine %d) : erreur relative max %.3e", spec.layer_dims, seed, error)
    return error
