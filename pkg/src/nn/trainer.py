from dataclasses import dataclass, asdict
from typing import Callable, Optional, Sequence, Union

import numpy as np

from src.data.dataset import Dataset
from src.error_handling.error_handling import ArchitectureError, ContractViolation, TrainingError
from src.logging.logger import get_logger
from src.nn.model import Activation, ModelWeights, forward_logits, loss_and_gradients, one_hot
from src.nn.optimizer import Adam, step_decay
from src.util.config import Config
from src.util.validator import Bounded, ConfigSchema, Present

TRAIN_SCHEMA = ConfigSchema("training", {
    "learning_rate": [Present(), Bounded(low=0, open_low=True)],
    "decay_factor": [Present(), Bounded(low=0, high=1, open_low=True)],
    "decay_period_epochs": [Present(), Bounded(low=1)],
    "batch_size": [Present(), Bounded(low=1)],
    "epochs": [Present(), Bounded(low=1)],
    "l1_coefficient": [Present(), Bounded(low=0)],
    "seed": [Present()],
})


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = Config.MNIST_TRAIN['learning_rate']
    decay_factor: float = Config.MNIST_TRAIN['decay_factor']
    decay_period_epochs: int = Config.MNIST_TRAIN['decay_period_epochs']
    batch_size: int = Config.MNIST_TRAIN['batch_size']
    epochs: int = Config.MNIST_TRAIN['epochs']
    l1_coefficient: float = Config.MNIST_TRAIN['l1_coefficient']
    seed: int = 0

    def __post_init__(self):
        TRAIN_SCHEMA.enforce(asdict(self))

    @classmethod
    def mnist(cls, seed: int = 0) -> "TrainConfig":
        return cls(seed=seed, **Config.MNIST_TRAIN)

    @classmethod
    def demo2d(cls, seed: int = 0) -> "TrainConfig":
        return cls(seed=seed, **Config.DEMO_TRAIN)


def init_model(architecture: Sequence[int], activation=Activation.RELU,
               rng: Union[np.random.Generator, int, None] = None) -> ModelWeights:
    """He-uniform weights scaled by fan-in, zero biases."""
    if len(architecture) < 2:
        raise ArchitectureError(f"Architecture needs input and output widths, got {list(architecture)}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    matrices = []
    for fan_in, fan_out in zip(architecture[:-1], architecture[1:]):
        limit = np.sqrt(6.0 / fan_in)
        W = np.zeros((fan_out, fan_in + 1))
        W[:, :-1] = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        matrices.append(W)
    return ModelWeights.from_matrices(matrices, activation)


def mlp_architecture(input_width: int, hidden_width: int, depth: int, num_classes: int):
    return [input_width] + [hidden_width] * depth + [num_classes]


def train(dataset: Dataset, architecture: Sequence[int], cfg: TrainConfig,
          activation=Activation.RELU, init: Optional[ModelWeights] = None) -> ModelWeights:
    logger = get_logger()
    architecture = list(architecture)
    if len(dataset) == 0:
        raise ContractViolation("Cannot train on an empty dataset")
    if architecture[0] != dataset.input_width or architecture[-1] != dataset.num_classes:
        raise ArchitectureError(
            f"Architecture {architecture} does not fit data with I={dataset.input_width}, C={dataset.num_classes}")

    rng = np.random.default_rng(cfg.seed)
    if init is None:
        init = init_model(architecture, activation, rng)
    elif init.architecture != architecture:
        raise ArchitectureError(f"Initial weights have architecture {init.architecture}, expected {architecture}")
    activation = Activation(activation)

    params = [W.copy() for W in init.matrices()]
    optimizer = Adam(params)
    X = dataset.features
    Y = one_hot(dataset.labels, dataset.num_classes)
    n = len(dataset)

    step = 0
    for epoch in range(cfg.epochs):
        lr = step_decay(cfg.learning_rate, cfg.decay_factor, cfg.decay_period_epochs, epoch)
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            loss, grads = loss_and_gradients(params, activation, X[batch], Y[batch], cfg.l1_coefficient)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise TrainingError(f"Loss diverged at epoch {epoch}, step {step}", epoch=epoch, step=step)
            optimizer.step(params, grads, lr)
            epoch_loss += loss * len(batch)
            step += 1
        logger.debug(f"epoch {epoch + 1}/{cfg.epochs} lr={lr:.6g} loss={epoch_loss / n:.6f}")

    if not all(np.all(np.isfinite(W)) for W in params):
        raise TrainingError(f"Weights diverged after epoch {cfg.epochs - 1}", epoch=cfg.epochs - 1, step=step)
    return ModelWeights.from_matrices(params, activation)


def evaluate_accuracy(model_or_predictor: Union[ModelWeights, Callable[[np.ndarray], np.ndarray]],
                      test: Dataset) -> float:
    """Fraction of samples whose argmax prediction equals the label.

    A predictor may return (N, C) scores or (N,) class ids.
    """
    if len(test) == 0:
        raise ContractViolation("Cannot evaluate on an empty dataset")
    if isinstance(model_or_predictor, ModelWeights):
        scores = forward_logits(model_or_predictor, test.features)
    else:
        scores = np.asarray(model_or_predictor(test.features))
    predicted = scores if scores.ndim == 1 else np.argmax(scores, axis=1)
    return float(np.mean(predicted == test.labels))
