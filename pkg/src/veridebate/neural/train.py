"""Training loop: seeded shuffling, Adam updates, per-epoch loss history,
and best-validation checkpointing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adam import AdamState, adam_step
from .model import AnalysisModel, Sample, loss_and_grad


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 5e-3
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    shuffle: bool = True
    # Parameter blocks whose gradients are zeroed before each update
    # (e.g. to freeze a zeroed role table for an ablation).
    freeze_blocks: tuple[str, ...] = ()


@dataclass
class TrainResult:
    loss_history: list[float]
    val_accuracy_history: list[float]
    best_epoch: int | None


def predict_proba(model: AnalysisModel, samples: list[Sample]) -> np.ndarray:
    return np.stack([model.predict_proba(s) for s in samples])


def predict(model: AnalysisModel, samples: list[Sample]) -> np.ndarray:
    return predict_proba(model, samples).argmax(axis=1)


def accuracy(model: AnalysisModel, samples: list[Sample]) -> float:
    labels = np.array([s.label for s in samples])
    return float((predict(model, samples) == labels).mean())


def train(model: AnalysisModel, train_samples: list[Sample], config: TrainConfig,
          val_samples: list[Sample] | None = None) -> TrainResult:
    """Train in place; deterministic for a fixed seed.

    The per-epoch loss history records the sample-weighted mean loss
    seen during the epoch. With a validation set, the parameters with
    the best validation accuracy are restored at the end (ties keep the
    earliest epoch).
    """
    if not train_samples:
        raise ValueError("no training items")
    rng = np.random.default_rng(config.seed)
    params = model.parameter_vector()
    state = AdamState.create(params.size, config.lr)

    frozen_mask = None
    if config.freeze_blocks:
        known = {name for name, _ in model.param_blocks()}
        unknown = set(config.freeze_blocks) - known
        if unknown:
            raise ValueError(f"unknown parameter blocks to freeze: {sorted(unknown)}")
        frozen_mask = np.ones(params.size)
        for name, sl in model.block_slices():
            if name in config.freeze_blocks:
                frozen_mask[sl] = 0.0

    loss_history: list[float] = []
    val_history: list[float] = []
    best_epoch: int | None = None
    best_acc = -1.0
    best_params: np.ndarray | None = None

    n = len(train_samples)
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = [train_samples[i] for i in order[start : start + config.batch_size]]
            loss, grad = loss_and_grad(model, batch)
            total += loss * len(batch)
            if frozen_mask is not None:
                grad = grad * frozen_mask
            params, state = adam_step(params, grad, state)
            model.set_parameter_vector(params)
        loss_history.append(total / n)

        if val_samples:
            acc = accuracy(model, val_samples)
            val_history.append(acc)
            if acc > best_acc:
                best_acc = acc
                best_epoch = epoch
                best_params = params.copy()

    if best_params is not None:
        model.set_parameter_vector(best_params)
    return TrainResult(loss_history, val_history, best_epoch)
