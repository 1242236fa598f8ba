import logging
import math
from dataclasses import dataclass, field

import numpy as np

from application.app.engine.engine_exceptions import TrainingDivergenceException
from application.app.engine.nadam import nadam_step
from application.app.engine.tensor import backward
from application.app.metrics.metrics import log_loss
from application.app.models.batching import make_batches
from application.app.models.deep_model import DeepModel
from application.app.seeding import SeedStream, make_rng
from domain.dataset import Dataset
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)


class EarlyStopping:
    """
    Tracks the best monitored value. An epoch improves only when strictly below the best so far;
    `should_stop` turns true after `patience` consecutive epochs without improvement.
    """
    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = 0
        self.waited = 0

    def update(self, epoch: int, value: float) -> bool:
        if value < self.best:
            self.best = value
            self.best_epoch = epoch
            self.waited = 0
            return True
        self.waited += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.waited >= self.patience


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    validation_loss: float

    def to_dict(self):
        return {"epoch": self.epoch, "train_loss": self.train_loss, "validation_loss": self.validation_loss}


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_validation_loss: float = math.inf
    stopped_early: bool = False

    @property
    def epochs(self) -> int:
        return len(self.records)

    def to_dict(self):
        return {
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "best_validation_loss": self.best_validation_loss,
            "stopped_early": self.stopped_early,
            "records": [record.to_dict() for record in self.records],
        }


def validation_loss(model: DeepModel, validation: Dataset, batch_size: int) -> float:
    """Log loss pooled over every validation target."""
    predictions = model.predict(validation, batch_size)
    return log_loss(predictions.labels, predictions.probabilities)


def train_model(model: DeepModel, train: Dataset, validation: Dataset, config: TrainConfig) -> TrainingHistory:
    """
    Trains with shuffled mini-batches and Nadam, monitoring validation log loss after every epoch.
    The parameters of the best validation epoch are restored before returning.
    """
    seed = model.hp.seed
    shuffle_rng = make_rng(seed, SeedStream.SHUFFLE)
    dropout_rng = make_rng(seed, SeedStream.DROPOUT)
    stopping = EarlyStopping(config.patience)
    history = TrainingHistory()
    best_snapshot = model.store.snapshot()
    tag = model.hp.architecture.value

    for epoch in range(1, config.max_epochs + 1):
        losses = []
        for number, batch in enumerate(make_batches(train, config.batch_size, shuffle_rng), start=1):
            model.store.zero_grad()
            loss = model.loss(batch, training=True, rng=dropout_rng)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDivergenceException(f"epoch {epoch} batch {number}", value)
            backward(loss)
            nadam_step(model.store, model.store.gradients(), model.hp.learning_rate)
            losses.append(value)

        monitored = validation_loss(model, validation, config.batch_size)
        if not np.isfinite(monitored):
            raise TrainingDivergenceException(f"epoch {epoch} validation", monitored)
        history.records.append(EpochRecord(epoch, float(np.mean(losses)), monitored))
        if stopping.update(epoch, monitored):
            best_snapshot = model.store.snapshot()
        logger.debug(f"{tag} epoch {epoch}: train loss {np.mean(losses):.5f}, validation loss {monitored:.5f}")

        if stopping.should_stop:
            history.stopped_early = True
            logger.info(
                f"{tag}: early stop after epoch {epoch}, no improvement for {config.patience} epochs "
                f"(best epoch {stopping.best_epoch})"
            )
            break

    model.store.restore(best_snapshot)
    history.best_epoch = stopping.best_epoch
    history.best_validation_loss = stopping.best
    logger.info(
        f"{tag} trained {history.epochs} epochs; restored epoch {history.best_epoch} "
        f"(validation log loss {history.best_validation_loss:.5f})"
    )
    return history
