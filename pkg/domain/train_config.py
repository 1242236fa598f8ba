from dataclasses import dataclass


@dataclass(frozen=True)
class TrainConfig:
    """Training loop settings. The monitored quantity is always validation log loss."""
    max_epochs: int = 100
    patience: int = 10
    validation_fraction: float = 0.1
    batch_size: int = 32

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be positive, got {self.max_epochs}")
        if not 0 < self.patience < self.max_epochs:
            raise ValueError(f"patience must be in (0, max_epochs={self.max_epochs}), got {self.patience}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(f"validation_fraction must be in (0, 1), got {self.validation_fraction}")

    def to_dict(self):
        return {
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "monitor": "validation_log_loss",
            "validation_fraction": self.validation_fraction,
            "batch_size": self.batch_size,
        }
