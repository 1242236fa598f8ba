import json
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from application.app.engine.engine_exceptions import ContractException, DimensionMismatchException
from application.app.engine.tensor import Tensor
from application.app.seeding import SeedStream, make_rng

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "kt-checkpoint"
CHECKPOINT_VERSION = 1


class ParamKind(str, Enum):
    WEIGHT = "weight"
    BIAS = "bias"
    EMBEDDING = "embedding"
    MEMORY = "memory"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: tuple[int, ...]
    kind: ParamKind = ParamKind.WEIGHT


class ParamStore:
    """
    Named trainable tensors plus their Nadam state (first and second moments, step counter, momentum schedule).
    Parameters keep their insertion order, which is also the checkpoint order.
    """

    def __init__(self):
        self.params: dict[str, Tensor] = {}
        self.first_moments: dict[str, np.ndarray] = {}
        self.second_moments: dict[str, np.ndarray] = {}
        self.step = 0
        self.m_schedule = 1.0

    def add(self, name: str, values) -> Tensor:
        if name in self.params:
            raise ContractException(f"Parameter '{name}' is already registered")
        tensor = Tensor(np.array(values, dtype=np.float64), requires_grad=True, name=name)
        self.params[name] = tensor
        self.first_moments[name] = np.zeros_like(tensor.data)
        self.second_moments[name] = np.zeros_like(tensor.data)
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def __iter__(self):
        return iter(self.params)

    def __len__(self):
        return len(self.params)

    def names(self) -> list[str]:
        return list(self.params)

    def shapes(self) -> dict[str, tuple]:
        return {name: tensor.shape for name, tensor in self.params.items()}

    def count(self) -> int:
        """Total number of trainable scalars."""
        return int(sum(tensor.data.size for tensor in self.params.values()))

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.zero_grad()

    def gradients(self) -> dict[str, np.ndarray]:
        """Accumulated gradients; a parameter the loss did not touch gets exact zeros."""
        return {
            name: tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
            for name, tensor in self.params.items()
        }

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self.params.items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        for name, values in snapshot.items():
            target = self.params[name]
            if target.shape != values.shape:
                raise DimensionMismatchException(f"restore '{name}'", target.shape, values.shape)
            target.data = values.copy()

    def equals(self, other: "ParamStore") -> bool:
        return self.names() == other.names() and all(
            np.array_equal(self.params[name].data, other.params[name].data) for name in self.params
        )

    def save(self, path: str, manifest: dict | None = None) -> None:
        """
        Writes the checkpoint container: one JSON header line
        `{"format", "version", "manifest", "tensors": [{"name", "shape"}, ...]}` followed by every tensor's
        values as raw little-endian float64, in header order, C-contiguous.
        """
        header = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "manifest": manifest or {},
            "tensors": [{"name": name, "shape": list(tensor.shape)} for name, tensor in self.params.items()],
        }
        with open(path, "wb") as file:
            file.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            for tensor in self.params.values():
                file.write(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes())
        logger.debug(f"Checkpoint with {len(self)} tensors written to '{path}'")

    @staticmethod
    def load(path: str) -> tuple["ParamStore", dict]:
        with open(path, "rb") as file:
            header = json.loads(file.readline().decode("utf-8"))
            payload = file.read()
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ContractException(f"'{path}' is not a checkpoint file")

        store = ParamStore()
        offset = 0
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape, dtype=np.int64))
            values = np.frombuffer(payload, dtype="<f8", count=count, offset=offset).reshape(shape)
            store.add(entry["name"], values.astype(np.float64))
            offset += 8 * count
        if offset != len(payload):
            raise ContractException(f"Checkpoint '{path}' has {len(payload) - offset} trailing bytes")
        return store, header["manifest"]


def glorot_limit(shape: tuple[int, ...]) -> float:
    fan_in, fan_out = (shape[0], shape[-1]) if len(shape) > 1 else (shape[0], shape[0])
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(specs: list[ParamSpec], seed: int) -> ParamStore:
    """
    Weights, embeddings and memories uniform in +-sqrt(6 / (fan_in + fan_out)); biases zero.
    Draws are made in spec order from the init stream of `seed`.
    """
    rng = make_rng(seed, SeedStream.INIT)
    store = ParamStore()
    for spec in specs:
        if any(size < 1 for size in spec.shape):
            raise ContractException(f"Parameter '{spec.name}' needs positive sizes, got {spec.shape}")
        if spec.kind is ParamKind.BIAS:
            store.add(spec.name, np.zeros(spec.shape))
        else:
            limit = glorot_limit(spec.shape)
            store.add(spec.name, rng.uniform(-limit, limit, size=spec.shape))
    return store
