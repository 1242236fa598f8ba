from dataclasses import dataclass, field


@dataclass
class RunManifest:
    """Describes how an output directory was produced. Exactly one per output directory."""
    command: str
    config_digest: str
    dataset_digest: str | None
    master_seed: int | None
    artifact_versions: dict[str, str] = field(default_factory=dict)
    started_at: str = ""
    finished_at: str = ""
    wall_clock_seconds: float = 0.0
    arguments: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "dataset_digest": self.dataset_digest,
            "master_seed": self.master_seed,
            "artifact_versions": self.artifact_versions,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "wall_clock_seconds": self.wall_clock_seconds,
            "arguments": self.arguments,
        }
