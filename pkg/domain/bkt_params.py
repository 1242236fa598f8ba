from dataclasses import dataclass

PROBABILITY_FLOOR = 1e-6
PROBABILITY_CEILING = 1.0 - 1e-6


def clamp_probability(value: float) -> float:
    return min(max(float(value), PROBABILITY_FLOOR), PROBABILITY_CEILING)


@dataclass(frozen=True)
class SkillParams:
    """Bayesian Knowledge Tracing parameters of one skill."""
    prior: float
    transition: float
    guess: float
    slip: float

    def __post_init__(self):
        for name in ("prior", "transition", "guess", "slip"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"BKT parameter '{name}' must be a probability, got {value}")

    def clamped(self) -> "SkillParams":
        return SkillParams(*(clamp_probability(v) for v in (self.prior, self.transition, self.guess, self.slip)))

    def to_dict(self):
        return {"prior": self.prior, "transition": self.transition, "guess": self.guess, "slip": self.slip}


@dataclass(frozen=True)
class BKTParams:
    """
    Per-skill BKT parameters. `fallback_probability` is emitted for skills absent from training
    (the global training mean).
    """
    skills: dict[int, SkillParams]
    fallback_probability: float

    def to_dict(self):
        return {
            "skills": {str(skill): params.to_dict() for skill, params in sorted(self.skills.items())},
            "fallback_probability": self.fallback_probability,
        }
