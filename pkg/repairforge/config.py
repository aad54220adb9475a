from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="REPAIRFORGE_",
        case_sensitive=True,
        extra="ignore",
    )

    # Fault Localization
    TOP_K: int = 5
    FORMULA: Literal["ochiai", "tarantula"] = "ochiai"

    # Angelic Exploration
    MAX_EVALS: int = 12
    MAX_PATHS: int = 64
    MAX_REPLAYS: int = 8192

    # Synthesis
    MAX_SIZE: int = 11
    UNRESTRICTED_CONSTANTS: bool = False
    UNRESTRICTED_RANGE: int = 10
    INCLUDE_DIV: bool = False

    # Interpreter
    STEP_BUDGET: int = 100_000

    # Time Budgets (seconds)
    LOCATION_BUDGET_SECS: float = 10.0
    BUDGET_SECS: float = 120.0

    # Evidence Generation
    SEED: int = 0xC0FFEE
    EVIDENCE_SAMPLES: int = 500
    INPUT_LOW: int = -2
    INPUT_HIGH: int = 10
    AGREEING_FRACTION: float = 0.05

    # Logging
    LOG_LEVEL: str = "WARNING"


settings = Settings()


class ExecutionLimits(BaseModel):
    step_budget: int = Field(default_factory=lambda: settings.STEP_BUDGET, ge=1)


class AngelicBounds(BaseModel):
    max_evals: int = Field(default_factory=lambda: settings.MAX_EVALS, ge=1)
    max_paths: int = Field(default_factory=lambda: settings.MAX_PATHS, ge=1)
    max_replays: int = Field(default_factory=lambda: settings.MAX_REPLAYS, ge=1)


class RepairConfig(BaseModel):
    """Every knob of a repair or evidence run; defaults come from `settings`."""

    top_k: int = Field(default_factory=lambda: settings.TOP_K, ge=1)
    formula: Literal["ochiai", "tarantula"] = Field(default_factory=lambda: settings.FORMULA)
    max_size: int = Field(default_factory=lambda: settings.MAX_SIZE, ge=1)
    max_evals: int = Field(default_factory=lambda: settings.MAX_EVALS, ge=1)
    max_paths: int = Field(default_factory=lambda: settings.MAX_PATHS, ge=1)
    max_replays: int = Field(default_factory=lambda: settings.MAX_REPLAYS, ge=1)
    step_budget: int = Field(default_factory=lambda: settings.STEP_BUDGET, ge=1)
    unrestricted_constants: bool = Field(default_factory=lambda: settings.UNRESTRICTED_CONSTANTS)
    unrestricted_range: int = Field(default_factory=lambda: settings.UNRESTRICTED_RANGE, ge=0)
    include_div: bool = Field(default_factory=lambda: settings.INCLUDE_DIV)
    location_budget_secs: float = Field(default_factory=lambda: settings.LOCATION_BUDGET_SECS, gt=0)
    budget_secs: float = Field(default_factory=lambda: settings.BUDGET_SECS, gt=0)
    seed: int = Field(default_factory=lambda: settings.SEED)
    evidence_samples: int = Field(default_factory=lambda: settings.EVIDENCE_SAMPLES, ge=1)
    input_low: int = Field(default_factory=lambda: settings.INPUT_LOW)
    input_high: int = Field(default_factory=lambda: settings.INPUT_HIGH)
    # one (low, high) pair per parameter; None means input_low..input_high for each
    input_ranges: Optional[List[Tuple[int, int]]] = None
    agreeing_fraction: float = Field(default_factory=lambda: settings.AGREEING_FRACTION, ge=0.0, le=1.0)
    report_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_input_range(self) -> "RepairConfig":
        if self.input_low > self.input_high:
            raise ValueError("input_low must not exceed input_high")
        for low, high in self.input_ranges or ():
            if low > high:
                raise ValueError(f"input range {low}..{high} is empty")
        return self

    def bounds(self) -> AngelicBounds:
        return AngelicBounds(
            max_evals=self.max_evals,
            max_paths=self.max_paths,
            max_replays=self.max_replays,
        )

    def limits(self) -> ExecutionLimits:
        return ExecutionLimits(step_budget=self.step_budget)
