import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

BUNDLED_DATA_DIR = Path(__file__).parent / "data"

DEFAULT_SEED = 0
DEFAULT_ITERATIONS = 10_000


@dataclass(frozen=True)
class Settings:
    data_dir: Path = BUNDLED_DATA_DIR
    db_path: Path = Path("db/bias_reports.db")
    seed: int = DEFAULT_SEED
    iterations: int = DEFAULT_ITERATIONS

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings, letting BIAS_KIT_DATA and BIAS_KIT_DB override the defaults."""
        data_dir = os.environ.get("BIAS_KIT_DATA")
        db_path = os.environ.get("BIAS_KIT_DB")
        return cls(
            data_dir=Path(data_dir) if data_dir else BUNDLED_DATA_DIR,
            db_path=Path(db_path) if db_path else cls.db_path,
        )

    @property
    def occupations_file(self) -> Path:
        return self.data_dir / "occupations.csv"

    @property
    def dictionary_file(self) -> Path:
        return self.data_dir / "swap_rules.tsv"

    @property
    def templates_file(self) -> Path:
        return self.data_dir / "templates.toml"

    @property
    def gazetteer_file(self) -> Path:
        return self.data_dir / "job_titles.txt"

    @property
    def gender_list_file(self) -> Path:
        return self.data_dir / "gender_list_sample.tsv"

    @property
    def report_schema_file(self) -> Path:
        return self.data_dir / "report.schema.json"


@dataclass(frozen=True)
class RunConfig:
    """One parsed command-line invocation."""

    command: str
    inputs: Dict[str, Optional[Path]] = field(default_factory=dict)
    output: Optional[Path] = None
    seed: int = DEFAULT_SEED
    iterations: int = DEFAULT_ITERATIONS
    output_format: str = "text"
    flags: Dict[str, Any] = field(default_factory=dict)
