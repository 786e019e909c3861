from dataclasses import dataclass, field
from typing import Dict, Tuple

import polars as pl

from app.errors import DuplicatePhrase, InputError

COUNT_COLUMNS = ("male", "female", "neutral", "plural")


@dataclass(frozen=True, eq=False)
class GenderCountList:
    """Noun phrase -> (male, female, neutral, plural) context counts, one row per phrase."""

    entries: pl.DataFrame

    def __post_init__(self):
        missing = [c for c in ("phrase", *COUNT_COLUMNS) if c not in self.entries.columns]
        if missing:
            raise ValueError(f"gender list lacks columns: {', '.join(missing)}")
        folded = self.entries.get_column("phrase").str.to_lowercase()
        duplicates = folded.filter(folded.is_duplicated()).unique().sort().to_list()
        if duplicates:
            raise DuplicatePhrase(f"duplicate phrases (case-folded): {', '.join(duplicates)}")
        negative = self.entries.filter(pl.any_horizontal([pl.col(c) < 0 for c in COUNT_COLUMNS]))
        if not negative.is_empty():
            raise InputError(f"negative counts for {negative.get_column('phrase')[0]!r}")

    @classmethod
    def of(cls, entries: Dict[str, Tuple[int, int, int, int]]) -> "GenderCountList":
        rows = [(phrase, *counts) for phrase, counts in entries.items()]
        return cls(pl.DataFrame(rows, schema={"phrase": pl.Utf8, **{c: pl.Int64 for c in COUNT_COLUMNS}},
                                orient="row"))

    def as_dict(self) -> Dict[str, Tuple[int, int, int, int]]:
        return {row[0]: tuple(row[1:]) for row in self.entries.select("phrase", *COUNT_COLUMNS).iter_rows()}

    def __len__(self) -> int:
        return self.entries.height

    def __eq__(self, other) -> bool:
        return isinstance(other, GenderCountList) and self.entries.equals(other.entries)


@dataclass(frozen=True)
class GenderTally:
    """Gendered chain counts and job-title rates for one slice of a corpus."""

    male_chains: int = 0
    female_chains: int = 0
    male_with_job: int = 0
    female_with_job: int = 0

    @property
    def gendered_entity_total(self) -> int:
        return self.male_chains + self.female_chains

    @property
    def male_fraction(self) -> float:
        total = self.gendered_entity_total
        return self.male_chains / total if total else 0.0

    @property
    def male_jobtitle_rate(self) -> float:
        return self.male_with_job / self.male_chains if self.male_chains else 0.0

    @property
    def female_jobtitle_rate(self) -> float:
        return self.female_with_job / self.female_chains if self.female_chains else 0.0

    @property
    def jobtitle_ratio(self) -> float:
        """Male over female job-title rate; 0 when the female rate is 0."""
        return self.male_jobtitle_rate / self.female_jobtitle_rate if self.female_jobtitle_rate else 0.0

    def to_report(self) -> Dict:
        return {
            "gendered_entity_total": self.gendered_entity_total,
            "male_chains": self.male_chains,
            "female_chains": self.female_chains,
            "male_fraction": self.male_fraction,
            "male_jobtitle_rate": self.male_jobtitle_rate,
            "female_jobtitle_rate": self.female_jobtitle_rate,
            "jobtitle_ratio": self.jobtitle_ratio,
        }


@dataclass(frozen=True)
class CorpusBiasStats(GenderTally):
    per_genre: Dict[str, GenderTally] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        """No chain in the corpus is headed by a gendered pronoun."""
        return self.gendered_entity_total == 0

    def to_report(self) -> Dict:
        report = super().to_report()
        report["empty"] = self.empty
        report["per_genre"] = {genre: tally.to_report() for genre, tally in sorted(self.per_genre.items())}
        return report
