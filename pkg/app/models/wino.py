from dataclasses import dataclass
from enum import Enum
from typing import Tuple


class TemplateKind(str, Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


class Referent(str, Enum):
    ENTITY1 = "entity1"
    ENTITY2 = "entity2"


class PronounCase(str, Enum):
    NOMINATIVE = "nominative"
    ACCUSATIVE = "accusative"
    POSSESSIVE = "possessive"


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"

    @property
    def opposite(self) -> "Gender":
        return Gender.FEMALE if self is Gender.MALE else Gender.MALE


class Condition(str, Enum):
    PRO = "pro"
    ANTI = "anti"


PRONOUNS = {
    PronounCase.NOMINATIVE: {Gender.MALE: "he", Gender.FEMALE: "she"},
    PronounCase.ACCUSATIVE: {Gender.MALE: "him", Gender.FEMALE: "her"},
    PronounCase.POSSESSIVE: {Gender.MALE: "his", Gender.FEMALE: "her"},
}

PRONOUN_POS = {
    PronounCase.NOMINATIVE: "PRP",
    PronounCase.ACCUSATIVE: "PRP",
    PronounCase.POSSESSIVE: "PRP$",
}


@dataclass(frozen=True)
class Occupation:
    name: str
    percent_female: int

    @property
    def female_dominated(self) -> bool:
        return self.percent_female > 50


@dataclass(frozen=True)
class Template:
    """One sentence schema.

    Type 1: [entity1] [interaction] [entity2] [conjunction] [pronoun] [circumstances]
    Type 2: [entity1] [interaction] [entity2] and then [interaction2] [pronoun] for [circumstances]
    """

    template_id: str
    kind: TemplateKind
    interaction: str
    circumstances: str
    gold_referent: Referent
    pronoun_case: PronounCase
    conjunction: str = ""
    interaction2: str = ""

    @property
    def pattern(self) -> Tuple[str, ...]:
        if self.kind is TemplateKind.TYPE1:
            return ("entity1", "interaction", "entity2", "conjunction", "pronoun", "circumstances")
        return ("entity1", "interaction1", "entity2", "and then", "interaction2", "pronoun", "for",
                "circumstances")


@dataclass(frozen=True)
class WinoExample:
    example_id: str
    twin_id: str
    tokens: Tuple[str, ...]
    entity1_span: Tuple[int, int]
    entity2_span: Tuple[int, int]
    pronoun_index: int
    gold_antecedent: Referent
    gold_occupation: Occupation
    pronoun_gender: Gender
    condition: Condition
    kind: TemplateKind
    pronoun_case: PronounCase = PronounCase.NOMINATIVE

    @property
    def gold_span(self) -> Tuple[int, int]:
        return self.entity1_span if self.gold_antecedent is Referent.ENTITY1 else self.entity2_span

    @property
    def distractor_span(self) -> Tuple[int, int]:
        return self.entity2_span if self.gold_antecedent is Referent.ENTITY1 else self.entity1_span

    @property
    def sentence(self) -> str:
        return " ".join(self.tokens)
