from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

MIRROR_CASE = "mirror_case"


@dataclass(frozen=True)
class SwapRule:
    source: str
    target: str
    pos_constraint: Optional[str] = None
    frequency: int = 1
    # target keeps its dictionary casing ("Mrs.") instead of mirroring the source
    case_locked: bool = False

    @property
    def key(self) -> Tuple[str, Optional[str]]:
        return (self.source.lower(), self.pos_constraint)


@dataclass(frozen=True)
class SwapDictionary:
    rules: Tuple[SwapRule, ...] = ()
    case_policy: str = MIRROR_CASE

    def __len__(self) -> int:
        return len(self.rules)


@dataclass
class AnonymizationMap:
    """Surface string -> placeholder ("E1", "E2", ...) for one document."""

    doc_id: str
    mapping: Dict[str, str] = field(default_factory=dict)

    def placeholder(self, word: str) -> str:
        if word not in self.mapping:
            self.mapping[word] = f"E{len(self.mapping) + 1}"
        return self.mapping[word]

    def deanonymize(self, placeholder: str) -> Optional[str]:
        for word, label in self.mapping.items():
            if label == placeholder:
                return word
        return None

    def __len__(self) -> int:
        return len(self.mapping)


@dataclass(frozen=True)
class AnnotatedSpanPair:
    original_tokens: Tuple[str, ...]
    edited_tokens: Tuple[str, ...]
    original_pos: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if not self.original_tokens or not self.edited_tokens:
            raise ValueError("span pairs need nonempty original and edited spans")

    @property
    def is_alignable(self) -> bool:
        return len(self.original_tokens) == len(self.edited_tokens)


@dataclass(frozen=True)
class RuleCandidate:
    source: str
    target: str
    pos: Optional[str]
    support: int = 1
