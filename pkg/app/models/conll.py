from dataclasses import dataclass, field, replace
from typing import Iterator, List, Optional, Tuple

from app.errors import DuplicatePart

# doc_id, part, word_number, word, pos, parse_bit, lemma, frameset, sense, speaker, ne ... coref
MIN_COLUMNS = 12


@dataclass(frozen=True)
class Token:
    word: str
    pos: str
    parse_bit: str
    ne_tag: str
    speaker: str
    coref_field: str
    # predicate lemma, frameset and word sense columns, never interpreted
    extra: Tuple[str, ...] = ("-", "-", "-")
    # predicate argument columns between the NE and coref columns
    args: Tuple[str, ...] = ()
    # whitespace between columns as read from disk, only used by preserve_spacing writes
    spacing: Optional[Tuple[str, ...]] = field(default=None, compare=False, repr=False)

    def with_word(self, word: str) -> "Token":
        return replace(self, word=word)

    @property
    def column_count(self) -> int:
        return MIN_COLUMNS + len(self.args)


@dataclass(frozen=True)
class Sentence:
    tokens: Tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("a sentence needs at least one token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    @property
    def words(self) -> List[str]:
        return [token.word for token in self.tokens]


@dataclass(frozen=True)
class DocumentPart:
    doc_id: str
    part_number: int
    sentences: Tuple[Sentence, ...]
    # (index of the sentence the comment precedes, raw comment line)
    comments: Tuple[Tuple[int, str], ...] = ()

    @property
    def key(self) -> Tuple[str, int]:
        return (self.doc_id, self.part_number)

    @property
    def genre(self) -> str:
        return self.doc_id.split("/", 1)[0]

    def tokens(self) -> Iterator[Token]:
        for sentence in self.sentences:
            yield from sentence.tokens


@dataclass(frozen=True)
class Mention:
    sentence_index: int
    start_token: int
    end_token: int
    chain_id: int

    @property
    def span(self) -> Tuple[int, int, int]:
        return (self.sentence_index, self.start_token, self.end_token)


@dataclass(frozen=True)
class Chain:
    chain_id: int
    mentions: Tuple[Mention, ...]

    def __len__(self) -> int:
        return len(self.mentions)


@dataclass(frozen=True)
class Corpus:
    parts: Tuple[DocumentPart, ...] = ()

    def __post_init__(self):
        seen = set()
        for part in self.parts:
            if part.key in seen:
                raise DuplicatePart(f"document ({part.doc_id}) part {part.part_number} appears twice")
            seen.add(part.key)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[DocumentPart]:
        return iter(self.parts)

    def get(self, doc_id: str, part_number: int = 0) -> Optional[DocumentPart]:
        for part in self.parts:
            if part.key == (doc_id, part_number):
                return part
        return None
