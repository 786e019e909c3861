import logging
import re
from collections import defaultdict
from dataclasses import replace
from pathlib import Path
from typing import DefaultDict, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import polars as pl

from app.errors import AmbiguousRule, DuplicateRule, InputError, InvalidRule, MissingNEColumn
from app.models.conll import Corpus, DocumentPart, Sentence
from app.models.swap import AnonymizationMap, SwapDictionary, SwapRule
from app.services.data_import import DataImporter, write_tsv

logger = logging.getLogger(__name__)

PLACEHOLDER_RE = re.compile(r"^E[0-9]+$")
SWAPPED_SUFFIX = "~swapped"
DEFAULT_ENTITY_TYPES = ("PERSON",)

_BRACKET_NE_RE = re.compile(r"^\((?P<type>[^*()]+)\*?(?P<close>\))?$")


def mirror_case(source: str, target: str) -> str:
    """Give target the case pattern of source: UPPER, Title or lower."""
    letters = [c for c in source if c.isalpha()]
    if len(letters) > 1 and all(c.isupper() for c in letters):
        return target.upper()
    if letters and letters[0].isupper():
        return target[:1].upper() + target[1:].lower()
    return target.lower()


def _validate_rule(rule: SwapRule) -> None:
    if not rule.source or not rule.target:
        raise InvalidRule(f"rule {rule.source!r} -> {rule.target!r} has an empty side")
    if any(c.isspace() for c in rule.source + rule.target):
        raise InvalidRule(f"only single-token rules are supported: {rule.source!r} -> {rule.target!r}")
    if rule.source.lower() == rule.target.lower():
        raise InvalidRule(f"rule {rule.source!r} -> {rule.target!r} does not change the token")
    if rule.frequency < 1:
        raise InvalidRule(f"rule {rule.source!r} -> {rule.target!r} needs frequency >= 1")


def build_dictionary(rules: Iterable[SwapRule]) -> SwapDictionary:
    """Validate rules and assemble a dictionary with unique (source, POS) keys."""
    rules = tuple(rules)
    seen = set()
    for rule in rules:
        _validate_rule(rule)
        if rule.key in seen:
            raise DuplicateRule(f"duplicate rule for {rule.source!r} with POS {rule.pos_constraint or '-'}")
        seen.add(rule.key)
    return SwapDictionary(rules)


def load_dictionary(path: Union[str, Path]) -> SwapDictionary:
    """Read `source TAB target TAB pos TAB frequency [TAB locked]` rules."""
    df = DataImporter().read_dictionary(path)
    rules = []
    for row_number, row in enumerate(df.iter_rows(named=True), start=1):
        if row["target"] is None:
            raise InvalidRule(f"rule row {row_number} of {path} has no target")
        frequency = row["frequency"] or "1"
        if not frequency.isdigit():
            raise InvalidRule(f"rule row {row_number} of {path} has a non-integer frequency {frequency!r}")
        pos = row["pos"]
        rules.append(SwapRule(
            source=row["source"].strip(),
            target=row["target"].strip(),
            pos_constraint=None if pos in (None, "", "-") else pos.strip(),
            frequency=int(frequency),
            case_locked=(row["case"] or "").strip().lower() == "locked",
        ))
    dictionary = build_dictionary(rules)
    logger.info("Loaded %d swap rules from %s", len(dictionary), path)
    return dictionary


def write_dictionary(dictionary: SwapDictionary) -> str:
    df = pl.DataFrame(
        {
            "source": [r.source for r in dictionary.rules],
            "target": [r.target for r in dictionary.rules],
            "pos": [r.pos_constraint or "-" for r in dictionary.rules],
            "frequency": [str(r.frequency) for r in dictionary.rules],
            "case": ["locked" if r.case_locked else "-" for r in dictionary.rules],
        },
        schema={name: pl.Utf8 for name in DataImporter.DICTIONARY_COLUMNS},
    )
    return write_tsv(df, "source\ttarget\tpos_constraint\tfrequency\tcase")


def _index(dictionary: SwapDictionary) -> Dict[Tuple[str, Optional[str]], SwapRule]:
    index: Dict[Tuple[str, Optional[str]], SwapRule] = {}
    for rule in dictionary.rules:
        if rule.key in index:
            raise AmbiguousRule(rule.source, rule.pos_constraint)
        index[rule.key] = rule
    return index


def _lookup(index: Dict[Tuple[str, Optional[str]], SwapRule], word: str, pos: str) -> Optional[SwapRule]:
    # a POS-constrained rule wins over the unconstrained fallback
    source = word.lower()
    return index.get((source, pos)) or index.get((source, None))


def _entity_types(part: DocumentPart) -> List[Optional[str]]:
    """Entity type covering each token of the part, in document order."""
    tags = [token.ne_tag for token in part.tokens()]
    if tags and all(tag in ("", "-") for tag in tags):
        raise MissingNEColumn(f"({part.doc_id}) part {part.part_number} carries no named-entity annotation")

    types: List[Optional[str]] = []
    current: Optional[str] = None
    for tag in tags:
        if tag.startswith(("B-", "I-")):
            types.append(tag[2:])
            continue
        if tag in ("O", "-", "", "*"):
            types.append(current)
            continue
        if tag == "*)":
            types.append(current)
            current = None
            continue
        match = _BRACKET_NE_RE.match(tag)
        if match is None:
            if tag == "(*)":
                types.append(None)
                continue
            raise InputError(f"cannot read named-entity tag {tag!r} in ({part.doc_id})")
        if match.group("close"):
            types.append(match.group("type"))
        else:
            current = match.group("type")
            types.append(current)
    return types


def _rebuild(part: DocumentPart, words: Sequence[str]) -> DocumentPart:
    sentences = []
    position = 0
    for sentence in part.sentences:
        tokens = []
        for token in sentence.tokens:
            word = words[position]
            tokens.append(token if word == token.word else token.with_word(word))
            position += 1
        sentences.append(Sentence(tuple(tokens)))
    return replace(part, sentences=tuple(sentences))


def anonymize_entities(part: DocumentPart, mapping: Optional[AnonymizationMap] = None,
                       entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES
                       ) -> Tuple[DocumentPart, AnonymizationMap]:
    """Replace every token inside a named entity of the given types with a placeholder.

    Identical surface strings share a placeholder; pass the map of an earlier
    part of the same document to keep numbering consistent across parts.
    """
    mapping = mapping if mapping is not None else AnonymizationMap(part.doc_id)
    wanted = set(entity_types)
    words = []
    for token, ne_type in zip(part.tokens(), _entity_types(part)):
        words.append(mapping.placeholder(token.word) if ne_type in wanted else token.word)
    return _rebuild(part, words), mapping


def swap_genders(part: DocumentPart, dictionary: SwapDictionary) -> DocumentPart:
    """Apply single-token swap rules; only the word column ever changes."""
    index = _index(dictionary)
    words = []
    swapped = 0
    for token in part.tokens():
        rule = None if PLACEHOLDER_RE.match(token.word) else _lookup(index, token.word, token.pos)
        if rule is None:
            words.append(token.word)
            continue
        target = rule.target if rule.case_locked else mirror_case(token.word, rule.target)
        words.append(target)
        swapped += 1
    logger.debug("Swapped %d tokens in (%s) part %d", swapped, part.doc_id, part.part_number)
    return _rebuild(part, words)


def augment_corpus(corpus: Corpus, dictionary: SwapDictionary, anonymize: bool = True,
                   entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES) -> Corpus:
    """Return the original parts followed by their gender-swapped images."""
    maps: DefaultDict[str, Optional[AnonymizationMap]] = defaultdict(lambda: None)
    images = []
    for part in corpus:
        source = part
        if anonymize:
            source, maps[part.doc_id] = anonymize_entities(part, maps[part.doc_id], entity_types)
        swapped = swap_genders(source, dictionary)
        images.append(replace(swapped, doc_id=part.doc_id + SWAPPED_SUFFIX))
    logger.info("Augmented %d parts with %d swapped images", len(corpus), len(images))
    return Corpus(tuple(corpus.parts) + tuple(images))
