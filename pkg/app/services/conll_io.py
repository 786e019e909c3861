"""Reader and writer for CoNLL-2012 coreference files.

A data line carries whitespace separated columns::

    doc_id part word_no word POS parse lemma frameset sense speaker NE [args ...] coref

Columns between the parse bit and the coreference column are kept verbatim.
"""

import logging
import re
from collections import defaultdict
from pathlib import Path
from typing import DefaultDict, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from app.errors import (InconsistentColumnCount, InputError, MalformedHeader, UnbalancedCorefBrackets,
                        UndecodableInput)
from app.models.conll import MIN_COLUMNS, Chain, Corpus, DocumentPart, Mention, Sentence, Token

logger = logging.getLogger(__name__)

BEGIN_PREFIX = "#begin document"
END_PREFIX = "#end document"
BEGIN_RE = re.compile(r"^#begin document \((?P<doc_id>.*)\);\s*part (?P<part>\d+)\s*$")
COREF_ITEM_RE = re.compile(r"^(?P<open>\()?(?P<chain>\d+)(?P<close>\))?$")

OPEN, CLOSE, UNIT = "open", "close", "unit"


def coref_items(coref_field: str) -> List[Tuple[str, int]]:
    """Split a coreference column into (kind, chain_id) items, left to right."""
    if coref_field == "-":
        return []
    items = []
    for item in coref_field.split("|"):
        match = COREF_ITEM_RE.match(item)
        if match is None or not (match.group("open") or match.group("close")):
            raise InputError(f"malformed coreference field {coref_field!r}")
        chain_id = int(match.group("chain"))
        if match.group("open") and match.group("close"):
            items.append((UNIT, chain_id))
        elif match.group("open"):
            items.append((OPEN, chain_id))
        else:
            items.append((CLOSE, chain_id))
    return items


def _check_brackets(tokens: Sequence[Token], doc_id: str, part: int, sentence: int,
                    line: Optional[int] = None) -> None:
    depth: DefaultDict[int, int] = defaultdict(int)
    for token in tokens:
        for kind, chain_id in coref_items(token.coref_field):
            if kind == OPEN:
                depth[chain_id] += 1
            elif kind == CLOSE:
                if depth[chain_id] == 0:
                    raise UnbalancedCorefBrackets(doc_id, part, sentence,
                                                  f"chain {chain_id} closed before it was opened", line)
                depth[chain_id] -= 1
    still_open = sorted(chain_id for chain_id, count in depth.items() if count)
    if still_open:
        raise UnbalancedCorefBrackets(doc_id, part, sentence,
                                      f"chain(s) {', '.join(map(str, still_open))} left open", line)


class _PartBuilder:
    def __init__(self, doc_id: str, part_number: int, header_line: int):
        self.doc_id = doc_id
        self.part_number = part_number
        self.header_line = header_line
        self.width: Optional[int] = None
        self.sentences: List[Sentence] = []
        self.comments: List[Tuple[int, str]] = []
        self.pending: List[Token] = []
        self.pending_line: Optional[int] = None

    def add_line(self, line: str, number: int) -> None:
        pieces = re.split(r"(\s+)", line.strip())
        columns = pieces[0::2]
        separators = pieces[1::2]
        if len(columns) < MIN_COLUMNS:
            raise InconsistentColumnCount(
                f"expected at least {MIN_COLUMNS} columns, found {len(columns)}", number)
        if self.width is None:
            self.width = len(columns)
        elif len(columns) != self.width:
            raise InconsistentColumnCount(
                f"expected {self.width} columns as on earlier lines of ({self.doc_id}), found {len(columns)}",
                number)
        try:
            coref_items(columns[-1])
        except InputError as exc:
            raise InputError(str(exc), number) from exc
        if not self.pending:
            self.pending_line = number
        self.pending.append(Token(
            word=columns[3],
            pos=columns[4],
            parse_bit=columns[5],
            extra=tuple(columns[6:9]),
            speaker=columns[9],
            ne_tag=columns[10],
            args=tuple(columns[11:-1]),
            coref_field=columns[-1],
            spacing=tuple(separators),
        ))

    def end_sentence(self) -> None:
        if not self.pending:
            return
        _check_brackets(self.pending, self.doc_id, self.part_number, len(self.sentences), self.pending_line)
        self.sentences.append(Sentence(tuple(self.pending)))
        self.pending = []

    def comment(self, line: str) -> None:
        self.comments.append((len(self.sentences), line))

    def finish(self) -> DocumentPart:
        self.end_sentence()
        return DocumentPart(self.doc_id, self.part_number, tuple(self.sentences), tuple(self.comments))


def parse_conll(text: str) -> Corpus:
    """Parse CoNLL-2012 text into a Corpus, validating coreference brackets per sentence."""
    parts: List[DocumentPart] = []
    builder: Optional[_PartBuilder] = None

    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(BEGIN_PREFIX):
            if builder is not None:
                raise MalformedHeader(f"({builder.doc_id}) is still open at a new #begin document", number)
            match = BEGIN_RE.match(stripped)
            if match is None:
                raise MalformedHeader(f"cannot read document header {stripped!r}", number)
            builder = _PartBuilder(match.group("doc_id"), int(match.group("part")), number)
        elif stripped.startswith(END_PREFIX):
            if builder is None:
                raise MalformedHeader("#end document without a matching #begin document", number)
            parts.append(builder.finish())
            builder = None
        elif not stripped:
            if builder is not None:
                builder.end_sentence()
        elif stripped.startswith("#"):
            if builder is None:
                logger.debug("Dropping comment outside any document at line %d", number)
            else:
                builder.comment(line)
        else:
            if builder is None:
                raise MalformedHeader("token line outside #begin/#end document", number)
            builder.add_line(line, number)

    if builder is not None:
        raise MalformedHeader(f"({builder.doc_id}) part {builder.part_number} has no #end document",
                              builder.header_line)
    logger.debug("Parsed %d document parts", len(parts))
    return Corpus(tuple(parts))


def read_conll(path: Union[str, Path]) -> Corpus:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw.count(b"\n", 0, exc.start) + 1
        raise UndecodableInput(f"{path} is not UTF-8: byte 0x{raw[exc.start]:02x} at offset {exc.start}",
                               line=line) from exc
    return parse_conll(text)


def _format_token(part: DocumentPart, index: int, token: Token, preserve_spacing: bool) -> str:
    columns = [part.doc_id, str(part.part_number), str(index), token.word, token.pos, token.parse_bit,
               *token.extra, token.speaker, token.ne_tag, *token.args, token.coref_field]
    if preserve_spacing and token.spacing is not None and len(token.spacing) == len(columns) - 1:
        pieces = [columns[0]]
        for separator, column in zip(token.spacing, columns[1:]):
            pieces.append(separator)
            pieces.append(column)
        return "".join(pieces)
    return " ".join(columns)


def write_conll(corpus: Corpus, preserve_spacing: bool = False) -> str:
    """Serialize a corpus. Canonical mode separates columns with a single space."""
    lines: List[str] = []
    for part in corpus:
        lines.append(f"#begin document ({part.doc_id}); part {part.part_number:03d}")
        comments: DefaultDict[int, List[str]] = defaultdict(list)
        for position, comment in part.comments:
            comments[position].append(comment)
        for s_index, sentence in enumerate(part.sentences):
            lines.extend(comments.pop(s_index, []))
            for t_index, token in enumerate(sentence.tokens):
                lines.append(_format_token(part, t_index, token, preserve_spacing))
            lines.append("")
        for position in sorted(comments):
            lines.extend(comments[position])
        lines.append(END_PREFIX)
    return "\n".join(lines) + "\n" if lines else ""


def write_conll_file(corpus: Corpus, path: Union[str, Path], preserve_spacing: bool = False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(write_conll(corpus, preserve_spacing), encoding="utf-8")


def extract_chains(part: DocumentPart) -> List[Chain]:
    """Collect mention chains, ordered by first mention position and then chain id.

    Brackets of one chain id are matched last-open-first-close.
    """
    found: DefaultDict[int, List[Mention]] = defaultdict(list)
    for s_index, sentence in enumerate(part.sentences):
        stacks: DefaultDict[int, List[int]] = defaultdict(list)
        for t_index, token in enumerate(sentence.tokens):
            for kind, chain_id in coref_items(token.coref_field):
                if kind == UNIT:
                    found[chain_id].append(Mention(s_index, t_index, t_index, chain_id))
                elif kind == OPEN:
                    stacks[chain_id].append(t_index)
                else:
                    if not stacks[chain_id]:
                        raise UnbalancedCorefBrackets(part.doc_id, part.part_number, s_index)
                    start = stacks[chain_id].pop()
                    found[chain_id].append(Mention(s_index, start, t_index, chain_id))
        if any(stacks.values()):
            raise UnbalancedCorefBrackets(part.doc_id, part.part_number, s_index)

    chains = [Chain(chain_id, tuple(sorted(set(mentions), key=lambda m: m.span)))
              for chain_id, mentions in found.items()]
    chains.sort(key=lambda chain: (chain.mentions[0].span, chain.chain_id))
    return chains


def encode_coref(sentence_length: int, mentions: Iterable[Mention]) -> List[str]:
    """Render mentions of one sentence as coreference column values."""
    opens: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    closes: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    units: Dict[int, List[int]] = defaultdict(list)
    for mention in mentions:
        if mention.start_token == mention.end_token:
            units[mention.start_token].append(mention.chain_id)
        else:
            opens[mention.start_token].append((mention.end_token, mention.chain_id))
            closes[mention.end_token].append((mention.start_token, mention.chain_id))

    fields = []
    for index in range(sentence_length):
        # outer spans open first and close last
        items = [f"({chain_id}" for _, chain_id in sorted(opens[index], key=lambda x: (-x[0], x[1]))]
        items += [f"({chain_id})" for chain_id in sorted(units[index])]
        items += [f"{chain_id})" for _, chain_id in sorted(closes[index], key=lambda x: (-x[0], x[1]))]
        fields.append("|".join(items) or "-")
    return fields
