from typing import Iterable, Sequence, Tuple, Union

from app.models.conll import Corpus, DocumentPart, Sentence, Token

# a token spec is a bare word or (word, pos, ne_tag, coref)
TokenSpec = Union[str, Tuple[str, ...]]


def make_token(word: str, pos: str = "-", ne_tag: str = "*", coref: str = "-") -> Token:
    return Token(word=word, pos=pos, parse_bit="*", ne_tag=ne_tag, speaker="-", coref_field=coref)


def make_part(doc_id: str, sentences: Iterable[Sequence[TokenSpec]], part: int = 0) -> DocumentPart:
    built = []
    for sentence in sentences:
        tokens = [make_token(spec) if isinstance(spec, str) else make_token(*spec) for spec in sentence]
        built.append(Sentence(tuple(tokens)))
    return DocumentPart(doc_id, part, tuple(built))


def make_corpus(*parts: DocumentPart) -> Corpus:
    return Corpus(tuple(parts))
