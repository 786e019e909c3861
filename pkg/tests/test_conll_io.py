import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from app.errors import (DuplicatePart, InconsistentColumnCount, InputError, MalformedHeader, UnbalancedCorefBrackets,
                        UndecodableInput)
from app.models.conll import Corpus, DocumentPart, Mention, Sentence, Token
from app.services.conll_io import (coref_items, encode_coref, extract_chains, parse_conll, read_conll, write_conll,
                                   write_conll_file)
from tests.helpers import make_part


def test_canonical_round_trip_is_byte_identical(canonical_text):
    "Canonical writing reproduces a canonical file exactly"
    corpus = parse_conll(canonical_text)
    assert write_conll(corpus) == canonical_text


def test_round_trip_is_structurally_identical(canonical_text):
    corpus = parse_conll(canonical_text)
    assert parse_conll(write_conll(corpus)) == corpus


def test_parse_reads_every_part(canonical_text):
    corpus = parse_conll(canonical_text)
    assert [part.key for part in corpus] == [
        ("bc/cnn/00/cnn_0001", 0), ("bc/cnn/00/cnn_0001", 1), ("nw/wsj/00/wsj_0002", 0)]
    first = corpus.get("bc/cnn/00/cnn_0001", 0)
    assert [len(sentence) for sentence in first.sentences] == [9, 4]
    assert first.sentences[0].tokens[0].word == "John"
    assert first.sentences[0].tokens[0].ne_tag == "(PERSON)"
    assert first.sentences[0].tokens[3].extra == ("meet", "01", "1")
    assert first.genre == "bc"


def test_extract_chains_orders_by_first_mention(canonical_text):
    part = parse_conll(canonical_text).get("bc/cnn/00/cnn_0001", 0)
    chains = extract_chains(part)
    assert [chain.chain_id for chain in chains] == [0, 2, 1, 3]
    assert [m.span for m in chains[0].mentions] == [(0, 0, 0), (0, 2, 2), (1, 2, 2)]
    assert [m.span for m in chains[1].mentions] == [(0, 4, 5), (1, 0, 0)]
    assert [m.span for m in chains[2].mentions] == [(0, 4, 7)]


def test_same_chain_brackets_match_last_open_first_close(canonical_text):
    part = parse_conll(canonical_text).get("bc/cnn/00/cnn_0001", 1)
    (chain,) = extract_chains(part)
    assert [m.span for m in chain.mentions] == [(0, 0, 0), (0, 0, 1)]


def test_preserve_spacing_keeps_original_separators():
    text = (
        "#begin document (x); part 000\n"
        "x\t0\t0\tHe\tPRP\t(TOP(S(NP*)\t-\t-\t-\t-\t*\t(0)\n"
        "x\t0\t1\tleft\tVBD\t(VP*))\tleave\t01\t1\t-\t*\t-\n"
        "\n"
        "#end document\n"
    )
    corpus = parse_conll(text)
    assert write_conll(corpus, preserve_spacing=True) == text
    assert write_conll(corpus) == text.replace("\t", " ")


def test_comments_stay_in_place():
    text = (
        "#begin document (x); part 000\n"
        "# speaker notes\n"
        "x 0 0 Hi UH * - - - - * -\n"
        "\n"
        "#end document\n"
    )
    assert write_conll(parse_conll(text)) == text


def test_predicate_argument_columns_survive():
    text = (
        "#begin document (x); part 000\n"
        "x 0 0 He PRP (NP*) - - - - * (ARG0*) (0)\n"
        "x 0 1 left VBD * leave 01 1 - * (V*) -\n"
        "\n"
        "#end document\n"
    )
    corpus = parse_conll(text)
    assert corpus.parts[0].sentences[0].tokens[0].args == ("(ARG0*)",)
    assert write_conll(corpus) == text


def test_unclosed_bracket_reports_location():
    text = (
        "#begin document (x); part 000\n"
        "x 0 0 The DT * - - - - * (0\n"
        "x 0 1 nurse NN * - - - - * -\n"
        "\n"
        "#end document\n"
    )
    with pytest.raises(UnbalancedCorefBrackets) as info:
        parse_conll(text)
    assert info.value.doc_id == "x"
    assert info.value.sentence == 0
    assert info.value.line == 2
    assert "line 2" in str(info.value)


def test_close_before_open_is_unbalanced():
    text = "#begin document (x); part 000\nx 0 0 nurse NN * - - - - * 0)\n\n#end document\n"
    with pytest.raises(UnbalancedCorefBrackets):
        parse_conll(text)


def test_mention_cannot_cross_sentences():
    text = (
        "#begin document (x); part 000\n"
        "x 0 0 The DT * - - - - * (0\n"
        "\n"
        "x 0 0 nurse NN * - - - - * 0)\n"
        "\n"
        "#end document\n"
    )
    with pytest.raises(UnbalancedCorefBrackets):
        parse_conll(text)


def test_inconsistent_column_count():
    text = (
        "#begin document (x); part 000\n"
        "x 0 0 He PRP * - - - - * (ARG0*) (0)\n"
        "x 0 1 left VBD * - - - - * -\n"
        "\n"
        "#end document\n"
    )
    with pytest.raises(InconsistentColumnCount) as info:
        parse_conll(text)
    assert info.value.line == 3


def test_too_few_columns():
    with pytest.raises(InconsistentColumnCount):
        parse_conll("#begin document (x); part 000\nx 0 0 He PRP (0)\n\n#end document\n")


def test_missing_end_is_malformed():
    with pytest.raises(MalformedHeader):
        parse_conll("#begin document (x); part 000\nx 0 0 Hi UH * - - - - * -\n")


def test_token_outside_document_is_malformed():
    with pytest.raises(MalformedHeader) as info:
        parse_conll("x 0 0 Hi UH * - - - - * -\n")
    assert info.value.line == 1


def test_unreadable_header():
    with pytest.raises(MalformedHeader):
        parse_conll("#begin document x part 0\n#end document\n")


def test_malformed_coref_field():
    with pytest.raises(InputError) as info:
        parse_conll("#begin document (x); part 000\nx 0 0 Hi UH * - - - - * (a)\n\n#end document\n")
    assert info.value.line == 2


def test_duplicate_part():
    text = "#begin document (x); part 000\nx 0 0 Hi UH * - - - - * -\n\n#end document\n"
    with pytest.raises(DuplicatePart):
        parse_conll(text + text)


def test_empty_text_gives_empty_corpus():
    corpus = parse_conll("")
    assert len(corpus) == 0
    assert write_conll(corpus) == ""


def test_file_round_trip(tmp_path, canonical_text):
    corpus = parse_conll(canonical_text)
    path = tmp_path / "out" / "corpus.conll"
    write_conll_file(corpus, path)
    assert read_conll(path) == corpus
    assert path.read_text(encoding="utf-8") == canonical_text


def test_undecodable_file_reports_line(tmp_path):
    path = tmp_path / "latin1.conll"
    path.write_bytes(b"#begin document (x); part 000\nx 0 0 ok - * - - - - * -\nx 0 1 caf\xe9 - * - - - - * -\n")
    with pytest.raises(UndecodableInput) as info:
        read_conll(path)
    assert info.value.line == 3
    assert isinstance(info.value, InputError)


def test_coref_items():
    assert coref_items("-") == []
    assert coref_items("(1|(2)|3)") == [("open", 1), ("unit", 2), ("close", 3)]


def test_encode_coref_nests_outer_spans_first():
    mentions = [Mention(0, 0, 3, 1), Mention(0, 0, 1, 2), Mention(0, 3, 3, 3)]
    assert encode_coref(4, mentions) == ["(1|(2", "2)", "-", "(3)|1)"]


@st.composite
def corpora(draw):
    """Random parts whose chains have at most one mention per sentence."""
    parts = []
    for part_number in range(draw(st.integers(1, 3))):
        sentences = []
        for _ in range(draw(st.integers(1, 4))):
            length = draw(st.integers(1, 8))
            chain_ids = draw(st.lists(st.integers(0, 9), unique=True, max_size=4))
            mentions = []
            for chain_id in chain_ids:
                start = draw(st.integers(0, length - 1))
                end = draw(st.integers(start, length - 1))
                mentions.append(Mention(len(sentences), start, end, chain_id))
            fields = encode_coref(length, mentions)
            words = draw(st.lists(st.text("abcxyzABC", min_size=1, max_size=6), min_size=length, max_size=length))
            tokens = tuple(Token(word=w, pos="NN", parse_bit="*", ne_tag="*", speaker="-", coref_field=f)
                           for w, f in zip(words, fields))
            sentences.append(Sentence(tokens))
        parts.append(DocumentPart("doc", part_number, tuple(sentences)))
    return Corpus(tuple(parts))


@settings(max_examples=100)
@given(corpora())
def test_random_corpora_round_trip(corpus):
    "Round-trip random corpora, including their chains"
    text = write_conll(corpus)
    parsed = parse_conll(text)
    assert parsed == corpus
    assert write_conll(parsed) == text
    for original, reread in zip(corpus, parsed):
        assert extract_chains(original) == extract_chains(reread)


def test_chain_ids_stay_separate():
    part = make_part("x", [[("A", "NN", "*", "(0)"), ("B", "NN", "*", "(1)"), ("C", "NN", "*", "(0)")]])
    chains = extract_chains(part)
    assert [(c.chain_id, len(c)) for c in chains] == [(0, 2), (1, 1)]
