import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from app.errors import AmbiguousRule, DuplicateRule, InvalidRule, MissingNEColumn
from app.models.swap import SwapDictionary, SwapRule
from app.models.conll import Mention
from app.services.conll_io import encode_coref, extract_chains, parse_conll
from app.services.gender_swap import (SWAPPED_SUFFIX, anonymize_entities, augment_corpus, build_dictionary,
                                      load_dictionary, mirror_case, swap_genders, write_dictionary)
from tests.helpers import make_corpus, make_part

BIJECTIVE = build_dictionary([
    SwapRule("he", "she"), SwapRule("she", "he"),
    SwapRule("mother", "father"), SwapRule("father", "mother"),
    SwapRule("king", "queen"), SwapRule("queen", "king"),
])


def words(part):
    return [token.word for token in part.tokens()]


@pytest.mark.parametrize("source,target,expected", [
    ("she", "he", "he"),
    ("She", "he", "He"),
    ("SHE", "he", "HE"),
    ("Mother", "FATHER", "Father"),
    ("mr.", "Mrs.", "mrs."),
])
def test_mirror_case(source, target, expected):
    assert mirror_case(source, target) == expected


def test_swap_examples(bundled_dictionary):
    part = make_part("x", [[("she", "PRP"), ("mother", "NN"), ("Mr.", "NNP"), ("her", "PRP$"), ("her", "PRP")]])
    assert words(swap_genders(part, bundled_dictionary)) == ["he", "father", "Mrs.", "his", "him"]


def test_locked_target_keeps_dictionary_case(bundled_dictionary):
    part = make_part("x", [[("MR.", "NNP"), ("mrs.", "NNP")]])
    assert words(swap_genders(part, bundled_dictionary)) == ["Mrs.", "Mr."]


def test_placeholders_are_never_swapped(bundled_dictionary):
    part = make_part("x", [[("E1", "NNP"), "went", "to", ("his", "PRP$"), "house"]])
    assert words(swap_genders(part, bundled_dictionary)) == ["E1", "went", "to", "her", "house"]


def test_pos_constrained_rule_wins_over_fallback():
    dictionary = build_dictionary([SwapRule("her", "him"), SwapRule("her", "his", "PRP$")])
    part = make_part("x", [[("her", "PRP$"), ("her", "PRP"), ("her", "-")]])
    assert words(swap_genders(part, dictionary)) == ["his", "him", "him"]


def test_no_gendered_tokens_is_identity(bundled_dictionary):
    part = make_part("x", [["The", "cat", "sat", "."]])
    assert swap_genders(part, bundled_dictionary) == part


def test_swap_only_changes_words(canonical_text, bundled_dictionary):
    part = parse_conll(canonical_text).get("bc/cnn/00/cnn_0001", 0)
    swapped = swap_genders(part, bundled_dictionary)
    assert words(swapped)[:3] == ["John", "said", "she"]
    for before, after in zip(part.tokens(), swapped.tokens()):
        assert (before.pos, before.coref_field, before.ne_tag) == (after.pos, after.coref_field, after.ne_tag)
    assert extract_chains(swapped) == extract_chains(part)


def test_ambiguous_dictionary_is_rejected():
    dictionary = SwapDictionary((SwapRule("her", "him"), SwapRule("her", "his")))
    with pytest.raises(AmbiguousRule):
        swap_genders(make_part("x", [["her"]]), dictionary)


def test_build_dictionary_rejects_duplicates_and_invalid_rules():
    with pytest.raises(DuplicateRule):
        build_dictionary([SwapRule("he", "she"), SwapRule("HE", "she")])
    with pytest.raises(InvalidRule):
        build_dictionary([SwapRule("his mother", "her father")])
    with pytest.raises(InvalidRule):
        build_dictionary([SwapRule("he", "He")])


def test_anonymize_person_tokens():
    part = make_part("x", [[
        ("Barak", "NNP", "(PERSON*"), ("Obama", "NNP", "*)"), ("met", "VBD", "*"),
        ("Obama", "NNP", "(PERSON)"), ("in", "IN", "*"), ("Paris", "NNP", "(GPE)"),
    ]])
    anonymized, mapping = anonymize_entities(part)
    assert words(anonymized) == ["E1", "E2", "met", "E2", "in", "Paris"]
    assert mapping.mapping == {"Barak": "E1", "Obama": "E2"}
    assert mapping.deanonymize("E2") == "Obama"


def test_anonymize_bio_tags():
    part = make_part("x", [[("John", "NNP", "B-PERSON"), ("saw", "VBD", "O"), ("Mary", "NNP", "B-PERSON")]])
    anonymized, mapping = anonymize_entities(part)
    assert words(anonymized) == ["E1", "saw", "E2"]
    assert len(set(mapping.mapping.values())) == len(mapping)


def test_anonymize_without_people_is_identity():
    part = make_part("x", [[("Paris", "NNP", "(GPE)"), ("is", "VBZ", "*")]])
    anonymized, mapping = anonymize_entities(part)
    assert anonymized == part
    assert len(mapping) == 0


def test_anonymize_needs_ne_column():
    part = make_part("x", [[("John", "NNP", "-"), ("left", "VBD", "-")]])
    with pytest.raises(MissingNEColumn):
        anonymize_entities(part)


def test_augment_doubles_parts_and_keeps_chains(canonical_text, bundled_dictionary):
    corpus = parse_conll(canonical_text)
    augmented = augment_corpus(corpus, bundled_dictionary)
    assert len(augmented) == 2 * len(corpus)
    assert augmented.parts[:len(corpus)] == corpus.parts
    for original, image in zip(corpus, augmented.parts[len(corpus):]):
        assert image.doc_id == original.doc_id + SWAPPED_SUFFIX
        assert image.part_number == original.part_number
        assert extract_chains(image) == extract_chains(original)


def test_augment_shares_placeholders_across_parts(bundled_dictionary):
    first = make_part("doc", [[("John", "NNP", "(PERSON)"), ("left", "VBD", "*")]], part=0)
    second = make_part("doc", [[("Mary", "NNP", "(PERSON)"), ("met", "VBD", "*"), ("John", "NNP", "(PERSON)")]],
                       part=1)
    augmented = augment_corpus(make_corpus(first, second), bundled_dictionary)
    images = augmented.parts[2:]
    assert words(images[0]) == ["E1", "left"]
    assert words(images[1]) == ["E2", "met", "E1"]


def test_augment_without_anonymization(bundled_dictionary):
    part = make_part("doc", [[("John", "NNP", "(PERSON)"), ("and", "CC", "*"), ("his", "PRP$", "*"), "wife"]])
    augmented = augment_corpus(make_corpus(part), bundled_dictionary, anonymize=False)
    assert words(augmented.parts[1]) == ["John", "and", "her", "husband"]


def test_augment_empty_corpus(bundled_dictionary):
    assert len(augment_corpus(make_corpus(), bundled_dictionary)) == 0


def test_augment_is_deterministic(canonical_text, bundled_dictionary):
    corpus = parse_conll(canonical_text)
    assert augment_corpus(corpus, bundled_dictionary) == augment_corpus(corpus, bundled_dictionary)


def test_dictionary_file_round_trip(tmp_path, bundled_dictionary):
    path = tmp_path / "rules.tsv"
    path.write_text(write_dictionary(bundled_dictionary), encoding="utf-8")
    assert load_dictionary(path) == bundled_dictionary


def test_bundled_dictionary_rules(bundled_dictionary):
    rules = {rule.key: rule for rule in bundled_dictionary.rules}
    assert rules[("she", None)].target == "he"
    assert rules[("her", "PRP$")].target == "his"
    assert rules[("her", "PRP")].target == "him"
    assert rules[("mr.", None)].case_locked


@settings(max_examples=100)
@given(st.lists(st.lists(st.sampled_from(["he", "She", "MOTHER", "father", "King", "queen", "the", "E3", "ran"]),
                         min_size=1, max_size=10), min_size=1, max_size=5))
def test_bijective_swap_is_an_involution(sentences):
    part = make_part("x", sentences)
    twice = swap_genders(swap_genders(part, BIJECTIVE), BIJECTIVE)
    assert words(twice) == words(part)


SWAPPABLE = ["he", "She", "MOTHER", "father", "King", "queen", "the", "E3", "ran", "of"]


def crosses(a, b):
    return a.start_token < b.start_token <= a.end_token < b.end_token or \
        b.start_token < a.start_token <= b.end_token < a.end_token


def coref_sentence(words, mentions):
    fields = encode_coref(len(words), mentions)
    return [(word, "-", "*", field) for word, field in zip(words, fields)]


def random_part(rng, index):
    sentences = []
    for _ in range(rng.randint(1, 3)):
        words = [rng.choice(SWAPPABLE) for _ in range(rng.randint(1, 8))]
        mentions = []
        for _ in range(rng.randint(0, 5)):
            start = rng.randrange(len(words))
            mention = Mention(0, start, rng.randrange(start, len(words)), rng.randrange(3))
            if any(m.span == mention.span or (m.chain_id == mention.chain_id and crosses(m, mention))
                   for m in mentions):
                continue
            mentions.append(mention)
        sentences.append(coref_sentence(words, mentions))
    return make_part(f"nw/synthetic/{index:02d}", sentences)


# chain 0 nested three deep inside itself
NESTED = make_part("nw/synthetic/nested", [coref_sentence(
    ["The", "King", "of", "the", "queen", "ran"],
    [Mention(0, 0, 4, 0), Mention(0, 1, 4, 0), Mention(0, 3, 4, 0), Mention(0, 4, 4, 1)],
)])


def test_nested_chain_fixture():
    (chain, other) = extract_chains(NESTED)
    assert [m.span for m in chain.mentions] == [(0, 0, 4), (0, 1, 4), (0, 3, 4)]
    assert [m.span for m in other.mentions] == [(0, 4, 4)]


@settings(max_examples=50, deadline=None)
@given(st.randoms(use_true_random=False))
def test_swapping_a_coreference_corpus_twice_restores_it(rng):
    corpus = make_corpus(NESTED, *(random_part(rng, i) for i in range(49)))
    assert len(corpus) == 50
    for part in corpus:
        once = swap_genders(part, BIJECTIVE)
        assert extract_chains(once) == extract_chains(part)
        assert [t.coref_field for t in once.tokens()] == [t.coref_field for t in part.tokens()]
        assert words(swap_genders(once, BIJECTIVE)) == words(part)
