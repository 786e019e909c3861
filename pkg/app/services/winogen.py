"""Generation of occupation-pair coreference challenge sentences.

Every generated sentence exists twice, once with a male and once with a female
pronoun ("twins"). Both twins share the gold antecedent, so one of them is a
pro-stereotypical and the other an anti-stereotypical coreference decision.
"""

import itertools
import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from app.errors import (DuplicateOccupation, Exactly50Percent, InputError, InsufficientOccupations,
                        OddTwinCount, PercentOutOfRange)
from app.models.conll import Corpus, DocumentPart, Mention, Sentence, Token
from app.models.wino import (PRONOUN_POS, PRONOUNS, Condition, Gender, Occupation, PronounCase, Referent,
                             Template, TemplateKind, WinoExample)
from app.services.conll_io import encode_coref, write_conll
from app.services.data_import import DataImporter

logger = logging.getLogger(__name__)

PAIRING_STRATEGIES = ("cross", "all")
FORMATS = ("conll", "jsonl")

GOLD_CHAIN = 0
DISTRACTOR_CHAIN = 1

Seed = Union[int, np.random.Generator]


def _rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def load_occupations(path: Union[str, Path]) -> List[Occupation]:
    """Read a `name,percent_female` CSV with a header row."""
    df = DataImporter().read_occupations(path)
    occupations = []
    seen = set()
    for row_number, row in enumerate(df.iter_rows(named=True), start=1):
        name = (row["name"] or "").strip()
        raw = (row["percent_female"] or "").strip()
        if not name:
            raise InputError(f"occupation row {row_number} has no name")
        try:
            percent = int(raw)
        except ValueError:
            raise PercentOutOfRange(f"{name}: percent_female {raw!r} is not an integer") from None
        if not 0 <= percent <= 100:
            raise PercentOutOfRange(f"{name}: percent_female {percent} outside [0, 100]")
        if percent == 50:
            raise Exactly50Percent(f"{name}: 50% female cannot be classified as male- or female-dominated")
        if name.lower() in seen:
            raise DuplicateOccupation(f"occupation {name!r} listed twice")
        seen.add(name.lower())
        occupations.append(Occupation(name, percent))
    logger.info("Loaded %d occupations from %s", len(occupations), path)
    return occupations


def load_templates(path: Union[str, Path]) -> List[Template]:
    """Read `[[template]]` tables from a TOML file."""
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    templates = []
    for index, entry in enumerate(data.get("template", []), start=1):
        try:
            kind = TemplateKind(entry["kind"])
            template = Template(
                template_id=entry.get("id", f"template{index}"),
                kind=kind,
                interaction=entry["interaction"],
                circumstances=entry["circumstances"],
                gold_referent=Referent(entry["gold"]),
                pronoun_case=PronounCase(entry["pronoun_case"]),
                conjunction=entry.get("conjunction", ""),
                interaction2=entry.get("interaction2", ""),
            )
        except (KeyError, ValueError) as exc:
            raise InputError(f"template {index} in {path} is incomplete or invalid: {exc}") from exc
        if kind is TemplateKind.TYPE1 and not template.conjunction:
            raise InputError(f"type1 template {template.template_id} needs a conjunction")
        if kind is TemplateKind.TYPE2 and not template.interaction2:
            raise InputError(f"type2 template {template.template_id} needs interaction2")
        templates.append(template)
    ids = [t.template_id for t in templates]
    if len(set(ids)) != len(ids):
        raise InputError(f"template ids in {path} are not unique")
    return templates


def classify(occupation: Occupation, pronoun_gender: Gender) -> Condition:
    """Pro-stereotypical when the pronoun gender dominates the occupation."""
    if pronoun_gender is Gender.FEMALE:
        return Condition.PRO if occupation.percent_female > 50 else Condition.ANTI
    return Condition.PRO if occupation.percent_female < 50 else Condition.ANTI


def unpaired_occupations(occupations: Sequence[Occupation], strategy: str = "cross") -> int:
    """Occupations that cross pairing leaves out, one per surplus member of the larger group."""
    if strategy != "cross":
        return 0
    female = sum(1 for o in occupations if o.female_dominated)
    return abs(len(occupations) - 2 * female)


def pair_occupations(occupations: Sequence[Occupation], strategy: str = "cross",
                     seed: Seed = 0) -> List[Tuple[Occupation, Occupation]]:
    if len(occupations) < 2:
        raise InsufficientOccupations(f"need at least 2 occupations, got {len(occupations)}")
    ordered = sorted(occupations, key=lambda o: o.name)
    if strategy == "all":
        return list(itertools.combinations(ordered, 2))
    if strategy != "cross":
        raise InputError(f"unknown pairing strategy {strategy!r}")

    male = [o for o in ordered if not o.female_dominated]
    female = [o for o in ordered if o.female_dominated]
    if not male or not female:
        raise InsufficientOccupations("cross pairing needs male- and female-dominated occupations")
    rng = _rng(seed)
    male = [male[i] for i in rng.permutation(len(male))]
    female = [female[i] for i in rng.permutation(len(female))]
    size = min(len(male), len(female))
    leftover = male[size:] + female[size:]
    if leftover:
        logger.warning("Cross pairing leaves %d occupations unpaired: %s",
                       len(leftover), ", ".join(o.name for o in leftover))
    return list(zip(male[:size], female[:size]))


def _realize(template: Template, first: Occupation, second: Occupation, pronoun: str
             ) -> Tuple[List[str], Tuple[int, int], Tuple[int, int], int]:
    tokens: List[str] = []

    def entity(determiner: str, occupation: Occupation) -> Tuple[int, int]:
        start = len(tokens)
        tokens.append(determiner)
        tokens.extend(occupation.name.split())
        return (start, len(tokens) - 1)

    entity1 = entity("The", first)
    tokens.extend(template.interaction.split())
    entity2 = entity("the", second)
    if template.kind is TemplateKind.TYPE1:
        tokens.extend(template.conjunction.split())
    else:
        tokens.extend(["and", "then"])
        tokens.extend(template.interaction2.split())
    pronoun_index = len(tokens)
    tokens.append(pronoun)
    if template.kind is TemplateKind.TYPE2:
        tokens.append("for")
    tokens.extend(template.circumstances.split())
    tokens.append(".")
    return tokens, entity1, entity2, pronoun_index


def _slug(occupation: Occupation) -> str:
    return occupation.name.replace(" ", "_")


def generate(templates: Sequence[Template], occupations: Sequence[Occupation],
             pairing_strategy: str = "cross", seed: Seed = 0) -> List[WinoExample]:
    """Fill every template with every occupation pair, in both entity orders and both genders."""
    if not templates:
        raise InputError("no templates to generate from")
    pairs = pair_occupations(occupations, pairing_strategy, seed)

    examples = []
    for template in templates:
        for a, b in pairs:
            for first, second in ((a, b), (b, a)):
                gold = first if template.gold_referent is Referent.ENTITY1 else second
                twin_id = f"{template.kind.value}:{template.template_id}:{_slug(first)}:{_slug(second)}"
                for gender in (Gender.MALE, Gender.FEMALE):
                    pronoun = PRONOUNS[template.pronoun_case][gender]
                    tokens, entity1, entity2, pronoun_index = _realize(template, first, second, pronoun)
                    examples.append(WinoExample(
                        example_id=f"{twin_id}:{gender.value}",
                        twin_id=twin_id,
                        tokens=tuple(tokens),
                        entity1_span=entity1,
                        entity2_span=entity2,
                        pronoun_index=pronoun_index,
                        gold_antecedent=template.gold_referent,
                        gold_occupation=gold,
                        pronoun_gender=gender,
                        condition=classify(gold, gender),
                        kind=template.kind,
                        pronoun_case=template.pronoun_case,
                    ))
    logger.info("Generated %d examples from %d templates and %d occupation pairs",
                len(examples), len(templates), len(pairs))
    return examples


def group_twins(examples: Iterable[WinoExample]) -> Dict[str, List[WinoExample]]:
    twins: Dict[str, List[WinoExample]] = defaultdict(list)
    for example in examples:
        twins[example.twin_id].append(example)
    return twins


def split_dev_test(examples: Sequence[WinoExample], seed: Seed = 0
                   ) -> Tuple[List[WinoExample], List[WinoExample]]:
    """Split twin pairs into two equal halves.

    Twins are dealt alternately within each (type, gold occupation) stratum so
    per-occupation counts stay balanced whenever a stratum holds an even count.
    """
    twins = group_twins(examples)
    broken = [twin_id for twin_id, members in twins.items() if len(members) != 2]
    if broken:
        raise OddTwinCount(f"{len(broken)} twin groups do not have exactly two members, e.g. {broken[0]}")
    if len(twins) % 2:
        raise OddTwinCount(f"{len(twins)} twin pairs cannot be split into equal halves")

    strata: Dict[Tuple[str, str], List[str]] = defaultdict(list)
    for twin_id, members in twins.items():
        strata[(members[0].kind.value, members[0].gold_occupation.name)].append(twin_id)

    rng = _rng(seed)
    dev_ids = set()
    turn = 0
    for key in sorted(strata):
        twin_ids = strata[key]
        if len(twin_ids) % 2:
            logger.warning("Stratum %s has an odd number of twin pairs; its split is off by one", key)
        for index in rng.permutation(len(twin_ids)):
            if turn % 2 == 0:
                dev_ids.add(twin_ids[index])
            turn += 1

    dev = [e for e in examples if e.twin_id in dev_ids]
    test = [e for e in examples if e.twin_id not in dev_ids]
    return dev, test


def to_corpus(examples: Iterable[WinoExample]) -> Corpus:
    """One document per example: gold antecedent and pronoun share chain 0, the other entity is chain 1."""
    parts = []
    for example in examples:
        gold_start, gold_end = example.gold_span
        other_start, other_end = example.distractor_span
        mentions = [
            Mention(0, gold_start, gold_end, GOLD_CHAIN),
            Mention(0, example.pronoun_index, example.pronoun_index, GOLD_CHAIN),
            Mention(0, other_start, other_end, DISTRACTOR_CHAIN),
        ]
        corefs = encode_coref(len(example.tokens), mentions)
        tokens = []
        for index, (word, coref) in enumerate(zip(example.tokens, corefs)):
            if index == example.pronoun_index:
                pos = PRONOUN_POS[example.pronoun_case]
            elif word.lower() == "the":
                pos = "DT"
            elif word == ".":
                pos = "."
            else:
                pos = "-"
            tokens.append(Token(word=word, pos=pos, parse_bit="-", ne_tag="*", speaker="-", coref_field=coref))
        parts.append(DocumentPart(example.example_id, 0, (Sentence(tuple(tokens)),)))
    return Corpus(tuple(parts))


def example_to_json(example: WinoExample) -> Dict:
    return {
        "id": example.example_id,
        "twin_id": example.twin_id,
        "tokens": list(example.tokens),
        "entity1": list(example.entity1_span),
        "entity2": list(example.entity2_span),
        "pronoun_index": example.pronoun_index,
        "gold": example.gold_antecedent.value,
        "condition": example.condition.value,
        "type": example.kind.value,
        "gender": example.pronoun_gender.value,
        "occupation": example.gold_occupation.name,
        "percent_female": example.gold_occupation.percent_female,
        "pronoun_case": example.pronoun_case.value,
    }


def example_from_json(record: Dict) -> WinoExample:
    try:
        return WinoExample(
            example_id=record["id"],
            twin_id=record["twin_id"],
            tokens=tuple(record["tokens"]),
            entity1_span=tuple(record["entity1"]),
            entity2_span=tuple(record["entity2"]),
            pronoun_index=int(record["pronoun_index"]),
            gold_antecedent=Referent(record["gold"]),
            gold_occupation=Occupation(record["occupation"], int(record["percent_female"])),
            pronoun_gender=Gender(record["gender"]),
            condition=Condition(record["condition"]),
            kind=TemplateKind(record["type"]),
            pronoun_case=PronounCase(record.get("pronoun_case", PronounCase.NOMINATIVE.value)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"challenge record {record.get('id', '?')} is invalid: {exc}") from exc


def load_examples_jsonl(text: str) -> List[WinoExample]:
    examples = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc.msg}", number) from exc
        examples.append(example_from_json(record))
    return examples


def render(examples: Sequence[WinoExample], fmt: str) -> str:
    if fmt == "conll":
        return write_conll(to_corpus(examples))
    if fmt == "jsonl":
        return "".join(json.dumps(example_to_json(e), ensure_ascii=False) + "\n" for e in examples)
    raise InputError(f"unknown challenge format {fmt!r}; expected one of {', '.join(FORMATS)}")


def emit(examples: Sequence[WinoExample], fmt: str, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(examples, fmt), encoding="utf-8")
    logger.info("Wrote %d examples to %s", len(examples), path)
    return path


def parity(examples: Iterable[WinoExample]) -> Dict[str, Dict[str, int]]:
    """Pro/anti counts per template type."""
    counts: Dict[str, Dict[str, int]] = defaultdict(lambda: {c.value: 0 for c in Condition})
    for example in examples:
        counts[example.kind.value][example.condition.value] += 1
    return {kind: dict(value) for kind, value in sorted(counts.items())}


def gold_counts(examples: Iterable[WinoExample]) -> Dict[str, int]:
    counts: Dict[str, int] = defaultdict(int)
    for example in examples:
        counts[example.gold_occupation.name] += 1
    return dict(counts)


def flip_gender(example: WinoExample) -> WinoExample:
    """The twin of an example: same sentence with the opposite pronoun gender."""
    twin_gender = example.pronoun_gender.opposite
    tokens = list(example.tokens)
    tokens[example.pronoun_index] = PRONOUNS[example.pronoun_case][twin_gender]
    return WinoExample(
        example_id=f"{example.twin_id}:{twin_gender.value}",
        twin_id=example.twin_id,
        tokens=tuple(tokens),
        entity1_span=example.entity1_span,
        entity2_span=example.entity2_span,
        pronoun_index=example.pronoun_index,
        gold_antecedent=example.gold_antecedent,
        gold_occupation=example.gold_occupation,
        pronoun_gender=twin_gender,
        condition=classify(example.gold_occupation, twin_gender),
        kind=example.kind,
        pronoun_case=example.pronoun_case,
    )
