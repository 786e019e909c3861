"""Gender count list balancing and gender statistics of coreference corpora."""

import logging
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

import polars as pl

from app.errors import EmptyGazetteer
from app.models.conll import Chain, Corpus, DocumentPart
from app.models.resources import COUNT_COLUMNS, CorpusBiasStats, GenderCountList, GenderTally
from app.services.conll_io import extract_chains
from app.services.data_import import DataImporter

logger = logging.getLogger(__name__)

MALE_PRONOUNS = frozenset({"he", "him", "his"})
FEMALE_PRONOUNS = frozenset({"she", "her", "hers"})
PRONOUN_TAGS = frozenset({"PRP", "PRP$"})

Phrase = Tuple[str, ...]


def load_gender_list(path: Union[str, Path]) -> GenderCountList:
    return GenderCountList(DataImporter().read_gender_list(path))


def write_gender_list(gender_list: GenderCountList) -> str:
    """Render `phrase TAB male female neutral plural` lines."""
    if not len(gender_list):
        return ""
    lines = gender_list.entries.select(
        pl.concat_str([pl.col("phrase"),
                       pl.concat_str([pl.col(c).cast(pl.Utf8) for c in COUNT_COLUMNS], separator=" ")],
                      separator="\t").alias("line")
    ).get_column("line")
    return "\n".join(lines.to_list()) + "\n"


def balance_gender_list(gender_list: GenderCountList) -> GenderCountList:
    """Set male and female counts of every phrase to their mean, rounded half-up."""
    balanced = gender_list.entries.with_columns(
        ((pl.col("male") + pl.col("female") + 1) // 2).alias("male"),
        ((pl.col("male") + pl.col("female") + 1) // 2).alias("female"),
    )
    skewed = gender_list.entries.filter(pl.col("male") != pl.col("female")).height
    logger.info("Balanced %d of %d phrases", skewed, len(gender_list))
    return GenderCountList(balanced)


def load_gazetteer(path: Union[str, Path]) -> FrozenSet[str]:
    phrases = frozenset(DataImporter().read_gazetteer(path).get_column("phrase").to_list())
    if not phrases:
        raise EmptyGazetteer(f"job title gazetteer {path} is empty")
    return phrases


def _phrases(gazetteer: Iterable[str]) -> FrozenSet[Phrase]:
    phrases = frozenset(tuple(phrase.lower().split()) for phrase in gazetteer)
    phrases = frozenset(phrase for phrase in phrases if phrase)
    if not phrases:
        raise EmptyGazetteer("job title gazetteer is empty")
    return phrases


def _contains_phrase(words: List[str], phrases: FrozenSet[Phrase], lengths: FrozenSet[int]) -> bool:
    return any(tuple(words[i:i + n]) in phrases
               for n in lengths
               for i in range(len(words) - n + 1))


def chain_gender(part: DocumentPart, chain: Chain) -> Optional[str]:
    """Majority gender of the pronoun-headed mentions of a chain; None for ties and ungendered chains.

    A mention is pronoun-headed when it is a single PRP/PRP$ token.
    """
    male = female = 0
    for mention in chain.mentions:
        if mention.start_token != mention.end_token:
            continue
        token = part.sentences[mention.sentence_index].tokens[mention.start_token]
        if token.pos not in PRONOUN_TAGS:
            continue
        word = token.word.lower()
        male += word in MALE_PRONOUNS
        female += word in FEMALE_PRONOUNS
    if male > female:
        return "male"
    if female > male:
        return "female"
    if male:
        logger.debug("Chain %d of (%s) has as many male as female pronouns", chain.chain_id, part.doc_id)
    return None


def _chain_rows(corpus: Corpus, phrases: FrozenSet[Phrase]) -> List[dict]:
    lengths = frozenset(len(phrase) for phrase in phrases)
    rows = []
    for part in corpus:
        for chain in extract_chains(part):
            gender = chain_gender(part, chain)
            if gender is None:
                continue
            has_job = any(
                _contains_phrase(
                    [t.word.lower() for t in part.sentences[m.sentence_index].tokens[m.start_token:m.end_token + 1]],
                    phrases, lengths)
                for m in chain.mentions
            )
            rows.append({"genre": part.genre, "gender": gender, "has_job": has_job})
    return rows


def _tally(df: pl.DataFrame) -> GenderTally:
    counts = {(row["gender"], key): row[key]
              for row in df.group_by("gender").agg(pl.len().alias("chains"),
                                                   pl.col("has_job").sum().alias("with_job")).iter_rows(named=True)
              for key in ("chains", "with_job")}
    return GenderTally(
        male_chains=counts.get(("male", "chains"), 0),
        female_chains=counts.get(("female", "chains"), 0),
        male_with_job=counts.get(("male", "with_job"), 0),
        female_with_job=counts.get(("female", "with_job"), 0),
    )


def analyze_corpus_bias(corpus: Corpus, job_gazetteer: Iterable[str]) -> CorpusBiasStats:
    """Count chains headed by male or female pronouns and how often they mention a job title."""
    phrases = _phrases(job_gazetteer)
    rows = _chain_rows(corpus, phrases)
    if not rows:
        logger.warning("No chain in %d document parts is headed by a gendered pronoun", len(corpus))
        return CorpusBiasStats()

    df = pl.DataFrame(rows, schema={"genre": pl.Utf8, "gender": pl.Utf8, "has_job": pl.Boolean})
    total = _tally(df)
    per_genre = {genre: _tally(group) for (genre,), group in df.group_by(["genre"], maintain_order=True)}
    logger.info("Found %d gendered chains, %.1f%% male", total.gendered_entity_total, 100 * total.male_fraction)
    return CorpusBiasStats(
        male_chains=total.male_chains,
        female_chains=total.female_chains,
        male_with_job=total.male_with_job,
        female_with_job=total.female_with_job,
        per_genre=per_genre,
    )
