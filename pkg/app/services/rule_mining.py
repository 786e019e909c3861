import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import polars as pl

from app.errors import EmptyInput
from app.models.swap import AnnotatedSpanPair, RuleCandidate, SwapDictionary, SwapRule
from app.services.data_import import DataImporter
from app.services.gender_swap import build_dictionary

logger = logging.getLogger(__name__)

# sources whose target depends on part of speech rather than frequency
POS_RESOLVED: Dict[str, Tuple[Tuple[str, str], ...]] = {
    "her": (("PRP$", "his"), ("PRP", "him")),
}

_CANDIDATE_SCHEMA = {"source": pl.Utf8, "target": pl.Utf8, "pos": pl.Utf8}


def load_span_pairs(path: Union[str, Path]) -> List[AnnotatedSpanPair]:
    """Read `original TAB edited TAB pos_tags` rows; the POS column is optional."""
    df = DataImporter().read_span_pairs(path)
    pairs = []
    for row_number, row in enumerate(df.iter_rows(named=True), start=1):
        original = tuple((row["original"] or "").split())
        edited = tuple((row["edited"] or "").split())
        if not original or not edited:
            logger.warning("Skipping row %d of %s: empty span", row_number, path)
            continue
        pos = tuple((row["pos"] or "").split()) or None
        if pos is not None and len(pos) != len(original):
            logger.warning("Ignoring POS tags on row %d of %s: %d tags for %d tokens",
                           row_number, path, len(pos), len(original))
            pos = None
        pairs.append(AnnotatedSpanPair(original, edited, pos))
    return pairs


def word_difference(pair: AnnotatedSpanPair) -> List[Tuple[str, str, Optional[str]]]:
    """Positionally aligned tokens that differ, compared case-insensitively.

    Spans of different length are not aligned and yield nothing.
    """
    if not pair.is_alignable:
        logger.debug("Skipping unequal-length pair %r -> %r",
                     " ".join(pair.original_tokens), " ".join(pair.edited_tokens))
        return []
    differences = []
    for index, (original, edited) in enumerate(zip(pair.original_tokens, pair.edited_tokens)):
        if original.lower() != edited.lower():
            pos = pair.original_pos[index] if pair.original_pos else None
            differences.append((original, edited, pos))
    return differences


def collect_candidates(pairs: Iterable[AnnotatedSpanPair]) -> List[RuleCandidate]:
    """Count lowercased (source, target, POS) differences over all pairs."""
    rows = [
        {"source": source.lower(), "target": target.lower(), "pos": pos}
        for pair in pairs
        for source, target, pos in word_difference(pair)
    ]
    if not rows:
        return []
    counts = (
        pl.DataFrame(rows, schema=_CANDIDATE_SCHEMA)
        .group_by(["source", "target", "pos"])
        .agg(pl.len().alias("support"))
        .sort(["source", "target", "pos"], nulls_last=True)
    )
    return [RuleCandidate(**row) for row in counts.iter_rows(named=True)]


def mine_rules(pairs: Iterable[AnnotatedSpanPair], min_support: int = 1) -> SwapDictionary:
    """Mine one rule per source word from annotated span edits.

    The most frequent target wins (ties go to the lexicographically smallest
    target). Sources listed in POS_RESOLVED always get one rule per POS.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no annotated span pairs to mine")
    skipped = sum(1 for pair in pairs if not pair.is_alignable)
    if skipped:
        logger.warning("Skipped %d of %d span pairs with unequal length", skipped, len(pairs))

    candidates = collect_candidates(pairs)
    if not candidates:
        logger.warning("No word differences found in %d span pairs", len(pairs))
        return SwapDictionary(())

    df = pl.DataFrame(
        [{"source": c.source, "target": c.target, "support": c.support} for c in candidates],
        schema={"source": pl.Utf8, "target": pl.Utf8, "support": pl.Int64},
    )
    best = (
        df.filter(~pl.col("source").is_in(list(POS_RESOLVED)))
        .group_by(["source", "target"])
        .agg(pl.col("support").sum())
        .sort(["source", "support", "target"], descending=[False, True, False])
        .group_by("source", maintain_order=True)
        .first()
    )
    dropped = best.filter(pl.col("support") < min_support)
    if not dropped.is_empty():
        logger.info("Dropping %d rules below minimum support %d", len(dropped), min_support)

    rules = [
        SwapRule(row["source"], row["target"], None, row["support"])
        for row in best.filter(pl.col("support") >= min_support).iter_rows(named=True)
    ]
    for source, resolutions in POS_RESOLVED.items():
        observed = df.filter(pl.col("source") == source)
        if observed.is_empty():
            continue
        for pos, target in resolutions:
            support = observed.filter(pl.col("target") == target)["support"].sum()
            rules.append(SwapRule(source, target, pos, max(int(support), 1)))

    rules.sort(key=lambda rule: (rule.source, rule.pos_constraint or ""))
    dictionary = build_dictionary(rules)
    logger.info("Mined %d rules from %d span pairs", len(dictionary), len(pairs))
    return dictionary
