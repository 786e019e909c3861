"""Coreference metrics, WinoBias bias gaps and the approximate randomization test.

MUC, B-cubed and CEAF-e follow the definitions of the reference CoNLL-2012
scorer (v8.01): scores are accumulated over documents by summing numerators
and denominators, and CEAF-e aligns clusters within each (doc_id, part) unit.
"""

import logging
from collections import Counter, defaultdict
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.errors import InputError, MentionNotFound, MisalignedUnits
from app.models.conll import Corpus, DocumentPart
from app.models.scores import BiasReport, ClusterSet, ConditionScores, MentionKey, PerDocScores, ScoreTriple
from app.models.wino import Condition, TemplateKind, WinoExample
from app.services.conll_io import extract_chains
from app.services.gender_swap import SWAPPED_SUFFIX

logger = logging.getLogger(__name__)

METRICS = ("muc", "bcub", "ceafe")
BIAS_METRICS = ("conll", "muc", "bcub", "ceafe", "accuracy")

_BATCH = 1000

Cluster = FrozenSet[Hashable]
Seed = Union[int, np.random.Generator]


def _index(clusters: ClusterSet) -> Dict[Hashable, int]:
    return {mention: position for position, cluster in enumerate(clusters) for mention in cluster}


def _unit(cluster: Cluster):
    return getattr(next(iter(cluster)), "unit", None)


def _by_unit(clusters: ClusterSet) -> Dict[object, List[Cluster]]:
    grouped: Dict[object, List[Cluster]] = defaultdict(list)
    for cluster in clusters:
        grouped[_unit(cluster)].append(cluster)
    return grouped


# MUC

def _partitions(cluster: Cluster, other: Dict[Hashable, int]) -> int:
    """Number of pieces the other clustering cuts a cluster into; unseen mentions are pieces of their own."""
    seen = set()
    missing = 0
    for mention in cluster:
        if mention in other:
            seen.add(other[mention])
        else:
            missing += 1
    return len(seen) + missing


def _muc_side(clusters: ClusterSet, other: ClusterSet) -> Tuple[int, int]:
    index = _index(other)
    numerator = sum(len(c) - _partitions(c, index) for c in clusters)
    denominator = sum(len(c) - 1 for c in clusters)
    return numerator, denominator


def muc(key: ClusterSet, response: ClusterSet) -> ScoreTriple:
    r_num, r_den = _muc_side(key, response)
    p_num, p_den = _muc_side(response, key)
    return ScoreTriple.from_counts(p_num, p_den, r_num, r_den)


# B-cubed

def _b_cubed_side(clusters: ClusterSet, other: ClusterSet) -> Tuple[float, int]:
    index = _index(other)
    numerator = 0.0
    denominator = 0
    for cluster in clusters:
        overlap = Counter(index[m] for m in cluster if m in index)
        numerator += sum(count * count for count in overlap.values()) / len(cluster)
        denominator += len(cluster)
    return numerator, denominator


def b_cubed(key: ClusterSet, response: ClusterSet) -> ScoreTriple:
    """Mentions missing from the other side contribute no overlap."""
    r_num, r_den = _b_cubed_side(key, response)
    p_num, p_den = _b_cubed_side(response, key)
    return ScoreTriple.from_counts(p_num, p_den, r_num, r_den)


# CEAF-e

def phi4(key_cluster: Cluster, response_cluster: Cluster) -> float:
    return 2 * len(key_cluster & response_cluster) / (len(key_cluster) + len(response_cluster))


def _ceaf_similarity(key_clusters: Sequence[Cluster], response_clusters: Sequence[Cluster]) -> float:
    if not key_clusters or not response_clusters:
        return 0.0
    scores = np.zeros((len(key_clusters), len(response_clusters)))
    response_index = {m: j for j, cluster in enumerate(response_clusters) for m in cluster}
    for i, cluster in enumerate(key_clusters):
        for j, overlap in Counter(response_index[m] for m in cluster if m in response_index).items():
            scores[i, j] = 2 * overlap / (len(cluster) + len(response_clusters[j]))
    rows, cols = linear_sum_assignment(scores, maximize=True)
    return float(scores[rows, cols].sum())


def ceaf_e(key: ClusterSet, response: ClusterSet) -> ScoreTriple:
    key_units = _by_unit(key)
    response_units = _by_unit(response)
    similarity = sum(_ceaf_similarity(key_units.get(unit, []), response_units.get(unit, []))
                     for unit in set(key_units) & set(response_units))
    return ScoreTriple.from_counts(similarity, len(response), similarity, len(key))


def conll_average(muc_score: ScoreTriple, b3_score: ScoreTriple, ceafe_score: ScoreTriple) -> float:
    return (muc_score.f1 + b3_score.f1 + ceafe_score.f1) / 3


def score_clusters(key: ClusterSet, response: ClusterSet) -> Dict[str, ScoreTriple]:
    return {"muc": muc(key, response), "bcub": b_cubed(key, response), "ceafe": ceaf_e(key, response)}


def metric_value(scores: Dict[str, ScoreTriple], metric: str) -> float:
    """F1 of one metric, or the CoNLL average, on the [0, 1] scale."""
    if metric == "conll":
        return conll_average(scores["muc"], scores["bcub"], scores["ceafe"])
    if metric not in scores:
        raise InputError(f"unknown metric {metric!r}")
    return scores[metric].f1


# Corpora

def unit_id(doc_id: str, part: int) -> str:
    return f"{doc_id};{part}"


def part_clusters(part: DocumentPart, keep_singletons: bool = True) -> List[Cluster]:
    clusters = []
    for chain in extract_chains(part):
        if len(chain) < 2 and not keep_singletons:
            continue
        clusters.append(frozenset(
            MentionKey(part.doc_id, part.part_number, m.sentence_index, m.start_token, m.end_token)
            for m in chain.mentions))
    return clusters


def cluster_set(corpus: Corpus, keep_singletons: bool = True) -> ClusterSet:
    """All chains of a corpus over the (doc_id, part, sentence, start, end) mention universe.

    A span annotated in two chains of one part is kept in the first only.
    """
    clusters = []
    for part in corpus:
        seen = set()
        for cluster in part_clusters(part, keep_singletons):
            cluster = cluster - seen
            if cluster:
                clusters.append(cluster)
                seen |= cluster
    return ClusterSet(frozenset(clusters))


def _check_units(key: Corpus, response: Corpus) -> None:
    key_units = {part.key for part in key}
    response_units = {part.key for part in response}
    missing = key_units - response_units
    extra = response_units - key_units
    if missing:
        logger.warning("Response lacks %d of %d key document parts; they score as empty", len(missing), len(key_units))
    if extra:
        logger.warning("Ignoring %d response document parts absent from the key", len(extra))


def score_corpora(key: Corpus, response: Corpus, keep_singletons: bool = True
                  ) -> Tuple[Dict[str, ScoreTriple], float]:
    """Metric suite and CoNLL average of a response corpus against a key corpus."""
    _check_units(key, response)
    key_units = {part.key for part in key}
    response = Corpus(tuple(part for part in response if part.key in key_units))
    scores = score_clusters(cluster_set(key, keep_singletons), cluster_set(response, keep_singletons))
    return scores, conll_average(scores["muc"], scores["bcub"], scores["ceafe"])


def per_document_scores(key: Corpus, response: Corpus, metric: str = "conll",
                        keep_singletons: bool = True) -> PerDocScores:
    """One score per key (doc_id, part), the resampling unit for corpus comparisons."""
    response_parts = {part.key: part for part in response}
    units = []
    for part in key:
        key_clusters = ClusterSet(frozenset(part_clusters(part, keep_singletons)))
        other = response_parts.get(part.key)
        response_clusters = ClusterSet(frozenset(part_clusters(other, keep_singletons))) if other else ClusterSet()
        scores = score_clusters(key_clusters, response_clusters)
        units.append((unit_id(part.doc_id, part.part_number), metric_value(scores, metric)))
    return PerDocScores.of(units)


# Bias audit

def bias_gap(pro_f1: float, anti_f1: float) -> Tuple[float, float]:
    """Average and absolute difference of pro- and anti-stereotypical scores."""
    return (pro_f1 + anti_f1) / 2, abs(pro_f1 - anti_f1)


def _mentions_by_doc(response: ClusterSet) -> Dict[str, List[MentionKey]]:
    by_doc: Dict[str, List[MentionKey]] = defaultdict(list)
    for mention in response.mentions:
        by_doc[getattr(mention, "doc_id", None)].append(mention)
    return by_doc


def wino_correctness(examples: Iterable[WinoExample], response: ClusterSet,
                     strict: bool = False) -> Dict[str, bool]:
    """Whether each example's pronoun shares a response cluster with its gold antecedent.

    The pronoun mention is the response mention covering the pronoun token
    (the narrowest one if several do). An entity mention matches the gold
    entity when it ends on the entity's last token and lies inside its span.
    """
    index = _index(response)
    by_doc = _mentions_by_doc(response)
    correct = {}
    for example in examples:
        mentions = [m for m in by_doc.get(example.example_id, []) if m.sentence == 0]
        covering = [m for m in mentions if m.start <= example.pronoun_index <= m.end]
        if not covering:
            error = MentionNotFound(f"no response mention covers the pronoun of {example.example_id}")
            if strict:
                raise error
            logger.warning("%s; counted as incorrect", error)
            correct[example.example_id] = False
            continue
        pronoun = min(covering, key=lambda m: (m.end - m.start, m.start))
        gold_start, gold_end = example.gold_span
        antecedents = [m for m in mentions if m.end == gold_end and gold_start <= m.start and m != pronoun]
        correct[example.example_id] = any(index[m] == index[pronoun] for m in antecedents)
    return correct


def wino_accuracy(examples: Sequence[WinoExample], response: ClusterSet, strict: bool = False) -> float:
    if not examples:
        return 0.0
    correct = wino_correctness(examples, response, strict)
    return sum(correct.values()) / len(examples)


def _rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def approx_randomization(scores_a: PerDocScores, scores_b: PerDocScores, iterations: int = 10_000,
                         seed: Seed = 0) -> float:
    """Two-sided paired approximate randomization test on the mean difference.

    Each shuffle swaps every pair independently with probability 1/2; the
    p-value is (shuffles at least as extreme as observed + 1) / (iterations + 1).
    """
    if scores_a.ids != scores_b.ids:
        raise MisalignedUnits("paired scores must list the same unit ids in the same order")
    if iterations < 1:
        raise InputError("iterations must be positive")
    if iterations < 1000:
        logger.warning("Only %d randomization iterations; at least 1000 are recommended", iterations)
    if not len(scores_a):
        return 1.0

    diffs = np.asarray(scores_a.values) - np.asarray(scores_b.values)
    observed = abs(diffs.mean())
    # shuffles tying the observed difference count as extreme despite rounding
    threshold = observed * (1 - 1e-12)
    rng = _rng(seed)
    extreme = 0
    remaining = iterations
    while remaining:
        batch = min(remaining, _BATCH)
        signs = rng.choice(np.array([-1.0, 1.0]), size=(batch, len(diffs)))
        shuffled = np.abs((signs * diffs).mean(axis=1))
        extreme += int(np.count_nonzero(shuffled >= threshold))
        remaining -= batch
    return (extreme + 1) / (iterations + 1)


def _paired(examples: Sequence[WinoExample], unit_scores: Dict[str, float]
            ) -> Tuple[PerDocScores, PerDocScores]:
    pro = {e.twin_id: unit_scores[e.example_id] for e in examples if e.condition is Condition.PRO}
    anti = {e.twin_id: unit_scores[e.example_id] for e in examples if e.condition is Condition.ANTI}
    twin_ids = sorted(set(pro) & set(anti))
    if len(twin_ids) != len(pro) or len(twin_ids) != len(anti):
        logger.warning("%d examples lack a twin and are left out of the significance test",
                       len(pro) + len(anti) - 2 * len(twin_ids))
    return (PerDocScores.of((t, pro[t]) for t in twin_ids),
            PerDocScores.of((t, anti[t]) for t in twin_ids))


def _condition_scores(examples: Sequence[WinoExample], key: ClusterSet, response: ClusterSet,
                      metric: str, iterations: int, rng: np.random.Generator) -> ConditionScores:
    pro = [e for e in examples if e.condition is Condition.PRO]
    anti = [e for e in examples if e.condition is Condition.ANTI]
    if not pro or not anti:
        logger.warning("No pro/anti pair to score among %d examples", len(examples))
        return ConditionScores(0.0, 0.0, 0.0, 0.0)

    triples: Dict[Condition, Optional[ScoreTriple]] = {Condition.PRO: None, Condition.ANTI: None}
    if metric == "accuracy":
        correct = wino_correctness(examples, response)
        unit_scores = {example_id: float(ok) for example_id, ok in correct.items()}
        pro_score = 100 * sum(unit_scores[e.example_id] for e in pro) / len(pro)
        anti_score = 100 * sum(unit_scores[e.example_id] for e in anti) / len(anti)
    else:
        results = {}
        for condition, subset in ((Condition.PRO, pro), (Condition.ANTI, anti)):
            doc_ids = [e.example_id for e in subset]
            scores = score_clusters(key.restrict(doc_ids), response.restrict(doc_ids))
            results[condition] = 100 * metric_value(scores, metric)
            if metric != "conll":
                triples[condition] = scores[metric]
        pro_score, anti_score = results[Condition.PRO], results[Condition.ANTI]

        key_docs = _by_doc(key)
        response_docs = _by_doc(response)
        unit_scores = {}
        for example in examples:
            doc_key = ClusterSet(frozenset(key_docs.get(example.example_id, [])))
            doc_response = ClusterSet(frozenset(response_docs.get(example.example_id, [])))
            unit_scores[example.example_id] = metric_value(score_clusters(doc_key, doc_response), metric)

    scores_pro, scores_anti = _paired(examples, unit_scores)
    p_value = approx_randomization(scores_pro, scores_anti, iterations, rng) if len(scores_pro) else None
    avg, diff = bias_gap(pro_score, anti_score)
    return ConditionScores(pro_score, anti_score, avg, diff, p_value,
                           triples[Condition.PRO], triples[Condition.ANTI])


def _by_doc(clusters: ClusterSet) -> Dict[str, List[Cluster]]:
    grouped: Dict[str, List[Cluster]] = defaultdict(list)
    for cluster in clusters:
        grouped[getattr(next(iter(cluster)), "doc_id", None)].append(cluster)
    return grouped


def wino_bias_report(examples: Sequence[WinoExample], key: Corpus, response: Corpus, metric: str = "conll",
                     iterations: int = 10_000, seed: Seed = 0) -> BiasReport:
    """Score a challenge set per template type and condition.

    Significance compares each pro example with its anti twin.
    """
    if metric not in BIAS_METRICS:
        raise InputError(f"unknown bias metric {metric!r}; expected one of {', '.join(BIAS_METRICS)}")
    rng = _rng(seed)
    key_clusters = cluster_set(key)
    response_clusters = cluster_set(response)
    overall, conll = score_corpora(key, response)
    by_kind = {
        kind: _condition_scores([e for e in examples if e.kind is kind], key_clusters, response_clusters,
                                metric, iterations, rng)
        for kind in (TemplateKind.TYPE1, TemplateKind.TYPE2)
    }
    return BiasReport(t1=by_kind[TemplateKind.TYPE1], t2=by_kind[TemplateKind.TYPE2], metric=metric,
                      metrics=overall, conll_avg=conll)


def passes_winobias(report: BiasReport, alpha: float = 0.05) -> bool:
    """Neither template type shows a significant pro/anti difference."""
    p_values = (report.p_t1, report.p_t2)
    return all(p is not None and p >= alpha for p in p_values)


def strip_swapped(scores: PerDocScores) -> PerDocScores:
    """Map gender-reversed unit ids back onto their originals."""
    return PerDocScores.of((unit.replace(SWAPPED_SUFFIX + ";", ";"), value) for unit, value in scores.units)


def compare_reversed(original: PerDocScores, reversed_scores: PerDocScores, iterations: int = 10_000,
                     seed: Seed = 0) -> Dict[str, float]:
    """Compare scores on original documents with scores on their gender-reversed copies."""
    reversed_scores = strip_swapped(reversed_scores)
    if set(original.ids) != set(reversed_scores.ids):
        raise MisalignedUnits("original and gender-reversed scores cover different document parts")
    lookup = dict(reversed_scores.units)
    aligned = PerDocScores.of((unit, lookup[unit]) for unit in original.ids)
    original_mean = 100 * original.mean()
    reversed_mean = 100 * aligned.mean()
    return {
        "original": original_mean,
        "reversed": reversed_mean,
        "diff": abs(original_mean - reversed_mean),
        "p": approx_randomization(original, aligned, iterations, seed),
    }
