from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, FrozenSet, Hashable, Iterable, Iterator, NamedTuple, Optional, Tuple


class MentionKey(NamedTuple):
    doc_id: str
    part: int
    sentence: int
    start: int
    end: int

    @property
    def unit(self) -> Tuple[str, int]:
        return (self.doc_id, self.part)


def round_half_up(value: float) -> float:
    """One decimal, rounded half-up as printed in result tables."""
    return float(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def report_value(value: float) -> float:
    """Scale a [0, 1] score to the 0-100 reporting scale."""
    return round_half_up(float(Decimal(repr(value)) * 100))


@dataclass(frozen=True)
class ClusterSet:
    clusters: FrozenSet[FrozenSet[Hashable]] = frozenset()

    def __post_init__(self):
        seen = set()
        for cluster in self.clusters:
            if not cluster:
                raise ValueError("clusters must not be empty")
            if seen & cluster:
                raise ValueError("clusters must be pairwise disjoint")
            seen |= cluster

    @classmethod
    def of(cls, clusters: Iterable[Iterable[Hashable]]) -> "ClusterSet":
        return cls(frozenset(frozenset(cluster) for cluster in clusters))

    def __iter__(self) -> Iterator[FrozenSet[Hashable]]:
        return iter(self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def mentions(self) -> FrozenSet[Hashable]:
        return frozenset(m for cluster in self.clusters for m in cluster)

    def restrict(self, doc_ids: Iterable[str]) -> "ClusterSet":
        """Keep the mentions of the given documents (MentionKey universes only)."""
        wanted = set(doc_ids)
        kept = []
        for cluster in self.clusters:
            inside = frozenset(m for m in cluster if getattr(m, "doc_id", None) in wanted)
            if inside:
                kept.append(inside)
        return ClusterSet(frozenset(kept))

    def without_singletons(self) -> "ClusterSet":
        return ClusterSet(frozenset(c for c in self.clusters if len(c) > 1))


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "ScoreTriple":
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(precision, recall, f1)

    @classmethod
    def from_counts(cls, p_num: float, p_den: float, r_num: float, r_den: float) -> "ScoreTriple":
        precision = p_num / p_den if p_den else 0.0
        recall = r_num / r_den if r_den else 0.0
        return cls.from_pr(precision, recall)

    def swapped(self) -> "ScoreTriple":
        return ScoreTriple(self.recall, self.precision, self.f1)

    def to_report(self) -> Dict[str, float]:
        return {"P": report_value(self.precision), "R": report_value(self.recall), "F1": report_value(self.f1)}


@dataclass(frozen=True)
class PerDocScores:
    """Paired unit scores used as the resampling unit of the randomization test."""

    units: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        ids = [unit_id for unit_id, _ in self.units]
        if len(set(ids)) != len(ids):
            raise ValueError("unit ids must be unique")

    @classmethod
    def of(cls, pairs: Iterable[Tuple[str, float]]) -> "PerDocScores":
        return cls(tuple((str(unit_id), float(value)) for unit_id, value in pairs))

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(unit_id for unit_id, _ in self.units)

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(value for _, value in self.units)

    def __len__(self) -> int:
        return len(self.units)

    def mean(self) -> float:
        return sum(self.values) / len(self.units) if self.units else 0.0


@dataclass(frozen=True)
class ConditionScores:
    """Pro/anti result for one template type on the 0-100 scale, kept at full precision."""

    pro: float
    anti: float
    avg: float
    diff: float
    p_value: Optional[float] = None
    pro_triple: Optional[ScoreTriple] = None
    anti_triple: Optional[ScoreTriple] = None

    def to_report(self) -> Dict:
        report = {
            "pro": round_half_up(self.pro),
            "anti": round_half_up(self.anti),
            "avg": round_half_up(self.avg),
            "diff": round_half_up(self.diff),
            "p": self.p_value,
        }
        if self.pro_triple is not None and self.anti_triple is not None:
            report["pro_scores"] = self.pro_triple.to_report()
            report["anti_scores"] = self.anti_triple.to_report()
        return report


@dataclass(frozen=True)
class BiasReport:
    t1: ConditionScores
    t2: ConditionScores
    metric: str = "conll"
    ontonotes_f1: Optional[float] = None
    metrics: Dict[str, ScoreTriple] = field(default_factory=dict)
    conll_avg: Optional[float] = None

    @property
    def t1_avg(self) -> float:
        return self.t1.avg

    @property
    def t1_diff(self) -> float:
        return self.t1.diff

    @property
    def t2_avg(self) -> float:
        return self.t2.avg

    @property
    def t2_diff(self) -> float:
        return self.t2.diff

    @property
    def p_t1(self) -> Optional[float]:
        return self.t1.p_value

    @property
    def p_t2(self) -> Optional[float]:
        return self.t2.p_value

    def to_report(self) -> Dict:
        report: Dict = {name: triple.to_report() for name, triple in self.metrics.items()}
        if self.conll_avg is not None:
            report["conll_avg"] = report_value(self.conll_avg)
        report["bias"] = {"metric": self.metric, "t1": self.t1.to_report(), "t2": self.t2.to_report()}
        if self.ontonotes_f1 is not None:
            report["ontonotes_f1"] = round_half_up(self.ontonotes_f1)
        return report
