"""
Sequence metrics over per-hop F1 matrices.

Every aggregate sums in index order and divides once, so a plain nested-loop
recomputation gives bit-identical values.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sklearn.metrics import f1_score

from .errors import MetricsError
from .sequence import HopSequence
from .state import HopResult, RunSummary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadrantScores:
    il_id: Optional[float]
    ol_id: Optional[float]
    il_od: Optional[float]
    ol_od: Optional[float]


def _mean(values: Iterable[float]) -> Optional[float]:
    total, count = 0.0, 0
    for v in values:
        total += v
        count += 1
    return None if count == 0 else total / count


def f1_binary_macro(predictions: Sequence[int], golds: Sequence[int]) -> float:
    """Macro F1 over labels {0, 1}; a class with P + R = 0 scores 0."""
    if len(predictions) == 0 or len(golds) == 0:
        raise MetricsError("F1 over an empty prediction set")
    if len(predictions) != len(golds):
        raise MetricsError(f"{len(predictions)} predictions for {len(golds)} gold labels")
    return float(f1_score(list(golds), list(predictions), labels=[0, 1],
                          average="macro", zero_division=0))


def hopwise_avg(result: HopResult) -> float:
    return _mean(v for row in result.f1 for v in row)


def per_language_average(result: HopResult) -> List[float]:
    return [_mean(row) for row in result.f1]


def overall_f1(results: Sequence[HopResult]) -> float:
    if not results:
        raise MetricsError("no hop results to aggregate")
    return _mean(hopwise_avg(r) for r in results)


def _check_shapes(results: Sequence[HopResult]) -> Tuple[int, int]:
    if not results:
        raise MetricsError("no hop results to aggregate")
    for r in results:
        r.validate()
    k, c = results[0].num_langs, results[0].num_categories
    for r in results:
        if (r.num_langs, r.num_categories) != (k, c):
            raise MetricsError(f"hop {r.hop} matrix is {r.num_langs}x{r.num_categories}, expected {k}x{c}")
    return k, c


def _forgetting(trajectories: List[List[float]]) -> Tuple[float, List[float]]:
    per_item = [max(t) - t[-1] for t in trajectories]
    return _mean(per_item), per_item


def language_trajectory(results: Sequence[HopResult], lang: int) -> List[float]:
    return [_mean(r.f1[lang]) for r in results]


def category_trajectory(results: Sequence[HopResult], category: int) -> List[float]:
    return [_mean(row[category] for row in r.f1) for r in results]


def forgetting_by_language(results: Sequence[HopResult]) -> Tuple[float, List[float]]:
    """Peak minus final mean F1 per language, averaged over languages."""
    k, _ = _check_shapes(results)
    return _forgetting([language_trajectory(results, lang) for lang in range(k)])


def forgetting_by_category(results: Sequence[HopResult]) -> Tuple[float, List[float]]:
    _, c = _check_shapes(results)
    return _forgetting([category_trajectory(results, cat) for cat in range(c)])


def _hop_quadrants(result: HopResult, strict_ol_od: bool) -> Tuple[float, Optional[float],
                                                                    Optional[float], Optional[float]]:
    j, k = result.train_combo.lang, result.train_combo.category
    f1 = result.f1
    il_id = f1[j][k]
    ol_id = _mean(f1[lang][k] for lang in range(result.num_langs) if lang != j)
    il_od = _mean(f1[j][cat] for cat in range(result.num_categories) if cat != k)
    if strict_ol_od:
        ol_od = _mean(f1[lang][cat] for lang in range(result.num_langs) if lang != j
                      for cat in range(result.num_categories) if cat != k)
    else:
        ol_od = _mean(f1[lang][cat] for lang in range(result.num_langs)
                      for cat in range(result.num_categories) if (lang, cat) != (j, k))
    return il_id, ol_id, il_od, ol_od


def quadrant_scores(results: Sequence[HopResult], sequence: HopSequence,
                    strict_ol_od: bool = False) -> QuadrantScores:
    """
    In/out-of-language x in/out-of-domain scores averaged over hops.

    OL/OD covers every cell except the trained one unless strict_ol_od, which
    restricts it to cells differing in both language and category. Quadrants
    with no cells are None.
    """
    _check_shapes(results)
    if len(results) != len(sequence):
        raise MetricsError(f"{len(results)} hop results for a {len(sequence)}-hop sequence")
    for i, (result, combo) in enumerate(zip(results, sequence.combos), 1):
        if result.hop != i or result.train_combo != combo:
            raise MetricsError(
                f"hop {i}: result trained on {result.train_combo} (hop {result.hop}) "
                f"but the sequence has {combo}"
            )

    per_hop = [_hop_quadrants(r, strict_ol_od) for r in results]

    def column(index: int) -> Optional[float]:
        values = [q[index] for q in per_hop]
        if any(v is None for v in values):
            return None
        return _mean(values)

    return QuadrantScores(il_id=column(0), ol_id=column(1), il_od=column(2), ol_od=column(3))


def summarize(results: Sequence[HopResult], sequence: HopSequence, strict_ol_od: bool = False,
              collapsed_hops: Sequence[int] = ()) -> RunSummary:
    quadrants = quadrant_scores(results, sequence, strict_ol_od)
    f_lang, _ = forgetting_by_language(results)
    f_categ, _ = forgetting_by_category(results)
    summary = RunSummary(
        overall_f1=overall_f1(results),
        il_id=quadrants.il_id,
        ol_od=quadrants.ol_od,
        il_od=quadrants.il_od,
        ol_id=quadrants.ol_id,
        f_lang=f_lang,
        f_categ=f_categ,
        hops=len(results),
        collapsed_hops=list(collapsed_hops),
    )
    logger.debug(f"Summary over {len(results)} hops: {summary.formatted()}")
    return summary


def forgetting_table(results: Sequence[HopResult], lang_names: Sequence[str],
                     category_names: Sequence[str]) -> List[Dict[str, object]]:
    """Rows of (axis, name, peak, final, forgetting) for both axes."""
    k, c = _check_shapes(results)
    rows = []
    for axis, names, trajectory in (("language", lang_names[:k], language_trajectory),
                                    ("category", category_names[:c], category_trajectory)):
        for index, name in enumerate(names):
            t = trajectory(results, index)
            rows.append({"axis": axis, "name": name, "peak": max(t), "final": t[-1],
                         "forgetting": max(t) - t[-1]})
    return rows
