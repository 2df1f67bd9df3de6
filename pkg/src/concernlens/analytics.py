"""Article-level label aggregation, rolling trend series, event windows,
and per-concern keyword statistics.

An article carries a concern iff any of its passages does, so article
labels are the element-wise max over passage labels. Trend values are
trailing-window means kept as integer counts until the final division,
which makes long series exactly reproducible.
"""

from __future__ import annotations

import csv
import io
import re
from collections import Counter
from dataclasses import dataclass
from datetime import date, timedelta
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentError, InsufficientDataError, UnsortedArticlesError
from .taxonomy import LabelVector

_WORD_RE = re.compile(r"[a-z0-9][a-z0-9']*")

DEFAULT_ROLLING_WINDOW = 500
DEFAULT_CLOUD_SIZE = 50


@dataclass(frozen=True)
class ArticleLabel:
    doc_id: str
    labels: LabelVector
    date: date | None = None


@dataclass(frozen=True)
class TrendPoint:
    index: int
    date: date | None
    value: float


@dataclass(frozen=True)
class TrendSeries:
    concern_id: str
    window: int
    points: tuple[TrendPoint, ...]


@dataclass(frozen=True)
class EventChange:
    concern_id: str
    pre_prop: float
    post_prop: float
    rel_change: float | None  # None when pre_prop == 0 (undefined, flagged)

    @property
    def undefined(self) -> bool:
        return self.rel_change is None

    def to_dict(self) -> dict:
        return {
            "concern_id": self.concern_id,
            "pre_prop": self.pre_prop,
            "post_prop": self.post_prop,
            "rel_change": self.rel_change,
            "undefined": self.undefined,
        }


@dataclass(frozen=True)
class KeywordCloud:
    concern_id: str
    entries: tuple[tuple[str, int], ...]  # (term, count), count desc, term asc


def aggregate_article(passage_labels: Sequence[LabelVector]) -> LabelVector:
    """Element-wise OR (max) across a document's passage label vectors."""
    if not passage_labels:
        raise AlignmentError("aggregate_article requires at least one passage vector")
    width = len(passage_labels[0])
    values = [0] * width
    for v in passage_labels:
        if len(v) != width:
            raise AlignmentError("passage label vectors have differing lengths")
        if not v.is_binary:
            raise AlignmentError("aggregate_article requires binary vectors")
        for i, x in enumerate(v.values):
            if x:
                values[i] = 1
    return LabelVector(values=tuple(values))


def _label_matrix(articles: Sequence[ArticleLabel]) -> np.ndarray:
    if not articles:
        return np.zeros((0, 0), dtype=np.int64)
    width = len(articles[0].labels)
    M = np.zeros((len(articles), width), dtype=np.int64)
    for i, art in enumerate(articles):
        if len(art.labels) != width:
            raise AlignmentError(f"article {art.doc_id} label width differs")
        if not art.labels.is_binary:
            raise AlignmentError(f"article {art.doc_id} labels are not binary")
        M[i] = art.labels.values
    return M


def _check_sorted(articles: Sequence[ArticleLabel]) -> None:
    prev: date | None = None
    for art in articles:
        if art.date is None:
            raise UnsortedArticlesError(f"article {art.doc_id} has no date")
        if prev is not None and art.date < prev:
            raise UnsortedArticlesError(
                f"articles not sorted by date at {art.doc_id} ({art.date} < {prev})"
            )
        prev = art.date


def rolling_average(
    articles: Sequence[ArticleLabel],
    window: int = DEFAULT_ROLLING_WINDOW,
    concern_ids: Sequence[str] | None = None,
    emit_partial: bool = False,
) -> list[TrendSeries]:
    """Trailing-window mean of each concern's article indicator.

    Point i (for i >= window-1) averages articles [i-window+1 .. i],
    inclusive of the current article. With ``emit_partial`` the warm-up
    prefix is emitted too, averaged over however many articles exist.
    Counts stay integers until the single final division per point.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    _check_sorted(articles)
    M = _label_matrix(articles)
    n, width = M.shape
    if n == 0 and concern_ids is not None:
        width = len(concern_ids)  # empty input still yields one series per concern
        M = M.reshape(0, width)
    if concern_ids is None:
        concern_ids = [str(i) for i in range(width)]
    if len(concern_ids) != width:
        raise AlignmentError("concern_ids misaligned with label width")

    csum = np.zeros((n + 1, width), dtype=np.int64)
    np.cumsum(M, axis=0, out=csum[1:])
    start = 0 if emit_partial else window - 1
    series = []
    for c in range(width):
        points = []
        for i in range(start, n):
            lo = max(0, i - window + 1)
            count = int(csum[i + 1, c] - csum[lo, c])
            points.append(
                TrendPoint(index=i, date=articles[i].date, value=count / (i - lo + 1))
            )
        series.append(
            TrendSeries(concern_id=concern_ids[c], window=window, points=tuple(points))
        )
    return series


def trends_to_csv(series: Sequence[TrendSeries]) -> str:
    """CSV with index/date columns then one column per concern."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["index", "date"] + [s.concern_id for s in series])
    if series:
        n_points = len(series[0].points)
        for s in series:
            if len(s.points) != n_points:
                raise AlignmentError("trend series have differing lengths")
        for row_idx in range(n_points):
            first = series[0].points[row_idx]
            writer.writerow(
                [first.index, first.date.isoformat() if first.date else ""]
                + [repr(s.points[row_idx].value) for s in series]
            )
    return buf.getvalue()


def event_comparison(
    articles: Sequence[ArticleLabel],
    event_date: date,
    pre_window_days: int,
    post_window_days: int,
    concern_ids: Sequence[str] | None = None,
) -> list[EventChange]:
    """Concern prevalence before vs after an event.

    Pre window is [event - pre_days, event); post window is
    [event, event + post_days) -- the event day itself counts as "after".
    rel_change = (post - pre) / pre, undefined (None) when pre is zero.
    """
    if pre_window_days <= 0 or post_window_days <= 0:
        raise ValueError("windows must be positive")
    pre_start = event_date - timedelta(days=pre_window_days)
    post_end = event_date + timedelta(days=post_window_days)
    pre_rows, post_rows = [], []
    for art in articles:
        if art.date is None:
            continue
        if pre_start <= art.date < event_date:
            pre_rows.append(art)
        elif event_date <= art.date < post_end:
            post_rows.append(art)
    if not pre_rows or not post_rows:
        raise InsufficientDataError(
            f"need articles on both sides of {event_date}: "
            f"pre={len(pre_rows)}, post={len(post_rows)}"
        )
    pre_M = _label_matrix(pre_rows)
    post_M = _label_matrix(post_rows)
    width = pre_M.shape[1]
    if post_M.shape[1] != width:
        raise AlignmentError("pre/post label widths differ")
    if concern_ids is None:
        concern_ids = [str(i) for i in range(width)]
    out = []
    for c in range(width):
        pre_prop = int(pre_M[:, c].sum()) / len(pre_rows)
        post_prop = int(post_M[:, c].sum()) / len(post_rows)
        rel = (post_prop - pre_prop) / pre_prop if pre_prop > 0 else None
        out.append(
            EventChange(
                concern_id=concern_ids[c],
                pre_prop=pre_prop,
                post_prop=post_prop,
                rel_change=rel,
            )
        )
    return out


def load_default_stopwords() -> frozenset[str]:
    text = resources.files("concernlens.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def keyword_cloud(
    texts: Iterable[str],
    concern_id: str,
    stopwords: frozenset[str] | None = None,
    top_k: int = DEFAULT_CLOUD_SIZE,
) -> KeywordCloud:
    """Top-K lowercase word counts over the passages positive for a concern.

    Stopwords are dropped; ties in count break lexicographically.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    stop = load_default_stopwords() if stopwords is None else stopwords
    counts: Counter[str] = Counter()
    for text in texts:
        for tok in _WORD_RE.findall(text.lower()):
            if tok not in stop:
                counts[tok] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return KeywordCloud(concern_id=concern_id, entries=tuple(ranked))


def article_labels_from_documents(
    docs_with_passage_labels: Iterable[tuple[str, date | None, Sequence[LabelVector]]],
) -> list[ArticleLabel]:
    """Convenience: (doc_id, date, passage vectors) triples -> ArticleLabels."""
    return [
        ArticleLabel(doc_id=doc_id, labels=aggregate_article(vectors), date=d)
        for doc_id, d, vectors in docs_with_passage_labels
    ]
