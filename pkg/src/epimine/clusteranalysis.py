"""Cluster quality metrics (intra/inter similarity) and class-vs-cluster crosstabs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import CLASS_ORDER, ClassLabel
from .topics import Clustering
from .vectorspace import SparseVector, unit

Vectors = Mapping[str, SparseVector]


@dataclass(frozen=True)
class SimilarityMatrix:
    """Pairwise cluster similarity; row i belongs to original id cluster_ids[i].

    Empty clusters are dropped before computing, and `cluster_ids` records the
    renumbering back to the clustering's ids.
    """

    values: tuple[tuple[float, ...], ...]
    cluster_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        k = len(self.values)
        if k == 0:
            raise ValueError("similarity matrix must have at least one cluster")
        if len(self.cluster_ids) != k or any(len(row) != k for row in self.values):
            raise ValueError("similarity matrix must be square with one id per row")
        for i in range(k):
            for j in range(k):
                v = self.values[i][j]
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"similarity [{i}][{j}]={v} outside [0,1]")
                if abs(v - self.values[j][i]) > 1e-12:
                    raise ValueError("similarity matrix must be symmetric")

    @property
    def k(self) -> int:
        return len(self.values)


def _unit_sum(ids: Iterable[str], vectors: Vectors) -> tuple[SparseVector, int]:
    """Sum of unit-normalized member vectors, plus how many were nonzero."""
    acc: dict[str, float] = {}
    nonzero = 0
    for doc_id in ids:
        if doc_id not in vectors:
            raise ValueError(f"no vector for document {doc_id!r}")
        u = unit(vectors[doc_id])
        if u:
            nonzero += 1
        for term, w in u.items():
            acc[term] = acc.get(term, 0.0) + w
    return acc, nonzero


def _dot(a: SparseVector, b: SparseVector) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(a[k] * b[k] for k in sorted(a) if k in b)


def _pair_similarity(
    sum_a: SparseVector, m_a: int, sum_b: SparseVector, m_b: int
) -> float:
    value = _dot(sum_a, sum_b) / (m_a * m_b)
    return min(max(value, 0.0), 1.0)


def _intra_similarity(sum_c: SparseVector, m: int, nonzero: int, include_self: bool) -> float:
    sq = _dot(sum_c, sum_c)
    if include_self:
        value = sq / (m * m)
    elif m < 2:
        return 0.0
    else:
        # each nonzero member contributes one self-pair of cosine exactly 1
        value = (sq - nonzero) / (m * (m - 1))
    return min(max(value, 0.0), 1.0)


def cluster_similarity(
    ca: Iterable[str],
    cb: Iterable[str],
    vectors: Vectors,
    include_self_pairs: bool = True,
) -> float:
    """Average cosine over all ordered member pairs of two clusters.

    Equals sum-of-unit-vector dot products divided by |Ca|*|Cb|, which is the
    same mean without materializing the pairs.  When the clusters are the same
    set this is the intra-cluster similarity; self-pairs (cosine 1) count by
    default, and `include_self_pairs=False` averages distinct pairs only.
    """
    ca = list(ca)
    cb = list(cb)
    if not ca or not cb:
        raise ValueError("clusters must be non-empty")
    if sorted(ca) == sorted(cb):
        sum_c, nonzero = _unit_sum(ca, vectors)
        return _intra_similarity(sum_c, len(ca), nonzero, include_self_pairs)
    sum_a, _ = _unit_sum(ca, vectors)
    sum_b, _ = _unit_sum(cb, vectors)
    return _pair_similarity(sum_a, len(ca), sum_b, len(cb))


def similarity_matrix(
    clustering: Clustering,
    vectors: Vectors,
    include_self_pairs: bool = True,
) -> SimilarityMatrix:
    """All pairwise cluster similarities, each unordered pair computed once."""
    members = clustering.members()
    ids = sorted(members)
    sums = {}
    for cid in ids:
        sums[cid] = _unit_sum(members[cid], vectors)
    k = len(ids)
    values = [[0.0] * k for _ in range(k)]
    for i in range(k):
        sum_i, nonzero_i = sums[ids[i]]
        m_i = len(members[ids[i]])
        values[i][i] = _intra_similarity(sum_i, m_i, nonzero_i, include_self_pairs)
        for j in range(i + 1, k):
            sum_j, _ = sums[ids[j]]
            value = _pair_similarity(sum_i, m_i, sum_j, len(members[ids[j]]))
            values[i][j] = value
            values[j][i] = value
    return SimilarityMatrix(
        values=tuple(tuple(row) for row in values),
        cluster_ids=tuple(ids),
    )


def summarize(matrix: SimilarityMatrix) -> tuple[float, float | None]:
    """(mean diagonal, mean off-diagonal); the second is None for one cluster."""
    k = matrix.k
    intra = sum(matrix.values[i][i] for i in range(k)) / k
    if k < 2:
        return intra, None
    upper = [matrix.values[i][j] for i in range(k) for j in range(i + 1, k)]
    return intra, sum(upper) / len(upper)


@dataclass(frozen=True)
class CrossTab:
    """Class-by-cluster contingency counts with both percentage normalizations.

    Rows follow canonical class order; columns are cluster ids 0..k-1 of the
    source clustering, empty ones kept and flagged.  `column_pct` normalizes
    each cluster's column to 100 (class distribution within the cluster);
    `row_pct` normalizes each class's row to 100 (scattering of the class
    across clusters).  Values stay full precision; rounding happens only when
    writing CSV.
    """

    counts: tuple[tuple[int, ...], ...]
    column_pct: tuple[tuple[float, ...], ...]
    row_pct: tuple[tuple[float, ...], ...]
    empty_columns: tuple[int, ...] = ()
    empty_rows: tuple[ClassLabel, ...] = ()

    @property
    def k(self) -> int:
        return len(self.counts[0])

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


def crosstab(labels: Mapping[str, ClassLabel], clustering: Clustering) -> CrossTab:
    """Cross-tabulate document labels against cluster assignments.

    Every clustered document must carry a label; extra labels (for excluded
    documents, say) are ignored.
    """
    k = clustering.k
    counts = [[0] * k for _ in CLASS_ORDER]
    for doc_id, cluster in clustering.assignment.items():
        label = labels.get(doc_id)
        if label is None:
            raise ValueError(f"document {doc_id!r} is clustered but has no label")
        counts[label.order][cluster] += 1

    col_sums = [sum(counts[r][c] for r in range(len(CLASS_ORDER))) for c in range(k)]
    row_sums = [sum(row) for row in counts]
    column_pct = [
        [100.0 * counts[r][c] / col_sums[c] if col_sums[c] else 0.0 for c in range(k)]
        for r in range(len(CLASS_ORDER))
    ]
    row_pct = [
        [100.0 * counts[r][c] / row_sums[r] if row_sums[r] else 0.0 for c in range(k)]
        for r in range(len(CLASS_ORDER))
    ]
    return CrossTab(
        counts=tuple(tuple(row) for row in counts),
        column_pct=tuple(tuple(row) for row in column_pct),
        row_pct=tuple(tuple(row) for row in row_pct),
        empty_columns=tuple(c for c in range(k) if not col_sums[c]),
        empty_rows=tuple(
            cls for cls, total in zip(CLASS_ORDER, row_sums) if not total
        ),
    )


def _cluster_headers(k: int) -> list[str]:
    return [f"cluster_{c}" for c in range(k)]


def write_counts_csv(tab: CrossTab, path: str | Path) -> None:
    lines = ["class," + ",".join(_cluster_headers(tab.k)) + ",Total"]
    for cls, row in zip(CLASS_ORDER, tab.counts):
        lines.append(f"{cls.value}," + ",".join(str(c) for c in row) + f",{sum(row)}")
    totals = [sum(tab.counts[r][c] for r in range(len(CLASS_ORDER))) for c in range(tab.k)]
    lines.append("Total," + ",".join(str(t) for t in totals) + f",{tab.total}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_cluster_profile_csv(tab: CrossTab, path: str | Path) -> None:
    """Class distribution within each cluster; columns sum to 100."""
    lines = ["class," + ",".join(_cluster_headers(tab.k))]
    for cls, row in zip(CLASS_ORDER, tab.column_pct):
        lines.append(f"{cls.value}," + ",".join(f"{v:.1f}" for v in row))
    totals = (0.0 if c in tab.empty_columns else 100.0 for c in range(tab.k))
    lines.append("Total," + ",".join(f"{t:.1f}" for t in totals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_class_scatter_csv(tab: CrossTab, path: str | Path) -> None:
    """Scattering of each class across clusters; rows sum to 100."""
    lines = ["class," + ",".join(_cluster_headers(tab.k)) + ",Total"]
    for cls, row in zip(CLASS_ORDER, tab.row_pct):
        total = 0.0 if cls in tab.empty_rows else 100.0
        lines.append(f"{cls.value}," + ",".join(f"{v:.1f}" for v in row) + f",{total:.1f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_similarity_csv(matrix: SimilarityMatrix, path: str | Path) -> None:
    header = "cluster," + ",".join(f"cluster_{c}" for c in matrix.cluster_ids)
    lines = [header]
    for cid, row in zip(matrix.cluster_ids, matrix.values):
        lines.append(f"cluster_{cid}," + ",".join(f"{v:.6f}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_heatmap_svg(matrix: SimilarityMatrix, path: str | Path) -> None:
    """Grayscale cell grid, darker cells for higher similarity."""
    k = matrix.k
    cell = 48
    margin = 56
    size = margin + k * cell + 8
    vmax = max(max(row) for row in matrix.values) or 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i, cid in enumerate(matrix.cluster_ids):
        x = margin + i * cell + cell // 2
        parts.append(
            f'<text x="{x}" y="{margin - 10}" font-size="12" text-anchor="middle" '
            f'font-family="sans-serif">{cid}</text>'
        )
        y = margin + i * cell + cell // 2 + 4
        parts.append(
            f'<text x="{margin - 10}" y="{y}" font-size="12" text-anchor="end" '
            f'font-family="sans-serif">{cid}</text>'
        )
    for i in range(k):
        for j in range(k):
            v = matrix.values[i][j]
            shade = round(255 * (1.0 - v / vmax))
            x = margin + j * cell
            y = margin + i * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},{shade})" stroke="black" stroke-width="0.5"/>'
            )
            text_fill = "white" if shade < 128 else "black"
            parts.append(
                f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" font-size="10" '
                f'text-anchor="middle" font-family="sans-serif" '
                f'fill="{text_fill}">{v:.2f}</text>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
