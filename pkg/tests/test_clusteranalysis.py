"""Cluster similarity (pairwise-mean cosine), matrices, summaries, and crosstabs."""

import math
import random
import xml.etree.ElementTree as ET

import pytest

from epimine.clusteranalysis import (
    CrossTab,
    SimilarityMatrix,
    cluster_similarity,
    crosstab,
    similarity_matrix,
    summarize,
    write_class_scatter_csv,
    write_cluster_profile_csv,
    write_counts_csv,
    write_heatmap_svg,
    write_similarity_csv,
)
from epimine.corpus import ClassLabel, Corpus, Document
from epimine.topics import Clustering
from epimine.vectorspace import build_vocabulary, cosine, tfidf

NEWS = ClassLabel.NEWS
JOKE = ClassLabel.JOKE
FOCUS = ClassLabel.MOSQUITO_FOCUS
SICK = ClassLabel.SICKNESS


def naive_cluster_similarity(ca, cb, vectors):
    """Literal double loop over ordered pairs; the oracle for the fast path."""
    total = 0.0
    for i in ca:
        for j in cb:
            total += cosine(vectors[i], vectors[j])
    return total / (len(ca) * len(cb))


def random_vectors(rng, n_docs, n_terms=8):
    terms = [f"t{i}" for i in range(n_terms)]
    vectors = {}
    for d in range(n_docs):
        vec = {
            t: rng.uniform(0.1, 5.0) for t in rng.sample(terms, k=rng.randint(0, n_terms))
        }
        vectors[f"d{d}"] = vec
    return vectors


class TestClusterSimilarity:
    def test_singleton_intra_is_one(self):
        vectors = {"a": {"x": 2.0}}
        assert cluster_similarity(["a"], ["a"], vectors) == pytest.approx(1.0)

    def test_orthogonal_singletons(self):
        vectors = {"a": {"x": 1.0}, "b": {"y": 1.0}}
        assert cluster_similarity(["a"], ["b"], vectors) == 0.0

    def test_hand_computed_pair(self):
        # cosine(u, w) = 0.5, so sim({u}, {u, w}) = (1 + 0.5) / 2
        vectors = {"u": {"x": 1.0}, "w": {"x": 1.0, "y": math.sqrt(3)}}
        assert cosine(vectors["u"], vectors["w"]) == pytest.approx(0.5)
        value = cluster_similarity(["u"], ["u", "w"], vectors)
        assert value == pytest.approx(0.75)

    def test_matches_naive_double_loop(self):
        rng = random.Random(17)
        for trial in range(10):
            n = rng.randint(2, 12)
            vectors = random_vectors(rng, n)
            ids = list(vectors)
            half = rng.randint(1, n - 1)
            ca, cb = ids[:half], ids[half:]
            assert cluster_similarity(ca, cb, vectors) == pytest.approx(
                naive_cluster_similarity(ca, cb, vectors), abs=1e-9
            )
            assert cluster_similarity(ca, ca, vectors) == pytest.approx(
                naive_cluster_similarity(ca, ca, vectors), abs=1e-9
            )

    def test_symmetry_is_exact(self):
        rng = random.Random(23)
        vectors = random_vectors(rng, 10)
        ids = list(vectors)
        ca, cb = ids[:4], ids[4:]
        assert cluster_similarity(ca, cb, vectors) == cluster_similarity(cb, ca, vectors)

    def test_exclude_self_pairs(self):
        # two identical and one orthogonal vector
        vectors = {"a": {"x": 1.0}, "b": {"x": 2.0}, "c": {"y": 1.0}}
        ids = ["a", "b", "c"]
        # ordered distinct pairs: (a,b) 1, (a,c) 0, (b,c) 0 doubled -> 2/6
        value = cluster_similarity(ids, ids, vectors, include_self_pairs=False)
        assert value == pytest.approx(1 / 3)
        with_self = cluster_similarity(ids, ids, vectors)
        assert with_self == pytest.approx((3 + 2) / 9)

    def test_exclude_self_singleton_is_zero(self):
        vectors = {"a": {"x": 1.0}}
        assert cluster_similarity(["a"], ["a"], vectors, include_self_pairs=False) == 0.0

    def test_zero_vector_member(self):
        vectors = {"a": {"x": 1.0}, "z": {}}
        value = cluster_similarity(["a", "z"], ["a", "z"], vectors)
        # pairs: (a,a)=1, (a,z)=0, (z,a)=0, (z,z)=0
        assert value == pytest.approx(0.25)

    def test_empty_cluster_rejected(self):
        with pytest.raises(ValueError):
            cluster_similarity([], ["a"], {"a": {"x": 1.0}})

    def test_missing_vector_rejected(self):
        with pytest.raises(ValueError, match="ghost"):
            cluster_similarity(["ghost"], ["ghost"], {})


class TestSimilarityMatrix:
    def test_single_cluster(self):
        clustering = Clustering(assignment={"a": 0, "b": 0}, k=1)
        vectors = {"a": {"x": 1.0}, "b": {"x": 3.0}}
        matrix = similarity_matrix(clustering, vectors)
        assert matrix.k == 1
        assert matrix.values[0][0] == pytest.approx(1.0)

    def test_duplicate_clusters_off_diagonal_equals_diagonal(self):
        vectors = {"a": {"x": 1.0}, "b": {"x": 2.0}, "c": {"x": 1.0}, "d": {"x": 2.0}}
        clustering = Clustering(assignment={"a": 0, "b": 0, "c": 1, "d": 1}, k=2)
        matrix = similarity_matrix(clustering, vectors)
        assert matrix.values[0][1] == pytest.approx(matrix.values[0][0])

    def test_disjoint_vocabulary_clusters_are_orthogonal(self):
        vectors = {
            "a": {"x": 1.0},
            "b": {"x": 2.0},
            "c": {"y": 1.0},
            "d": {"z": 2.0, "w": 1.0},
        }
        clustering = Clustering(assignment={"a": 0, "b": 0, "c": 1, "d": 2}, k=3)
        matrix = similarity_matrix(clustering, vectors)
        assert matrix.values[0][1] == 0.0
        assert matrix.values[0][2] == 0.0
        assert matrix.values[1][2] == 0.0

    def test_empty_clusters_dropped_with_renumbering(self):
        clustering = Clustering(assignment={"a": 0, "b": 3}, k=5)
        vectors = {"a": {"x": 1.0}, "b": {"y": 1.0}}
        matrix = similarity_matrix(clustering, vectors)
        assert matrix.k == 2
        assert matrix.cluster_ids == (0, 3)

    def test_mirrored_exactly(self):
        rng = random.Random(5)
        vectors = random_vectors(rng, 12)
        assignment = {d: rng.randrange(3) for d in vectors}
        clustering = Clustering(assignment=assignment, k=3)
        matrix = similarity_matrix(clustering, vectors)
        for i in range(matrix.k):
            for j in range(matrix.k):
                assert matrix.values[i][j] == matrix.values[j][i]

    def test_validation(self):
        with pytest.raises(ValueError):
            SimilarityMatrix(values=((0.5, 0.1), (0.4, 0.5)), cluster_ids=(0, 1))
        with pytest.raises(ValueError):
            SimilarityMatrix(values=((1.5,),), cluster_ids=(0,))
        with pytest.raises(ValueError):
            SimilarityMatrix(values=(), cluster_ids=())


class TestSummarize:
    def test_perfect_separation(self):
        matrix = SimilarityMatrix(values=((1.0, 0.0), (0.0, 1.0)), cluster_ids=(0, 1))
        assert summarize(matrix) == (1.0, 0.0)

    def test_constant_matrix(self):
        c = 0.42
        matrix = SimilarityMatrix(
            values=((c, c, c), (c, c, c), (c, c, c)), cluster_ids=(0, 1, 2)
        )
        intra, inter = summarize(matrix)
        assert intra == pytest.approx(c)
        assert inter == pytest.approx(c)

    def test_single_cluster_has_no_inter(self):
        matrix = SimilarityMatrix(values=((0.8,),), cluster_ids=(0,))
        assert summarize(matrix) == (0.8, None)


class TestCrossTab:
    def test_single_cell(self):
        clustering = Clustering(assignment={"a": 0, "b": 0}, k=1)
        labels = {"a": NEWS, "b": NEWS}
        tab = crosstab(labels, clustering)
        assert tab.counts[NEWS.order][0] == 2
        assert tab.column_pct[NEWS.order][0] == 100.0
        assert tab.row_pct[NEWS.order][0] == 100.0
        assert tab.total == 2

    def test_uniform_two_by_two(self):
        clustering = Clustering(
            assignment={"a": 0, "b": 1, "c": 0, "d": 1}, k=2
        )
        labels = {"a": NEWS, "b": NEWS, "c": JOKE, "d": JOKE}
        tab = crosstab(labels, clustering)
        for cls in (NEWS, JOKE):
            for col in range(2):
                assert tab.column_pct[cls.order][col] == pytest.approx(50.0)
                assert tab.row_pct[cls.order][col] == pytest.approx(50.0)

    def test_percentages_conserve_mass(self):
        rng = random.Random(31)
        assignment = {f"d{i}": rng.randrange(4) for i in range(60)}
        labels = {d: rng.choice(list(ClassLabel)) for d in assignment}
        tab = crosstab(labels, Clustering(assignment=assignment, k=4))
        for col in range(tab.k):
            if col in tab.empty_columns:
                continue
            col_sum = sum(tab.column_pct[r][col] for r in range(4))
            assert col_sum == pytest.approx(100.0, abs=1e-6)
        for r, cls in enumerate(ClassLabel):
            if cls in tab.empty_rows:
                continue
            assert sum(tab.row_pct[r]) == pytest.approx(100.0, abs=1e-6)
        assert tab.total == 60

    def test_empty_column_flagged_and_zero(self):
        clustering = Clustering(assignment={"a": 0}, k=3)
        tab = crosstab({"a": SICK}, clustering)
        assert tab.empty_columns == (1, 2)
        assert all(tab.column_pct[r][1] == 0.0 for r in range(4))
        assert JOKE in tab.empty_rows

    def test_unlabeled_document_rejected(self):
        clustering = Clustering(assignment={"a": 0, "mystery": 0}, k=1)
        with pytest.raises(ValueError, match="mystery"):
            crosstab({"a": NEWS}, clustering)

    def test_merging_clusters_preserves_row_totals(self):
        rng = random.Random(7)
        assignment = {f"d{i}": rng.randrange(3) for i in range(40)}
        labels = {d: rng.choice(list(ClassLabel)) for d in assignment}
        before = crosstab(labels, Clustering(assignment=assignment, k=3))
        merged_assignment = {d: min(c, 1) for d, c in assignment.items()}
        after = crosstab(labels, Clustering(assignment=merged_assignment, k=2))
        for r in range(4):
            assert sum(before.counts[r]) == sum(after.counts[r])


class TestEmission:
    def _tab(self):
        clustering = Clustering(
            assignment={"a": 0, "b": 0, "c": 1, "d": 1, "e": 1}, k=2
        )
        labels = {"a": NEWS, "b": JOKE, "c": NEWS, "d": FOCUS, "e": SICK}
        return crosstab(labels, clustering)

    def test_profile_columns_total_100(self, tmp_path):
        path = tmp_path / "profile.csv"
        write_cluster_profile_csv(self._tab(), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "class,cluster_0,cluster_1"
        assert lines[1].startswith("News,50.0,")
        assert lines[-1] == "Total,100.0,100.0"

    def test_scatter_rows_total_100(self, tmp_path):
        path = tmp_path / "scatter.csv"
        write_class_scatter_csv(self._tab(), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "class,cluster_0,cluster_1,Total"
        assert lines[1] == "News,50.0,50.0,100.0"

    def test_counts_totals(self, tmp_path):
        path = tmp_path / "counts.csv"
        write_counts_csv(self._tab(), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[-1] == "Total,2,3,5"

    def test_similarity_csv(self, tmp_path):
        matrix = SimilarityMatrix(
            values=((1.0, 0.25), (0.25, 0.75)), cluster_ids=(0, 2)
        )
        path = tmp_path / "sim.csv"
        write_similarity_csv(matrix, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "cluster,cluster_0,cluster_2"
        assert lines[1] == "cluster_0,1.000000,0.250000"

    def test_heatmap_svg_shades_by_value(self, tmp_path):
        matrix = SimilarityMatrix(
            values=((1.0, 0.0), (0.0, 0.5)), cluster_ids=(0, 1)
        )
        path = tmp_path / "heat.svg"
        write_heatmap_svg(matrix, path)
        content = path.read_text(encoding="utf-8")
        root = ET.fromstring(content)
        assert root.tag.endswith("svg")
        # max value paints black, zero paints white
        assert 'fill="rgb(0,0,0)"' in content
        assert 'fill="rgb(255,255,255)"' in content
