import numpy as np
import pytest

from latred.data import (
    BinaryMatrix,
    ClassLabels,
    ExpressionMatrix,
    FactorMatrix,
    IngestError,
    Split,
    emit_csv,
    ingest_csv,
    make_splits,
    read_matrix_csv,
)


def _matrix(n=4, p=3, seed=0):
    rng = np.random.default_rng(seed)
    return ExpressionMatrix(
        rng.uniform(10, 100, size=(n, p)),
        tuple(f"s{i}" for i in range(n)),
        tuple(f"g{j}" for j in range(p)),
    )


class TestExpressionMatrix:
    def test_shape_and_ids(self):
        m = _matrix(4, 3)
        assert m.n_samples == 4
        assert m.n_genes == 3
        assert m.values.dtype == np.float64

    def test_id_count_mismatch(self):
        with pytest.raises(ValueError, match="sample ids"):
            ExpressionMatrix(np.ones((2, 2)), ("a",), ("g1", "g2"))
        with pytest.raises(ValueError, match="gene ids"):
            ExpressionMatrix(np.ones((2, 2)), ("a", "b"), ("g1",))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate sample"):
            ExpressionMatrix(np.ones((2, 2)), ("a", "a"), ("g1", "g2"))
        with pytest.raises(ValueError, match="duplicate gene"):
            ExpressionMatrix(np.ones((2, 2)), ("a", "b"), ("g", "g"))

    def test_nonfinite_rejected(self):
        vals = np.ones((2, 2))
        vals[0, 1] = np.nan
        with pytest.raises(ValueError, match="finite"):
            ExpressionMatrix(vals, ("a", "b"), ("g1", "g2"))

    def test_take_samples_keeps_alignment(self):
        m = _matrix(5, 3)
        sub = m.take_samples([4, 1])
        assert sub.sample_ids == ("s4", "s1")
        assert np.array_equal(sub.values, m.values[[4, 1]])

    def test_take_genes_keeps_alignment(self):
        m = _matrix(3, 5)
        sub = m.take_genes([2, 0])
        assert sub.gene_ids == ("g2", "g0")
        assert np.array_equal(sub.values, m.values[:, [2, 0]])


class TestClassLabels:
    def test_counts(self):
        y = ClassLabels([0, 1, 1, 0, 1], ("x", "y"))
        assert y.n_classes == 2
        assert np.array_equal(y.counts(), [2, 3])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            ClassLabels([0, 2], ("x", "y"))

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="two classes"):
            ClassLabels([0, 0], ("x",))

    def test_take(self):
        y = ClassLabels([0, 1, 1], ("x", "y"))
        assert np.array_equal(y.take([2, 0]).labels, [1, 0])


class TestSplit:
    def test_disjoint_required(self):
        with pytest.raises(ValueError, match="overlap"):
            Split((0, 1), (1, 2))

    def test_nonempty_required(self):
        with pytest.raises(ValueError, match="non-empty"):
            Split((), (1, 2))


class TestBinaryMatrix:
    def test_accepts_01(self):
        b = BinaryMatrix([[0, 1], [1, 0]])
        assert b.values.dtype == np.int8

    def test_rejects_other_values(self):
        with pytest.raises(ValueError, match="0 or 1"):
            BinaryMatrix([[0, 2]])


class TestFactorMatrix:
    def test_method_tag(self):
        f = FactorMatrix(np.zeros((2, 3)), "RM")
        assert f.n_factors == 3
        with pytest.raises(ValueError, match="method"):
            FactorMatrix(np.zeros((2, 3)), "ICA")

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            FactorMatrix(np.array([[np.inf, 0.0]]), "PCA")


class TestCsvRoundTrip:
    def test_emit_then_ingest_roundtrips(self, tmp_path):
        m = _matrix(6, 4, seed=3)
        y = ClassLabels([0, 1, 0, 1, 1, 0], ("neg", "pos"))
        mp, lp = tmp_path / "m.csv", tmp_path / "y.csv"
        emit_csv(m, mp, y, lp)
        m2, y2 = ingest_csv(mp, lp)
        # 12 significant digits in emit keep float64 round-trips tight
        assert np.allclose(m2.values, m.values, rtol=1e-11, atol=0)
        assert m2.sample_ids == m.sample_ids
        assert m2.gene_ids == m.gene_ids
        assert np.array_equal(y2.labels, y.labels)
        assert y2.class_names == y.class_names

    def test_class_index_order_is_first_appearance(self, tmp_path):
        mp = tmp_path / "m.csv"
        lp = tmp_path / "y.csv"
        mp.write_text("sample_id,g1\na,1\nb,2\nc,3\n")
        lp.write_text("sample_id,class\na,tumor\nb,normal\nc,tumor\n")
        _, y = ingest_csv(mp, lp)
        assert y.class_names == ("tumor", "normal")
        assert np.array_equal(y.labels, [0, 1, 0])

    def test_labels_order_independent_of_matrix(self, tmp_path):
        mp = tmp_path / "m.csv"
        lp = tmp_path / "y.csv"
        mp.write_text("sample_id,g1\na,1\nb,2\n")
        lp.write_text("sample_id,class\nb,x\na,y\n")
        _, y = ingest_csv(mp, lp)
        # aligned to matrix rows a, b even though the file lists b first
        assert y.class_names == ("x", "y")
        assert np.array_equal(y.labels, [1, 0])


class TestIngestErrors:
    def _write(self, tmp_path, matrix_text, labels_text="sample_id,class\na,x\nb,y\n"):
        mp = tmp_path / "m.csv"
        lp = tmp_path / "y.csv"
        mp.write_text(matrix_text)
        lp.write_text(labels_text)
        return mp, lp

    def test_dimension_mismatch(self, tmp_path):
        mp, lp = self._write(tmp_path, "sample_id,g1,g2\na,1\nb,2,3\n")
        with pytest.raises(IngestError, match="dimension mismatch at row 1"):
            ingest_csv(mp, lp)

    def test_non_numeric_cell(self, tmp_path):
        mp, lp = self._write(tmp_path, "sample_id,g1\na,oops\nb,2\n")
        with pytest.raises(IngestError, match=r"non-numeric cell at \(0,0\)"):
            ingest_csv(mp, lp)

    def test_non_finite_cell(self, tmp_path):
        mp, lp = self._write(tmp_path, "sample_id,g1\na,inf\nb,2\n")
        with pytest.raises(IngestError, match=r"non-finite value at \(0,0\)"):
            ingest_csv(mp, lp)

    def test_bad_matrix_header(self, tmp_path):
        mp, lp = self._write(tmp_path, "id,g1\na,1\nb,2\n")
        with pytest.raises(IngestError, match="sample_id"):
            ingest_csv(mp, lp)

    def test_bad_labels_header(self, tmp_path):
        mp, lp = self._write(tmp_path, "sample_id,g1\na,1\nb,2\n",
                             "sample,label\na,x\nb,y\n")
        with pytest.raises(IngestError, match="sample_id,class"):
            ingest_csv(mp, lp)

    def test_duplicate_label_row(self, tmp_path):
        mp, lp = self._write(tmp_path, "sample_id,g1\na,1\nb,2\n",
                             "sample_id,class\na,x\na,y\nb,x\n")
        with pytest.raises(IngestError, match="duplicate sample id in labels"):
            ingest_csv(mp, lp)

    def test_unknown_sample_in_labels(self, tmp_path):
        mp, lp = self._write(tmp_path, "sample_id,g1\na,1\nb,2\n",
                             "sample_id,class\na,x\nzz,y\n")
        with pytest.raises(IngestError, match="unknown sample in labels file: 'zz'"):
            ingest_csv(mp, lp)

    def test_sample_missing_label(self, tmp_path):
        mp, lp = self._write(tmp_path, "sample_id,g1\na,1\nb,2\n",
                             "sample_id,class\na,x\n")
        with pytest.raises(IngestError, match="sample missing a label: 'b'"):
            ingest_csv(mp, lp)

    def test_matrix_only_reader(self, tmp_path):
        mp = tmp_path / "m.csv"
        mp.write_text("sample_id,g1,g2\na,1,2\nb,3,4\n")
        m = read_matrix_csv(mp)
        assert m.n_samples == 2
        assert m.gene_ids == ("g1", "g2")


class TestMakeSplits:
    def _labels(self, n=20):
        return ClassLabels(np.tile([0, 1], n // 2), ("a", "b"))

    def test_sizes_and_disjointness(self):
        y = self._labels(20)
        splits = make_splits(20, 12, y, trials=7, seed=5)
        assert len(splits) == 7
        for sp in splits:
            assert len(sp.learn_indices) == 12
            assert len(sp.test_indices) == 8
            assert not set(sp.learn_indices) & set(sp.test_indices)
            assert sorted(sp.learn_indices + sp.test_indices) == list(range(20))

    def test_every_class_twice_in_learning(self):
        y = ClassLabels([0] * 17 + [1] * 3, ("a", "b"))
        splits = make_splits(20, 10, y, trials=200, seed=1)
        for sp in splits:
            counts = np.bincount(y.labels[list(sp.learn_indices)], minlength=2)
            assert counts.min() >= 2

    def test_trial_streams_are_independent_of_count(self):
        y = self._labels(20)
        a = make_splits(20, 12, y, trials=3, seed=5)
        b = make_splits(20, 12, y, trials=10, seed=5)
        # trial r depends on (seed, r) only, not on how many trials follow
        assert a == b[:3]

    def test_seed_changes_splits(self):
        y = self._labels(20)
        assert make_splits(20, 12, y, 5, seed=1) != make_splits(20, 12, y, 5, seed=2)

    def test_infeasible_n_learn_rejected(self):
        y = ClassLabels([0, 0, 1, 1], ("a", "b"))
        with pytest.raises(ValueError, match="infeasible"):
            make_splits(4, 3, y, 1, seed=0)  # class b cannot appear twice

    def test_learning_indices_sorted(self):
        y = self._labels(20)
        for sp in make_splits(20, 12, y, 5, seed=9):
            assert list(sp.learn_indices) == sorted(sp.learn_indices)
