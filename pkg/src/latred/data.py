"""Core data model: expression matrices, class labels, splits, factor scores.

All container types are immutable after construction and safe to share
across parallel workers; array fields are treated as read-only.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .rng import substream


class IngestError(ValueError):
    """Raised when a delimited input file violates the expected layout."""


@dataclass(frozen=True, eq=False)
class ExpressionMatrix:
    """Dense samples x genes matrix of expression intensities.

    Rows are samples, columns are genes; ids are aligned to the axes.
    """

    values: np.ndarray
    sample_ids: tuple
    gene_ids: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        if self.values.ndim != 2:
            raise ValueError("expression values must be a 2-D matrix")
        n, p = self.values.shape
        if n != len(self.sample_ids):
            raise ValueError(
                f"row count {n} != number of sample ids {len(self.sample_ids)}"
            )
        if p != len(self.gene_ids):
            raise ValueError(
                f"column count {p} != number of gene ids {len(self.gene_ids)}"
            )
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("duplicate sample ids")
        if len(set(self.gene_ids)) != len(self.gene_ids):
            raise ValueError("duplicate gene ids")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("expression values must be finite (no NaN/inf)")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]

    def take_samples(self, indices) -> "ExpressionMatrix":
        idx = np.asarray(indices, dtype=np.intp)
        return ExpressionMatrix(
            self.values[idx, :],
            tuple(self.sample_ids[i] for i in idx),
            self.gene_ids,
        )

    def take_genes(self, indices) -> "ExpressionMatrix":
        idx = np.asarray(indices, dtype=np.intp)
        return ExpressionMatrix(
            self.values[:, idx],
            self.sample_ids,
            tuple(self.gene_ids[i] for i in idx),
        )


@dataclass(frozen=True, eq=False)
class ClassLabels:
    """Class indices aligned to the sample axis of a companion matrix.

    Indices run 0..n_classes-1 in first-appearance order of the names in
    the labels file; index 1 is the "positive" class for ROC purposes.
    """

    labels: np.ndarray
    class_names: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if self.labels.ndim != 1:
            raise ValueError("labels must be a 1-D sequence")
        g = len(self.class_names)
        if g < 2:
            raise ValueError("need at least two classes")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= g):
            raise ValueError(f"class index out of range for {g} classes")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def take(self, indices) -> "ClassLabels":
        idx = np.asarray(indices, dtype=np.intp)
        return ClassLabels(self.labels[idx], self.class_names)

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class Split:
    """Disjoint learning/test partition of sample indices."""

    learn_indices: tuple
    test_indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "learn_indices", tuple(int(i) for i in self.learn_indices))
        object.__setattr__(self, "test_indices", tuple(int(i) for i in self.test_indices))
        if not self.learn_indices or not self.test_indices:
            raise ValueError("learning and test sets must both be non-empty")
        if set(self.learn_indices) & set(self.test_indices):
            raise ValueError("learning and test sets overlap")


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """0/1 discretized responses (samples x genes).

    ``thresholds`` records the binarization rule the values came from;
    generated response matrices carry ``None``.
    """

    values: np.ndarray
    thresholds: object = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("binary values must be a 2-D matrix")
        if not np.isin(v, (0, 1)).all():
            raise ValueError("binary matrix entries must all be 0 or 1")
        object.__setattr__(self, "values", v.astype(np.int8))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class FactorMatrix:
    """Latent factor scores (samples x K), tagged with the producing method."""

    scores: np.ndarray
    method: str

    def __post_init__(self):
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=np.float64))
        if self.scores.ndim != 2:
            raise ValueError("factor scores must be a 2-D matrix")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("factor scores must be finite")
        if self.method not in ("RM", "PCA"):
            raise ValueError(f"unknown factor method {self.method!r}")

    @property
    def n_factors(self) -> int:
        return self.scores.shape[1]


def _read_rows(path) -> list:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return [row for row in csv.reader(fh)]


def read_matrix_csv(matrix_path) -> ExpressionMatrix:
    """Read one matrix CSV: header ``sample_id,<gene_1>,...``, row per sample.

    Raises:
        IngestError: on dimension mismatch, duplicate ids, or non-numeric
            or non-finite cells.
    """
    rows = _read_rows(matrix_path)
    if not rows:
        raise IngestError(f"empty matrix file: {matrix_path}")
    header = rows[0]
    if not header or header[0] != "sample_id":
        raise IngestError("matrix header must start with 'sample_id'")
    gene_ids = tuple(header[1:])
    if not gene_ids:
        raise IngestError("matrix has no gene columns")
    if len(set(gene_ids)) != len(gene_ids):
        raise IngestError("duplicate gene id in matrix header")

    sample_ids = []
    data = np.empty((len(rows) - 1, len(gene_ids)), dtype=np.float64)
    for i, row in enumerate(rows[1:]):
        if len(row) != len(gene_ids) + 1:
            raise IngestError(
                f"dimension mismatch at row {i + 1}: expected "
                f"{len(gene_ids) + 1} cells, got {len(row)}"
            )
        sample_ids.append(row[0])
        for j, cell in enumerate(row[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise IngestError(f"non-numeric cell at ({i},{j})") from None
            if not np.isfinite(v):
                raise IngestError(f"non-finite value at ({i},{j})")
            data[i, j] = v
    if len(set(sample_ids)) != len(sample_ids):
        raise IngestError("duplicate sample id in matrix")
    return ExpressionMatrix(data, tuple(sample_ids), gene_ids)


def ingest_csv(matrix_path, labels_path):
    """Read a matrix CSV and a labels CSV into aligned containers.

    Matrix layout as in read_matrix_csv. Labels layout: header
    ``sample_id,class``; row order is irrelevant, but the class-name ->
    index mapping follows first appearance in the file.

    Returns:
        (ExpressionMatrix, ClassLabels) with labels aligned to matrix rows.

    Raises:
        IngestError: on any matrix defect, duplicate ids, unknown samples,
            or samples missing a label.
    """
    matrix = read_matrix_csv(matrix_path)
    sample_ids = list(matrix.sample_ids)

    lrows = _read_rows(labels_path)
    if not lrows or lrows[0][:2] != ["sample_id", "class"]:
        raise IngestError("labels header must be 'sample_id,class'")
    by_sample = {}
    class_names = []
    for i, row in enumerate(lrows[1:]):
        if len(row) != 2:
            raise IngestError(f"labels row {i + 1} must have exactly 2 cells")
        sid, cname = row
        if sid in by_sample:
            raise IngestError(f"duplicate sample id in labels file: {sid!r}")
        if sid not in set(sample_ids):
            raise IngestError(f"unknown sample in labels file: {sid!r}")
        if cname not in class_names:
            class_names.append(cname)
        by_sample[sid] = class_names.index(cname)
    missing = [sid for sid in sample_ids if sid not in by_sample]
    if missing:
        raise IngestError(f"sample missing a label: {missing[0]!r}")

    labels = ClassLabels(
        np.array([by_sample[sid] for sid in sample_ids]), tuple(class_names)
    )
    return matrix, labels


def emit_csv(matrix: ExpressionMatrix, matrix_path, labels: Optional[ClassLabels] = None,
             labels_path=None) -> None:
    """Write a matrix (and optionally labels) in the ingest_csv layout.

    Values are written with 12 significant digits so ingest(emit(m))
    round-trips numerically.
    """
    with open(matrix_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("sample_id," + ",".join(matrix.gene_ids) + "\n")
        for sid, row in zip(matrix.sample_ids, matrix.values):
            fh.write(sid + "," + ",".join(format(v, ".12g") for v in row) + "\n")
    if labels is not None:
        if labels_path is None:
            raise ValueError("labels_path required when labels are given")
        if len(labels.labels) != matrix.n_samples:
            raise ValueError("labels length does not match matrix")
        with open(labels_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("sample_id,class\n")
            for sid, y in zip(matrix.sample_ids, labels.labels):
                fh.write(f"{sid},{labels.class_names[y]}\n")


MAX_SPLIT_REDRAWS = 1000


def make_splits(n: int, n_learn: int, labels: ClassLabels, trials: int, seed: int):
    """Draw ``trials`` random learning/test partitions of ``n`` samples.

    Each split takes exactly ``n_learn`` learning samples uniformly without
    replacement; draws are rejected and retried until every class appears
    at least twice in the learning set. Trial r consumes an RNG stream
    derived from (seed, r), so the list is a pure function of its inputs.
    """
    if len(labels.labels) != n:
        raise ValueError("labels length does not match n")
    if not 2 <= n_learn <= n - 1:
        raise ValueError(f"n_learn must be in [2, {n - 1}], got {n_learn}")
    if trials < 1:
        raise ValueError("need at least one trial")
    counts = labels.counts()
    if counts.min() < 2 or n_learn < 2 * labels.n_classes:
        raise ValueError("n_learn infeasible given class counts")

    y = labels.labels
    splits = []
    for r in range(trials):
        rng = substream(seed, r)
        for _ in range(MAX_SPLIT_REDRAWS):
            learn = np.sort(rng.choice(n, size=n_learn, replace=False))
            if np.bincount(y[learn], minlength=labels.n_classes).min() >= 2:
                break
        else:
            raise ValueError(
                f"n_learn infeasible given class counts: no class-covering "
                f"split found in {MAX_SPLIT_REDRAWS} draws (trial {r})"
            )
        mask = np.ones(n, dtype=bool)
        mask[learn] = False
        splits.append(Split(tuple(learn), tuple(np.flatnonzero(mask))))
    return splits
