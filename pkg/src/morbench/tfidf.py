"""TF-IDF weighting over filtered token lists.

Weight of word w in document d: (count of w in d / tokens in d) * ln(N / n_w),
where N is the number of fitted documents and n_w the number of documents
containing w. No smoothing, no frequency cutoff: every distinct token of the
fitted corpus gets a column. Rows are normalized into [0, 1] by dividing by
the row maximum.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

# A sparse row: (column, weight) pairs sorted by column, one entry per
# distinct in-vocabulary word present in the document.
SparseRow = tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class TfidfModel:
    columns: dict[str, int]  # word -> column, lexicographic order
    doc_freq: dict[str, int]  # word -> number of documents containing it
    corpus_size: int

    @property
    def words(self) -> list[str]:
        return sorted(self.columns, key=self.columns.get)

    def idf(self, word: str) -> float:
        return math.log(self.corpus_size / self.doc_freq[word])


@dataclass(frozen=True)
class DocTermMatrix:
    n_columns: int
    rows: tuple[SparseRow, ...]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((len(self.rows), self.n_columns))
        for i, row in enumerate(self.rows):
            for col, weight in row:
                dense[i, col] = weight
        return dense


def fit(token_lists: list[list[str]]) -> TfidfModel:
    """Fit document frequencies over the full vocabulary of the corpus."""
    if not token_lists:
        raise ValueError("cannot fit TF-IDF on an empty corpus")
    doc_freq = Counter()
    for tokens in token_lists:
        doc_freq.update(set(tokens))
    columns = {w: i for i, w in enumerate(sorted(doc_freq))}
    return TfidfModel(columns=columns, doc_freq=dict(doc_freq), corpus_size=len(token_lists))


def transform(tokens: list[str], model: TfidfModel) -> SparseRow:
    """Weight one document; out-of-vocabulary words contribute nothing."""
    size = len(tokens)
    if size == 0:
        return ()
    counts = Counter(t for t in tokens if t in model.columns)
    row = [
        (model.columns[w], (c / size) * model.idf(w))
        for w, c in counts.items()
    ]
    return tuple(sorted(row))


def normalize_row(row: SparseRow) -> SparseRow:
    peak = max((w for _, w in row), default=0.0)
    if peak <= 0.0:
        return row
    return tuple((col, w / peak) for col, w in row)


def normalize_rows(matrix: DocTermMatrix) -> DocTermMatrix:
    """Scale each row by its maximum weight; all-zero rows stay unchanged."""
    return DocTermMatrix(
        n_columns=matrix.n_columns,
        rows=tuple(normalize_row(row) for row in matrix.rows),
    )


def fit_transform(token_lists: list[list[str]]) -> tuple[TfidfModel, DocTermMatrix]:
    model = fit(token_lists)
    raw = DocTermMatrix(
        n_columns=len(model.columns),
        rows=tuple(transform(tokens, model) for tokens in token_lists),
    )
    return model, normalize_rows(raw)


def matrix_to_csv(matrix: DocTermMatrix, model: TfidfModel) -> str:
    """Dense CSV dump (header = vocabulary words) for debugging."""
    lines = [",".join(model.words)]
    for row in matrix.rows:
        dense = [0.0] * matrix.n_columns
        for col, weight in row:
            dense[col] = weight
        lines.append(",".join(repr(v) for v in dense))
    return "\n".join(lines) + "\n"
