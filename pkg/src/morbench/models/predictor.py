"""Single-document prediction facade.

A PredictorHandle freezes one trained per-morbidity classifier together with
the exact preprocessing fitted alongside it, so raw text maps to a 0/1 call
without re-deriving any corpus statistics at prediction time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from morbench.models.lstm import BiLstmModel, bilstm_forward
from morbench.models.mlp import MlpModel, mlp_predict
from morbench.models.svm import SvmModel, svm_predict
from morbench.preprocess import (
    LengthPolicy,
    Vocabulary,
    encode,
    filter_for_tfidf,
    normalize_text,
    pad_truncate,
    tokenize,
)
from morbench.tfidf import TfidfModel, normalize_row, transform

KINDS = ("svm", "mlp", "bilstm")


@dataclass
class PredictorHandle:
    kind: str  # one of KINDS
    morbidity: str
    model: SvmModel | MlpModel | BiLstmModel
    # tf-idf path
    tfidf: TfidfModel | None = None
    stopwords: frozenset | None = None
    # sequence path
    vocab: Vocabulary | None = None
    length_policy: LengthPolicy | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown predictor kind {self.kind!r}")
        if self.kind in ("svm", "mlp"):
            if self.tfidf is None or self.stopwords is None:
                raise ValueError(f"{self.kind} predictor needs tfidf model and stopwords")
        else:
            if self.vocab is None or self.length_policy is None:
                raise ValueError("bilstm predictor needs vocabulary and length policy")


def _tfidf_row(handle: PredictorHandle, text: str) -> np.ndarray:
    tokens = filter_for_tfidf(tokenize(normalize_text(text)), handle.stopwords)
    sparse = normalize_row(transform(tokens, handle.tfidf))
    dense = np.zeros(len(handle.tfidf.columns))
    for col, weight in sparse:
        dense[col] = weight
    return dense


def predict(handle: PredictorHandle, text: str, morbidity: str) -> int:
    """Classify one raw note for the morbidity this handle was trained on."""
    if morbidity != handle.morbidity:
        raise ValueError(
            f"predictor was trained for {handle.morbidity!r}, asked about {morbidity!r}"
        )
    if handle.kind == "svm":
        return svm_predict(handle.model, _tfidf_row(handle, text))
    if handle.kind == "mlp":
        return mlp_predict(handle.model, _tfidf_row(handle, text))
    indices = encode(tokenize(normalize_text(text)), handle.vocab)
    doc = pad_truncate(indices, handle.length_policy)
    prob = bilstm_forward([doc], handle.model)[0]
    return 1 if prob >= 0.5 else 0
