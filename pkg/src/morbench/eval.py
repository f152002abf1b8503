"""Cross-validated comparison of document representations per morbidity.

For every (morbidity, representation) cell: stratified k-fold split, fit the
representation on the training folds only (unless fit_scope="corpus"), train
the matching classifier, score the held-out fold with binary F1, and average
across folds. All randomness derives from sha256 of the master seed plus the
cell coordinates, so cells are independent and the report bytes do not depend
on execution order or worker count.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from morbench.corpus import MORBIDITIES, MorbidityDataset
from morbench.embeddings import SkipgramConfig, load_pretrained, random_table, train_skipgram
from morbench.errors import ConfigError
from morbench.models.lstm import BiLstmConfig, bilstm_forward, bilstm_train
from morbench.models.mlp import mlp_forward, mlp_train
from morbench.models.rmsprop import RmspropConfig
from morbench.models.svm import svm_decision, svm_train
from morbench.preprocess import (
    build_vocabulary,
    compute_max_len,
    encode,
    filter_for_tfidf,
    load_stopwords,
    normalize_text,
    pad_truncate,
    tokenize,
)
from morbench.tfidf import fit as tfidf_fit
from morbench.tfidf import normalize_row, transform

REPRESENTATIONS = (
    "tfidf_svm",
    "tfidf_mlp",
    "bilstm_random",
    "bilstm_pretrained_w2v",
    "bilstm_glove",
    "bilstm_domain_w2v",
)


def derive_seed(master_seed: int, *parts) -> int:
    """Stable per-cell seed: sha256 over the coordinate string, folded to 63 bits."""
    text = ":".join([str(master_seed), *map(str, parts)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


# ---------------------------------------------------------------------------
# metrics


def confusion_counts(y_true, y_pred) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) with class 1 positive."""
    t = np.asarray(y_true, dtype=int)
    p = np.asarray(y_pred, dtype=int)
    if t.shape != p.shape:
        raise ValueError("label/prediction length mismatch")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    tn = int(np.sum((t == 0) & (p == 0)))
    return tp, fp, fn, tn


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def f1_score(y_true, y_pred, weighted: bool = False) -> float:
    """Positive-class F1, or the support-weighted mean of both classes' F1."""
    tp, fp, fn, tn = confusion_counts(y_true, y_pred)
    if not weighted:
        return f1_from_counts(tp, fp, fn)
    n = tp + fp + fn + tn
    if n == 0:
        raise ValueError("cannot score an empty set")
    pos_support = tp + fn
    neg_support = fp + tn
    # class 0 as positive swaps tp<->tn and fp<->fn
    f1_pos = f1_from_counts(tp, fp, fn)
    f1_neg = f1_from_counts(tn, fn, fp)
    return (pos_support * f1_pos + neg_support * f1_neg) / n


# ---------------------------------------------------------------------------
# stratified folds


@dataclass(frozen=True)
class FoldSplit:
    fold: int
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]


def stratified_kfold(labels, k: int, seed: int) -> list[FoldSplit]:
    """Split indices so each class's counts differ by at most one across folds.

    Classes are shuffled independently and dealt round-robin, with the dealing
    position carried from one class to the next so total fold sizes stay
    within one of each other as well.
    """
    y = list(labels)
    n = len(y)
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} records")
    rng = np.random.default_rng(seed)
    test_sets: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in sorted(set(y)):
        members = [i for i, label in enumerate(y) if label == cls]
        members = [members[j] for j in rng.permutation(len(members))]
        for j, idx in enumerate(members):
            test_sets[(offset + j) % k].append(idx)
        offset = (offset + len(members)) % k
    splits = []
    for f in range(k):
        test = tuple(sorted(test_sets[f]))
        in_test = set(test)
        train = tuple(i for i in range(n) if i not in in_test)
        splits.append(FoldSplit(fold=f, train_indices=train, test_indices=test))
    return splits


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    k: int = 10
    weighted_f1: bool = False
    fit_scope: str = "fold"  # "fold": fit representations on training folds only
    representations: tuple[str, ...] = REPRESENTATIONS
    morbidities: tuple[str, ...] | None = None  # None: every morbidity in the corpus
    svm_lambda: float = 1e-4
    svm_epochs: int = 50
    mlp_hidden: int = 100
    mlp_epochs: int = 200
    mlp_batch: int = 32
    bilstm_hidden1: int = 64
    bilstm_hidden2: int = 64
    bilstm_epochs: int = 20
    bilstm_batch: int = 32
    embed_dim: int = 300
    sg_window: int = 5
    sg_epochs: int = 10
    sg_negatives: int = 5
    sg_lr: float = 0.025
    rms_rho: float = 0.9
    rms_lr: float = 0.001
    rms_eps: float = 1e-7
    word2vec_path: str | None = None
    glove_path: str | None = None

    def __post_init__(self):
        if self.fit_scope not in ("fold", "corpus"):
            raise ConfigError(f"eval.fit_scope must be 'fold' or 'corpus', got {self.fit_scope!r}")
        for rep in self.representations:
            if rep not in REPRESENTATIONS:
                raise ConfigError(
                    f"unknown representation {rep!r}; known: {', '.join(REPRESENTATIONS)}"
                )
        if self.k < 2:
            raise ConfigError(f"eval.k must be at least 2, got {self.k}")

    def rmsprop(self) -> RmspropConfig:
        return RmspropConfig(rho=self.rms_rho, learning_rate=self.rms_lr, eps=self.rms_eps)


# flat config-file key -> (field name, type coercion)
_CONFIG_KEYS: dict[str, tuple[str, type]] = {
    "eval.k": ("k", int),
    "eval.weighted_f1": ("weighted_f1", bool),
    "eval.fit_scope": ("fit_scope", str),
    "eval.representations": ("representations", tuple),
    "eval.morbidities": ("morbidities", tuple),
    "svm.lambda": ("svm_lambda", float),
    "svm.epochs": ("svm_epochs", int),
    "mlp.hidden_size": ("mlp_hidden", int),
    "mlp.epochs": ("mlp_epochs", int),
    "mlp.batch_size": ("mlp_batch", int),
    "bilstm.hidden1": ("bilstm_hidden1", int),
    "bilstm.hidden2": ("bilstm_hidden2", int),
    "bilstm.epochs": ("bilstm_epochs", int),
    "bilstm.batch_size": ("bilstm_batch", int),
    "embeddings.dim": ("embed_dim", int),
    "embeddings.word2vec_path": ("word2vec_path", str),
    "embeddings.glove_path": ("glove_path", str),
    "skipgram.window": ("sg_window", int),
    "skipgram.epochs": ("sg_epochs", int),
    "skipgram.negatives": ("sg_negatives", int),
    "skipgram.learning_rate": ("sg_lr", float),
    "rmsprop.rho": ("rms_rho", float),
    "rmsprop.learning_rate": ("rms_lr", float),
    "rmsprop.eps": ("rms_eps", float),
}


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from the flat {dotted_key: value} form used in files."""
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    kwargs = {}
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        name, kind = _CONFIG_KEYS[key]
        if value is None:
            kwargs[name] = None
            continue
        if kind is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"config key {key!r} must be true or false")
            kwargs[name] = value
        elif kind is tuple:
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise ConfigError(f"config key {key!r} must be a list of strings")
            kwargs[name] = tuple(value)
        elif kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"config key {key!r} must be an integer")
            kwargs[name] = value
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"config key {key!r} must be a number")
            kwargs[name] = float(value)
        else:
            if not isinstance(value, str):
                raise ConfigError(f"config key {key!r} must be a string")
            kwargs[name] = value
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:  # pragma: no cover - defensive
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    """Flatten a config back to the {dotted_key: value} file form."""
    out = {}
    for key, (name, _) in _CONFIG_KEYS.items():
        value = getattr(config, name)
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def default_config_dict() -> dict:
    """The flat form of the defaults, suitable for --print-default-config."""
    return config_to_dict(ExperimentConfig())


# ---------------------------------------------------------------------------
# per-cell experiment


@dataclass(frozen=True)
class FoldResult:
    fold: int
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class CellResult:
    morbidity: str
    representation: str
    folds: tuple[FoldResult, ...] = ()
    skipped: str | None = None  # reason the cell produced no score
    seconds: float = 0.0  # wall time; excluded from reports and raw rows

    @property
    def mean_f1(self) -> float | None:
        if self.skipped is not None:
            return None
        return float(np.mean([f.f1 for f in self.folds]))


def _dense_matrix(sparse_rows, width: int) -> np.ndarray:
    X = np.zeros((len(sparse_rows), width))
    for r, row in enumerate(sparse_rows):
        for col, weight in row:
            X[r, col] = weight
    return X


_STOPWORDS: frozenset | None = None


def _stopwords() -> frozenset:
    global _STOPWORDS
    if _STOPWORDS is None:
        _STOPWORDS = frozenset(load_stopwords())
    return _STOPWORDS


def _tfidf_fold(token_lists, fold, fit_scope):
    """Fit TF-IDF on the fit docs, return dense train and test matrices."""
    fit_docs = (
        token_lists
        if fit_scope == "corpus"
        else [token_lists[i] for i in fold.train_indices]
    )
    model = tfidf_fit(fit_docs)
    width = len(model.columns)
    train = _dense_matrix(
        [normalize_row(transform(token_lists[i], model)) for i in fold.train_indices], width
    )
    test = _dense_matrix(
        [normalize_row(transform(token_lists[i], model)) for i in fold.test_indices], width
    )
    return train, test


def _sequence_fold(token_lists, fold, fit_scope):
    """Vocabulary + length policy from the fit docs; padded index batches."""
    fit_docs = (
        token_lists
        if fit_scope == "corpus"
        else [token_lists[i] for i in fold.train_indices]
    )
    vocab = build_vocabulary(fit_docs)
    policy = compute_max_len([len(t) for t in fit_docs])

    def encode_one(i):
        return pad_truncate(encode(token_lists[i], vocab), policy).indices

    train = np.array([encode_one(i) for i in fold.train_indices], dtype=np.intp)
    test = np.array([encode_one(i) for i in fold.test_indices], dtype=np.intp)
    return vocab, policy, train, test


def _embedding_for(representation, vocab, train_tokens, config, seed):
    """Embedding table + trainability for one BiLSTM variant, or a skip reason."""
    if representation == "bilstm_random":
        return random_table(len(vocab), config.embed_dim, seed), True, None
    if representation == "bilstm_domain_w2v":
        sg = SkipgramConfig(
            dim=config.embed_dim,
            window=config.sg_window,
            epochs=config.sg_epochs,
            negatives=config.sg_negatives,
            learning_rate=config.sg_lr,
            seed=seed,
        )
        table, _ = train_skipgram(train_tokens, vocab, sg)
        return table, False, None
    path = config.word2vec_path if representation == "bilstm_pretrained_w2v" else config.glove_path
    if path is None:
        return None, False, f"no vector file configured for {representation}"
    table, _ = load_pretrained(path, vocab, config.embed_dim)
    return table, False, None


def run_cell(
    dataset: MorbidityDataset, representation: str, config: ExperimentConfig, master_seed: int
) -> CellResult:
    """Score one (morbidity, representation) cell; degenerate data yields a skip."""
    started = time.perf_counter()
    morbidity = dataset.morbidity
    labels = list(dataset.labels)
    n = len(labels)

    def skip(reason: str) -> CellResult:
        return CellResult(
            morbidity=morbidity,
            representation=representation,
            skipped=reason,
            seconds=time.perf_counter() - started,
        )

    if n < config.k:
        return skip(f"{n} records < {config.k} folds")
    counts = {c: labels.count(c) for c in (0, 1)}
    if min(counts.values()) < 2:
        return skip(f"class counts {counts[1]} positive / {counts[0]} negative; need >= 2 each")
    if representation in ("bilstm_pretrained_w2v", "bilstm_glove"):
        path = (
            config.word2vec_path
            if representation == "bilstm_pretrained_w2v"
            else config.glove_path
        )
        if path is None:
            return skip(f"no vector file configured for {representation}")

    token_lists = [tokenize(normalize_text(text)) for text in dataset.texts]
    if representation in ("tfidf_svm", "tfidf_mlp"):
        stop = _stopwords()
        token_lists = [filter_for_tfidf(tokens, stop) for tokens in token_lists]

    fold_seed = derive_seed(master_seed, morbidity, "folds")
    folds = stratified_kfold(labels, config.k, fold_seed)
    y = np.asarray(labels, dtype=int)

    results = []
    for fold in folds:
        seed = derive_seed(master_seed, morbidity, representation, fold.fold)
        y_train = y[list(fold.train_indices)]
        y_test = y[list(fold.test_indices)]

        if representation in ("tfidf_svm", "tfidf_mlp"):
            X_train, X_test = _tfidf_fold(token_lists, fold, config.fit_scope)
            if representation == "tfidf_svm":
                model = svm_train(
                    X_train, y_train, lam=config.svm_lambda, epochs=config.svm_epochs, seed=seed
                )
                scores = np.array([svm_decision(model, row) for row in X_test])
                y_pred = (scores >= 0.0).astype(int)
            else:
                model = mlp_train(
                    X_train,
                    y_train,
                    hidden_size=config.mlp_hidden,
                    epochs=config.mlp_epochs,
                    rmsprop=config.rmsprop(),
                    seed=seed,
                    batch_size=config.mlp_batch,
                )
                y_pred = (mlp_forward(model.params, X_test) >= 0.5).astype(int)
        else:
            vocab, policy, train_idx, test_idx = _sequence_fold(
                token_lists, fold, config.fit_scope
            )
            train_tokens = [token_lists[i] for i in fold.train_indices]
            table, trainable, reason = _embedding_for(
                representation, vocab, train_tokens, config, derive_seed(seed, "embed")
            )
            if reason is not None:
                return skip(reason)
            bconfig = BiLstmConfig(
                hidden1=config.bilstm_hidden1,
                hidden2=config.bilstm_hidden2,
                epochs=config.bilstm_epochs,
                batch_size=config.bilstm_batch,
                rmsprop=config.rmsprop(),
                train_embeddings=trainable,
            )
            model = bilstm_train(train_idx, y_train, table, bconfig, seed=seed)
            y_pred = (bilstm_forward(test_idx, model) >= 0.5).astype(int)

        tp, fp, fn, tn = confusion_counts(y_test, y_pred)
        f1 = f1_score(y_test, y_pred, weighted=config.weighted_f1)
        results.append(FoldResult(fold=fold.fold, f1=f1, tp=tp, fp=fp, fn=fn, tn=tn))

    return CellResult(
        morbidity=morbidity,
        representation=representation,
        folds=tuple(results),
        seconds=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# experiment over the full grid


@dataclass(frozen=True)
class ExperimentReport:
    master_seed: int
    config: ExperimentConfig
    morbidities: tuple[str, ...]
    cells: tuple[CellResult, ...]

    def cell(self, morbidity: str, representation: str) -> CellResult:
        for c in self.cells:
            if c.morbidity == morbidity and c.representation == representation:
                return c
        raise KeyError((morbidity, representation))

    def mean_over_morbidities(self, representation: str) -> float | None:
        values = [
            c.mean_f1
            for c in self.cells
            if c.representation == representation and c.mean_f1 is not None
        ]
        if not values:
            return None
        return float(np.mean(values))


def order_morbidities(names) -> tuple[str, ...]:
    """Canonical names in their fixed order first, anything else after, sorted."""
    known = [m for m in MORBIDITIES if m in names]
    extra = sorted(set(names) - set(MORBIDITIES))
    return tuple(known + extra)


def _cell_task(args):
    dataset, representation, config, master_seed = args
    return run_cell(dataset, representation, config, master_seed)


def run_experiment(
    datasets: dict[str, MorbidityDataset],
    config: ExperimentConfig,
    master_seed: int,
    jobs: int = 1,
) -> ExperimentReport:
    """Evaluate every configured (morbidity, representation) cell.

    Cells are independent given the master seed, so --jobs N produces the
    same report bytes as a sequential run.
    """
    names = config.morbidities if config.morbidities is not None else tuple(datasets)
    for name in names:
        if name not in datasets:
            raise ConfigError(f"morbidity {name!r} has no records in the corpus")
    morbidities = order_morbidities(names)
    tasks = [
        (datasets[m], rep, config, master_seed)
        for m in morbidities
        for rep in config.representations
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_cell_task, tasks, chunksize=1))
    else:
        cells = [_cell_task(t) for t in tasks]
    return ExperimentReport(
        master_seed=master_seed, config=config, morbidities=morbidities, cells=tuple(cells)
    )


# ---------------------------------------------------------------------------
# rendering


def _format_cell(value: float | None) -> str:
    return "n/a" if value is None else f"{100.0 * value:.2f}"


def render_report_markdown(report: ExperimentReport) -> str:
    reps = report.config.representations
    header = ["morbidity", *reps]
    rows = [header, ["---"] * len(header)]
    for m in report.morbidities:
        rows.append([m, *(_format_cell(report.cell(m, rep).mean_f1) for rep in reps)])
    rows.append(["Average", *(_format_cell(report.mean_over_morbidities(rep)) for rep in reps)])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for row in rows:
        cells = [
            row[i].ljust(widths[i]) if i == 0 else row[i].rjust(widths[i])
            for i in range(len(row))
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_report_csv(report: ExperimentReport) -> str:
    reps = report.config.representations
    lines = [",".join(["morbidity", *reps])]
    for m in report.morbidities:
        lines.append(",".join([m, *(_format_cell(report.cell(m, rep).mean_f1) for rep in reps)]))
    lines.append(
        ",".join(["Average", *(_format_cell(report.mean_over_morbidities(rep)) for rep in reps)])
    )
    return "\n".join(lines) + "\n"


def raw_rows(report: ExperimentReport) -> list[str]:
    """One JSON line per fold (or per skipped cell); byte-deterministic."""
    lines = []
    for cell in report.cells:
        if cell.skipped is not None:
            lines.append(
                json.dumps(
                    {
                        "morbidity": cell.morbidity,
                        "representation": cell.representation,
                        "skipped": cell.skipped,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
            continue
        for fr in cell.folds:
            lines.append(
                json.dumps(
                    {
                        "morbidity": cell.morbidity,
                        "representation": cell.representation,
                        "fold": fr.fold,
                        "f1": fr.f1,
                        "tp": fr.tp,
                        "fp": fr.fp,
                        "fn": fr.fn,
                        "tn": fr.tn,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
    return lines
