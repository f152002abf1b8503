"""Command line entry points.

Subcommands:
    synth             generate a labeled synthetic corpus from a spec file
    prepare           split a corpus into per-morbidity binary datasets
    train-embeddings  train skip-gram vectors on a corpus and save them
    run               run the full cross-validated comparison
    report            re-render report tables from a raw.jsonl file

Relative --out paths resolve against $MORBENCH_DATA_DIR when it is set.
Exit codes: 0 success, 1 internal error, 2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from morbench import __version__
from morbench.corpus import (
    MORBIDITIES,
    build_binary_dataset,
    generate_synthetic_corpus,
    load_corpus,
    merge_partitions,
    summarize,
    synthetic_spec_from_dict,
    write_corpus,
)
from morbench.embeddings import SkipgramConfig, save_vectors, train_skipgram
from morbench.errors import ConfigError, MorbenchError
from morbench.eval import (
    REPRESENTATIONS,
    CellResult,
    ExperimentConfig,
    ExperimentReport,
    FoldResult,
    config_from_dict,
    config_to_dict,
    default_config_dict,
    order_morbidities,
    raw_rows,
    render_report_csv,
    render_report_markdown,
    run_experiment,
)
from morbench.preprocess import build_vocabulary, normalize_text, tokenize


def _data_dir() -> Path:
    return Path(os.environ.get("MORBENCH_DATA_DIR", "."))


def _resolve_out(path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else _data_dir() / p


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_files(pairs: list[tuple[Path, str]]) -> None:
    """Write all files, or none: partially written sets are removed on error."""
    written: list[Path] = []
    try:
        for path, text in pairs:
            _atomic_write(path, text)
            written.append(path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def _load_notes(paths: list[str]):
    return merge_partitions([load_corpus(p) for p in paths])


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    try:
        raw = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read spec file {args.spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"spec file {args.spec} is not valid JSON: {exc}") from exc
    spec = synthetic_spec_from_dict(raw)
    notes = generate_synthetic_corpus(spec, args.seed)
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    write_corpus(notes, tmp)
    os.replace(tmp, out)
    print(f"wrote {len(notes)} notes for {len(spec.morbidities)} morbidities to {out}")
    return 0


def cmd_prepare(args) -> int:
    notes = _load_notes(args.corpus)
    present = sorted({m for note in notes for m in note.labels})
    morbidities = order_morbidities(set(MORBIDITIES) | set(present))
    outdir = _resolve_out(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    pairs: list[tuple[Path, str]] = []
    for m in morbidities:
        dataset = build_binary_dataset(notes, m)
        lines = [
            json.dumps(
                {
                    "note_id": r.note_id,
                    "text": r.text,
                    "label": r.label,
                    "source": r.source,
                },
                sort_keys=True,
                ensure_ascii=False,
            )
            for r in dataset.records
        ]
        body = "\n".join(lines) + ("\n" if lines else "")
        pairs.append((outdir / f"dataset_{_slug(m)}.jsonl", body))

    summary = summarize(notes, list(morbidities))
    csv_lines = ["morbidity,total,positive,negative,excluded"]
    for row in summary.rows:
        csv_lines.append(f"{row.morbidity},{row.total},{row.positive},{row.negative},{row.excluded}")
    pairs.append((outdir / "summary.csv", "\n".join(csv_lines) + "\n"))
    _write_files(pairs)

    width = max(len(r.morbidity) for r in summary.rows)
    print(f"{'morbidity'.ljust(width)}  total  positive  negative  excluded")
    for row in summary.rows:
        print(
            f"{row.morbidity.ljust(width)}  {row.total:5d}  {row.positive:8d}"
            f"  {row.negative:8d}  {row.excluded:8d}"
        )
    print(f"wrote {len(morbidities)} dataset files and summary.csv to {outdir}")
    return 0


def cmd_train_embeddings(args) -> int:
    notes = _load_notes(args.corpus)
    config = _load_config(args.config)
    token_lists = [tokenize(normalize_text(note.text)) for note in notes]
    vocab = build_vocabulary(token_lists)
    sg = SkipgramConfig(
        dim=config.embed_dim,
        window=config.sg_window,
        epochs=config.sg_epochs,
        negatives=config.sg_negatives,
        learning_rate=config.sg_lr,
        seed=args.seed,
    )
    table, losses = train_skipgram(token_lists, vocab, sg)
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    save_vectors(table, vocab, tmp)
    os.replace(tmp, out)
    final = f"{losses[-1]:.6f}" if losses else "n/a"
    print(
        f"trained {len(vocab)} x {sg.dim} vectors over {sg.epochs} epochs"
        f" (final mean pair loss {final}); wrote {out}"
    )
    return 0


def cmd_run(args) -> int:
    if args.print_default_config:
        print(json.dumps(default_config_dict(), indent=2, sort_keys=True))
        return 0
    if not args.corpus:
        raise ConfigError("a corpus file is required (or use --print-default-config)")
    config = _load_config(args.config)
    notes = _load_notes(args.corpus)
    names = (
        config.morbidities
        if config.morbidities is not None
        else tuple(sorted({m for note in notes for m in note.labels}))
    )
    if not names:
        raise ConfigError("the corpus has no morbidity labels to evaluate")
    datasets = {m: build_binary_dataset(notes, m) for m in names}
    report = run_experiment(datasets, config, args.seed, jobs=args.jobs)

    outdir = _resolve_out(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    markdown = render_report_markdown(report)
    manifest = {
        "version": __version__,
        "seed": args.seed,
        "jobs": args.jobs,
        "corpus": list(args.corpus),
        "notes": len(notes),
        "config": config_to_dict(config),
        "cells": [
            {
                "morbidity": c.morbidity,
                "representation": c.representation,
                "mean_f1": c.mean_f1,
                "skipped": c.skipped,
                "seconds": round(c.seconds, 6),
            }
            for c in report.cells
        ],
    }
    _write_files(
        [
            (outdir / "report.md", markdown),
            (outdir / "report.csv", render_report_csv(report)),
            (outdir / "raw.jsonl", "\n".join(raw_rows(report)) + "\n"),
            (outdir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n"),
        ]
    )
    print(markdown, end="")
    print(f"wrote report.md, report.csv, raw.jsonl, manifest.json to {outdir}")
    return 0


def cmd_report(args) -> int:
    try:
        text = Path(args.raw).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {args.raw}: {exc}") from exc
    folds: dict[tuple[str, str], list[FoldResult]] = {}
    skipped: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            key = (row["morbidity"], row["representation"])
            if "skipped" in row:
                skipped[key] = row["skipped"]
            else:
                folds.setdefault(key, []).append(
                    FoldResult(
                        fold=row["fold"],
                        f1=row["f1"],
                        tp=row["tp"],
                        fp=row["fp"],
                        fn=row["fn"],
                        tn=row["tn"],
                    )
                )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"{args.raw} line {lineno}: bad raw row ({exc})") from exc

    keys = set(folds) | set(skipped)
    if not keys:
        raise ConfigError(f"{args.raw} holds no result rows")
    reps = tuple(r for r in REPRESENTATIONS if any(k[1] == r for k in keys))
    morbidities = order_morbidities({k[0] for k in keys})
    cells = []
    for m in morbidities:
        for rep in reps:
            key = (m, rep)
            if key in folds:
                ordered = tuple(sorted(folds[key], key=lambda fr: fr.fold))
                cells.append(CellResult(morbidity=m, representation=rep, folds=ordered))
            else:
                reason = skipped.get(key, "missing from raw rows")
                cells.append(CellResult(morbidity=m, representation=rep, skipped=reason))
    report = ExperimentReport(
        master_seed=0,
        config=ExperimentConfig(representations=reps),
        morbidities=morbidities,
        cells=tuple(cells),
    )
    markdown = render_report_markdown(report)
    outdir = _resolve_out(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_files(
        [
            (outdir / "report.md", markdown),
            (outdir / "report.csv", render_report_csv(report)),
        ]
    )
    print(markdown, end="")
    print(f"wrote report.md and report.csv to {outdir}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morbench",
        description="Per-morbidity text classification benchmarks on clinical-style notes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--spec", required=True, help="JSON spec with per-morbidity counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output corpus (JSON lines)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prepare", help="build per-morbidity binary datasets")
    p.add_argument("corpus", nargs="+", help="corpus files (JSON lines); partitions are merged")
    p.add_argument("--out", default="prepared", help="output directory")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train-embeddings", help="train skip-gram vectors on a corpus")
    p.add_argument("corpus", nargs="+", help="corpus files (JSON lines)")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output vector file")
    p.set_defaults(func=cmd_train_embeddings)

    p = sub.add_parser("run", help="run the cross-validated comparison")
    p.add_argument("corpus", nargs="*", help="corpus files (JSON lines)")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers over grid cells")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument(
        "--print-default-config",
        action="store_true",
        help="print the default config as JSON and exit",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="re-render tables from a raw.jsonl file")
    p.add_argument("raw", help="raw.jsonl produced by run")
    p.add_argument("--out", default="results", help="output directory")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MorbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and use the internal-error code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
