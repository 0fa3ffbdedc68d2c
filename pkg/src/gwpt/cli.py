"""``gwpt`` command line: train, tag, eval, account, inspect.

Exit codes: 0 ok, 1 internal error, 2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from gwpt import accounting, archive, tagger
from gwpt.config import PRESETS, RunConfig, load_config
from gwpt.corpus_io import TaggedSentence, read_corpus, write_tsv
from gwpt.embeddings import (
    corpus_vocabulary,
    embed_corpus,
    load_subword_map,
    load_token_embeddings,
    load_word_vectors,
)
from gwpt.errors import ConfigError, DimensionError, GwptError, UnknownTagError

logger = logging.getLogger("gwpt")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class InputError(GwptError):
    """Unreadable or missing input file."""


def _open_text(path: str, what: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {what} {path}: {exc.strerror}") from None


def _read_corpus(path: str, fmt: str) -> list[TaggedSentence]:
    if not Path(path).is_file():
        raise InputError(f"cannot read corpus {path}: no such file")
    return read_corpus(path, None if fmt == "auto" else fmt)


def _load_source(path: str | None, kind: str, sentences, subwords_path: str | None = None):
    if path is None:
        raise ConfigError("no embedding source given (--embeddings or 'embeddings' in the config)")
    subwords = None
    if subwords_path is not None:
        with _open_text(subwords_path, "subword map") as fh:
            subwords = load_subword_map(fh)
    with _open_text(path, "embedding file") as fh:
        if kind == "contextual":
            return load_token_embeddings(fh, source=path), subwords
        vocab = corpus_vocabulary(sentences, subwords)
        return load_word_vectors(fh, vocab_filter=vocab, source=path), subwords


def _embed(sentences, path, kind, oov_policy, subwords_path=None):
    source, subwords = _load_source(path, kind, sentences, subwords_path)
    return embed_corpus(sentences, source, oov_policy, subwords)


def _overrides(args) -> dict[str, str]:
    out = {}
    for key in ("train", "dev", "test", "embeddings"):
        if getattr(args, key, None) is not None:
            out[key] = getattr(args, key)
    if getattr(args, "seed", None) is not None:
        out["seed"] = str(args.seed)
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _emit(args, text: str, payload) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _report_text(report: dict) -> str:
    rows = []
    for key, value in report.items():
        if isinstance(value, float):
            value = f"{value:.4f}"
        elif isinstance(value, dict):
            value = ", ".join(f"{k}={v}" for k, v in value.items())
        elif isinstance(value, list):
            value = ",".join(map(str, value))
        rows.append((key, str(value)))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def cmd_train(args) -> int:
    cfg: RunConfig = load_config(args.config, args.preset, _overrides(args))
    if cfg.train is None:
        raise ConfigError("no training corpus given (--train or 'train' in the config)")
    if args.out is None:
        raise ConfigError("--out is required for train")
    train_sents = _read_corpus(cfg.train, cfg.corpus_format)
    dev_sents = _read_corpus(cfg.dev, cfg.corpus_format) if cfg.dev else []
    source, subwords = _load_source(cfg.embeddings, cfg.embedding_kind,
                                    [*train_sents, *dev_sents], cfg.subwords)
    train_emb = embed_corpus(train_sents, source, cfg.oov_policy, subwords)
    dev_emb = embed_corpus(dev_sents, source, cfg.oov_policy, subwords) if dev_sents else None
    model, report = tagger.train(cfg, train_emb, dev_emb)
    # the archive is written only after every stage succeeded
    archive.save(model, args.out)
    report["archive"] = str(args.out)
    report["fingerprint"] = model.fingerprint
    _emit(args, _report_text(report), report)
    return EXIT_OK


def _kind_and_policy(model: tagger.Tagger, args) -> tuple[str, str]:
    kind = args.embedding_kind or model.config.get("embedding_kind", "word")
    policy = args.oov_policy or model.config.get("oov_policy", "lower-zero")
    return kind, policy


def cmd_tag(args) -> int:
    model = archive.load(args.model)
    sents = _read_corpus(args.input, args.format)
    out = sys.stdout
    if not sents:
        return EXIT_OK
    kind, policy = _kind_and_policy(model, args)
    embedded = _embed(sents, args.embeddings, kind, policy, args.subwords)
    pred = model.tag(embedded)
    out.write(write_tsv(sents, pred))
    return EXIT_OK


def cmd_eval(args) -> int:
    model = archive.load(args.model)
    gold = _read_corpus(args.input, args.format)
    for sent in gold:
        if sent.tags is None:
            raise GwptError("evaluation needs a tagged corpus")
        unseen = sorted(set(sent.tags) - set(model.tagset.symbols))
        if unseen:
            raise UnknownTagError(f"gold tag {unseen[0]!r} is not in the model tagset")
    kind, policy = _kind_and_policy(model, args)
    pred = model.tag(_embed(gold, args.embeddings, kind, policy, args.subwords)) if gold else []
    rep = tagger.evaluate([s.tags for s in gold], pred)
    lines = [f"accuracy  {rep.accuracy:.6f}  ({rep.correct}/{rep.total})", "", "gold\tpred\tcount"]
    lines += [f"{g}\t{p}\t{n}" for (g, p), n in sorted(rep.confusion.items())]
    _emit(args, "\n".join(lines), rep.as_dict())
    return EXIT_OK


def _parse_blocks(text: str) -> tuple[accounting.PcaBlockSpec, ...]:
    blocks = []
    for item in text.split(","):
        parts = item.strip().split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"block spec {item!r}: expected name:input_dim[:output_dim]")
        try:
            in_dim = int(parts[1])
            out_dim = int(parts[2]) if len(parts) == 3 and parts[2] not in ("", "-") else None
        except ValueError:
            raise ConfigError(f"block spec {item!r}: dimensions must be integers") from None
        blocks.append(accounting.PcaBlockSpec(parts[0], in_dim, out_dim))
    return tuple(blocks)


def cmd_account(args) -> int:
    if args.archive is not None:
        model = archive.load(args.archive)
        spec = accounting.spec_from_model(model.pipeline, model.model)
    else:
        if args.blocks is not None:
            base = accounting.AccountSpec(_parse_blocks(args.blocks), 0, 3, 1)
        else:
            name = args.preset or "fasttext-ud"
            if name not in accounting.PRESET_ACCOUNTS:
                raise ConfigError(
                    f"no fixed block layout for preset {name!r}; use --archive or --blocks "
                    f"(layouts available for: {', '.join(accounting.PRESET_ACCOUNTS)})"
                )
            base = accounting.PRESET_ACCOUNTS[name]
        spec = accounting.AccountSpec(
            base.blocks,
            base.n_trees if args.trees is None else args.trees,
            base.max_depth if args.depth is None else args.depth,
            base.n_classes if args.classes is None else args.classes,
        )
        if min(spec.n_trees, spec.max_depth, spec.n_classes) < 0:
            raise ConfigError("trees, depth and classes must be non-negative")
    table = accounting.account(spec)
    _emit(args, table.format(), table.as_dict() | {"bound_by_band": table.bound_by_band()})
    return EXIT_OK


def cmd_inspect(args) -> int:
    model = archive.load(args.model)
    what = args.what
    if what == "profile":
        labels = model.partition.labels()
        lines = ["dimension,avg_nsc,band"]
        lines += [f"{d},{model.profile.avg_nsc[d]!r},{labels[d]}" for d in range(model.partition.dim)]
        print("\n".join(lines))
    elif what == "layout":
        print(json.dumps(model.pipeline.layout(), indent=2))
    elif what == "dft":
        r = model.ranking
        chosen = np.zeros(len(r.loss), dtype=bool)
        chosen[model.selected] = True
        lines = ["feature,loss,split,constant,selected"]
        lines += [f"{i},{r.loss[i]!r},{r.split[i]!r},{int(r.constant[i])},{int(chosen[i])}"
                  for i in range(len(r.loss))]
        print("\n".join(lines))
    else:
        summary = {
            "fingerprint": model.fingerprint,
            "tagset": list(model.tagset.symbols),
            "embedding_dim": model.partition.dim,
            "band_cuts": list(model.partition.cuts),
            "features": model.pipeline.output_dim,
            "selected": int(len(model.selected)),
            "trees_per_class": model.model.n_trees_per_class,
            "config": model.config,
        }
        print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gwpt", description="Green POS tagger: train, tag, evaluate, account.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        sp.add_argument("--json", action="store_true", help="print the report as JSON")
        if config:
            sp.add_argument("--config", help="flat key = value config file")
            sp.add_argument("--preset", choices=sorted(PRESETS))
            sp.add_argument("--seed", type=int)

    def embedding_opts(sp):
        sp.add_argument("--embeddings", required=True, help="embedding source file")
        sp.add_argument("--embedding-kind", choices=("word", "contextual"))
        sp.add_argument("--oov-policy", choices=("zero", "lower-zero", "error"))
        sp.add_argument("--subwords")
        sp.add_argument("--format", default="auto", choices=("auto", "conllu", "tsv", "text"))

    t = sub.add_parser("train", help="fit a model and write an archive")
    common(t)
    t.add_argument("--train")
    t.add_argument("--dev")
    t.add_argument("--embeddings")
    t.add_argument("--out", help="archive path")
    t.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    t.set_defaults(func=cmd_train)

    g = sub.add_parser("tag", help="tag a corpus or tokenized text")
    g.add_argument("--model", required=True)
    g.add_argument("--input", required=True)
    embedding_opts(g)
    g.set_defaults(func=cmd_tag)

    e = sub.add_parser("eval", help="token accuracy against a gold corpus")
    common(e, config=False)
    e.add_argument("--model", required=True)
    e.add_argument("--input", required=True)
    embedding_opts(e)
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("account", help="parameter and FLOP table")
    common(a, config=False)
    a.add_argument("--preset", help="block layout preset (default fasttext-ud)")
    a.add_argument("--archive", help="account a trained model")
    a.add_argument("--blocks", help="name:input_dim[:output_dim],... (omit output_dim for raw blocks)")
    a.add_argument("--trees", type=int, help="trees per class")
    a.add_argument("--depth", type=int)
    a.add_argument("--classes", type=int)
    a.set_defaults(func=cmd_account)

    i = sub.add_parser("inspect", help="dump archive contents")
    i.add_argument("--model", required=True)
    i.add_argument("what", nargs="?", default="summary", choices=("summary", "profile", "layout", "dft"))
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (GwptError, DimensionError) as exc:
        print(f"gwpt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        where = f" {exc.filename}" if exc.filename else ""
        print(f"gwpt: error:{where} {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort handler, exit 1
        logger.exception("internal error")
        print(f"gwpt: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
