"""End-to-end training and inference: embeddings -> bands -> N-grams -> DFT -> trees."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from gwpt import accounting, dft, gbdt
from gwpt.config import RunConfig
from gwpt.corpus_io import TagSet
from gwpt.embeddings import EmbeddedSentence
from gwpt.errors import DimensionError, GwptError, StageError
from gwpt.features import FeaturePipeline, fit_pipeline, transform_corpus
from gwpt.frequency import BandPartition, FrequencyProfile, frequency_profile, partition_bands

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tagger:
    tagset: TagSet
    profile: FrequencyProfile
    partition: BandPartition
    pipeline: FeaturePipeline
    ranking: dft.DftRanking
    selected: np.ndarray
    model: gbdt.GbdtModel
    config: dict[str, str] = field(default_factory=dict)
    fingerprint: str = ""

    @property
    def embedding_dim(self) -> int:
        return self.partition.dim

    def features(self, corpus: Sequence[EmbeddedSentence]) -> np.ndarray:
        for sent in corpus:
            if sent.dim != self.embedding_dim:
                raise DimensionError(
                    f"embedding dim {sent.dim} does not match the model's {self.embedding_dim}"
                )
        return transform_corpus(corpus, self.pipeline)[:, self.selected]

    def predict_ids(self, corpus: Sequence[EmbeddedSentence]) -> list[np.ndarray]:
        if not corpus:
            return []
        flat = self.model.predict_batch(self.features(corpus))
        bounds = np.cumsum([len(s) for s in corpus])[:-1]
        return np.split(flat, bounds)

    def tag(self, corpus: Sequence[EmbeddedSentence]) -> list[list[str]]:
        return [self.tagset.decode(ids) for ids in self.predict_ids(corpus)]

    def account(self) -> accounting.AccountTable:
        return accounting.account(accounting.spec_from_model(self.pipeline, self.model))


@dataclass
class EvalReport:
    correct: int
    total: int
    confusion: dict[tuple[str, str], int]

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "correct": self.correct,
            "total": self.total,
            "confusion": [
                {"gold": g, "pred": p, "count": n}
                for (g, p), n in sorted(self.confusion.items())
            ],
        }


def evaluate(gold: Sequence[Sequence[str]], pred: Sequence[Sequence[str]]) -> EvalReport:
    confusion: Counter = Counter()
    correct = total = 0
    for g_sent, p_sent in zip(gold, pred, strict=True):
        for g, p in zip(g_sent, p_sent, strict=True):
            confusion[(g, p)] += 1
            correct += g == p
            total += 1
    return EvalReport(correct, total, dict(confusion))


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (GwptError, ValueError) as exc:
        raise StageError(name, exc) from exc


def _labels(corpus: Sequence[EmbeddedSentence], tagset: TagSet) -> np.ndarray:
    ids = []
    for sent in corpus:
        if sent.tags is None:
            raise GwptError("untagged sentence in supervised data")
        ids.extend(tagset.encode(sent.tags))
    return np.asarray(ids, dtype=np.int64)


def train(config: RunConfig, train_corpus: Sequence[EmbeddedSentence],
          dev_corpus: Sequence[EmbeddedSentence] | None = None,
          tagset: TagSet | None = None) -> tuple[Tagger, dict]:
    """Fit every stage on embedded training sentences.

    Returns the tagger and a report dict with accuracies and complexity numbers.
    """
    if not train_corpus:
        raise StageError("corpus", GwptError("empty training corpus"))
    if tagset is None:
        if any(s.tags is None for s in train_corpus):
            raise StageError("tagset", GwptError("untagged sentence in training data"))
        tagset = TagSet(tuple(sorted({t for s in train_corpus for t in s.tags})))
    dims = {s.dim for s in train_corpus} | {s.dim for s in (dev_corpus or [])}
    if len(dims) != 1:
        raise StageError("embed", DimensionError(f"mixed embedding dims {sorted(dims)}"))

    profile = _stage("frequency", frequency_profile, train_corpus)
    partition = _stage("bands", partition_bands, profile, config.bands)
    logger.info("bands: low=%d mid=%d high=%d", len(partition.low), len(partition.mid), len(partition.high))
    pipeline = _stage("features", fit_pipeline, train_corpus, partition, config.ngrams, config.pca_energy)
    if pipeline.output_dim == 0:
        raise StageError("features", GwptError("feature pipeline produces no features"))

    x_train = _stage("features", transform_corpus, train_corpus, pipeline)
    y_train = _stage("labels", _labels, train_corpus, tagset)

    rows = dft.balanced_subsample(y_train, dft.MAX_DFT_SAMPLES, config.seed)
    ranking = _stage("dft", dft.rank_features, x_train[rows], y_train[rows], config.dft_grid, len(tagset))
    k = config.dft_k
    if k > pipeline.output_dim:
        logger.warning("dft_k=%d exceeds the %d available features; keeping all", k, pipeline.output_dim)
        k = pipeline.output_dim
    selected = _stage("dft", dft.select_top_k, ranking, k)
    x_sel = x_train[:, selected]

    validation = None
    if dev_corpus:
        x_dev = _stage("features", transform_corpus, dev_corpus, pipeline)[:, selected]
        y_dev = _stage("labels", _labels, dev_corpus, tagset)
        validation = (x_dev, y_dev)
    model = _stage("boost", gbdt.fit, x_sel, y_train, config.boost, len(tagset), validation)

    tagger = Tagger(tagset, profile, partition, pipeline, ranking, selected, model,
                    config.to_flat(), config.fingerprint())
    table = tagger.account()
    report = {
        "train_tokens": int(len(y_train)),
        "train_accuracy": float(np.mean(model.predict_batch(x_sel) == y_train)),
        "dev_accuracy": None,
        "n_tags": len(tagset),
        "bands": {"low": len(partition.low), "mid": len(partition.mid), "high": len(partition.high)},
        "band_cuts": list(partition.cuts),
        "features_before_dft": pipeline.output_dim,
        "features_selected": int(len(selected)),
        "trees_per_class": model.n_trees_per_class,
        "params": table.row("Total").params,
        "flops": table.row("Total").flops,
        "xgboost_params": table.row("XGBoost").params,
        "xgboost_flops": table.row("XGBoost").flops,
    }
    if validation is not None:
        report["dev_accuracy"] = float(np.mean(model.predict_batch(validation[0]) == validation[1]))
    return tagger, report
