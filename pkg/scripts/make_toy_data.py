"""Regenerate the bundled toy fixtures under data/toy/.

    python3 scripts/make_toy_data.py [out_dir]
"""

import sys
from pathlib import Path

from gwpt import synthetic
from gwpt.corpus_io import write_tsv


def main(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    corpus = synthetic.make_word_vector_corpus(n_sentences=300, seed=7)
    sents = corpus.sentences
    splits = {"train": sents[:200], "dev": sents[200:250], "test": sents[250:]}
    for name, part in splits.items():
        (out / f"{name}.tsv").write_text(write_tsv(part), encoding="utf-8")
    (out / "vectors.vec").write_text(synthetic.word_vectors_text(corpus.source), encoding="utf-8")
    (out / "raw.txt").write_text(
        "".join(" ".join(s.tokens) + "\n" for s in splits["test"][:5]), encoding="utf-8"
    )
    (out / "toy.cfg").write_text(
        "# fastText-style settings scaled down for the toy corpus\n"
        "train = train.tsv\n"
        "dev = dev.tsv\n"
        "embeddings = vectors.vec\n"
        "embedding_kind = word\n"
        "bands = 5,260\n"
        "n_trees = 200\n"
        "learning_rate = 0.3\n"
        "patience = 20\n"
        "dft_k = 500\n",
        encoding="utf-8",
    )


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "toy")
