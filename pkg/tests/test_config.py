import pytest

from gwpt.config import PRESETS, RunConfig, from_flat, load_config, parse_flat, preset_config
from gwpt.errors import ConfigError


def test_fasttext_defaults():
    cfg = from_flat({})
    assert cfg.embedding_kind == "word"
    assert cfg.bands == (5, 260)
    assert cfg.ngrams.mid == (1, 2) and cfg.ngrams.high == (1, 2, 3)
    assert cfg.dft_k == 500
    assert cfg.boost.n_trees_per_class == 5000 and cfg.boost.max_depth == 3
    assert cfg.pca_energy == 0.99


def test_bert_defaults():
    cfg = from_flat({"embedding_kind": "contextual"})
    assert cfg.bands == (50, 750)
    assert cfg.ngrams.mid == (1,) and cfg.ngrams.high == (1, 2)
    assert cfg.dft_k == 700
    assert cfg.boost.n_trees_per_class == 4000


def test_presets_match_kind_defaults():
    assert preset_config("bert-ud") == from_flat({"embedding_kind": "contextual"})
    assert preset_config("fasttext-ud") == from_flat({})
    assert set(PRESETS) == {"fasttext-ud", "bert-ud"}


def test_parse_flat_comments_and_errors():
    assert parse_flat("a = 1  # note\n\n# c\nb=x\n") == {"a": "1", "b": "x"}
    with pytest.raises(ConfigError, match=":2:"):
        parse_flat("a = 1\nnonsense\n")


def test_unknown_key_and_bad_values():
    with pytest.raises(ConfigError, match="unknown"):
        from_flat({"colour": "red"})
    with pytest.raises(ConfigError):
        from_flat({"bands": "1,2,3"})
    with pytest.raises(ConfigError):
        from_flat({"n_trees": "many"})
    with pytest.raises(ConfigError):
        from_flat({"mid_ngrams": "3,1"})


def test_roundtrip_and_fingerprint(tmp_path):
    cfg = preset_config("fasttext-ud", bands="auto", seed=3, learning_rate=0.2)
    p = tmp_path / "run.cfg"
    p.write_text(cfg.dumps())
    again = load_config(p)
    assert again == cfg
    assert again.fingerprint() == cfg.fingerprint()
    assert cfg.replace(train="elsewhere.tsv").fingerprint() == cfg.fingerprint()
    assert cfg.replace(seed=4).fingerprint() != cfg.fingerprint()


def test_relative_paths_resolve_against_config_file(tmp_path):
    sub = tmp_path / "d"
    sub.mkdir()
    p = sub / "x.cfg"
    p.write_text("train = t.tsv\nembeddings = /abs/v.vec\n")
    cfg = load_config(p)
    assert cfg.train == str(sub / "t.tsv")
    assert cfg.embeddings == "/abs/v.vec"


def test_override_order(tmp_path):
    p = tmp_path / "x.cfg"
    p.write_text("dft_k = 10\nseed = 1\n")
    cfg = load_config(p, "bert-ud", {"seed": "2"})
    assert (cfg.dft_k, cfg.seed, cfg.embedding_kind) == (10, 2, "contextual")


def test_runconfig_validation():
    with pytest.raises(ConfigError):
        RunConfig(bands=(5, 2))
    with pytest.raises(ConfigError):
        RunConfig(pca_energy=0)
