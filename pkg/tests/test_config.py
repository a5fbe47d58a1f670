import pytest

from prognote.config import PipelineConfig, load_config
from prognote.exceptions import ConfigError


def write_config(tmp_path, body):
    (tmp_path / "notes.jsonl").write_text("")
    (tmp_path / "outcomes.jsonl").write_text("")
    path = tmp_path / "pipeline.toml"
    path.write_text(body)
    return path


class TestLoadConfig:
    def test_minimal_config_gets_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path, ""))
        assert cfg.embedding.dim == 100
        assert cfg.train.hidden_size == 64
        assert cfg.cohort.horizon_days == 90
        assert cfg.cohort.split == (0.7, 0.15, 0.15)
        assert cfg.train.class_weights is None

    def test_overrides_applied(self, tmp_path):
        cfg = load_config(write_config(tmp_path, """
[embedding]
dim = 25

[train]
lr = 0.5
class_weights = [1.0, 1.0]

[cohort]
split = [0.6, 0.2, 0.2]
"""))
        assert cfg.embedding.dim == 25
        assert cfg.train.lr == 0.5
        assert cfg.train.class_weights == (1.0, 1.0)
        assert cfg.cohort.split == (0.6, 0.2, 0.2)

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match=r"unknown section \[modle\]"):
            load_config(write_config(tmp_path, "[modle]\nx = 1\n"))

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key 'dims'"):
            load_config(write_config(tmp_path, "[embedding]\ndims = 5\n"))

    def test_missing_notes_file_rejected(self, tmp_path):
        path = write_config(tmp_path, "")
        (tmp_path / "notes.jsonl").unlink()
        with pytest.raises(ConfigError, match="notes"):
            load_config(path)

    def test_invalid_toml_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="invalid TOML"):
            load_config(write_config(tmp_path, "embedding = [unterminated\n"))

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.toml")

    def test_relative_paths_resolved_against_config_dir(self, tmp_path):
        cfg = load_config(write_config(tmp_path, ""))
        assert cfg.notes_path == tmp_path / "notes.jsonl"


class TestDigest:
    def test_digest_stable_and_path_independent(self, tmp_path):
        a = PipelineConfig(base_dir=tmp_path / "one")
        b = PipelineConfig(base_dir=tmp_path / "two")
        assert a.digest() == b.digest()

    def test_digest_changes_with_hyperparameters(self):
        a = PipelineConfig()
        b = PipelineConfig()
        b.train.lr = 0.123
        assert a.digest() != b.digest()
