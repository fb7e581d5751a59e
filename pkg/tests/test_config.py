import pytest

from hintkit.config import DEFAULT_METRICS, RunConfig, load_run_config, parse_config_text


class TestParseConfigText:
    def test_types(self):
        text = """
        # endpoints
        chat_url = "http://localhost:8000/v1"
        offline = true
        n_hints = 7
        temperature = 0.2
        model = llama-3.1-8b
        """
        parsed = parse_config_text(text)
        assert parsed == {
            "chat_url": "http://localhost:8000/v1",
            "offline": True,
            "n_hints": 7,
            "temperature": 0.2,
            "model": "llama-3.1-8b",
        }

    def test_bad_line(self):
        with pytest.raises(ValueError):
            parse_config_text("this is not a key value line")


class TestLoadRunConfig:
    def test_defaults(self):
        cfg = load_run_config({}, env={})
        assert cfg.n_hints == 5
        assert cfg.metrics == DEFAULT_METRICS
        assert cfg.offline is False

    def test_file_values(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text('chat_url = "http://file:1"\nn_hints = 3\n')
        cfg = load_run_config({}, config_path=path, env={})
        assert cfg.chat_url == "http://file:1"
        assert cfg.n_hints == 3

    def test_env_beats_file(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text('chat_url = "http://file:1"\n')
        cfg = load_run_config({}, config_path=path, env={"HINTKIT_CHAT_URL": "http://env:2"})
        assert cfg.chat_url == "http://env:2"

    def test_flag_beats_env(self, tmp_path):
        cfg = load_run_config({"chat_url": "http://flag:3"},
                              env={"HINTKIT_CHAT_URL": "http://env:2"})
        assert cfg.chat_url == "http://flag:3"

    def test_offline_env_flag(self):
        cfg = load_run_config({}, env={"HINTKIT_OFFLINE": "1"})
        assert cfg.offline is True

    def test_env_config_path(self, tmp_path):
        path = tmp_path / "elsewhere.toml"
        path.write_text("n_hints = 9\n")
        cfg = load_run_config({}, env={"HINTKIT_CONFIG": str(path)})
        assert cfg.n_hints == 9

    def test_unknown_file_key_rejected(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text("no_such_option = 1\n")
        with pytest.raises(ValueError):
            load_run_config({}, config_path=path, env={})

    def test_cache_dir_resolution(self, tmp_path):
        cfg = load_run_config({}, env={"HINTKIT_CACHE_DIR": str(tmp_path / "c")})
        assert cfg.resolved_cache_dir() == tmp_path / "c"
        assert RunConfig(cache_dir=str(tmp_path / "x")).resolved_cache_dir() == tmp_path / "x"
