import json

import pytest

from hintkit.cli import main
from hintkit.dataset_io import export_json, load_dataset, save_dataset
from hintkit.errors import NoMetricsFound
from hintkit.metrics import MetricConfig, evaluate_dataset
from hintkit.report import (
    collect_metric_means,
    render_figures,
    to_csv,
    to_json,
    to_long_csv,
    to_markdown,
)

from conftest import make_fixture_dataset

from test_runner import FREQ_TABLE, OFFLINE_FOUR, offline_backends


def evaluated_dataset():
    ds = make_fixture_dataset()
    evaluate_dataset(ds, MetricConfig.parse(OFFLINE_FOUR), offline_backends(), workers=1)
    return ds


class TestReportTable:
    def test_means_match_hand_recomputation(self):
        ds = evaluated_dataset()
        table = collect_metric_means(ds)
        for column in table.columns:
            values = [h.metrics[column].value
                      for _, _, inst in ds.all_instances() for h in inst.hints]
            assert table.cell("test", column) == pytest.approx(sum(values) / len(values), abs=1e-9)

    def test_no_metrics_found(self):
        with pytest.raises(NoMetricsFound):
            collect_metric_means(make_fixture_dataset())

    def test_columns_sorted(self):
        table = collect_metric_means(evaluated_dataset())
        assert table.columns == sorted(table.columns)
        assert table.columns[0].startswith("answerleakage/")


class TestFormats:
    def test_csv_shape(self):
        text = to_csv(collect_metric_means(evaluated_dataset()))
        lines = text.split("\r\n")
        assert lines[0].startswith("subset,answerleakage/lexical/nostop,")
        assert lines[1].startswith("test,")
        cells = lines[1].split(",")[1:]
        assert all(len(c.split(".")[-1]) == 2 for c in cells)  # 2-decimal floats

    def test_markdown_same_numbers_as_csv(self):
        table = collect_metric_means(evaluated_dataset())
        csv_cells = to_csv(table).split("\r\n")[1].split(",")[1:]
        md_row = [c.strip() for c in to_markdown(table).splitlines()[2].split("|")[2:-1]]
        assert md_row == csv_cells

    def test_json_same_numbers(self):
        table = collect_metric_means(evaluated_dataset())
        doc = json.loads(to_json(table))
        csv_cells = to_csv(table).split("\r\n")[1].split(",")[1:]
        assert [doc["test"][c] for c in table.columns] == csv_cells

    def test_long_format(self):
        table = collect_metric_means(evaluated_dataset())
        lines = to_long_csv(table).rstrip("\r\n").split("\r\n")
        assert lines[0] == "subset,metric,value"
        assert len(lines) == 1 + len(table.columns)  # one subset

    def test_figures_rendered(self, tmp_path):
        table = collect_metric_means(evaluated_dataset())
        paths = render_figures(table, tmp_path, stem="rep")
        families = {"relevance", "readability", "familiarity", "answerleakage"}
        assert {p.stem.split("_", 1)[1] for p in paths} == families
        for path in paths:
            assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


@pytest.fixture
def ds_json(tmp_path):
    path = tmp_path / "ds.json"
    save_dataset(make_fixture_dataset(), path)
    return path


@pytest.fixture
def freq_config(tmp_path):
    """Config file wiring the word-frequency table backend."""
    freqs = tmp_path / "freqs.tsv"
    freqs.write_text("".join(f"{t}\t{v}\n" for t, v in FREQ_TABLE.items()))
    cfg = tmp_path / "config.toml"
    cfg.write_text(f'freq_table_path = "{freqs}"\n')
    return cfg


class TestCliDataset:
    def test_validate_ok(self, ds_json, capsys):
        assert main(["dataset", "validate", str(ds_json)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_bad_prints_paths(self, tmp_path, capsys):
        ds = make_fixture_dataset()
        ds.version = ""
        ds.get_instance("test", "q1").hints[0].text = " "
        # bypass export validation by writing the document manually
        doc = json.loads(export_json(make_fixture_dataset()))
        doc["version"] = ""
        doc["subsets"]["test"]["instances"]["q1"]["hints"][0]["text"] = ""
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        assert main(["dataset", "validate", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "/version" in err
        assert "/subsets/test/instances/q1/hints/0/text" in err

    def test_convert_round_trip_byte_identical(self, ds_json, tmp_path):
        hds = tmp_path / "ds.hds"
        back = tmp_path / "back.json"
        assert main(["dataset", "convert", str(ds_json), str(hds)]) == 0
        assert main(["dataset", "convert", str(hds), str(back)]) == 0
        assert back.read_bytes() == ds_json.read_bytes()

    def test_nonexistent_file(self, tmp_path, capsys):
        assert main(["dataset", "validate", str(tmp_path / "nope.json")]) == 1


class TestCliGenerate:
    def chat_stub(self, http_stub):
        def completions(method, body):
            request = json.loads(body)
            question = request["messages"][-1]["content"]
            n = int(question.split("Write ")[-1].split(" hints")[0])
            hints = "\n".join(f"{i}. Stub hint {i} len{len(question)}" for i in range(1, n + 1))
            return 200, json.dumps(
                {"choices": [{"message": {"content": hints}}]}).encode(), "application/json"

        http_stub.routes["/chat/completions"] = completions
        return http_stub.url

    def test_agnostic_five_hints(self, ds_json, http_stub, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("HINTKIT_CHAT_URL", self.chat_stub(http_stub))
        out = tmp_path / "out.json"
        code = main(["generate", "--input", str(ds_json), "--output", str(out),
                     "--mode", "agnostic", "--n-hints", "5"])
        assert code == 0
        assert "generated 10 hints across 2 instances" in capsys.readouterr().out
        ds = load_dataset(out)
        for _, _, inst in ds.all_instances():
            assert len(inst.hints) == 3 + 5

    def test_aware_missing_answer_exits_1(self, http_stub, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("HINTKIT_CHAT_URL", self.chat_stub(http_stub))
        ds = make_fixture_dataset()
        ds.get_instance("test", "q1").answers.clear()
        src = tmp_path / "src.json"
        save_dataset(ds, src)
        out = tmp_path / "out.json"
        assert main(["generate", "--input", str(src), "--output", str(out),
                     "--mode", "aware"]) == 1
        assert "q1" in capsys.readouterr().err
        assert not out.exists()

    def test_aware_skip_missing(self, http_stub, tmp_path, monkeypatch):
        monkeypatch.setenv("HINTKIT_CHAT_URL", self.chat_stub(http_stub))
        ds = make_fixture_dataset()
        ds.get_instance("test", "q1").answers.clear()
        src = tmp_path / "src.json"
        save_dataset(ds, src)
        out = tmp_path / "out.json"
        assert main(["generate", "--input", str(src), "--output", str(out),
                     "--mode", "aware", "--skip-missing"]) == 0
        ds_out = load_dataset(out)
        assert len(ds_out.get_instance("test", "q1").hints) == 3   # untouched
        assert len(ds_out.get_instance("test", "q2").hints) == 8

    def test_replace_drops_prior_hints(self, ds_json, http_stub, tmp_path, monkeypatch):
        monkeypatch.setenv("HINTKIT_CHAT_URL", self.chat_stub(http_stub))
        out = tmp_path / "out.json"
        assert main(["generate", "--input", str(ds_json), "--output", str(out),
                     "--mode", "agnostic", "--n-hints", "2", "--replace"]) == 0
        ds = load_dataset(out)
        for _, _, inst in ds.all_instances():
            assert len(inst.hints) == 2

    def test_offline_forbids_generation(self, ds_json, tmp_path, capsys):
        assert main(["--offline", "generate", "--input", str(ds_json),
                     "--output", str(tmp_path / "o.json"), "--mode", "agnostic"]) == 1
        assert "offline" in capsys.readouterr().err


class TestCliEvaluate:
    def test_offline_four_methods(self, ds_json, freq_config, tmp_path, capsys):
        out = tmp_path / "out.json"
        code = main(["--config", str(freq_config), "evaluate", "--input", str(ds_json),
                     "--output", str(out), "--metrics", OFFLINE_FOUR])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "24 computed, 0 skipped" in stdout
        ds = load_dataset(out)
        for _, _, inst in ds.all_instances():
            assert all(len(h.metrics) == 4 for h in inst.hints)

    def test_rerun_skips(self, ds_json, freq_config, tmp_path, capsys):
        out = tmp_path / "out.json"
        main(["--config", str(freq_config), "evaluate", "--input", str(ds_json),
              "--output", str(out), "--metrics", OFFLINE_FOUR])
        capsys.readouterr()
        code = main(["--config", str(freq_config), "evaluate", "--input", str(out),
                     "--output", str(out), "--metrics", OFFLINE_FOUR])
        assert code == 0
        assert "0 computed, 24 skipped" in capsys.readouterr().out

    def test_remote_method_offline_exits_1(self, ds_json, tmp_path, capsys):
        code = main(["--offline", "evaluate", "--input", str(ds_json),
                     "--output", str(tmp_path / "o.json"),
                     "--metrics", "readability/llm"])
        assert code == 1
        assert "readability/llm" in capsys.readouterr().err

    def test_partial_failure_warns_but_succeeds(self, ds_json, tmp_path, capsys):
        out = tmp_path / "o.json"
        code = main(["--offline", "evaluate", "--input", str(ds_json), "--output", str(out),
                     "--metrics", "relevance/rouge/rougeL,readability/llm"])
        assert code == 0
        captured = capsys.readouterr()
        assert "readability/llm" in captured.err
        assert out.exists()


class TestCliReport:
    def make_evaluated_file(self, tmp_path) -> str:
        ds = evaluated_dataset()
        path = tmp_path / "eval.json"
        save_dataset(ds, path)
        return str(path)

    def test_csv_to_stdout(self, tmp_path, capsys):
        path = self.make_evaluated_file(tmp_path)
        assert main(["report", "--input", path]) == 0
        out = capsys.readouterr().out
        assert out.startswith("subset,answerleakage/lexical/nostop,")

    def test_out_file_and_figures(self, tmp_path, capsys):
        path = self.make_evaluated_file(tmp_path)
        out = tmp_path / "report.csv"
        assert main(["report", "--input", path, "--out", str(out)]) == 0
        assert out.exists()
        pngs = sorted(p.name for p in tmp_path.glob("report_*.png"))
        assert pngs == ["report_answerleakage.png", "report_familiarity.png",
                        "report_readability.png", "report_relevance.png"]

    def test_no_figures_flag(self, tmp_path):
        path = self.make_evaluated_file(tmp_path)
        out = tmp_path / "report.csv"
        assert main(["report", "--input", path, "--out", str(out), "--no-figures"]) == 0
        assert not list(tmp_path.glob("*.png"))

    def test_md_and_json_formats(self, tmp_path, capsys):
        path = self.make_evaluated_file(tmp_path)
        assert main(["report", "--input", path, "--format", "md"]) == 0
        md = capsys.readouterr().out
        assert md.startswith("| subset |")
        assert main(["report", "--input", path, "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert "test" in doc

    def test_long_format(self, tmp_path, capsys):
        path = self.make_evaluated_file(tmp_path)
        assert main(["report", "--input", path, "--long", "--no-figures"]) == 0
        assert capsys.readouterr().out.startswith("subset,metric,value")

    def test_no_metrics_exits_1(self, ds_json, capsys):
        assert main(["report", "--input", str(ds_json)]) == 1
        assert "no metric" in capsys.readouterr().err.lower()
