import json

import pytest
from click.testing import CliRunner

from helpers import cluster_set
from noveval.cli import main
from noveval.splits import builtin_split, builtin_taxonomy, read_split, split_to_json_bytes, taxonomy_to_dict
from noveval.store import write_embedding_set

runner = CliRunner()


def invoke(*args, env=None):
    return runner.invoke(main, list(args), env=env, catch_exceptions=False)


@pytest.fixture
def cifar10_fixture(tmp_path):
    """Perfect-cluster embeddings over the cifar10 label space."""
    split = builtin_split("cifar10", "semantic")
    eset = cluster_set(sorted(split.base | split.novel), per_class=4)
    eset.dataset_id = "cifar10"
    eset.algorithm = "toy"
    path = tmp_path / "toy.nveb"
    write_embedding_set(eset, path)
    return path


class TestSplitCommand:
    def test_builtin_semantic_matches_listing(self, tmp_path):
        out = tmp_path / "s.json"
        result = invoke("split", "--builtin", "cifar10", "--kind", "semantic", "-o", str(out))
        assert result.exit_code == 0, result.output
        assert "|base|=5 |novel|=5" in result.output
        split = read_split(out)
        assert split.base == {"airplane", "automobile", "bird", "ship", "truck"}
        assert out.read_bytes() == split_to_json_bytes(builtin_split("cifar10", "semantic"))

    def test_generated_split_byte_identical_across_runs(self, tmp_path):
        tax_file = tmp_path / "t.json"
        tax_file.write_text(json.dumps(taxonomy_to_dict(builtin_taxonomy("cifar10"))))
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            result = invoke(
                "split", "--taxonomy", str(tax_file), "--method", "random",
                "--n-base", "5", "--seed", "7", "-o", str(out),
            )
            assert result.exit_code == 0, result.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_bad_kind_exits_2_naming_choices(self, tmp_path):
        result = invoke(
            "split", "--builtin", "cifar10", "--kind", "nope",
            "-o", str(tmp_path / "s.json"),
        )
        assert result.exit_code == 2
        assert "random" in result.stderr and "semantic" in result.stderr

    def test_unknown_dataset_exits_2(self, tmp_path):
        result = invoke(
            "split", "--builtin", "mnist", "--kind", "random",
            "-o", str(tmp_path / "s.json"),
        )
        assert result.exit_code == 2
        assert "mnist" in result.stderr

    def test_both_sources_rejected(self, tmp_path):
        result = invoke(
            "split", "--builtin", "cifar10", "--kind", "random",
            "--taxonomy", "t.json", "-o", str(tmp_path / "s.json"),
        )
        assert result.exit_code == 2

    def test_semantic_via_taxonomy(self, tmp_path):
        tax_file = tmp_path / "t.json"
        tax_file.write_text(json.dumps(taxonomy_to_dict(builtin_taxonomy("cifar10"))))
        out = tmp_path / "s.json"
        result = invoke(
            "split", "--taxonomy", str(tax_file), "--method", "semantic",
            "--base-groups", "vehicle", "-o", str(out),
        )
        assert result.exit_code == 0, result.output
        assert read_split(out).base == {"airplane", "automobile", "ship", "truck"}


class TestDumpBuiltin:
    def test_dump_split_to_stdout(self):
        result = invoke("dump-builtin", "--dataset", "cifar10", "--kind", "random")
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["base"] == ["automobile", "bird", "deer", "frog", "ship"]

    def test_dump_taxonomy(self):
        result = invoke("dump-builtin", "--dataset", "imagenet100", "--taxonomy")
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert len(doc["classes"]) == 100
        assert len(set(doc["groups"].values())) == 16


class TestEvalCommand:
    def test_perfect_fixture_scores_100(self, tmp_path, cifar10_fixture):
        out = tmp_path / "report.json"
        result = invoke(
            "eval", "--embeddings", str(cifar10_fixture),
            "--builtin", "cifar10", "--kind", "semantic", "-o", str(out),
        )
        assert result.exit_code == 0, result.output
        assert "| toy | 100.000 | 100.000 |" in result.output
        doc = json.loads(out.read_text())
        assert doc["base_r_precision"] == 100.0
        assert doc["novel_r_precision"] == 100.0

    def test_split_file_source(self, tmp_path, cifar10_fixture):
        split_file = tmp_path / "s.json"
        invoke("split", "--builtin", "cifar10", "--kind", "semantic", "-o", str(split_file))
        out = tmp_path / "report.json"
        result = invoke(
            "eval", "--embeddings", str(cifar10_fixture),
            "--split", str(split_file), "-o", str(out),
        )
        assert result.exit_code == 0, result.output

    def test_train_rows_reported_on_stderr(self, tmp_path):
        eset = cluster_set(["airplane", "cat"], per_class=4,
                           tags=["train", "train"] + ["test"] * 6)
        path = tmp_path / "e.nveb"
        write_embedding_set(eset, path)
        out = tmp_path / "report.json"
        result = invoke(
            "eval", "--embeddings", str(path),
            "--builtin", "cifar10", "--kind", "semantic", "-o", str(out),
        )
        assert result.exit_code == 0, result.output
        assert "ignored 2 train-tagged rows" in result.stderr
        assert "ignored" not in result.output.replace(result.stderr, "")

    def test_label_mismatch_exit_3(self, tmp_path):
        eset = cluster_set(["airplane", "zebra"], per_class=3)
        path = tmp_path / "e.nveb"
        write_embedding_set(eset, path)
        result = invoke(
            "eval", "--embeddings", str(path), "--builtin", "cifar10",
            "--kind", "semantic", "-o", str(tmp_path / "r.json"),
        )
        assert result.exit_code == 3
        assert "zebra" in result.stderr

    def test_corrupt_file_exit_4(self, tmp_path):
        path = tmp_path / "bad.nveb"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        result = invoke(
            "eval", "--embeddings", str(path), "--builtin", "cifar10",
            "--kind", "semantic", "-o", str(tmp_path / "r.json"),
        )
        assert result.exit_code == 4

    def test_nan_payload_exit_4(self, tmp_path, cifar10_fixture):
        import struct
        from noveval._crc32c import crc32c

        raw = bytearray(cifar10_fixture.read_bytes())
        struct.pack_into("<f", raw, 16, float("nan"))
        struct.pack_into("<I", raw, len(raw) - 4, crc32c(bytes(raw[:-4])))
        bad = cifar10_fixture.parent / "nan.nveb"
        bad.write_bytes(bytes(raw))
        meta = cifar10_fixture.parent / "nan.nveb.meta.json"
        meta.write_bytes((cifar10_fixture.parent / "toy.nveb.meta.json").read_bytes())
        result = invoke(
            "eval", "--embeddings", str(bad), "--builtin", "cifar10",
            "--kind", "semantic", "-o", str(bad.parent / "r.json"),
        )
        assert result.exit_code == 4
        assert "row 0" in result.stderr

    def test_missing_split_source_exit_2(self, tmp_path, cifar10_fixture):
        result = invoke(
            "eval", "--embeddings", str(cifar10_fixture), "-o", str(tmp_path / "r.json")
        )
        assert result.exit_code == 2

    def test_config_file_with_flag_override(self, tmp_path, cifar10_fixture):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "embeddings": str(cifar10_fixture),
            "builtin": "cifar10",
            "kind": "random",  # flag below overrides this
            "out": str(tmp_path / "from_config.json"),
            "format": "csv",
        }))
        result = invoke("eval", "--config", str(cfg), "--kind", "semantic")
        assert result.exit_code == 0, result.output
        doc = json.loads((tmp_path / "from_config.json").read_text())
        assert doc["split"] == "builtin-semantic"
        assert result.output.startswith("algorithm,")

    def test_workers_env_accepted(self, tmp_path, cifar10_fixture):
        result = invoke(
            "eval", "--embeddings", str(cifar10_fixture),
            "--builtin", "cifar10", "--kind", "semantic",
            "-o", str(tmp_path / "r.json"),
            env={"NOVEVAL_WORKERS": "2"},
        )
        assert result.exit_code == 0, result.output

    def test_reports_byte_identical_across_worker_counts(self, tmp_path, cifar10_fixture):
        blobs = []
        for w in ("1", "2", "8"):
            out = tmp_path / f"r{w}.json"
            result = invoke(
                "eval", "--embeddings", str(cifar10_fixture),
                "--builtin", "cifar10", "--kind", "semantic",
                "-o", str(out), "--workers", w,
            )
            assert result.exit_code == 0, result.output
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]


class TestReportCommand:
    @staticmethod
    def _make_report(tmp_path, cifar10_fixture, kind, name):
        out = tmp_path / name
        result = invoke(
            "eval", "--embeddings", str(cifar10_fixture),
            "--builtin", "cifar10", "--kind", kind,
            "-o", str(out), "--algorithm", f"algo-{kind}",
        )
        assert result.exit_code == 0, result.output
        return out

    def test_single_file_single_row(self, tmp_path, cifar10_fixture):
        r1 = self._make_report(tmp_path, cifar10_fixture, "semantic", "r1.json")
        result = invoke("report", str(r1))
        lines = result.output.strip().split("\n")
        assert result.exit_code == 0
        assert len(lines) == 3  # header, separator, one data row

    def test_two_splits_four_columns(self, tmp_path, cifar10_fixture):
        r1 = self._make_report(tmp_path, cifar10_fixture, "random", "r1.json")
        r2 = self._make_report(tmp_path, cifar10_fixture, "semantic", "r2.json")
        result = invoke("report", str(r1), str(r2), "--format", "csv")
        assert result.exit_code == 0
        header = result.output.strip().split("\n")[0]
        assert header.split(",") == [
            "algorithm",
            "builtin-random base", "builtin-random novel",
            "builtin-semantic base", "builtin-semantic novel",
        ]

    def test_mixed_datasets_exit_3(self, tmp_path, cifar10_fixture):
        r1 = self._make_report(tmp_path, cifar10_fixture, "random", "r1.json")
        doc = json.loads(r1.read_text())
        doc["dataset"] = "cifar100"
        r2 = tmp_path / "r2.json"
        r2.write_text(json.dumps(doc))
        result = invoke("report", str(r1), str(r2))
        assert result.exit_code == 3

    def test_malformed_report_exit_4(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        result = invoke("report", str(bad))
        assert result.exit_code == 4
