"""
Tests for the command-line entry point.
"""

import json
import os

import pytest
import yaml

import main
from conftest import quiet_config
from utils.errors import VerificationError
from utils.file import default_output_path


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(quiet_config()), encoding="utf-8")
    return str(path)


@pytest.fixture
def source(tmp_path, corpus_path):
    path = tmp_path / "fig3.qlp"
    with open(corpus_path("fig3.qlp"), "r", encoding="utf-8") as f:
        path.write_text(f.read(), encoding="utf-8")
    return str(path)


def compile_args(source, config_file, *extra):
    return ["compile", source, "--config", config_file, *extra]


def test_default_output_path():
    assert default_output_path("progs/fig3.qlp") == os.path.join("progs", "fig3.qlo")
    assert default_output_path("progs/fig3.qlp", "out") == os.path.join("out", "fig3.qlo")


def test_compile_writes_output_next_to_source(source, config_file):
    assert main.cli(compile_args(source, config_file)) == main.EXIT_OK
    with open(source[:-len(".qlp")] + ".qlo", "r", encoding="utf-8") as f:
        text = f.read()
    assert text.startswith("qubit q[8];")


def test_output_and_stats_paths(tmp_path, source, config_file):
    out = tmp_path / "build" / "fig3.out"
    stats = tmp_path / "stats.json"
    code = main.cli(compile_args(source, config_file, "-o", str(out), "--stats", str(stats), "--verify"))
    assert code == main.EXIT_OK
    assert out.exists()
    record = json.loads(stats.read_text(encoding="utf-8"))
    assert record["iters"] == 7
    assert record["qsp_total"] == record["pre_depth"] + record["kernel_depth"] * record["qsp_iters"] + record["post_depth"]


def test_flags_override_config(tmp_path, source, config_file):
    stats = tmp_path / "stats.json"
    args = compile_args(source, config_file, "--emit", "unrolled-asap", "--no-compact", "--stats", str(stats))
    assert main.cli(args) == main.EXIT_OK
    record = json.loads(stats.read_text(encoding="utf-8"))
    assert record["kernel_depth"] == 0
    assert record["qsp_total"] == record["unroll_total"]


def test_dumps_go_to_stdout(source, config_file, capsys):
    assert main.cli(compile_args(source, config_file, "--dump-qdg", "--dump-table")) == main.EXIT_OK
    out = capsys.readouterr().out
    assert "digraph qdg {" in out
    assert "II = " in out


@pytest.mark.parametrize(
    "extra",
    [
        ["--range", "1-2"],
        ["--range", "0:50"],
        ["--unroll", "0"],
    ],
)
def test_bad_arguments_fail(source, config_file, extra):
    assert main.cli(compile_args(source, config_file, *extra)) == main.EXIT_ERROR


def test_missing_source(tmp_path, config_file):
    assert main.cli(compile_args(str(tmp_path / "missing.qlp"), config_file)) == main.EXIT_ERROR


def test_parse_error(tmp_path, config_file):
    path = tmp_path / "bad.qlp"
    path.write_text("qubit q[2];\nfor i in 0 to 1 { measure q[i]; }\n", encoding="utf-8")
    assert main.cli(compile_args(str(path), config_file)) == main.EXIT_ERROR


def test_missing_config(tmp_path, source):
    assert main.cli(compile_args(source, str(tmp_path / "nope.yaml"))) == main.EXIT_ERROR


def test_verification_mismatch(monkeypatch, source, config_file):
    def mismatch(program, output, config):
        raise VerificationError("deviation 1 > 1e-07", 1.0)

    monkeypatch.setattr(main, "verify_program", mismatch)
    assert main.cli(compile_args(source, config_file, "--verify")) == main.EXIT_MISMATCH


def test_subcommand_is_required():
    with pytest.raises(SystemExit):
        main.cli([])


def test_unknown_range_verify_with_slope_indexed_gates(tmp_path, config_file):
    path = tmp_path / "slope.qlp"
    path.write_text(
        "qubit q[16];\ndefgate G[8] = unknown;\nfor i in 0 to 5 { SQ(G[i]) q[i]; CZ q[i], q[i+1]; }\n",
        encoding="utf-8",
    )
    assert main.cli(compile_args(str(path), config_file, "--range", "unknown", "--verify")) == main.EXIT_OK


def test_dump_source_prints_the_overridden_program(source, config_file, capsys):
    assert main.cli(compile_args(source, config_file, "--range", "unknown", "--dump-source")) == main.EXIT_OK
    out = capsys.readouterr().out
    assert "symbolic a, b;" in out
    assert "for i in a to b {" in out
