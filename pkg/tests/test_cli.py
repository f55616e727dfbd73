"""End-to-end CLI behavior: exit codes, determinism, overrides, report."""

import json
from pathlib import Path

import pytest

from statbench.cli import (apply_overrides, canned_config_names, config_hash,
                           main)
from statbench.evalsuite import validate_config


def _tiny_config_dict():
    return {
        "name": "cli-tiny",
        "dgp": {"kind": "labelnoise", "model": "M2", "n": 100, "rho": 0.2,
                "n_test": 200},
        "estimators": [{"classifier": "bayes", "name": "bayes"},
                       {"classifier": "lda", "name": "lda"}],
        "replicates": 3,
        "metrics": ["excess_risk"],
        "seed": 5,
    }


@pytest.fixture()
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(_tiny_config_dict()))
    return path


def test_catalog_contains_all_canned_families():
    names = canned_config_names()
    assert [f"cate-{s}" for s in "ABCDEF"] == [n for n in names if n.startswith("cate-")]
    assert sum(n.startswith("covshift-") for n in names) == 5
    assert {"noise-M1", "noise-M2", "sparse-lasso", "probe-1d", "probe-2d",
            "semisup-linear", "semisup-logistic", "semisup-quantile"} <= set(names)


def test_missing_seed_exits_one_naming_field(tiny_config, tmp_path, capsys):
    cfg = _tiny_config_dict()
    del cfg["seed"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(cfg))
    code = main(["run", str(bad), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "seed" in capsys.readouterr().err


def test_validate_remote_without_endpoint(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("WORKBENCH_REMOTE_ENDPOINT", raising=False)
    cfg = _tiny_config_dict()
    cfg["estimators"].append({"classifier": "tabpfn", "name": "tabpfn"})
    path = tmp_path / "remote.json"
    path.write_text(json.dumps(cfg))
    assert main(["validate", str(path)]) == 1
    err = capsys.readouterr().err
    assert "tabpfn" in err and "endpoint" in err


def test_rerun_is_byte_identical(tiny_config, tmp_path):
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert main(["run", str(tiny_config), "--out", str(out1)]) == 0
    assert main(["run", str(tiny_config), "--out", str(out2)]) == 0
    assert (out1 / "records.csv").read_bytes() == (out2 / "records.csv").read_bytes()
    assert (out1 / "aggregate.csv").read_bytes() == (out2 / "aggregate.csv").read_bytes()


def test_jobs_invariance_via_cli(tiny_config, tmp_path):
    out1 = tmp_path / "j1"
    out4 = tmp_path / "j4"
    assert main(["run", str(tiny_config), "--out", str(out1), "--jobs", "1"]) == 0
    assert main(["run", str(tiny_config), "--out", str(out4), "--jobs", "4"]) == 0
    assert (out1 / "records.csv").read_bytes() == (out4 / "records.csv").read_bytes()


def test_override_replicates(tiny_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(tiny_config), "--set", "replicates=2",
                 "--out", str(out)]) == 0
    lines = (out / "records.csv").read_text().splitlines()[1:]
    replicates = {line.split(",")[1] for line in lines}
    assert replicates == {"0", "1"}


def test_manifest_hash_tracks_semantic_changes():
    base = validate_config(_tiny_config_dict())
    changed = _tiny_config_dict()
    changed["seed"] = 6
    assert config_hash(base) != config_hash(validate_config(changed))
    assert config_hash(base) == config_hash(validate_config(_tiny_config_dict()))


def test_manifest_written_with_errors_section(tiny_config, tmp_path):
    out = tmp_path / "out"
    main(["run", str(tiny_config), "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["errors"] == []
    assert manifest["seed"] == 5
    assert manifest["n_records"] == 6
    assert "statbench" in manifest["versions"]


def test_apply_overrides_parses_json_scalars():
    obj = {"dgp": {"n": 10}}
    apply_overrides(obj, ["dgp.n=25", "dgp.kind=labelnoise", "flag=true"])
    assert obj["dgp"]["n"] == 25 and obj["dgp"]["kind"] == "labelnoise"
    assert obj["flag"] is True


def test_report_renders_figures(tiny_config, tmp_path):
    out = tmp_path / "out"
    main(["run", str(tiny_config), "--out", str(out)])
    rep = tmp_path / "report"
    assert main(["report", str(out / "records.csv"), "--out", str(rep)]) == 0
    pngs = list(rep.glob("*.png"))
    assert len(pngs) == 1  # one (experiment, metric) panel
    assert (rep / "aggregate.csv").exists()
    assert pngs[0].stat().st_size > 1000


def test_list_exits_zero(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "cate-A" in out and "sparse-lasso" in out


def test_unknown_config_reference(tmp_path, capsys):
    assert main(["validate", "no-such-config"]) == 1
    assert "no-such-config" in capsys.readouterr().err


def test_partial_failure_preserves_records_and_exits_two(tmp_path, monkeypatch):
    # one healthy estimator plus one pointing at a dead endpoint: the run
    # must keep the healthy rows, record the failure, and exit 2
    monkeypatch.setenv("WORKBENCH_REMOTE_ENDPOINT", "http://127.0.0.1:9")
    cfg = _tiny_config_dict()
    cfg["estimators"].append({"classifier": "remote", "name": "remote-dead",
                              "timeout_ms": 1000})
    path = tmp_path / "partial.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 2
    records = (out / "records.csv").read_text().splitlines()
    assert len(records) > 1  # header plus surviving rows
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["errors"]


def test_every_canned_config_validates():
    for name in canned_config_names():
        assert main(["validate", name]) == 0, name
