import json
import math
import os

import numpy as np
import pytest

from embdebias import load_embeddings, load_subspace
from embdebias.cli import main

from conftest import unit_rows, write_embeddings_file


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Embedding file with two planted categories plus target/attribute words,
    and matching spec files."""
    root = tmp_path_factory.mktemp("cli")
    dim = 16
    rng = np.random.default_rng(100)
    g1 = np.eye(dim)[0]
    g2 = unit_rows([0.2 * np.eye(dim)[0] + np.eye(dim)[1]])[0]
    u0, u1 = np.eye(dim)[2], np.eye(dim)[7]
    words, rows = [], []
    for c, (g, u) in enumerate(((g1, u0), (g2, u1))):
        for j, (direction, sin_a) in enumerate(((g, 0.5), (u, 0.35))):
            m = np.eye(dim)[3 + 2 * c + j]
            cos_a = math.sqrt(1 - sin_a ** 2)
            words += [f"c{c}d{j}a", f"c{c}d{j}b"]
            rows += [m * cos_a + direction * sin_a, m * cos_a - direction * sin_a]
    for t in range(6):
        words.append(f"t{t}")
        rows.append(unit_rows([np.eye(dim)[8 + t] + 0.45 * g1 + 0.3 * g2])[0])
    for a in range(4):
        words.append(f"a{a}")
        rows.append(unit_rows([np.eye(dim)[8 + 6 + a % 2] * 0.1
                               + np.eye(dim)[14] + 0.5 * g1])[0])
    for f in range(30):
        words.append(f"f{f}")
        rows.append(unit_rows([rng.standard_normal(dim)])[0])
    emb_path = write_embeddings_file(root / "emb.txt", words, np.vstack(rows))

    spec_paths = []
    for c in range(2):
        payload = {
            "name": f"cat{c}",
            "defining_sets": [[f"c{c}d0a", f"c{c}d0b"], [f"c{c}d1a", f"c{c}d1b"]],
            "equality_sets": [[f"c{c}d0a", f"c{c}d0b"]],
            "target_words": [[f"t{t}" for t in range(6)]],
            "attribute_sets": [[f"a{a}" for a in range(4)]],
        }
        path = root / f"cat{c}.json"
        path.write_text(json.dumps(payload))
        spec_paths.append(str(path))
    gt = {
        "name": "gt",
        "defining_sets": [["c0d0a", "c0d0b"], ["c1d0a", "c1d0b"]],
    }
    gt_path = root / "gt.json"
    gt_path.write_text(json.dumps(gt))
    return {"root": root, "emb": str(emb_path), "specs": spec_paths,
            "gt": str(gt_path)}


def test_subspace_single(workspace, tmp_path, capsys):
    out = tmp_path / "c0.sub"
    code = main(["subspace", "--embeddings", workspace["emb"],
                 "--spec", workspace["specs"][0], "--k", "1", "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "cat0 1 16"
    sub = load_subspace(out)
    assert abs(abs(sub.components[0][0]) - 1.0) < 1e-6  # planted along e0


def test_subspace_josec_prints_objective(workspace, tmp_path, capsys):
    out = tmp_path / "j.sub"
    code = main(["subspace", "--embeddings", workspace["emb"],
                 "--spec", *workspace["specs"], "--k", "1",
                 "--strategy", "josec", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr().out
    assert "objective value:" in captured
    assert out.read_text().startswith("JOSEC 1 16")


def test_subspace_requires_k(workspace, tmp_path, capsys):
    code = main(["subspace", "--embeddings", workspace["emb"],
                 "--spec", workspace["specs"][0], "--out", str(tmp_path / "x.sub")])
    assert code == 2
    assert "--k is required" in capsys.readouterr().err


def test_missing_spec_file_exits_2(workspace, tmp_path, capsys):
    code = main(["subspace", "--embeddings", workspace["emb"],
                 "--spec", "/nope/missing.json", "--k", "1",
                 "--out", str(tmp_path / "x.sub")])
    assert code == 2
    assert "/nope/missing.json" in capsys.readouterr().err


def test_bundled_lexicon_names_accepted(tmp_path):
    # every bundled gender defining word must be present for the subspace
    words = ["woman", "man", "girl", "boy", "she", "he", "mother", "father",
             "daughter", "son", "gal", "guy", "female", "male", "her", "his",
             "herself", "himself", "Mary", "John", "x1", "x2"]
    emb = tmp_path / "g.txt"
    rng = np.random.default_rng(5)
    write_embeddings_file(emb, words, unit_rows(rng.standard_normal((len(words), 6))))
    out = tmp_path / "g.sub"
    code = main(["subspace", "--embeddings", str(emb), "--spec", "gender",
                 "--k", "1", "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("gender 1 6")


def test_debias_single_and_manifest(workspace, tmp_path):
    out = tmp_path / "deb.txt"
    code = main(["debias", "--embeddings", workspace["emb"],
                 "--specs", workspace["specs"][0], "--strategy", "single",
                 "--k", "1", "--out", str(out)])
    assert code == 0
    emb = load_embeddings(out, "word2vec-text")
    for t in range(6):
        assert abs(emb.vector(f"t{t}")[0]) < 1e-8  # g1 component removed
    manifest = json.loads((tmp_path / "deb.txt.manifest.json").read_text())
    assert manifest["command"] == "debias"
    assert manifest["outputs"] == [str(out)]
    assert len(manifest["config_sha256"]) == 64


def test_debias_all_orders(workspace, tmp_path):
    out = tmp_path / "deb.txt"
    code = main(["debias", "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"], "--strategy", "seq",
                 "--all-orders", "--k", "1", "--out", str(out)])
    assert code == 0
    produced = sorted(p.name for p in tmp_path.glob("deb.*.txt"))
    assert produced == ["deb.cat0-cat1.txt", "deb.cat1-cat0.txt"]


def test_debias_seq_requires_order(workspace, tmp_path, capsys):
    code = main(["debias", "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"], "--strategy", "seq",
                 "--k", "1", "--out", str(tmp_path / "x.txt")])
    assert code == 2
    assert "--order" in capsys.readouterr().err


def test_debias_refuses_unnormalized_without_flag(workspace, tmp_path, capsys):
    emb = tmp_path / "raw.txt"
    write_embeddings_file(emb, ["a", "b", "c"],
                          np.array([[2.0, 0.0], [0.0, 3.0], [1.0, 1.0]]))
    code = main(["debias", "--embeddings", str(emb), "--no-normalize",
                 "--specs", workspace["specs"][0], "--strategy", "single",
                 "--k", "1", "--out", str(tmp_path / "x.txt")])
    assert code == 2
    assert "not unit-normalized" in capsys.readouterr().err


def test_eval_mac_with_baseline_and_f_table(workspace, tmp_path, capsys):
    deb = tmp_path / "deb.txt"
    assert main(["debias", "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"], "--strategy", "josec",
                 "--k", "1", "--out", str(deb)]) == 0
    table = tmp_path / "f.csv"
    code = main(["eval-mac", "--embeddings", str(deb),
                 "--specs", *workspace["specs"],
                 "--baseline", workspace["emb"], "--f-table", str(table)])
    assert code == 0
    out = capsys.readouterr().out
    assert "category" in out and "delta" in out and "Total" in out
    lines = table.read_text().splitlines()
    assert lines[0] == "category,target,attribute_set,f"
    assert len(lines) == 1 + 2 * 6 * 1  # two categories, six targets, one set


def test_eval_eq_two_group_example(tmp_path, capsys):
    counts = tmp_path / "counts.csv"
    counts.write_text("group,tp,fp,tn,fn\n"
                      "overall,5,10,10,5\n"
                      "g1,5,4,6,5\n"
                      "g2,5,6,4,5\n")
    code = main(["eval-eq", "--counts", str(counts)])
    assert code == 0
    out = capsys.readouterr().out
    assert "FPED  0.200000" in out
    assert "FNED  0.000000" in out
    assert "Total 0.200000" in out


def test_eval_eq_missing_overall(tmp_path, capsys):
    counts = tmp_path / "counts.csv"
    counts.write_text("group,tp,fp,tn,fn\ng1,5,4,6,5\n")
    assert main(["eval-eq", "--counts", str(counts)]) == 2
    assert "overall" in capsys.readouterr().err


def test_validate_hypothesis_deterministic(workspace, tmp_path):
    args = ["validate-hypothesis", "--embeddings", workspace["emb"],
            "--specs", *workspace["specs"], "--ground-truth", workspace["gt"],
            "--k", "1", "--seed", "42"]
    out1, csv1 = tmp_path / "r1.txt", tmp_path / "p1.csv"
    out2, csv2 = tmp_path / "r2.txt", tmp_path / "p2.csv"
    assert main(args + ["--out", str(out1), "--projection-csv", str(csv1)]) == 0
    assert main(args + ["--out", str(out2), "--projection-csv", str(csv2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert csv1.read_bytes() == csv2.read_bytes()
    header = csv1.read_text().splitlines()[0]
    assert header == "label,component_index,x,y,z"


def test_report_mac_only(workspace, capsys):
    code = main(["report", "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"]])
    assert code == 0
    out = capsys.readouterr().out
    assert "biased" in out and "Total" in out


def test_report_pair_mode(workspace, tmp_path, capsys):
    deb = tmp_path / "deb.txt"
    assert main(["debias", "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"], "--strategy", "sum",
                 "--k", "1", "--out", str(deb)]) == 0
    code = main(["report", "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"], "--debiased", str(deb)])
    assert code == 0
    out = capsys.readouterr().out
    assert "debiased" in out and "paired-t" in out


def test_report_pipeline_with_json(workspace, tmp_path, capsys):
    json_path = tmp_path / "r.json"
    code = main(["report", "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"], "--pipeline", "--k", "1",
                 "--json", str(json_path)])
    assert code == 0
    out = capsys.readouterr().out
    for label in ("biased", "hard_seq(cat0>cat1)", "hard_seq(cat1>cat0)",
                  "sum", "mean", "josec", "best sequential order"):
        assert label in out
    records = json.loads(json_path.read_text())
    assert {"biased", "sum", "mean", "josec"} <= set(records)
    for record in records.values():
        parts = sum(v for k, v in record.items() if k != "Total")
        assert abs(record["Total"] - parts) < 1e-9


def test_report_seeded_rerun_byte_identical(workspace, tmp_path):
    base = ["report", "--embeddings", workspace["emb"],
            "--specs", *workspace["specs"], "--pipeline", "--k", "1",
            "--ground-truth", workspace["gt"], "--seed", "11"]
    o1, o2 = tmp_path / "r1.txt", tmp_path / "r2.txt"
    j1, j2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(base + ["--out", str(o1), "--json", str(j1)]) == 0
    assert main(base + ["--out", str(o2), "--json", str(j2)]) == 0
    assert o1.read_bytes() == o2.read_bytes()
    assert j1.read_bytes() == j2.read_bytes()


def test_config_file_precedence(workspace, tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "embeddings": workspace["emb"],
        "spec": [workspace["specs"][0]],
        "k": 1,
    }))
    out1 = tmp_path / "k1.sub"
    assert main(["subspace", "--config", str(config), "--out", str(out1)]) == 0
    assert out1.read_text().splitlines()[0] == "cat0 1 16"
    out2 = tmp_path / "k2.sub"
    assert main(["subspace", "--config", str(config), "--k", "2",
                 "--out", str(out2)]) == 0
    assert out2.read_text().splitlines()[0] == "cat0 2 16"


def test_order_and_all_orders_mutually_exclusive(workspace, tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"order": "cat0,cat1", "all_orders": True}))
    code = main(["debias", "--config", str(config),
                 "--embeddings", workspace["emb"],
                 "--specs", *workspace["specs"], "--strategy", "seq",
                 "--k", "1", "--out", str(tmp_path / "x.txt")])
    assert code == 2
    assert "mutually exclusive" in capsys.readouterr().err


def test_unwritable_output_exits_1(workspace, tmp_path, capsys):
    code = main(["subspace", "--embeddings", workspace["emb"],
                 "--spec", workspace["specs"][0], "--k", "1",
                 "--out", str(tmp_path / "no_dir" / "x.sub")])
    assert code == 1


def test_strict_degenerate_exits_3(workspace, tmp_path, capsys):
    # request more components than the defining sets can provide
    code = main(["subspace", "--embeddings", workspace["emb"],
                 "--spec", workspace["specs"][0], "--k", "4",
                 "--out", str(tmp_path / "x.sub"), "--strict-degenerate"])
    assert code == 3
    err = capsys.readouterr().err
    assert "degeneracy" in err


def test_warnings_recorded_in_manifest(workspace, tmp_path):
    out = tmp_path / "x.sub"
    code = main(["subspace", "--embeddings", workspace["emb"],
                 "--spec", workspace["specs"][0], "--k", "4", "--out", str(out)])
    assert code == 0  # degeneracy is only a warning without the strict flag
    manifest = json.loads((tmp_path / "x.sub.manifest.json").read_text())
    assert any("RankDeficiencyWarning" in w for w in manifest["warnings"])
