import json

import pytest
from click.testing import CliRunner

from vizrec.cli import main
from vizrec.experiments import gen_uniform_dataset, planted_dataset


@pytest.fixture(scope="module")
def planted_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "planted.csv"
    path.write_text(planted_dataset(seed=0).to_csv())
    return str(path)


@pytest.fixture(scope="module")
def uniform_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "uniform.csv"
    path.write_text(gen_uniform_dataset(n=20_000, seed=0).to_csv())
    return str(path)


def run(*args, **kw):
    return CliRunner().invoke(main, list(args), **kw)


def test_ingest_reports_schema(planted_csv):
    res = run("ingest", planted_csv)
    assert res.exit_code == 0
    assert "n=10000" in res.stdout and "columns=3" in res.stdout


def test_ingest_schema_override(planted_csv, tmp_path):
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps({"X2": "categorical"}))
    res = run("ingest", planted_csv, "--schema", str(schema))
    assert res.exit_code == 0
    assert "X2 kind=categorical" in res.stdout


def test_ingest_bad_csv_nonzero_exit(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1\n")
    res = run("ingest", str(bad))
    assert res.exit_code != 0
    assert "bad.csv" in res.stderr


def test_recommend_planted_outputs_json(planted_csv):
    res = run("recommend", planted_csv, "--group-by", "X0", "--vc-dimension", "4")
    assert res.exit_code == 0
    payload = json.loads(res.stdout)
    assert payload["d"] == 4
    assert payload["recommendations"]
    top = payload["recommendations"][0]
    assert {"distance", "epsilon_ref", "epsilon_cand", "interest"} <= set(top)
    assert "safe recommendations" in res.stderr  # logs stay off stdout


def test_recommend_uniform_finds_nothing(uniform_csv):
    res = run("recommend", uniform_csv, "--group-by", "X0", "--vc-dimension", "4")
    assert res.exit_code == 0
    assert json.loads(res.stdout)["recommendations"] == []
    assert "0 safe recommendations" in res.stderr


def test_recommend_eps_v_shrinks(planted_csv):
    plain = run("recommend", planted_csv, "--group-by", "X0", "--vc-dimension", "4")
    strict = run("recommend", planted_csv, "--group-by", "X0", "--vc-dimension", "4",
                 "--eps-v", "0.45")
    n_plain = len(json.loads(plain.stdout)["recommendations"])
    n_strict = len(json.loads(strict.stdout)["recommendations"])
    assert n_strict <= n_plain


def test_recommend_with_reference_predicate(planted_csv, tmp_path):
    ref = tmp_path / "ref.json"
    ref.write_text(json.dumps({"and": [{"feature": "X2", "or": [{"op": "<=", "value": 3}]}]}))
    res = run("recommend", planted_csv, "--reference", str(ref), "--group-by", "X0",
              "--vc-dimension", "4")
    assert res.exit_code == 0
    assert json.loads(res.stdout)["reference"]["predicate"]["and"][0]["feature"] == "X2"


def test_recommend_unknown_groupby_fails(planted_csv):
    res = run("recommend", planted_csv, "--group-by", "nope")
    assert res.exit_code != 0


def test_vc_bound_command(tmp_path):
    spec = tmp_path / "class.json"
    spec.write_text(json.dumps({"features": [{"name": "x", "alpha": 1, "beta": 0}]}))
    res = run("vc-bound", "--class", str(spec))
    assert res.exit_code == 0
    assert res.stdout.strip() == "2"


def test_experiment_run_twice_identical(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        res = run("experiment", "run", "min-samples-chi2", "--seed", "7", "--out", str(out))
        assert res.exit_code == 0
    name = "min-samples-chi2"
    for ext in ("json", "csv"):
        f1 = out1 / name / f"{name}_seed7.{ext}"
        f2 = out2 / name / f"{name}_seed7.{ext}"
        assert f1.read_bytes() == f2.read_bytes()


def test_experiment_chernoff_csv_columns(tmp_path):
    res = run("experiment", "run", "chernoff-vs-vc", "--seed", "1", "--out", str(tmp_path))
    assert res.exit_code == 0
    csv_path = tmp_path / "chernoff-vs-vc" / "chernoff-vs-vc_seed1.csv"
    header = csv_path.read_text().splitlines()[0].split(",")
    assert "observed_error" in header
    bound_cols = [h for h in header if h.startswith(("vc_", "chernoff_"))]
    assert len(bound_cols) >= 5
