import json
from fractions import Fraction

import pytest

from guessing_secrets import adversary as adv
from guessing_secrets.cli import main
from guessing_secrets.gf2 import BitVec
from guessing_secrets.harness import (
    SEED_ENV,
    ExperimentConfig,
    default_seed,
    exhaustive_verify,
    reproduce_examples,
    run_config,
)

TRIANGLE = {"variant": "triangle", "x1": "0011", "x2": "0101", "xstar": "1000"}
STAR = {"variant": "full_star", "x1": "0110"}


class TestReproduce:
    def test_passes(self):
        report = reproduce_examples()
        assert report.passed, report.to_text()

    def test_byte_identical(self):
        assert reproduce_examples().to_json() == reproduce_examples().to_json()

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            reproduce_examples(2)


class TestExhaustive:
    def test_pairs_n3_minimum_half(self):
        report = exhaustive_verify(3, 2)
        assert report.passed
        assert report.data["tables"] == 28 * 16
        assert report.data["minima"]["success"]["value"] == "1/2"

    def test_triples_n3(self):
        report = exhaustive_verify(3, 3)
        assert report.passed
        assert Fraction(report.data["minima"]["success (independent)"]["value"]) >= Fraction(3, 4)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_single_secret_always_found(self, n):
        report = exhaustive_verify(n, 1)
        assert report.passed
        assert report.data["tables"] == 1 << n
        assert report.data["minima"]["success"]["value"] == "1"

    def test_witness_reproduces_minimum(self):
        report = exhaustive_verify(3, 2)
        wit = report.data["minima"]["success"]["witness"]
        table = adv.OracleTable.from_hex(wit["table"], 3)
        from guessing_secrets.engine import amplitudes, success_probability

        secrets = [BitVec.parse(s) for s in wit["secrets"]]
        assert success_probability(amplitudes(table), secrets) == Fraction(1, 2)

    def test_caps(self):
        with pytest.raises(ValueError):
            exhaustive_verify(5, 2)
        with pytest.raises(ValueError):
            exhaustive_verify(1, 3)
        with pytest.raises(ValueError):
            exhaustive_verify(0, 1)

    def test_byte_identical(self):
        assert exhaustive_verify(2, 2).to_json() == exhaustive_verify(2, 2).to_json()


class TestConfig:
    def test_modes(self):
        text, ok = run_config(ExperimentConfig.from_dict({"mode": "bounds-table", "k_max": 4}))
        assert ok and text.splitlines()[2].startswith("2,1/2")
        text, ok = run_config(ExperimentConfig.from_dict({"mode": "exact-spectrum", "adversary": STAR}))
        assert ok and text.splitlines()[1] == "0110,16,1"
        text, ok = run_config(
            ExperimentConfig.from_dict({"mode": "sample-run", "adversary": STAR, "m": 20, "seed": 1})
        )
        assert ok and json.loads(text)[0]["classification"]["case"] == 2
        text, ok = run_config(ExperimentConfig.from_dict({"mode": "exhaustive-verify", "n": 2, "k": 2}))
        assert ok and json.loads(text)["passed"]

    def test_refuses_large_exhaustive(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"mode": "exhaustive-verify", "n": 5, "k": 2})

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"mode": "exact-spectrum", "n": 3, "adversary": STAR})

    def test_schema_errors(self):
        import jsonschema

        with pytest.raises(jsonschema.ValidationError):
            ExperimentConfig.from_dict({"mode": "sample-run"})
        with pytest.raises(jsonschema.ValidationError):
            ExperimentConfig.from_dict({"mode": "plot"})


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


class TestCli:
    def test_spectrum(self, capsys, tmp_path):
        out = tmp_path / "spec.json"
        code, cap = run_cli(capsys, "spectrum", "--adversary", json.dumps(TRIANGLE), "--json", str(out))
        assert code == 0
        rows = cap.out.splitlines()
        assert rows[0] == "index,C_j,probability"
        assert len(rows) == 5 and all(r.endswith(",1/4") for r in rows[1:])
        data = json.loads(out.read_text())
        assert data["oracle_calls"] == 1 and data["success_probability"] == "1/2"

    def test_adversary_from_file(self, capsys, tmp_path):
        path = tmp_path / "adv.json"
        path.write_text(json.dumps(STAR))
        code, cap = run_cli(capsys, "spectrum", "--adversary", f"@{path}", "--top", "1")
        assert code == 0 and cap.out.splitlines()[1] == "0110,16,1"

    def test_run_and_classify_round_trip(self, capsys, tmp_path):
        rec = tmp_path / "rec.json"
        code, _ = run_cli(capsys, "run", "--adversary", json.dumps(TRIANGLE), "--m", "200", "--seed", "5", "--out", str(rec))
        assert code == 0
        record = json.loads(rec.read_text())
        assert record["oracle_calls"] == 200
        code, cap = run_cli(capsys, "classify", "--record", f"@{rec}")
        assert code == 0
        assert json.loads(cap.out)["classification"] == record["classification"]

    def test_run_is_reproducible(self, capsys):
        args = ("run", "--adversary", json.dumps(STAR), "--m", "30", "--seed", "9", "--experiments", "2")
        _, first = run_cli(capsys, *args)
        _, second = run_cli(capsys, *args)
        assert first.out == second.out
        assert len(json.loads(first.out)) == 2

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "123")
        assert default_seed() == 123

    def test_reduce(self, capsys):
        graph = {"n": 2, "edges": [["00", "01"], ["00", "10"], ["00", "11"], ["01", "10"], ["01", "11"], ["10", "11"]]}
        star = {"variant": "full_star", "x1": "01"}
        code, cap = run_cli(capsys, "reduce", "--graph", json.dumps(graph), "--adversary", json.dumps(star))
        assert code == 0
        data = json.loads(cap.out)
        assert data["final_graph"]["star"]
        assert data["oracle_calls"] == len(data["queries"])

    def test_bounds(self, capsys):
        code, cap = run_cli(capsys, "bounds", "--k-max", "3")
        assert code == 0 and cap.out.splitlines()[3] == "3,3/4,0.750000000000,3/4,1/3"

    def test_verify(self, capsys):
        code, cap = run_cli(capsys, "verify", "--n", "2", "--k", "2")
        assert code == 0 and "all checks passed" in cap.out

    def test_verify_single_criterion(self, capsys):
        code, cap = run_cli(capsys, "verify", "--acceptance", "--criterion", "1")
        assert code == 0 and cap.out.startswith("PASS")

    def test_reproduce_json(self, capsys):
        code, cap = run_cli(capsys, "reproduce", "--json-out")
        assert code == 0 and json.loads(cap.out)["passed"]

    def test_config_flag(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mode": "bounds-table", "k_max": 2}))
        code, cap = run_cli(capsys, "--config", str(cfg))
        assert code == 0 and cap.out.startswith("k,p_k")

    @pytest.mark.parametrize(
        "argv",
        [
            ("spectrum", "--adversary", '{"variant": "nope"}'),
            ("spectrum", "--adversary", json.dumps(STAR), "--n", "3"),
            ("verify", "--n", "9", "--k", "2"),
            ("spectrum", "--adversary", '{"variant": "biased", "x1": "011", "x2": "101", "bias": "1/3"}'),
        ],
    )
    def test_bad_input_exit_two(self, capsys, argv):
        code, cap = run_cli(capsys, *argv)
        assert code == 2 and cap.err.startswith("error:")

    def test_no_command(self, capsys):
        code, _ = run_cli(capsys)
        assert code == 2
