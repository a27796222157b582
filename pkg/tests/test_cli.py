import csv
import io
import json
import math

import pytest

from qkclf import circuits, experiment, kernels, moments, noise, sampling
from qkclf.circuits import ClassifierSpec
from qkclf.cli import main
from qkclf.errors import ConfigInvalid

TWO_PI = 2 * math.pi


def toy_config(**overrides):
    cfg = {
        "schema_version": 1,
        "dataset": {"toy": {"theta": math.pi / 2}},
        "classifier": {"variant": "STC", "copies": 1, "label_width": 1},
        "shots": {"count": 1024, "seeds": [0]},
        "sweep": {"param": "theta", "start": 0, "stop": TWO_PI, "steps": 41},
    }
    cfg.update(overrides)
    return cfg


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestRun:
    def test_theta_sweep_analytic(self, tmp_path, capsys):
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, toy_config()))], capsys)
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 41
        assert list(rows[0]) == list(experiment.CSV_COLUMNS)
        for r in rows:
            theta = float(r["sweep_value"])
            assert abs(float(r["f_analytic"]) - math.sin(theta) / 2) < 1e-12
            assert abs(float(r["expectation"]) - math.sin(theta) / 2) < 1e-12

    def test_depolarized_sweep(self, tmp_path, capsys):
        cfg = toy_config(noise={"depolarizing": 0.2})
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, cfg))], capsys)
        assert code == 0
        for r in read_csv(out):
            theta = float(r["sweep_value"])
            assert abs(float(r["expectation"]) - 0.8 * math.sin(theta) / 2) < 1e-12
            assert float(r["noise_scale"]) == pytest.approx(0.8, abs=1e-15)

    def test_single_point(self, tmp_path, capsys):
        cfg = toy_config()
        del cfg["sweep"]
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, cfg))], capsys)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 1
        assert rows[0]["sweep_param"] == "" and rows[0]["sweep_value"] == ""
        assert float(rows[0]["f_analytic"]) == pytest.approx(0.5, abs=1e-15)

    def test_byte_identical(self, tmp_path, capsys):
        path = write(tmp_path, toy_config(shots={"count": 512, "seeds": [3, 9], "repetitions": 2}))
        outs = []
        for i in range(2):
            target = tmp_path / f"out{i}.csv"
            assert main(["run", "--config", str(path), "--out", str(target)]) == 0
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]
        assert main(["run", "--config", str(path), "--jobs", "4", "--out", str(tmp_path / "par.csv")]) == 0
        assert (tmp_path / "par.csv").read_bytes() == outs[0]

    def test_seed_and_shot_overrides(self, tmp_path, capsys):
        path = write(tmp_path, toy_config(shots={"count": 100, "seeds": [1, 2]}))
        code, out, _ = run_cli(["run", "--config", str(path), "--seed", "77", "--shots", "300"], capsys)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 41
        assert {r["seed"] for r in rows} == {"77"} and {r["shots_used"] for r in rows} == {"300"}

    def test_json_format(self, tmp_path, capsys):
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, toy_config())), "--format", "json"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["columns"] == list(experiment.CSV_COLUMNS) and len(doc["rows"]) == 41

    def test_round_trip_through_library(self, tmp_path, capsys):
        cfg = toy_config(
            dataset={
                "training": [[1, 0], [[0.6, 0], [0, 0.8]], [1, 1]],
                "labels": [0, 1, 1],
                "weights": [0.5, 0.25, 0.25],
                "test": [[0, 1], 0.5],
            },
            classifier={"variant": "HTC"},
            sweep={"param": "phi", "values": [0.0, 1.0, math.pi]},
            shots={"count": 2000, "seeds": [5], "c": 3, "delta": 0.2},
        )
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, cfg))], capsys)
        assert code == 0
        data = circuits.LabeledDataset.from_vectors(
            [[1, 0], [0.6, 0.8j], [1, 1]], [0, 1, 1], [1j, 0.5], [0.5, 0.25, 0.25]
        )
        for r in read_csv(out):
            angles = (math.pi / 2, math.pi / 2, float(r["sweep_value"]))
            spec = ClassifierSpec("HTC", angles=angles)
            f = kernels.general_expectation(data, angles, "HTC")
            assert float(r["f_analytic"]) == f
            p = circuits.simulate_distribution(data, spec, reduce=True)
            m = moments.moments_from_distribution(p, 1)
            assert float(r["expectation"]) == pytest.approx(m.mean, abs=1e-15)
            assert float(r["variance"]) == pytest.approx(m.variance, abs=1e-15)
            assert int(r["shots_planned"]) == moments.plan_shots(f, 1, 3, 0.2).shots
            rec = sampling.sample(p, 2000, seed=5)
            assert float(r["empirical_mean"]) == rec.mean()
            assert r["label_mean"] == str(sampling.decide_mean(rec))

    def test_noisy_planned_shots(self, tmp_path, capsys):
        cfg = toy_config(noise={"pauli": {"I": 0.9, "X": 0.1}}, sweep={"param": "theta", "values": [math.pi / 6]})
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, cfg))], capsys)
        (row,) = read_csv(out)
        base = moments.plan_shots(0.25, 1, 2.0, moments.DEFAULT_DELTA).shots
        assert int(row["shots_planned"]) == noise.noise_overhead(0.8, base).planned_shots

    def test_lambda_sweep(self, tmp_path, capsys):
        cfg = toy_config(sweep={"param": "lambda", "values": [1, 2, 3]})
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, cfg))], capsys)
        rows = read_csv(out)
        assert code == 0
        assert [float(r["expectation"]) for r in rows] == pytest.approx([0.5, 1.0, 1.5], abs=1e-12)
        assert len({r["shots_planned"] for r in rows}) == 1
        assert rows[2]["label_majority"] == "abstain"


class TestValidate:
    def test_valid(self, tmp_path, capsys):
        code, out, _ = run_cli(["validate", "--config", str(write(tmp_path, toy_config()))], capsys)
        assert code == 0 and out.strip() == "ok"
        assert experiment.validate(toy_config()) == []

    def test_weights(self, tmp_path, capsys):
        cfg = toy_config(dataset={"training": [[1, 0], [0, 1]], "labels": [0, 1], "weights": [0.5, 0.4], "test": [1, 0]})
        del cfg["sweep"]
        code, out, _ = run_cli(["validate", "--config", str(write(tmp_path, cfg))], capsys)
        assert code == 2 and "weights must sum to 1" in out

    def test_negative_shots(self):
        diags = experiment.validate(toy_config(shots={"count": -5}))
        assert any(d.startswith("shots.count") for d in diags)

    def test_lists_every_problem(self):
        cfg = toy_config(schema_version=9, shots={"count": 0, "delta": 2}, sweep={"param": "bogus"})
        diags = experiment.validate(cfg)
        assert len(diags) >= 4

    @pytest.mark.parametrize(
        "cfg",
        [
            toy_config(noise={"depolarizing": 0.1}, classifier={"label_width": 2}),
            toy_config(noise={"pauli": {"IIIIIII": 1.0}}),
            toy_config(classifier={"variant": "HTC", "copies": 2}),
            toy_config(sweep={"param": "k_copies", "values": [1, 0]}),
            toy_config(dataset={"file": "missing.json"}),
        ],
    )
    def test_validate_iff_run(self, tmp_path, cfg):
        diags = experiment.validate(cfg, tmp_path)
        assert diags
        with pytest.raises(ConfigInvalid):
            experiment.parse_config(cfg, tmp_path)

    def test_dataset_file(self, tmp_path, capsys):
        (tmp_path / "data.json").write_text(json.dumps({"training": [[1, 0]], "labels": [0], "test": [1, 0]}))
        cfg = toy_config(dataset={"file": "data.json"})
        del cfg["sweep"]
        code, out, _ = run_cli(["run", "--config", str(write(tmp_path, cfg))], capsys)
        assert code == 0 and float(read_csv(out)[0]["f_analytic"]) == 1.0


class TestExitCodes:
    def test_config_error(self, tmp_path, capsys):
        code, _, err = run_cli(["run", "--config", str(write(tmp_path, toy_config(schema_version=2)))], capsys)
        assert code == 2 and "schema_version" in err

    def test_missing_config(self, tmp_path, capsys):
        code, _, _ = run_cli(["run", "--config", str(tmp_path / "nope.json")], capsys)
        assert code == 2

    def test_bad_arguments(self, capsys):
        assert run_cli(["run"], capsys)[0] == 2
        assert run_cli(["frobnicate"], capsys)[0] == 2
        assert run_cli(["repro-toy", "--seed", "-1"], capsys)[0] == 2

    def test_runtime_error(self, capsys):
        code, _, err = run_cli(["shots-plan", "--score", "0"], capsys)
        assert code == 1 and "error" in err

    def test_unwritable_output(self, tmp_path, capsys):
        code, _, _ = run_cli(
            ["run", "--config", str(write(tmp_path, toy_config())), "--out", str(tmp_path / "no" / "dir.csv")], capsys
        )
        assert code == 1


@pytest.fixture(scope="module")
def rows():
    return experiment.repro_toy(shots=8192, seeds=range(100), steps=5)


class TestReproToy:
    def _at(self, rows, theta):
        return [r for r in rows if abs(r.sweep_value - theta) < 1e-12]

    def test_positive_row(self, rows):
        sel = self._at(rows, math.pi / 2)
        assert len(sel) == 100
        assert sum(r.label_mean == 0 and r.label_majority == 0 for r in sel) >= 99

    def test_negative_row(self, rows):
        sel = self._at(rows, 3 * math.pi / 2)
        assert sum(r.label_mean == 1 and r.label_majority == 1 for r in sel) >= 99

    def test_zero_row(self, rows):
        sel = self._at(rows, 0.0)
        assert all(r.shots_planned is None for r in sel)
        inside = sum(abs(r.empirical_mean) <= 3 / math.sqrt(8192) for r in sel)
        assert inside >= 99

    def test_cli(self, capsys):
        code, out, _ = run_cli(["repro-toy", "--seeds", "2", "--steps", "3", "--shots", "256"], capsys)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 6 and rows[0]["sweep_param"] == "theta"

    def test_noisy_cli(self, capsys):
        code, out, _ = run_cli(["repro-toy", "--steps", "5", "--depolarizing", "0.5"], capsys)
        rows = read_csv(out)
        assert code == 0
        assert float(rows[1]["expectation"]) == pytest.approx(0.25, abs=1e-12)


class TestOtherCommands:
    def test_shots_plan(self, capsys):
        code, out, _ = run_cli(["shots-plan", "--score", "0.5", "--delta", "0.1", "--noise-scale", "0.5"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["shots"] == 120 and doc["shots_noisy"] == 480

    def test_shots_plan_depolarizing_csv(self, capsys):
        code, out, _ = run_cli(
            ["shots-plan", "--score", "0.5", "--delta", "0.1", "--depolarizing", "0.2", "--format", "csv"], capsys
        )
        (row,) = read_csv(out)
        assert code == 0 and float(row["multiplier"]) == pytest.approx(1.5625)

    def test_angle_scan(self, tmp_path, capsys):
        code, out, _ = run_cli(["angle-scan", "--config", str(write(tmp_path, toy_config())), "--steps", "5"], capsys)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 125
        assert max(float(r["objective"]) for r in rows) == pytest.approx(0.25, abs=1e-12)
        for r in rows:
            assert float(r["objective"]) + float(r["variance"]) == pytest.approx(1.0, abs=1e-12)

    def test_noise_sweep(self, tmp_path, capsys):
        cfg = toy_config()
        del cfg["sweep"]
        code, out, _ = run_cli(["noise-sweep", "--config", str(write(tmp_path, cfg)), "--steps", "4", "--p-max", "0.9"], capsys)
        rows = read_csv(out)
        assert code == 0 and [r["sweep_param"] for r in rows] == ["p"] * 4
        for r in rows:
            p = float(r["sweep_value"])
            assert float(r["expectation"]) == pytest.approx((1 - p) * 0.5, abs=1e-12)
            assert float(r["noise_scale"]) == pytest.approx(1 - p, abs=1e-15)
