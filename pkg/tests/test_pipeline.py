import csv
import json
from pathlib import Path

import pytest

from privsynth.anonymity import QuasiIdentifierSpec
from privsynth.data import write_csv
from privsynth.errors import ConfigInvalid, StageError
from privsynth.noise import NoiseConfig
from privsynth.pipeline import (
    PipelineConfig,
    SweepGrid,
    SweepReport,
    emit_plot_data,
    point_dir_name,
    run_pipeline,
    run_sweep,
)
from privsynth.smote import SmoteConfig, synthetic_count
from privsynth.surrogate import make_surrogate


@pytest.fixture(scope="module")
def small_table(tmp_path_factory):
    """A small generated sensor table written to disk with its schema."""
    root = tmp_path_factory.mktemp("data")
    data = make_surrogate(700, seed=11)
    csv_path = root / "data.csv"
    schema_path = root / "schema.json"
    write_csv(data, csv_path)
    data.schema.save(schema_path)
    return data, str(csv_path), str(schema_path)


def config(small_table, out_dir, **overrides):
    _, csv_path, schema_path = small_table
    base = dict(
        input=csv_path,
        schema=schema_path,
        minority_label=12,
        smote=SmoteConfig(amount_percent=200, neighbors=3),
        noise=NoiseConfig(level=0.3),
        k=2,
        classifiers=("nb", "dt"),
        test_fraction=0.3,
        seed=77,
        out_dir=str(out_dir),
    )
    base.update(overrides)
    return PipelineConfig(**base)


class TestRunPipeline:
    def test_artifacts_and_shapes(self, small_table, tmp_path):
        data, _, _ = small_table
        cfg = config(small_table, tmp_path / "run")
        released, risk, reports = run_pipeline(cfg)

        # split sizes: per-class round(0.3 * n_c) went to test
        test_size = sum(round(0.3 * c) for c in data.class_counts().values())
        minority_train = data.class_counts()[12] - round(0.3 * data.class_counts()[12])
        expected = (len(data) - test_size) + synthetic_count(200, minority_train)
        assert len(released) == expected
        assert released.provenance == "perturbed"

        out = Path(cfg.out_dir)
        assert (out / "released.csv").exists()
        assert (out / "risk.json").exists()
        assert (out / "eval_nb.json").exists()
        assert (out / "eval_dt.json").exists()
        assert (out / "run_manifest.json").exists()
        assert len(reports) == 2
        assert 0.0 <= risk.risk <= 1.0

    def test_zero_noise_released_equals_merged_values(self, small_table, tmp_path):
        cfg = config(small_table, tmp_path / "g0",
                     noise=NoiseConfig(level=0.0),
                     smote=SmoteConfig(amount_percent=100, neighbors=3))
        released, risk, reports = run_pipeline(cfg)
        # original train rows pass through bit-identical at g = 0
        data, _, _ = small_table
        released_keys = {row.tobytes() for row in released.features}
        test_size = sum(round(0.3 * c) for c in data.class_counts().values())
        assert len(released) > len(data) - test_size  # synthetic added
        # audit and eval artifacts still produced
        assert reports and risk is not None

    def test_byte_identical_reruns(self, small_table, tmp_path):
        cfg_a = config(small_table, tmp_path / "a")
        cfg_b = config(small_table, tmp_path / "b")
        run_pipeline(cfg_a)
        run_pipeline(cfg_b)
        for name in ("released.csv", "risk.json", "eval_nb.json", "eval_dt.json"):
            a = (Path(cfg_a.out_dir) / name).read_bytes()
            b = (Path(cfg_b.out_dir) / name).read_bytes()
            assert a == b, name

    def test_different_seed_changes_release(self, small_table, tmp_path):
        cfg_a = config(small_table, tmp_path / "a2")
        cfg_b = config(small_table, tmp_path / "b2", seed=78)
        run_pipeline(cfg_a)
        run_pipeline(cfg_b)
        a = (Path(cfg_a.out_dir) / "released.csv").read_bytes()
        b = (Path(cfg_b.out_dir) / "released.csv").read_bytes()
        assert a != b

    def test_stage_error_carries_stage_name(self, small_table, tmp_path):
        cfg = config(small_table, tmp_path / "bad", minority_label="no-such-class")
        with pytest.raises(StageError) as err:
            run_pipeline(cfg)
        assert err.value.stage == "smote"

    def test_test_split_never_released(self, small_table, tmp_path):
        data, _, _ = small_table
        cfg = config(small_table, tmp_path / "guard",
                     noise=NoiseConfig(level=0.0))
        released, _, _ = run_pipeline(cfg)
        # rebuild the split exactly as the pipeline does
        from privsynth.data import derive_seed, stratified_split

        train, test = stratified_split(data, 0.3, derive_seed(77, "split"))
        train_keys = {row.tobytes() for row in train.features}
        released_keys = {row.tobytes() for row in released.features}
        for row in test.features:
            key = row.tobytes()
            if key not in train_keys:  # duplicates may straddle the split
                assert key not in released_keys


class TestRunSweep:
    def test_singleton_grid_matches_run_pipeline(self, small_table, tmp_path):
        cfg = config(small_table, tmp_path / "sweep1")
        grid = SweepGrid((0.3,), (200,), (2,))
        report = run_sweep(cfg, grid)
        assert len(report.rows) == 2  # one per classifier
        assert {r.classifier for r in report.rows} == {"nb", "dt"}
        assert all(r.status == "ok" for r in report.rows)

        point = Path(cfg.out_dir) / point_dir_name(0.3, 200, 2)
        assert (point / "released.csv").exists()
        eval_nb = json.loads((point / "eval_nb.json").read_text())
        row_nb = next(r for r in report.rows if r.classifier == "nb")
        assert row_nb.accuracy == pytest.approx(eval_nb["accuracy"], abs=1e-12)
        risk = json.loads((point / "risk.json").read_text())
        assert row_nb.risk == pytest.approx(risk["risk"], abs=1e-12)

    def test_row_count_and_order(self, small_table, tmp_path):
        cfg = config(small_table, tmp_path / "sweep2")
        grid = SweepGrid((0.3, 0.1), (100, 200), (2,))
        report = run_sweep(cfg, grid)
        assert len(report.rows) == len(grid) * len(cfg.classifiers)
        coords = [(r.noise_level, r.smote_amount, r.k) for r in report.rows]
        assert coords == sorted(coords)  # stable sorted order, not completion order

    def test_failing_point_isolated(self, small_table, tmp_path):
        # neighbors=5 with a tiny remainder subset fails at E=110 but not E=100
        cfg = config(small_table, tmp_path / "sweep3",
                     smote=SmoteConfig(amount_percent=100, neighbors=5))
        grid = SweepGrid((0.1,), (100, 110), (2,))
        report = run_sweep(cfg, grid)
        by_amount = {}
        for row in report.rows:
            by_amount.setdefault(row.smote_amount, set()).add(row.status)
        assert by_amount[100] == {"ok"}
        assert by_amount[110] == {"failed"}
        failed = next(r for r in report.rows if r.status == "failed")
        assert failed.error
        assert failed.accuracy is None

    def test_csv_deterministic_across_runs(self, small_table, tmp_path):
        grid = SweepGrid((0.0, 0.3), (100,), (2,))
        cfg_a = config(small_table, tmp_path / "da")
        cfg_b = config(small_table, tmp_path / "db")
        run_sweep(cfg_a, grid)
        run_sweep(cfg_b, grid)
        a = (Path(cfg_a.out_dir) / "sweep.csv").read_bytes()
        b = (Path(cfg_b.out_dir) / "sweep.csv").read_bytes()
        assert a == b

    def test_json_round_trip(self, small_table, tmp_path):
        cfg = config(small_table, tmp_path / "sweep4")
        report = run_sweep(cfg, SweepGrid((0.1,), (100,), (2,)))
        loaded = SweepReport.load_json(Path(cfg.out_dir) / "sweep.json")
        assert loaded == report


@pytest.fixture(scope="module")
def sweep_report(small_table, tmp_path_factory):
    cfg = config(small_table, tmp_path_factory.mktemp("emit"), classifiers=("nb", "dt"))
    grid = SweepGrid((0.1, 0.3), (100, 200), (2,))
    return run_sweep(cfg, grid)


class TestEmitPlotData:
    def test_file_counts_by_grouping(self, sweep_report, tmp_path):
        written = emit_plot_data(sweep_report, tmp_path)
        names = sorted(p.name for p in written)
        assert names == [
            "accuracy_vs_noise_E100_k2.csv",
            "accuracy_vs_noise_E200_k2.csv",
            "risk_vs_smote_g0.1_k2.csv",
            "risk_vs_smote_g0.3_k2.csv",
        ]

    def test_headers_exact(self, sweep_report, tmp_path):
        emit_plot_data(sweep_report, tmp_path)
        acc_header = (tmp_path / "accuracy_vs_noise_E100_k2.csv").read_text().splitlines()[0]
        risk_header = (tmp_path / "risk_vs_smote_g0.1_k2.csv").read_text().splitlines()[0]
        assert acc_header == "g,classifier,accuracy"
        assert risk_header == "smote_percent,risk"

    def test_round_trip_matches_report(self, sweep_report, tmp_path):
        emit_plot_data(sweep_report, tmp_path)
        with open(tmp_path / "accuracy_vs_noise_E200_k2.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            match = next(
                r for r in sweep_report.rows
                if r.smote_amount == 200 and r.classifier == row["classifier"]
                and r.noise_level == float(row["g"])
            )
            assert abs(match.accuracy - float(row["accuracy"])) < 1e-9
        with open(tmp_path / "risk_vs_smote_g0.3_k2.csv", newline="") as fh:
            risk_rows = list(csv.DictReader(fh))
        for row in risk_rows:
            match = next(
                r for r in sweep_report.rows
                if r.noise_level == 0.3 and r.smote_amount == int(row["smote_percent"])
            )
            assert abs(match.risk - float(row["risk"])) < 1e-9

    def test_empty_report_rejected(self):
        with pytest.raises(ConfigInvalid):
            emit_plot_data(SweepReport(()), ".")


class TestConfigSerialization:
    def test_round_trip(self, small_table, tmp_path):
        cfg = config(small_table, tmp_path / "cfg",
                     qi=QuasiIdentifierSpec(("acc_chest_x",), {"acc_chest_x": 5}))
        again = PipelineConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_validation(self, small_table, tmp_path):
        with pytest.raises(ConfigInvalid):
            config(small_table, tmp_path, k=0)
        with pytest.raises(ConfigInvalid):
            config(small_table, tmp_path, classifiers=("mystery",))
        with pytest.raises(ConfigInvalid):
            config(small_table, tmp_path, test_fraction=1.5)
