import dataclasses
import json
import os

import pytest

from conftest import TARGET, fixture_path, read_fixture
from sistream.channel import ChannelConfig
from sistream.cli import main
from sistream.errors import ContractError, ParseError
from sistream.orchestrator import SnrProfile
from sistream.pipeline import (ExperimentConfig, ThresholdOutcome, emit_plot_data,
                               goal_means_from_receiver_log, load_config, run_experiment,
                               threshold_recommendation, threshold_str)

PROFILE_720P = SnrProfile(alpha=5e-6, snr_low_linear=0.1)
PROFILE_2160P = SnrProfile(alpha=2e-6, snr_low_linear=0.1)


def config_720p(**overrides):
    cfg = ExperimentConfig(
        manifest_path=fixture_path("manifest_720p.txt"),
        detection_log_path=fixture_path("detections_720p.csv"),
        descriptor=TARGET,
        snr_profile=PROFILE_720P,
        channel=ChannelConfig(seed=987654321))
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def config_2160p(**overrides):
    cfg = ExperimentConfig(
        manifest_path=fixture_path("manifest_2160p.txt"),
        detection_log_path=fixture_path("detections_2160p.csv"),
        descriptor=TARGET,
        snr_profile=PROFILE_2160P,
        channel=ChannelConfig(seed=987654321))
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def test_run_720p_savings():
    report = run_experiment(config_720p())
    by_threshold = {r.threshold: r for r in report.results}
    assert by_threshold[0.8].power.savings_fraction == pytest.approx(0.022, abs=5e-4)
    assert by_threshold[0.8].power.total_power_si == pytest.approx(15.14, rel=1e-9)


def test_run_2160p_savings():
    report = run_experiment(config_2160p())
    by_threshold = {r.threshold: r for r in report.results}
    assert by_threshold[0.8].power.savings_fraction == pytest.approx(0.385, abs=1e-9)


def test_power_monotone_in_threshold_end_to_end():
    report = run_experiment(config_720p())
    totals = [r.power.total_power_si for r in report.results]
    assert totals == sorted(totals, reverse=True)
    assert all(r.power.total_power_si <= r.power.total_power_baseline
               for r in report.results)


def test_goal_report_from_receiver_log(manifest_2160p):
    means = goal_means_from_receiver_log(read_fixture("recv_2160p_t0.8.csv"),
                                         manifest_2160p, TARGET, 1)
    assert means[1] == pytest.approx(0.4, abs=1e-12)
    assert means[2] == pytest.approx(0.975, abs=1e-12)
    assert means[3] == pytest.approx(0.738, abs=1e-12)
    assert means[0] == 0.0
    assert all(m == 0.0 for m in means[4:])


def test_run_with_receiver_log_template():
    cfg = config_2160p(receiver_log_path=fixture_path("recv_2160p_t{threshold}.csv"))
    report = run_experiment(cfg)
    assert report.goal.source == "receiver-log"
    by_threshold = {r.threshold: r.goal_means for r in report.results}
    assert by_threshold[0.4][1] == pytest.approx(0.321, abs=1e-12)
    assert by_threshold[0.9][3] == pytest.approx(0.75, abs=1e-12)


def test_builtin_degradation_bounds_and_monotonicity():
    report = run_experiment(config_720p())
    assert report.goal.source == "builtin-degradation"
    for r in report.results:
        assert all(0.0 <= m <= 1.0 for m in r.goal_means)
    by_threshold = {r.threshold: r for r in report.results}
    thresholds = sorted(by_threshold)
    for lo, hi in zip(thresholds, thresholds[1:]):
        for g in range(len(by_threshold[lo].goal_means)):
            if not by_threshold[hi].importance.important[g]:
                assert by_threshold[hi].goal_means[g] <= by_threshold[lo].goal_means[g] + 1e-12


def make_outcomes():
    # shaped like the 2160p receiver-log fixture run
    return [
        ThresholdOutcome(threshold=0.4, important=(0, 0, 1, 1, 1, 0, 0, 0, 0, 0),
                         goal_means=(0, 0.321, 0.9921, 0.742, 0, 0, 0, 0, 0, 0),
                         total_power_si=19.21875),
        ThresholdOutcome(threshold=0.8, important=(0, 0, 1, 1, 0, 0, 0, 0, 0, 0),
                         goal_means=(0, 0.4, 0.975, 0.738, 0, 0, 0, 0, 0, 0),
                         total_power_si=15.375),
        ThresholdOutcome(threshold=0.9, important=(0, 0, 0, 1, 0, 0, 0, 0, 0, 0),
                         goal_means=(0, 0.385, 0.964, 0.75, 0, 0, 0, 0, 0, 0),
                         total_power_si=7.275),
    ]


def test_recommendation_prefers_cheapest_qualifier():
    rec = threshold_recommendation(make_outcomes(), 0.7, gop_ids=(2, 3))
    assert rec.feasible and rec.threshold == 0.8
    issues = dict(rec.shortfalls)
    assert issues[0.4] == () and issues[0.8] == ()
    assert any("not marked important" in s for s in issues[0.9])


def test_recommendation_single_qualifier():
    # only 0.9 clears 0.745 on GOP 3 (0.742 / 0.738 / 0.75)
    rec = threshold_recommendation(make_outcomes(), 0.745, gop_ids=(3,))
    assert rec.feasible and rec.threshold == 0.9


def test_recommendation_default_gops_are_strictest_importance():
    rec = threshold_recommendation(make_outcomes(), 0.7)
    assert rec.gop_ids == (3,)
    assert rec.threshold == 0.9  # every threshold qualifies on GOP 3; 0.9 is cheapest


def test_recommendation_infeasible_target():
    rec = threshold_recommendation(make_outcomes(), 1.01, gop_ids=(2,))
    assert not rec.feasible and rec.threshold is None
    assert all(issues for _, issues in rec.shortfalls)


def test_recommendation_tie_breaks_to_larger_threshold():
    outcomes = [
        ThresholdOutcome(0.4, (1,), (0.9,), total_power_si=5.0),
        ThresholdOutcome(0.8, (1,), (0.9,), total_power_si=5.0),
    ]
    rec = threshold_recommendation(outcomes, 0.5, gop_ids=(0,))
    assert rec.threshold == 0.8


def test_recommendation_rejects_unknown_gop():
    with pytest.raises(ContractError):
        threshold_recommendation(make_outcomes(), 0.5, gop_ids=(99,))


def test_plot_data_shapes():
    report = run_experiment(config_720p())
    docs = emit_plot_data(report)
    snr_rows = docs["plot_required_snr.csv"].strip().splitlines()
    assert len(snr_rows) == 1 + 3 * 10
    series_rows = docs["plot_detection_probability.csv"].strip().splitlines()
    assert len(series_rows) == 1 + 300


def test_plot_all_zero_series_is_flat():
    from sistream.pipeline import plot_series_text
    text = plot_series_text([0.0, 0.0, 0.0])
    assert text.splitlines()[1:] == ["0,0.0", "1,0.0", "2,0.0"]


def test_plot_snr_highlights_important_gops():
    report = run_experiment(config_2160p())
    rsv_04 = next(r.rsv for r in report.results if r.threshold == 0.4)
    snrs = {e.gop_id: e.required_snr_linear for e in rsv_04.entries}
    lowest_important = min(snrs[g] for g in (2, 3, 4))
    highest_other = max(v for g, v in snrs.items() if g not in (2, 3, 4))
    assert lowest_important > highest_other


def test_cross_validation_runs_before_transmission(tmp_path):
    bad_log = fixture_path("detections_720p.csv")
    text = read_fixture("detections_720p.csv") + "9999,car,Ford Expedition 2017,0.5\n"
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ContractError):
        run_experiment(config_720p(detection_log_path=str(path)))
    assert os.path.exists(bad_log)


def test_load_config_resolves_paths_and_defaults():
    cfg = load_config(fixture_path("config_720p.json"))
    assert os.path.isabs(cfg.manifest_path) or cfg.manifest_path.startswith(fixture_path(""))
    assert cfg.thresholds == (0.4, 0.8, 0.9)
    assert cfg.snr_profile == PROFILE_720P
    assert cfg.channel.seed == 987654321
    assert cfg.descriptor == TARGET


def test_load_config_rejects_unknown_keys(tmp_path):
    raw = json.loads(read_fixture("config_720p.json"))
    raw["surprise"] = 1
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    with pytest.raises(ParseError, match="unknown config keys"):
        load_config(str(path))


def test_load_config_requires_descriptor(tmp_path):
    raw = json.loads(read_fixture("config_720p.json"))
    del raw["descriptor"]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    with pytest.raises(ParseError, match="descriptor"):
        load_config(str(path))


def test_threshold_str():
    assert threshold_str(0.4) == "0.4"
    assert threshold_str(0.85) == "0.85"
    assert threshold_str(1.0) == "1"


def test_config_validation():
    with pytest.raises(ValueError):
        config_720p(thresholds=())
    with pytest.raises(ValueError):
        config_720p(thresholds=(0.0,))
    with pytest.raises(ValueError):
        config_720p(emit_received_payloads=True)  # no output_dir


# --- CLI surface ---------------------------------------------------------


def test_cli_validate():
    assert main(["validate", "--config", fixture_path("config_720p.json")]) == 0


def test_cli_run_and_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--config", fixture_path("config_720p.json"), "--out", str(out)])
    assert code == 0
    expected = {"frame_vector_t0.4.txt", "frame_vector_t0.8.txt", "frame_vector_t0.9.txt",
                "rsv_t0.4.txt", "rsv_t0.8.txt", "rsv_t0.9.txt",
                "link_t0.4.txt", "link_t0.8.txt", "link_t0.9.txt",
                "power_t0.4.txt", "power_t0.8.txt", "power_t0.9.txt",
                "goal_report.csv", "power_summary.csv",
                "plot_detection_probability.csv", "plot_required_snr.csv"}
    assert set(os.listdir(out)) == expected
    assert "savings 2.196%" in capsys.readouterr().out


def test_cli_stage_chain_matches_run(tmp_path):
    cfg = fixture_path("config_720p.json")
    staged = tmp_path / "staged"
    full = tmp_path / "full"
    assert main(["annotate", "--config", cfg, "--out", str(staged)]) == 0
    assert main(["orchestrate", "--config", cfg, "--out", str(staged)]) == 0
    assert main(["transmit", "--config", cfg, "--out", str(staged)]) == 0
    assert main(["report", "--config", cfg, "--out", str(staged)]) == 0
    assert main(["run", "--config", cfg, "--out", str(full)]) == 0
    for name in os.listdir(full):
        with open(os.path.join(full, name), "rb") as fh_full, \
                open(os.path.join(staged, name), "rb") as fh_staged:
            assert fh_full.read() == fh_staged.read(), name


def test_cli_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("resolution_label: 9999p\nfps: 30\ngop_length_frames: 30\nmtu_bytes: 1500\n\n"
                   "index,frame_type,size_bytes,payload_seed\n0,I,10,1\n")
    code = main(["validate", "--manifest", str(bad),
                 "--detection-log", fixture_path("detections_720p.csv"),
                 "--vehicle-make", "Ford Expedition 2017"])
    assert code == 2


def test_cli_contract_error_exit_code(tmp_path):
    log = tmp_path / "log.csv"
    log.write_text("frame_index,vehicle_type,vehicle_make,probability\n"
                   "9999,car,Ford Expedition 2017,0.5\n")
    code = main(["validate", "--manifest", fixture_path("manifest_720p.txt"),
                 "--detection-log", str(log), "--vehicle-make", "Ford Expedition 2017"])
    assert code == 3


def test_cli_infeasible_exit_code(tmp_path):
    code = main(["run", "--config", fixture_path("config_2160p.json"),
                 "--out", str(tmp_path / "o"),
                 "--receiver-log", fixture_path("recv_2160p_t{threshold}.csv"),
                 "--target-detection", "1.01", "--target-gops", "2,3"])
    assert code == 4
    rec_text = (tmp_path / "o" / "recommendation.txt").read_text()
    assert "feasible: 0" in rec_text


def test_cli_recommendation_flow(tmp_path):
    code = main(["run", "--config", fixture_path("config_2160p.json"),
                 "--out", str(tmp_path / "o"),
                 "--receiver-log", fixture_path("recv_2160p_t{threshold}.csv"),
                 "--target-detection", "0.7", "--target-gops", "2,3"])
    assert code == 0
    rec_text = (tmp_path / "o" / "recommendation.txt").read_text()
    assert "recommended_threshold: 0.8" in rec_text


def test_cli_calibrate(capsys):
    code = main(["calibrate", "--config", fixture_path("config_720p.json"),
                 "--threshold", "0.8", "--target-total", "15.14", "--snr-low", "0.1"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("alpha: ")
    assert float(out.split(":", 1)[1]) == pytest.approx(5e-6, rel=1e-9)


def test_cli_calibrate_infeasible():
    code = main(["calibrate", "--config", fixture_path("config_720p.json"),
                 "--threshold", "0.8", "--target-total", "0.1", "--snr-low", "0.1"])
    assert code == 4


def test_cli_received_payload_emission(tmp_path):
    out = tmp_path / "o"
    code = main(["run", "--config", fixture_path("config_720p.json"), "--out", str(out),
                 "--thresholds", "0.8", "--emit-received-payloads"])
    assert code == 0
    received = out / "received_t0.8"
    files = sorted(os.listdir(received))
    assert len(files) == 300
    assert files[0] == "frame_000000.bin"
