import math
from dataclasses import replace

import numpy as np
import pytest
import yaml

from qteleport.config import ConfigError, ExperimentConfig, dump_config, from_dict, load_config, noiseless_config, reference_config
from qteleport.experiment import (
    CHUNK,
    SLOTS_PER_SHOT,
    RunSummary,
    exact_fidelities,
    read_shot_log,
    run_experiment,
    run_shots,
    shot_context,
    shot_uniforms,
    worker_count,
    write_shot_log,
)
from qteleport.linalg import DomainError
from qteleport.protocol import bell_pair_fidelity


def small(cfg: ExperimentConfig, shots: int, seed: int | None = None, **proto) -> ExperimentConfig:
    cfg = replace(cfg, protocol=replace(cfg.protocol, shots_per_setting=shots, **proto))
    return cfg if seed is None else replace(cfg, seed=seed)


# -- configuration ------------------------------------------------------------


def test_unknown_keys_rejected_with_paths():
    data = {
        "seed": 3,
        "device": {"qubits": [{"label": "Q1", "t1": 1e-6, "t2": 1e-6, "t3": 5}], "gate_time": 1},
        "readout": {"thermal": {"discard": 0.1}},
        "extra": True,
    }
    with pytest.raises(ConfigError) as err:
        from_dict(data)
    problems = err.value.problems
    for path in ("device.qubits[0].t3", "device.gate_time", "readout.thermal.discard", "extra"):
        assert any(p.startswith(path + ":") for p in problems), (path, problems)


def test_type_and_range_errors_enumerated():
    data = {
        "seed": "seven",
        "device": {"single_qubit_time": -1e-9, "qubits": [{"label": "Q1", "t1": 1e-6, "t2": 3e-6}] * 3},
        "readout": {"q3_target": 1.2, "decay_during_readout": "yes"},
        "protocol": {"shots_per_setting": 0, "remap": "phi", "mode": "homodyne"},
    }
    with pytest.raises(ConfigError) as err:
        from_dict(data)
    text = str(err.value)
    assert "seed: expected an integer" in text
    assert "readout.decay_during_readout: expected true/false" in text
    data["seed"] = 1
    data["readout"]["decay_during_readout"] = True
    with pytest.raises(ConfigError) as err:
        from_dict(data)
    text = "\n".join(err.value.problems)
    for path in (
        "device.qubits[0]: t2 must not exceed 2*t1",
        "device.single_qubit_time",
        "readout.q3_target",
        "protocol.shots_per_setting",
        "protocol.remap",
        "protocol.mode",
    ):
        assert path in text


def test_missing_required_field():
    with pytest.raises(ConfigError) as err:
        from_dict({"protocol": {"inputs": [{"name": "a"}]}})
    assert "protocol.inputs[0].theta: required key missing" in str(err.value)


def test_config_roundtrip(tmp_path):
    cfg = reference_config(shots_per_setting=123, remap="psip")
    dump_config(cfg, tmp_path / "c.yaml")
    back = load_config(tmp_path / "c.yaml")
    assert back == cfg
    nl = noiseless_config()
    dump_config(nl, tmp_path / "n.yaml")
    assert "t1: .inf" in (tmp_path / "n.yaml").read_text()
    assert load_config(tmp_path / "n.yaml") == nl


def test_reference_device_from_config():
    dev = reference_config().to_device()
    assert abs(bell_pair_fidelity(dev) - 0.93) < 1e-12
    assert [q.t1 for q in dev.qubits] == [2.6e-6, 2.4e-6, 2.0e-6]
    assert [q.t2 for q in dev.qubits] == [1.8e-6, 1.4e-6, 1.2e-6]
    assert (dev.cphase_q1q2_time, dev.cphase_q2q3_time, dev.single_qubit_time) == (29.5e-9, 37.3e-9, 12e-9)


def test_stored_models_used(reference_cfg):
    assert reference_cfg.readout.models is not None
    assert reference_cfg.readout_model("q3").sigma == pytest.approx(reference_cfg.readout.models["q3"]["sigma"])
    with pytest.raises(DomainError):
        reference_cfg.readout_model("q4")


def test_thermal_model_per_mode():
    p, fr = reference_config().thermal_model()
    assert 1 - (1 - p) ** 3 == pytest.approx(0.15) and fr == 0
    p, fr = reference_config(mode="phase_preserving", post_select=None).thermal_model()
    assert 1 - (1 - p) ** 3 * (1 - fr) == pytest.approx(0.30)


# -- random streams ------------------------------------------------------------


def test_shot_streams_independent_of_chunking():
    whole = shot_uniforms(11, 0, 1000)
    assert whole.shape == (1000, SLOTS_PER_SHOT)
    for a, b in [(0, 1), (37, 60), (999, 1000), (123, 777)]:
        assert np.array_equal(shot_uniforms(11, a, b - a), whole[a:b])
    assert np.all((whole > 0) & (whole < 1))
    assert not np.array_equal(shot_uniforms(12, 0, 10), whole[:10])


def test_uniforms_are_uniform():
    u = shot_uniforms(3, 10**6, 20000).ravel()
    counts = np.histogram(u, bins=20, range=(0, 1))[0]
    expected = len(u) / 20
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 50  # 19 dof, p ~ 1e-4


def test_worker_env(monkeypatch):
    monkeypatch.setenv("QTELEPORT_WORKERS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("QTELEPORT_WORKERS", "zero")
    with pytest.raises(DomainError):
        worker_count()
    monkeypatch.setenv("QTELEPORT_WORKERS", "0")
    with pytest.raises(DomainError):
        worker_count()


# -- end to end ----------------------------------------------------------------


def test_noiseless_pipeline_is_ideal():
    cfg = noiseless_config(mode="phase_preserving", post_select=None, shots_per_setting=625, seed=1)
    s = run_experiment(cfg, keep_shots=False).summary
    assert s.shots_total == 10**4 and s.shots_kept == s.shots_total
    for o in s.outcomes:
        v, se = s.process_fidelities[o]
        assert abs(v - 1) <= 3 * se + 1e-9
        for name in ("0", "1"):
            assert s.state_fidelities[o][name][0] == pytest.approx(1.0, abs=1e-12)
    # multinomial 3 sigma bounds on a uniform outcome histogram
    n = s.shots_kept
    for count in s.outcome_histogram.values():
        assert abs(count - n / 4) <= 3 * math.sqrt(n * 0.25 * 0.75)


def test_noiseless_exact_limit():
    cfg = noiseless_config(mode="phase_preserving", post_select=None)
    e = exact_fidelities(cfg)
    for o in e.outcomes:
        assert e.process_fidelities[o][0] == pytest.approx(1.0, abs=1e-9)
        assert e.average_state_fidelity[o][0] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("mode,post", [("phase_sensitive", "00"), ("phase_preserving", None)])
def test_kept_fraction_matches_thermal_model(reference_cfg, mode, post):
    cfg = small(reference_cfg, 4000, mode=mode, post_select=post)
    s = run_experiment(cfg, keep_shots=False).summary
    p, fr = cfg.thermal_model()
    keep = (1 - p) ** 3 * (1 - fr)
    n = s.shots_total
    assert abs(s.shots_kept - n * keep) <= 3 * math.sqrt(n * keep * (1 - keep))
    assert sum(s.outcome_histogram.values()) == s.shots_kept <= s.shots_total


def test_monte_carlo_converges_to_exact_limit(reference_cfg):
    cfg = small(reference_cfg, 20000, seed=5)
    s = run_experiment(cfg, keep_shots=False).summary
    e = exact_fidelities(cfg)
    v, se = s.overall_state_fidelity
    assert abs(v - e.overall_state_fidelity[0]) <= 4 * se
    v, se = s.overall_process_fidelity
    assert abs(v - e.overall_process_fidelity[0]) <= 4 * se
    # outcome frequencies against the exact table convolved with the readout
    assert s.shots_used / s.shots_kept > 0.25


def test_bootstrap_error_matches_seed_spread(reference_cfg):
    cfg = small(reference_cfg, 1500, bootstrap=400)
    values, ses = [], []
    for seed in range(24):
        s = run_experiment(replace(cfg, seed=seed), keep_shots=False).summary
        values.append(s.overall_state_fidelity[0])
        ses.append(s.overall_state_fidelity[1])
    spread = np.std(values, ddof=1)
    ratio = np.mean(ses) / spread
    assert 0.6 < ratio < 1.6, ratio


def test_summary_invariants_enforced():
    with pytest.raises(DomainError):
        RunSummary(0, "m", "phim", "00", 10, 11, 0, {"00": 11}, [], [], {}, {}, {}, (0, 0), None, 0, 0)
    with pytest.raises(DomainError):
        RunSummary(0, "m", "phim", "00", 10, 5, 0, {"00": 4}, [], [], {}, {}, {}, (0, 0), None, 0, 0)


def test_shot_log_roundtrip(tmp_path, reference_cfg):
    cfg = small(reference_cfg, 300, seed=9)
    res = run_experiment(cfg)
    path = tmp_path / "shots.log"
    write_shot_log(path, cfg, res.blocks)
    log = read_shot_log(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# qteleport shot log v1"
    assert len(log.init_ok) == res.summary.shots_total
    # discarded shots carry no Bell outcome
    assert np.all((log.bell_outcome == -1) == ~log.init_ok)
    first = [ln for ln in lines if not ln.startswith("#")][0].split()
    assert first[0] == "0" and first[-1] == "9/0"
    cat = np.where(log.init_ok, 1 + 2 * log.bell_outcome + log.q3_outcome, 0)
    group = np.arange(len(cat)) // 300
    counts = np.bincount(group * 9 + cat, minlength=16 * 9).reshape(4, 4, 9)
    assert np.array_equal(counts, res.counts)


def test_corrupt_log_rejected(tmp_path):
    p = tmp_path / "bad.log"
    p.write_text("not a log\n")
    with pytest.raises(DomainError):
        read_shot_log(p)


def test_results_independent_of_workers(tmp_path, reference_cfg):
    cfg = small(reference_cfg, CHUNK // 8 + 17, seed=21)  # several chunks with a ragged tail
    ctx = shot_context(cfg)
    logs, counts = [], []
    for w in (1, 4, 8):
        c, blocks = run_shots(ctx, workers=w, keep_blocks=True)
        path = tmp_path / f"w{w}.log"
        write_shot_log(path, cfg, blocks)
        logs.append(path.read_bytes())
        counts.append(c)
    assert logs[0] == logs[1] == logs[2]
    assert np.array_equal(counts[0], counts[1]) and np.array_equal(counts[0], counts[2])


def test_summary_json_is_deterministic(reference_cfg):
    cfg = small(reference_cfg, 500, seed=4)
    a = run_experiment(cfg, keep_shots=False).summary.to_json(include_timing=False)
    b = run_experiment(cfg, keep_shots=False, workers=3).summary.to_json(include_timing=False)
    assert a == b
    d = yaml.safe_load(a)
    assert d["shots_total"] == 8000 and d["post_select"] == "00"
