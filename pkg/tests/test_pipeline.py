import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvfswitch.errors import ConfigError
from gvfswitch.pipeline import (
    PipelineConfig,
    SignalPipeline,
    TraceBank,
    build_layout,
)
from gvfswitch.sample import TimeStepSample


def make_sample(step, emg=(0, 0, 0, 0), pos=(0.5, 0.5, 0.5, 0.5),
                vel=(0, 0, 0, 0), pulse=0, active=0, rate=15.0):
    return TimeStepSample(
        step=step,
        time_s=step / rate,
        emg_raw=np.array(emg, dtype=float),
        joint_pos=np.array(pos, dtype=float),
        joint_vel=np.array(vel, dtype=float),
        switch_pulse=pulse,
        active_joint=active,
    )


def test_rectification_of_negative_sample():
    pipe = SignalPipeline()
    p = pipe.process(make_sample(0, emg=(-0.5, 0, 0, 0)))
    # single sample in a 3-wide zero-padded window
    assert p.emg_mav[0] == pytest.approx(0.5 / 3)


def test_mav_is_windowed_mean():
    pipe = SignalPipeline()
    for step, v in enumerate([0.2, 0.4, 0.6]):
        p = pipe.process(make_sample(step, emg=(v, 0, 0, 0)))
    assert p.emg_mav[0] == pytest.approx(0.4)


def test_zero_input_gives_zero_channels():
    pipe = SignalPipeline()
    for step in range(4):
        p = pipe.process(make_sample(step))
    assert p.ch_drive == 0.0
    assert p.ch_switch == 0.0


def test_channel_mapping_and_clamp():
    cfg = PipelineConfig(drive_max=0.5, switch_max=0.5)
    pipe = SignalPipeline(cfg)
    for step in range(3):
        p = pipe.process(make_sample(step, emg=(0.9, 0.1, 0.6, 0.0)))
    # mav: 0.9, 0.1, 0.6 -> drive (0.9-0.1)/0.5 = 1.6 clamped to 1
    assert p.ch_drive == 1.0
    assert p.ch_switch == 1.0


def test_trace_single_step_convex_update():
    bank = TraceBank(decay_rates=(0.9,), tracked_signals=("ch_switch",))
    bank.update(np.array([1.0]))
    assert bank.traces[0, 0] == pytest.approx(0.1)


def test_trace_converges_to_constant_input():
    bank = TraceBank(decay_rates=(0.8, 0.95), tracked_signals=("ch_switch",))
    for _ in range(600):
        bank.update(np.array([0.7]))
    assert np.allclose(bank.traces, 0.7, atol=1e-6)


def test_trace_geometric_decay():
    bank = TraceBank(decay_rates=(0.8,), tracked_signals=("ch_switch",))
    bank.traces[0, 0] = 1.0
    bank.update(np.array([0.0]))
    bank.update(np.array([0.0]))
    assert bank.traces[0, 0] == pytest.approx(0.64)


def test_one_hot_segment():
    pipe = SignalPipeline()
    sample = make_sample(0, active=2)
    processed = pipe.process(sample)
    pipe.update_traces(sample, processed)
    state = pipe.build_state_vector(sample, processed)
    names = [n for n, _, _ in state.layout]
    seg = [state.values[names.index(f"active[{j}]")] for j in range(4)]
    assert seg == [0.0, 0.0, 1.0, 0.0]


def test_velocity_affine_endpoints():
    cfg = PipelineConfig(vel_max=0.5)
    pipe = SignalPipeline(cfg)
    sample = make_sample(0, vel=(0.5, -0.5, 2.0, -2.0))
    processed = pipe.process(sample)
    pipe.update_traces(sample, processed)
    state = pipe.build_state_vector(sample, processed)
    names = [n for n, _, _ in state.layout]
    vals = [state.values[names.index(f"joint_vel[{j}]")] for j in range(4)]
    assert vals[0] == 1.0
    assert vals[1] == 0.0
    assert vals[2] == 1.0   # clipped then mapped
    assert vals[3] == 0.0


def test_midpoint_inputs_map_to_half():
    pipe = SignalPipeline()
    sample = make_sample(0, pos=(0.5, 0.5, 0.5, 0.5), vel=(0, 0, 0, 0))
    processed = pipe.process(sample)
    pipe.update_traces(sample, processed)
    state = pipe.build_state_vector(sample, processed)
    names = [n for n, _, _ in state.layout]
    for j in range(4):
        assert state.values[names.index(f"joint_pos[{j}]")] == 0.5
        assert state.values[names.index(f"joint_vel[{j}]")] == 0.5
    assert state.values[names.index("ch_drive")] == 0.0


def test_layout_matches_values_and_ranges():
    pipe = SignalPipeline()
    rng = np.random.default_rng(3)
    for step in range(40):
        sample = make_sample(
            step,
            emg=rng.normal(0, 1, 4),
            pos=rng.uniform(0, 1, 4),
            vel=rng.uniform(-2, 2, 4),
            pulse=int(rng.integers(0, 2)),
            active=int(rng.integers(0, 4)),
        )
        processed, state = pipe.step(sample)
        assert len(state.values) == len(state.layout)
        for value, (name, lo, hi) in zip(state.values, state.layout):
            assert lo <= value <= hi, f"{name}={value} outside [{lo}, {hi}]"


def test_determinism_bit_exact():
    rng = np.random.default_rng(11)
    samples = [
        make_sample(step, emg=rng.normal(0, 1, 4), pos=rng.uniform(0, 1, 4),
                    vel=rng.uniform(-1, 1, 4), pulse=int(rng.integers(0, 2)))
        for step in range(60)
    ]
    pipe_a, pipe_b = SignalPipeline(), SignalPipeline()
    out_a = [pipe_a.step(s)[1].values.tobytes() for s in samples]
    out_b = [pipe_b.step(s)[1].values.tobytes() for s in samples]
    assert out_a == out_b


def test_causality_prefix_property():
    rng = np.random.default_rng(21)
    samples = [
        make_sample(step, emg=rng.normal(0, 1, 4), pos=rng.uniform(0, 1, 4))
        for step in range(30)
    ]
    full = SignalPipeline()
    full_out = [full.step(s)[1].values.copy() for s in samples]
    for k in (1, 7, 29):
        fresh = SignalPipeline()
        prefix_out = [fresh.step(s)[1].values.copy() for s in samples[: k + 1]]
        assert np.array_equal(prefix_out[-1], full_out[k])


@given(beta=st.sampled_from([0.8, 0.95, 0.99]),
       values=st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=50))
@settings(max_examples=50, deadline=None)
def test_trace_of_bounded_signal_stays_bounded(beta, values):
    bank = TraceBank(decay_rates=(beta,), tracked_signals=("ch_switch",))
    for v in values:
        bank.update(np.array([v]))
        assert 0.0 <= bank.traces[0, 0] <= 1.0


@given(emgs=st.lists(
    st.tuples(*[st.floats(min_value=-2, max_value=2) for _ in range(4)]),
    min_size=1, max_size=20))
@settings(max_examples=50, deadline=None)
def test_mav_bounded_by_max_abs_input(emgs):
    pipe = SignalPipeline()
    peak = 0.0
    for step, emg in enumerate(emgs):
        peak = max(peak, max(abs(v) for v in emg))
        p = pipe.process(make_sample(step, emg=emg))
        assert np.all(p.emg_mav <= peak + 1e-12)


def test_bad_config_rejected():
    with pytest.raises(ConfigError):
        PipelineConfig(mav_window=0).validate()
    with pytest.raises(ConfigError):
        PipelineConfig(trace_decays=(1.0,)).validate()
    with pytest.raises(ConfigError):
        PipelineConfig(traced_signals=("nope",)).validate()


def test_layout_without_raw_pulse():
    cfg = PipelineConfig(include_raw_pulse=False)
    layout = build_layout(cfg)
    names = [n for n, _, _ in layout]
    assert "switch_pulse" not in names
    assert len(layout) == 4 + 4 + 2 + 4 + 9
