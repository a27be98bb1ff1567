import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from masseur import analysis
from masseur.analysis import (REFERENCE, STAT_FIELDS, Tolerance, TooFewSamples, TraceStats,
                              UnknownTechnique, ZeroVariance, compare_stats,
                              compare_to_reference, dominant_frequency, export_spectrum,
                              peak_frequency, read_spectrum, trace_stats, uniform_tolerances)
from masseur.core_types import ForceTrace


def trace_of(fz, rate):
    fz = np.asarray(fz, float)
    n = len(fz)
    return ForceTrace(rate, np.arange(n) / rate, fz, np.zeros(n), np.zeros((n, 6)))


def tone(freq, rate, seconds, amp=1.0, offset=0.0):
    t = np.arange(int(round(rate * seconds))) / rate
    return offset + amp * np.sin(2 * np.pi * freq * t)


def brute_moments(xs):
    """Naive two-pass summation in exact-rounding fsum."""
    xs = [float(x) for x in xs]
    n = len(xs)
    mean = math.fsum(xs) / n
    d = [x - mean for x in xs]
    m2 = math.fsum(v * v for v in d) / n
    m3 = math.fsum(v * v * v for v in d) / n
    m4 = math.fsum(v ** 4 for v in d) / n
    return mean, math.sqrt(m2), m3 / m2 ** 1.5, m4 / m2 ** 2 - 3.0


def test_constant_signal():
    with pytest.raises(ZeroVariance) as info:
        trace_stats(trace_of(np.full(100, 5.0), 100.0))
    s = info.value.stats
    assert (s.max, s.min, s.mean, s.std) == (5.0, 5.0, 5.0, 0.0)
    assert s.skew is None and s.kurt is None and s.freq is None


def test_sine_moments():
    s = trace_stats(trace_of(tone(1.0, 100.0, 10.0, amp=3.0, offset=10.0), 100.0))
    assert s.mean == pytest.approx(10.0, abs=1e-9)
    assert s.std == pytest.approx(3.0 / math.sqrt(2.0), abs=1e-6)
    assert s.skew == pytest.approx(0.0, abs=1e-9)
    assert s.kurt == pytest.approx(-1.5, abs=0.01)
    assert s.freq == pytest.approx(1.0, abs=0.1)


def test_spike_train_against_brute_force():
    rate = 100.0
    x = np.zeros(2000)
    for start in range(0, 2000, 100):
        x[start:start + 5] = 50.0  # 5% duty
    s = trace_stats(trace_of(x, rate))
    mean, std, skew, kurt = brute_moments(x)
    assert s.mean == pytest.approx(mean, rel=1e-12)
    assert s.std == pytest.approx(std, rel=1e-12)
    assert s.skew == pytest.approx(skew, rel=1e-12)
    assert s.kurt == pytest.approx(kurt, rel=1e-12)
    assert s.skew > 2 and s.kurt > 5


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        trace_stats(trace_of(np.arange(10.0), 100.0))


def test_window_selects_half_open_range():
    tr = trace_of(tone(2.0, 100.0, 10.0), 100.0)
    assert len(tr.window(2.0, 4.0)) == 200
    s_full = trace_stats(tr, (2.0, 4.0))
    s_manual = trace_stats(trace_of(tr.fz[200:400], 100.0))
    assert s_full == s_manual


def test_expert_beat_tone():
    assert dominant_frequency(trace_of(tone(2.79, 100.0, 20.0), 100.0)) == pytest.approx(2.79, abs=0.05)


def test_largest_peak_wins():
    x = tone(7.33, 500.0, 10.0) + tone(1.0, 500.0, 10.0, amp=0.3)
    assert dominant_frequency(trace_of(x, 500.0)) == pytest.approx(7.33, abs=0.1)


def test_dc_only():
    with pytest.raises(ZeroVariance):
        dominant_frequency(trace_of(np.full(512, 3.0), 100.0))


def test_dc_guard_ignores_leakage():
    # slow exponential settle: nothing real above the guard except the tone
    t = np.arange(0, 20, 0.01)
    x = 5 * np.exp(-t / 3) + 0.5 * np.sin(2 * np.pi * 0.8 * t)
    assert peak_frequency(x, 100.0) == pytest.approx(0.8, abs=0.05)


def test_export_spectrum_pure_tone(tmp_path):
    tr = trace_of(tone(5.0, 200.0, 8.0), 200.0)
    export_spectrum(tr, None, tmp_path / "s.csv")
    text = (tmp_path / "s.csv").read_text()
    assert text.splitlines()[0] == "freq_hz,magnitude"
    f, m = read_spectrum(tmp_path / "s.csv")
    assert f[np.argmax(m)] == pytest.approx(5.0, abs=200.0 / 2048)


def test_export_spectrum_press_fundamental(tmp_path):
    from masseur.sim import SimConfig, run_simulation
    from masseur.techniques import PressParams, TechniqueSpec
    r = run_simulation(SimConfig(TechniqueSpec(PressParams(), 6 * 5.26)))
    export_spectrum(r.trace, r.window, tmp_path / "s.csv")
    f, m = read_spectrum(tmp_path / "s.csv")
    peak = f[1:][np.argmax(m[1:])]
    assert peak == pytest.approx(1 / 5.26, abs=500.0 / 16384)


def test_export_spectrum_empty_window(tmp_path):
    tr = trace_of(tone(5.0, 200.0, 2.0), 200.0)
    with pytest.raises(TooFewSamples):
        export_spectrum(tr, (10.0, 11.0), tmp_path / "s.csv")


# --- properties ---------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["normal", "exponential", "uniform"]))
def test_moments_match_brute_force(seed, dist):
    rng = np.random.default_rng(seed)
    x = getattr(rng, dist)(size=10_000) * 7.0 + 30.0
    mean, std, skew, kurt = analysis.moments(x)
    b = brute_moments(x)
    for got, want in zip((mean, std, skew, kurt), b):
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def _random_trace(seed, n=4096, rate=200.0):
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate
    x = 20 + 5 * np.sin(2 * np.pi * rng.uniform(0.5, 10) * t) + rng.normal(0, 1, n)
    return trace_of(x, rate)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-50, 50))
def test_shift_changes_location_only(seed, c):
    tr = _random_trace(seed)
    a = trace_stats(tr)
    b = trace_stats(trace_of(tr.fz + c, tr.sample_rate))
    for name in ("max", "min", "mean"):
        assert getattr(b, name) == pytest.approx(getattr(a, name) + c, abs=1e-9)
    for name in ("std", "skew", "kurt", "freq"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.01, 100))
def test_scale_changes_size_only(seed, a_):
    tr = _random_trace(seed)
    a = trace_stats(tr)
    b = trace_stats(trace_of(tr.fz * a_, tr.sample_rate))
    for name in ("max", "min", "mean", "std"):
        assert getattr(b, name) == pytest.approx(getattr(a, name) * a_, rel=1e-9)
    for name in ("skew", "kurt", "freq"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 40.0), st.floats(4.0, 30.0), st.sampled_from([100.0, 250.0, 500.0]))
def test_tone_within_one_over_window(f0, seconds, rate):
    x = tone(f0, rate, seconds)
    assert abs(peak_frequency(x, rate) - f0) <= 1.0 / seconds


# --- reference comparison -------------------------------------------------------

@pytest.mark.parametrize("key", sorted(REFERENCE))
def test_reference_rows_compare_to_zero(key):
    report = compare_to_reference(REFERENCE[key], *key)
    assert all(c.delta == 0.0 for c in report.fields.values())
    assert report.passed


def test_expert_beat_row_values():
    assert REFERENCE[("beat", "expert")] == TraceStats(79.67, 0.00, 64.90, 12.17, -4.19, 21.78, 2.79)
    assert REFERENCE[("beat", "robot")] == TraceStats(76.67, 0.00, 8.45, 18.02, 1.99, 2.73, 1.00)


def test_robot_press_vs_expert_mean():
    report = compare_to_reference(REFERENCE[("press", "robot")], "press", "expert")
    assert report.fields["mean"].delta == pytest.approx(16.08, abs=1e-12)
    assert report.fields["mean"].rel_delta == pytest.approx(16.08 / 15.64)


def test_zero_tolerance_flags_every_nonzero_delta():
    stats = REFERENCE[("vibrate", "robot")]
    report = compare_to_reference(stats, "vibrate", "expert", uniform_tolerances(Tolerance("abs", 0.0)))
    for name, c in report.fields.items():
        assert c.passed is (c.delta == 0.0)
    assert not report.passed


def test_robot_beat_frequency_flagged():
    report = compare_to_reference(REFERENCE[("beat", "robot")], "beat", "expert")
    assert report.fields["freq"].passed is False
    assert "freq" in report.failed_fields


def test_unknown_technique():
    with pytest.raises(UnknownTechnique):
        compare_to_reference(REFERENCE[("beat", "robot")], "knead", "expert")


def test_zero_reference_relative_delta_is_none():
    report = compare_to_reference(REFERENCE[("beat", "robot")], "beat", "expert")
    assert report.fields["min"].rel_delta is None
    assert report.fields["min"].passed is True


def test_report_json_shape():
    d = compare_to_reference(REFERENCE[("beat", "robot")], "beat", "expert").as_dict()
    assert d["technique"] == "beat" and d["reference"] == "expert"
    assert set(d["fields"]) == set(STAT_FIELDS)
    assert set(d["fields"]["freq"]) == {"value", "ref", "delta", "rel_delta", "pass"}


stat_values = st.floats(-100, 100, allow_nan=False)


@given(st.tuples(*[stat_values] * 7), st.tuples(*[stat_values] * 7))
def test_deltas_antisymmetric(a, b):
    sa, sb = TraceStats(*a), TraceStats(*b)
    ab, ba = compare_stats(sa, sb), compare_stats(sb, sa)
    for name in STAT_FIELDS:
        assert ab.fields[name].delta == -ba.fields[name].delta


def test_tolerance_parsing():
    assert Tolerance.parse("rel:0.15") == Tolerance("rel", 0.15)
    assert Tolerance.parse("sign") == Tolerance("sign")
    assert Tolerance.parse("none") is None
    with pytest.raises(ValueError):
        Tolerance.parse("bogus:1")


def test_null_fields_fail_when_toleranced():
    partial = TraceStats(29.0, 29.0, 29.0, 0.0, None, None, None)
    report = compare_to_reference(partial, "push", "robot")
    assert report.fields["skew"].passed is False
    assert report.fields["std"].passed is None
