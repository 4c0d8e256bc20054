import json
import math

import pytest

import batchmac as bm


def test_validate_and_windows():
    p = bm.validate(3, 5, 4, 1, 4, 10)
    assert (p.be_min, p.be_max, p.nb_max, p.cw, p.packet_len, p.n_stations) == (3, 5, 4, 1, 4, 10)
    assert [bm.window_size(p, k) for k in range(5)] == [8, 16, 32, 32, 32]
    with pytest.raises(bm.InputError, match="be_min"):
        bm.validate(5, 3, 4, 1, 4, 10)
    with pytest.raises(ValueError, match="cw"):
        bm.validate(3, 5, 4, 3, 4, 10)


def test_attempt_profile():
    p = bm.validate()
    corrected = bm.attempt_profile(p, bm.BackoffSemantics.Corrected)
    naive = bm.attempt_profile(p, bm.BackoffSemantics.Naive)
    assert corrected.t_max == 119 == bm.corrected_t_max_closed_form(p)
    assert naive.t_max == 115
    assert corrected.a[0] == 0.125
    assert naive.a[0] == pytest.approx(558113 / 4194304, rel=1e-15)
    assert math.fsum(corrected.a) == pytest.approx(5.0, abs=1e-9)
    assert len(corrected.stage_pmfs) == 5
    assert bm.convolve([0.5, 0.5], [0.5, 0.5]) == [0.25, 0.5, 0.25]


def test_chain():
    assert bm.channel_busy_xi(bm.validate(packet_len=1, n_stations=2)) == pytest.approx(2 / 7)
    prof = bm.attempt_profile(bm.validate(n_stations=2))
    tw = bm.transition_weights(2, 0, prof, 1.0)
    assert (tw.s, tw.w) == pytest.approx((0.21875, 0.765625))

    lone = bm.propagate(bm.validate(packet_len=4, n_stations=1), bm.KernelKind.Improved)
    assert lone.success_renewal > 0.99
    assert lone.success_leibnitz is None

    r = bm.propagate(bm.validate(packet_len=3, n_stations=10), bm.KernelKind.Original)
    assert all(abs(m - 1.0) < 1e-9 for m in r.total_mass)
    assert abs(r.success_leibnitz - r.success_renewal) > 1e-6
    e = r.expected_remaining
    assert all(b <= a + 1e-12 for a, b in zip(e, e[1:]))


def test_simulator():
    tiny = bm.validate(1, 1, 0, 1, 1, 2)
    exact = bm.enumerate_exact(tiny, bm.RetryPolicy.NackDone)
    assert exact.expected_successes == 0.5
    batch = bm.run_batch(tiny, bm.RetryPolicy.NackDone, 20000, 3)
    assert abs(batch.mean_successes - 0.5) <= 3 * batch.stderr_successes
    assert sum(batch.completion_histogram.values()) == 20000

    p = bm.validate(packet_len=4, n_stations=8)
    a = bm.run_trial(p, bm.RetryPolicy.CollisionContinue, 5)
    assert a == bm.run_trial(p, bm.RetryPolicy.CollisionContinue, 5)
    assert a.successes + a.collided + a.failures == 8


def test_experiment(tmp_path):
    cfg = bm.parse_config("N=2,4\nL=2\ntrials=500\nseed=7\n")
    report = bm.run_experiment(cfg)
    methods = [(r["N"], r["method"]) for r in report.rows]
    assert methods == sorted(methods)
    csv = bm.format_report(report, bm.ReportFormat.Csv)
    assert csv.startswith("N,L,method,S_N,S_N_leibnitz,residual_mass,p50,p90,max,stderr\n")
    path = tmp_path / "r.json"
    bm.write_report(report, bm.ReportFormat.Json, str(path))
    rows = json.loads(path.read_text())
    assert [r["method"] for r in rows] == [r["method"] for r in report.rows]
    with pytest.raises(bm.InputError, match="frobnicate"):
        bm.parse_config("frobnicate=1")
