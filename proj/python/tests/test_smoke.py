import numpy as np
import pytest

import chainnn


def test_partition_k3_and_k7():
    assert chainnn.partition_chain(3) == {"primitives": 64, "active_pes": 576, "idle_pes": 0, "efficiency": 1.0}
    assert chainnn.partition_chain(7)["active_pes"] == 539


def test_peak():
    assert chainnn.peak_gops() == pytest.approx(806.4)


def test_schedule_dual_and_single():
    groups = chainnn.validate_schedule(3, 12)
    assert all(g["ok"] for g in groups)
    assert groups[0]["first_valid_cycle"] == 9
    single = chainnn.validate_schedule(3, 12, mode="single")
    assert all(g["ok"] for g in single)
    assert single[0]["throughput"] < 0.5


@pytest.mark.parametrize("stride,pad,groups", [(1, 0, 1), (2, 1, 1), (1, 1, 2)])
def test_simulate_matches_golden(stride, pad, groups):
    ifm, ker, bias = chainnn.synth_layer(2, 4, 4, 11, 3, stride, pad, groups, seed=3)
    out, summary = chainnn.simulate(ifm, ker, bias, stride, pad, groups)
    np.testing.assert_array_equal(out, chainnn.golden_conv(ifm, ker, bias, stride, pad, groups))
    assert summary["mac_events"] == out.size * (4 // groups) * 9
    assert summary["traffic"]["dram"]["reads"] > 0


def test_user_arrays_and_errors():
    ifm = np.arange(25, dtype=np.int32).reshape(1, 1, 5, 5)
    ker = np.zeros((1, 1, 3, 3), dtype=np.int32)
    ker[0, 0, 1, 1] = 256  # 1.0 in Q8
    out, _ = chainnn.simulate(ifm, ker, np.zeros(1, dtype=np.int32), num_pes=9)
    np.testing.assert_array_equal(out[0, 0], ifm[0, 0, 1:4, 1:4])
    with pytest.raises(ValueError):
        chainnn.simulate(ifm, np.zeros((1, 2, 3, 3), dtype=np.int32), np.zeros(1, dtype=np.int32))


def test_alexnet_report():
    r = chainnn.report(batch=128)
    assert r == chainnn.report(batch=128)
    text = chainnn.report_json("alexnet", 128)
    assert "fps" in text
