import json

import numpy as np
import pytest

from gncoset.component_sc import subdecode, syndrome_check
from gncoset.construction import build_product_code, encode
from gncoset.gn_core import GraphId, gn_transform, map_index
from gncoset.pdf import (Damping, DampingSchedule, FrameInput, PDFDecoder, decode_frame, default_schedule,
                         delta_select, lgen, load_schedule, recover_message, save_schedule)
from gncoset.quant import QuantSpec

SCHED = DampingSchedule.constant(0.5, 0.25, 0.75)
D = Damping(0.5, 0.25, 0.75)


def test_delta_select_cases():
    assert delta_select(False, 0, 1, D) == D.gamma
    assert delta_select(False, 1, 1, D) == D.gamma
    assert delta_select(True, 0, 1, D) == D.delta == 0.75
    assert delta_select(True, 1, 1, D) == D.theta == 0.25


def test_lgen_examples():
    assert lgen(1.0, 1, 0.5) == pytest.approx(0.5)
    assert lgen(-0.8, 0, 0.75) == pytest.approx(-0.05)
    q = QuantSpec(6, 2)
    assert lgen(30, 0, 4, q) == 31
    assert lgen(-30, 1, 4, q) == -31


def test_schedule_file_round_trip(tmp_path):
    path = tmp_path / "sched.json"
    path.write_text(json.dumps([{"t": 2, "alpha": 1, "beta": 0.5, "gamma": 1.25},
                                {"t": 1, "alpha": 0, "beta": 0, "gamma": 0}]))
    s = load_schedule(path)
    assert s.at(2) == s.at(9) == Damping(1.0, 0.5, 1.25)
    save_schedule(s, tmp_path / "b.json")
    assert load_schedule(tmp_path / "b.json") == s
    path.write_text(json.dumps([{"t": 1, "alpha": 0, "beta": 0, "gamma": 0},
                                {"t": 3, "alpha": 0, "beta": 0, "gamma": 0}]))
    with pytest.raises(ValueError):
        load_schedule(path)


def test_default_schedule_loads():
    s = default_schedule()
    assert s.at(1).gamma == 0.0
    assert "grid search" in s.label


def _frame(spec, rng, n=1):
    msg = rng.integers(0, 2, (n, spec.k_total)).astype(np.uint8)
    return msg, encode(spec, msg)


@pytest.mark.parametrize("quant", [QuantSpec(), QuantSpec(6, 2), QuantSpec(5, 1)])
def test_noiseless_frame_one_iteration(quant, rng):
    spec = build_product_code(32, 28)
    msg, x = _frame(spec, rng)
    x_hat, stats = decode_frame(FrameInput(1.0 - 2.0 * x[0]), spec, SCHED, quant, t_max=5)
    assert np.array_equal(x_hat, x[0])
    assert stats["iterations_used"] == 1
    assert stats["sc_calls"] == 0
    assert stats["worst_case_iterations"] == 5
    assert np.array_equal(recover_message(x_hat, spec), msg[0])


def test_dimension_mismatch():
    spec = build_product_code(8, 6)
    with pytest.raises(ValueError):
        decode_frame(np.zeros(63), spec)


def test_tmax_one_is_column_decoding(rng):
    spec = build_product_code(16, 12)
    _, x = _frame(spec, rng, 200)
    y = 1.0 - 2.0 * x + 0.6 * rng.standard_normal(x.shape)
    x_hat, _ = PDFDecoder(spec, SCHED, t_max=1).decode_batch(y)
    # each column k % 16 == i decoded on its own
    for b in range(200):
        grid = y[b].reshape(16, 16)
        for i in range(16):
            col = subdecode(grid[:, i], spec.default_frozen)
            assert np.array_equal(x_hat[b].reshape(16, 16)[:, i], col.c_hat)


def _trace_oracle(y, spec, sched, t_max):
    """Iteration loop written directly from the per-bit definitions."""
    n = spec.n_sub
    hist = {0: np.zeros(spec.N, dtype=np.uint8), -1: np.zeros(spec.N, dtype=np.uint8)}
    flags = {0: np.zeros(n, dtype=bool)}
    steps = []
    for t in range(1, t_max + 1):
        graph = GraphId.G if t % 2 == 1 else GraphId.GPI
        other = GraphId.GPI if graph is GraphId.G else GraphId.G
        c_t = np.zeros(spec.N, dtype=np.uint8)
        e_t = np.zeros(n, dtype=bool)
        d = sched.at(t)
        for i in range(n):
            llr = np.zeros(n)
            for j in range(n):
                k = map_index(i, j, graph, n)
                if t == 1:
                    llr[j] = y[k]
                    continue
                c1 = int(hist[t - 1][map_index(j, i, other, n)])
                c2 = int(hist[t - 2][map_index(i, j, graph, n)])
                if flags[t - 1][j]:
                    llr[j] = y[k] + d.alpha * (1 - 2 * c1) - d.beta * (1 - 2 * c2)
                else:
                    llr[j] = y[k] + d.gamma * (1 - 2 * c1)
            res = subdecode(llr, spec.frozen_for(graph, i))
            e_t[i] = res.e
            for j in range(n):
                c_t[map_index(i, j, graph, n)] = res.c_hat[j]
        hist[t], flags[t] = c_t, e_t
        steps.append((c_t, e_t))
        if not e_t.any():
            break
    return steps


def test_single_corrupted_subcode_against_trace_oracle():
    spec = build_product_code(8, 6)
    rng = np.random.default_rng(3)
    _, x = _frame(spec, rng)
    x = x[0]
    y = 3.0 * (1.0 - 2.0 * x)
    # weak wrong-sign values on three bits of column 2 (one G sub-code)
    for r in (1, 4, 6):
        y[r * 8 + 2] = -0.5 * (1.0 - 2.0 * x[r * 8 + 2])
    dec = PDFDecoder(spec, SCHED, t_max=6, et="current")
    x_hat, stats = dec.decode_batch(y[None, :], trace=True)
    oracle = _trace_oracle(y, spec, SCHED, 6)
    assert len(stats.trace) == len(oracle)
    for step, (c_ref, e_ref) in zip(stats.trace, oracle):
        assert np.array_equal(step["c"][0], c_ref)
        assert np.array_equal(step["e"][0], e_ref)
    assert oracle[0][1].sum() == 1  # only the corrupted column is detected at t=1
    assert np.array_equal(x_hat[0], x)
    # corrected by t=2, confirmed by the all-clear syndromes at t=3
    assert np.array_equal(oracle[1][0], x)
    assert stats.iterations[0] == 3


def test_trace_oracle_random_frames():
    spec = build_product_code(8, 5)
    rng = np.random.default_rng(11)
    sched = DampingSchedule((Damping(0, 0, 0), Damping(0.5, 0.25, 0.75), Damping(1.0, 0.5, 1.0)))
    _, x = _frame(spec, rng, 30)
    y = 1.0 - 2.0 * x + 0.7 * rng.standard_normal(x.shape)
    dec = PDFDecoder(spec, sched, t_max=5, et="current")
    for b in range(30):
        _, stats = dec.decode_batch(y[b:b + 1], trace=True)
        oracle = _trace_oracle(y[b], spec, sched, 5)
        assert len(stats.trace) == len(oracle)
        for step, (c_ref, e_ref) in zip(stats.trace, oracle):
            assert np.array_equal(step["c"][0], c_ref)
            assert np.array_equal(step["e"][0], e_ref)


def test_first_iteration_sees_channel_values(rng):
    spec = build_product_code(16, 12)
    y = rng.normal(0, 1, (4, spec.N))
    sched = DampingSchedule((Damping(1.5, 1.5, 1.5), Damping(1, 1, 1)))
    _, stats = PDFDecoder(spec, sched, t_max=2, et="off").decode_batch(y, trace=True)
    assert np.array_equal(stats.trace[0]["llr"], y)


def test_graph_alternation_bookkeeping_nsub4(rng):
    # at t=2 each bit must read its own position from t=1 and the flag of the
    # G sub-code (column) that held it
    spec = build_product_code(4, 3)
    y = rng.normal(0.3, 1.0, (50, 16))
    dec = PDFDecoder(spec, SCHED, t_max=2, et="off")
    _, stats = dec.decode_batch(y, trace=True)
    t1, t2 = stats.trace
    for b in range(50):
        for k in range(16):
            r, s = divmod(k, 4)
            c1 = int(t1["c"][b, k])
            mag = (D.delta if c1 != 0 else D.theta) if t1["e"][b, s] else D.gamma
            assert t2["llr"][b, k] == pytest.approx(y[b, k] + mag * (1 - 2 * c1))


def test_early_termination_emits_codewords(rng):
    spec = build_product_code(16, 13)
    _, x = _frame(spec, rng, 500)
    y = 1.0 - 2.0 * x + 0.55 * rng.standard_normal(x.shape)
    x_hat, stats = PDFDecoder(spec, SCHED, t_max=6).decode_batch(y)
    assert stats.et_fired.any()
    fired = stats.et_fired
    assert stats.syndrome_ok[fired].all()
    u = gn_transform(x_hat[fired])
    frozen_global = np.setdiff1d(np.arange(spec.N), spec.encoder.info_positions)
    assert not u[:, frozen_global].any()


def test_determinism_and_batch_independence(rng):
    spec = build_product_code(16, 12)
    _, x = _frame(spec, rng, 64)
    y = 1.0 - 2.0 * x + 0.6 * rng.standard_normal(x.shape)
    dec = PDFDecoder(spec, SCHED, QuantSpec(6, 2), t_max=5)
    a, sa = dec.decode_batch(y)
    perm = rng.permutation(64)
    b, sb = dec.decode_batch(y[perm])
    assert np.array_equal(a[perm], b)
    assert np.array_equal(sa.iterations[perm], sb.iterations)
    for i in (0, 17, 63):
        single, _ = dec.decode_batch(y[i:i + 1])
        assert np.array_equal(single[0], a[i])


def test_channel_form_matches_scaled_form(rng):
    spec = build_product_code(16, 12)
    esn0 = 6.0
    sigma2 = 10 ** (-esn0 / 10)
    _, x = _frame(spec, rng, 1000)
    y = 1.0 - 2.0 * x + np.sqrt(sigma2) * rng.standard_normal(x.shape)
    scaled, _ = PDFDecoder(spec, SCHED, t_max=5).decode_batch(y)
    channel, _ = PDFDecoder(spec, SCHED, t_max=5, llr_form="channel").decode_batch(y, sigma2=sigma2)
    assert np.array_equal(scaled, channel)


def test_channel_form_needs_sigma2():
    spec = build_product_code(8, 6)
    with pytest.raises(ValueError):
        PDFDecoder(spec, SCHED, llr_form="channel").decode_batch(np.ones((1, 64)))
    with pytest.raises(ValueError):
        PDFDecoder(spec, SCHED, QuantSpec(6, 2), llr_form="channel")


def test_recover_message_round_trip(rng):
    spec = build_product_code(32, 27)
    msg, x = _frame(spec, rng, 5)
    for b in range(5):
        x_hat, _ = decode_frame(1.0 - 2.0 * x[b], spec, SCHED)
        assert np.array_equal(recover_message(x_hat, spec), msg[b])
    assert not recover_message(np.zeros(spec.N, dtype=np.uint8), spec).any()
