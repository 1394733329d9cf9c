import csv
import io
import math

import numpy as np
import pytest

import oracles
from qcldgm import _backend
from qcldgm.gf2_poly import SparsePoly, parse
from qcldgm.qc_ldgm import build_code, encode, random_blocks, syndrome
from qcldgm.spa_decoder import (
    ChannelPoint,
    SimResult,
    StopRule,
    build_graph,
    decode,
    decode_concatenated,
    llr_init,
    results_to_csv,
    simulate,
    simulate_concatenated,
)
from qcldgm.xi_design import goodmat

BACKENDS = ["python"] + (["cython"] if _backend.compiled is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    before = _backend.name
    _backend.use(request.param)
    yield request.param
    _backend.use(before)


def psi_code(seed=0):
    last = goodmat(1, 39, [3, 9])
    return build_code(random_blocks(312, [5, 5, 5], np.random.default_rng(seed), fixed=[last]) + [last])


def i_code(n=64, weights=(4, 4), seed=0):
    one = SparsePoly.one(n)
    return build_code(random_blocks(n, list(weights), np.random.default_rng(seed), fixed=[one]) + [one])


class TestGraph:
    def test_matches_expanded_matrix(self):
        for code in (i_code(16, (3, 3)), build_code([parse("8:(0;1;3)"), parse("8:(0;2;5)"), SparsePoly.one(8)])):
            g = build_graph(code)
            adj = oracles.adjacency(oracles.row_of_blocks(code.blocks))
            assert [g.check_neighbours(c).tolist() for c in range(code.n)] == adj

    def test_identity_based_degrees(self):
        code = i_code()
        deg = build_graph(code).variable_degrees()
        assert (deg == 1).sum() == code.n
        assert (deg[:code.K] == 4).all()

    def test_regular_psi_code(self):
        code = build_code(random_blocks(512, [5] * 4, np.random.default_rng(0),
                                        fixed=[parse("512:(0;8;24;72;152)")]) + [parse("512:(0;8;24;72;152)")])
        g = build_graph(code)
        assert g.check_degree == 25 and g.edges == 25 * 512
        assert (g.variable_degrees() == 5).all()


class TestChannel:
    def test_bsc_llr(self):
        llr = llr_init(np.array([0, 1]), ChannelPoint("BSC", 0.1))
        assert llr[0] == pytest.approx(math.log(9)) and llr[1] == pytest.approx(-math.log(9))
        assert llr[0] == pytest.approx(2.1972, abs=1e-4)

    def test_bsc_uninformative_limit(self):
        llr = llr_init(np.array([0, 1]), ChannelPoint("BSC", 0.4999999))
        assert np.abs(llr).max() < 1e-6

    def test_awgn_llr(self):
        point = ChannelPoint("AWGN", 10 * math.log10(0.5), rate=1.0)
        assert point.sigma == pytest.approx(1.0)
        assert llr_init(np.array([1.0, -0.5]), point) == pytest.approx([2.0, -1.0])

    def test_sigma_formula(self):
        point = ChannelPoint("awgn", 3.0, rate=0.75)
        assert point.kind == "AWGN"
        assert point.sigma**2 == pytest.approx(1 / (2 * 0.75 * 10**0.3))

    @pytest.mark.parametrize("kind, param, rate", [("BSC", 0.5, 1), ("BSC", -0.1, 1), ("AWGN", 1.0, 0), ("FOO", 0.1, 1)])
    def test_rejects(self, kind, param, rate):
        with pytest.raises(ValueError):
            ChannelPoint(kind, param, rate)

    def test_noiseless_bsc(self):
        point = ChannelPoint("BSC", 0.0)
        cw = np.array([0, 1, 1, 0], np.uint8)
        assert np.array_equal(point.transmit(cw, np.random.default_rng(0)), cw)
        assert (np.sign(llr_init(cw, point)) == [1, -1, -1, 1]).all()


class TestDecode:
    def test_noiseless_all_zero(self, backend):
        code = psi_code()
        res = decode(build_graph(code), np.full(code.N, 20.0))
        assert res.converged and res.iterations == 0 and not res.bits.any()

    def test_iteration_zero_is_channel_decision(self, backend):
        code = psi_code()
        cw = encode(code, np.random.default_rng(0).integers(0, 2, code.K, dtype=np.uint8))
        llr = 5.0 * (1 - 2.0 * cw)
        res = decode(build_graph(code), llr)
        assert res.iterations == 0 and np.array_equal(res.bits, cw)
        res = decode(build_graph(code), llr, max_iter=0)
        assert np.array_equal(res.bits, cw)

    def test_zero_llr_decides_one(self, backend):
        code = i_code(16, (3, 3))
        res = decode(build_graph(code), np.zeros(code.N), max_iter=0)
        assert res.bits.all() and not res.converged

    def test_single_error_corrected(self, backend):
        code = psi_code(1)
        graph = build_graph(code)
        cw = encode(code, np.random.default_rng(1).integers(0, 2, code.K, dtype=np.uint8))
        for pos in (0, 400, code.N - 1):
            rx = cw.copy()
            rx[pos] ^= 1
            res = decode(graph, 8.0 * (1 - 2.0 * rx))
            assert res.converged and res.iterations >= 1
            assert np.array_equal(res.bits, cw)

    def test_converged_means_zero_syndrome(self, backend):
        code = psi_code(2)
        graph = build_graph(code)
        rng = np.random.default_rng(2)
        point = ChannelPoint("BSC", 0.022)
        seen = 0
        for _ in range(200):
            cw = encode(code, rng.integers(0, 2, code.K, dtype=np.uint8))
            res = decode(graph, llr_init(point.transmit(cw, rng), point), 30)
            if res.converged:
                seen += 1
                assert not syndrome(code, res.bits).any()
            else:
                assert syndrome(code, res.bits).any()
        assert seen > 50

    def test_zero_message_blocks_others(self, backend):
        # one check over three variables: a zero input silences the other two outputs
        code = build_code([SparsePoly.one(1)] * 3)
        res = decode(build_graph(code), np.array([0.0, 3.0, 4.0]), max_iter=1)
        assert res.posterior[1] == 3.0 and res.posterior[2] == 4.0
        want = 2 * math.atanh(math.tanh(1.5) * math.tanh(2.0))
        assert res.posterior[0] == pytest.approx(want, rel=1e-9)

    def test_min_sum_option(self, backend):
        code = build_code([SparsePoly.one(1)] * 3)
        res = decode(build_graph(code), np.array([-1.0, 3.0, 4.0]), max_iter=1, min_sum=True)
        assert res.posterior.tolist() == pytest.approx([2.0, 2.0, 3.0])

    def test_clipping(self, backend):
        code = i_code(16, (3, 3))
        res = decode(build_graph(code), np.full(code.N, 1e6))
        assert np.abs(res.posterior).max() <= 38.0

    def test_length_check(self):
        code = i_code(16, (3, 3))
        with pytest.raises(ValueError):
            decode(build_graph(code), np.zeros(code.N + 1))


class TestConcatenated:
    def setup_method(self):
        outer_last = goodmat(0, 5, [1])
        self.outer = build_code(random_blocks(20, [3], np.random.default_rng(0), fixed=[outer_last]) + [outer_last])
        one = SparsePoly.one(40)
        self.inner = build_code(random_blocks(40, [3], np.random.default_rng(1), fixed=[one]) + [one])

    def test_noiseless(self):
        u = np.random.default_rng(0).integers(0, 2, self.outer.K, dtype=np.uint8)
        cw = encode(self.inner, encode(self.outer, u))
        llr = 30.0 * (1 - 2.0 * cw)
        got = decode_concatenated((self.inner, build_graph(self.inner)), (self.outer, build_graph(self.outer)), llr)
        assert np.array_equal(got, u)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            decode_concatenated((self.inner, build_graph(self.inner)), (self.inner, build_graph(self.inner)),
                                np.zeros(self.inner.N))

    def test_counts(self):
        res = simulate_concatenated(self.inner, self.outer, ChannelPoint("BSC", 0.05),
                                    StopRule(300, 10**9), rng=3)
        assert res.frames == 300
        assert res.inner_frame_errors >= res.concat_frame_errors


class TestSimulate:
    def test_noiseless(self):
        res = simulate(psi_code(), ChannelPoint("BSC", 0.0), StopRule(50, 1))
        assert res.frames == 50 and res.frame_errors == 0 and res.bit_errors == 0
        assert res.avg_iters == 0

    def test_stop_on_errors(self):
        res = simulate(psi_code(), ChannelPoint("BSC", 0.08), StopRule(10_000, 5))
        assert res.frame_errors == 5 and res.frames < 10_000
        assert res.undetected <= res.frame_errors
        assert 0 < res.ber <= 1 and res.fer == 5 / res.frames

    def test_deterministic(self):
        code, point = psi_code(), ChannelPoint("BSC", 0.04)
        a = simulate(code, point, StopRule(300, 10**9), rng=7)
        b = simulate(code, point, StopRule(300, 10**9), rng=7)
        assert (a.frames, a.bit_errors, a.frame_errors, a.iterations) == (b.frames, b.bit_errors, b.frame_errors, b.iterations)

    def test_deterministic_with_workers(self):
        code, point = psi_code(), ChannelPoint("BSC", 0.04)
        a = simulate(code, point, StopRule(200, 10**9), rng=7, workers=2)
        b = simulate(code, point, StopRule(200, 10**9), rng=7, workers=2)
        assert a.frames == 200
        assert (a.bit_errors, a.frame_errors, a.iterations) == (b.bit_errors, b.frame_errors, b.iterations)

    def test_all_zero_matches_random_codewords(self):
        # linear code, symmetric channel: two-proportion z-test at alpha = 0.01
        code, point = psi_code(), ChannelPoint("BSC", 0.025)
        stop = StopRule(1500, 10**9)
        z_frames = simulate(code, point, stop, rng=1, all_zero=True, max_iter=30)
        r_frames = simulate(code, point, stop, rng=2, max_iter=30)
        p1, p2 = z_frames.fer, r_frames.fer
        pool = (z_frames.frame_errors + r_frames.frame_errors) / (2 * 1500)
        assert 0.05 < pool < 0.95, pool
        z = (p1 - p2) / math.sqrt(pool * (1 - pool) * 2 / 1500)
        assert abs(z) < 2.576, (p1, p2, z)

    def test_patterns_are_codewords(self):
        last = goodmat(0, 5, [1])
        code = build_code(random_blocks(20, [3], np.random.default_rng(0), fixed=[last]) + [last])
        res = simulate(code, ChannelPoint("BSC", 0.1), StopRule(2000, 10**9), rng=4, collect_patterns=True)
        assert res.undetected > 0 and len(res.patterns) == res.undetected
        for pat in res.patterns:
            word = np.zeros(code.N, np.uint8)
            word[pat] = 1
            assert not syndrome(code, word).any()

    def test_merge_rejects_other_points(self):
        with pytest.raises(ValueError):
            SimResult("BSC", 0.1, info_bits=4).merge(SimResult("BSC", 0.2, info_bits=4))

    def test_csv(self):
        res = simulate(psi_code(), ChannelPoint("BSC", 0.02), StopRule(20, 1), rng=3)
        rows = list(csv.reader(io.StringIO(results_to_csv([("QC(1248,936)", res)]))))
        assert rows[0] == ["code_id", "channel", "param", "frames", "bit_errors", "frame_errors",
                           "undetected", "BER", "FER", "avg_iters", "max_iter", "seed"]
        assert rows[1][0] == "QC(1248,936)" and rows[1][-1] == "3" and rows[1][-2] == "100"
