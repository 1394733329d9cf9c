from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings

from qcldgm.cycles import has_length4_cycle
from qcldgm.gf2_poly import euclid_inverse, parse, shift
from qcldgm.psi import PsiParams, is_psi_unitary
from qcldgm.xi_design import (
    Exhausted,
    XiParams,
    canonical_rep,
    goodmat,
    random_xi_params,
    recognize_xi,
    sample_cycle_free,
    sufficient_conditions,
    xi_poly,
)
from strategies import xi_params


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        dict(m=0, s=4, k=(4,)),                 # k_0 must be below s
        dict(m=1, s=4, k=(1, 1)),               # distinct
        dict(m=1, s=4, k=(1,)),                 # length
        dict(m=0, s=4, k=(1,), c_minus1=4),
        dict(m=0, s=4, k=(1,), c=(2,)),         # c_0 < 2^(m+1)
        dict(m=1, s=4, k=(1, 2), d=(0, 2)),     # d_1 < 2
        dict(m=-1, s=4, k=()),
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            XiParams(**kwargs)

    def test_defaults_fill_zeros(self):
        p = XiParams(2, 11, (1, 3, 7))
        assert p.c == (0, 0, 0) and p.d == (0, 0, 0) and p.n == 176

    def test_record_round_trip(self):
        p = XiParams(1, 7, (2, 9), 3, (1, 0), (2, 1))
        rec = p.as_record()
        assert all(isinstance(v, str) for v in rec.values())
        assert XiParams.from_record(rec) == p

    @given(xi_params(ms=(0, 1, 2, 3)))
    def test_record_round_trip_property(self, p):
        assert XiParams.from_record(p.as_record()) == p


class TestXiPoly:
    def test_small_ring(self):
        a = xi_poly(XiParams(0, 2, (1,), 0, (0,), (1,)))
        assert a == parse("8:(0;1;7)")
        assert is_psi_unitary(a, PsiParams(2, 2, 0))

    def test_design_examples(self):
        assert xi_poly(XiParams(1, 7, (1, 3))) == parse("56:(0;1;3;8;17)")
        assert xi_poly(XiParams(2, 11, (1, 3, 7))) == parse("176:(0;1;3;7;12;25;51)")

    def test_collision_rejected(self):
        # k_0 + s lands on k_1 with all shifts zero
        with pytest.raises(ValueError, match="collide"):
            xi_poly(XiParams(1, 4, (1, 5)))

    @given(xi_params(ms=(0, 1, 2, 3), s_max=128))
    @settings(max_examples=200)
    def test_unitary_and_weight(self, p):
        try:
            a = xi_poly(p)
        except ValueError:
            return
        assert a.weight == 2 * p.m + 3
        assert is_psi_unitary(a, PsiParams(p.s, p.m + 2, 0))

    def test_random_params_never_collide(self):
        rng = np.random.default_rng(1)
        for m in range(4):
            for _ in range(100):
                p = random_xi_params(m, 9, rng)
                assert xi_poly(p).weight == 2 * m + 3


class TestGoodmat:
    def test_examples(self):
        assert goodmat(1, 7, [1, 3]) == parse("56:(0;1;3;8;17)")
        a = goodmat(2, 11, [1, 3, 7])
        assert a == parse("176:(0;1;3;7;12;25;51)")
        assert not sufficient_conditions(11, [1, 3, 7])
        assert not has_length4_cycle(a)

    def test_smallest(self):
        a = goodmat(0, 3, [1])
        assert a == parse("12:(0;1;4)")
        assert not has_length4_cycle(a)

    def test_flags_rather_than_rejects(self):
        a = goodmat(1, 8, [1, 2])
        assert not sufficient_conditions(8, [1, 2])
        assert a.weight == 5

    @pytest.mark.parametrize("k", [[0, 2], [3, 3], [4, 2]])
    def test_rejects_non_increasing(self, k):
        with pytest.raises(ValueError):
            goodmat(1, 16, k)

    def test_sufficient_conditions_grid(self):
        checked = 0
        for m in range(4):
            for s in range(2, 65):
                for k in combinations(range(1, s), m + 1):
                    if not sufficient_conditions(s, k):
                        continue
                    a = goodmat(m, s, k)
                    assert not has_length4_cycle(a), (m, s, k)
                    assert is_psi_unitary(a, PsiParams(s, m + 2, 0))
                    checked += 1
        assert checked > 1000


class TestSampling:
    def test_forced_choice(self):
        assert sample_cycle_free(0, 3, np.random.default_rng(0)) == parse("12:(0;1;4)")

    def test_empty_space(self):
        with pytest.raises(Exhausted):
            sample_cycle_free(1, 4, np.random.default_rng(0))

    def test_succeeds_under_constraints(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = sample_cycle_free(1, 128, rng)
            assert a.n == 1024 and a.weight == 5
            assert not has_length4_cycle(a)
            p = recognize_xi(a)
            assert p is not None and 2 * p.k[-1] < 128

    def test_strict_mode(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            p = recognize_xi(sample_cycle_free(2, 64, rng, strict=True))
            assert sufficient_conditions(64, p.k)

    def test_reproducible(self):
        a = sample_cycle_free(2, 50, np.random.default_rng(9))
        b = sample_cycle_free(2, 50, np.random.default_rng(9))
        assert a == b


class TestRecognize:
    @given(xi_params(ms=(0, 1, 2), s_max=64))
    @settings(max_examples=150)
    def test_recovers_same_polynomial(self, p):
        try:
            a = xi_poly(p)
        except ValueError:
            return
        q = recognize_xi(a)
        assert q is not None and xi_poly(q) == a

    @pytest.mark.parametrize("text", ["56:(0;1;3;8)", "56:(0;1;2;8;17)", "30:(0;1;2)", "8:(0;2;6)"])
    def test_rejects(self, text):
        assert recognize_xi(parse(text)) is None


class TestCanonical:
    def test_shifted_class_member(self):
        s, k0 = 9, 2
        a = parse(f"{4 * s}:({s};{s + k0};{2 * s + k0})")
        assert canonical_rep(a, 0, s) == parse(f"{4 * s}:(0;{k0};{s + k0})")

    def test_already_canonical(self):
        a = goodmat(0, 9, [2])
        assert canonical_rep(a, 0, 9) == a

    def test_other_levels_untouched(self):
        a = goodmat(1, 7, [1, 3])
        assert canonical_rep(a, 1, 7) is a

    def test_wrong_ring(self):
        with pytest.raises(ValueError):
            canonical_rep(parse("8:(0;1;7)"), 0, 3)

    @pytest.mark.parametrize("s, k0", [(3, 1), (5, 2), (7, 3), (9, 4)])
    def test_constant_on_classes(self, s, k0):
        reps = set()
        for cm1, c0, d0 in product(range(4), range(2), range(2)):
            a = xi_poly(XiParams(0, s, (k0,), cm1, (c0,), (d0,)))
            rep = canonical_rep(a, 0, s)
            assert canonical_rep(rep, 0, s) == rep
            for j in range(4):
                assert canonical_rep(shift(a, j * s), 0, s) == rep
            reps.add(rep)
        assert len(reps) == 4

    def test_inverses_shift_with_the_class(self):
        a = goodmat(0, 9, [2])
        n, s = a.n, 9
        assert euclid_inverse(shift(a, s)) == shift(euclid_inverse(a), n - s)
