import itertools
import math

import numpy as np
import pytest

from gaspolar import InvalidParameter, ResourceLimit
from gaspolar.baselines import kasi_bruteforce_min, ml_decode_bruteforce, search_space_report
from gaspolar.gas import GasConfig, gas_decode
from gaspolar.instance import ProblemInstance, random_info, transmit
from gaspolar.modem import ChannelModel, gray_pam_map
from gaspolar.objective import (
    bpsk_full_objective,
    encoding_penalty,
    gray_hubo_objective,
    kasi_layout,
    kasi_qubo,
)
from gaspolar.polar import PolarCode, enumerate_valid_codewords, polar_encode

from conftest import BPSK, CODE_2_1, CODE_4_2, CODE_8_4, CODE_16_8, PAM4, PAM16


def test_ml_example_4_2():
    inst = ProblemInstance(CODE_4_2, BPSK, np.array([0.9, 0.8, -1.1, -0.7]))
    ml = ml_decode_bruteforce(inst)
    assert ml.num_ties == 1
    assert "".join(map(str, ml.codewords[0, 0])) == "0011"
    assert ml.value == pytest.approx(0.01 + 0.04 + 0.01 + 0.09)


def test_ml_tie_on_zero_observation():
    inst = ProblemInstance(CODE_4_2, BPSK, np.zeros(4))
    ml = ml_decode_bruteforce(inst)
    assert ml.num_ties == 4
    # ties come back in lexicographic information order
    assert ml.info_bits.reshape(4, -1).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert ml.contains(np.array([[1, 0]]))


def test_ml_matches_direct_search(rng):
    # independent oracle: loop over codewords and Gray-PAM symbols one at a time
    code = CODE_4_2
    for _ in range(20):
        y = rng.normal(size=4) * 1.2
        inst = ProblemInstance(code, PAM4, y)
        best, arg = math.inf, None
        for bits in itertools.product((0, 1), repeat=4):
            info = np.array(bits, dtype=np.uint8).reshape(2, 2)
            cws = inst.codewords(info)
            d = sum((y[i] - gray_pam_map([cws[0, i], cws[1, i]])) ** 2 for i in range(4))
            if d < best:
                best, arg = d, info
        ml = ml_decode_bruteforce(inst)
        assert ml.value == pytest.approx(best)
        assert ml.contains(arg)


def test_ml_agrees_with_polynomial_argmin(rng):
    for _ in range(50):
        y = rng.normal(size=8)
        inst = ProblemInstance(CODE_8_4, BPSK, y)
        cws = enumerate_valid_codewords(CODE_8_4)
        vals = bpsk_full_objective(y).evaluate_many(cws)
        ml = ml_decode_bruteforce(inst)
        assert ml.value == pytest.approx(vals.min())
        assert np.array_equal(ml.codewords[0, 0], cws[np.argmin(vals)])


def test_ml_agrees_with_hubo_for_pam16(rng):
    y = rng.normal(size=4)
    inst = ProblemInstance(CODE_4_2, PAM16, y)
    ml = ml_decode_bruteforce(inst)
    poly = gray_hubo_objective(y, 4)
    key = inst.key_from_channel_bits(inst.channel_bits(ml.representative), differential=False)
    assert poly.evaluate(key) == pytest.approx(ml.value)


def test_ml_enumeration_cap():
    inst = ProblemInstance(CODE_16_8, PAM16, np.zeros(16))
    with pytest.raises(ResourceLimit):
        ml_decode_bruteforce(inst)


def test_interleaved_gas_matches_ml(rng):
    perm = tuple(rng.permutation(8).tolist())
    for _ in range(20):
        info = random_info(CODE_4_2, PAM4, rng)
        inst = transmit(CODE_4_2, PAM4, info, ChannelModel(8.0), rng, perm)
        ml = ml_decode_bruteforce(inst)
        assert ml.contains(gas_decode(inst, GasConfig(), rng).info_bits)


# conventional baseline


def test_kasi_layout_sizes():
    for code in (CODE_2_1, CODE_4_2, CODE_8_4):
        lay = kasi_layout(code)
        assert lay.num_vars == code.N * (code.n + 1)
        assert len(lay.gates) == code.N * code.n // 2


def test_kasi_penalty_zero_on_consistent_assignment(rng):
    code = CODE_4_2
    lay = kasi_layout(code)
    for _ in range(10):
        u = np.zeros(4, dtype=np.uint8)
        u[list(code.info_set)] = rng.integers(0, 2, size=2)
        wires = u.astype(int).tolist()
        b = np.zeros(lay.num_vars, dtype=int)
        b[:4] = wires
        for i, j, a, c in lay.gates:
            s = b[i] + b[j]
            b[a], b[c] = s % 2, s // 2
        assert encoding_penalty(code, b) == 0
        assert np.array_equal(b[list(lay.outputs)], polar_encode(code, u))
        b[lay.gates[0][2]] ^= 1
        assert encoding_penalty(code, b) > 0


@pytest.mark.parametrize("code", [CODE_2_1, CODE_4_2])
def test_kasi_noiseless_global_minimum(code, rng):
    lay = kasi_layout(code)
    for _ in range(25):
        info = random_info(code, BPSK, rng)
        inst = transmit(code, BPSK, info, ChannelModel(math.inf), rng)
        res = kasi_bruteforce_min(kasi_qubo(code, inst.y))
        sent = inst.codewords(info)[0]
        for row in res.assignments:
            assert np.array_equal(row[list(lay.outputs)], sent)


def test_kasi_size_limit():
    with pytest.raises(ResourceLimit):
        kasi_qubo(CODE_16_8, np.zeros(16))


def test_search_space_report():
    assert search_space_report(CODE_4_2, 2, "proposed") == 4
    assert search_space_report(CODE_16_8, 1, "proposed") == 8
    assert search_space_report(CODE_4_2, 4, "conventional") == 48
    assert search_space_report(CODE_16_8, 1, "conventional") == 80
    with pytest.raises(InvalidParameter):
        search_space_report(CODE_4_2, 1, "other")


@pytest.mark.parametrize("code", [CODE_2_1, CODE_4_2])
def test_kasi_violations_cost_at_least_encoding_weight(code, rng):
    # noiseless: every assignment breaking an XOR constraint sits at least W_E above the best consistent one
    from gaspolar.objective import kasi_default_weights
    from gaspolar.polar import info_patterns

    lay = kasi_layout(code)
    X = info_patterns(lay.num_vars)
    penalty = np.array([encoding_penalty(code, b) for b in X])
    w_e = kasi_default_weights(code)[0]
    for _ in range(5):
        info = random_info(code, BPSK, rng)
        inst = transmit(code, BPSK, info, ChannelModel(math.inf), rng)
        vals = kasi_qubo(code, inst.y).evaluate_many(X)
        assert vals[penalty > 0].min() >= vals[penalty == 0].min() + w_e - 1e-12
