import itertools
import math

import numpy as np
import pytest

from gaspolar import InvalidInput, RegisterOverflow, ResourceLimit
from gaspolar.instance import ProblemInstance
from gaspolar.modem import gray_to_binary
from gaspolar.objective import MultilinearPolynomial, QuantizedObjective, ValueRegisterSpec, natural_qubo_objective
from gaspolar.polar import enumerate_valid_codewords
from gaspolar.statevector import (
    Circuit,
    Gate,
    RegisterLayout,
    StateVector,
    apply_gate,
    bits_to_index,
    dictionary_circuit,
    grover_operator,
    interleaver_swaps,
    inverse_qft,
    key_marginal,
    measure_all,
    prepare_initial_circuit,
    qft,
    twos_complement,
    verify_dictionary,
)

from conftest import BPSK, CODE_2_1, CODE_4_2, CODE_8_4, PAM4

R2 = 1 / math.sqrt(2)


def random_state(q, rng):
    a = rng.normal(size=2**q) + 1j * rng.normal(size=2**q)
    return StateVector(q, a / np.linalg.norm(a))


def dense(gate, q):
    """Reference unitary by acting on each basis vector."""
    return np.column_stack([apply_gate(StateVector.basis(q, i), gate).amplitudes for i in range(2**q)])


def test_hadamard_on_zero():
    s = apply_gate(StateVector(1), Gate("H", (0,)))
    assert np.allclose(s.amplitudes, [R2, R2])


def test_cnot_on_10():
    # |q1 q0> = |10> in the problem's notation: control qubit set, target clear
    s = apply_gate(StateVector.basis(2, 0b01), Gate("CNOT", (0, 1)))
    assert np.allclose(s.probabilities(), [0, 0, 0, 1])


def test_z_on_plus():
    s = StateVector(1, [R2, R2]).apply(Gate("Z", (0,)))
    assert np.allclose(s.amplitudes, [R2, -R2])


def test_gate_validation():
    with pytest.raises(InvalidInput):
        Gate("CNOT", (1, 1))
    with pytest.raises(InvalidInput):
        Gate("PHASE", (0,))
    with pytest.raises(InvalidInput):
        Gate("FOO", (0,))
    with pytest.raises(InvalidInput):
        StateVector(2).apply(Gate("H", (2,)))
    with pytest.raises(InvalidInput):
        Circuit(2).add("H", 3)


def test_qubit_cap():
    with pytest.raises(ResourceLimit):
        StateVector(27)


def test_dense_unitaries():
    assert np.allclose(dense(Gate("X", (1,)), 2), np.kron(np.array([[0, 1], [1, 0]]), np.eye(2)))
    h = np.array([[1, 1], [1, -1]]) * R2
    assert np.allclose(dense(Gate("H", (0,)), 2), np.kron(np.eye(2), h))
    sw = dense(Gate("SWAP", (0, 1)), 2)
    assert np.allclose(sw, np.eye(4)[[0, 2, 1, 3]])
    cp = dense(Gate("CPHASE", (0, 2), 0.3), 3)
    assert np.allclose(cp, np.diag([np.exp(0.3j) if (i & 1 and i & 4) else 1 for i in range(8)]))


def test_norm_preserved_and_inverse(rng):
    q = 5
    circ = Circuit(q)
    for _ in range(60):
        kind = rng.integers(7)
        a, b, c = rng.choice(q, 3, replace=False).tolist()
        if kind == 0:
            circ.add("H", a)
        elif kind == 1:
            circ.add("CNOT", a, b)
        elif kind == 2:
            circ.add("SWAP", a, b)
        elif kind == 3:
            circ.add("PHASE", a, theta=float(rng.normal()))
        elif kind == 4:
            circ.add("CPHASE", a, b, c, theta=float(rng.normal()))
        elif kind == 5:
            circ.add("MCZ", a, b)
        else:
            circ.add("X", a)
    psi = random_state(q, rng)
    out = psi.copy()
    for g in circ.gates:
        out.apply(g)
        assert abs(out.norm() - 1) < 1e-9
    out.run(circ.inverse())
    assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-12)


def test_circuit_dump_round_trip(rng):
    circ = prepare_initial_circuit(CODE_4_2, 2, True, q=9)
    circ.add("CPHASE", 0, 3, 8, theta=0.123456789)
    assert Circuit.load(9, circ.dump()).gates == circ.gates


def test_statevector_csv():
    text = StateVector(1).to_csv().splitlines()
    assert text[0] == "index,re,im" and text[1] == "0,1.0,0.0"


# QFT


def test_inverse_qft_m1_is_h():
    c = inverse_qft(1)
    assert [(g.name, g.qubits) for g in c.gates] == [("H", (0,))]


def test_qft_matches_dft():
    m = 4
    F = np.exp(2j * np.pi * np.outer(np.arange(2**m), np.arange(2**m)) / 2**m) / 2 ** (m / 2)
    U = np.column_stack([StateVector.basis(m, i).run(qft(range(m))).amplitudes for i in range(2**m)])
    assert np.allclose(U, F, atol=1e-12)


def test_qft_round_trip(rng):
    psi = random_state(3, rng)
    out = psi.copy().run(qft(range(3))).run(inverse_qft(3))
    assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-12)


def test_inverse_qft_fourier_state_5():
    fourier5 = np.exp(2j * np.pi * 5 * np.arange(8) / 8) / math.sqrt(8)
    out = StateVector(3, fourier5).run(inverse_qft(3))
    assert abs(out.amplitudes[0b101]) == pytest.approx(1.0, abs=1e-12)


# initial state


def support(state, tol=1e-12):
    return {i for i, p in enumerate(state.probabilities()) if p > tol}


def index_of(bits):
    return bits_to_index(bits)


def test_initial_state_4_2():
    circ = prepare_initial_circuit(CODE_4_2)
    assert sorted(g.qubits[0] for g in circ.gates if g.name == "H") == [1, 3]
    assert circ.count("CNOT") == 4
    s = StateVector(4).run(circ)
    expected = {index_of(cw) for cw in enumerate_valid_codewords(CODE_4_2)}
    assert support(s) == expected
    assert np.allclose([s.amplitudes[i] for i in expected], 0.5)


def test_initial_state_2_1():
    s = StateVector(2).run(prepare_initial_circuit(CODE_2_1))
    assert np.allclose(s.amplitudes, [R2, 0, 0, R2])


@pytest.mark.parametrize("interleaver", [None, (7, 2, 5, 0, 1, 6, 3, 4)])
def test_initial_state_pam4_differential(interleaver):
    inst = ProblemInstance(CODE_4_2, PAM4, np.zeros(4), interleaver)
    s = StateVector(8).run(prepare_initial_circuit(CODE_4_2, 2, True, interleaver))
    info = np.array(list(itertools.product((0, 1), repeat=4)), dtype=np.uint8).reshape(-1, 2, 2)
    keys = inst.key_from_channel_bits(inst.channel_bits(info), differential=True)
    expected = {index_of(k) for k in keys}
    assert support(s) == expected
    assert np.allclose(s.probabilities()[list(expected)], 1 / 16)


def test_interleaver_swaps():
    perm = [3, 0, 2, 1, 5, 4]
    bits = np.array([1, 0, 0, 1, 1, 0])
    reg = bits.copy()
    for a, b in interleaver_swaps(perm):
        reg[a], reg[b] = reg[b], reg[a]
    assert np.array_equal(reg, bits[perm])


# dictionary


def value_readout(poly, c, spec, key_bits):
    lay = RegisterLayout.contiguous(len(key_bits), spec.m)
    s = StateVector.basis(lay.q, bits_to_index(key_bits)).run(dictionary_circuit(poly, c, spec, lay))
    p = s.probabilities()
    idx = int(np.argmax(p))
    assert p[idx] == pytest.approx(1.0, abs=1e-9)
    return measure_all(s, np.random.default_rng(0), lay)


def test_dictionary_zero_polynomial():
    spec = ValueRegisterSpec(3, 0)
    for k in itertools.product((0, 1), repeat=2):
        assert value_readout(MultilinearPolynomial(2), 0, spec, k).value_bits.tolist() == [0, 0, 0]


def test_dictionary_reads_three():
    meas = value_readout(MultilinearPolynomial(1, {(0,): 3}), 0, ValueRegisterSpec(4, 0), [1])
    assert "".join(map(str, meas.value_bits[::-1])) == "0011"


def test_dictionary_negative_one():
    meas = value_readout(MultilinearPolynomial(1, {(): -1.0}), 0, ValueRegisterSpec(4, 0), [0])
    assert "".join(map(str, meas.value_bits[::-1])) == "1111"
    assert meas.value == -1


def test_dictionary_overflow_detected():
    with pytest.raises(RegisterOverflow):
        dictionary_circuit(MultilinearPolynomial(1, {(0,): 9}), 0, ValueRegisterSpec(4, 0))


def test_dictionary_exhaustive_random(rng):
    for _ in range(5):
        y = rng.normal(size=3)
        poly = natural_qubo_objective(y, 2)
        f = 3
        q = QuantizedObjective(poly, f)
        lo, hi = q.bounds()
        c_q = int(rng.integers(lo, hi + 1))
        spec = ValueRegisterSpec(max(1, (max(abs(lo - c_q), abs(hi - c_q)) + 1).bit_length() + 1), f)
        passed, total = verify_dictionary(q, c_q / 2**f, spec)
        assert passed == total == 64


def test_dictionary_real_mode_concentrates():
    # 2.3 at scale 2^2 is 9.2; the readout should peak at 9
    poly = MultilinearPolynomial(1, {(0,): 2.3})
    spec = ValueRegisterSpec(6, 2)
    lay = RegisterLayout.contiguous(1, 6)
    s = StateVector.basis(7, 1).run(dictionary_circuit(poly, 0.0, spec, lay, integer=False))
    vals = s.probabilities().reshape(64, 2)[:, 1]
    assert int(np.argmax(vals)) == 9
    assert vals[9] > 0.8


def test_twos_complement():
    assert twos_complement(3, 4).tolist() == [1, 1, 0, 0]
    assert twos_complement(-1, 4).tolist() == [1, 1, 1, 1]


# Grover operator


def single_marked_instance():
    # key x in {0,1}^2 with E(x) = x0 + 2 x1 - 2.5 at f = 1; only x = 00 is below c = -2
    poly = MultilinearPolynomial(2, {(0,): 1.0, (1,): 2.0, (): -2.5})
    spec = ValueRegisterSpec(5, 1)
    lay = RegisterLayout.contiguous(2, 5)
    prep = Circuit(lay.q).add("H", 0).add("H", 1)
    return poly, spec, lay, prep


def test_grover_one_of_four_succeeds_in_one_step():
    poly, spec, lay, prep = single_marked_instance()
    A = prep + dictionary_circuit(poly, -2.0, spec, lay)
    psi = StateVector(lay.q).run(A).run(grover_operator(A, lay))
    assert key_marginal(psi, lay)[0] == pytest.approx(1.0, abs=1e-9)
    assert math.sin(3 * math.asin(0.5)) ** 2 == pytest.approx(1.0)


def test_grover_no_marked_state_is_identity():
    poly, spec, lay, prep = single_marked_instance()
    A = prep + dictionary_circuit(poly, -4.0, spec, lay)
    psi = StateVector(lay.q).run(A)
    before = key_marginal(psi, lay)
    psi.run(grover_operator(A, lay))
    assert np.allclose(key_marginal(psi, lay), before, atol=1e-12)


def test_grover_keeps_invalid_codewords_at_zero():
    from gaspolar.objective import QuantizedObjective, bpsk_simplified_objective

    y = np.array([0.9, 0.8, -1.1, -0.7])
    poly = bpsk_simplified_objective(y)
    spec = ValueRegisterSpec(8, 3)
    lay = RegisterLayout.contiguous(4, 8)
    A = prepare_initial_circuit(CODE_4_2, q=lay.q) + dictionary_circuit(poly, 0.0, spec, lay)
    G = grover_operator(A, lay)
    valid = {index_of(cw) for cw in enumerate_valid_codewords(CODE_4_2)}
    psi = StateVector(lay.q).run(A)
    for _ in range(4):
        psi.run(G)
        marg = key_marginal(psi, lay)
        assert all(marg[i] < 1e-20 for i in range(16) if i not in valid)


def test_measure_basis_state():
    s = StateVector.basis(3, 5)
    lay = RegisterLayout.contiguous(2, 1)
    m = measure_all(s, np.random.default_rng(1), lay)
    assert m.index == 5 and m.key_bits.tolist() == [1, 0] and m.value_bits.tolist() == [1]


def test_measure_uniform_statistics():
    s = StateVector(2, np.full(4, 0.5))
    rng = np.random.default_rng(9)
    counts = np.bincount([measure_all(s, rng).index for _ in range(100000)], minlength=4) / 100000
    assert np.all(np.abs(counts - 0.25) < 0.01)
