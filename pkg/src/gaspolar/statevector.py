"""
Dense statevector simulation of the GAS circuits.

Qubit ``j`` is bit ``j`` of the basis-state index. The key register occupies
qubits ``0 .. n_key-1`` (one per objective variable) and the value register
the next ``m`` qubits, least significant first; its top qubit is the sign of
the two's-complement objective value.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, RegisterOverflow, ResourceLimit
from .objective import MultilinearPolynomial, QuantizedObjective, ValueRegisterSpec
from .polar import PolarCode, cnot_schedule

MAX_QUBITS = 26

_SELF_INVERSE = {"H", "X", "Z", "CNOT", "SWAP", "MCZ"}
_PARAMETRIC = {"PHASE", "CPHASE"}
_ARITY = {"H": 1, "X": 1, "Z": 1, "PHASE": 1, "CNOT": 2, "SWAP": 2}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        if self.name not in _SELF_INVERSE | _PARAMETRIC:
            raise InvalidInput(f"unknown gate {self.name!r}")
        if self.name in _ARITY and len(self.qubits) != _ARITY[self.name]:
            raise InvalidInput(f"{self.name} takes {_ARITY[self.name]} qubit(s), got {self.qubits}")
        if not self.qubits or len(set(self.qubits)) != len(self.qubits):
            raise InvalidInput(f"{self.name} needs distinct qubits, got {self.qubits}")
        if (self.name in _PARAMETRIC) != (self.theta is not None):
            raise InvalidInput(f"{self.name}: theta must be given exactly for PHASE/CPHASE")
        if self.theta is not None and not math.isfinite(self.theta):
            raise InvalidInput("gate angle must be finite")

    def inverse(self) -> "Gate":
        if self.name in _PARAMETRIC:
            return Gate(self.name, self.qubits, -self.theta)
        return self

    def dump(self) -> str:
        parts = [self.name, *map(str, self.qubits)]
        if self.theta is not None:
            parts.append(repr(float(self.theta)))
        return " ".join(parts)


@dataclass
class Circuit:
    q: int
    gates: list[Gate] = field(default_factory=list)

    def add(self, name: str, *qubits: int, theta: float | None = None) -> "Circuit":
        g = Gate(name, tuple(int(x) for x in qubits), theta)
        if max(g.qubits) >= self.q or min(g.qubits) < 0:
            raise InvalidInput(f"gate {g.dump()} acts outside {self.q} qubits")
        self.gates.append(g)
        return self

    def extend(self, other: "Circuit | Iterable[Gate]") -> "Circuit":
        for g in (other.gates if isinstance(other, Circuit) else other):
            self.add(g.name, *g.qubits, theta=g.theta)
        return self

    def inverse(self) -> "Circuit":
        return Circuit(self.q, [g.inverse() for g in reversed(self.gates)])

    def widened(self, q: int) -> "Circuit":
        if q < self.q:
            raise InvalidInput("cannot narrow a circuit")
        return Circuit(q, list(self.gates))

    def count(self, name: str) -> int:
        return sum(g.name == name for g in self.gates)

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.q, other.q), self.gates + other.gates)

    def dump(self) -> str:
        return "".join(g.dump() + "\n" for g in self.gates)

    @classmethod
    def load(cls, q: int, text: str) -> "Circuit":
        circ = cls(q)
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            name = parts[0]
            if name in _PARAMETRIC:
                circ.add(name, *map(int, parts[1:-1]), theta=float(parts[-1]))
            else:
                circ.add(name, *map(int, parts[1:]))
        return circ


@dataclass(frozen=True)
class RegisterLayout:
    key_qubits: tuple[int, ...]
    value_qubits: tuple[int, ...]

    def __post_init__(self):
        allq = sorted(self.key_qubits + self.value_qubits)
        if allq != list(range(len(allq))):
            raise InvalidInput("key and value registers must be disjoint and cover 0..q-1")

    @classmethod
    def contiguous(cls, n_key: int, m: int) -> "RegisterLayout":
        return cls(tuple(range(n_key)), tuple(range(n_key, n_key + m)))

    @property
    def q(self) -> int:
        return len(self.key_qubits) + len(self.value_qubits)

    @property
    def sign_qubit(self) -> int:
        return self.value_qubits[-1]


class StateVector:
    """``2^q`` complex amplitudes; gates act in place."""

    def __init__(self, q: int, amplitudes: np.ndarray | None = None):
        if q > MAX_QUBITS:
            raise ResourceLimit(f"{q} qubits exceed the simulator cap of {MAX_QUBITS}")
        self.q = q
        if amplitudes is None:
            amplitudes = np.zeros(1 << q, dtype=np.complex128)
            amplitudes[0] = 1.0
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << q,):
            raise InvalidInput(f"expected {1 << q} amplitudes, got shape {amplitudes.shape}")
        self.amplitudes = amplitudes.copy()

    @classmethod
    def basis(cls, q: int, index: int) -> "StateVector":
        amps = np.zeros(1 << q, dtype=np.complex128)
        amps[index] = 1.0
        return cls(q, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.q, self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _sel(self, fixed: dict[int, int]):
        idx = [slice(None)] * self.q
        for qubit, bit in fixed.items():
            idx[self.q - 1 - qubit] = bit
        return tuple(idx)

    def apply(self, gate: Gate) -> "StateVector":
        if max(gate.qubits) >= self.q or min(gate.qubits) < 0:
            raise InvalidInput(f"gate {gate.dump()} acts outside {self.q} qubits")
        t = self.amplitudes.reshape((2,) * self.q)
        name, qs = gate.name, gate.qubits
        if name == "H":
            s0, s1 = self._sel({qs[0]: 0}), self._sel({qs[0]: 1})
            a0, a1 = t[s0].copy(), t[s1].copy()
            t[s0] = (a0 + a1) * _INV_SQRT2
            t[s1] = (a0 - a1) * _INV_SQRT2
        elif name in ("X", "CNOT"):
            ctrl = {c: 1 for c in qs[:-1]}
            s0, s1 = self._sel({**ctrl, qs[-1]: 0}), self._sel({**ctrl, qs[-1]: 1})
            a0 = t[s0].copy()
            t[s0] = t[s1]
            t[s1] = a0
        elif name == "SWAP":
            s01, s10 = self._sel({qs[0]: 0, qs[1]: 1}), self._sel({qs[0]: 1, qs[1]: 0})
            a = t[s01].copy()
            t[s01] = t[s10]
            t[s10] = a
        elif name in ("Z", "MCZ"):
            t[self._sel({x: 1 for x in qs})] *= -1.0
        else:  # PHASE, CPHASE: diagonal phase on the all-ones subspace
            t[self._sel({x: 1 for x in qs})] *= np.exp(1j * gate.theta)
        return self

    def run(self, circuit: Circuit) -> "StateVector":
        if circuit.q > self.q:
            raise InvalidInput(f"circuit needs {circuit.q} qubits, state has {self.q}")
        for g in circuit.gates:
            self.apply(g)
        return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,re,im\n")
        for i, a in enumerate(self.amplitudes):
            buf.write(f"{i},{float(a.real)!r},{float(a.imag)!r}\n")
        return buf.getvalue()


_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    return state.copy().apply(gate)


# circuit builders

def qft(qubits: Sequence[int], q: int | None = None) -> Circuit:
    """Exact QFT, ``|x> -> 2^(-m/2) sum_y exp(2 pi i x y / 2^m) |y>``, qubits least significant first."""
    qubits = list(qubits)
    m = len(qubits)
    circ = Circuit(q if q is not None else max(qubits) + 1)
    for j in range(m - 1, -1, -1):
        circ.add("H", qubits[j])
        for k in range(j - 1, -1, -1):
            circ.add("CPHASE", qubits[k], qubits[j], theta=math.pi / 2 ** (j - k))
    for j in range(m // 2):
        circ.add("SWAP", qubits[j], qubits[m - 1 - j])
    return circ


def inverse_qft(m_or_qubits: int | Sequence[int], q: int | None = None) -> Circuit:
    qubits = list(range(m_or_qubits)) if isinstance(m_or_qubits, int) else list(m_or_qubits)
    return qft(qubits, q).inverse()


def interleaver_swaps(perm: Sequence[int]) -> list[tuple[int, int]]:
    """SWAPs that move the bit at position ``perm[j]`` to position ``j``."""
    holds = list(range(len(perm)))  # holds[q] = original position now on qubit q
    where = list(range(len(perm)))
    swaps = []
    for j, src in enumerate(perm):
        if holds[j] == src:
            continue
        k = where[src]
        swaps.append((j, k))
        holds[j], holds[k] = holds[k], holds[j]
        where[holds[j]], where[holds[k]] = j, k
    return swaps


def prepare_initial_circuit(code: PolarCode, M: int = 1, use_diff: bool = False,
                            interleaver: Sequence[int] | None = None, q: int | None = None) -> Circuit:
    """Superposition of all valid (interleaved, optionally transformed) codewords.

    Hadamards on every information position of each level, the encoder's
    CNOT butterfly per level, SWAPs for the interleaver, then the per-symbol
    cumulative-XOR cascade when ``use_diff``.
    """
    N = code.N
    n_key = M * N
    if interleaver is not None and sorted(interleaver) != list(range(n_key)):
        raise InvalidInput(f"interleaver must permute {n_key} positions")
    circ = Circuit(n_key if q is None else q)
    if circ.q < n_key:
        raise InvalidInput(f"register of {circ.q} qubits cannot hold {n_key} key bits")
    sched = cnot_schedule(code)
    for s in range(M):
        for i in code.info_set:
            circ.add("H", s * N + i)
    for s in range(M):
        for c, t in sched:
            circ.add("CNOT", s * N + c, s * N + t)
    if interleaver is not None:
        for a, b in interleaver_swaps(interleaver):
            circ.add("SWAP", a, b)
    if use_diff:
        for i in range(N):
            for s in range(1, M):
                circ.add("CNOT", (s - 1) * N + i, s * N + i)
    return circ


def _term_angle(coeff: float, t: int, m: int, integer: bool) -> float:
    if integer:
        return 2.0 * math.pi * ((int(coeff) << t) % (1 << m)) / (1 << m)
    return math.fmod(2.0 * math.pi * coeff * 2.0**t / 2.0**m, 2.0 * math.pi)


def dictionary_circuit(poly: MultilinearPolynomial | QuantizedObjective, c: float,
                       spec: ValueRegisterSpec, layout: RegisterLayout | None = None,
                       integer: bool = True) -> Circuit:
    """Encode ``E(x) - c`` (scaled by ``2^f``) into the value register.

    Integer mode rounds coefficients and threshold to multiples of ``2^-f``
    and the value register then holds ``E_q(x) - c_q`` mod ``2^m`` exactly.
    Real mode uses the unrounded scaled coefficients as phase angles.
    """
    if isinstance(poly, QuantizedObjective):
        qobj, poly = poly, poly.poly
        if qobj.scale_bits != spec.scale_bits:
            raise InvalidInput("objective scale does not match the register spec")
    else:
        qobj = QuantizedObjective(poly, spec.scale_bits)
    n_key, m = poly.num_vars, spec.m
    layout = layout or RegisterLayout.contiguous(n_key, m)
    if len(layout.key_qubits) < n_key or len(layout.value_qubits) != m:
        raise InvalidInput("register layout does not match objective and value register")
    scale = 2.0**spec.scale_bits

    if integer:
        c_q = int(round(c * scale))
        lo, hi = qobj.bounds()
        if not spec.fits(lo - c_q, hi - c_q):
            raise RegisterOverflow(
                f"E_q - c_q spans [{lo - c_q}, {hi - c_q}], outside the {m}-qubit two's-complement range")
        terms = dict(qobj.terms)
        terms[()] = terms.get((), 0) - c_q
    else:
        terms = {k: coeff * scale for k, coeff in poly.sorted_terms()}
        terms[()] = terms.get((), 0.0) - c * scale

    circ = Circuit(layout.q)
    for v in layout.value_qubits:
        circ.add("H", v)
    for key, coeff in terms.items():
        controls = [layout.key_qubits[i] for i in key]
        for t, v in enumerate(layout.value_qubits):
            theta = _term_angle(coeff, t, m, integer)
            if theta == 0.0:
                continue
            if controls:
                circ.add("CPHASE", *controls, v, theta=theta)
            else:
                circ.add("PHASE", v, theta=theta)
    circ.extend(inverse_qft(layout.value_qubits, layout.q))
    return circ


def grover_operator(A: Circuit, layout: RegisterLayout) -> Circuit:
    """Oracle (Z on the sign qubit), A^H, reflection about |0...0>, A."""
    q = layout.q
    G = Circuit(q)
    G.add("Z", layout.sign_qubit)
    G.extend(A.inverse())
    everything = list(range(q))
    for x in everything:
        G.add("X", x)
    G.add("MCZ", *everything)
    for x in everything:
        G.add("X", x)
    G.extend(A)
    return G


@dataclass
class Measurement:
    index: int
    key_bits: np.ndarray
    value_bits: np.ndarray

    @property
    def value(self) -> int:
        """Signed two's-complement reading of the value register."""
        m = len(self.value_bits)
        raw = int(sum(int(b) << t for t, b in enumerate(self.value_bits)))
        return raw - (1 << m) if m and self.value_bits[-1] else raw


def split_index(index: int, layout: RegisterLayout) -> tuple[np.ndarray, np.ndarray]:
    key = np.array([(index >> k) & 1 for k in layout.key_qubits], dtype=np.uint8)
    val = np.array([(index >> v) & 1 for v in layout.value_qubits], dtype=np.uint8)
    return key, val


def measure_all(state: StateVector, rng: np.random.Generator,
                layout: RegisterLayout | None = None) -> Measurement:
    layout = layout or RegisterLayout.contiguous(state.q, 0)
    p = state.probabilities()
    index = int(rng.choice(p.size, p=p / p.sum()))
    key, val = split_index(index, layout)
    return Measurement(index, key, val)


def key_marginal(state: StateVector, layout: RegisterLayout) -> np.ndarray:
    """Probability of each key register value (indexed by the key bits as an integer)."""
    p = state.probabilities().reshape((2,) * state.q)
    value_axes = tuple(state.q - 1 - v for v in layout.value_qubits)
    marg = p.sum(axis=value_axes) if value_axes else p
    # remaining axes are key qubits in descending qubit order
    order = sorted(layout.key_qubits, reverse=True)
    rank = {qb: i for i, qb in enumerate(sorted(layout.key_qubits))}
    flat = np.zeros(1 << len(order))
    for idx, prob in np.ndenumerate(marg):
        k = sum(bit << rank[qb] for bit, qb in zip(idx, order))
        flat[k] = prob
    return flat


def bits_to_index(bits: Sequence[int], qubits: Sequence[int] | None = None) -> int:
    qubits = range(len(bits)) if qubits is None else qubits
    return int(sum(int(b) << qb for b, qb in zip(bits, qubits)))


def twos_complement(value: int, m: int) -> np.ndarray:
    raw = value % (1 << m)
    return np.array([(raw >> t) & 1 for t in range(m)], dtype=np.uint8)


def verify_dictionary(objective: QuantizedObjective, c: float, spec: ValueRegisterSpec,
                      atol: float = 1e-9) -> tuple[int, int]:
    """Check the value register for every key basis state at once.

    All key qubits are put in uniform superposition before the dictionary;
    key ``x`` passes when its whole weight sits on ``E_q(x) - c_q`` (two's
    complement). Returns ``(passed, total)``.
    """
    n_key, m = objective.num_vars, spec.m
    layout = RegisterLayout.contiguous(n_key, m)
    circ = Circuit(layout.q)
    for k in layout.key_qubits:
        circ.add("H", k)
    circ.extend(dictionary_circuit(objective, c, spec, layout))
    probs = StateVector(layout.q).run(circ).probabilities().reshape(1 << m, 1 << n_key)
    c_q = int(round(c * 2.0**spec.scale_bits))
    keys = ((np.arange(1 << n_key)[:, None] >> np.arange(n_key)) & 1).astype(np.uint8)
    expected = (objective.evaluate_many(keys) - c_q) % (1 << m)
    got = probs[expected, np.arange(1 << n_key)]
    passed = int(np.sum(np.abs(got - 1.0 / (1 << n_key)) <= atol))
    return passed, 1 << n_key
