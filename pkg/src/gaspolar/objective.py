"""
Multilinear objectives over binary variables.

A polynomial is a mapping ``frozenset(vars) -> coefficient``; the empty set
holds the constant. Products collapse through ``x * x = x``. Multi-level
codes lay out their variables as ``x[s, i] -> s * N + i``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidInput, ResourceLimit
from .modem import level_weights, scaling_factor
from .polar import PolarCode, cnot_schedule

DEFAULT_SCALE_BITS = 8


class MultilinearPolynomial:
    """Immutable real multilinear polynomial in ``num_vars`` binary variables."""

    __slots__ = ("num_vars", "_terms")

    def __init__(self, num_vars: int, terms: Mapping[Iterable[int], float] | None = None):
        self.num_vars = int(num_vars)
        acc: dict[frozenset, float] = {}
        for key, coeff in (terms or {}).items():
            key = frozenset(int(v) for v in key)
            if any(v < 0 or v >= self.num_vars for v in key):
                raise InvalidInput(f"term {sorted(key)} references a variable >= {self.num_vars}")
            acc[key] = acc.get(key, 0.0) + float(coeff)
        self._terms = MappingProxyType({k: c for k, c in acc.items() if c != 0.0})

    # construction helpers
    @classmethod
    def constant(cls, num_vars: int, value: float) -> "MultilinearPolynomial":
        return cls(num_vars, {(): value})

    @classmethod
    def variable(cls, num_vars: int, index: int, coeff: float = 1.0) -> "MultilinearPolynomial":
        return cls(num_vars, {(index,): coeff})

    @property
    def terms(self) -> Mapping[frozenset, float]:
        return self._terms

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    @property
    def const(self) -> float:
        return self._terms.get(frozenset(), 0.0)

    def __len__(self):
        return len(self._terms)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], float]]:
        return sorted(((tuple(sorted(k)), c) for k, c in self._terms.items()),
                      key=lambda kc: (len(kc[0]), kc[0]))

    def _coerce(self, other) -> "MultilinearPolynomial":
        if isinstance(other, MultilinearPolynomial):
            return other
        return MultilinearPolynomial.constant(self.num_vars, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        n = max(self.num_vars, other.num_vars)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0.0) + c
        return MultilinearPolynomial(n, acc)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultilinearPolynomial):
            other = float(other)
            return MultilinearPolynomial(self.num_vars, {k: c * other for k, c in self._terms.items()})
        n = max(self.num_vars, other.num_vars)
        acc: dict[frozenset, float] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = k1 | k2
                acc[k] = acc.get(k, 0.0) + c1 * c2
        return MultilinearPolynomial(n, acc)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, MultilinearPolynomial)
                and self.num_vars == other.num_vars and dict(self._terms) == dict(other._terms))

    def __repr__(self):
        return f"MultilinearPolynomial(num_vars={self.num_vars}, terms={len(self)}, degree={self.degree})"

    def allclose(self, other: "MultilinearPolynomial", atol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return self.num_vars == other.num_vars and all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol for k in keys)

    # evaluation
    def evaluate(self, x) -> float:
        x = np.asarray(x)
        if x.shape != (self.num_vars,):
            raise InvalidInput(f"expected {self.num_vars} variables, got shape {x.shape}")
        return float(sum(c for k, c in self._terms.items() if all(x[v] for v in k)))

    def evaluate_many(self, X) -> np.ndarray:
        """Vectorized evaluation over the rows of ``X``."""
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.num_vars:
            raise InvalidInput(f"expected rows of {self.num_vars} variables, got shape {X.shape}")
        out = np.zeros(X.shape[0])
        Xb = X.astype(bool)
        for k, c in self._terms.items():
            if k:
                out += c * np.all(Xb[:, sorted(k)], axis=1)
            else:
                out += c
        return out

    # quantization
    def quantized(self, scale_bits: int) -> dict[tuple[int, ...], int]:
        """Coefficients rounded to integers at scale ``2^scale_bits``."""
        s = 2.0**scale_bits
        out = {}
        for k, c in self.sorted_terms():
            q = int(round(c * s))
            if q:
                out[k] = q
        return out

    def bounds(self) -> tuple[float, float]:
        """Interval-arithmetic enclosure of the value range over {0,1}^n."""
        lo = hi = self.const
        for k, c in self._terms.items():
            if k:
                lo += min(c, 0.0)
                hi += max(c, 0.0)
        return lo, hi

    # serialization
    def to_json(self) -> str:
        return json.dumps({"num_vars": self.num_vars,
                           "terms": [{"vars": list(k), "coeff": c} for k, c in self.sorted_terms()]})

    @classmethod
    def from_json(cls, text: str) -> "MultilinearPolynomial":
        d = json.loads(text)
        return cls(d["num_vars"], {tuple(t["vars"]): t["coeff"] for t in d["terms"]})


class QuantizedObjective:
    """Integer-coefficient view of a polynomial used by the dictionary and GAS loop."""

    def __init__(self, poly: MultilinearPolynomial, scale_bits: int = DEFAULT_SCALE_BITS):
        self.poly = poly
        self.scale_bits = scale_bits
        self.terms = poly.quantized(scale_bits)
        self.num_vars = poly.num_vars

    def evaluate(self, x) -> int:
        x = np.asarray(x)
        return int(sum(c for k, c in self.terms.items() if all(x[v] for v in k)))

    def evaluate_many(self, X) -> np.ndarray:
        Xb = np.asarray(X).astype(bool)
        out = np.zeros(Xb.shape[0], dtype=np.int64)
        for k, c in self.terms.items():
            out += c * np.all(Xb[:, list(k)], axis=1) if k else c
        return out

    def bounds(self) -> tuple[int, int]:
        const = self.terms.get((), 0)
        lo = const + sum(min(c, 0) for k, c in self.terms.items() if k)
        hi = const + sum(max(c, 0) for k, c in self.terms.items() if k)
        return lo, hi

    def to_real(self, value: int) -> float:
        return value / 2.0**self.scale_bits


@dataclass(frozen=True)
class ValueRegisterSpec:
    m: int
    scale_bits: int

    def fits(self, lo: int, hi: int) -> bool:
        return -(2 ** (self.m - 1)) <= lo and hi < 2 ** (self.m - 1)


def register_size(lo: int, hi: int) -> int:
    """Smallest m with ``-2^(m-1) <= lo`` and ``hi < 2^(m-1)``."""
    m = 1
    while not (-(2 ** (m - 1)) <= lo and hi < 2 ** (m - 1)):
        m += 1
    return m


def value_register_spec(poly: MultilinearPolynomial, f: int = DEFAULT_SCALE_BITS) -> ValueRegisterSpec:
    lo, hi = QuantizedObjective(poly, f).bounds()
    return ValueRegisterSpec(register_size(lo, hi), f)


def threshold_register_spec(poly: MultilinearPolynomial, f: int = DEFAULT_SCALE_BITS) -> ValueRegisterSpec:
    """Register wide enough for ``E_q(x) - c_q`` with any threshold ``c_q`` inside the value range."""
    lo, hi = QuantizedObjective(poly, f).bounds()
    return ValueRegisterSpec(register_size(lo - hi, hi - lo), f)


# formulations

def bpsk_full_objective(y) -> MultilinearPolynomial:
    """``sum_i (y_i - (1 - 2 x_i))^2`` expanded to ``const + sum 4 y_i x_i``."""
    y = np.asarray(y, dtype=float)
    terms = {(): float(np.sum((y - 1.0) ** 2))}
    for i, yi in enumerate(y):
        terms[(i,)] = 4.0 * yi
    return MultilinearPolynomial(len(y), terms)


def bpsk_simplified_objective(y) -> MultilinearPolynomial:
    y = np.asarray(y, dtype=float)
    return MultilinearPolynomial(len(y), {(i,): yi for i, yi in enumerate(y)})


def _symbol_poly(num_vars: int, bits: list[int], M: int, gray: bool) -> MultilinearPolynomial:
    """Symbol coordinate as a polynomial in the bits of one symbol."""
    w = level_weights(M) / math.sqrt(scaling_factor(M))
    one = MultilinearPolynomial.constant(num_vars, 1.0)
    out = MultilinearPolynomial(num_vars)
    running = one
    for j, v in enumerate(bits):
        antipodal = one - MultilinearPolynomial.variable(num_vars, v, 2.0)
        running = running * antipodal if gray else antipodal
        out = out + running * w[j]
    return out


def _distance_objective(y, M: int, gray: bool) -> MultilinearPolynomial:
    y = np.asarray(y, dtype=float)
    N = len(y)
    nv = M * N
    total = MultilinearPolynomial(nv)
    for i, yi in enumerate(y):
        s = _symbol_poly(nv, [lvl * N + i for lvl in range(M)], M, gray)
        r = s - float(yi)
        total = total + r * r
    return total


def gray_hubo_objective(y, M: int) -> MultilinearPolynomial:
    """Squared distance to Gray-coded PAM symbols; degree up to M."""
    return _distance_objective(y, M, gray=True)


def natural_qubo_objective(y, M: int) -> MultilinearPolynomial:
    """Squared distance after the per-symbol Gray-to-natural transform; degree <= 2."""
    return _distance_objective(y, M, gray=False)


# constraint-based baseline

@dataclass(frozen=True)
class KasiLayout:
    """Variable indices of the constraint-based QUBO.

    ``inputs`` are the pre-encoding bits, ``outputs`` the codeword layer, and
    ``gates`` lists ``(i, j, a_sum, a_carry)`` for every XOR.
    """

    num_vars: int
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    gates: tuple[tuple[int, int, int, int], ...]


KASI_MAX_N = 8


def kasi_layout(code: PolarCode) -> KasiLayout:
    N = code.N
    wire = list(range(N))
    nxt = N
    gates = []
    for control, target in cnot_schedule(code):
        a_sum, a_carry = nxt, nxt + 1
        nxt += 2
        gates.append((wire[control], wire[target], a_sum, a_carry))
        wire[target] = a_sum
    return KasiLayout(nxt, tuple(range(N)), tuple(wire), tuple(gates))


def kasi_default_weights(code: PolarCode) -> tuple[float, float, float]:
    return 1.0, 4.0, 2.0 - code.rate


def kasi_qubo(code: PolarCode, y, weights: tuple[float, float, float] | None = None,
              max_n: int = KASI_MAX_N) -> MultilinearPolynomial:
    """Encoding + frozen + receiver penalties over ``N (log2 N + 1)`` variables (BPSK)."""
    if code.N > max_n:
        raise ResourceLimit(f"N = {code.N} exceeds the brute-force limit {max_n}")
    y = np.asarray(y, dtype=float)
    if y.shape != (code.N,):
        raise InvalidInput(f"expected {code.N} received values, got shape {y.shape}")
    w_e, w_f, w_r = kasi_default_weights(code) if weights is None else weights
    lay = kasi_layout(code)
    nv = lay.num_vars
    var = lambda i, c=1.0: MultilinearPolynomial.variable(nv, i, c)  # noqa: E731

    total = MultilinearPolynomial(nv)
    for i, j, a, b in lay.gates:
        r = var(i) + var(j) - var(a) - var(b, 2.0)
        total = total + w_e * (r * r)
    for i in code.frozen_set:
        total = total + var(lay.inputs[i], w_f)
    for i, yi in enumerate(y):
        total = total + var(lay.outputs[i], w_r * yi)
    return total


def encoding_penalty(code: PolarCode, b) -> int:
    """Unweighted sum of the XOR constraint residuals for an assignment."""
    lay = kasi_layout(code)
    b = np.asarray(b, dtype=int)
    return int(sum((b[i] + b[j] - b[a] - 2 * b[c]) ** 2 for i, j, a, c in lay.gates))
