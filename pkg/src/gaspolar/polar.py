"""
Polar code model and encoder.

The generator is the plain Kronecker power of ``[[1, 0], [1, 1]]`` with no
bit-reversal permutation, so ``x = u @ G_N`` (mod 2) and ``G_N`` is its own
inverse over GF(2). Frozen bits are always zero.

Bit vectors are numpy ``uint8`` arrays; index 0 is the leftmost character
when serialized as a 0/1 string.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, InvalidParameter, ResourceLimit

ENUMERATION_CAP = 24

_G2 = np.array([[1, 0], [1, 1]], dtype=np.uint8)


@dataclass(frozen=True)
class PolarCode:
    N: int
    K: int
    frozen_set: tuple[int, ...]
    info_set: tuple[int, ...] = field(init=False)
    n: int = field(init=False)

    def __post_init__(self):
        N, K = int(self.N), int(self.K)
        if N < 2 or N & (N - 1):
            raise InvalidParameter(f"code length must be a power of two >= 2, got {N}")
        frozen = tuple(sorted(int(i) for i in self.frozen_set))
        if len(set(frozen)) != len(frozen) or any(i < 0 or i >= N for i in frozen):
            raise InvalidParameter(f"frozen set {frozen} is not a set of indices below {N}")
        if len(frozen) != N - K:
            raise InvalidParameter(f"|F| = {len(frozen)} but N - K = {N - K}")
        info = tuple(i for i in range(N) if i not in set(frozen))
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "frozen_set", frozen)
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "n", N.bit_length() - 1)

    @classmethod
    def from_dict(cls, d: dict) -> "PolarCode":
        """Build from the config form ``{n_bits, k_bits, frozen}``."""
        return cls(d["n_bits"], d["k_bits"], tuple(d["frozen"]))

    def to_dict(self) -> dict:
        return {"n_bits": self.N, "k_bits": self.K, "frozen": list(self.frozen_set)}

    @property
    def rate(self) -> float:
        return self.K / self.N


@dataclass(frozen=True)
class CnotSchedule:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def apply(self, bits) -> np.ndarray:
        """XOR each control into its target, in order, along the last axis."""
        out = np.array(bits, dtype=np.uint8, copy=True)
        for c, t in self.pairs:
            out[..., t] ^= out[..., c]
        return out

    def depth(self) -> int:
        """Greedy layer count when gates on disjoint qubits run in parallel."""
        busy: dict[int, int] = {}
        depth = 0
        for c, t in self.pairs:
            layer = max(busy.get(c, 0), busy.get(t, 0)) + 1
            busy[c] = busy[t] = layer
            depth = max(depth, layer)
        return depth


def parse_bits(text: str) -> np.ndarray:
    text = text.strip()
    if not text or set(text) - {"0", "1"}:
        raise InvalidInput(f"not a 0/1 string: {text!r}")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def format_bits(bits: Iterable[int]) -> str:
    return "".join(str(int(b)) for b in np.ravel(bits))


def generator_matrix(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    G = _G2
    for _ in range(n - 1):
        G = np.kron(G, _G2)
    return G.astype(np.uint8)


def polar_transform(bits) -> np.ndarray:
    """Butterfly evaluation of ``bits @ G_N`` along the last axis (batched)."""
    x = np.array(bits, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    h = 1
    while h < N:
        v = x.reshape(x.shape[:-1] + (N // (2 * h), 2, h))
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def _check_vector(code: PolarCode, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (code.N,):
        raise InvalidInput(f"expected a length-{code.N} bit vector, got shape {v.shape}")
    if np.any((v != 0) & (v != 1)):
        raise InvalidInput("bit vector contains values other than 0/1")
    return v.astype(np.uint8)


def polar_encode(code: PolarCode, u) -> np.ndarray:
    u = _check_vector(code, u)
    if np.any(u[list(code.frozen_set)]):
        raise InvalidInput("nonzero bit at a frozen position")
    return polar_transform(u)


def polar_invert(code: PolarCode, x) -> np.ndarray:
    return polar_transform(_check_vector(code, x))


def embed_info(code: PolarCode, info) -> np.ndarray:
    """Place information bits (last axis length K) on the information set."""
    info = np.asarray(info, dtype=np.uint8)
    u = np.zeros(info.shape[:-1] + (code.N,), dtype=np.uint8)
    u[..., list(code.info_set)] = info
    return u


def info_patterns(num_bits: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All 0/1 patterns of ``num_bits`` in lexicographic order, first bit most significant."""
    if num_bits > cap:
        raise ResourceLimit(f"enumerating 2^{num_bits} patterns exceeds the cap 2^{cap}")
    if num_bits == 0:
        return np.zeros((1, 0), dtype=np.uint8)
    ints = np.arange(1 << num_bits, dtype=np.int64)
    shifts = np.arange(num_bits - 1, -1, -1)
    return ((ints[:, None] >> shifts) & 1).astype(np.uint8)


def enumerate_valid_codewords(code: PolarCode, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All ``2^K`` codewords as rows, ordered by information-bit pattern."""
    if code.K > cap:
        raise ResourceLimit(f"K = {code.K} exceeds the enumeration cap {cap}")
    return polar_transform(embed_info(code, info_patterns(code.K, cap)))


def cnot_schedule(code: PolarCode) -> CnotSchedule:
    """CNOT pairs (control, target) reproducing ``u @ G_N`` in place.

    Stage s pairs positions ``j`` and ``j + 2^s`` inside blocks of size
    ``2^(s+1)``; the upper position is XORed into the lower one.
    """
    pairs = []
    h = 1
    while h < code.N:
        for start in range(0, code.N, 2 * h):
            for j in range(start, start + h):
                pairs.append((j + h, j))
        h *= 2
    return CnotSchedule(tuple(pairs))


def frozen_from_text(text: str | Sequence[int]) -> tuple[int, ...]:
    if isinstance(text, str):
        text = text.strip()
        return tuple(int(t) for t in text.split(",") if t.strip()) if text else ()
    return tuple(int(t) for t in text)
