"""
Problem instances and the bit-level transmit chain.

Bits flow as

    info (M, K) -> u (M, N) -> codewords x (M, N) -> flat c (M*N, index s*N+i)
    -> interleaved b = c[perm] -> symbol i takes (b[i], b[N+i], ..., b[(M-1)N+i])

and the decoder's key register holds ``b``, or its per-symbol cumulative
XOR when the natural-labelling (quadratic) objective is used.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .modem import ChannelModel, ModulationScheme, awgn_transmit, binary_to_gray, gray_to_binary
from .polar import PolarCode, embed_info, polar_transform


def _symbols_view(flat: np.ndarray, M: int, N: int) -> np.ndarray:
    """(..., M*N) level-major bits -> (..., N, M) per-symbol bit patterns."""
    return np.swapaxes(flat.reshape(flat.shape[:-1] + (M, N)), -1, -2)


def _flat_from_symbols(z: np.ndarray) -> np.ndarray:
    N, M = z.shape[-2:]
    return np.swapaxes(z, -1, -2).reshape(z.shape[:-2] + (M * N,))


@dataclass(frozen=True)
class ProblemInstance:
    code: PolarCode
    modulation: ModulationScheme
    y: np.ndarray
    interleaver: tuple[int, ...] | None = None
    _inverse: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.shape != (self.code.N,):
            raise InvalidInput(f"received vector must have length {self.code.N}, got shape {y.shape}")
        object.__setattr__(self, "y", y)
        size = self.num_bits
        perm = tuple(range(size)) if self.interleaver is None else tuple(int(p) for p in self.interleaver)
        if sorted(perm) != list(range(size)):
            raise InvalidInput(f"interleaver is not a permutation of {size} positions")
        object.__setattr__(self, "interleaver", perm)
        inv = np.empty(size, dtype=np.int64)
        inv[list(perm)] = np.arange(size)
        object.__setattr__(self, "_inverse", inv)

    @property
    def M(self) -> int:
        return self.modulation.M

    @property
    def num_bits(self) -> int:
        return self.modulation.M * self.code.N

    @property
    def num_info_bits(self) -> int:
        return self.modulation.M * self.code.K

    def with_y(self, y) -> "ProblemInstance":
        return ProblemInstance(self.code, self.modulation, y, self.interleaver)

    # forward chain
    def codewords(self, info) -> np.ndarray:
        """Info bits (..., M, K) -> codewords (..., M, N)."""
        return polar_transform(embed_info(self.code, info))

    def interleave(self, c_flat) -> np.ndarray:
        return np.asarray(c_flat)[..., list(self.interleaver)]

    def deinterleave(self, b_flat) -> np.ndarray:
        return np.asarray(b_flat)[..., self._inverse]

    def channel_bits(self, info) -> np.ndarray:
        """Info bits (..., M, K) -> interleaved channel bits (..., M*N)."""
        x = self.codewords(info)
        return self.interleave(x.reshape(x.shape[:-2] + (self.num_bits,)))

    def symbol_patterns(self, b_flat) -> np.ndarray:
        return _symbols_view(np.asarray(b_flat), self.M, self.code.N)

    def modulate(self, b_flat) -> np.ndarray:
        return self.modulation.modulate(self.symbol_patterns(b_flat))

    def key_from_channel_bits(self, b_flat, differential: bool) -> np.ndarray:
        if not differential:
            return np.asarray(b_flat, dtype=np.uint8)
        return _flat_from_symbols(gray_to_binary(self.symbol_patterns(b_flat)))

    def channel_bits_from_key(self, key, differential: bool) -> np.ndarray:
        key = np.asarray(key, dtype=np.uint8)
        if not differential:
            return key
        return _flat_from_symbols(binary_to_gray(self.symbol_patterns(key)))

    # backward chain
    def decode_key(self, key, differential: bool) -> tuple[np.ndarray, np.ndarray]:
        """Key bits -> (codewords (M, N), info bits (M, K)) via G_N^-1 = G_N."""
        b = self.channel_bits_from_key(key, differential)
        x = self.deinterleave(b).reshape(b.shape[:-1] + (self.M, self.code.N))
        u = polar_transform(x)
        return x, u[..., list(self.code.info_set)]


def transmit(code: PolarCode, modulation: ModulationScheme, info, channel: ChannelModel,
             rng: np.random.Generator, interleaver=None) -> ProblemInstance:
    """Encode, interleave, modulate and pass through AWGN; returns the receiver's instance."""
    proto = ProblemInstance(code, modulation, np.zeros(code.N), interleaver)
    s = proto.modulate(proto.channel_bits(info))
    return proto.with_y(awgn_transmit(s, channel, rng))


def random_info(code: PolarCode, modulation: ModulationScheme, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=(modulation.M, code.K), dtype=np.uint8)
