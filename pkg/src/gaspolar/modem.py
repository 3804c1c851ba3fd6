"""BPSK / Gray-coded 2^M-PAM mapping, Gray<->natural bit transforms, AWGN."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidParameter


def scaling_factor(M: int) -> float:
    """Energy of the unnormalized levels {±1, ±3, ...}: ``(4^M - 1) / 3``."""
    if M < 1:
        raise InvalidParameter(f"M must be >= 1, got {M}")
    return (4**M - 1) / 3


def level_weights(M: int) -> np.ndarray:
    """Signed per-level weights ``2^(M-j-1) * (-1)^j``."""
    j = np.arange(M)
    return (2.0 ** (M - j - 1)) * (-1.0) ** j


@dataclass(frozen=True)
class ModulationScheme:
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise InvalidParameter(f"M must be >= 1, got {self.M}")

    @property
    def A(self) -> float:
        return scaling_factor(self.M)

    @property
    def name(self) -> str:
        return "bpsk" if self.M == 1 else f"pam{2 ** self.M}"

    @classmethod
    def from_name(cls, name: str) -> "ModulationScheme":
        name = name.strip().lower()
        if name == "bpsk":
            return cls(1)
        m = re.fullmatch(r"pam(?:2\^(\d+)|(\d+))", name)
        if m:
            if m.group(1) is not None:
                return cls(int(m.group(1)))
            levels = int(m.group(2))
            if levels >= 2 and levels & (levels - 1) == 0:
                return cls(levels.bit_length() - 1)
        raise InvalidParameter(f"unknown modulation {name!r}; use bpsk, pam4, pam16 or pam2^M")

    def modulate(self, z) -> np.ndarray:
        """Gray-PAM symbols for bit patterns on the last axis."""
        return gray_pam_map(z, self.A)


@dataclass(frozen=True)
class ChannelModel:
    """AWGN with symbol SNR ``Es/N0`` (``Es = 1``) and per-sample variance ``N0/2``."""

    snr_db: float

    @property
    def sigma2(self) -> float:
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return 10.0 ** (-self.snr_db / 10.0) / 2.0


def _bits_last_axis(z, M: int | None = None) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim == 0:
        raise InvalidInput("expected a bit pattern, got a scalar")
    if M is not None and z.shape[-1] != M:
        raise InvalidInput(f"expected {M} bits, got {z.shape[-1]}")
    return z.astype(np.int64)


def gray_pam_map(z, A: float | None = None) -> np.ndarray | float:
    """Gray-labelled PAM coordinate of the bit pattern(s) ``z`` (last axis = levels).

    Each term multiplies the antipodal values of all levels up to j, which
    makes neighbouring amplitudes differ in exactly one bit.
    """
    z = _bits_last_axis(z)
    M = z.shape[-1]
    A = scaling_factor(M) if A is None else A
    signs = np.cumprod(1 - 2 * z, axis=-1)
    out = (signs * level_weights(M)).sum(axis=-1) / math.sqrt(A)
    return float(out) if out.ndim == 0 else out


def natural_pam_map(z, A: float | None = None) -> np.ndarray | float:
    """PAM coordinate under natural labelling; each level enters linearly."""
    z = _bits_last_axis(z)
    M = z.shape[-1]
    A = scaling_factor(M) if A is None else A
    out = ((1 - 2 * z) * level_weights(M)).sum(axis=-1) / math.sqrt(A)
    return float(out) if out.ndim == 0 else out


def gray_to_binary(z) -> np.ndarray:
    """Cumulative XOR over levels: ``z'_s = z_0 ^ ... ^ z_s``."""
    z = _bits_last_axis(z)
    return (np.cumsum(z, axis=-1) & 1).astype(np.uint8)


def binary_to_gray(zp) -> np.ndarray:
    """Inverse of :func:`gray_to_binary`: ``z_0 = z'_0``, ``z_s = z'_{s-1} ^ z'_s``."""
    zp = _bits_last_axis(zp).astype(np.uint8)
    out = zp.copy()
    out[..., 1:] ^= zp[..., :-1]
    return out


def awgn_transmit(symbols, channel: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    s = np.asarray(symbols, dtype=float)
    sigma2 = channel.sigma2
    if sigma2 == 0.0:
        return s.copy()
    return s + rng.normal(0.0, math.sqrt(sigma2), size=s.shape)
