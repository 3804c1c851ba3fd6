"""Exhaustive classical decoders used as ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, ResourceLimit
from .instance import ProblemInstance
from .objective import MultilinearPolynomial
from .polar import ENUMERATION_CAP, PolarCode, info_patterns

KASI_BRUTEFORCE_CAP = 20


@dataclass
class MLResult:
    info_bits: np.ndarray  # (t, M, K), lexicographic by flattened info pattern
    codewords: np.ndarray  # (t, M, N)
    value: float

    @property
    def representative(self) -> np.ndarray:
        return self.info_bits[0]

    @property
    def num_ties(self) -> int:
        return len(self.info_bits)

    def contains(self, info) -> bool:
        info = np.asarray(info, dtype=np.uint8)
        return bool(np.any(np.all(self.info_bits == info, axis=(1, 2))))


def all_info_blocks(instance: ProblemInstance, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Every information block (2^(MK), M, K), level 0 first, lexicographic."""
    M, K = instance.M, instance.code.K
    return info_patterns(M * K, cap).reshape(-1, M, K)


def ml_decode_bruteforce(instance: ProblemInstance, cap: int = ENUMERATION_CAP,
                         rtol: float = 0.0) -> MLResult:
    """Minimize ``sum_i |y_i - S(z_i)|^2`` over all valid codeword combinations.

    Distances are computed literally from the Gray-PAM map, not from any
    polynomial expansion.
    """
    if instance.num_info_bits > cap:
        raise ResourceLimit(f"MK = {instance.num_info_bits} exceeds the enumeration cap {cap}")
    info = all_info_blocks(instance, cap)
    b = instance.channel_bits(info)
    d = np.sum((instance.y - instance.modulate(b)) ** 2, axis=-1)
    best = float(d.min())
    sel = d <= best + rtol * abs(best)
    return MLResult(info[sel], instance.codewords(info[sel]), best)


@dataclass
class BruteForceResult:
    assignments: np.ndarray  # (t, num_vars)
    value: float


def kasi_bruteforce_min(poly: MultilinearPolynomial, cap: int = KASI_BRUTEFORCE_CAP,
                        atol: float = 1e-9) -> BruteForceResult:
    if poly.num_vars > cap:
        raise ResourceLimit(f"{poly.num_vars} variables exceed the brute-force cap {cap}")
    X = info_patterns(poly.num_vars, cap)
    vals = poly.evaluate_many(X)
    best = float(vals.min())
    return BruteForceResult(X[vals <= best + atol], best)


def search_space_report(code: PolarCode, M: int, formulation: str) -> int:
    """Exponent of the search-space size for the proposed or conventional formulation."""
    if formulation == "proposed":
        return M * code.K
    if formulation == "conventional":
        return M * code.N * (code.n + 1)
    raise InvalidParameter(f"formulation must be 'proposed' or 'conventional', got {formulation!r}")
