"""
Grover adaptive search over the valid-codeword superposition.

The loop keeps an incumbent assignment and its quantized objective value
``c`` (an integer at scale ``2^f``). Each round draws a rotation count from
``{0, ..., ceil(k - 1)}``, measures the key register after that many Grover
operators, and re-evaluates the measured assignment classically. ``k`` resets
to 1 on improvement and otherwise grows by ``lambda`` up to ``sqrt(2^(MK))``.

Two measurement backends exist: ``statevector`` runs the gate-level circuit,
``analytic`` samples the closed-form amplitude-amplification distribution
over the enumerated valid assignments.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .baselines import all_info_blocks
from .errors import ConfigurationError, InvalidParameter
from .instance import ProblemInstance
from .objective import (
    DEFAULT_SCALE_BITS,
    QuantizedObjective,
    ValueRegisterSpec,
    bpsk_simplified_objective,
    gray_hubo_objective,
    natural_qubo_objective,
    threshold_register_spec,
)
from .polar import ENUMERATION_CAP
from .statevector import (
    Circuit,
    RegisterLayout,
    StateVector,
    dictionary_circuit,
    grover_operator,
    measure_all,
    prepare_initial_circuit,
)

log = logging.getLogger(__name__)

BACKENDS = ("analytic", "statevector")
FORMULATIONS = ("auto", "linear", "qubo", "hubo")


@dataclass
class GasConfig:
    lam: float = 8 / 7
    backend: str = "analytic"
    max_classical_iterations: int | None = None  # None: 10 * sqrt(2^(MK))
    patience: int = 30
    m: int | None = None  # None: smallest register covering any threshold
    scale_bits: int = DEFAULT_SCALE_BITS
    formulation: str = "auto"

    def __post_init__(self):
        if not self.lam > 1:
            raise ConfigurationError(f"lambda must exceed 1, got {self.lam}")
        if self.patience < 1:
            raise ConfigurationError(f"patience must be >= 1, got {self.patience}")
        if self.backend not in BACKENDS:
            raise ConfigurationError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.formulation not in FORMULATIONS:
            raise ConfigurationError(f"formulation must be one of {FORMULATIONS}, got {self.formulation!r}")


@dataclass
class Iteration:
    L: int
    x: np.ndarray
    E: int
    improved: bool


@dataclass
class GasRun:
    i: int = 0
    k: float = 1.0
    c: int = 0
    x: np.ndarray | None = None
    c0: int = 0
    history: list[Iteration] = field(default_factory=list)
    thresholds: list[int] = field(default_factory=list)
    ks: list[float] = field(default_factory=list)


@dataclass
class ComplexityReport:
    cd: int
    qd: int
    reached_optimum: bool
    optimum_iteration: int | None
    qd_at_optimum: int | None


@dataclass
class GasResult:
    key_bits: np.ndarray
    codewords: np.ndarray  # (M, N)
    info_bits: np.ndarray  # (M, K)
    value: int  # quantized objective of the final incumbent
    report: ComplexityReport
    run: GasRun

    def to_record(self, **extra) -> dict:
        rec = dict(extra)
        rec.update({
            "decoded_bits": "".join(str(int(b)) for b in self.info_bits.ravel()),
            "cd": self.report.cd,
            "qd": self.report.qd,
            "iterations": [{"L": it.L, "E": it.E} for it in self.run.history],
        })
        return rec


class GasProblem:
    """Objective, register sizing and valid-assignment table for one instance."""

    def __init__(self, instance: ProblemInstance, config: GasConfig | None = None):
        self.instance = instance
        self.config = config = config or GasConfig()
        M = instance.M
        form = config.formulation
        if form == "auto":
            form = "linear" if M == 1 else "qubo"
        if form == "linear" and M != 1:
            raise ConfigurationError("the linear objective applies to BPSK only")
        self.formulation = form
        self.differential = form == "qubo" and M > 1
        if form == "linear":
            self.poly = bpsk_simplified_objective(instance.y)
        elif form == "qubo":
            self.poly = natural_qubo_objective(instance.y, M)
        else:
            self.poly = gray_hubo_objective(instance.y, M)
        self.objective = QuantizedObjective(self.poly, config.scale_bits)
        self.num_states = 2 ** instance.num_info_bits
        self.k_cap = math.sqrt(self.num_states)
        lo, hi = self.objective.bounds()
        if config.m is None:
            self.register = threshold_register_spec(self.poly, config.scale_bits)
        else:
            self.register = ValueRegisterSpec(config.m, config.scale_bits)
            if not self.register.fits(lo - hi, hi - lo):
                raise ConfigurationError(
                    f"m = {config.m} cannot hold E_q - c_q over [{lo - hi}, {hi - lo}]")
        self._valid = None

    @property
    def n_key(self) -> int:
        return self.instance.num_bits

    def keys_from_info(self, info) -> np.ndarray:
        return self.instance.key_from_channel_bits(self.instance.channel_bits(info), self.differential)

    def valid_table(self, cap: int = ENUMERATION_CAP) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(info blocks, key assignments, quantized values) over all valid codewords."""
        if self._valid is None:
            info = all_info_blocks(self.instance, cap)
            keys = self.keys_from_info(info)
            self._valid = (info, keys, self.objective.evaluate_many(keys))
        return self._valid

    def decode(self, key) -> tuple[np.ndarray, np.ndarray]:
        return self.instance.decode_key(key, self.differential)


def modified_uniform_sample(problem: GasProblem, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Uniform draw over valid codewords only: random info bits, encoded and mapped to the key layout."""
    inst = problem.instance
    info = rng.integers(0, 2, size=(inst.M, inst.code.K), dtype=np.uint8)
    key = problem.keys_from_info(info)
    return key, problem.objective.evaluate(key)


def sample_rotation_count(k: float, rng: np.random.Generator) -> int:
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    return int(rng.integers(0, math.ceil(k - 1) + 1))


def optimal_iterations(search_space_size: int) -> int:
    if search_space_size < 1:
        raise InvalidParameter("search space size must be >= 1")
    return int(math.floor(math.pi / 4 * math.sqrt(search_space_size)))


def success_probability(t: int, S: int, L: int) -> float:
    """``sin^2((2L + 1) asin(sqrt(t / S)))``."""
    return math.sin((2 * L + 1) * math.asin(math.sqrt(t / S))) ** 2


def analytic_measure(problem: GasProblem, c: int, L: int, rng: np.random.Generator) -> np.ndarray:
    """Key assignment distributed as a measurement after ``L`` Grover operators at threshold ``c``."""
    _, keys, values = problem.valid_table()
    marked = np.flatnonzero(values < c)
    S, t = len(values), len(marked)
    if t == 0:
        return keys[rng.integers(S)].copy()
    if rng.random() < success_probability(t, S, L) or t == S:
        return keys[marked[rng.integers(t)]].copy()
    unmarked = np.flatnonzero(values >= c)
    return keys[unmarked[rng.integers(len(unmarked))]].copy()


class AnalyticBackend:
    def __init__(self, problem: GasProblem):
        self.problem = problem
        problem.valid_table()
        self.grover_applications = 0

    def measure(self, c: int, L: int, rng: np.random.Generator) -> np.ndarray:
        self.grover_applications += L
        return analytic_measure(self.problem, c, L, rng)


class StatevectorBackend:
    """Gate-level backend; counts every Grover operator it applies."""

    def __init__(self, problem: GasProblem):
        self.problem = problem
        inst = problem.instance
        self.layout = RegisterLayout.contiguous(problem.n_key, problem.register.m)
        self.prep = prepare_initial_circuit(inst.code, inst.M, problem.differential,
                                            inst.interleaver, q=self.layout.q)
        StateVector(self.layout.q)  # fail early on the qubit cap
        self.grover_applications = 0
        self._cache: dict[int, tuple[Circuit, Circuit]] = {}

    def circuits(self, c: int) -> tuple[Circuit, Circuit]:
        if c not in self._cache:
            reg = self.problem.register
            dic = dictionary_circuit(self.problem.objective, c / 2.0**reg.scale_bits, reg, self.layout)
            A = self.prep + dic
            self._cache = {c: (A, grover_operator(A, self.layout))}
        return self._cache[c]

    def state(self, c: int, L: int) -> StateVector:
        A, G = self.circuits(c)
        psi = StateVector(self.layout.q).run(A)
        for _ in range(L):
            psi.run(G)
            self.grover_applications += 1
        return psi

    def measure(self, c: int, L: int, rng: np.random.Generator) -> np.ndarray:
        return measure_all(self.state(c, L), rng, self.layout).key_bits


def make_backend(problem: GasProblem):
    if problem.config.backend == "statevector":
        return StatevectorBackend(problem)
    return AnalyticBackend(problem)


def _optimum_keys(problem: GasProblem, optimum) -> set[tuple[int, ...]] | None:
    if optimum is None:
        if problem.instance.num_info_bits > ENUMERATION_CAP:
            return None
        _, keys, values = problem.valid_table()
        optimum_keys = keys[values == values.min()]
    else:
        optimum_keys = problem.keys_from_info(np.asarray(optimum, dtype=np.uint8))
    return {tuple(int(b) for b in row) for row in np.atleast_2d(optimum_keys)}


def gas_decode(instance: ProblemInstance, config: GasConfig | None = None,
               rng: np.random.Generator | None = None, optimum: Iterable | None = None,
               backend=None) -> GasResult:
    """Run the adaptive-threshold loop and map the incumbent back to information bits.

    ``optimum`` optionally lists the information blocks counted as optimal
    (e.g. a brute-force ML argmin); by default the argmin of the quantized
    objective over valid codewords is used.
    """
    config = config or GasConfig()
    rng = rng if rng is not None else np.random.default_rng()
    problem = backend.problem if backend is not None else GasProblem(instance, config)
    backend = backend or make_backend(problem)
    opt = _optimum_keys(problem, optimum)
    cap = problem.k_cap
    max_iter = config.max_classical_iterations
    if max_iter is None:
        max_iter = int(math.ceil(10 * cap))

    x, c = modified_uniform_sample(problem, rng)
    run = GasRun(c=c, x=x, c0=c, thresholds=[c])
    qd = 0
    opt_iter = opt_qd = None
    if opt is not None and tuple(int(b) for b in x) in opt:
        opt_iter, opt_qd = 0, 0
    stale = 0
    while run.i < max_iter and not (run.k >= cap and stale >= config.patience):
        saturated = run.k >= cap
        L = sample_rotation_count(run.k, rng)
        xm = backend.measure(run.c, L, rng)
        e = problem.objective.evaluate(xm)
        qd += L
        run.i += 1
        improved = e < run.c
        if improved:
            run.x, run.c, run.k, stale = xm, e, 1.0, 0
        else:
            run.k = min(config.lam * run.k, cap)
            stale = stale + 1 if saturated else 0
        run.history.append(Iteration(L, xm, e, improved))
        run.thresholds.append(run.c)
        run.ks.append(run.k)
        if opt_iter is None and opt is not None and improved and tuple(int(b) for b in run.x) in opt:
            opt_iter, opt_qd = run.i, qd

    codewords, info = problem.decode(run.x)
    report = ComplexityReport(run.i, qd, opt_iter is not None, opt_iter, opt_qd)
    log.debug("gas finished: cd=%d qd=%d c=%d", run.i, qd, run.c)
    return GasResult(run.x, codewords, info, run.c, report, run)
