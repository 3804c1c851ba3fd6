"""
Batch experiments: paired BLER comparison and iterations-to-optimum CDFs.

Seeding rule: every trial gets ``trial_seed(master, point, trial)``, drawn
from ``SeedSequence([master, point, trial])``. The trial's generator draws
the information bits and noise first, then the GAS randomness, so the
classical and quantum decoders always see the same channel output.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .baselines import ml_decode_bruteforce, search_space_report
from .errors import ConfigurationError
from .gas import GasConfig, gas_decode
from .instance import random_info, transmit
from .modem import ChannelModel, ModulationScheme
from .polar import PolarCode

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

BLER_COLUMNS = ("snr_db", "trials", "errors_ml", "errors_gas", "bler_ml", "bler_gas", "ci_low", "ci_high")
CDF_COLUMNS = ("trial", "seed", "cd_at_opt", "qd_at_opt", "censored")

SCENARIOS = {
    "bpsk16": (PolarCode(16, 8, (0, 1, 2, 3, 4, 5, 6, 8)), 1, 5.0),
    "pam4-8": (PolarCode(8, 4, (0, 1, 2, 4)), 2, 12.0),
    "pam16-4": (PolarCode(4, 2, (0, 2)), 4, 25.0),
}


@dataclass
class ExperimentConfig:
    code: PolarCode
    modulation: ModulationScheme
    snr_db: list[float]
    trials: int = 1000
    master_seed: int = 0
    gas: GasConfig = field(default_factory=GasConfig)
    interleaver: tuple[int, ...] | None = None
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if not self.snr_db:
            raise ConfigurationError("at least one SNR point is required")
        self.snr_db = [float(s) for s in self.snr_db]

    def to_dict(self) -> dict:
        return {
            "code": self.code.to_dict(),
            "modulation": self.modulation.name,
            "snr_db": self.snr_db,
            "trials": self.trials,
            "seed": self.master_seed,
            "interleaver": None if self.interleaver is None else list(self.interleaver),
            "gas": asdict(self.gas),
        }

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def load_config(path: str | os.PathLike, **overrides) -> ExperimentConfig:
    """Read a TOML experiment file; keyword overrides win over file values when not None."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    try:
        code = PolarCode.from_dict(doc["code"])
        mod_doc = doc.get("modulation", {})
        modulation = ModulationScheme.from_name(mod_doc.get("name", "bpsk"))
        run = doc.get("run", {})
        g = dict(doc.get("gas", {}))
    except KeyError as exc:
        raise ConfigurationError(f"{path}: missing key {exc}") from None
    gas_kwargs = {
        "lam": g.pop("lambda", 8 / 7),
        "backend": g.pop("backend", run.get("backend", "analytic")),
    }
    for key in ("max_classical_iterations", "patience", "m", "scale_bits", "formulation"):
        if key in g:
            gas_kwargs[key] = g.pop(key)
    if g:
        raise ConfigurationError(f"{path}: unknown [gas] keys {sorted(g)}")
    snr = run.get("snr_db", [])
    cfg = dict(
        code=code,
        modulation=modulation,
        snr_db=list(snr) if isinstance(snr, list) else [snr],
        trials=run.get("trials", 1000),
        master_seed=run.get("seed", 0),
        gas=GasConfig(**gas_kwargs),
        interleaver=tuple(mod_doc["interleaver"]) if "interleaver" in mod_doc else None,
        out=run.get("out"),
    )
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    return ExperimentConfig(**cfg)


def trial_seed(master: int, trial: int, point: int = 0) -> int:
    return int(np.random.SeedSequence([master, point, trial]).generate_state(1, dtype=np.uint64)[0])


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GP_THREADS", "1")))
    except ValueError:
        return 1


# single trial

@dataclass
class TrialOutcome:
    trial: int
    seed: int
    error_ml: bool
    error_gas: bool
    ml_match: bool
    ties: int
    cd: int
    qd: int
    cd_at_opt: int | None
    qd_at_opt: int | None
    record: dict


def run_trial(config: ExperimentConfig, snr_db: float, trial: int, point: int = 0) -> TrialOutcome:
    seed = trial_seed(config.master_seed, trial, point)
    rng = np.random.default_rng(seed)
    info = random_info(config.code, config.modulation, rng)
    inst = transmit(config.code, config.modulation, info, ChannelModel(snr_db), rng, config.interleaver)
    ml = ml_decode_bruteforce(inst)
    res = gas_decode(inst, config.gas, rng, optimum=ml.info_bits)
    ml_match = ml.contains(res.info_bits)
    if not ml_match:
        log.warning("GAS missed the ML solution (seed=%d, snr=%g, trial=%d)", seed, snr_db, trial)
    if ml.num_ties > 1:
        log.info("ML tie of size %d (seed=%d)", ml.num_ties, seed)
    record = res.to_record(seed=seed, snr_db=snr_db, code=config.code.to_dict(),
                           modulation=config.modulation.name, backend=config.gas.backend,
                           ml_match=ml_match)
    return TrialOutcome(
        trial, seed,
        error_ml=not np.array_equal(ml.representative, info),
        error_gas=not np.array_equal(res.info_bits, info),
        ml_match=ml_match, ties=ml.num_ties,
        cd=res.report.cd, qd=res.report.qd,
        cd_at_opt=res.report.optimum_iteration, qd_at_opt=res.report.qd_at_optimum,
        record=record,
    )


def _run_chunk(args) -> list[TrialOutcome]:
    config, snr, trials, point = args
    return [run_trial(config, snr, t, point) for t in trials]


def run_trials(config: ExperimentConfig, snr_db: float, point: int = 0) -> list[TrialOutcome]:
    trials = list(range(config.trials))
    workers = min(worker_count(), len(trials))
    if workers == 1:
        out = _run_chunk((config, snr_db, trials, point))
    else:
        chunks = [(config, snr_db, trials[w::workers], point) for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            out = [o for part in pool.map(_run_chunk, chunks) for o in part]
    return sorted(out, key=lambda o: o.trial)


# BLER

@dataclass
class BlerPoint:
    snr_db: float
    trials: int
    block_errors_classical_ml: int
    block_errors_gas: int
    ml_mismatches: int = 0

    @property
    def bler_ml(self) -> float:
        return self.block_errors_classical_ml / self.trials

    @property
    def bler_gas(self) -> float:
        return self.block_errors_gas / self.trials

    def ci(self, level: float = 0.95) -> tuple[float, float]:
        """Clopper-Pearson interval for the classical ML block error rate."""
        ci = stats.binomtest(self.block_errors_classical_ml, self.trials).proportion_ci(level)
        return float(ci.low), float(ci.high)


def run_bler(config: ExperimentConfig, records: list | None = None) -> list[BlerPoint]:
    points = []
    for p, snr in enumerate(config.snr_db):
        outcomes = run_trials(config, snr, p)
        if records is not None:
            records.extend(o.record for o in outcomes)
        points.append(BlerPoint(
            snr, len(outcomes),
            sum(o.error_ml for o in outcomes),
            sum(o.error_gas for o in outcomes),
            sum(not o.ml_match for o in outcomes),
        ))
    return points


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def bler_csv(points: list[BlerPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BLER_COLUMNS)
    for pt in points:
        lo, hi = pt.ci()
        w.writerow([_fmt(pt.snr_db), pt.trials, pt.block_errors_classical_ml, pt.block_errors_gas,
                    _fmt(pt.bler_ml), _fmt(pt.bler_gas), _fmt(lo), _fmt(hi)])
    return buf.getvalue()


# CDF

@dataclass
class CdfRecord:
    trials: list[int]
    seeds: list[int]
    cd_at_optimum: list[int | None]
    qd_at_optimum: list[int | None]

    @property
    def censored(self) -> list[bool]:
        return [q is None for q in self.qd_at_optimum]

    @property
    def resolved(self) -> int:
        return sum(not c for c in self.censored)

    def cdf(self, which: str = "qd") -> tuple[np.ndarray, np.ndarray]:
        """Empirical CDF over all trials; censored trials never enter the numerator."""
        vals = self.qd_at_optimum if which == "qd" else self.cd_at_optimum
        return empirical_cdf([v for v in vals if v is not None], len(vals))

    def median(self, which: str = "qd") -> float:
        vals = self.qd_at_optimum if which == "qd" else self.cd_at_optimum
        return float(np.median([math.inf if v is None else v for v in vals]))


def empirical_cdf(values, total: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    values = np.sort(np.asarray(values, dtype=float))
    total = len(values) if total is None else total
    xs = np.unique(values)
    ys = np.searchsorted(values, xs, side="right") / max(total, 1)
    return xs, ys


def run_cdf(config: ExperimentConfig, records: list | None = None) -> CdfRecord:
    snr = config.snr_db[0]
    outcomes = run_trials(config, snr, 0)
    if records is not None:
        records.extend(o.record for o in outcomes)
    return CdfRecord([o.trial for o in outcomes], [o.seed for o in outcomes],
                     [o.cd_at_opt for o in outcomes], [o.qd_at_opt for o in outcomes])


def cdf_csv(rec: CdfRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CDF_COLUMNS)
    for t, s, cd, qd, cens in zip(rec.trials, rec.seeds, rec.cd_at_optimum, rec.qd_at_optimum, rec.censored):
        w.writerow([t, s, "" if cd is None else cd, "" if qd is None else qd, int(cens)])
    return buf.getvalue()


def manifest(config: ExperimentConfig, kind: str, **extra) -> dict:
    doc = {
        "tool": "gaspolar",
        "version": __version__,
        "kind": kind,
        "seed": config.master_seed,
        "config_hash": config.digest(),
        "config": config.to_dict(),
        "search_space_exponent": search_space_report(config.code, config.modulation.M, "proposed"),
        "conventional_search_space_exponent": search_space_report(config.code, config.modulation.M,
                                                                  "conventional"),
    }
    doc.update(extra)
    return doc


def write_outputs(text: str, out: str | None, meta: dict | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    if meta is not None:
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
