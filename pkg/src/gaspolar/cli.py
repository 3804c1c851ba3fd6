"""Command-line interface: ``gaspolar <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .baselines import kasi_bruteforce_min, ml_decode_bruteforce, search_space_report
from .errors import GasPolarError, InvalidInput
from .gas import GasConfig, GasProblem, gas_decode, modified_uniform_sample
from .instance import ProblemInstance, random_info, transmit
from .modem import ChannelModel, ModulationScheme
from .objective import ValueRegisterSpec, kasi_layout, kasi_qubo, threshold_register_spec
from .polar import PolarCode, embed_info, format_bits, frozen_from_text, parse_bits, polar_encode
from .statevector import verify_dictionary


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="TOML experiment file")
    p.add_argument("--scenario", choices=sorted(ex.SCENARIOS), help="preset code/modulation/SNR")
    p.add_argument("--n", type=int, help="code length N")
    p.add_argument("--k", type=int, help="information length K")
    p.add_argument("--frozen", help="comma-separated frozen indices")
    p.add_argument("--mod", default=None, help="bpsk, pam4, pam16 or pam2^M (default bpsk)")
    p.add_argument("--snr-db", type=float, nargs="+", help="SNR point(s) in dB (Es/N0)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--backend", choices=("analytic", "statevector"))
    p.add_argument("--m", type=int, help="value-register qubits")
    p.add_argument("--scale-bits", type=int, help="fixed-point fractional bits f")
    p.add_argument("--formulation", choices=("auto", "linear", "qubo", "hubo"))
    p.add_argument("--patience", type=int)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--records", help="write per-run JSON records (JSON lines) here")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaspolar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    sub.add_parser("encode", parents=[common], help="0/1 lines on stdin (u of length N or K info bits) -> codewords")
    sub.add_parser("ml-decode", parents=[common], help="received CSV rows on stdin -> exhaustive ML decision")
    sub.add_parser("gas-decode", parents=[common], help="received CSV rows on stdin -> GAS decision as JSON")
    sub.add_parser("bler", parents=[common], help="paired BLER sweep, CSV output")
    sub.add_parser("cdf", parents=[common], help="iterations-to-optimum per trial, CSV output")
    sub.add_parser("dict-verify", parents=[common], help="exhaustive quantum-dictionary check")
    sub.add_parser("baseline-kasi", parents=[common], help="build and brute-force the constraint QUBO")
    rep = sub.add_parser("report", parents=[common], help="summarize a bler/cdf CSV and render its figure")
    rep.add_argument("csv")
    rep.add_argument("--no-plot", action="store_true")
    return parser


def _gas_config(args, base: GasConfig | None = None) -> GasConfig:
    base = base or GasConfig()
    kw = dict(lam=base.lam, backend=base.backend, max_classical_iterations=base.max_classical_iterations,
              patience=base.patience, m=base.m, scale_bits=base.scale_bits, formulation=base.formulation)
    for attr, key in (("backend", "backend"), ("m", "m"), ("scale_bits", "scale_bits"),
                      ("formulation", "formulation"), ("patience", "patience")):
        if getattr(args, attr) is not None:
            kw[key] = getattr(args, attr)
    return GasConfig(**kw)


def _experiment(args) -> ex.ExperimentConfig:
    if args.config:
        cfg = ex.load_config(args.config, trials=args.trials, master_seed=args.seed,
                             snr_db=args.snr_db, out=args.out)
        if args.mod:
            cfg.modulation = ModulationScheme.from_name(args.mod)
        cfg.gas = _gas_config(args, cfg.gas)
        return cfg
    code, mod, snr = _code_and_mod(args)
    return ex.ExperimentConfig(
        code=code, modulation=mod,
        snr_db=args.snr_db or ([snr] if snr is not None else []),
        trials=args.trials if args.trials is not None else 1000,
        master_seed=args.seed if args.seed is not None else 0,
        gas=_gas_config(args), out=args.out,
    )


def _code_and_mod(args) -> tuple[PolarCode, ModulationScheme, float | None]:
    if args.config:
        cfg = ex.load_config(args.config)
        return cfg.code, ModulationScheme.from_name(args.mod) if args.mod else cfg.modulation, cfg.snr_db[0]
    if args.scenario:
        code, M, snr = ex.SCENARIOS[args.scenario]
        return code, ModulationScheme.from_name(args.mod) if args.mod else ModulationScheme(M), snr
    if args.n is None or args.k is None or args.frozen is None:
        raise InvalidInput("give --n, --k and --frozen (or --config / --scenario)")
    return (PolarCode(args.n, args.k, frozen_from_text(args.frozen)),
            ModulationScheme.from_name(args.mod or "bpsk"), None)


def _read_rows(stream) -> list[np.ndarray]:
    rows = []
    for line in stream:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append(np.array([float(v) for v in line.split(",")]))
        except ValueError:
            raise InvalidInput(f"not a CSV row of reals: {line!r}") from None
    return rows


def cmd_encode(args, out) -> int:
    code, _, _ = _code_and_mod(args)
    for line in sys.stdin:
        if not line.strip():
            continue
        bits = parse_bits(line)
        if len(bits) == code.N:
            u = bits
        elif len(bits) == code.K:
            u = embed_info(code, bits)
        else:
            raise InvalidInput(f"expected {code.N} or {code.K} bits, got {len(bits)}")
        out.write(format_bits(polar_encode(code, u)) + "\n")
    return 0


def cmd_ml_decode(args, out) -> int:
    code, mod, _ = _code_and_mod(args)
    for y in _read_rows(sys.stdin):
        res = ml_decode_bruteforce(ProblemInstance(code, mod, y))
        out.write(f"codeword={format_bits(res.codewords[0])} info={format_bits(res.representative)} "
                  f"E={res.value:.6g} ties={res.num_ties}\n")
    return 0


def cmd_gas_decode(args, out) -> int:
    code, mod, _ = _code_and_mod(args)
    cfg = _gas_config(args)
    master = args.seed if args.seed is not None else 0
    for row, y in enumerate(_read_rows(sys.stdin)):
        inst = ProblemInstance(code, mod, y)
        seed = ex.trial_seed(master, row)
        res = gas_decode(inst, cfg, np.random.default_rng(seed))
        ml = ml_decode_bruteforce(inst)
        rec = res.to_record(seed=seed, snr_db=None, code=code.to_dict(), modulation=mod.name,
                            backend=cfg.backend, ml_match=ml.contains(res.info_bits))
        out.write(json.dumps(rec) + "\n")
    return 0


def _write_records(path, records) -> None:
    if path:
        with open(path, "w") as fh:
            for r in records:
                fh.write(json.dumps(r) + "\n")


def cmd_bler(args, out) -> int:
    cfg = _experiment(args)
    records = [] if args.records else None
    points = ex.run_bler(cfg, records)
    text = ex.bler_csv(points)
    ex.write_outputs(text, cfg.out, ex.manifest(cfg, "bler", ml_mismatches=sum(p.ml_mismatches for p in points)))
    _write_records(args.records, records or [])
    return 0


def cmd_cdf(args, out) -> int:
    cfg = _experiment(args)
    records = [] if args.records else None
    rec = ex.run_cdf(cfg, records)
    meta = ex.manifest(cfg, "cdf", resolved=rec.resolved, censored=sum(rec.censored),
                       median_qd=rec.median("qd"), median_cd=rec.median("cd"))
    ex.write_outputs(ex.cdf_csv(rec), cfg.out, meta)
    _write_records(args.records, records or [])
    return 0


def _auto_scale_bits(problem_poly, m: int, f_max: int = 8) -> int:
    for f in range(f_max, -1, -1):
        if threshold_register_spec(problem_poly, f).m <= m:
            return f
    raise InvalidInput(f"no scale in 0..{f_max} fits the objective into {m} value qubits")


def cmd_dict_verify(args, out) -> int:
    code, mod, snr = _code_and_mod(args)
    seed = args.seed if args.seed is not None else 0
    snr = args.snr_db[0] if args.snr_db else (snr if snr is not None else 5.0)
    rng = np.random.default_rng(seed)
    inst = transmit(code, mod, random_info(code, mod, rng), ChannelModel(snr), rng)
    cfg = _gas_config(args)
    if args.m is not None and args.scale_bits is None:
        probe = GasProblem(inst, GasConfig(formulation=cfg.formulation, scale_bits=0))
        cfg.scale_bits = _auto_scale_bits(probe.poly, args.m)
    problem = GasProblem(inst, cfg)
    _, c = modified_uniform_sample(problem, rng)
    spec = ValueRegisterSpec(problem.register.m, cfg.scale_bits)
    passed, total = verify_dictionary(problem.objective, c / 2.0**spec.scale_bits, spec)
    status = "OK" if passed == total else "FAIL"
    out.write(f"{status} {passed}/{total} basis states (m={spec.m}, f={spec.scale_bits}, c_q={c})\n")
    return 0 if passed == total else 1


def cmd_baseline_kasi(args, out) -> int:
    code, mod, _ = _code_and_mod(args)
    if mod.M != 1:
        raise InvalidInput("the constraint QUBO baseline is defined for BPSK only")
    seed = args.seed if args.seed is not None else 0
    rng = np.random.default_rng(seed)
    info = random_info(code, mod, rng)
    snr = args.snr_db[0] if args.snr_db else float("inf")
    inst = transmit(code, mod, info, ChannelModel(snr), rng)
    poly = kasi_qubo(code, inst.y)
    res = kasi_bruteforce_min(poly)
    lay = kasi_layout(code)
    sent = inst.codewords(info)[0]
    layers = {format_bits(a[list(lay.outputs)]) for a in res.assignments}
    out.write(f"variables={poly.num_vars} search_space=2^{search_space_report(code, 1, 'conventional')} "
              f"proposed=2^{search_space_report(code, 1, 'proposed')}\n")
    out.write(f"sent={format_bits(sent)} minimizers={len(res.assignments)} E_min={res.value:.6g} "
              f"codeword_layers={','.join(sorted(layers))}\n")
    match = layers == {format_bits(sent)}
    out.write("MATCH\n" if match else "MISMATCH\n")
    return 0


def cmd_report(args, out) -> int:
    rows = ex.read_csv(args.csv)
    if not rows:
        raise InvalidInput(f"{args.csv} has no data rows")
    cols = tuple(rows[0].keys())
    png = Path(args.csv).with_suffix(".png")
    if cols == ex.BLER_COLUMNS:
        out.write(f"{'SNR [dB]':>9} {'trials':>7} {'BLER ML':>10} {'BLER GAS':>10}  95% CI (ML)\n")
        for r in rows:
            out.write(f"{float(r['snr_db']):>9.3g} {int(r['trials']):>7d} {float(r['bler_ml']):>10.4g} "
                      f"{float(r['bler_gas']):>10.4g}  [{float(r['ci_low']):.4g}, {float(r['ci_high']):.4g}]\n")
        inside = sum(float(r["ci_low"]) <= float(r["bler_gas"]) <= float(r["ci_high"]) for r in rows)
        out.write(f"GAS BLER inside the ML interval at {inside}/{len(rows)} points\n")
        plot = "plot_bler"
    elif cols == ex.CDF_COLUMNS:
        resolved = [r for r in rows if r["censored"] == "0"]
        qd = np.array([float(r["qd_at_opt"]) for r in resolved])
        cd = np.array([float(r["cd_at_opt"]) for r in resolved])
        out.write(f"trials={len(rows)} resolved={len(resolved)} censored={len(rows) - len(resolved)}\n")
        if len(resolved):
            for name, v in (("QD", qd), ("CD", cd)):
                out.write(f"{name} at optimum: median={np.median(v):.4g} mean={v.mean():.4g} "
                          f"p90={np.percentile(v, 90):.4g} max={v.max():.4g}\n")
        plot = "plot_cdf"
    else:
        raise InvalidInput(f"{args.csv}: unrecognized columns {cols}")
    if not args.no_plot:
        from . import plotting

        getattr(plotting, plot)(rows, png)
        out.write(f"figure: {png}\n")
    return 0


COMMANDS = {
    "encode": cmd_encode,
    "ml-decode": cmd_ml_decode,
    "gas-decode": cmd_gas_decode,
    "bler": cmd_bler,
    "cdf": cmd_cdf,
    "dict-verify": cmd_dict_verify,
    "baseline-kasi": cmd_baseline_kasi,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args, sys.stdout)
    except (GasPolarError, OSError) as exc:
        print(f"gaspolar {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
