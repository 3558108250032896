"""Command-line front end.

Exit codes: 0 success, 1 usage or file-format error, 2 verification
failure, 3 search failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .composite import SicSearchError, entanglement_gap_experiment
from .ensembles import (
    Ensemble,
    achievable_fidelity,
    ensemble_map_of,
    maps_equal,
)
from .io import FileFormatError, read_ensemble, read_povm, write_ensemble
from .operators import random_rank_one_povm
from .optimization import (
    FiducialSearchConfig,
    MonteCarloConfig,
    PovmSearchConfig,
    accessible_fidelity_search,
    child_rng,
    consistent_with,
    find_fiducial,
    haar_average_fidelity,
    haar_integral_closed_form,
)
from .structured_states import PhiMap, is_prime, mub_construct, mub_ensemble, mub_residuals

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_SEARCH = 0, 1, 2, 3
MC_SIGMAS = 3.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunReport:
    command: str
    config: dict[str, Any]
    seed: int | None = None
    results: list[dict[str, Any]] = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"command": self.command, "config": self.config, "seed": self.seed,
                "results": self.results, "wall_time": self.wall_time}


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def workers_from_env() -> int:
    raw = os.environ.get("QLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"QLAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("QLAB_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def resolve_seed(seed: int | None, out) -> int:
    if seed is not None:
        return seed
    seed = int(np.random.SeedSequence().entropy) & (2 ** 64 - 1)
    print(f"seed: {seed} (generated)", file=out)
    return seed


def _dim_arg(value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dimension {value!r}") from None


# -- commands -----------------------------------------------------------------

def _verification_ensemble(d: int, seed: int, workers: int) -> tuple[str, Ensemble]:
    if d == 1:
        return "trivial", Ensemble(np.ones((1, 1)), [1.0])
    if is_prime(d):
        return "mub", mub_ensemble(mub_construct(d))
    res = find_fiducial(FiducialSearchConfig(d, seed=seed), workers=workers)
    if not res.success:
        raise SicSearchError(d, res.potential)
    return "sic", res.sic.ensemble


def _mc_check(report, target: float) -> bool:
    return consistent_with(report, target, MC_SIGMAS)


def cmd_quantumness(args, rep: RunReport, out) -> int:
    d = args.d
    if d < 1:
        raise UsageError("dimension must be >= 1")
    q = haar_integral_closed_form(d)
    rep.results.append({"quantity": "quantumness", "dim": d, "value": q})
    print(f"Q_{d} = 2/(d+1) = {q:.15g}", file=out)
    if not args.verify:
        return EXIT_OK

    seed = rep.seed = resolve_seed(args.seed, out)
    workers = workers_from_env()
    kind, ens = _verification_ensemble(d, seed, workers)
    mc = haar_average_fidelity(ens, MonteCarloConfig(args.samples, seed), workers=workers)
    mc_ok = _mc_check(mc, q)
    povm = random_rank_one_povm(d, d * d, child_rng(seed, 1 << 20))
    structured = achievable_fidelity(ens, povm).value
    structured_ok = abs(structured - q) < 1e-9
    rep.results.append({"check": "haar_average", "ensemble": kind, **mc.to_dict(),
                        "passed": mc_ok})
    rep.results.append({"check": "structured_ensemble_fidelity", "ensemble": kind,
                        "value": structured, "passed": structured_ok})
    print(f"Haar average over random von Neumann measurements ({kind} ensemble, "
          f"{args.samples} samples): {mc.value:.6f} +/- {mc.stderr:.2g} "
          f"[{'pass' if mc_ok else 'FAIL'} at {MC_SIGMAS:g} sigma]", file=out)
    print(f"{kind} ensemble achievable fidelity under a random rank-1 POVM: "
          f"{structured:.12f} [{'pass' if structured_ok else 'FAIL'}]", file=out)
    return EXIT_OK if mc_ok and structured_ok else EXIT_VERIFY


def cmd_sic(args, rep: RunReport, out) -> int:
    d = args.d
    if d < 2:
        raise UsageError("SIC search needs dimension >= 2")
    seed = rep.seed = resolve_seed(args.seed, out)
    cfg = FiducialSearchConfig(d, n_restarts=args.restarts, max_iters=args.max_iters, seed=seed)
    rep.config.update(restarts=args.restarts, max_iters=args.max_iters)
    res = find_fiducial(cfg, workers=workers_from_env())
    if not res.success:
        rep.results.append({"quantity": "fiducial_search", "success": False,
                            "best_potential": res.potential,
                            "best_overlap_residual": res.certificate.overlap_residual})
        print(f"fiducial search failed in d={d}: best frame potential {res.potential:.3g}, "
              f"overlap residual {res.certificate.overlap_residual:.3g}", file=out)
        return EXIT_SEARCH
    cert = res.certificate
    ens = res.sic.ensemble
    povm = random_rank_one_povm(d, d * d, child_rng(seed, 1 << 20))
    fid = achievable_fidelity(ens, povm).value
    rep.results.append({
        "quantity": "sic_certificate", "dim": d, "frame_potential": res.potential,
        "overlap_residual": cert.overlap_residual, "gram_rank": cert.gram_rank,
        "phi_map_residual": cert.map_residual, "passed": cert.passed,
        "fiducial": [[z.real, z.imag] for z in res.fiducial],
        "achievable_fidelity_random_povm": fid, "quantumness": 2 / (d + 1),
    })
    print(f"SIC in d={d}: frame potential {res.potential:.3g}", file=out)
    print(f"  max overlap residual   {cert.overlap_residual:.3g}", file=out)
    print(f"  Gram rank              {cert.gram_rank} / {d * d}", file=out)
    print(f"  Phi-map residual       {cert.map_residual:.3g}", file=out)
    print(f"  achievable fidelity    {fid:.12f} (2/(d+1) = {2 / (d + 1):.12f})", file=out)
    if args.out:
        write_ensemble(args.out, ens, fiducial=res.fiducial)
        print(f"  wrote {args.out}", file=out)
    return EXIT_OK if cert.passed and cert.map_equal else EXIT_VERIFY


def cmd_mub(args, rep: RunReport, out) -> int:
    d = args.d
    if not is_prime(d):
        raise UsageError(
            f"no MUB construction for d={d}: complete sets exist when d is a prime power "
            "but not for general d (e.g. d=6); this tool handles prime d only")
    mubs = mub_construct(d)
    ens = mub_ensemble(mubs)
    res = mub_residuals(mubs)
    cmp = maps_equal(ensemble_map_of(ens), PhiMap(d))
    ok = res.intra < 1e-10 and res.inter < 1e-10 and cmp.equal
    rep.results.append({"quantity": "mub", "dim": d, "n_states": ens.size,
                        "intra_residual": res.intra, "inter_residual": res.inter,
                        "phi_map_residual": cmp.residual, "passed": ok})
    print(f"MUBs in d={d}: {len(mubs.bases)} bases, {ens.size} states", file=out)
    print(f"  intra-basis residual   {res.intra:.3g}", file=out)
    print(f"  inter-basis residual   {res.inter:.3g}", file=out)
    print(f"  Phi-map residual       {cmp.residual:.3g}", file=out)
    if args.out:
        write_ensemble(args.out, ens)
        print(f"  wrote {args.out}", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_fidelity(args, rep: RunReport, out) -> int:
    ens = read_ensemble(args.ensemble)
    d = ens.dim
    q = haar_integral_closed_form(d)
    workers = workers_from_env()
    if args.povm:
        povm = read_povm(args.povm)
        if povm.dim != d:
            raise FileFormatError(f"{args.povm}: dim {povm.dim} does not match ensemble dim {d}")
        fr = achievable_fidelity(ens, povm)
        rep.results.append(fr.to_dict())
        print(f"achievable fidelity: {fr.value:.15g}", file=out)
        return EXIT_OK
    seed = rep.seed = resolve_seed(args.seed, out)
    if args.haar:
        fr = haar_average_fidelity(ens, MonteCarloConfig(args.samples, seed), workers=workers)
        ok = _mc_check(fr, q)
        rep.results.append({**fr.to_dict(), "passed": ok})
        print(f"Haar average fidelity: {fr.value:.6f} +/- {fr.stderr:.2g} "
              f"(2/(d+1) = {q:.6f}, {'pass' if ok else 'FAIL'} at {MC_SIGMAS:g} sigma)", file=out)
        return EXIT_OK if ok else EXIT_VERIFY
    cfg = PovmSearchConfig(n_outcomes=args.outcomes, n_restarts=args.restarts, seed=seed)
    res = accessible_fidelity_search(ens, cfg, workers=workers)
    rep.results.append(res.report.to_dict())
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["restart", "iter", "value"])
            writer.writerows((r, i, repr(v)) for r, i, v in res.trace_rows())
    ok = res.value >= q - 1e-6
    print(f"accessible fidelity (lower bound): {res.value:.12f} "
          f"[{'>=' if ok else '<'} 2/(d+1) = {q:.12f}]", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_gap(args, rep: RunReport, out) -> int:
    if args.d1 < 1 or args.d2 < 1:
        raise UsageError("dimensions must be >= 1")
    seed = rep.seed = resolve_seed(args.seed, out)
    r = entanglement_gap_experiment(args.d1, args.d2, PovmSearchConfig(seed=seed),
                                    workers=workers_from_env())
    rep.results.append(r.to_dict())
    print(f"composite space {args.d1} x {args.d2}", file=out)
    print(f"  product-state value      {r.product_value:.12f}", file=out)
    print(f"  composite quantumness    {r.composite_quantumness:.12f}", file=out)
    print(f"  gap                      {r.gap:.12f}" + (" (degenerate)" if r.degenerate else ""),
          file=out)
    print(f"  optimizer, product SIC   {r.optimizer_value:.12f}", file=out)
    print(f"  composite SIC fidelity   {r.composite_sic_fidelity:.12f}", file=out)
    print(f"  entangled SIC states     {r.entangled_states} of {(args.d1 * args.d2) ** 2}",
          file=out)
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qlab", description="Eavesdropping fidelities of quantum ensembles.")
    parser.add_argument("--json", action="store_true",
                        help="print the run report as JSON instead of text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantumness", help="print Q_d = 2/(d+1), optionally verify it")
    p.add_argument("d", type=_dim_arg)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_quantumness)

    p = sub.add_parser("sic", help="search and certify a SIC ensemble")
    p.add_argument("d", type=_dim_arg)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sic)

    p = sub.add_parser("mub", help="construct a complete set of MUBs (prime d)")
    p.add_argument("d", type=_dim_arg)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("fidelity", help="fidelities of an ensemble file")
    p.add_argument("ensemble")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--povm", help="rank-1 POVM file: achievable fidelity")
    mode.add_argument("--optimize", action="store_true", help="search the accessible fidelity")
    mode.add_argument("--haar", action="store_true", help="Haar-average fidelity")
    p.add_argument("--outcomes", type=int)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", help="CSV of per-restart ascent values")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("gap", help="product vs composite quantumness")
    p.add_argument("d1", type=_dim_arg)
    p.add_argument("d2", type=_dim_arg)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gap)
    return parser


def _positive(args, *names):
    for name in names:
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    config = {k: v for k, v in vars(args).items() if k not in ("func", "json", "command")}
    rep = RunReport(args.command, config)
    text_out = sys.stderr if args.json else sys.stdout
    start = time.perf_counter()
    try:
        _positive(args, "samples", "restarts", "max_iters", "outcomes")
        code = args.func(args, rep, text_out)
    except (UsageError, FileFormatError) as exc:
        print(f"qlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SicSearchError as exc:
        print(f"qlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    rep.wall_time = time.perf_counter() - start
    if args.json:
        json.dump(rep.to_dict(), sys.stdout, indent=1, default=_plain)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
