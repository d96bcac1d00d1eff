"""Command-line entry point: ``relaymec {solve,simulate,sweep,validate,baseline}``.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

from . import harness
from .errors import ConfigError, DomainError
from .perf import Decision, art_components
from .sim import SimConfig, Stage, run_simulation
from .solve import SolverConfig

MW = harness.MW


def _override(cfg: harness.ExperimentConfig, args) -> harness.ExperimentConfig:
    solver = cfg.solver
    if getattr(args, "delta", None) is not None or getattr(args, "k", None) is not None:
        solver = SolverConfig(
            args.delta if args.delta is not None else solver.delta,
            args.k if args.k is not None else solver.k_partitions,
            solver.power_unit,
        )
    sim = cfg.sim
    slots, seed, warmup = (getattr(args, n, None) for n in ("slots", "seed", "warmup"))
    if any(v is not None for v in (slots, seed, warmup)):
        base = sim or SimConfig()
        sim = SimConfig(
            slots if slots is not None else base.n_slots,
            seed if seed is not None else base.seed,
            warmup if warmup is not None else base.warmup_fraction,
        )
    schemes = cfg.schemes
    if getattr(args, "scheme", None):
        schemes = tuple(s.upper() for s in args.scheme)
        bad = [s for s in schemes if s not in harness.SCHEMES]
        if bad:
            raise ConfigError(f"unknown scheme(s) {bad}")
    return dataclasses.replace(cfg, solver=solver, sim=sim, schemes=schemes)


def _g(x, fmt=".6g"):
    return "inf" if isinstance(x, float) and math.isinf(x) else format(x, fmt)


def _print_solution(name, sol):
    if not sol.feasible:
        print(f"{name:14s} infeasible ({sol.reason})")
        return
    m = sol.metrics
    print(
        f"{name:14s} P*={sol.p_star / MW:.6f} mW  rho*={sol.rho_star:.6f}  "
        f"ART={_g(m.t)} slots  SAP={_g(m.sap / MW)} mW  ARE={_g(m.are / MW)} mW*slot  "
        f"evals={sol.evaluations}"
    )


def cmd_solve(cfg, args):
    for scheme in cfg.schemes:
        _print_solution(scheme, harness.solve_scheme(scheme, cfg.params, cfg.solver, cfg.oracle_step))
    return 0


def cmd_baseline(cfg, args):
    schemes = [s for s in cfg.schemes if s in ("ALLRS", "ALLHS")] or ["ALLRS", "ALLHS"]
    for scheme in schemes:
        _print_solution(scheme, harness.solve_scheme(scheme, cfg.params, cfg.solver))
    return 0


def cmd_simulate(cfg, args):
    if args.power_mw is None or args.rho is None:
        raise ConfigError("simulate needs --power-mw and --rho")
    d = Decision(args.power_mw * MW, args.rho)
    sim = cfg.sim or SimConfig()
    try:
        rep = run_simulation(cfg.params, d, sim)
    except DomainError as e:
        raise ConfigError(str(e)) from None
    m = art_components(cfg.params, d)
    print(f"slots={sim.n_slots} seed={sim.seed} warmup={sim.warmup_fraction}")
    print(f"generated={rep.generated} completed={rep.completed} excluded={rep.excluded} "
          f"in_flight={rep.in_flight_at_end}")
    print(f"ART sim={_g(rep.mean_response)} +/- {_g(rep.ci_half_width)}  analytic={_g(m.t)}")
    print(f"ART(RS path) sim={_g(rep.mean_response_rs)} analytic={_g(m.t_r)}")
    print(f"ART(HS path) sim={_g(rep.mean_response_hs)} analytic={_g(m.t_h)}")
    print(f"SAP sim={_g(rep.empirical_sap / MW)} mW analytic={_g(m.sap / MW)} mW")
    for s in Stage:
        print(f"  {s.name:7s} mean sojourn {_g(rep.per_stage_sojourn[s])}")
    return 0


def cmd_sweep(cfg, args):
    if args.fix == "rho-sweep":
        params = cfg.params.replace(a=0.01, qc_r=0.015, qc_h=0.015)
        text = harness.emit_rho_sweep_csv(harness.rho_sweep(params, rho_step=args.rho_step), args.out)
    else:
        rows = harness.run_sweep(cfg)
        text = harness.emit_csv(rows, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_validate(cfg, args):
    if cfg.sim is None:
        cfg = dataclasses.replace(cfg, sim=SimConfig())
    if args.tolerance is not None:
        cfg = dataclasses.replace(cfg, tolerance=args.tolerance)
    results = harness.validate(cfg)
    print(f"{'P(mW)':>8} {'rho':>6} {'ART':>12} {'ART sim':>12} {'err':>8} {'CI':>9} "
          f"{'SAP err':>8}  status")
    for r in results:
        if r.status == harness.DIVERGENT:
            sim_label = harness.DIVERGENT if r.sim_divergent else _g(r.sim_art)
            print(f"{r.power / MW:8.3f} {r.rho:6.3f} {'divergent':>12} {sim_label:>12} "
                  f"{'-':>8} {'-':>9} {'-':>8}  divergent")
            continue
        print(f"{r.power / MW:8.3f} {r.rho:6.3f} {r.analytic_art:12.5g} {r.sim_art:12.5g} "
              f"{r.art_rel_error:8.2%} {r.ci_half_width:9.4g} {r.sap_rel_error:8.2%}  {r.status}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} probes within {cfg.tolerance:.1%}")
    return 1 if failed else 0


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "baseline": cmd_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relaymec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--scheme", action="append", help="override schemes (repeatable)")
        sp.add_argument("--delta", type=float)
        sp.add_argument("--k", type=int)
        sp.add_argument("--slots", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--warmup", type=float)

    for name in COMMANDS:
        sp = sub.add_parser(name)
        common(sp)
        if name == "simulate":
            sp.add_argument("--power-mw", type=float)
            sp.add_argument("--rho", type=float)
        if name == "sweep":
            sp.add_argument("--out", help="CSV path (default: stdout)")
            sp.add_argument("--fix", choices=["rho-sweep"],
                            help="emit (rho, P, ART) triples at a=0.01, qc=0.015")
            sp.add_argument("--rho-step", type=float, default=0.01)
        if name == "validate":
            sp.add_argument("--tolerance", type=float)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _override(harness.load_config(args.config), args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
