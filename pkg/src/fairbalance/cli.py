"""Command-line front end.

Subcommands ``nucleolus``, ``simulate``, ``bankruptcy`` and ``compare``
print a JSON report (or a plain table with ``--pretty``) on stdout.

Exit codes: 0 ok, 2 input error, 3 infeasible game, 4 unsupported player
count, 5 no equilibrium within the step budget, 1 numerical breakdown.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import hydraulic
from .bankruptcy import BankruptcyInstance, bankruptcy_game, cg_violations
from .errors import (
    GameInputError,
    InfeasibleGame,
    MaxStepsExceeded,
    NumericalBreakdown,
    UnsupportedPlayerCount,
)
from .game import (
    EPS_EFF,
    EPS_TIE,
    CoalitionGame,
    game_to_json,
    is_efficient,
    load_game,
    max_complaint,
)
from .nucleolus import nucleolus

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_SIZE = 4
EXIT_NO_CONVERGENCE = 5

TRACE_HEADER = ["step", "y1", "y2", "y3", "E1", "E2", "E3", "C1", "C2", "C3", "max_level", "phase"]


def fmt(x: float) -> str:
    s = format(float(x), ".9g")
    return "0" if s == "-0" else s


def num(x: float) -> float:
    v = float(fmt(x))
    return 0.0 if v == 0 else v


def _vec(x) -> list[float]:
    return [num(v) for v in np.asarray(x, dtype=float)]


def _common(g: CoalitionGame, x, eps_eff: float) -> dict:
    top, _ = max_complaint(g, x)
    return {
        "players": g.n,
        "allocation": _vec(x),
        "max_complaint": num(top),
        "efficient": is_efficient(x, g, max(eps_eff, 1e-6)),
        "defaulted": [c.key() for c in g.defaulted],
        "game": game_to_json(g),
    }


def nucleolus_report(g: CoalitionGame, eps_eff: float = EPS_EFF, eps_tie: float = EPS_TIE) -> dict:
    res = nucleolus(g, eps_tie=eps_tie)
    rep = {"method": "nucleolus-lp"}
    rep.update(_common(g, res.x, eps_eff))
    rep["rounds"] = [{"T": num(r.value), "fixed": [c.key() for c in r.fixed]} for r in res.rounds]
    rep["excess"] = [{"coalition": c.key(), "complaint": num(v)} for c, v in res.excess.entries]
    return rep


def simulate_report(g: CoalitionGame, cfg: hydraulic.SimConfig, eps_eff: float = EPS_EFF) -> tuple[dict, list]:
    res = hydraulic.run(g, cfg)
    rep = {"method": "hydraulic-sim"}
    rep.update(_common(g, res.x, eps_eff))
    rep.update(
        steps=res.steps,
        phases=res.state.phase,
        phase1_level=num(res.phase1_level),
        level_bound_ok=hydraulic.level_bound_check(res.state, g, cfg.eps_tie),
        eta=cfg.eta,
    )
    return rep, res.trace


def write_trace(path: str, trace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for row in trace:
            w.writerow(
                [row.step]
                + [fmt(v) for v in (*row.y, *row.E, *row.C, row.max_level)]
                + [row.phase]
            )


def _pretty(rep: dict) -> str:
    lines = [f"method: {rep['method']}"]
    if rep["method"] == "compare":
        lines.append(f"{'player':>6}  {'nucleolus-lp':>14}  {'hydraulic-sim':>14}")
        for i, (a, b) in enumerate(zip(rep["nucleolus"]["allocation"], rep["simulation"]["allocation"]), 1):
            lines.append(f"{i:>6}  {fmt(a):>14}  {fmt(b):>14}")
        lines.append(f"max-norm gap: {fmt(rep['gap'])}")
        return "\n".join(lines)
    lines.append(f"{'player':>6}  {'payoff':>14}")
    for i, v in enumerate(rep["allocation"], 1):
        lines.append(f"{i:>6}  {fmt(v):>14}")
    lines.append(f"max complaint: {fmt(rep['max_complaint'])}")
    for r in rep.get("rounds", []):
        lines.append(f"round T={fmt(r['T'])}  fixed: " + " ".join("{" + k + "}" for k in r["fixed"]))
    if "steps" in rep:
        lines.append(f"steps: {rep['steps']}  phases: {rep['phases']}")
    if rep.get("defaulted"):
        lines.append("defaulted to 0: " + " ".join("{" + k + "}" for k in rep["defaulted"]))
    return "\n".join(lines)


def _emit(rep: dict, pretty: bool) -> None:
    if pretty:
        print(_pretty(rep))
    else:
        print(json.dumps(rep, indent=2))


def _sim_config(args) -> hydraulic.SimConfig:
    kw = {"eta": args.eta, "max_steps": args.max_steps, "trace_every": args.trace_every}
    if args.eps_tie is not None:
        kw["eps_tie"] = args.eps_tie
    return hydraulic.SimConfig(**kw)


def cmd_nucleolus(args) -> int:
    g = load_game(args.game)
    _emit(nucleolus_report(g, args.eps_eff, args.eps_tie or EPS_TIE), args.pretty)
    return 0


def cmd_simulate(args) -> int:
    g = load_game(args.game)
    cfg = _sim_config(args)
    try:
        rep, trace = simulate_report(g, cfg, args.eps_eff)
    except MaxStepsExceeded as exc:
        if args.trace:
            write_trace(args.trace, exc.trace)
        raise
    if args.trace:
        write_trace(args.trace, trace)
        rep["trace"] = args.trace
    _emit(rep, args.pretty)
    return 0


def cmd_bankruptcy(args) -> int:
    try:
        debts = [float(d) for d in args.debts.split(",")]
    except ValueError:
        raise GameInputError(f"--debts must be a comma-separated list of numbers, got {args.debts!r}") from None
    inst = BankruptcyInstance(args.estate, tuple(debts))
    g = bankruptcy_game(inst)
    res = nucleolus(g, eps_tie=args.eps_tie or EPS_TIE)
    x = res.x
    bad = cg_violations(inst, x)
    if bad:
        raise NumericalBreakdown(f"Talmud division fails the contested-garment check for pair {bad[0][:2]}")
    rep = {"method": "talmud", "estate": num(inst.estate), "debts": _vec(inst.debts)}
    rep.update(_common(g, x, args.eps_eff))
    rep["rounds"] = [{"T": num(r.value), "fixed": [c.key() for c in r.fixed]} for r in res.rounds]
    _emit(rep, args.pretty)
    return 0


def cmd_compare(args) -> int:
    g = load_game(args.game)
    if g.n != 3:
        raise UnsupportedPlayerCount(f"compare needs a three-player game, got {g.n}")
    lp_rep = nucleolus_report(g, args.eps_eff, args.eps_tie or EPS_TIE)
    sim_rep, trace = simulate_report(g, _sim_config(args), args.eps_eff)
    if args.trace:
        write_trace(args.trace, trace)
    gap = float(np.max(np.abs(np.subtract(lp_rep["allocation"], sim_rep["allocation"]))))
    rep = {
        "method": "compare",
        "players": g.n,
        "nucleolus": {k: lp_rep[k] for k in ("allocation", "max_complaint", "rounds")},
        "simulation": {k: sim_rep[k] for k in ("allocation", "max_complaint", "steps", "phases")},
        "gap": num(gap),
        "defaulted": lp_rep["defaulted"],
        "game": lp_rep["game"],
    }
    _emit(rep, args.pretty)
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--pretty", action="store_true", help="print a plain-text table instead of JSON")
    shared.add_argument("--eps-eff", type=float, default=EPS_EFF, help="efficiency tolerance")
    shared.add_argument("--eps-tie", type=float, default=None, help="tie tolerance for complaints and levels")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--eta", type=float, default=0.01, help="relaxation step size")
    sim.add_argument("--max-steps", type=int, default=10**6)
    sim.add_argument("--trace-every", type=int, default=100, help="trace sampling stride")
    sim.add_argument("--trace", metavar="PATH", help="write the level trace as CSV")

    p = argparse.ArgumentParser(
        prog="fairbalance",
        description="Nucleolus, gravity-balance simulation and Talmud division for coalitional games.",
        epilog="Exit codes: 0 ok, 1 numerical breakdown, 2 input error, 3 infeasible game, "
        "4 unsupported player count, 5 no equilibrium within --max-steps.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("nucleolus", parents=[shared], help="nucleolus by sequential linear programs")
    s.add_argument("game", help="game JSON file")
    s.set_defaults(func=cmd_nucleolus)

    s = sub.add_parser("simulate", parents=[shared, sim], help="three-player gravity balance simulation")
    s.add_argument("game", help="game JSON file")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("bankruptcy", parents=[shared], help="Talmud division of an estate")
    s.add_argument("--estate", type=float, required=True)
    s.add_argument("--debts", required=True, help="comma-separated claims, e.g. 100,200,300")
    s.set_defaults(func=cmd_bankruptcy)

    s = sub.add_parser("compare", parents=[shared, sim], help="run both solvers and report the gap")
    s.add_argument("game", help="game JSON file")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleGame as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnsupportedPlayerCount as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except MaxStepsExceeded as exc:
        print(f"no equilibrium: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except NumericalBreakdown as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        # GameInputError and json.JSONDecodeError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

if __name__ == "__main__":
    raise SystemExit(main())
