"""Command-line entry point.

Exit status: 0 on success or PASS, 1 when a witness or FAIL is reported,
2 on usage errors and malformed input files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import formats
from .commutativity import (
    BudgetExceeded,
    check_local_commutativity_1d,
    check_monotonicity,
    check_pairwise_network,
)
from .core import Configuration, DomainError, InvalidRule, network_from_rule, validate
from .formats import FormatError
from .gadgets import GadgetError, build_gprime, build_undec_rule, divergence_demo, standard_base
from .history import histories, invariant_history_test
from .marching import (
    InconsistentAges,
    MarchingRule,
    lift_config,
    marching_transform,
    poisson_speedup,
    reconstruct_1d,
    verify_reconstruction,
)
from .render import PaletteError, render_grid, render_ppm
from .trajectory import Bernoulli, RoundRobin, Synchronous, simulate


class UsageError(Exception):
    pass


# --- argument helpers -----------------------------------------------------


def _rule(path):
    rule = formats.load_rule(path)
    table = rule.composite if isinstance(rule, MarchingRule) else rule
    report = validate(table)
    if not report.ok:
        raise UsageError(f"{path}: invalid rule: " + "; ".join(report.problems[:5]))
    return rule


def _init(args, rule) -> Configuration:
    text = args.init
    if text is None:
        raise UsageError("--init is required")
    p = Path(text)
    if p.is_file():
        text = p.read_text()
    base = rule.base if isinstance(rule, MarchingRule) else rule
    try:
        config = Configuration.from_string(text, args.origin, base.boundary)
    except ValueError as exc:
        raise UsageError(f"bad --init: {exc}") from None
    if args.window is not None:
        if args.window < config.width:
            raise UsageError(f"--window {args.window} is narrower than the initial string")
        q = getattr(base.boundary, "q", getattr(base.boundary, "right", 0))
        config = config.replace(np.concatenate((config.cells, np.full(args.window - config.width, q))))
    if config.width and config.cells.max() >= base.n_states:
        raise UsageError(f"initial configuration uses states outside 0..{base.n_states - 1}")
    if isinstance(rule, MarchingRule):
        config = lift_config(config, rule)
    return config


def _schedule(spec: str, seed: int):
    kind, _, arg = spec.partition(":")
    try:
        if kind == "sync" and not arg:
            return Synchronous()
        if kind == "bernoulli":
            p, _, s = arg.partition(":")
            return Bernoulli(float(p), int(s) if s else seed)
        if kind == "roundrobin":
            return RoundRobin(int(arg or 1))
        if kind == "file":
            return formats.parse_schedule(Path(arg).read_text(), arg)
    except (ValueError, OSError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise UsageError(f"bad --schedule {spec!r}: {exc}") from None
    raise UsageError(f"bad --schedule {spec!r}; expected sync, bernoulli:p[:seed], roundrobin:k or file:PATH")


def _write(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _frames_tsv(traj) -> str:
    lines = ["t\tframe"]
    for t in range(traj.steps + 1):
        lines.append(f"{t}\t{traj.frame(t)}")
    return "\n".join(lines) + "\n"


def _output(traj, fmt: str, out, palette):
    if fmt == "frames":
        _write(_frames_tsv(traj), out)
    elif fmt == "tsv":
        _write(formats.format_trace(traj), out)
    elif fmt == "grid":
        _write(render_grid(traj.frames, palette) if palette else render_grid(traj.frames), out)
    elif fmt == "pixmap":
        _write(render_ppm(traj.frames), out)


# --- subcommands ----------------------------------------------------------


def cmd_validate(args):
    rule = formats.load_rule(args.rule)
    table = rule.composite if isinstance(rule, MarchingRule) else rule
    report = validate(table)
    if report.ok:
        print("VALID")
        return 0
    print("INVALID")
    for problem in report.problems:
        print(f"  {problem}")
    return 1


def cmd_simulate(args):
    rule = _rule(args.rule)
    init = _init(args, rule)
    traj = simulate(rule, init, _schedule(args.schedule, args.seed), args.steps)
    _output(traj, args.format, args.out, args.palette)
    return 0


def cmd_check(args):
    rule = _rule(args.rule)
    table = rule.composite if isinstance(rule, MarchingRule) else rule
    if args.network_window:
        net = network_from_rule(table, args.network_window)
        mode = "sampled" if args.sampled else "exhaustive"
        try:
            witness = check_pairwise_network(net, mode, count=args.sampled or 0, seed=args.seed)
        except BudgetExceeded as exc:
            raise UsageError(str(exc)) from None
    else:
        witness = check_local_commutativity_1d(table)
    if witness is None:
        print("PASS")
        return 0
    print(witness.format())
    return 1


def cmd_check_monotonicity(args):
    rule = _rule(args.rule)
    init = _init(args, rule)
    specs = args.schedule or ["sync"]
    trajs = [simulate(rule, init, _schedule(s, args.seed + k), args.steps) for k, s in enumerate(specs)]
    witness = check_monotonicity(rule, trajs)
    if witness is None:
        print("PASS")
        return 0
    print(witness.format())
    return 1


def cmd_history_compare(args):
    rule = _rule(args.rule)
    init = _init(args, rule)
    specs = args.schedule or ["sync"]
    schedules = [_schedule(s, args.seed + k) for k, s in enumerate(specs)]
    verdict = invariant_history_test(rule, init, schedules, args.steps)
    hist = [histories(t) for t in verdict.trajectories]
    print("site\tverdict\tlengths")
    for x in rule.site_ids(init):
        seqs = [h[x].values for h in hist]
        ok = all(
            a[: min(len(a), len(b))] == b[: min(len(a), len(b))] for a in seqs for b in seqs
        )
        print(f"{x}\t{'PASS' if ok else 'DIFF'}\t{','.join(str(len(s)) for s in seqs)}")
    if args.dump_zeta:
        lines = ["site\tindex\tstate"]
        longest = {x: max((h[x].values for h in hist), key=len) for x in hist[0]}
        for x, seq in longest.items():
            for k, v in enumerate(seq):
                lines.append(f"{x}\t{k}\t{v}")
        Path(args.dump_zeta).write_text("\n".join(lines) + "\n")
    print("CONSISTENT" if verdict.consistent else "INCONSISTENT")
    return 0 if verdict.consistent else 1


def cmd_transform(args):
    rule = _rule(args.rule)
    if isinstance(rule, MarchingRule):
        raise UsageError("rule is already a marching composite")
    march = marching_transform(rule)
    formats.save_rule(march, args.out)
    print(f"wrote {args.out} ({march.n_states} composite states)")
    return 0


def cmd_reconstruct(args):
    rule = _rule(args.rule)
    march = rule if isinstance(rule, MarchingRule) else marching_transform(rule)
    traj = formats.load_trace(args.trace, march)
    if args.init is not None:
        init = _init(args, march)
        if not np.array_equal(init.cells, traj.initial.cells):
            raise UsageError("--init does not match frame 0 of the trace")
    try:
        result = reconstruct_1d(traj)
    except InconsistentAges as exc:
        raise UsageError(str(exc)) from None
    prefix = args.out_prefix
    Path(f"{prefix}.delta.tsv").write_text(
        "site\tdelta\n" + "".join(f"{x}\t{d}\n" for x, d in result.delta.items())
    )
    rows = ["t\tsite\ttau_bar"]
    for t in range(traj.steps + 1):
        for i, x in enumerate(result.site_ids):
            rows.append(f"{t}\t{x}\t{int(result.tau_bar[t, i])}")
    Path(f"{prefix}.taubar.tsv").write_text("\n".join(rows) + "\n")
    rows = ["site\tu\tstate"]
    for (x, u) in sorted(result.eta_bar, key=lambda k: (result.site_ids.index(k[0]), k[1])):
        rows.append(f"{x}\t{u}\t{result.eta_bar[(x, u)]}")
    Path(f"{prefix}.etabar.tsv").write_text("\n".join(rows) + "\n")
    failure = verify_reconstruction(result)
    if failure is None:
        print("PASS")
        return 0
    print(f"FAIL\t{failure}")
    return 1


def cmd_gadget(args):
    if args.gadget == "demo":
        base = _rule(args.rule) if args.rule else standard_base()
        f = build_undec_rule(base)
        demo = divergence_demo(f, base.n_states, args.horizon)
        formats.save_trace(demo.trajectory_a, f"{args.out_prefix}.a.tsv")
        formats.save_trace(demo.trajectory_b, f"{args.out_prefix}.b.tsv")
        print(f"site\t{demo.site}")
        print(f"history_a\t{' '.join(map(str, demo.history_a))}")
        print(f"history_b\t{' '.join(map(str, demo.history_b))}")
        print("INCONSISTENT" if not demo.verdict.consistent else "CONSISTENT")
        return 0
    base = _rule(args.rule)
    out = build_gprime(base) if args.gadget == "gprime" else build_undec_rule(base)
    formats.save_rule(out, args.out)
    print(f"wrote {args.out} ({out.n_states} states)")
    return 0


def cmd_render(args):
    frames, _ = formats.parse_trace(Path(args.trace).read_text(), args.trace)
    if args.format == "pixmap":
        _write(render_ppm(frames, scale=args.scale), args.out)
    else:
        _write(render_grid(frames, args.palette) if args.palette else render_grid(frames), args.out)
    return 0


def cmd_bench(args):
    rule = _rule(args.rule)
    march = rule if isinstance(rule, MarchingRule) else marching_transform(rule)
    text = args.init
    p = Path(text)
    base_cfg = Configuration.from_string(p.read_text() if p.is_file() else text, args.origin, march.base.boundary)
    res = poisson_speedup(march, base_cfg, args.rounds, args.p, args.trials, args.seed)
    print(f"rounds\t{res['rounds']}")
    print(f"p\t{res['p']}")
    print(f"trials\t{res['trials']}")
    print(f"mean_time\t{np.mean(res['times']):.6f}")
    print(f"factor\t{res['factor']:.6f}")
    return 0


# --- parser ---------------------------------------------------------------


def _sim_args(p, schedule_repeat=False):
    p.add_argument("--rule", required=True, help="rule file")
    p.add_argument("--init", help="initial cells as a string (e.g. 00100) or a file")
    if schedule_repeat:
        p.add_argument("--schedule", action="append", help="repeatable; sync|bernoulli:p[:seed]|roundrobin:k|file:PATH")
    else:
        p.add_argument("--schedule", default="sync", help="sync|bernoulli:p[:seed]|roundrobin:k|file:PATH")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, help="pad the initial string to this width")
    p.add_argument("--origin", type=int, default=0, help="site id of the leftmost cell")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asynchist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report missing or out-of-range table entries")
    p.add_argument("--rule", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a trajectory")
    _sim_args(p)
    p.add_argument("--format", choices=["frames", "tsv", "grid", "pixmap"], default="frames")
    p.add_argument("--palette", help="glyphs for --format grid, one per state")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="exhaustive local commutativity check")
    p.add_argument("--rule", required=True)
    p.add_argument("--network-window", type=int, help="check by brute force on a window of this width instead")
    p.add_argument("--sampled", type=int, help="with --network-window: sample this many configurations")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("check-monotonicity", help="monotonicity along simulated trajectories")
    _sim_args(p, schedule_repeat=True)
    p.set_defaults(func=cmd_check_monotonicity)

    p = sub.add_parser("history-compare", help="compare per-site histories across schedules")
    _sim_args(p, schedule_repeat=True)
    p.add_argument("--dump-zeta", help="write the longest history of every site as TSV")
    p.set_defaults(func=cmd_history_compare)

    p = sub.add_parser("transform", help="build a composite rule")
    tsub = p.add_subparsers(dest="transform", required=True)
    q = tsub.add_parser("marching", help="marching-soldiers embedding")
    q.add_argument("--rule", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_transform)

    p = sub.add_parser("reconstruct", help="rebuild the base trajectory from a composite trace")
    p.add_argument("--rule", required=True, help="base rule or marching composite")
    p.add_argument("--trace", required=True)
    p.add_argument("--init", help="optional check against frame 0 (base cells)")
    p.add_argument("--window", type=int)
    p.add_argument("--origin", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("gadget", help="reduction gadgets")
    gsub = p.add_subparsers(dest="gadget", required=True)
    for name in ("gprime", "undec"):
        q = gsub.add_parser(name)
        q.add_argument("--rule", required=True)
        q.add_argument("--out", required=True)
        q.set_defaults(func=cmd_gadget)
    q = gsub.add_parser("demo", help="two orders with different histories at site -1")
    q.add_argument("--rule", help="commutative base (default: the two-state flip-edge rule)")
    q.add_argument("--horizon", type=int, default=50)
    q.add_argument("--out-prefix", required=True)
    q.set_defaults(func=cmd_gadget)

    p = sub.add_parser("render", help="draw a trace TSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--format", choices=["grid", "pixmap"], default="grid")
    p.add_argument("--palette")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="benchmarks")
    bsub = p.add_subparsers(dest="bench", required=True)
    q = bsub.add_parser("poisson", help="marching-soldiers slowdown under near-Poisson clocks")
    q.add_argument("--rule", required=True)
    q.add_argument("--init", required=True)
    q.add_argument("--origin", type=int, default=0)
    q.add_argument("--rounds", type=int, default=20)
    q.add_argument("--p", type=float, default=0.05)
    q.add_argument("--trials", type=int, default=5)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_bench)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (FormatError, UsageError, InvalidRule, DomainError, GadgetError, PaletteError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
