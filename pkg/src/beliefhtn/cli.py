"""Command-line front end.

Subcommands: ``plan`` a single instance, ``simulate`` a saved policy,
``export`` a policy in both output formats, ``experiment`` to regenerate
the quantitative study, and ``validate-domain`` for parser diagnostics.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .builtins import BUILTIN_NAMES, builtin_bundle, is_builtin
from .domfile import ProblemBundle, parse, serialize
from .errors import BeliefHtnError
from .experiment import (
    DEFAULT_SPECS,
    ExperimentConfig,
    results_csv,
    run_experiment,
)
from .planner import (
    MODE_LEGACY,
    MODE_NEW,
    PlannerConfig,
    plan as plan_policy,
    policy_comm_edges,
    simulate,
)
from .policyio import load_json, to_json, to_text

OUT_DIR_ENV = "BELIEFHTN_OUT"


def _load_bundle(name_or_path: str) -> ProblemBundle:
    if is_builtin(name_or_path):
        return builtin_bundle(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise BeliefHtnError(
            f"{name_or_path!r} is neither a builtin domain {BUILTIN_NAMES} "
            "nor an existing file"
        )
    return parse(path.read_text(encoding="utf-8")).build()


def _parse_assignments(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise BeliefHtnError(f"expected attr=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _prepare_bundle(args) -> ProblemBundle:
    bundle = _load_bundle(args.domain)
    if getattr(args, "set", None):
        bundle = bundle.with_world(_parse_assignments(args.set))
    if getattr(args, "believe", None):
        bundle = bundle.with_human_belief(_parse_assignments(args.believe))
    if getattr(args, "start", None):
        bundle = bundle.with_start(args.start)
    return bundle


def _cmd_plan(args) -> int:
    bundle = _prepare_bundle(args)
    config = PlannerConfig(depth_bound=args.depth)
    policy = plan_policy(bundle.problem, bundle.obs_model, args.mode, config)
    report = simulate(policy, bundle.obs_model)
    comm_edges = policy_comm_edges(policy)
    print(
        f"planned domain={bundle.domfile.name} mode={args.mode} "
        f"start={bundle.problem.start_agent}"
    )
    print(
        f"outcome={report.outcome} branches={report.n_traces} "
        f"comm_edges={len(comm_edges)} mean_len={report.mean_primitive_length:.2f}"
    )
    for _, edge in comm_edges:
        for ca in edge.comms:
            print(f"  communicates {ca}")
    if args.out:
        Path(args.out).write_text(to_json(policy, bundle), encoding="utf-8")
        print(f"wrote {args.out}")
    if args.text:
        print(to_text(policy), end="")
    return 0 if report.outcome == "success" else 1


def _cmd_simulate(args) -> int:
    bundle, policy = load_json(Path(args.policy).read_text(encoding="utf-8"))
    world = policy.init_world
    human = policy.init_human
    if args.set:
        b2 = bundle.with_world(_parse_assignments(args.set))
        world = b2.problem.world
        human = b2.problem.human_belief
    if args.believe:
        overrides = _parse_assignments(args.believe)
        b2 = bundle.with_human_belief(overrides)
        for text in overrides:
            attr = bundle.attr(text)
            human = human.with_value(attr, b2.problem.human_belief.get(attr))
    report = simulate(policy, bundle.obs_model, world, human)
    print(
        f"simulated mode={policy.mode}: outcome={report.outcome} "
        f"branches={report.n_traces} success={report.n_success} "
        f"na={report.n_na} idl={report.n_idl}"
    )
    if report.detail:
        print(f"  first failure: {report.detail}")
    return 0 if report.outcome == "success" else 1


def _cmd_export(args) -> int:
    bundle = _prepare_bundle(args)
    config = PlannerConfig(depth_bound=args.depth)
    policy = plan_policy(bundle.problem, bundle.obs_model, args.mode, config)
    base = Path(args.out or f"{bundle.domfile.name}-{args.mode}")
    json_path = base.with_suffix(".json")
    text_path = base.with_suffix(".txt")
    json_path.write_text(to_json(policy, bundle), encoding="utf-8")
    text_path.write_text(to_text(policy), encoding="utf-8")
    print(f"wrote {json_path} and {text_path}")
    return 0


def _cmd_experiment(args) -> int:
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV, "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    modes = tuple(args.modes.split(",")) if args.modes else (MODE_LEGACY, MODE_NEW)
    config = ExperimentConfig(
        domain=args.domain,
        modes=modes,
        start=args.start,
        seed=args.seed,
        depth_bound=args.depth,
    )
    table, results = run_experiment(config)
    csv_path = out_dir / f"experiment-{args.domain}-seed{args.seed}.csv"
    csv_path.write_text(results_csv(config, results), encoding="utf-8")
    print(table.format())
    print(f"instances={len(results)} csv={csv_path}")
    return 0


def _cmd_validate(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
        dom = parse(text)
    except (BeliefHtnError, OSError) as exc:
        print(f"INVALID: {exc}")
        return 1
    bundle = dom.build()
    print(
        f"OK: domain {dom.name!r}, {len(dom.groups)} groups, "
        f"{len(dom.svars)} attribute templates, "
        f"{len(bundle.universe)} grounded attributes, "
        f"{len(dom.operators)} operators, {len(dom.methods)} methods"
    )
    if args.echo:
        print(serialize(dom), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefhtn",
        description="Human-aware HTN planning with belief tracking and communication",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_mode=True):
        p.add_argument("--domain", required=True, help=f"builtin {BUILTIN_NAMES} or a .dom file")
        if with_mode:
            p.add_argument("--mode", choices=(MODE_NEW, MODE_LEGACY), default=MODE_NEW)
        p.add_argument("--start", choices=None, default=None, help="starting agent id")
        p.add_argument("--set", action="append", metavar="ATTR=VALUE",
                       help="override an initial world value (repeatable)")
        p.add_argument("--believe", action="append", metavar="ATTR=VALUE",
                       help="override an initial human-belief value (repeatable)")
        p.add_argument("--depth", type=int, default=64, help="search depth bound")

    p_plan = sub.add_parser("plan", help="plan one instance and report the policy")
    common(p_plan)
    p_plan.add_argument("--out", help="write the policy as JSON")
    p_plan.add_argument("--text", action="store_true", help="print the text graph")
    p_plan.set_defaults(func=_cmd_plan)

    p_sim = sub.add_parser("simulate", help="replay a saved policy")
    p_sim.add_argument("--policy", required=True, help="policy JSON file")
    p_sim.add_argument("--set", action="append", metavar="ATTR=VALUE",
                       help="override the true initial world value (repeatable)")
    p_sim.add_argument("--believe", action="append", metavar="ATTR=VALUE",
                       help="override the true initial human belief (repeatable)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_exp = sub.add_parser("export", help="plan and write both policy formats")
    common(p_exp)
    p_exp.add_argument("--out", help="output basename (suffixes .json/.txt added)")
    p_exp.set_defaults(func=_cmd_export)

    p_x = sub.add_parser("experiment", help="regenerate the quantitative study")
    p_x.add_argument("--domain", required=True, choices=sorted(DEFAULT_SPECS))
    p_x.add_argument("--modes", help="comma list, default legacy,new")
    p_x.add_argument("--start", default=None)
    p_x.add_argument("--seed", type=int, default=0)
    p_x.add_argument("--depth", type=int, default=128)
    p_x.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    p_x.set_defaults(func=_cmd_experiment)

    p_val = sub.add_parser("validate-domain", help="parse a domain file and report")
    p_val.add_argument("file")
    p_val.add_argument("--echo", action="store_true", help="print the canonical form")
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BeliefHtnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
