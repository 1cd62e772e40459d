"""Quantitative study: initial-state sweeps, metrics, and CSV output.

For each domain the generator enumerates a parameterized grid of initial
world states (binary dimensions) crossed with all subsets of flippable
human-belief attributes; the default specs yield 512 initial states per
domain, 448 of them with divergent beliefs and 64 fully aligned.  Every
state is planned under each solver mode and the policy is replayed against
the true belief protocol; outcomes aggregate into a per-domain table of
success, failure-taxonomy and communication ratios.

All enumeration and aggregation is deterministic, so repeated runs emit
byte-identical CSVs.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

from .builtins import builtin_bundle, is_builtin
from .domfile import ProblemBundle, parse
from .errors import SpecMismatch
from .planner import (
    MODE_LEGACY,
    MODE_NEW,
    PlannerConfig,
    plan,
    policy_comm_edges,
    simulate,
)
from .state import BeliefState

CSV_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GeneratorSpec:
    """Which attributes vary in the world and which human beliefs may flip."""

    world_dims: tuple[tuple[str, tuple[str, str]], ...]
    flip_dims: tuple[tuple[str, tuple[str, str]], ...]
    expected_total: int = 512
    expected_aligned: int = 64


DEFAULT_SPECS: dict[str, GeneratorSpec] = {
    "cooking": GeneratorSpec(
        world_dims=(
            ("AgtAt(human)", ("Kitchen", "Room")),
            ("PastaLoc", ("Kitchen", "Room")),
            ("SaltInPot", ("false", "true")),
            ("Stove", ("off", "on")),
            ("HumanHasPasta", ("false", "true")),
            ("PastaInPot", ("false", "true")),
        ),
        flip_dims=(
            ("PastaLoc", ("Kitchen", "Room")),
            ("SaltInPot", ("false", "true")),
            ("Stove", ("off", "on")),
        ),
    ),
    "box": GeneratorSpec(
        world_dims=(
            ("BallsInBox(box1)", ("0", "1")),
            ("BallsInBox(box2)", ("0", "1")),
            ("BallsInBox(box3)", ("0", "1")),
            ("Sticker(box1)", ("false", "true")),
            ("Sticker(box2)", ("false", "true")),
            ("Sticker(box3)", ("false", "true")),
        ),
        # The box1 flip overestimates the count by one from either world
        # value; the box2 flip swaps within the world pair; the sticker flip
        # is repaired by assessment alone and never needs communication.
        flip_dims=(
            ("BallsInBox(box1)", ("1", "2")),
            ("BallsInBox(box2)", ("0", "1")),
            ("Sticker(box3)", ("false", "true")),
        ),
    ),
}


@dataclass(frozen=True)
class Instance:
    index: int
    world_bits: tuple[int, ...]
    flip_bits: tuple[int, ...]
    world: BeliefState
    human: BeliefState

    @property
    def aligned(self) -> bool:
        return not any(self.flip_bits)


def generate_initial_states(bundle: ProblemBundle, spec: GeneratorSpec) -> list[Instance]:
    """Deterministically enumerate the full initial-state grid."""
    total = 2 ** len(spec.world_dims) * 2 ** len(spec.flip_dims)
    aligned = 2 ** len(spec.world_dims)
    if total != spec.expected_total or aligned != spec.expected_aligned:
        raise SpecMismatch(
            f"generator dims realize {total} states ({aligned} aligned), "
            f"spec declares {spec.expected_total} ({spec.expected_aligned} aligned)"
        )
    flip_names = {name for name, _ in spec.flip_dims}
    dim_names = {name for name, _ in spec.world_dims}
    if not flip_names <= dim_names:
        raise SpecMismatch("flippable attributes must be world dimensions")

    instances: list[Instance] = []
    index = 0
    for world_bits in itertools.product((0, 1), repeat=len(spec.world_dims)):
        overrides = {
            name: values[bit]
            for (name, values), bit in zip(spec.world_dims, world_bits)
        }
        base = bundle.with_world(overrides)
        for flip_bits in itertools.product((0, 1), repeat=len(spec.flip_dims)):
            human_overrides = {}
            for (name, values), bit in zip(spec.flip_dims, flip_bits):
                if bit:
                    world_value = overrides[name]
                    human_overrides[name] = (
                        values[1] if world_value == values[0] else values[0]
                    )
            b = base.with_human_belief(human_overrides) if human_overrides else base
            instances.append(
                Instance(
                    index,
                    world_bits,
                    flip_bits,
                    b.problem.world,
                    b.problem.human_belief,
                )
            )
            index += 1
    return instances


@dataclass
class InstanceResult:
    instance: Instance
    mode: str
    outcome: str  # success | na | idl | error:<...>
    n_traces: int = 0
    n_success: int = 0
    n_na: int = 0
    n_idl: int = 0
    communicates: bool = False
    mean_comms: float = 0.0
    mean_len: float = 0.0


@dataclass
class ModeMetrics:
    """One row of the summary table."""

    domain: str
    mode: str
    n: int = 0
    n_success: int = 0
    n_na: int = 0
    n_idl: int = 0
    n_error: int = 0
    n_comm: int = 0
    sum_len: float = 0.0
    sum_comms: float = 0.0
    aligned_success: int = 0
    aligned_total: int = 0

    @property
    def success_rate(self) -> float:
        return 100.0 * self.n_success / self.n if self.n else 0.0

    @property
    def n_failed(self) -> float:
        return self.n - self.n_success - self.n_error

    @property
    def na_rate(self) -> float:
        return 100.0 * self.n_na / self.n_failed if self.n_failed else 0.0

    @property
    def idl_rate(self) -> float:
        return 100.0 * self.n_idl / self.n_failed if self.n_failed else 0.0

    @property
    def com_rate(self) -> float:
        return 100.0 * self.n_comm / self.n_success if self.n_success else 0.0

    @property
    def mean_len(self) -> float:
        return self.sum_len / self.n_success if self.n_success else 0.0

    @property
    def mean_comms(self) -> float:
        return self.sum_comms / self.n_success if self.n_success else 0.0


@dataclass
class MetricsTable:
    rows: list[ModeMetrics] = field(default_factory=list)

    def row(self, domain: str, mode: str) -> ModeMetrics:
        for r in self.rows:
            if r.domain == domain and r.mode == mode:
                return r
        r = ModeMetrics(domain, mode)
        self.rows.append(r)
        return r

    def format(self) -> str:
        header = (
            f"{'domain':<10} {'mode':<7} {'n':>5} {'S%':>7} {'NA%':>7} "
            f"{'IDL%':>7} {'Com%':>7} {'len':>7} {'comms':>6}"
        )
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.domain:<10} {r.mode:<7} {r.n:>5} {r.success_rate:>6.1f}% "
                f"{r.na_rate:>6.1f}% {r.idl_rate:>6.1f}% {r.com_rate:>6.1f}% "
                f"{r.mean_len:>7.2f} {r.mean_comms:>6.2f}"
            )
        return "\n".join(lines)


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "cooking"
    modes: tuple[str, ...] = (MODE_LEGACY, MODE_NEW)
    start: Optional[str] = None  # None keeps the domain file's starting agent
    seed: int = 0  # recorded in outputs; generation is exhaustive, not sampled
    depth_bound: int = 128
    spec: Optional[GeneratorSpec] = None


def _load_bundle(name_or_path: str) -> ProblemBundle:
    if is_builtin(name_or_path):
        return builtin_bundle(name_or_path)
    with open(name_or_path, "r", encoding="utf-8") as fh:
        return parse(fh.read()).build()


def run_instance(
    bundle: ProblemBundle,
    instance: Instance,
    mode: str,
    depth_bound: int = 128,
) -> InstanceResult:
    problem = replace(
        bundle.problem, world=instance.world, human_belief=instance.human
    )
    config = PlannerConfig(depth_bound=depth_bound)
    try:
        policy = plan(problem, bundle.obs_model, mode, config)
    except Exception as exc:  # recorded, never aborts the sweep
        return InstanceResult(instance, mode, f"error:{type(exc).__name__}")
    report = simulate(policy, bundle.obs_model)
    return InstanceResult(
        instance,
        mode,
        report.outcome,
        n_traces=report.n_traces,
        n_success=report.n_success,
        n_na=report.n_na,
        n_idl=report.n_idl,
        communicates=bool(policy_comm_edges(policy)),
        mean_comms=report.mean_comm_count,
        mean_len=report.mean_primitive_length,
    )


def run_experiment(
    config: ExperimentConfig,
) -> tuple[MetricsTable, list[InstanceResult]]:
    bundle = _load_bundle(config.domain)
    if config.start is not None:
        bundle = bundle.with_start(config.start)
    spec = config.spec
    if spec is None:
        if config.domain not in DEFAULT_SPECS:
            raise SpecMismatch(
                f"no default generator spec for domain {config.domain!r}"
            )
        spec = DEFAULT_SPECS[config.domain]
    instances = generate_initial_states(bundle, spec)

    table = MetricsTable()
    results: list[InstanceResult] = []
    for mode in config.modes:
        row = table.row(config.domain, mode)
        for inst in instances:
            res = run_instance(bundle, inst, mode, config.depth_bound)
            results.append(res)
            row.n += 1
            row.aligned_total += inst.aligned
            if res.outcome == "success":
                row.n_success += 1
                row.aligned_success += inst.aligned
                row.n_comm += res.communicates
                row.sum_len += res.mean_len
                row.sum_comms += res.mean_comms
            elif res.outcome == "na":
                row.n_na += 1
            elif res.outcome == "idl":
                row.n_idl += 1
            else:
                row.n_error += 1
    return table, results


CSV_FIELDS = [
    "schema_version",
    "domain",
    "mode",
    "seed",
    "instance",
    "world_bits",
    "flip_bits",
    "aligned",
    "outcome",
    "n_traces",
    "n_success",
    "n_na",
    "n_idl",
    "communicates",
    "mean_comms",
    "mean_len",
]


def results_csv(config: ExperimentConfig, results: list[InstanceResult]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(
            {
                "schema_version": CSV_SCHEMA_VERSION,
                "domain": config.domain,
                "mode": r.mode,
                "seed": config.seed,
                "instance": r.instance.index,
                "world_bits": "".join(map(str, r.instance.world_bits)),
                "flip_bits": "".join(map(str, r.instance.flip_bits)),
                "aligned": int(r.instance.aligned),
                "outcome": r.outcome,
                "n_traces": r.n_traces,
                "n_success": r.n_success,
                "n_na": r.n_na,
                "n_idl": r.n_idl,
                "communicates": int(r.communicates),
                "mean_comms": f"{r.mean_comms:.6f}",
                "mean_len": f"{r.mean_len:.6f}",
            }
        )
    return buf.getvalue()
