"""Communication actions, divergence relevance, and minimal alignment search.

A communication action transmits one attribute-value pair from the robot to
the human; its preconditions require the sender to hold the value and the
receiver to disagree.  A divergence is *relevant* when it changes which
actions the human can perform, or what some performable action would do.
When relevant, a breadth-first search over single-attribute alignments finds
a minimum-cardinality sequence of communication actions after which the
remaining divergence is no longer relevant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import NoAlignment, StaleComm
from .htn import GroundedOperator, TaskNetwork, applicable, apply_effects
from .state import BeliefState, GroundedAttribute, Value, diverging_attributes


@dataclass(frozen=True)
class CommAction:
    """Robot-to-human transmission of one ground-truth attribute value."""

    sender: str
    receiver: str
    attr: GroundedAttribute
    value: Value

    def __str__(self) -> str:
        return f"tell({self.attr}, {self.value})"


@dataclass(frozen=True)
class CommPlan:
    actions: tuple[CommAction, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


def build_comm_action(
    world: BeliefState, human_belief: BeliefState, attr: GroundedAttribute
) -> CommAction:
    value = world.get(attr)
    if human_belief.get(attr) == value:
        raise StaleComm(f"receiver already believes {attr} = {value}")
    return CommAction(world.owner, human_belief.owner, attr, value)


def apply_comm(ca: CommAction, receiver_belief: BeliefState) -> BeliefState:
    """Receiver adopts the communicated value; nothing else changes."""
    if receiver_belief.get(ca.attr) == ca.value:
        raise StaleComm(f"receiver already believes {ca.attr} = {ca.value}")
    return receiver_belief.with_value(ca.attr, ca.value)


def apply_comm_plan(plan: CommPlan, receiver_belief: BeliefState) -> BeliefState:
    belief = receiver_belief
    for ca in plan:
        belief = apply_comm(ca, belief)
    return belief


def _reachable_symbols(
    network: TaskNetwork, domain, universe
) -> frozenset[str]:
    """Operator symbols the agenda can still call for (transitively)."""
    op_names = domain.operator_names()
    seen: set[str] = set()
    frontier = [t.symbol for _, t in network.nodes]
    methods_by_task: dict[str, list] = {}
    for m in domain.methods:
        methods_by_task.setdefault(m.task_symbol, []).append(m)
    while frontier:
        sym = frontier.pop()
        if sym in seen:
            continue
        seen.add(sym)
        for m in methods_by_task.get(sym, []):
            for sub_sym, _ in m.subtasks:
                if sub_sym not in seen:
                    frontier.append(sub_sym)
    return frozenset(s for s in seen if s in op_names)


def is_relevant_divergence(
    world: BeliefState,
    human_belief: BeliefState,
    human_ops: Sequence[GroundedOperator],
    agenda: Optional[TaskNetwork] = None,
    agenda_domain=None,
) -> bool:
    """True iff the divergence changes the human's options or their outcomes.

    (a) the sets of human actions applicable under the two beliefs differ, or
    (b) some action applicable under both yields different values on its
    effect-touched attributes when applied to each belief.

    By default every grounded human operator is considered (a safe,
    myopic over-approximation); passing ``agenda`` + ``agenda_domain``
    restricts the check to operators the remaining agenda can still reach.
    """
    if world.values == human_belief.values:
        return False
    ops: Iterable[GroundedOperator] = human_ops
    if agenda is not None and agenda_domain is not None:
        reachable = _reachable_symbols(agenda, agenda_domain, world.universe)
        ops = [op for op in human_ops if op.name in reachable]
    for op in ops:
        if op.is_pseudo:
            continue
        in_belief = applicable(op, human_belief)
        in_world = applicable(op, world)
        if in_belief != in_world:
            return True
        if in_belief and in_world and op.eff:
            after_belief = apply_effects(op, human_belief)
            after_world = apply_effects(op, world)
            for attr, _, _ in op.eff:
                if after_belief.get(attr) != after_world.get(attr):
                    return True
    return False


def min_comm_bfs(
    world: BeliefState,
    human_belief: BeliefState,
    human_ops: Sequence[GroundedOperator],
    agenda: Optional[TaskNetwork] = None,
    agenda_domain=None,
) -> CommPlan:
    """Minimum-cardinality communication sequence removing relevance.

    Breadth-first search over belief states: the source is the human's
    current belief, each communication action aligns exactly one diverging
    attribute with the ground truth, and the first belief selected for
    expansion whose remaining divergence is no longer relevant wins; the
    actions on its path are the plan.  Diverging attributes expand in
    interned-index order and visited states are pruned by their
    aligned-attribute subset, so the result is deterministic.  Full
    alignment always removes relevance, so the search cannot fail.
    """
    report = diverging_attributes(world, human_belief)
    divergent = list(report.attributes)  # already in interned index order
    queue: deque[tuple[BeliefState, tuple[int, ...]]] = deque([(human_belief, ())])
    visited: set[frozenset[int]] = {frozenset()}
    while queue:
        belief, aligned = queue.popleft()
        if not is_relevant_divergence(world, belief, human_ops, agenda, agenda_domain):
            actions = tuple(
                CommAction(
                    world.owner, human_belief.owner, divergent[i], world.get(divergent[i])
                )
                for i in aligned
            )
            return CommPlan(actions)
        for i in range(len(divergent)):
            if i in aligned:
                continue
            key = frozenset(aligned) | {i}
            if key in visited:
                continue
            visited.add(key)
            next_belief = belief.with_value(divergent[i], world.get(divergent[i]))
            queue.append((next_belief, aligned + (i,)))
    raise NoAlignment(
        "full alignment failed to remove relevance; this cannot happen"
    )  # pragma: no cover
