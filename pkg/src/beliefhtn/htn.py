"""Operators, methods, task networks and decomposition.

Operators carry conjunctions of equality preconditions and unconditional
effects.  Effects on bounded-integer attributes may also be increments or
decrements; these saturate at the domain bounds so that observers applying
an action's effects to an already-diverged belief stay inside the domain.

Task networks are immutable: decomposition returns a new network with fresh
node ids, re-targeting every precedence constraint that touched the expanded
node onto all of the method's subtasks (or contracting it through the node
for an empty expansion).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import (
    BadArgument,
    BadValue,
    CycleIntroduced,
    NotApplicable,
    NotRelevant,
)
from .state import BeliefState, GroundedAttribute, Universe, Value


class OpKind(Enum):
    REGULAR = "regular"
    IDLE = "idle"
    WAIT = "wait"
    COMMUNICATION = "communication"


@dataclass(frozen=True)
class Term:
    """Either a variable (``?x``) or a constant symbol in a schema."""

    name: str

    @property
    def is_var(self) -> bool:
        return self.name.startswith("?")

    def __str__(self) -> str:
        return self.name


def _substitute(term: Term, binding: Mapping[str, str]) -> str:
    if term.is_var:
        if term.name not in binding:
            raise BadArgument(f"unbound variable {term.name}")
        return binding[term.name]
    return term.name


@dataclass(frozen=True)
class Test:
    """Precondition: grounded attribute equals a value."""

    symbol: str
    args: tuple[Term, ...]
    value: Term


class EffectOp(Enum):
    SET = "set"
    INC = "inc"
    DEC = "dec"


@dataclass(frozen=True)
class Effect:
    symbol: str
    args: tuple[Term, ...]
    op: EffectOp
    value: Term | int  # Term for SET, int delta for INC/DEC


@dataclass(frozen=True)
class OperatorSchema:
    """Lifted operator, owned by one agent."""

    name: str
    agent: str
    params: tuple[tuple[str, str], ...] = ()  # (?var, group)
    pre: tuple[Test, ...] = ()
    eff: tuple[Effect, ...] = ()
    kind: OpKind = OpKind.REGULAR

    def __post_init__(self) -> None:
        if self.kind in (OpKind.IDLE, OpKind.WAIT) and (self.pre or self.eff):
            raise BadArgument(f"{self.kind.value} operators must have empty pre/eff")


@dataclass(frozen=True)
class GroundedOperator:
    """Fully instantiated operator; pre/eff reference interned attributes."""

    name: str
    agent: str
    args: tuple[str, ...]
    kind: OpKind
    pre: tuple[tuple[GroundedAttribute, Value], ...]
    eff: tuple[tuple[GroundedAttribute, EffectOp, Value | int], ...]

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(self.args)})"

    @property
    def is_pseudo(self) -> bool:
        return self.kind in (OpKind.IDLE, OpKind.WAIT)


def idle_op(agent: str) -> GroundedOperator:
    return GroundedOperator("IDLE", agent, (), OpKind.IDLE, (), ())


def wait_op(agent: str) -> GroundedOperator:
    return GroundedOperator("WAIT", agent, (), OpKind.WAIT, (), ())


def _parse_value_term(universe: Universe, attr: GroundedAttribute, token: str) -> Value:
    """Interpret a constant token against an attribute's value domain."""
    domain = universe.value_domain(attr)
    if token in domain:
        return token
    try:
        as_int = int(token)
    except ValueError:
        as_int = None
    if as_int is not None and as_int in domain:
        return as_int
    raise BadValue(f"{token!r} is not in the value domain of {attr}")


def ground_operator(
    universe: Universe, schema: OperatorSchema, binding: Mapping[str, str]
) -> GroundedOperator:
    args = tuple(binding[var] for var, _ in schema.params)
    pre: list[tuple[GroundedAttribute, Value]] = []
    for test in schema.pre:
        attr = universe.attr(
            test.symbol, *(_substitute(t, binding) for t in test.args)
        )
        value_token = _substitute(test.value, binding)
        pre.append((attr, _parse_value_term(universe, attr, value_token)))
    eff: list[tuple[GroundedAttribute, EffectOp, Value | int]] = []
    seen_eff: set[GroundedAttribute] = set()
    for effect in schema.eff:
        attr = universe.attr(
            effect.symbol, *(_substitute(t, binding) for t in effect.args)
        )
        if attr in seen_eff:
            raise BadArgument(f"operator {schema.name} assigns {attr} twice")
        seen_eff.add(attr)
        if effect.op is EffectOp.SET:
            assert isinstance(effect.value, Term)
            value_token = _substitute(effect.value, binding)
            eff.append((attr, EffectOp.SET, _parse_value_term(universe, attr, value_token)))
        else:
            if not universe.decls[attr.symbol].is_integer:
                raise BadArgument(
                    f"increment effect on non-integer attribute {attr}"
                )
            assert isinstance(effect.value, int)
            eff.append((attr, effect.op, effect.value))
    return GroundedOperator(schema.name, schema.agent, args, schema.kind, tuple(pre), tuple(eff))


def ground_all_operators(
    universe: Universe, schemas: Iterable[OperatorSchema]
) -> tuple[GroundedOperator, ...]:
    """Every grounding of every schema, in deterministic lexical order."""
    grounded: list[GroundedOperator] = []
    for schema in schemas:
        member_lists = [universe.groups[g].members for _, g in schema.params]
        for combo in itertools.product(*member_lists):
            binding = {var: const for (var, _), const in zip(schema.params, combo)}
            grounded.append(ground_operator(universe, schema, binding))
    grounded.sort(key=lambda op: (op.name, op.args))
    return tuple(grounded)


def applicable(op: GroundedOperator, belief: BeliefState) -> bool:
    """True iff every precondition equality holds in the belief."""
    return all(belief.get(attr) == value for attr, value in op.pre)


def apply(op: GroundedOperator, state: BeliefState) -> BeliefState:
    """Apply the operator's effects; the input state is unchanged."""
    if not applicable(op, state):
        raise NotApplicable(f"{op} is not applicable in {state.owner}'s belief")
    return apply_effects(op, state)


def apply_effects(op: GroundedOperator, state: BeliefState) -> BeliefState:
    """Rewrite exactly the effect-touched attributes (no precondition check).

    Used by observation channels, where an observer integrates an action's
    effects into a belief the action was not checked against.
    """
    new = state
    for attr, eop, value in op.eff:
        if eop is EffectOp.SET:
            new = new.with_value(attr, value)
        else:
            domain = state.universe.value_domain(attr)
            lo, hi = domain[0], domain[-1]
            current = new.get(attr)
            assert isinstance(current, int) and isinstance(value, int)
            delta = value if eop is EffectOp.INC else -value
            new = new.with_value(attr, min(hi, max(lo, current + delta)))
    return new


# ---------------------------------------------------------------------------
# Tasks, methods, networks


@dataclass(frozen=True)
class TaskInstance:
    symbol: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(self.args)})"


@dataclass(frozen=True)
class MethodSchema:
    """Decomposition rule: a non-primitive task expands into a sub-network."""

    name: str
    task_symbol: str
    task_params: tuple[tuple[str, str], ...] = ()  # typed vars of the task head
    free_params: tuple[tuple[str, str], ...] = ()  # extra method variables
    subtasks: tuple[tuple[str, tuple[Term, ...]], ...] = ()
    order: tuple[tuple[int, int], ...] = ()  # indices into subtasks

    def __post_init__(self) -> None:
        n = len(self.subtasks)
        for i, j in self.order:
            if not (0 <= i < n and 0 <= j < n):
                raise BadArgument(f"method {self.name}: ordering index out of range")
        if _has_cycle_pairs(range(n), self.order):
            raise CycleIntroduced(f"method {self.name}: subtask ordering is cyclic")


@dataclass(frozen=True)
class GroundedMethod:
    name: str
    task: TaskInstance
    subtasks: tuple[TaskInstance, ...]
    order: tuple[tuple[int, int], ...]

    def __str__(self) -> str:
        return f"{self.name}<{self.task}>"


def _has_cycle_pairs(nodes: Iterable[int], pairs: Iterable[tuple[int, int]]) -> bool:
    succs: dict[int, list[int]] = {n: [] for n in nodes}
    indeg: dict[int, int] = {n: 0 for n in succs}
    for i, j in pairs:
        succs[i].append(j)
        indeg[j] += 1
    queue = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        n = queue.pop()
        seen += 1
        for m in succs[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    return seen != len(indeg)


def unify_task(method: MethodSchema, task: TaskInstance) -> Optional[dict[str, str]]:
    """Bind the method's task-head parameters against a task instance."""
    if method.task_symbol != task.symbol:
        return None
    if len(method.task_params) != len(task.args):
        return None
    binding: dict[str, str] = {}
    for (var, group), arg in zip(method.task_params, task.args):
        if var in binding and binding[var] != arg:
            return None
        binding[var] = arg
    return binding


def ground_method(
    universe: Universe, method: MethodSchema, task: TaskInstance
) -> tuple[GroundedMethod, ...]:
    """All groundings of a method relevant for a task, in lexical order."""
    base = unify_task(method, task)
    if base is None:
        return ()
    # Validate head-parameter types.
    for (var, group), arg in zip(method.task_params, task.args):
        if arg not in universe.groups[group]:
            return ()
    out: list[GroundedMethod] = []
    free = [(v, g) for v, g in method.free_params if v not in base]
    member_lists = [universe.groups[g].members for _, g in free]
    for combo in itertools.product(*member_lists):
        binding = dict(base)
        binding.update({var: const for (var, _), const in zip(free, combo)})
        subtasks = tuple(
            TaskInstance(sym, tuple(_substitute(t, binding) for t in args))
            for sym, args in method.subtasks
        )
        out.append(GroundedMethod(method.name, task, subtasks, method.order))
    return tuple(out)


@dataclass(frozen=True)
class TaskNetwork:
    """Partially ordered multiset of task nodes; immutable."""

    nodes: tuple[tuple[int, TaskInstance], ...]  # sorted by node id
    constraints: frozenset[tuple[int, int]]  # (before, after) node ids
    next_id: int = 0

    @staticmethod
    def build(tasks: Iterable[TaskInstance], order: Iterable[tuple[int, int]] = ()) -> "TaskNetwork":
        nodes = tuple(enumerate(tasks))
        ids = {i for i, _ in nodes}
        constraints = frozenset((a, b) for a, b in order)
        for a, b in constraints:
            if a not in ids or b not in ids:
                raise BadArgument("ordering references unknown task node")
        if _has_cycle_pairs(ids, constraints):
            raise CycleIntroduced("initial task network ordering is cyclic")
        return TaskNetwork(nodes, constraints, len(nodes))

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    def task_of(self, node_id: int) -> TaskInstance:
        for i, t in self.nodes:
            if i == node_id:
                return t
        raise BadArgument(f"no task node {node_id}")

    def available(self) -> tuple[int, ...]:
        """Nodes with no pending predecessor, in id order."""
        blocked = {b for _, b in self.constraints}
        return tuple(i for i, _ in self.nodes if i not in blocked)

    def without_node(self, node_id: int) -> "TaskNetwork":
        """Remove an executed node; its ordering edges dissolve."""
        nodes = tuple((i, t) for i, t in self.nodes if i != node_id)
        constraints = frozenset(
            (a, b) for a, b in self.constraints if a != node_id and b != node_id
        )
        return TaskNetwork(nodes, constraints, self.next_id)

    def canonical_key(self) -> tuple:
        """Id-free structural key; isomorphic networks share keys.

        Two refinement rounds over (task, predecessor/successor label
        multisets) distinguish every network shape arising from acyclic
        decomposition hierarchies of practical size.
        """
        labels: dict[int, tuple] = {i: (str(t),) for i, t in self.nodes}
        preds: dict[int, list[int]] = {i: [] for i, _ in self.nodes}
        succs: dict[int, list[int]] = {i: [] for i, _ in self.nodes}
        for a, b in self.constraints:
            preds[b].append(a)
            succs[a].append(b)
        for _ in range(2):
            labels = {
                i: (
                    labels[i],
                    tuple(sorted(labels[p] for p in preds[i])),
                    tuple(sorted(labels[s] for s in succs[i])),
                )
                for i, _ in self.nodes
            }
        return tuple(sorted(labels.values()))


def decompose(w: TaskNetwork, node_id: int, m: GroundedMethod) -> TaskNetwork:
    """Replace a task node with a grounded method's sub-network.

    Every precedence constraint that referenced the node is re-targeted to
    all of the method's subtasks; with zero subtasks the constraint is
    contracted through the node (predecessors stay before successors).
    """
    task = w.task_of(node_id)
    if m.task != task:
        raise NotRelevant(f"method {m.name} does not decompose {task}")
    new_ids = tuple(range(w.next_id, w.next_id + len(m.subtasks)))
    nodes = tuple((i, t) for i, t in w.nodes if i != node_id) + tuple(
        zip(new_ids, m.subtasks)
    )
    constraints: set[tuple[int, int]] = set()
    preds = [a for a, b in w.constraints if b == node_id]
    succs = [b for a, b in w.constraints if a == node_id]
    for a, b in w.constraints:
        if node_id in (a, b):
            continue
        constraints.add((a, b))
    if m.subtasks:
        for p in preds:
            constraints.update((p, n) for n in new_ids)
        for s in succs:
            constraints.update((n, s) for n in new_ids)
    else:
        constraints.update((p, s) for p in preds for s in succs)
    constraints.update((new_ids[i], new_ids[j]) for i, j in m.order)
    if _has_cycle_pairs([i for i, _ in nodes], constraints):
        raise CycleIntroduced(f"decomposing {task} by {m.name} created a cycle")
    return TaskNetwork(tuple(sorted(nodes)), frozenset(constraints), w.next_id + len(m.subtasks))


@dataclass(frozen=True)
class AgentDomain:
    """One agent's operators and methods."""

    agent: str
    operators: tuple[OperatorSchema, ...]
    methods: tuple[MethodSchema, ...]

    def operator_names(self) -> frozenset[str]:
        return frozenset(o.name for o in self.operators)


@dataclass(frozen=True)
class HtnProblem:
    """Initial beliefs, shared initial network, and per-agent domains."""

    universe: Universe
    world: BeliefState  # ground truth == robot belief
    human_belief: BeliefState
    network: TaskNetwork
    domains: Mapping[str, AgentDomain]
    robot: str
    human: str
    start_agent: str

    def domain_of(self, agent: str) -> AgentDomain:
        return self.domains[agent]


def is_primitive(w: TaskNetwork, domains: Mapping[str, AgentDomain]) -> bool:
    op_names = frozenset().union(*(d.operator_names() for d in domains.values()))
    return all(t.symbol in op_names for _, t in w.nodes)


def enumerate_decompositions(
    w: TaskNetwork, universe: Universe, domain: AgentDomain
) -> tuple[tuple[int, GroundedMethod], ...]:
    """All (available non-primitive node, relevant grounded method) pairs."""
    op_names = domain.operator_names()
    pairs: list[tuple[int, GroundedMethod]] = []
    for node_id in w.available():
        task = w.task_of(node_id)
        if task.symbol in op_names:
            continue
        for method in domain.methods:
            pairs.extend((node_id, gm) for gm in ground_method(universe, method, task))
    return tuple(pairs)
