"""Two-agent alternating search over a joint task network.

Produces a policy tree: robot turns are OR nodes (one chosen action), human
turns are AND nodes branching on every emulated human choice, all of which
must lead to completion.  Decompositions are committed lazily: an agent's
choice at a node is a pair (decomposition sequence using its own methods,
one applicable primitive it owns).

Two solver modes share the machinery:

* ``new`` -- per-agent beliefs evolve through the act/observe/assess
  protocol; at every node the planner checks whether the human's belief
  divergence is relevant and, if so, splices a minimal communication
  sequence onto the outgoing edge(s).  Stalled branches fail and are
  backtracked.
* ``legacy`` -- the omniscient baseline: every effect updates both beliefs,
  no assessment, no communication, and the solver plans optimistically:
  a run of four consecutive WAIT/IDLE turns closes the branch as an
  embedded deadlock leaf instead of failing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional

from .communication import (
    CommPlan,
    apply_comm,
    apply_comm_plan,
    is_relevant_divergence,
    min_comm_bfs,
)
from .engine import legacy_step, step_belief_protocol
from .errors import DepthExceeded, StaleComm, Unsolvable
from .htn import (
    GroundedMethod,
    GroundedOperator,
    HtnProblem,
    OpKind,
    TaskNetwork,
    applicable,
    decompose,
    ground_all_operators,
    ground_method,
    idle_op,
    wait_op,
)
from .observability import ObservabilityModel
from .state import BeliefState

MODE_NEW = "new"
MODE_LEGACY = "legacy"


@dataclass(frozen=True)
class PlannerConfig:
    depth_bound: int = 64
    stall_threshold: int = 4
    max_nodes: int = 500_000
    agenda_restricted_relevance: bool = False


class NodeKind(Enum):
    DECISION = "decision"
    SUCCESS = "success"
    DEADLOCK = "deadlock"


@dataclass
class PolicyEdge:
    action: GroundedOperator
    comms: CommPlan
    decomps: tuple[tuple[int, GroundedMethod], ...]
    node_id: Optional[int]  # executed task node, None for WAIT/IDLE
    child: "PolicyNode"


@dataclass
class PolicyNode:
    world: BeliefState
    human_belief: BeliefState
    network: TaskNetwork
    turn: str
    kind: NodeKind = NodeKind.DECISION
    edges: tuple[PolicyEdge, ...] = ()

    def agendas(self, robot: str, human: str) -> dict[str, TaskNetwork]:
        """Per-agent agenda views; both agents share the joint network."""
        return {robot: self.network, human: self.network}


@dataclass
class PolicyTree:
    mode: str
    robot: str
    human: str
    init_world: BeliefState
    init_human: BeliefState
    root: PolicyNode
    nodes_expanded: int = 0


@dataclass(frozen=True)
class _Candidate:
    op: GroundedOperator
    node_id: int
    network: TaskNetwork
    decomps: tuple[tuple[int, GroundedMethod], ...]

    def signature(self) -> tuple:
        """Order-free multiset of the decompositions this choice commits."""
        return tuple(
            sorted((gm.task.symbol, gm.task.args, gm.name) for _, gm in self.decomps)
        )


def _multiset_lt(a: tuple, b: tuple) -> bool:
    """True iff multiset a is a strict sub-multiset of b."""
    if len(a) >= len(b):
        return False
    counts: dict = {}
    for item in b:
        counts[item] = counts.get(item, 0) + 1
    for item in a:
        if counts.get(item, 0) == 0:
            return False
        counts[item] -= 1
    return True


@lru_cache(maxsize=65536)
def _canonical(network: TaskNetwork) -> tuple:
    return network.canonical_key()


def _op_sort_key(c: _Candidate) -> tuple:
    return (c.op.name, c.op.args, _canonical(c.network.without_node(c.node_id)))


class _Search:
    def __init__(
        self,
        problem: HtnProblem,
        obs_model: ObservabilityModel,
        mode: str,
        config: PlannerConfig,
    ):
        if mode not in (MODE_NEW, MODE_LEGACY):
            raise ValueError(f"unknown solver mode {mode!r}")
        self.problem = problem
        self.obs = obs_model
        self.mode = mode
        self.config = config
        self.robot = problem.robot
        self.human = problem.human
        self.universe = problem.universe
        self.op_names: dict[str, frozenset[str]] = {}
        self.op_table: dict[tuple[str, str, tuple[str, ...]], GroundedOperator] = {}
        for agent, dom in problem.domains.items():
            self.op_names[agent] = dom.operator_names()
            for gop in ground_all_operators(self.universe, dom.operators):
                self.op_table[(agent, gop.name, gop.args)] = gop
        self.human_ops: tuple[GroundedOperator, ...] = tuple(
            op for key, op in sorted(self.op_table.items()) if key[0] == self.human
        )
        self.can_yield: dict[str, frozenset[str]] = {
            agent: self._yield_closure(agent) for agent in problem.domains
        }
        self.nodes_expanded = 0
        self.memo: dict[tuple, PolicyNode] = {}
        self.failed: set[tuple] = set()

    def _yield_closure(self, agent: str) -> frozenset[str]:
        """Task symbols that can lead to a primitive owned by the agent."""
        dom = self.problem.domain_of(agent)
        yields: set[str] = set(self.op_names[agent])
        changed = True
        while changed:
            changed = False
            for m in dom.methods:
                if m.task_symbol in yields:
                    continue
                if any(sym in yields for sym, _ in m.subtasks):
                    yields.add(m.task_symbol)
                    changed = True
        return frozenset(yields)

    # -- choice enumeration -------------------------------------------------

    def _choices(
        self, belief: BeliefState, network: TaskNetwork, agent: str
    ) -> list[_Candidate]:
        """All (decomposition path, applicable own primitive) choices.

        A decomposition sequence only belongs to a choice when it is needed
        to expose the chosen primitive: among candidates for the same
        grounded action, any whose committed-decomposition multiset strictly
        contains another's is dropped (gratuitous commitments of unrelated
        tasks would both multiply branches and discard the other agent's
        options).
        """
        dom = self.problem.domain_of(agent)
        results: dict[tuple, _Candidate] = {}
        visited: set[tuple] = set()
        stack: list[tuple[TaskNetwork, tuple]] = [(network, ())]
        while stack:
            w, trace = stack.pop()
            key = _canonical(w)
            if key in visited:
                continue
            visited.add(key)
            for node_id in w.available():
                task = w.task_of(node_id)
                if task.symbol in self.op_names[agent]:
                    op = self.op_table.get((agent, task.symbol, task.args))
                    if op is not None and applicable(op, belief):
                        dkey = (op.name, op.args, _canonical(w.without_node(node_id)))
                        if dkey not in results:
                            results[dkey] = _Candidate(op, node_id, w, trace)
                elif task.symbol not in self.op_names[self._other(agent)]:
                    for method in dom.methods:
                        for gm in ground_method(self.universe, method, task):
                            w2 = decompose(w, node_id, gm)
                            stack.append((w2, trace + ((node_id, gm),)))
        by_action: dict[tuple, list[_Candidate]] = {}
        for cand in results.values():
            by_action.setdefault((cand.op.name, cand.op.args), []).append(cand)
        minimal: list[_Candidate] = []
        for group in by_action.values():
            sigs = [c.signature() for c in group]
            for i, cand in enumerate(group):
                if not any(_multiset_lt(sigs[j], sigs[i]) for j in range(len(group))):
                    minimal.append(cand)
        return sorted(minimal, key=_op_sort_key)

    def _other(self, agent: str) -> str:
        return self.human if agent == self.robot else self.robot

    def _agent_has_work(self, network: TaskNetwork, agent: str) -> bool:
        return any(t.symbol in self.can_yield[agent] for _, t in network.nodes)

    # -- belief stepping ----------------------------------------------------

    def _step(
        self, world: BeliefState, human_belief: BeliefState, op: GroundedOperator, actor: str
    ) -> tuple[BeliefState, BeliefState]:
        if self.mode == MODE_NEW:
            res = step_belief_protocol(
                world, human_belief, op, actor, self.robot, self.human, self.obs
            )
        else:
            res = legacy_step(world, human_belief, op, actor, self.human)
        return res.world, res.human_belief

    # -- search -------------------------------------------------------------

    def run(self) -> PolicyTree:
        world = self.problem.world
        human_belief = self.problem.human_belief
        if self.mode == MODE_NEW:
            human_belief = self.obs.assess(human_belief, world)
        node, tainted = self._solve(
            world, human_belief, self.problem.network, self.problem.start_agent, 0, 0, frozenset()
        )
        if node is None:
            if tainted:
                raise DepthExceeded(
                    f"no policy within depth bound {self.config.depth_bound}"
                )
            raise Unsolvable("no robot strategy covers every emulated human choice")
        return PolicyTree(
            self.mode,
            self.robot,
            self.human,
            self.problem.world,
            self.problem.human_belief,
            node,
            self.nodes_expanded,
        )

    def _state_key(
        self, world: BeliefState, hb: BeliefState, network: TaskNetwork, turn: str, stall: int
    ) -> tuple:
        return (
            turn,
            world.values,
            hb.values,
            _canonical(network),
            min(stall, self.config.stall_threshold),
        )

    def _solve(
        self,
        world: BeliefState,
        human_belief: BeliefState,
        network: TaskNetwork,
        turn: str,
        depth: int,
        stall: int,
        path: frozenset,
    ) -> tuple[Optional[PolicyNode], bool]:
        """Returns (policy node or None, failure-tainted-by-pruning)."""
        self.nodes_expanded += 1
        if self.nodes_expanded > self.config.max_nodes:
            raise DepthExceeded(f"search exceeded {self.config.max_nodes} nodes")

        if network.is_empty:
            return self._terminal(world, human_belief, network, turn), False

        if stall >= self.config.stall_threshold:
            if self.mode == MODE_LEGACY:
                return (
                    PolicyNode(world, human_belief, network, turn, NodeKind.DEADLOCK),
                    False,
                )
            return None, False  # a stalled new-mode branch is a dead end

        if depth >= self.config.depth_bound:
            return None, True

        key = self._state_key(world, human_belief, network, turn, stall)
        if key in path:
            return None, True  # cycle: fail along this path only
        if key in self.memo:
            return self.memo[key], False
        if key in self.failed:
            return None, False

        comms = CommPlan()
        post_comm_belief = human_belief
        if self.mode == MODE_NEW:
            agenda, agenda_dom = None, None
            if self.config.agenda_restricted_relevance:
                agenda, agenda_dom = network, self.problem.domain_of(self.human)
            if is_relevant_divergence(world, human_belief, self.human_ops, agenda, agenda_dom):
                comms = min_comm_bfs(world, human_belief, self.human_ops, agenda, agenda_dom)
                post_comm_belief = apply_comm_plan(comms, human_belief)

        belief_for_choice = post_comm_belief if turn == self.human else world
        candidates = self._choices(belief_for_choice, network, turn)

        sub_path = path | {key}
        tainted = False

        if not candidates:
            pseudo = (
                wait_op(turn)
                if self._agent_has_work(network, turn)
                else idle_op(turn)
            )
            w2, hb2 = self._step(world, post_comm_belief, pseudo, turn)
            child, t = self._solve(
                w2, hb2, network, self._other(turn), depth + 1, stall + 1, sub_path
            )
            if child is None:
                if not t:
                    self.failed.add(key)
                return None, t
            node = PolicyNode(
                world,
                human_belief,
                network,
                turn,
                NodeKind.DECISION,
                (PolicyEdge(pseudo, comms, (), None, child),),
            )
            self.memo[key] = node
            return node, False

        if turn == self.robot:
            for cand in candidates:
                edge, t = self._try_candidate(
                    world, post_comm_belief, cand, turn, depth, sub_path, comms
                )
                tainted = tainted or t
                if edge is not None:
                    node = PolicyNode(
                        world, human_belief, network, turn, NodeKind.DECISION, (edge,)
                    )
                    self.memo[key] = node
                    return node, False
            if not tainted:
                self.failed.add(key)
            return None, tainted

        # Human turn: every emulated choice must be covered.
        edges: list[PolicyEdge] = []
        for cand in candidates:
            if self.mode == MODE_NEW and not applicable(cand.op, world):
                raise AssertionError(
                    f"emulated human action {cand.op} is belief-applicable but not "
                    "applicable in the ground truth; the relevance check should "
                    "have forced communication first"
                )
            edge, t = self._try_candidate(
                world, post_comm_belief, cand, turn, depth, sub_path, comms
            )
            if edge is None:
                tainted = tainted or t
                if not tainted:
                    self.failed.add(key)
                return None, tainted
            edges.append(edge)
        node = PolicyNode(
            world, human_belief, network, turn, NodeKind.DECISION, tuple(edges)
        )
        self.memo[key] = node
        return node, False

    def _try_candidate(
        self,
        world: BeliefState,
        belief: BeliefState,
        cand: _Candidate,
        turn: str,
        depth: int,
        path: frozenset,
        comms: CommPlan,
    ) -> tuple[Optional[PolicyEdge], bool]:
        network_after = cand.network.without_node(cand.node_id)
        w2, hb2 = self._step(world, belief, cand.op, turn)
        child, tainted = self._solve(
            w2, hb2, network_after, self._other(turn), depth + 1, 0, path
        )
        if child is None:
            return None, tainted
        return PolicyEdge(cand.op, comms, cand.decomps, cand.node_id, child), False

    def _terminal(
        self, world: BeliefState, human_belief: BeliefState, network: TaskNetwork, turn: str
    ) -> PolicyNode:
        """All work done: each agent idles once, then the success leaf."""
        other = self._other(turn)
        leaf = PolicyNode(world, human_belief, network, turn, NodeKind.SUCCESS)
        second = PolicyNode(
            world,
            human_belief,
            network,
            other,
            NodeKind.DECISION,
            (PolicyEdge(idle_op(other), CommPlan(), (), None, leaf),),
        )
        return PolicyNode(
            world,
            human_belief,
            network,
            turn,
            NodeKind.DECISION,
            (PolicyEdge(idle_op(turn), CommPlan(), (), None, second),),
        )


def emulate_human_choices(
    problem: HtnProblem,
    obs_model: ObservabilityModel,
    world: BeliefState,
    human_belief: BeliefState,
    network: TaskNetwork,
    config: PlannerConfig = PlannerConfig(),
) -> tuple[GroundedOperator, ...]:
    """Grounded human actions available as next steps of the agenda.

    All primitives reachable through the human's own decompositions and
    applicable in the human's belief; {WAIT} when the agenda still holds
    human-relevant work but nothing is applicable; {IDLE} otherwise.
    """
    search = _Search(problem, obs_model, MODE_NEW, config)
    candidates = search._choices(human_belief, network, problem.human)
    if candidates:
        out: list[GroundedOperator] = []
        for c in candidates:
            if c.op not in out:
                out.append(c.op)
        return tuple(out)
    if search._agent_has_work(network, problem.human):
        return (wait_op(problem.human),)
    return (idle_op(problem.human),)


def plan(
    problem: HtnProblem,
    obs_model: ObservabilityModel,
    mode: str = MODE_NEW,
    config: PlannerConfig = PlannerConfig(),
) -> PolicyTree:
    """Solve the joint problem under the requested solver mode."""
    return _Search(problem, obs_model, mode, config).run()


# ---------------------------------------------------------------------------
# Deadlock detection and simulation


def detect_deadlock(actions: Iterable[GroundedOperator | str]) -> bool:
    """True iff the trace stalls for four or more consecutive turns.

    Accepts operators or their kind strings; the terminal all-done IDLE
    pair of a completed plan does not count.
    """
    kinds: list[str] = []
    for a in actions:
        if isinstance(a, GroundedOperator):
            kinds.append(a.kind.value)
        else:
            kinds.append(str(a).lower())
    if len(kinds) >= 2 and kinds[-1] == "idle" and kinds[-2] == "idle":
        kinds = kinds[:-2]
    run = 0
    for k in kinds:
        if k in ("wait", "idle"):
            run += 1
            if run >= 4:
                return True
        else:
            run = 0
    return False


@dataclass
class TraceResult:
    actions: tuple[GroundedOperator, ...]
    comms: tuple = ()
    outcome: str = "success"  # "success" | "na" | "idl"
    detail: str = ""

    @property
    def primitive_length(self) -> int:
        return sum(1 for a in self.actions if a.kind is OpKind.REGULAR)


@dataclass(frozen=True)
class _SimStats:
    n_traces: int
    n_success: int
    n_na: int
    n_idl: int
    first_failure: str = ""  # "" | "na" | "idl", in walk order
    first_detail: str = ""
    sum_primitive_len: int = 0
    sum_comms: int = 0


@dataclass
class ExecutionReport:
    """Aggregated outcome of replaying every branch of a policy."""

    outcome: str  # "success" | "na" | "idl"
    detail: str
    n_traces: int
    n_success: int
    n_na: int
    n_idl: int
    mean_primitive_length: float
    mean_comm_count: float
    traces: tuple[TraceResult, ...] = ()  # populated for small policies only


_TRACE_LIMIT = 512


def simulate(
    policy: PolicyTree,
    obs_model: ObservabilityModel,
    world0: Optional[BeliefState] = None,
    human0: Optional[BeliefState] = None,
    stall_threshold: int = 4,
) -> ExecutionReport:
    """Replay every branch of a policy against the true belief protocol.

    Each prescribed action is checked against the ground truth and against
    its actor's true (protocol-evolved) belief; the first violation makes
    the trace NA.  A run of ``stall_threshold`` consecutive WAIT/IDLE
    actions before completion makes it IDL.  Communication edges are
    executed as zero-time robot actions (already-aligned facts are skipped).

    Shared policy subtrees are aggregated through a memo, so the walk is
    exhaustive over branches without materializing every action sequence;
    explicit traces are attached whenever their number stays small.
    """
    world = world0 if world0 is not None else policy.init_world
    human = human0 if human0 is not None else policy.init_human
    human = obs_model.assess(human, world)
    robot_id, human_id = policy.robot, policy.human
    memo: dict[tuple, _SimStats] = {}

    def classify_edge(
        node: PolicyNode,
        edge: PolicyEdge,
        w: BeliefState,
        h: BeliefState,
        run: int,
    ) -> tuple[str, str, Optional[tuple[BeliefState, BeliefState]], int]:
        """Check one prescribed edge; returns (verdict, detail, next state, run)."""
        for ca in edge.comms:
            try:
                h = apply_comm(ca, h)
            except StaleComm:
                pass  # already aligned in this execution
        op = edge.action
        new_run = run + 1 if op.is_pseudo else 0
        if not op.is_pseudo:
            actor_belief = w if node.turn == robot_id else h
            if not applicable(op, actor_belief):
                return (
                    "na",
                    f"{op} not applicable in {node.turn}'s belief at execution",
                    None,
                    new_run,
                )
            if not applicable(op, w):
                return "na", f"{op} not applicable in the ground truth", None, new_run
        elif not node.network.is_empty and new_run >= stall_threshold:
            return "idl", "four consecutive WAIT/IDLE turns", None, new_run
        res = step_belief_protocol(w, h, op, node.turn, robot_id, human_id, obs_model)
        return "", "", (res.world, res.human_belief), new_run

    def walk(node: PolicyNode, w: BeliefState, h: BeliefState, run: int) -> _SimStats:
        key = (id(node), w.values, h.values, min(run, stall_threshold))
        hit = memo.get(key)
        if hit is not None:
            return hit
        if node.kind is NodeKind.SUCCESS:
            stats = _SimStats(1, 1, 0, 0)
        elif node.kind is NodeKind.DEADLOCK or not node.edges:
            stats = _SimStats(1, 0, 0, 1, "idl", "plan-embedded inactivity deadlock")
        else:
            n = s = na = idl = plen = comms = 0
            first, detail = "", ""
            for edge in node.edges:
                verdict, vdetail, nxt, new_run = classify_edge(node, edge, w, h, run)
                step_len = 0 if edge.action.is_pseudo else 1
                if verdict:
                    n += 1
                    na += verdict == "na"
                    idl += verdict == "idl"
                    plen += step_len
                    comms += len(edge.comms)
                    if not first:
                        first, detail = verdict, vdetail
                    continue
                assert nxt is not None
                sub = walk(edge.child, nxt[0], nxt[1], new_run)
                n += sub.n_traces
                s += sub.n_success
                na += sub.n_na
                idl += sub.n_idl
                plen += sub.sum_primitive_len + step_len * sub.n_traces
                comms += sub.sum_comms + len(edge.comms) * sub.n_traces
                if not first and sub.first_failure:
                    first, detail = sub.first_failure, sub.first_detail
            stats = _SimStats(n, s, na, idl, first, detail, plen, comms)
        memo[key] = stats
        return stats

    stats = walk(policy.root, world, human, 0)
    outcome = stats.first_failure or "success"
    traces: tuple[TraceResult, ...] = ()
    if stats.n_traces <= _TRACE_LIMIT:
        traces = tuple(
            enumerate_traces(policy, obs_model, world, human, stall_threshold)
        )
    return ExecutionReport(
        outcome=outcome,
        detail=stats.first_detail,
        n_traces=stats.n_traces,
        n_success=stats.n_success,
        n_na=stats.n_na,
        n_idl=stats.n_idl,
        mean_primitive_length=stats.sum_primitive_len / max(stats.n_traces, 1),
        mean_comm_count=stats.sum_comms / max(stats.n_traces, 1),
        traces=traces,
    )


def enumerate_traces(
    policy: PolicyTree,
    obs_model: ObservabilityModel,
    world0: Optional[BeliefState] = None,
    human0: Optional[BeliefState] = None,
    stall_threshold: int = 4,
) -> list[TraceResult]:
    """Explicit per-branch replay; intended for small policies."""
    world = world0 if world0 is not None else policy.init_world
    human = human0 if human0 is not None else policy.init_human
    human = obs_model.assess(human, world)  # idempotent
    robot_id, human_id = policy.robot, policy.human
    out: list[TraceResult] = []

    def walk(
        node: PolicyNode,
        w: BeliefState,
        h: BeliefState,
        actions: tuple[GroundedOperator, ...],
        comms: tuple,
        run: int,
    ) -> None:
        if node.kind is NodeKind.SUCCESS:
            out.append(TraceResult(actions, comms, "success"))
            return
        if node.kind is NodeKind.DEADLOCK or not node.edges:
            out.append(
                TraceResult(actions, comms, "idl", "plan-embedded inactivity deadlock")
            )
            return
        for edge in node.edges:
            w2, h2 = w, h
            for ca in edge.comms:
                try:
                    h2 = apply_comm(ca, h2)
                except StaleComm:
                    pass
            op = edge.action
            new_run = run + 1 if op.is_pseudo else 0
            edge_comms = comms + tuple(edge.comms)
            if not op.is_pseudo:
                actor_belief = w2 if node.turn == robot_id else h2
                if not applicable(op, actor_belief):
                    out.append(
                        TraceResult(
                            actions + (op,),
                            edge_comms,
                            "na",
                            f"{op} not applicable in {node.turn}'s belief at execution",
                        )
                    )
                    continue
                if not applicable(op, w2):
                    out.append(
                        TraceResult(
                            actions + (op,),
                            edge_comms,
                            "na",
                            f"{op} not applicable in the ground truth",
                        )
                    )
                    continue
            elif not node.network.is_empty and new_run >= stall_threshold:
                out.append(
                    TraceResult(
                        actions + (op,),
                        edge_comms,
                        "idl",
                        "four consecutive WAIT/IDLE turns",
                    )
                )
                continue
            res = step_belief_protocol(w2, h2, op, node.turn, robot_id, human_id, obs_model)
            walk(edge.child, res.world, res.human_belief, actions + (op,), edge_comms, new_run)

    walk(policy.root, world, human, (), (), 0)
    return out


def policy_comm_edges(policy: PolicyTree) -> list[tuple[PolicyNode, PolicyEdge]]:
    """Every edge of the policy carrying at least one communication action."""
    seen: set[int] = set()
    out: list[tuple[PolicyNode, PolicyEdge]] = []

    def visit(node: PolicyNode) -> None:
        if id(node) in seen:
            return
        seen.add(id(node))
        for edge in node.edges:
            if edge.comms:
                out.append((node, edge))
            visit(edge.child)

    visit(policy.root)
    return out
