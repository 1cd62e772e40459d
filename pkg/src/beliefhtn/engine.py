"""Belief-update protocol around each executed action.

Four channels update an agent's belief: acting (own effects), observing a
co-present agent's action (all effects, since inferrable ones are inferred
and observable ones are confirmed by the immediately following assessment),
situation assessment, and communication (handled by the communication
module).  The robot's belief is the ground truth and absorbs every effect
unconditionally.

``step_belief_protocol`` composes the channels in the fixed order used by
the planner: act/observe updates, then situation assessment for the human.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import NotApplicable
from .htn import GroundedOperator, applicable, apply, apply_effects
from .observability import ObservabilityModel
from .state import BeliefState


@dataclass(frozen=True)
class AgentModel:
    """One agent as tracked during search: identity, belief and agenda view."""

    id: str
    role: str  # "robot" | "human"
    belief: BeliefState
    plan: tuple[GroundedOperator, ...] = ()

    def with_belief(self, belief: BeliefState) -> "AgentModel":
        return replace(self, belief=belief)

    def record(self, op: GroundedOperator) -> "AgentModel":
        return replace(self, plan=self.plan + (op,))


def update_on_act(actor: AgentModel, op: GroundedOperator) -> AgentModel:
    """Actor integrates its own action's effects; everything else untouched."""
    if not applicable(op, actor.belief):
        raise NotApplicable(f"{op} not applicable in {actor.id}'s belief")
    return actor.with_belief(apply(op, actor.belief)).record(op)


def update_on_observe(
    observer: AgentModel,
    actor_id: str,
    op: GroundedOperator,
    world_before: BeliefState,
    world_after: BeliefState,
    model: ObservabilityModel,
) -> AgentModel:
    """Observer integrates the action's effects, if entitled to them.

    The robot observes everything (human moves are deterministic and the
    robot's belief is the ground truth).  The human observes only when
    co-present with the actor throughout the action, i.e. in both the pre-
    and post-state.
    """
    if observer.role == "robot":
        return observer.with_belief(apply_effects(op, observer.belief))
    if model.copresent(observer.id, actor_id, world_before) and model.copresent(
        observer.id, actor_id, world_after
    ):
        return observer.with_belief(apply_effects(op, observer.belief))
    return observer


@dataclass(frozen=True)
class StepResult:
    world: BeliefState
    human_belief: BeliefState


def step_belief_protocol(
    world: BeliefState,
    human_belief: BeliefState,
    op: GroundedOperator,
    actor_id: str,
    robot_id: str,
    human_id: str,
    model: ObservabilityModel,
) -> StepResult:
    """Run act + observe + assess for one executed action (new solver).

    The ground truth (robot belief) always receives all effects.  The human
    receives effects through acting or observing, then assesses the world
    from their new location.
    """
    world_before = world
    if actor_id == human_id:
        if not applicable(op, human_belief):
            raise NotApplicable(f"{op} not applicable in the human's belief")
        human_belief = apply_effects(op, human_belief)
        world = apply_effects(op, world)
    else:
        if not applicable(op, world):
            raise NotApplicable(f"{op} not applicable in the ground truth")
        world = apply_effects(op, world)
        human = AgentModel(human_id, "human", human_belief)
        human = update_on_observe(human, actor_id, op, world_before, world, model)
        human_belief = human.belief
    human_belief = model.assess(human_belief, world)
    return StepResult(world, human_belief)


def legacy_step(
    world: BeliefState,
    human_belief: BeliefState,
    op: GroundedOperator,
    actor_id: str,
    human_id: str,
) -> StepResult:
    """Omniscient baseline update: every belief absorbs every effect."""
    if actor_id == human_id:
        if not applicable(op, human_belief):
            raise NotApplicable(f"{op} not applicable in the human's belief")
    else:
        if not applicable(op, world):
            raise NotApplicable(f"{op} not applicable in the ground truth")
    return StepResult(apply_effects(op, world), apply_effects(op, human_belief))
