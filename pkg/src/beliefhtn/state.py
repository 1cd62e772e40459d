"""Typed constant universe, state-variable declarations and belief states.

A universe interns every grounded attribute to a dense index at load time,
so a belief state is a fixed-width tuple of values: comparison, hashing and
full-state diffs are all O(#attributes).  Belief states are immutable;
"mutation" is copy-and-update via :meth:`BeliefState.with_value`.

Values are always drawn from finite domains: members of a declared group,
the builtin booleans (``"true"``/``"false"``) or a bounded integer range.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import BadArgument, BadValue, UnknownAttribute, UniverseMismatch

Value = Union[str, int]

BOOL_DOMAIN: tuple[str, ...] = ("false", "true")


@dataclass(frozen=True)
class Group:
    """Named, ordered set of constant symbols."""

    name: str
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.members)) != len(self.members):
            raise BadArgument(f"group {self.name!r} has duplicate members")

    def __contains__(self, item: object) -> bool:
        return item in self.members


@dataclass(frozen=True)
class StateVariableDecl:
    """Declaration of one state-variable function.

    ``value_domain`` is the finite, ordered tuple of values the grounded
    attributes of this symbol may take.
    """

    symbol: str
    param_groups: tuple[str, ...]
    value_domain: tuple[Value, ...]

    def __post_init__(self) -> None:
        if not self.value_domain:
            raise BadValue(f"state variable {self.symbol!r} has an empty value domain")

    @property
    def arity(self) -> int:
        return len(self.param_groups)

    @property
    def is_integer(self) -> bool:
        return all(isinstance(v, int) for v in self.value_domain)


@dataclass(frozen=True)
class GroundedAttribute:
    """A fully instantiated state-variable function application."""

    symbol: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(self.args)})"


class Universe:
    """All groups and declarations of a domain, with interned attributes."""

    def __init__(self, groups: Iterable[Group], decls: Iterable[StateVariableDecl]):
        self.groups: dict[str, Group] = {}
        for g in groups:
            if g.name in self.groups:
                raise BadArgument(f"group {g.name!r} declared twice")
            self.groups[g.name] = g
        seen: dict[str, str] = {}
        for g in self.groups.values():
            for member in g.members:
                if member in seen:
                    raise BadArgument(
                        f"constant {member!r} belongs to both groups "
                        f"{seen[member]!r} and {g.name!r}"
                    )
                seen[member] = g.name
        self.group_of_constant = seen

        self.decls: dict[str, StateVariableDecl] = {}
        for d in decls:
            if d.symbol in self.decls:
                raise BadArgument(f"state variable {d.symbol!r} declared twice")
            for gname in d.param_groups:
                if gname not in self.groups:
                    raise UnknownAttribute(
                        f"state variable {d.symbol!r} uses undeclared group {gname!r}"
                    )
            self.decls[d.symbol] = d

        attrs: list[GroundedAttribute] = []
        for d in self.decls.values():
            member_lists = [self.groups[g].members for g in d.param_groups]
            for combo in itertools.product(*member_lists):
                attrs.append(GroundedAttribute(d.symbol, combo))
        self.attributes: tuple[GroundedAttribute, ...] = tuple(attrs)
        self.index: dict[GroundedAttribute, int] = {
            a: i for i, a in enumerate(self.attributes)
        }
        self.value_domains: tuple[tuple[Value, ...], ...] = tuple(
            self.decls[a.symbol].value_domain for a in self.attributes
        )

    def attr(self, symbol: str, *args: str) -> GroundedAttribute:
        """Build a validated grounded attribute."""
        a = GroundedAttribute(symbol, tuple(args))
        self.check_attr(a)
        return a

    def check_attr(self, attr: GroundedAttribute) -> None:
        decl = self.decls.get(attr.symbol)
        if decl is None:
            raise UnknownAttribute(f"unknown state variable {attr.symbol!r}")
        if len(attr.args) != decl.arity:
            raise UnknownAttribute(
                f"{attr.symbol!r} takes {decl.arity} argument(s), got {len(attr.args)}"
            )
        for arg, gname in zip(attr.args, decl.param_groups):
            if arg not in self.groups[gname]:
                raise BadArgument(
                    f"{arg!r} is not a member of group {gname!r} "
                    f"(argument of {attr.symbol!r})"
                )

    def index_of(self, attr: GroundedAttribute) -> int:
        idx = self.index.get(attr)
        if idx is None:
            self.check_attr(attr)  # raises with a precise message
            raise UnknownAttribute(f"attribute {attr} not interned")
        return idx

    def value_domain(self, attr: GroundedAttribute) -> tuple[Value, ...]:
        return self.value_domains[self.index_of(attr)]

    def check_value(self, attr: GroundedAttribute, value: Value) -> None:
        if value not in self.value_domains[self.index_of(attr)]:
            raise BadValue(
                f"{value!r} is not in the value domain of {attr} "
                f"{self.value_domains[self.index_of(attr)]}"
            )

    def __len__(self) -> int:
        return len(self.attributes)


@dataclass(frozen=True, eq=False)
class BeliefState:
    """Total assignment of values to every grounded attribute, for one agent."""

    owner: str
    universe: Universe
    values: tuple[Value, ...]

    @staticmethod
    def from_mapping(
        owner: str, universe: Universe, assignment: Mapping[GroundedAttribute, Value]
    ) -> "BeliefState":
        values: list[Value] = []
        missing: list[str] = []
        for attr in universe.attributes:
            if attr not in assignment:
                missing.append(str(attr))
                continue
            universe.check_value(attr, assignment[attr])
            values.append(assignment[attr])
        if missing:
            raise BadValue(
                "belief state is not total; missing initial values for: "
                + ", ".join(missing)
            )
        extra = [str(a) for a in assignment if a not in universe.index]
        if extra:
            raise UnknownAttribute("assignment covers undeclared attributes: " + ", ".join(extra))
        return BeliefState(owner, universe, tuple(values))

    def get(self, attr: GroundedAttribute) -> Value:
        return self.values[self.universe.index_of(attr)]

    def with_value(self, attr: GroundedAttribute, value: Value) -> "BeliefState":
        idx = self.universe.index_of(attr)
        self.universe.check_value(attr, value)
        if self.values[idx] == value:
            return self
        vals = list(self.values)
        vals[idx] = value
        return BeliefState(self.owner, self.universe, tuple(vals))

    def with_values(self, assignment: Mapping[GroundedAttribute, Value]) -> "BeliefState":
        state = self
        for attr, value in assignment.items():
            state = state.with_value(attr, value)
        return state

    def with_owner(self, owner: str) -> "BeliefState":
        return BeliefState(owner, self.universe, self.values)

    def as_dict(self) -> dict[GroundedAttribute, Value]:
        return dict(zip(self.universe.attributes, self.values))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BeliefState):
            return NotImplemented
        return self.values == other.values and self.universe is other.universe

    def __hash__(self) -> int:
        return hash(self.values)


@dataclass(frozen=True)
class DivergenceEntry:
    attr: GroundedAttribute
    robot_value: Value
    human_value: Value


@dataclass(frozen=True)
class DivergenceReport:
    """Exactly the attributes on which two beliefs disagree, in index order."""

    entries: tuple[DivergenceEntry, ...]

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def attributes(self) -> tuple[GroundedAttribute, ...]:
        return tuple(e.attr for e in self.entries)


def lookup(belief: BeliefState, attr: GroundedAttribute) -> Value:
    """Read one attribute from a belief; pure."""
    return belief.get(attr)


def diverging_attributes(robot: BeliefState, human: BeliefState) -> DivergenceReport:
    """Scan both beliefs and report every attribute with unequal values."""
    if robot.universe is not human.universe:
        raise UniverseMismatch(
            "beliefs were built from different declaration universes"
        )
    entries = tuple(
        DivergenceEntry(attr, rv, hv)
        for attr, rv, hv in zip(robot.universe.attributes, robot.values, human.values)
        if rv != hv
    )
    return DivergenceReport(entries)
