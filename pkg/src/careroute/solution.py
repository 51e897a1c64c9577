"""Solution representation: evaluation, feasibility, and solution distance."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .baseline import OriginalSchedule
from .instances import Instance, NodeKind

# Comparison tolerance at constraint boundaries; arithmetic itself is exact.
BOUNDARY_TOL = 1e-9


class Relax(Enum):
    """Which constraint, if any, a feasibility check is allowed to ignore."""

    NONE = "none"
    TRAVEL_BUDGET = "travel_budget"
    DISRUPTION_CAP = "disruption_cap"


class Verdict(Enum):
    FEASIBLE = "feasible"
    CONDITIONALLY_FEASIBLE = "conditionally_feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Solution:
    """A depot-anchored route plus the rejected same-day customers.

    Value-like and never mutated; operators build new routes and re-evaluate.
    ``arrivals`` holds the forward-propagated visit time of every node on the
    route interior (travel time equals distance, service time is zero).
    """

    route: tuple[int, ...]
    rejected: frozenset[int]
    arrivals: dict[int, float]
    length: float
    objective: float

    @property
    def visited(self) -> frozenset[int]:
        return frozenset(self.route[1:-1])

    def visited_new(self, inst: Instance) -> frozenset[int]:
        first_new = inst.n_existing + 1
        return frozenset(v for v in self.route[1:-1] if v >= first_new)

    def serialize(self) -> str:
        route = ",".join(str(v) for v in self.route)
        rejected = ",".join(str(v) for v in sorted(self.rejected))
        return (
            f"route={route}; rejected={rejected}; "
            f"obj={self.objective:.6f}; len={self.length:.6f}"
        )


@dataclass(frozen=True)
class ViolationMeasure:
    """How far a solution overshoots the travel budget and disruption cap.

    ``ex_budget`` is the raw excess travel time; ``ex_disruption`` sums the
    payments of existing customers whose arrival deviates beyond the cap.
    """

    ex_budget: float
    ex_disruption: float


@dataclass(frozen=True)
class FeasibilityReport:
    measure: ViolationMeasure
    verdict: Verdict

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE

    @property
    def acceptable(self) -> bool:
        return self.verdict is not Verdict.INFEASIBLE


def evaluate(route, inst: Instance) -> Solution:
    """Populate arrivals, length, and objective for a route.

    The route must start and end at the depot and visit every existing
    customer exactly once; new customers missing from it are the rejected
    set.  Objective is total payment collected minus the rejection penalty.
    """
    route = tuple(route)
    if len(route) < 2 or route[0] != 0 or route[-1] != 0:
        raise ValueError("route must start and end at the depot (node 0)")
    interior = route[1:-1]
    seen = set()
    for v in interior:
        if v <= 0 or v >= inst.n_nodes:
            raise ValueError(f"route visits unknown node {v}")
        if v in seen:
            raise ValueError(f"route visits node {v} twice")
        seen.add(v)
    missing = [v for v in inst.existing_ids if v not in seen]
    if missing:
        raise ValueError(f"route misses existing customers {missing}")
    return evaluate_unchecked(route, inst)


def evaluate_unchecked(route: tuple[int, ...], inst: Instance) -> Solution:
    """Evaluation without structural validation, for operator-built routes.

    Move operators only splice, drop, or reorder interior nodes of an already
    valid route, so re-validating every candidate would dominate the search.
    """
    rows = inst.dist_rows
    payments = inst.payments
    arrivals: dict[int, float] = {}
    t = 0.0
    prev = 0
    payment = 0.0
    for v in route[1:-1]:
        t += rows[prev][v]
        arrivals[v] = t
        payment += payments[v]
        prev = v
    length = t + rows[prev][0]

    rejected = inst.new_id_set - arrivals.keys()
    objective = payment - inst.rejection_cost * len(rejected)
    return Solution(
        route=route,
        rejected=rejected,
        arrivals=arrivals,
        length=length,
        objective=objective,
    )


def disruption(sol: Solution, baseline: OriginalSchedule) -> dict[int, float]:
    """Absolute arrival-time deviation per existing customer."""
    out = {}
    for node, promised in baseline.promised.items():
        if node not in sol.arrivals:
            raise ValueError(f"existing customer {node} missing from solution")
        out[node] = abs(sol.arrivals[node] - promised)
    return out


def check_feasible(
    sol: Solution,
    baseline: OriginalSchedule,
    limits,
    inst: Instance,
    relax: Relax = Relax.NONE,
) -> FeasibilityReport:
    """Violation measures plus a verdict under an optional relaxation.

    Fully compliant solutions are Feasible regardless of ``relax``.  With a
    relaxation active, a solution violating only the relaxed constraint is
    ConditionallyFeasible; anything else is Infeasible.
    """
    ex_budget = sol.length - limits.t_max
    if ex_budget <= BOUNDARY_TOL:
        ex_budget = 0.0
    cap = limits.disruption_cap
    ex_disruption = 0.0
    arrivals = sol.arrivals
    nodes = inst.nodes
    for node, promised in baseline.promised.items():
        delta = arrivals[node] - promised
        if delta > cap + BOUNDARY_TOL or -delta > cap + BOUNDARY_TOL:
            ex_disruption += nodes[node].payment
    measure = ViolationMeasure(float(ex_budget), float(ex_disruption))

    budget_ok = measure.ex_budget == 0.0
    cap_ok = measure.ex_disruption == 0.0
    if budget_ok and cap_ok:
        verdict = Verdict.FEASIBLE
    elif relax is Relax.TRAVEL_BUDGET and cap_ok:
        verdict = Verdict.CONDITIONALLY_FEASIBLE
    elif relax is Relax.DISRUPTION_CAP and budget_ok:
        verdict = Verdict.CONDITIONALLY_FEASIBLE
    else:
        verdict = Verdict.INFEASIBLE
    return FeasibilityReport(measure=measure, verdict=verdict)


def violation_excess(
    sol: Solution, baseline: OriginalSchedule, limits, inst: Instance
) -> tuple[float, float]:
    """(budget excess, disruption excess) without report packaging; hot path."""
    ex_budget = sol.length - limits.t_max
    if ex_budget <= BOUNDARY_TOL:
        ex_budget = 0.0
    cap = limits.disruption_cap + BOUNDARY_TOL
    ex_disruption = 0.0
    arrivals = sol.arrivals
    payments = inst.payments
    for node, promised in baseline.promised.items():
        delta = arrivals[node] - promised
        if delta > cap or -delta > cap:
            ex_disruption += payments[node]
    return ex_budget, ex_disruption


def _arc_set(route: tuple[int, ...]) -> frozenset[frozenset[int]]:
    return frozenset(frozenset((a, b)) for a, b in zip(route, route[1:]))


def solution_distance(a: Solution, b: Solution) -> int:
    """Dissimilarity of two solutions over the same instance.

    Counts the symmetric difference of visited sets plus the broken arcs of
    the shorter route (arcs unordered, so a route and its reversal coincide).
    Taking the smaller of the two one-sided arc differences keeps the measure
    symmetric while matching the broken-pairs count when lengths agree.
    """
    visited_diff = len(a.visited ^ b.visited)
    arcs_a = _arc_set(a.route)
    arcs_b = _arc_set(b.route)
    broken = min(len(arcs_a - arcs_b), len(arcs_b - arcs_a))
    return visited_diff + broken
