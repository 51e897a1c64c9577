"""Exhaustive reference optimum for small instances.

Walks the accepted-customer subsets in descending objective order and, for
each, searches depth-first for any ordering that respects the travel budget
and every promised-time window.  The first subset with a feasible ordering is
optimal, because the objective depends only on which customers are served.

The arithmetic here is deliberately self-contained (its own time propagation,
no Solution machinery) so it can stand as an independent check against both
the heuristic engines and the exported optimization models.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .baseline import OriginalSchedule
from .instances import DerivedLimits, Instance

ORACLE_NODE_LIMIT = 12
_TOL = 1e-9


@dataclass(frozen=True)
class OracleResult:
    objective: float
    route: tuple[int, ...]
    rejected: tuple[int, ...]


def _feasible_order(
    nodes: list[int],
    inst: Instance,
    promised: dict[int, float],
    t_max: float,
    cap: float,
) -> tuple[int, ...] | None:
    """Depth-first search for any constraint-respecting visiting order."""
    dist = inst.dist
    n_existing = inst.n_existing

    def extend(prefix: list[int], elapsed: float, remaining: list[int]):
        last = prefix[-1]
        if not remaining:
            if elapsed + dist[last, 0] <= t_max + _TOL:
                return prefix + [0]
            return None
        for idx, node in enumerate(remaining):
            t = elapsed + dist[last, node]
            if t > t_max + _TOL:
                continue
            if node <= n_existing and abs(t - promised[node]) > cap + _TOL:
                continue
            found = extend(
                prefix + [node], t, remaining[:idx] + remaining[idx + 1 :]
            )
            if found is not None:
                return found
        return None

    found = extend([0], 0.0, nodes)
    return tuple(found) if found is not None else None


def exhaustive_optimum(
    inst: Instance, baseline: OriginalSchedule, limits: DerivedLimits
) -> OracleResult:
    """Provably optimal objective for instances of at most 12 customers."""
    n_customers = inst.n_existing + inst.n_new
    if n_customers > ORACLE_NODE_LIMIT:
        raise ValueError(
            f"exhaustive search limited to {ORACLE_NODE_LIMIT} customers, "
            f"got {n_customers}"
        )
    existing = list(inst.existing_ids)
    new_ids = list(inst.new_ids)
    r = inst.rejection_cost
    existing_pay = sum(inst.nodes[v].payment for v in existing)

    subsets = []
    for size in range(len(new_ids) + 1):
        for chosen in combinations(new_ids, size):
            obj = (
                existing_pay
                + sum(inst.nodes[v].payment for v in chosen)
                - r * (len(new_ids) - len(chosen))
            )
            subsets.append((obj, chosen))
    subsets.sort(key=lambda item: (-item[0], item[1]))

    for obj, chosen in subsets:
        order = _feasible_order(
            existing + list(chosen),
            inst,
            baseline.promised,
            limits.t_max,
            limits.disruption_cap,
        )
        if order is not None:
            rejected = tuple(v for v in new_ids if v not in chosen)
            return OracleResult(objective=obj, route=order, rejected=rejected)
    raise ValueError(
        "no feasible plan exists: the travel budget cannot cover the "
        "existing customers"
    )
