"""Problem instances: nodes, distances, and the derived route limits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np


class NodeKind(Enum):
    DEPOT = "depot"
    EXISTING = "existing"
    NEW = "new"


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float
    payment: float
    kind: NodeKind


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable routing instance over one depot plus two customer tiers.

    Node ids are positional: 0 is the depot, 1..n_existing are the
    pre-scheduled customers, and the following n_new ids are the same-day
    requests.  ``dist`` is the full symmetric Euclidean matrix.
    """

    name: str
    nodes: tuple[Node, ...]
    n_existing: int
    n_new: int
    rejection_cost: float
    dist: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def existing_ids(self) -> range:
        return range(1, self.n_existing + 1)

    @property
    def new_ids(self) -> range:
        return range(self.n_existing + 1, self.n_existing + self.n_new + 1)

    @property
    def customer_ids(self) -> range:
        return range(1, self.n_existing + self.n_new + 1)

    def distance(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def payment(self, i: int) -> float:
        return self.nodes[i].payment

    @cached_property
    def dist_rows(self) -> list[list[float]]:
        # plain nested lists: scalar lookups in hot loops beat ndarray indexing
        return self.dist.tolist()

    @cached_property
    def payments(self) -> tuple[float, ...]:
        return tuple(n.payment for n in self.nodes)

    @cached_property
    def new_id_set(self) -> frozenset[int]:
        return frozenset(self.new_ids)


@dataclass(frozen=True)
class DerivedLimits:
    """Travel budget and per-customer disruption cap for one parameterisation."""

    t_max: float
    disruption_cap: float
    tsp_baseline: float
    avg_path: float


def _distance_matrix(nodes: tuple[Node, ...]) -> np.ndarray:
    xy = np.array([[n.x, n.y] for n in nodes], dtype=np.float64)
    diff = xy[:, None, :] - xy[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def build_instance(
    points: list[tuple[float, float, float]],
    n_existing: int,
    n_new: int,
    rejection_cost: float | None = None,
    name: str = "instance",
) -> Instance:
    """Assemble an instance from (x, y, payment) triples, depot first.

    The depot's payment is forced to 0.  When ``rejection_cost`` is None it
    defaults to the mean payment over the new customers, which keeps the
    rejection penalty commensurate with what a rejected visit would earn.
    """
    if n_existing < 0 or n_new < 0:
        raise ValueError("customer counts must be non-negative")
    if len(points) < 1 + n_existing + n_new:
        raise ValueError(
            f"need {1 + n_existing + n_new} points for {n_existing} existing "
            f"+ {n_new} new customers, got {len(points)}"
        )
    nodes = []
    for idx, (x, y, score) in enumerate(points[: 1 + n_existing + n_new]):
        if idx == 0:
            kind, payment = NodeKind.DEPOT, 0.0
        elif idx <= n_existing:
            kind, payment = NodeKind.EXISTING, float(score)
        else:
            kind, payment = NodeKind.NEW, float(score)
        if payment < 0:
            raise ValueError(f"node {idx} has negative payment {payment}")
        nodes.append(Node(idx, float(x), float(y), payment, kind))
    nodes = tuple(nodes)
    if rejection_cost is None:
        new_pay = [n.payment for n in nodes if n.kind is NodeKind.NEW]
        rejection_cost = sum(new_pay) / len(new_pay) if new_pay else 0.0
    if rejection_cost < 0:
        raise ValueError("rejection cost must be non-negative")
    return Instance(
        name=name,
        nodes=nodes,
        n_existing=n_existing,
        n_new=n_new,
        rejection_cost=float(rejection_cost),
        dist=_distance_matrix(nodes),
    )


def parse_instance(
    text: str,
    n_existing: int,
    n_new: int,
    rejection_cost: float | None = None,
    name: str = "instance",
) -> Instance:
    """Parse benchmark text in the orienteering distribution format.

    Header lines beginning with a letter are skipped; every other non-empty
    line must read ``x y score``.  The first data line is the depot, the next
    ``n_existing`` lines become existing customers in file order, the
    ``n_new`` after them become new customers, and any remaining lines are
    ignored.  The positional split keeps adapted instances reproducible
    without shipping new files.
    """
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line[0].isalpha():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'x y score', got {raw!r}")
        try:
            x, y, score = (float(p) for p in parts)
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field in {raw!r}") from None
        if score < 0:
            raise ValueError(f"line {lineno}: negative score {score}")
        points.append((x, y, score))
    needed = 1 + n_existing + n_new
    if len(points) < needed:
        raise ValueError(
            f"file holds {len(points)} data lines but {needed} nodes requested"
        )
    return build_instance(points, n_existing, n_new, rejection_cost, name=name)


def load_instance(
    path: str,
    n_existing: int,
    n_new: int,
    rejection_cost: float | None = None,
) -> Instance:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    import os

    stem = os.path.splitext(os.path.basename(path))[0]
    return parse_instance(text, n_existing, n_new, rejection_cost, name=stem)


def average_pair_distance(inst: Instance) -> float:
    """Mean Euclidean distance over all ordered node pairs.

    On a complete Euclidean graph the shortest path between two nodes is the
    direct edge, so this equals the average shortest path length.
    """
    n = inst.n_nodes
    if n < 2:
        return 0.0
    total = float(inst.dist.sum())  # diagonal contributes zero
    return total / (n * (n - 1))


def compute_limits(
    inst: Instance, mu: float, lam: float, tsp_baseline: float
) -> DerivedLimits:
    """Scale the travel budget and disruption cap from instance geometry.

    ``t_max = mu * tsp_baseline`` where the baseline is the optimal (or
    near-optimal) tour length over all customers, and the disruption cap is
    ``lam`` times the average shortest path length of the graph.
    """
    if mu <= 0 or lam <= 0:
        raise ValueError("mu and lambda must be positive")
    if tsp_baseline <= 0:
        raise ValueError("tsp_baseline must be positive")
    avg_path = average_pair_distance(inst)
    return DerivedLimits(
        t_max=mu * tsp_baseline,
        disruption_cap=lam * avg_path,
        tsp_baseline=tsp_baseline,
        avg_path=avg_path,
    )


def euclidean(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
