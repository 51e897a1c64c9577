"""Route move operators: insertions, internal reorderings, and removals.

Every operator is a pure transformation: given a solution it returns a new
evaluated Solution, or None when it has nothing to do (no unvisited customer,
no removable customer, or no improving internal move).  Engines interpret a
None as a no-op that earns neither score nor usage.

All ties break deterministically: equal insertion increments or removal
scores go to the lower node id then the earlier arc, and equal internal
moves to the lexicographically smallest resulting route.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .instances import Instance
from .solution import Solution, evaluate_unchecked

_IMPROVE_TOL = 1e-12


# ---------------------------------------------------------------------------
# operator bank

@dataclass
class OperatorBank:
    """Adaptive weights, accumulated scores, and usage counts for one group."""

    names: tuple[str, ...]
    weights: list[float] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    times: list[int] = field(default_factory=list)

    def __post_init__(self):
        k = len(self.names)
        if not self.weights:
            self.weights = [1.0] * k
        if not self.scores:
            self.scores = [0.0] * k
        if not self.times:
            self.times = [0] * k

    def probabilities(self) -> list[float]:
        total = sum(self.weights)
        if total <= 0:
            raise ValueError("operator bank has no positive weight")
        return [w / total for w in self.weights]

    def select(self, rng: random.Random) -> int:
        weights = self.weights
        total = sum(weights)
        if total <= 0:
            raise ValueError("operator bank has no positive weight")
        pick = rng.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if pick < acc:
                return i
        return len(weights) - 1

    def reward(self, index: int, score: float) -> None:
        self.scores[index] += score

    def count_use(self, index: int) -> None:
        self.times[index] += 1

    def refresh(self, rho: float) -> None:
        """Fold accumulated scores into the weights, then reset the period."""
        for i in range(len(self.names)):
            self.weights[i] = update_weight(
                self.weights[i], rho, self.scores[i], self.times[i]
            )
            self.scores[i] = 0.0
            self.times[i] = 0


def update_weight(weight: float, rho: float, score: float, times: int) -> float:
    """Evaporate an unused operator's weight, otherwise blend in its score rate."""
    if times == 0:
        return weight * rho
    return weight * (1.0 - rho) + (score * rho) / times


# ---------------------------------------------------------------------------
# shared helpers

def _insert_at(route: tuple[int, ...], node: int, arc: int) -> tuple[int, ...]:
    return route[: arc + 1] + (node,) + route[arc + 1 :]


def _cheapest_arc_for(node: int, route: tuple[int, ...], rows) -> int:
    """Earliest arc with the smallest splice-in increment for one node."""
    node_row = rows[node]
    best_arc = 0
    best_delta = float("inf")
    prev = route[0]
    prev_row = rows[prev]
    for arc, nxt in enumerate(route[1:]):
        delta = node_row[prev] + node_row[nxt] - prev_row[nxt]
        if delta < best_delta - _IMPROVE_TOL:
            best_delta = delta
            best_arc = arc
        prev = nxt
        prev_row = rows[prev]
    return best_arc


@lru_cache(maxsize=128)
def _upper_mask(m: int) -> np.ndarray:
    mask = np.triu(np.ones((m, m), dtype=bool), k=2)
    mask.setflags(write=False)
    return mask


# ---------------------------------------------------------------------------
# insertion operators

def payment_prioritized_insertion(
    sol: Solution, inst: Instance, rng: random.Random, p_random: float
) -> Solution | None:
    """Insert the richest unvisited customer at its cheapest position.

    With probability ``p_random`` a uniformly random unvisited customer is
    inserted instead, still at its own cheapest position.
    """
    unvisited = sorted(sol.rejected)
    if not unvisited:
        return None
    if rng.random() < p_random:
        node = rng.choice(unvisited)
    else:
        node = min(unvisited, key=lambda v: (-inst.payments[v], v))
    arc = _cheapest_arc_for(node, sol.route, inst.dist_rows)
    return evaluate_unchecked(_insert_at(sol.route, node, arc), inst)


def restricted_shortest_insertion(
    sol: Solution, inst: Instance, rng: random.Random, p_random: float
) -> Solution | None:
    """Insert the (node, arc) pair with the globally smallest length increase."""
    unvisited = sorted(sol.rejected)
    if not unvisited:
        return None
    route = sol.route
    if rng.random() < p_random:
        node = rng.choice(unvisited)
        arc = _cheapest_arc_for(node, route, inst.dist_rows)
        return evaluate_unchecked(_insert_at(route, node, arc), inst)
    dist = inst.dist
    r = np.fromiter(route, dtype=np.intp)
    block = dist[np.fromiter(unvisited, dtype=np.intp)][:, r]
    deltas = block[:, :-1] + block[:, 1:] - dist[r[:-1], r[1:]][None, :]
    flat = int(np.argmin(deltas))  # row-major: lower node id first, then arc
    node = unvisited[flat // deltas.shape[1]]
    arc = flat % deltas.shape[1]
    return evaluate_unchecked(_insert_at(route, node, arc), inst)


def disturbed_shortest_insertion(
    sol: Solution,
    inst: Instance,
    rng: random.Random,
    p_random: float,
    perturbation: float,
) -> Solution | None:
    """Insert a random unvisited customer on the (noisily) shortest arc.

    The shortest arc's length is nudged by ``U = L * u * r`` with r drawn
    uniform on (-1, 1); when the nudge lifts it past another arc, the other
    arc is broken instead.  With probability ``p_random`` the arc is chosen
    uniformly at random.
    """
    unvisited = sorted(sol.rejected)
    if not unvisited:
        return None
    node = rng.choice(unvisited)
    route = sol.route
    n_arcs = len(route) - 1
    if rng.random() < p_random:
        arc = rng.randrange(n_arcs)
    else:
        rows = inst.dist_rows
        lengths = [rows[a][b] for a, b in zip(route, route[1:])]
        shortest = min(range(n_arcs), key=lambda i: (lengths[i], i))
        lengths[shortest] += (
            lengths[shortest] * perturbation * rng.uniform(-1.0, 1.0)
        )
        arc = min(range(n_arcs), key=lambda i: (lengths[i], i))
    return evaluate_unchecked(_insert_at(route, node, arc), inst)


def best_position_insertion(
    sol: Solution, inst: Instance, rng: random.Random, p_random: float
) -> Solution | None:
    """Ablation insertion: a random unvisited customer at its cheapest position."""
    unvisited = sorted(sol.rejected)
    if not unvisited:
        return None
    node = rng.choice(unvisited)
    arc = _cheapest_arc_for(node, sol.route, inst.dist_rows)
    return evaluate_unchecked(_insert_at(sol.route, node, arc), inst)


# ---------------------------------------------------------------------------
# internal operators

def _best_or_tie(
    candidates: list[tuple[float, tuple[int, ...]]]
) -> tuple[int, ...] | None:
    """Pick the strictly improving move; ties resolve to the smallest route."""
    best_delta = -_IMPROVE_TOL
    best_route = None
    for delta, route in candidates:
        if delta < best_delta - _IMPROVE_TOL:
            best_delta = delta
            best_route = route
        elif best_route is not None and abs(delta - best_delta) <= _IMPROVE_TOL:
            if route < best_route:
                best_route = route
    return best_route


# numpy's per-call overhead beats python loops only once routes get long
_VECTOR_MIN_ARCS = 16


def _memoized(sol: Solution, inst: Instance, key: str):
    cached = sol.__dict__.get(key)
    if cached is not None and cached[0] is inst:
        return cached[1]
    return _MISS


_MISS = object()


def _memoize(sol: Solution, inst: Instance, key: str, result):
    # Solutions are immutable and internal moves are rng-free, so the best
    # move per (solution, instance) never changes; saturated search phases
    # re-scan the same incumbent thousands of times
    sol.__dict__[key] = (inst, result)
    return result


def two_opt(sol: Solution, inst: Instance) -> Solution | None:
    """Apply the single best 2-opt move; None when no move shortens the route."""
    cached = _memoized(sol, inst, "_two_opt")
    if cached is not _MISS:
        return cached
    route = sol.route
    m = len(route) - 1
    if m < 3:
        return _memoize(sol, inst, "_two_opt", None)

    best = -_IMPROVE_TOL
    moves: list[tuple[float, int, int]] = []
    if m < _VECTOR_MIN_ARCS:
        rows = inst.dist_rows
        for i in range(m - 1):
            a, b = route[i], route[i + 1]
            row_a = rows[a]
            row_b = rows[b]
            w_i = row_a[b]
            for j in range(i + 2, m):
                c, e = route[j], route[j + 1]
                delta = row_a[c] + row_b[e] - w_i - rows[c][e]
                if delta < best - _IMPROVE_TOL:
                    best = delta
                    moves = [(delta, i, j)]
                elif moves and delta <= best + _IMPROVE_TOL:
                    moves.append((delta, i, j))
    else:
        r = np.fromiter(route, dtype=np.intp)
        sub = inst.dist[r][:, r]  # distances indexed by route position
        w = sub.diagonal(1)
        delta = sub[:-1, :-1] + sub[1:, 1:] - w[:, None] - w[None, :]
        delta = np.where(_upper_mask(m), delta, np.inf)
        low = float(delta.min())
        if low < -_IMPROVE_TOL:
            best = low
            moves = [
                (float(delta[i, j]), int(i), int(j))
                for i, j in np.argwhere(delta <= low + _IMPROVE_TOL)
            ]
    if not moves:
        return _memoize(sol, inst, "_two_opt", None)
    candidates = [
        (d, route[: i + 1] + route[i + 1 : j + 1][::-1] + route[j + 1 :])
        for d, i, j in moves
    ]
    chosen = _best_or_tie(candidates)
    out = evaluate_unchecked(chosen, inst) if chosen is not None else None
    return _memoize(sol, inst, "_two_opt", out)


def or_opt(sol: Solution, inst: Instance) -> Solution | None:
    """Relocate the best chain of 1..3 consecutive nodes, order preserved."""
    route = sol.route
    m = len(route) - 1  # number of arcs
    if m < 3:
        return None
    r = np.fromiter(route, dtype=np.intp)
    sub = inst.dist[r][:, r]
    w = sub.diagonal(1)
    # every (start, length) chain over all three lengths, batched in one scan;
    # the symmetric distance matrix lets cost rows come from chain-start rows
    starts_parts, ends_parts = [], []
    for chain_len in (1, 2, 3):
        last_start = m - chain_len
        if last_start < 1:
            break
        part = np.arange(1, last_start + 1)
        starts_parts.append(part)
        ends_parts.append(part + chain_len - 1)
    if not starts_parts:
        return None
    starts = np.concatenate(starts_parts)
    ends = np.concatenate(ends_parts)
    gains = w[starts - 1] + w[ends] - sub[starts - 1, ends + 1]
    delta = sub[starts, :m] + sub[ends, 1:] - w[None, :] - gains[:, None]
    # arcs overlapping the removed chain (including its two boundary arcs)
    # are not insertion targets; re-inserting at the bridge is a no-move
    arc_idx = np.arange(m)[None, :]
    invalid = (arc_idx >= (starts - 1)[:, None]) & (arc_idx <= ends[:, None])
    delta[invalid] = np.inf
    low = float(delta.min())
    if low >= -_IMPROVE_TOL:
        return None
    ties: list[tuple[float, tuple[int, ...]]] = []
    for ci, p in np.argwhere(delta <= low + _IMPROVE_TOL):
        s = int(starts[ci])
        chain_len = int(ends[ci]) - s + 1
        p = int(p)
        chain = route[s : s + chain_len]
        rest = route[:s] + route[s + chain_len :]
        pos = p + 1 if p <= s - 2 else p - chain_len + 1
        new_route = rest[:pos] + chain + rest[pos:]
        ties.append((float(delta[ci, p]), new_route))
    chosen = _best_or_tie(ties)
    return evaluate_unchecked(chosen, inst) if chosen is not None else None


# ---------------------------------------------------------------------------
# removal operators

def _removal_increments(sol: Solution, inst: Instance) -> list[tuple[int, float]]:
    """Travel-time increment each visited new customer adds to the route."""
    route = sol.route
    first_new = inst.n_existing + 1
    rows = inst.dist_rows
    out = []
    for pos in range(1, len(route) - 1):
        v = route[pos]
        if v >= first_new:
            a, b = route[pos - 1], route[pos + 1]
            out.append((v, rows[a][v] + rows[v][b] - rows[a][b]))
    return out


def _remove_node(route: tuple[int, ...], node: int) -> tuple[int, ...]:
    return tuple(v for v in route if v != node)


def ratio_removal(sol: Solution, inst: Instance) -> Solution | None:
    """Drop the visited new customer with the worst payment-per-detour ratio."""
    increments = _removal_increments(sol, inst)
    if not increments:
        return None
    payments = inst.payments

    def ratio(item):
        node, inc = item
        if inc <= _IMPROVE_TOL:
            return float("inf")  # free rider: removing it saves nothing
        return payments[node] / inc

    node, _ = min(increments, key=lambda it: (ratio(it), it[0]))
    return evaluate_unchecked(_remove_node(sol.route, node), inst)


def longest_removal(sol: Solution, inst: Instance) -> Solution | None:
    """Drop the visited new customer adding the most travel time."""
    increments = _removal_increments(sol, inst)
    if not increments:
        return None
    node, _ = min(increments, key=lambda it: (-it[1], it[0]))
    return evaluate_unchecked(_remove_node(sol.route, node), inst)


# ---------------------------------------------------------------------------
# groups exposed to the engines

INSERTION_OPERATORS: tuple[str, ...] = (
    "payment_prioritized_insertion",
    "restricted_shortest_insertion",
    "disturbed_shortest_insertion",
)
INTERNAL_OPERATORS: tuple[str, ...] = ("two_opt", "or_opt")
REMOVAL_OPERATORS: tuple[str, ...] = ("ratio_removal", "longest_removal")
VIOLATION_OPERATORS: tuple[str, ...] = ("travel_budget", "disruption_cap")


def apply_insertion(
    name: str,
    sol: Solution,
    inst: Instance,
    rng: random.Random,
    p_random: float,
    perturbation: float,
) -> Solution | None:
    if name == "payment_prioritized_insertion":
        return payment_prioritized_insertion(sol, inst, rng, p_random)
    if name == "restricted_shortest_insertion":
        return restricted_shortest_insertion(sol, inst, rng, p_random)
    if name == "disturbed_shortest_insertion":
        return disturbed_shortest_insertion(sol, inst, rng, p_random, perturbation)
    if name == "best_position_insertion":
        return best_position_insertion(sol, inst, rng, p_random)
    raise ValueError(f"unknown insertion operator {name!r}")


def apply_internal(name: str, sol: Solution, inst: Instance) -> Solution | None:
    if name == "two_opt":
        return two_opt(sol, inst)
    if name == "or_opt":
        return or_opt(sol, inst)
    raise ValueError(f"unknown internal operator {name!r}")


def apply_removal(name: str, sol: Solution, inst: Instance) -> Solution | None:
    if name == "ratio_removal":
        return ratio_removal(sol, inst)
    if name == "longest_removal":
        return longest_removal(sol, inst)
    raise ValueError(f"unknown removal operator {name!r}")
