"""Optimal tour over the pre-scheduled customers and the promised visit times."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instances import Instance

EXACT_NODE_LIMIT = 15   # subset DP stays well under a second up to here
EXACT_HARD_LIMIT = 20   # memory guard: 2^n states explode beyond this


@dataclass(frozen=True)
class OriginalSchedule:
    """The baseline tour over existing customers, frozen for a whole run.

    ``promised`` maps each existing customer to its arrival time under the
    baseline; disruption of any rescheduled plan is measured against these.
    """

    route: tuple[int, ...]
    promised: dict[int, float]
    length: float


def _tour_length(route: list[int], dist: np.ndarray) -> float:
    total = 0.0
    for a, b in zip(route, route[1:]):
        total += dist[a, b]
    return float(total)


def _orient(route: list[int]) -> list[int]:
    # Between a tour and its reversal, keep the one whose second node has the
    # smaller id so promised times are deterministic.
    if len(route) > 3 and route[-2] < route[1]:
        inner = route[1:-1]
        route = [0] + inner[::-1] + [0]
    return route


def _held_karp(ids: list[int], dist: np.ndarray) -> tuple[list[int], float]:
    """Exact depot-anchored tour by dynamic programming over subsets."""
    k = len(ids)
    full = 1 << k
    d0 = np.array([dist[0, v] for v in ids])
    dd = np.array([[dist[a, b] for b in ids] for a in ids])
    INF = np.inf
    cost = np.full((full, k), INF)
    parent = np.full((full, k), -1, dtype=np.int32)
    for j in range(k):
        cost[1 << j, j] = d0[j]
    for mask in range(1, full):
        row = cost[mask]
        finite = np.nonzero(np.isfinite(row))[0]
        if finite.size == 0:
            continue
        for j in range(k):
            bit = 1 << j
            if mask & bit:
                continue
            cand = row[finite] + dd[finite, j]
            best = int(np.argmin(cand))
            nxt = mask | bit
            if cand[best] < cost[nxt, j]:
                cost[nxt, j] = cand[best]
                parent[nxt, j] = finite[best]
    last_mask = full - 1
    totals = cost[last_mask] + d0
    end = int(np.argmin(totals))
    length = float(totals[end])
    order = []
    mask, j = last_mask, end
    while j >= 0:
        order.append(ids[j])
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    order.reverse()
    return [0] + order + [0], length


def _nearest_neighbor(ids: list[int], dist: np.ndarray) -> list[int]:
    remaining = set(ids)
    route = [0]
    cur = 0
    while remaining:
        nxt = min(remaining, key=lambda v: (dist[cur, v], v))
        route.append(nxt)
        remaining.discard(nxt)
        cur = nxt
    route.append(0)
    return route


def _two_opt_descent(route: list[int], dist: np.ndarray) -> list[int]:
    """Repeat best-improvement 2-opt moves until none improves the tour."""
    improved = True
    while improved:
        improved = False
        m = len(route) - 1
        best_delta = -1e-12
        best_move = None
        for i in range(m - 1):
            a, b = route[i], route[i + 1]
            for j in range(i + 2, m):
                c, e = route[j], route[j + 1]
                delta = dist[a, c] + dist[b, e] - dist[a, b] - dist[c, e]
                if delta < best_delta:
                    best_delta = delta
                    best_move = (i, j)
        if best_move is not None:
            i, j = best_move
            route[i + 1 : j + 1] = route[i + 1 : j + 1][::-1]
            improved = True
    return route


def solve_tsp(
    node_ids, inst: Instance, mode: str = "auto"
) -> tuple[tuple[int, ...], float]:
    """Depot-anchored tour over ``node_ids``.

    ``exact`` runs subset dynamic programming and is provably optimal;
    ``heuristic`` runs nearest neighbor polished by 2-opt descent; ``auto``
    picks exact for at most EXACT_NODE_LIMIT nodes.  Ties between a tour and
    its reversal break toward the smaller second node id, so results are
    deterministic.
    """
    ids = sorted(node_ids)
    if not ids:
        raise ValueError("node_ids must be non-empty")
    if 0 in ids:
        raise ValueError("node_ids must not include the depot")
    if mode not in ("exact", "heuristic", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and len(ids) > EXACT_HARD_LIMIT:
        raise ValueError(
            f"exact mode limited to {EXACT_HARD_LIMIT} nodes, got {len(ids)}"
        )
    if mode == "auto":
        mode = "exact" if len(ids) <= EXACT_NODE_LIMIT else "heuristic"

    if len(ids) == 1:
        v = ids[0]
        return (0, v, 0), float(inst.dist[0, v] * 2)

    if mode == "exact":
        route, length = _held_karp(ids, inst.dist)
    else:
        route = _two_opt_descent(_nearest_neighbor(ids, inst.dist), inst.dist)
        length = _tour_length(route, inst.dist)
    route = _orient(route)
    return tuple(route), length


def build_original_schedule(inst: Instance, mode: str = "auto") -> OriginalSchedule:
    """Tour the existing customers optimally and fix their promised times."""
    if inst.n_existing < 1:
        raise ValueError("need at least one existing customer")
    route, length = solve_tsp(list(inst.existing_ids), inst, mode=mode)
    promised = {}
    t = 0.0
    for a, b in zip(route, route[1:]):
        t += inst.dist[a, b]
        if b != 0:
            promised[b] = float(t)
    return OriginalSchedule(route=route, promised=promised, length=length)
