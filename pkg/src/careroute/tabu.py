"""Dual-tabu local search with violation-mediated infeasible exploration.

Each iteration first draws a violation mode that decides which constraint may
be breached, then composes the same insertion, internal, and removal stages
as the adaptive search.  Here the removal stage repairs only toward the
relaxed region of the active mode, so candidates breaching the tolerated
constraint survive and are judged by the penalized evaluation instead.

Two tabu memories steer the walk: a node list that blocks bouncing a
same-day customer straight back in or out, and a solution ring that bans
routes which violated both constraints at once.  An improved strictly
feasible solution is always taken, overriding node tabus.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .baseline import OriginalSchedule
from .instances import DerivedLimits, Instance
from .operators import VIOLATION_OPERATORS, OperatorBank
from .solution import Relax, Solution, check_feasible, violation_excess

_MODES = (Relax.TRAVEL_BUDGET, Relax.DISRUPTION_CAP)


@dataclass(frozen=True)
class PenaltyState:
    """Self-adjusting coefficient weighting constraint excess in the evaluation."""

    phi: float
    phi_min: float
    phi_max: float


def phi_eval(
    sol: Solution,
    mode: Relax,
    phi: float,
    baseline: OriginalSchedule,
    limits: DerivedLimits,
    inst: Instance,
) -> float:
    """Objective penalized by the excess of the constraint ``mode`` relaxes."""
    report = check_feasible(sol, baseline, limits, inst, relax=mode)
    if mode is Relax.TRAVEL_BUDGET:
        return sol.objective - phi * report.measure.ex_budget
    if mode is Relax.DISRUPTION_CAP:
        return sol.objective - phi * report.measure.ex_disruption
    raise ValueError("phi_eval needs an active violation mode")


def update_phi(state: PenaltyState, feasible: int, infeasible: int) -> PenaltyState:
    """Rebalance: halve after an all-feasible window, double after all-infeasible."""
    total = feasible + infeasible
    if total == 0:
        return state
    if infeasible == 0:
        phi = max(state.phi / 2.0, state.phi_min)
    elif feasible == 0:
        phi = min(state.phi * 2.0, state.phi_max)
    else:
        phi = state.phi
    return replace(state, phi=phi)


class TabuNodeList:
    """Expiry-indexed blocks on re-inserting and re-removing customers."""

    def __init__(self, alpha: float, n_new: int, rng: random.Random):
        self._base = int(alpha * n_new)
        self._rng = rng
        self.no_insert: dict[int, int] = {}
        self.no_remove: dict[int, int] = {}

    def tenure(self) -> int:
        return self._base + self._rng.randint(1, 10)

    def record_move(self, inserted, removed, iteration: int) -> None:
        for node in inserted:
            self.no_remove[node] = iteration + self.tenure()
        for node in removed:
            self.no_insert[node] = iteration + self.tenure()

    def blocks(self, inserted, removed, iteration: int) -> bool:
        for node in inserted:
            if self.no_insert.get(node, 0) > iteration:
                return True
        for node in removed:
            if self.no_remove.get(node, 0) > iteration:
                return True
        return False


class TabuSolutionList:
    """Ring of route fingerprints barred from re-acceptance while resident."""

    def __init__(self, tenure: int):
        self._tenure = max(1, tenure)
        self._ring: list[int] = []
        self._members: set[int] = set()

    def add(self, fingerprint: int) -> None:
        if fingerprint in self._members:
            return
        self._ring.append(fingerprint)
        self._members.add(fingerprint)
        while len(self._ring) > self._tenure:
            gone = self._ring.pop(0)
            self._members.discard(gone)

    def __contains__(self, fingerprint: int) -> bool:
        return fingerprint in self._members


def route_fingerprint(sol: Solution) -> int:
    """Orientation-free hash: a route and its reversal collide on purpose."""
    route = sol.route
    if len(route) > 3 and route[-2] < route[1]:
        route = route[::-1]
    return hash(route)


def make_violation_bank() -> OperatorBank:
    return OperatorBank(VIOLATION_OPERATORS)


def ts_run(
    start: Solution,
    inst: Instance,
    baseline: OriginalSchedule,
    limits: DerivedLimits,
    banks: dict[str, OperatorBank],
    config,
    rng: random.Random,
    violation_bank: OperatorBank | None = None,
    trace: list | None = None,
) -> tuple[Solution, Solution]:
    """Refine ``start`` for ``config.ts_iterations`` iterations.

    Returns the best strictly feasible solution and the final conditional
    incumbent; callers normally keep only the feasible one.
    """
    from .alns import compose_move

    report = check_feasible(start, baseline, limits, inst)
    if not report.feasible:
        raise ValueError("tabu search must start from a feasible solution")
    if violation_bank is None:
        violation_bank = make_violation_bank()

    best = start           # strictly feasible incumbent
    conditional = start    # incumbent under the penalized evaluation
    conditional_excess = (0.0, 0.0)
    node_tabu = TabuNodeList(config.tenure_alpha, inst.n_new, rng)
    solution_tabu = TabuSolutionList(config.population_size)
    penalty = PenaltyState(config.phi_initial, config.phi_min, config.phi_max)
    window_feasible = 0
    window_infeasible = 0

    def excess_of(sol: Solution) -> tuple[float, float]:
        return violation_excess(sol, baseline, limits, inst)

    for it in range(1, config.ts_iterations + 1):
        v_idx = violation_bank.select(rng)
        mode = _MODES[v_idx]
        if mode is Relax.TRAVEL_BUDGET:
            # budget may be breached, the disruption cap may not
            repair_when = lambda ex: ex[1] > 0.0
        else:
            repair_when = lambda ex: ex[0] > 0.0

        base = best if best.objective >= conditional.objective else conditional

        cand, applied, excess = compose_move(
            base, inst, banks, rng, config, excess_of, repair_when
        )

        if applied:
            for bank, idx in applied:
                bank.count_use(idx)
            violation_bank.count_use(v_idx)

            ex_budget, ex_disruption = excess
            strictly_feasible = ex_budget == 0.0 and ex_disruption == 0.0
            if strictly_feasible:
                window_feasible += 1
            else:
                window_infeasible += 1

            base_new = base.visited_new(inst)
            cand_new = cand.visited_new(inst)
            inserted = cand_new - base_new
            removed = base_new - cand_new

            if strictly_feasible and cand.objective > best.objective:
                # aspiration: an improved feasible solution overrides node tabus
                best = cand
                if cand.objective > conditional.objective:
                    conditional = cand
                    conditional_excess = excess
                for bank, idx in applied:
                    bank.reward(idx, config.ts_score_best)
                node_tabu.record_move(inserted, removed, it)
                verdict = "best"
            elif route_fingerprint(cand) in solution_tabu or node_tabu.blocks(
                inserted, removed, it
            ):
                verdict = "tabu"
            else:
                side = 0 if mode is Relax.TRAVEL_BUDGET else 1
                cond_ok = excess[1 - side] == 0.0
                phi_cand = cand.objective - penalty.phi * excess[side]
                phi_inc = (
                    conditional.objective - penalty.phi * conditional_excess[side]
                )
                if cond_ok and phi_cand > phi_inc:
                    conditional = cand
                    conditional_excess = excess
                    for bank, idx in applied:
                        bank.reward(idx, config.ts_score_conditional)
                    violation_bank.reward(v_idx, config.ts_score_conditional)
                    node_tabu.record_move(inserted, removed, it)
                    verdict = "conditional"
                else:
                    for bank, idx in applied:
                        bank.reward(idx, config.ts_score_fail)
                    violation_bank.reward(v_idx, config.ts_score_fail)
                    if ex_budget > 0.0 and ex_disruption > 0.0:
                        # only routes failing both constraints enter the ring
                        solution_tabu.add(route_fingerprint(cand))
                    verdict = "rejected"

            if trace is not None:
                active = excess[0] if mode is Relax.TRAVEL_BUDGET else excess[1]
                trace.append(
                    (it, mode.value, penalty.phi, cand.objective,
                     cand.objective - penalty.phi * active, verdict)
                )

        if it % config.weight_period == 0:
            for bank in banks.values():
                bank.refresh(config.evaporation)
        if it % config.penalty_period == 0:
            penalty = update_phi(penalty, window_feasible, window_infeasible)
            window_feasible = window_infeasible = 0
            violation_bank.refresh(config.evaporation)

    return best, conditional
