"""Adaptive large neighborhood search: builds the initial population.

Each iteration composes one insertion, one internal, and one removal operator
into a single candidate move.  Insertion and internal reordering always get a
chance to act; the removal step is the repair stage and fires only when the
candidate after reordering still breaks a constraint.  Without that guard a
mandatory removal would undo every insertion and the search could never grow
a route beyond the seed.  Candidates are kept only when strictly feasible;
infeasible exploration belongs to the tabu stage, not here.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

from .baseline import OriginalSchedule
from .instances import DerivedLimits, Instance
from .operators import (
    INSERTION_OPERATORS,
    INTERNAL_OPERATORS,
    REMOVAL_OPERATORS,
    OperatorBank,
    apply_insertion,
    apply_internal,
    apply_removal,
)
from .solution import Solution, check_feasible, violation_excess


@dataclass(frozen=True)
class SaState:
    """Simulated-annealing acceptance state with reheating."""

    temperature: float
    t_init: float
    t_min: float
    cooling: float


def make_sa_state(seed_objective: float, config) -> SaState:
    # Objective-scale-relative start keeps acceptance behaviour comparable
    # across instances of very different payment magnitudes.
    t_init = config.sa_init_scale * abs(seed_objective) + 1.0
    return SaState(
        temperature=t_init,
        t_init=t_init,
        t_min=t_init / config.sa_min_ratio,
        cooling=config.sa_cooling,
    )


def sa_accept(
    delta_f: float, sa: SaState, rng: random.Random
) -> tuple[bool, SaState]:
    """Metropolis test for a candidate worse by ``delta_f`` (maximization).

    The temperature cools on every call and reheats to its initial value once
    it drops below the minimum threshold.
    """
    if sa.temperature <= 0:
        raise ValueError("temperature must be positive")
    accept = delta_f <= 0 or rng.random() < math.exp(-delta_f / sa.temperature)
    temp = sa.temperature * sa.cooling
    if temp < sa.t_min:
        temp = sa.t_init
    return accept, replace(sa, temperature=temp)


def select_operator(bank: OperatorBank, rng: random.Random) -> int:
    """Roulette-wheel draw proportional to the bank weights."""
    return bank.select(rng)


def make_move_banks(insertion_names=None) -> dict[str, OperatorBank]:
    return {
        "insertion": OperatorBank(tuple(insertion_names or INSERTION_OPERATORS)),
        "internal": OperatorBank(INTERNAL_OPERATORS),
        "removal": OperatorBank(REMOVAL_OPERATORS),
    }


def compose_move(
    sol: Solution,
    inst: Instance,
    banks: dict[str, OperatorBank],
    rng: random.Random,
    config,
    excess_of,
    repair_when,
) -> tuple[Solution, list[tuple[OperatorBank, int]], tuple[float, float]]:
    """Apply insertion, internal, then (conditionally) removal to ``sol``.

    The removal stage is the repair step: it fires only when ``repair_when``
    says the candidate after reordering still breaks a constraint it must not.
    Returns the candidate, the (bank, index) pairs of operators that actually
    changed the route, and the candidate's final violation excesses.
    """
    applied: list[tuple[OperatorBank, int]] = []
    cand = sol

    bank = banks["insertion"]
    idx = bank.select(rng)
    out = apply_insertion(
        bank.names[idx], cand, inst, rng,
        config.random_insert_prob, config.perturbation,
    )
    if out is not None:
        cand = out
        applied.append((bank, idx))

    bank = banks["internal"]
    idx = bank.select(rng)
    out = apply_internal(bank.names[idx], cand, inst)
    if out is not None:
        cand = out
        applied.append((bank, idx))

    excess = excess_of(cand)
    if repair_when(excess):
        bank = banks["removal"]
        idx = bank.select(rng)
        out = apply_removal(bank.names[idx], cand, inst)
        if out is not None:
            cand = out
            applied.append((bank, idx))
            excess = excess_of(cand)

    return cand, applied, excess


def alns_run(
    seed_solution: Solution,
    inst: Instance,
    baseline: OriginalSchedule,
    limits: DerivedLimits,
    config,
    rng: random.Random,
    banks: dict[str, OperatorBank] | None = None,
    trace: list | None = None,
) -> tuple[Solution, dict[str, OperatorBank]]:
    """Run the adaptive search for ``config.alns_iterations`` iterations.

    Returns the best strictly feasible solution found together with the final
    operator banks.  Scores follow the shared-increment rule: every operator
    that contributed to an iteration's candidate receives the same reward.
    """
    report = check_feasible(seed_solution, baseline, limits, inst)
    if not report.feasible:
        raise ValueError("ALNS seed solution is infeasible")
    if banks is None:
        banks = make_move_banks(getattr(config, "insertion_operators", None))

    current = seed_solution
    best = seed_solution
    sa = make_sa_state(seed_solution.objective, config)

    def excess_of(cand: Solution) -> tuple[float, float]:
        return violation_excess(cand, baseline, limits, inst)

    def any_breach(excess: tuple[float, float]) -> bool:
        return excess[0] > 0.0 or excess[1] > 0.0

    for it in range(1, config.alns_iterations + 1):
        cand, applied, excess = compose_move(
            current, inst, banks, rng, config, excess_of, any_breach
        )
        accepted = False
        if applied:
            for bank, idx in applied:
                bank.count_use(idx)
            if not any_breach(excess):
                if cand.objective > current.objective:
                    current = cand
                    accepted = True
                    if cand.objective > best.objective:
                        best = cand
                        score = config.score_best
                    else:
                        score = config.score_better
                    for bank, idx in applied:
                        bank.reward(idx, score)
                else:
                    ok, sa = sa_accept(
                        current.objective - cand.objective, sa, rng
                    )
                    if ok:
                        current = cand
                        accepted = True
                        for bank, idx in applied:
                            bank.reward(idx, config.score_accept)
        if trace is not None:
            triple = "+".join(b.names[i] for b, i in applied) or "noop"
            trace.append((it, triple, cand.objective, accepted, sa.temperature))
        if it % config.weight_period == 0:
            for bank in banks.values():
                bank.refresh(config.evaporation)
    return best, banks


def build_population(
    seed_solution: Solution,
    size: int,
    inst: Instance,
    baseline: OriginalSchedule,
    limits: DerivedLimits,
    config,
    rng: random.Random,
) -> list[Solution]:
    """Independent ALNS runs with derived rng streams, one per member.

    A member duplicating an earlier one (solution distance zero) is retried
    up to three times with a fresh stream, then kept as is.
    """
    from .solution import solution_distance

    if size < 1:
        raise ValueError("population size must be at least 1")
    population: list[Solution] = []
    for _ in range(size):
        member = None
        for _attempt in range(4):
            stream = random.Random(rng.getrandbits(64))
            member, _ = alns_run(
                seed_solution, inst, baseline, limits, config, stream
            )
            if all(solution_distance(member, other) > 0 for other in population):
                break
        population.append(member)
    return population
