"""Outer memetic loop: population build, tabu refinement, diversity-aware update."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache

from .alns import alns_run, build_population, make_move_banks
from .baseline import OriginalSchedule, build_original_schedule, solve_tsp
from .config import SolverConfig
from .instances import DerivedLimits, Instance, compute_limits
from .solution import Solution, check_feasible, evaluate, solution_distance
from .tabu import make_violation_bank, ts_run


def fdr(sol: Solution, population: list[Solution], epsilon: float) -> float:
    """Fitness-distance ratio: objective over mean distance to the population.

    The divisor is the population size itself; a solution's zero distance to
    itself contributes nothing, so members and outside candidates are scored
    by the same formula.
    """
    n = len(population)
    if n == 0:
        raise ValueError("population must be non-empty")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    total = sum(
        solution_distance(sol, member)
        for member in population
        if member is not sol
    )
    return sol.objective / (total / n + epsilon)


def elite_count(size: int, fraction: float) -> int:
    return max(1, math.ceil(fraction * size))


def population_update(
    population: list[Solution], candidate: Solution, config: SolverConfig
) -> list[Solution]:
    """Two-tier replacement: elitists by objective, the rest by fitness-distance.

    A candidate beating the weakest elitist takes its slot.  Otherwise it
    competes in the average tier and only displaces the lowest-FDR member
    when its own FDR (against the current population) is strictly higher;
    ties reject, which silently suppresses duplicates.
    """
    order = sorted(range(len(population)), key=lambda i: -population[i].objective)
    n_elite = elite_count(len(population), config.elite_fraction)
    elite_idx = order[:n_elite]
    average_idx = order[n_elite:]

    worst_elite = elite_idx[-1]
    if candidate.objective > population[worst_elite].objective:
        updated = list(population)
        updated[worst_elite] = candidate
        return updated

    if not average_idx:
        return list(population)

    cand_fdr = fdr(candidate, population, config.fdr_epsilon)
    weakest = min(
        average_idx,
        key=lambda i: (fdr(population[i], population, config.fdr_epsilon), -i),
    )
    if cand_fdr > fdr(population[weakest], population, config.fdr_epsilon):
        updated = list(population)
        updated[weakest] = candidate
        return updated
    return list(population)


@dataclass
class RunReport:
    """What a single solver run did, for CSV rows and comparisons."""

    instance: str
    seed: int
    best: Solution
    objective_trace: list[float] = field(default_factory=list)
    time_s: float = 0.0
    generations: int = 0
    operator_usage: dict[str, int] = field(default_factory=dict)

    @property
    def best_objective(self) -> float:
        return self.best.objective

    def csv_row(self) -> dict:
        trace_avg = (
            sum(self.objective_trace) / len(self.objective_trace)
            if self.objective_trace
            else self.best.objective
        )
        return {
            "instance": self.instance,
            "seed": self.seed,
            "best_obj": round(self.best.objective, 9),
            "avg_obj_trace": round(trace_avg, 9),
            "time_s": round(self.time_s, 3),
            "generations": self.generations,
        }


def seed_solution(inst: Instance, baseline: OriginalSchedule) -> Solution:
    """The baseline tour with every same-day request rejected."""
    return evaluate(baseline.route, inst)


@lru_cache(maxsize=256)
def _baseline_and_tsp(inst: Instance, mode: str) -> tuple[OriginalSchedule, float]:
    # instances hash by identity and are immutable, so repeated multi-seed
    # runs share one baseline computation
    baseline = build_original_schedule(inst, mode=mode)
    _, tsp_len = solve_tsp(list(inst.customer_ids), inst, mode=mode)
    return baseline, tsp_len


def prepare_run(
    inst: Instance, config: SolverConfig
) -> tuple[OriginalSchedule, DerivedLimits, Solution]:
    """Baseline schedule, scaled limits, and the feasibility-checked seed."""
    baseline, tsp_len = _baseline_and_tsp(inst, config.tsp_mode)
    limits = compute_limits(inst, config.mu, config.lam, tsp_len)
    seed = seed_solution(inst, baseline)
    report = check_feasible(seed, baseline, limits, inst)
    if not report.feasible:
        raise ValueError(
            "instance is infeasible under these limits: the baseline tour "
            f"({baseline.length:.3f}) already exceeds the travel budget "
            f"({limits.t_max:.3f})"
        )
    return baseline, limits, seed


def _merge_usage(target: dict[str, int], banks) -> None:
    for bank in banks:
        for name, used in zip(bank.names, bank.times):
            target[name] = target.get(name, 0) + used


def memetic_solve(
    inst: Instance, config: SolverConfig, master_seed: int
) -> RunReport:
    """Full solver run: population from adaptive search, then tabu refinement.

    Deterministic for a fixed master seed.  Stops after the configured number
    of generations or when the wall-clock cap is hit, whichever comes first.
    """
    started = time.perf_counter()
    rng = random.Random(master_seed)
    baseline, limits, seed = prepare_run(inst, config)

    usage: dict[str, int] = {}
    population = build_population(
        seed, config.population_size, inst, baseline, limits, config, rng
    )
    best = max(population, key=lambda s: s.objective)
    trace = [best.objective]

    generations_done = 0
    for _generation in range(config.generations):
        if time.perf_counter() - started > config.time_cap_s:
            break
        for member in list(population):
            member_rng = random.Random(rng.getrandbits(64))
            banks = make_move_banks(config.insertion_operators)
            v_bank = make_violation_bank()
            refined, _conditional = ts_run(
                member, inst, baseline, limits, banks, config, member_rng,
                violation_bank=v_bank,
            )
            _merge_usage(usage, banks.values())
            _merge_usage(usage, [v_bank])
            if refined.objective > best.objective:
                best = refined
            population = population_update(population, refined, config)
        generations_done += 1
        trace.append(best.objective)

    return RunReport(
        instance=inst.name,
        seed=master_seed,
        best=best,
        objective_trace=trace,
        time_s=time.perf_counter() - started,
        generations=generations_done,
        operator_usage=usage,
    )


def alns_only_solve(
    inst: Instance, config: SolverConfig, master_seed: int
) -> RunReport:
    """Ablation: a single adaptive-search run with the full iteration budget."""
    started = time.perf_counter()
    rng = random.Random(master_seed)
    baseline, limits, seed = prepare_run(inst, config)
    budget = config.population_size * config.alns_iterations + (
        config.generations * config.population_size * config.ts_iterations
    )
    best, banks = alns_run(
        seed, inst, baseline, limits,
        config.updated(alns_iterations=budget), rng,
    )
    usage: dict[str, int] = {}
    _merge_usage(usage, banks.values())
    return RunReport(
        instance=inst.name,
        seed=master_seed,
        best=best,
        objective_trace=[best.objective],
        time_s=time.perf_counter() - started,
        generations=0,
        operator_usage=usage,
    )


def ts_only_solve(
    inst: Instance, config: SolverConfig, master_seed: int
) -> RunReport:
    """Ablation: one long tabu run straight from the seed solution."""
    started = time.perf_counter()
    rng = random.Random(master_seed)
    baseline, limits, seed = prepare_run(inst, config)
    budget = config.population_size * config.alns_iterations + (
        config.generations * config.population_size * config.ts_iterations
    )
    banks = make_move_banks(config.insertion_operators)
    v_bank = make_violation_bank()
    best, _conditional = ts_run(
        seed, inst, baseline, limits, banks,
        config.updated(ts_iterations=budget), rng, violation_bank=v_bank,
    )
    usage: dict[str, int] = {}
    _merge_usage(usage, banks.values())
    _merge_usage(usage, [v_bank])
    return RunReport(
        instance=inst.name,
        seed=master_seed,
        best=best,
        objective_trace=[best.objective],
        time_s=time.perf_counter() - started,
        generations=0,
        operator_usage=usage,
    )


ALGORITHMS = {
    "MA2": memetic_solve,
    "ALNS": alns_only_solve,
    "TS": ts_only_solve,
}


def solve_with_algorithm(
    algo: str, inst: Instance, config: SolverConfig, master_seed: int
) -> RunReport:
    """Dispatch by algorithm label; MA1 is the best-position-insertion variant."""
    if algo == "MA1":
        return memetic_solve(
            inst,
            config.updated(insertion_operators=("best_position_insertion",)),
            master_seed,
        )
    try:
        fn = ALGORITHMS[algo]
    except KeyError:
        raise ValueError(f"unknown algorithm {algo!r}") from None
    return fn(inst, config, master_seed)
