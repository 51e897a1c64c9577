"""All solver tunables in one place, with the tuned grid values as defaults."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class SolverConfig:
    # scenario scaling
    mu: float = 1.0                  # travel budget multiplier
    lam: float = 0.5                 # disruption cap multiplier
    rejection_cost: float | None = None  # None: mean payment of new customers

    # outer loop
    population_size: int = 5
    generations: int = 5
    time_cap_s: float = 60.0

    # adaptive neighborhood search
    alns_iterations: int = 1000
    weight_period: int = 50
    evaporation: float = 0.95
    perturbation: float = 0.1
    random_insert_prob: float = 0.1
    score_best: float = 10.0
    score_better: float = 5.0
    score_accept: float = 2.0
    sa_init_scale: float = 0.05
    sa_cooling: float = 0.999
    sa_min_ratio: float = 1000.0

    # tabu local search
    ts_iterations: int = 200
    penalty_period: int = 10
    tenure_alpha: float = 0.25
    ts_score_best: float = 10.0
    ts_score_conditional: float = 5.0
    ts_score_fail: float = 1.0
    phi_initial: float = 1.0
    phi_min: float = 0.01
    phi_max: float = 100.0

    # population management
    fdr_epsilon: float = 1e-9
    elite_fraction: float = 0.2

    # baseline tour
    tsp_mode: str = "auto"

    # None keeps the standard trio; the ablation variant swaps in a single
    # best-position insertion operator
    insertion_operators: tuple[str, ...] | None = None

    def updated(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in fields(SolverConfig)}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if name == "insertion_operators":
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    if name == "tsp_mode":
        return raw
    if name in ("population_size", "generations", "alns_iterations",
                "weight_period", "ts_iterations", "penalty_period"):
        return int(raw)
    return float(raw)


def parse_config_text(text: str) -> dict:
    """Read flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, raw_value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw_value)
    return values


def load_config(path: str | None = None, **overrides) -> SolverConfig:
    """Defaults, overlaid by an optional config file, overlaid by overrides."""
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return SolverConfig(**values)
