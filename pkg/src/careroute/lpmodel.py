"""LP-format text export of both optimization models, plus the gap metric.

The files use the CPLEX-LP dialect (Minimize/Maximize, Subject To, Bounds,
Binaries, End) so any external exact solver can verify instances.  Output is
byte-stable for a fixed instance: variables and constraints are emitted in
lexicographic index order and numbers use a fixed format.
"""

from __future__ import annotations

from .baseline import OriginalSchedule
from .instances import DerivedLimits, Instance

_WRAP = 8  # terms per constraint line keeps rows parser-friendly


def _num(value: float) -> str:
    return f"{value:.12g}"


def _terms(pairs: list[tuple[float, str]]) -> list[str]:
    """Render coefficient/variable pairs as signed LP terms."""
    out = []
    for coeff, var in pairs:
        if coeff == 0:
            continue
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        body = var if mag == 1 else f"{_num(mag)} {var}"
        out.append(f"{sign} {body}")
    if not out:
        out = ["+ 0"]
    return out


def _constraint(name: str, pairs, sense: str, rhs: float) -> str:
    terms = _terms(pairs)
    lines = []
    head = f" {name}:"
    row = head
    for i in range(0, len(terms), _WRAP):
        chunk = " ".join(terms[i : i + _WRAP])
        if i == 0:
            row = f"{head} {chunk}"
        else:
            lines.append(row)
            row = f"   {chunk}"
    lines.append(f"{row} {sense} {_num(rhs)}")
    return "\n".join(lines)


def _wrap_objective(pairs) -> str:
    terms = _terms(pairs)
    lines = []
    for i in range(0, len(terms), _WRAP):
        prefix = " obj:" if i == 0 else "     "
        lines.append(f"{prefix} " + " ".join(terms[i : i + _WRAP]))
    return "\n".join(lines)


def _big_m(inst: Instance, ids: list[int]) -> float:
    # one spare arc of slack above the largest possible arrival time
    sub = inst.dist[[0] + ids][:, [0] + ids]
    return (len(ids) + 1) * float(sub.max())


def export_original(inst: Instance) -> str:
    """Tour model over the existing customers: minimize total travel time."""
    existing = list(inst.existing_ids)
    if len(existing) < 2:
        raise ValueError("original model needs at least two existing customers")
    nodes = [0] + existing
    dist = inst.dist
    m_big = _big_m(inst, existing)
    n_e = len(existing)

    lines = [f"\\ original tour model for instance {inst.name}"]
    lines.append(f"\\ nodes: depot + {n_e} existing customers")
    lines.append("Minimize")
    obj = [
        (float(dist[i, j]), f"x_{i}_{j}")
        for i in nodes
        for j in nodes
        if i != j
    ]
    lines.append(_wrap_objective(obj))
    lines.append("Subject To")
    for j in existing:
        lines.append(
            _constraint(
                f"in_{j}",
                [(1.0, f"x_{i}_{j}") for i in nodes if i != j],
                "=", 1.0,
            )
        )
    for i in existing:
        lines.append(
            _constraint(
                f"out_{i}",
                [(1.0, f"x_{i}_{j}") for j in nodes if j != i],
                "=", 1.0,
            )
        )
    lines.append(
        _constraint("depot_out", [(1.0, f"x_0_{i}") for i in existing], "=", 1.0)
    )
    lines.append(
        _constraint("depot_in", [(1.0, f"x_{i}_0") for i in existing], "=", 1.0)
    )
    for i in existing:
        for j in existing:
            if i == j:
                continue
            lines.append(
                _constraint(
                    f"time_{i}_{j}",
                    [
                        (1.0, f"s_{i}"),
                        (-1.0, f"s_{j}"),
                        (float(dist[i, j]) + m_big, f"x_{i}_{j}"),
                    ],
                    "<=", m_big,
                )
            )
    for i in existing:
        for j in existing:
            if i == j:
                continue
            lines.append(
                _constraint(
                    f"mtz_{i}_{j}",
                    [(1.0, f"u_{i}"), (-1.0, f"u_{j}"), (float(n_e), f"x_{i}_{j}")],
                    "<=", float(n_e - 1),
                )
            )
    lines.append("Bounds")
    lines.append(" s_0 = 0")
    for i in existing:
        lines.append(f" 0 <= s_{i} <= {_num(m_big)}")
    for i in existing:
        lines.append(f" 1 <= u_{i} <= {_num(float(n_e))}")
    lines.append("Binaries")
    xs = [f"x_{i}_{j}" for i in nodes for j in nodes if i != j]
    for i in range(0, len(xs), _WRAP):
        lines.append(" " + " ".join(xs[i : i + _WRAP]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_rescheduling(
    inst: Instance, baseline: OriginalSchedule, limits: DerivedLimits
) -> str:
    """Insertion-with-rejection model against the baseline promised times.

    The objective is emitted as a maximization of net profit.  Arrival-time
    propagation is two-sided (arrival equals departure plus travel whenever an
    arc is used) so the model's feasible set matches the no-waiting route
    semantics the rest of the library evaluates.
    """
    for node in inst.existing_ids:
        if node not in baseline.promised:
            raise ValueError(f"baseline misses promised time for customer {node}")
    customers = list(inst.customer_ids)
    new_ids = list(inst.new_ids)
    nodes = [0] + customers
    dist = inst.dist
    n_c = len(customers)
    m_big = _big_m(inst, customers)
    r = inst.rejection_cost

    lines = [f"\\ rescheduling model for instance {inst.name}"]
    lines.append(
        f"\\ mu-scaled travel budget {_num(limits.t_max)}, "
        f"disruption cap {_num(limits.disruption_cap)}"
    )
    lines.append("\\ sense: maximize net profit (payments minus rejection cost)")
    lines.append("Maximize")
    obj = [(inst.nodes[i].payment, f"y_{i}") for i in customers]
    obj += [(-r, f"v_{j}") for j in new_ids]
    lines.append(_wrap_objective(obj))
    lines.append("Subject To")
    lines.append(
        _constraint("depot_out", [(1.0, f"x_0_{i}") for i in customers], "=", 1.0)
    )
    lines.append(
        _constraint("depot_in", [(1.0, f"x_{i}_0") for i in customers], "=", 1.0)
    )
    for i in inst.existing_ids:
        lines.append(_constraint(f"serve_{i}", [(1.0, f"y_{i}")], "=", 1.0))
    for j in customers:
        pairs = [(1.0, f"x_{i}_{j}") for i in nodes if i != j]
        pairs.append((-1.0, f"y_{j}"))
        lines.append(_constraint(f"link_in_{j}", pairs, "=", 0.0))
    for i in customers:
        pairs = [(1.0, f"x_{i}_{j}") for j in nodes if j != i]
        pairs.append((-1.0, f"y_{i}"))
        lines.append(_constraint(f"link_out_{i}", pairs, "=", 0.0))
    for j in new_ids:
        pairs = [(1.0, f"x_{i}_{j}") for i in nodes if i != j]
        pairs.append((1.0, f"v_{j}"))
        lines.append(_constraint(f"reject_{j}", pairs, "=", 1.0))
    for i in inst.existing_ids:
        promised = baseline.promised[i]
        lines.append(
            _constraint(
                f"disr_hi_{i}", [(1.0, f"s_{i}"), (-1.0, "z")], "<=", promised
            )
        )
        lines.append(
            _constraint(
                f"disr_lo_{i}", [(-1.0, f"s_{i}"), (-1.0, "z")], "<=", -promised
            )
        )
    lines.append(_constraint("cap_z", [(1.0, "z")], "<=", limits.disruption_cap))
    budget = [
        (float(dist[i, j]), f"x_{i}_{j}")
        for i in nodes
        for j in nodes
        if i != j
    ]
    lines.append(_constraint("budget", budget, "<=", limits.t_max))
    for i in nodes:
        for j in nodes:
            if i == j:
                continue
            lines.append(
                _constraint(
                    f"time_{i}_{j}",
                    [
                        (1.0, f"s_{i}"),
                        (-1.0, f"s_{j}"),
                        (float(dist[i, j]) + m_big, f"x_{i}_{j}"),
                    ],
                    "<=", m_big,
                )
            )
            if j != 0:
                # reverse side: no waiting, arrivals are exactly propagated
                lines.append(
                    _constraint(
                        f"timeq_{i}_{j}",
                        [
                            (-1.0, f"s_{i}"),
                            (1.0, f"s_{j}"),
                            (m_big - float(dist[i, j]), f"x_{i}_{j}"),
                        ],
                        "<=", m_big,
                    )
                )
    for i in customers:
        for j in customers:
            if i == j:
                continue
            lines.append(
                _constraint(
                    f"mtz_{i}_{j}",
                    [(1.0, f"u_{i}"), (-1.0, f"u_{j}"), (float(n_c), f"x_{i}_{j}")],
                    "<=", float(n_c - 1),
                )
            )
    lines.append("Bounds")
    lines.append(" s_0 = 0")
    for i in customers:
        lines.append(f" 0 <= s_{i} <= {_num(m_big)}")
    for i in customers:
        lines.append(f" 1 <= u_{i} <= {_num(float(n_c))}")
    lines.append(f" 0 <= z <= {_num(m_big)}")
    lines.append("Binaries")
    names = [f"x_{i}_{j}" for i in nodes for j in nodes if i != j]
    names += [f"y_{i}" for i in customers]
    names += [f"v_{j}" for j in new_ids]
    for i in range(0, len(names), _WRAP):
        lines.append(" " + " ".join(names[i : i + _WRAP]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def gap(exact_obj: float, heuristic_obj: float) -> float:
    """Percentage shortfall of a heuristic value against the exact optimum."""
    if exact_obj == 0:
        raise ZeroDivisionError("gap undefined for a zero exact objective")
    return (exact_obj - heuristic_obj) / exact_obj * 100.0
