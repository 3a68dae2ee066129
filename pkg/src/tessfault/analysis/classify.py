"""Which regular tessellations tolerate transient or combined faults under majority voting."""

import enum

from ..tessellation import INF, format_p, parse_p


class Tolerance(enum.Enum):
    NONE = "None"
    TRANSIENT_ONLY = "TransientOnly"
    COMBINED = "Combined"

    @property
    def symbol(self):
        return {"None": ".", "TransientOnly": "x", "Combined": "X"}[self.value]


def classify(p, q) -> Tolerance:
    p = parse_p(p)
    q = int(q)
    if q < 2 or (p != INF and p < 3):
        raise ValueError("need p >= 3 (or inf) and q >= 2")
    if q == 2 or (q <= 4 and p != INF) or (q <= 6 and p == 3):
        return Tolerance.NONE
    if (p != INF and p >= 5 and q >= 5) or (p == 4 and q >= 7) or (p == 3 and q >= 9) or (p == INF and q >= 5):
        return Tolerance.COMBINED
    return Tolerance.TRANSIENT_ONLY


def table(p_values=(3, 4, 5, 6, INF), q_values=range(2, 10)):
    """Rows of (p, [Tolerance for each q])."""
    return [(p, [classify(p, q) for q in q_values]) for p in p_values]


def format_table(p_values=(3, 4, 5, 6, INF), q_values=range(2, 10)) -> str:
    q_values = list(q_values)
    lines = ["p\\q " + " ".join(f"{q:>2}" for q in q_values)]
    for p, row in table(p_values, q_values):
        lines.append(f"{format_p(p):>3} " + " ".join(f"{c.symbol:>2}" for c in row))
    lines.append("legend: X combined, x transient only, . none")
    return "\n".join(lines)
