"""Independent reference implementations used to check the package's results.

Everything here is written against plain strings, tuples and Fractions, on
purpose: none of it imports the package, so a bug in the library cannot leak
into the expected values. The implementations favor the most literal or
brute-force formulation available over efficiency.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path

# the full nine-cell matrix: (probability, impact) -> (required level, priority)
RISK_MATRIX = {
    ("low", "low"): (2, False),
    ("low", "medium"): (3, False),
    ("medium", "low"): (3, False),
    ("medium", "medium"): (4, False),
    ("high", "low"): (4, False),
    ("low", "high"): (4, False),
    ("medium", "high"): (5, False),
    ("high", "medium"): (5, False),
    ("high", "high"): (5, True),
}


def id_key(text: str) -> tuple[int, int, int]:
    section, objective, control = text.removeprefix("A.").split(".")
    return int(section), int(objective), int(control)


def survey_averages_from_csv(path: Path) -> dict[str, Fraction]:
    """Recompute exact per-control averages straight from a survey CSV."""
    sums: dict[str, int] = {}
    counts: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            control = row["control_id"].strip()
            sums[control] = sums.get(control, 0) + int(row["score"])
            counts[control] = counts.get(control, 0) + 1
    return {control: Fraction(sums[control], counts[control]) for control in sums}


def measurements_from_csv(path: Path) -> dict[str, int]:
    with open(path, newline="", encoding="utf-8") as handle:
        return {row["control_id"].strip(): int(row["level"]) for row in csv.DictReader(handle)}


def mean(values) -> Fraction:
    values = list(values)
    return Fraction(sum(values), len(values))


def quartile_boundaries(count: int) -> tuple[int, int, int, int]:
    """ceil(k * count / 4) for k = 1..4, computed via integer ceil division."""
    return tuple((k * count + 3) // 4 for k in (1, 2, 3, 4))


def partition_by_quartiles(
    averages: dict[str, Fraction], boundaries: tuple[int, int, int, int]
) -> dict[str, int]:
    """Reference partition: stage k ends at the first position >= its boundary
    where the average strictly drops, so boundary-straddling tie groups land
    whole in the earlier stage. Returns control -> stage number 1..4."""
    order = sorted(averages, key=lambda c: (-averages[c], id_key(c)))
    cuts = []
    for target in boundaries:
        end = target
        while end < len(order) and averages[order[end]] == averages[order[end - 1]]:
            end += 1
        cuts.append(end)
    assignment: dict[str, int] = {}
    start = 0
    for stage_number, end in enumerate(cuts, start=1):
        for position in range(start, max(start, end)):
            assignment[order[position]] = stage_number
        start = max(start, end)
    return assignment


def promotion_fixpoint(assignment: dict[str, int], edges: list[tuple[str, str]]) -> dict[str, int]:
    """Naive fixpoint: repeatedly pull any prerequisite later than a dependent."""
    stages = dict(assignment)
    changed = True
    while changed:
        changed = False
        for prerequisite, dependent in edges:
            if stages[prerequisite] > stages[dependent]:
                stages[prerequisite] = stages[dependent]
                changed = True
    return stages


def has_cycle(nodes: list[str], edges: list[tuple[str, str]]) -> bool:
    successors: dict[str, list[str]] = {node: [] for node in nodes}
    for a, b in edges:
        successors[a].append(b)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node: WHITE for node in nodes}

    def visit(node: str) -> bool:
        color[node] = GREY
        for nxt in successors[node]:
            if color[nxt] == GREY:
                return True
            if color[nxt] == WHITE and visit(nxt):
                return True
        color[node] = BLACK
        return False

    return any(color[node] == WHITE and visit(node) for node in nodes)


def prefix_gated_label(
    stage_of: dict[str, int], required: dict[str, int], measured: dict[str, int]
) -> tuple[int, bool]:
    """Brute-force gating: (label stage, essential incomplete flag).

    Checks every prefix of stages directly; intended for small synthetic
    cases where exhaustive checking is obviously correct.
    """
    def stage_complete(stage: int) -> bool:
        return all(
            measured[c] >= required[c] for c, s in stage_of.items() if s == stage
        )

    complete_upto = 0
    for stage in (1, 2, 3, 4):
        if not stage_complete(stage):
            break
        complete_upto = stage
    if complete_upto == 0:
        return 1, True
    return complete_upto, False


def decimal_display(value: Fraction) -> str:
    """Two-decimal half-up rendering via integer arithmetic only."""
    scaled = value * 100
    whole = scaled.numerator // scaled.denominator
    if Fraction(whole + 1) - scaled <= Fraction(1, 2):
        whole += 1
    return f"{whole // 100}.{whole % 100:02d}"
