"""Framework enumeration, the single-framework query rule, and the
contradiction search over pairs of frameworks.

A framework is a partition of the open paths that passed consistency,
together with its probability table.  Probabilities only mean anything
inside one framework; the query path enforces that, and the contradiction
finder shows what goes wrong when the rule is ignored: different frameworks
can retrodict, with certainty, that a detected particle took disjoint paths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .core import Partition
from .engine import (
    DETECTED,
    UNDETECTED,
    DEFAULT_TOLERANCE,
    MODE_MEDIUM,
    MODES,
    NULL_CONDITION,
    TOLERANCE_FLOOR,
    ConsistencyReport,
    ExperimentModel,
    history_probabilities,
)
from .errors import (
    ConditionUnsatisfied,
    InconsistentSet,
    MeaninglessCombination,
    NotInFramework,
    TooLarge,
)

#: Default cap on open-path count for enumeration (Bell(12) = 4,213,597).
DEFAULT_MAX_PATHS = 12

#: An event this close to probability one counts as certain in a record.
CERTAINTY_THRESHOLD = 1.0 - 1e-10

#: An event this close to probability zero counts as null in a record.
NULL_THRESHOLD = 1e-10


@dataclass(frozen=True, eq=False)
class Framework:
    """A consistent partition with its probability table: the unit of valid
    inference about which path a particle took."""

    partition: Partition
    mode: str
    probabilities: Mapping[tuple[frozenset[int], str], float]
    report: ConsistencyReport

    def detected_total(self) -> float:
        return sum(p for (_, branch), p in self.probabilities.items() if branch == DETECTED)


@dataclass(frozen=True, eq=False)
class ContradictionRecord:
    """Two frameworks whose certainties cannot be combined.

    ``disjoint-certainty``: both events are certain given detection, yet
    they are disjoint.  ``implication-violation``: the first event is
    certain, sits inside the second, and the second is null.
    """

    kind: str
    framework_a: Framework
    framework_b: Framework
    event_a: frozenset[int]
    event_b: frozenset[int]
    p_a: float
    p_b: float


def _iter_rgs(n: int) -> Iterator[list[int]]:
    """Restricted growth strings of length n in lexicographic order.

    Yields an internal buffer that is mutated between steps; callers must
    copy anything they keep.
    """
    code = [0] * n
    prefix_max = [0] * n  # prefix_max[i] = max(code[:i]), entry 0 unused
    while True:
        yield code
        i = n - 1
        while i > 0 and code[i] == prefix_max[i] + 1:
            i -= 1
        if i == 0:
            return
        code[i] += 1
        new_max = code[i] if code[i] > prefix_max[i] else prefix_max[i]
        for j in range(i + 1, n):
            code[j] = 0
            prefix_max[j] = new_max


def _partition_from_code(code: list[int]) -> Partition:
    groups: list[list[int]] = []
    for index, g in enumerate(code):
        if g == len(groups):
            groups.append([index])
        else:
            groups[g].append(index)
    return Partition(tuple(frozenset(g) for g in groups))


def enumerate_partitions(n: int, max_n: int = DEFAULT_MAX_PATHS) -> Iterator[Partition]:
    """Stream every set partition of n paths exactly once, coarsest first.

    The count is the n-th Bell number, so the size is capped; raise the cap
    deliberately if you mean it.  Validation happens at the call, not on the
    first draw from the stream.
    """
    if n < 1:
        raise ValueError("partition enumeration needs at least one path")
    if n > max_n:
        raise TooLarge(f"{n} paths exceeds the enumeration cap of {max_n}")
    return (_partition_from_code(code) for code in _iter_rgs(n))


def build_framework(
    model: ExperimentModel,
    partition: Partition,
    mode: str = MODE_MEDIUM,
    tolerance: float = DEFAULT_TOLERANCE,
) -> Framework:
    """Check a partition and wrap it with its probability table.

    Raises InconsistentSet when the partition fails consistency.
    """
    table = history_probabilities(model, partition, mode=mode, tolerance=tolerance)
    return Framework(partition=partition, mode=mode, probabilities=table.probabilities, report=table.report)


def enumerate_consistent_frameworks(
    model: ExperimentModel,
    mode: str = MODE_MEDIUM,
    tolerance: float = DEFAULT_TOLERANCE,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> list[Framework]:
    """All partitions of the open paths that form consistent sets.

    Candidates are screened with the closed-form decoherence values (reusing
    per-group amplitude sums across the stream), then every survivor is
    re-checked on the explicit model before it becomes a framework, so the
    result matches a brute-force filter over ``check_consistency``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown consistency mode {mode!r}")
    scenario = model.scenario
    open_indices = scenario.open_indices
    k = len(open_indices)
    if k > max_paths:
        raise TooLarge(f"{k} open paths exceeds the enumeration cap of {max_paths}")
    amps = [scenario.amplitudes[i] for i in open_indices]
    norm_sq = sum(abs(a) ** 2 for a in scenario.amplitudes)
    scale = 1.0 / (k * norm_sq)
    medium = mode == MODE_MEDIUM

    survivors: list[Partition] = []
    sums: list[complex] = [0j] * k
    counts: list[int] = [0] * k
    for code in _iter_rgs(k):
        n_groups = 0
        for position in range(k):
            g = code[position]
            if g >= n_groups:
                n_groups = g + 1
                sums[g] = amps[position]
                counts[g] = 1
            else:
                sums[g] += amps[position]
                counts[g] += 1
        max_diag = 0.0
        largest = 0.0
        second = 0.0
        for g in range(n_groups):
            mag = abs(sums[g])
            if mag > largest:
                second = largest
                largest = mag
            elif mag > second:
                second = mag
            detected_diag = mag * mag * scale
            undetected_diag = counts[g] / k - detected_diag
            if detected_diag > max_diag:
                max_diag = detected_diag
            if undetected_diag > max_diag:
                max_diag = undetected_diag
        if medium:
            violation = largest * second * scale
        else:
            violation = 0.0
            for a in range(n_groups):
                ca = sums[a].conjugate()
                for b in range(a + 1, n_groups):
                    real_part = abs((ca * sums[b]).real) * scale
                    if real_part > violation:
                        violation = real_part
        threshold = tolerance * max_diag if max_diag > 0.0 else TOLERANCE_FLOOR
        if violation <= threshold:
            groups: list[list[int]] = [[] for _ in range(n_groups)]
            for position in range(k):
                groups[code[position]].append(open_indices[position])
            survivors.append(Partition(tuple(frozenset(g) for g in groups)))

    frameworks = []
    for partition in survivors:
        try:
            frameworks.append(build_framework(model, partition, mode=mode, tolerance=tolerance))
        except InconsistentSet:  # pragma: no cover - screen and model agree to ~1e-15
            continue
    return frameworks


def query_event(framework: Framework, event: frozenset[int] | set[int], given_detected: bool = False) -> float:
    """Probability of an event, read inside a single framework.

    The event must be a union of the framework's groups; anything else is
    rejected rather than approximated, the single-framework rule in code.
    """
    event = frozenset(event)
    covered = [g for g in framework.partition.groups if g <= event]
    union = frozenset().union(*covered) if covered else frozenset()
    if union != event:
        raise NotInFramework(
            "event is not a union of this framework's groups; probabilities are "
            "only defined within a single consistent framework"
        )
    detected_sum = sum(framework.probabilities[(g, DETECTED)] for g in covered)
    if not given_detected:
        return detected_sum + sum(framework.probabilities[(g, UNDETECTED)] for g in covered)
    total = framework.detected_total()
    if total <= NULL_CONDITION:
        raise ConditionUnsatisfied("detection has zero probability; conditioning undefined")
    return detected_sum / total


def combine_queries(framework_a: Framework, framework_b: Framework) -> Framework:
    """The common context of two frameworks, when one exists.

    Identical partitions combine to themselves; if one refines the other the
    finer (already consistent) framework is the joint context.  Otherwise no
    joint probability exists and the combination is refused.
    """
    if framework_a.mode != framework_b.mode:
        raise ValueError("frameworks must be built in the same consistency mode")
    if framework_a.partition.universe != framework_b.partition.universe:
        raise ValueError("frameworks must describe the same open paths")
    if framework_a.partition == framework_b.partition:
        return framework_a
    if framework_a.partition.refines(framework_b.partition):
        return framework_a
    if framework_b.partition.refines(framework_a.partition):
        return framework_b
    raise MeaninglessCombination(
        "neither framework refines the other; their probabilities cannot be combined",
        partition_a=framework_a.partition,
        partition_b=framework_b.partition,
    )


def _certain_and_null_events(
    framework: Framework,
) -> tuple[list[tuple[frozenset[int], float]], list[tuple[frozenset[int], float]]] | None:
    """Group-union events with conditional probability ~1 and ~0, or None
    when detection itself is a null event."""
    total = framework.detected_total()
    if total <= NULL_CONDITION:
        return None
    groups = framework.partition.groups
    detected = [framework.probabilities[(g, DETECTED)] for g in groups]
    certain: list[tuple[frozenset[int], float]] = []
    null: list[tuple[frozenset[int], float]] = []
    for r in range(1, len(groups) + 1):
        for combo in itertools.combinations(range(len(groups)), r):
            event = frozenset().union(*(groups[i] for i in combo))
            # Sum first, divide once: the same arithmetic as query_event, so
            # stored probabilities re-verify exactly.
            p = sum(detected[i] for i in combo) / total
            if p >= CERTAINTY_THRESHOLD:
                certain.append((event, p))
            elif p <= NULL_THRESHOLD:
                null.append((event, p))
    return certain, null


def find_contradictions(
    model: ExperimentModel,
    mode: str = MODE_MEDIUM,
    tolerance: float = DEFAULT_TOLERANCE,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> list[ContradictionRecord]:
    """Search all framework pairs for retrodictions that clash.

    Events are unions of groups within each framework (the only events a
    framework can speak about), conditioned on detection.  Emits one record
    per disjoint pair of certainties and one per certain event contained in
    another framework's null event.
    """
    frameworks = enumerate_consistent_frameworks(model, mode=mode, tolerance=tolerance, max_paths=max_paths)
    events = [_certain_and_null_events(f) for f in frameworks]
    records: list[ContradictionRecord] = []
    for a in range(len(frameworks)):
        if events[a] is None:
            continue
        certain_a, null_a = events[a]
        for b in range(a + 1, len(frameworks)):
            if events[b] is None:
                continue
            certain_b, null_b = events[b]
            for event_a, p_a in certain_a:
                for event_b, p_b in certain_b:
                    if not event_a & event_b:
                        records.append(
                            ContradictionRecord(
                                kind="disjoint-certainty",
                                framework_a=frameworks[a],
                                framework_b=frameworks[b],
                                event_a=event_a,
                                event_b=event_b,
                                p_a=p_a,
                                p_b=p_b,
                            )
                        )
            for event_a, p_a in certain_a:
                for event_b, p_b in null_b:
                    if event_a <= event_b:
                        records.append(
                            ContradictionRecord(
                                kind="implication-violation",
                                framework_a=frameworks[a],
                                framework_b=frameworks[b],
                                event_a=event_a,
                                event_b=event_b,
                                p_a=p_a,
                                p_b=p_b,
                            )
                        )
            for event_b, p_b in certain_b:
                for event_a, p_a in null_a:
                    if event_b <= event_a:
                        records.append(
                            ContradictionRecord(
                                kind="implication-violation",
                                framework_a=frameworks[b],
                                framework_b=frameworks[a],
                                event_a=event_b,
                                event_b=event_a,
                                p_a=p_b,
                                p_b=p_a,
                            )
                        )
    return records
