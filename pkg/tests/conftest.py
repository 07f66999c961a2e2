"""Shared helpers: scenario factories and brute-force oracles.

The oracles here deliberately avoid the package's fast paths: partitions are
enumerated by recursive insertion rather than restricted growth strings, and
consistency is decided by evaluating the full decoherence-functional matrix
for every partition with no screening.
"""

from __future__ import annotations

import random
from typing import Iterator, Sequence

from chslit import (
    BRANCHES,
    ExperimentModel,
    History,
    Partition,
    Slit,
    SlitScenario,
    decoherence_functional,
)

TOLERANCE_FLOOR = 1e-14


def make_scenario(
    amplitudes: Sequence[complex],
    open_flags: Sequence[bool] | None = None,
    name: str = "test",
) -> SlitScenario:
    if open_flags is None:
        open_flags = [True] * len(amplitudes)
    slits = tuple(
        Slit(f"S{i + 1}", complex(a), is_open=flag)
        for i, (a, flag) in enumerate(zip(amplitudes, open_flags))
    )
    return SlitScenario(name=name, slits=slits)


def brute_partitions(items: Sequence[int]) -> Iterator[list[frozenset[int]]]:
    """Every set partition of ``items``, by recursive insertion."""
    items = list(items)
    if len(items) == 1:
        yield [frozenset(items)]
        return
    first, rest = items[0], items[1:]
    for smaller in brute_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [smaller[i] | {first}] + smaller[i + 1 :]
        yield smaller + [frozenset([first])]


def partition_gram(model: ExperimentModel, blocks: Sequence[frozenset[int]]) -> list[list[complex]]:
    """Full decoherence-functional matrix over the 2*len(blocks) histories."""
    histories = [
        History(chain=(model.group_projector(block), model.branch_projector(branch)))
        for branch in BRANCHES
        for block in blocks
    ]
    return [[decoherence_functional(model, hi, hj) for hj in histories] for hi in histories]


def brute_consistent_partitions(
    model: ExperimentModel, mode: str = "medium", tolerance: float = 1e-10
) -> list[Partition]:
    """Filter every partition of the open paths through the full matrix."""
    survivors = []
    for blocks in brute_partitions(model.open_indices):
        gram = partition_gram(model, blocks)
        m = len(gram)
        max_diag = max(gram[i][i].real for i in range(m))
        threshold = tolerance * max_diag if max_diag > 0.0 else TOLERANCE_FLOOR
        worst = 0.0
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                value = gram[i][j]
                violation = abs(value) if mode == "medium" else abs(value.real)
                worst = max(worst, violation)
        if worst <= threshold:
            survivors.append(Partition(tuple(blocks)))
    return survivors


def random_amplitudes(rng: random.Random, n: int) -> list[complex]:
    return [complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)) for _ in range(n)]


def random_scenario(rng: random.Random, n: int | None = None, kind: str = "generic") -> SlitScenario:
    """Randomized scenarios for property suites.

    ``generic``: dense random amplitudes.  ``planted``: one subset of paths
    sums to zero, so a nontrivial consistent split exists.  ``sparse``: most
    amplitudes are zero.  ``mixed-open``: some slits closed.
    """
    if n is None:
        n = rng.randint(1, 6)
    amps = random_amplitudes(rng, n)
    open_flags = [True] * n
    if kind == "planted" and n >= 2:
        subset = rng.sample(range(n), rng.randint(2, n))
        amps[subset[-1]] = -sum(amps[i] for i in subset[:-1])
    elif kind == "sparse":
        for i in rng.sample(range(n), rng.randint(0, n - 1)):
            amps[i] = 0j
    elif kind == "mixed-open" and n >= 2:
        for i in rng.sample(range(n), rng.randint(1, n - 1)):
            open_flags[i] = False
    return make_scenario(amps, open_flags)


def planted_scenario(rng: random.Random, n: int) -> tuple[SlitScenario, Partition | None]:
    """A scenario with a zero-sum subset, plus the two-group split it makes
    consistent (None when the subset covers every open path)."""
    amps = random_amplitudes(rng, n)
    subset = rng.sample(range(n), rng.randint(2, n))
    amps[subset[-1]] = -sum(amps[i] for i in subset[:-1])
    scenario = make_scenario(amps)
    rest = frozenset(range(n)) - frozenset(subset)
    if not rest:
        return scenario, None
    return scenario, Partition((frozenset(subset), rest))


def random_partition(rng: random.Random, items: Sequence[int]) -> Partition:
    groups: list[set[int]] = []
    for item in items:
        if groups and rng.random() < 0.6:
            rng.choice(groups).add(item)
        else:
            groups.append({item})
    return Partition(tuple(frozenset(g) for g in groups))
