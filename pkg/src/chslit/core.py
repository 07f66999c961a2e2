"""Amplitudes, paths, partitions and counting rates for multi-slit scenarios.

A scenario is a list of slits, each carrying a complex amplitude and an
open/closed flag; a slit may be subdivided into parts.  Flattening the slits
gives the scenario's path list, and every other module works with path
indices into that list.  Closed slits keep their dimension (with the path
marked closed) so indices stay stable when slits are toggled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    BadIndex,
    ClosedPathInGroup,
    EmptyMask,
    NotExhaustive,
    OverlappingGroups,
    PartSumMismatch,
)

#: Absolute tolerance for sub-part amplitudes summing to the slit amplitude.
PART_SUM_TOLERANCE = 1e-12


def _require_finite(value: complex, what: str) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{what} must have finite components, got {z!r}")
    return z


@dataclass(frozen=True)
class PathId:
    """Stable identity of one flattened path: dense index plus display label."""

    index: int
    label: str


@dataclass(frozen=True)
class Path:
    """One flattened path with its amplitude and open/closed state."""

    path_id: PathId
    amplitude: complex
    is_open: bool

    @property
    def index(self) -> int:
        return self.path_id.index

    @property
    def label(self) -> str:
        return self.path_id.label


@dataclass(frozen=True)
class SlitPart:
    label: str
    amplitude: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitude", _require_finite(self.amplitude, f"part {self.label!r} amplitude"))


@dataclass(frozen=True)
class Slit:
    """A slit in the wall.  ``parts`` subdivides it into sub-paths whose
    amplitudes must sum to the slit amplitude."""

    label: str
    amplitude: complex
    is_open: bool = True
    parts: tuple[SlitPart, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitude", _require_finite(self.amplitude, f"slit {self.label!r} amplitude"))
        object.__setattr__(self, "parts", tuple(self.parts))
        if self.parts:
            labels = [p.label for p in self.parts]
            if len(set(labels)) != len(labels):
                raise ValueError(f"slit {self.label!r} has duplicate part labels")
            total = sum((p.amplitude for p in self.parts), 0j)
            if abs(total - self.amplitude) > PART_SUM_TOLERANCE:
                raise PartSumMismatch(
                    self.label,
                    f"parts of slit {self.label!r} sum to {total}, expected {self.amplitude}",
                )


@dataclass(frozen=True, eq=False)
class SlitScenario:
    """A named slit configuration together with its flattened path list."""

    name: str
    slits: tuple[Slit, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "slits", tuple(self.slits))
        labels = [s.label for s in self.slits]
        if len(set(labels)) != len(labels):
            raise ValueError("slit labels must be unique")

    @cached_property
    def paths(self) -> tuple[Path, ...]:
        """Flattened paths: a slit with parts contributes one path per part."""
        out: list[Path] = []
        for slit in self.slits:
            if slit.parts:
                for part in slit.parts:
                    pid = PathId(len(out), f"{slit.label}.{part.label}")
                    out.append(Path(pid, part.amplitude, slit.is_open))
            else:
                pid = PathId(len(out), slit.label)
                out.append(Path(pid, slit.amplitude, slit.is_open))
        return tuple(out)

    @cached_property
    def amplitudes(self) -> tuple[complex, ...]:
        return tuple(p.amplitude for p in self.paths)

    @cached_property
    def open_indices(self) -> tuple[int, ...]:
        return tuple(p.index for p in self.paths if p.is_open)

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    @property
    def n_open(self) -> int:
        return len(self.open_indices)

    def path_label(self, index: int) -> str:
        return self.paths[index].label

    def check_index(self, index: int) -> int:
        if not 0 <= index < self.n_paths:
            raise BadIndex(f"path index {index} out of range 0..{self.n_paths - 1}")
        return index


@dataclass(frozen=True)
class Partition:
    """Disjoint groups of path indices, in canonical order.

    Groups are sorted by smallest member; exhaustiveness over a particular
    path set is checked where the partition is used, since the same
    combinatorial object may be read against open positions or path indices.
    """

    groups: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        groups = tuple(sorted((frozenset(g) for g in self.groups), key=min))
        for g in groups:
            if not g:
                raise ValueError("partition groups must be non-empty")
        seen: set[int] = set()
        for g in groups:
            overlap = seen & g
            if overlap:
                raise OverlappingGroups(f"path {min(overlap) + 1} appears in two groups")
            seen |= g
        object.__setattr__(self, "groups", groups)

    @property
    def universe(self) -> frozenset[int]:
        return frozenset().union(*self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def refines(self, other: "Partition") -> bool:
        """True when every group here sits inside a single group of ``other``."""
        return all(any(g <= h for h in other.groups) for g in self.groups)

    def __str__(self) -> str:
        return format_partition(self)


def parse_partition(text: str, n_paths: int) -> Partition:
    """Parse ``"1,2|3"``-style text into a partition of paths 1..n_paths.

    Groups are separated by ``|`` and hold comma-separated 1-based indices;
    internally indices are 0-based.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    groups: list[set[int]] = []
    for group_text in text.split("|"):
        members: set[int] = set()
        for token in group_text.split(","):
            token = token.strip()
            if not token:
                raise BadIndex(f"empty index in partition text {text!r}")
            try:
                one_based = int(token)
            except ValueError:
                raise BadIndex(f"cannot parse path index {token!r}") from None
            if not 1 <= one_based <= n_paths:
                raise BadIndex(f"path index {one_based} out of range 1..{n_paths}")
            members.add(one_based - 1)
        groups.append(members)
    partition = Partition(tuple(frozenset(g) for g in groups))
    missing = set(range(n_paths)) - partition.universe
    if missing:
        raise NotExhaustive(f"partition is missing path {min(missing) + 1}")
    return partition


def format_partition(partition: Partition) -> str:
    """Canonical text for a partition, inverse of :func:`parse_partition`."""
    return "|".join(",".join(str(i + 1) for i in sorted(g)) for g in partition.groups)


def partition_on_paths(scenario: SlitScenario, partition: Partition) -> Partition:
    """Reinterpret a partition of open positions 1..k as one of path indices.

    Partition text always numbers the open paths in flattening order; when
    every slit is open this is the identity.
    """
    open_indices = scenario.open_indices
    k = len(open_indices)
    if partition.universe != frozenset(range(k)):
        raise BadIndex(f"partition must cover open positions 1..{k}")
    return Partition(tuple(frozenset(open_indices[j] for j in g) for g in partition.groups))


def partition_on_positions(scenario: SlitScenario, partition: Partition) -> Partition:
    """Inverse of :func:`partition_on_paths`, for display."""
    position = {idx: j for j, idx in enumerate(scenario.open_indices)}
    if partition.universe != frozenset(scenario.open_indices):
        raise BadIndex("partition must cover exactly the scenario's open paths")
    return Partition(tuple(frozenset(position[i] for i in g) for g in partition.groups))


def parse_scenario_partition(scenario: SlitScenario, text: str) -> Partition:
    """Parse partition text against a scenario, yielding path indices."""
    return partition_on_paths(scenario, parse_partition(text, scenario.n_open))


def format_scenario_partition(scenario: SlitScenario, partition: Partition) -> str:
    """Canonical text of a path-index partition, numbered over open positions."""
    return format_partition(partition_on_positions(scenario, partition))


def _sum_amplitudes(scenario: SlitScenario, indices: Iterable[int]) -> complex:
    # fsum keeps the sum correctly rounded and independent of group order,
    # which is what makes disjoint groups add exactly.
    amps = [scenario.paths[i].amplitude for i in sorted(indices)]
    return complex(math.fsum(a.real for a in amps), math.fsum(a.imag for a in amps))


def group_amplitude(scenario: SlitScenario, group: Iterable[int]) -> complex:
    """Sum of path amplitudes over a group of open paths.

    Groups add exactly: the amplitude of a composite slit is the plain
    complex sum of its members.  An empty group sums to zero.
    """
    members = frozenset(group)
    for index in members:
        scenario.check_index(index)
        path = scenario.paths[index]
        if not path.is_open:
            raise ClosedPathInGroup(f"path {path.label!r} is closed")
    return _sum_amplitudes(scenario, members)


def counting_rate(scenario: SlitScenario, open_mask: Iterable[int]) -> float:
    """Relative detector counting rate with exactly ``open_mask`` held open.

    Returns ``|sum of the masked amplitudes|**2``; the proportionality
    constant is fixed at 1 by convention.  The mask is hypothetical, so it
    may include paths whose slit is currently closed.
    """
    mask = frozenset(open_mask)
    if not mask:
        raise EmptyMask("counting rate needs at least one open path")
    for index in mask:
        scenario.check_index(index)
    return abs(_sum_amplitudes(scenario, mask)) ** 2
