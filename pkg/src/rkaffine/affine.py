"""Contention sets, the affine task R_k, leaders and iterated patterns.

Processes in a two-round run contend when they end with the same carrier.
``R_k`` keeps the runs of ``Chr^2`` in which no more than ``k`` processes
contend with each other; it is the combinatorial shape of k-concurrency.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .complex_core import ChromaticComplex, components
from .subdivision import (
    RunSequence,
    all_views,
    check_budget,
    enumerate_runs,
    nonempty_subsets,
    run_facet,
)


@dataclass(frozen=True)
class ContentionSet:
    members: frozenset
    shared_carrier: frozenset


def contention_classes(run: RunSequence) -> list:
    """Participants grouped by final carrier; the maximal contention sets."""
    final = all_views(run)[-1]
    groups: dict[frozenset, set] = {}
    for i, c in final.items():
        groups.setdefault(c, set()).add(i)
    out = [ContentionSet(frozenset(m), c) for c, m in groups.items()]
    out.sort(key=lambda s: (len(s.shared_carrier), sorted(s.members)))
    return out


def contention_sets(run: RunSequence) -> set:
    """Every nonempty set of processes with pairwise-equal carriers."""
    if run.m != 2:
        raise ValueError("contention sets are defined on two-round runs")
    return set(_expand(contention_classes(run)))


def _expand(classes: Iterable[ContentionSet]):
    for cls in classes:
        members = sorted(cls.members)
        for size in range(1, len(members) + 1):
            for sub in itertools.combinations(members, size):
                yield ContentionSet(frozenset(sub), cls.shared_carrier)


def max_contention(run: RunSequence) -> int:
    return max(len(c.members) for c in contention_classes(run))


@dataclass(frozen=True)
class AffinePattern:
    """A colour-blind predicate on ``m``-round runs over at most ``n`` processes."""

    name: str
    n: int
    m: int
    predicate: Callable[[RunSequence], bool] = field(compare=False)

    def accepts(self, run: RunSequence) -> bool:
        if run.m != self.m:
            raise ValueError(f"{self.name} expects {self.m}-round runs, got {run.m}")
        return bool(self.predicate(run))

    def accepted(self, participants: Iterable[int]) -> list:
        return [r for r in enumerate_runs(participants, self.m) if self.predicate(r)]


def rk_pattern(n: int, k: int) -> AffinePattern:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return AffinePattern(f"R_{k}", n, 2, lambda r: max_contention(r) <= k)


def ordered_pattern(n: int) -> AffinePattern:
    return AffinePattern("ordered", n, 1, lambda r: all(len(b) == 1 for b in r.rounds[0].blocks))


def ktas_pattern(n: int, k: int) -> AffinePattern:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return AffinePattern(f"{k}-TS", n, 1, lambda r: max_contention(r) <= k)


def iterated_runs(pattern: AffinePattern, t: int, participants: Iterable[int]) -> list:
    """Runs of ``t * m`` rounds whose every ``m``-round slice is accepted."""
    if t < 1:
        raise ValueError("need at least one iteration")
    slices = pattern.accepted(participants)
    out = []
    for combo in itertools.product(slices, repeat=t):
        rounds: tuple = ()
        for s in combo:
            rounds += s.rounds
        out.append(RunSequence(rounds))
    return out


def iterate_pattern(pattern: AffinePattern, t: int) -> ChromaticComplex:
    full = range(1, pattern.n + 1)
    check_budget(len(pattern.accepted(full)) ** t, f"{pattern.name} iterated {t} times")
    facets = set()
    for parts in nonempty_subsets(pattern.n):
        for run in iterated_runs(pattern, t, parts):
            facets.add(run_facet(run))
    return ChromaticComplex(frozenset(facets))


def build_rk(n: int, k: int) -> ChromaticComplex:
    return iterate_pattern(rk_pattern(n, k), 1)


def full_runs(pattern: AffinePattern, t: int = 1) -> list:
    """Accepted runs with every process participating."""
    return iterated_runs(pattern, t, range(1, pattern.n + 1))


# ----------------------------------------------------------------- leaders

class LeaderViolation(AssertionError):
    """No leader is visible to the undecided process with the smallest view."""

    def __init__(self, run: RunSequence, undecided: frozenset, k: int, detail: str):
        self.run = run
        self.undecided = undecided
        self.k = k
        super().__init__(f"{detail}: run={run} undecided={sorted(undecided)} k={k}")


@dataclass(frozen=True)
class LeaderSet:
    leaders: frozenset
    visible_leader: int


def smallest_is2_view(run: RunSequence, undecided: Iterable[int]) -> tuple:
    """The smallest final view held by an undecided process, and its holders."""
    undecided = frozenset(undecided)
    if not undecided:
        raise ValueError("undecided set is empty")
    if not undecided <= run.participants:
        raise ValueError("undecided processes must participate")
    final = all_views(run)[-1]
    smallest = min((final[i] for i in undecided), key=len)
    for i in undecided:
        if not smallest <= final[i]:
            raise AssertionError(f"final views not ordered by containment in {run}")
    holders = frozenset(i for i in undecided if final[i] == smallest)
    return smallest, holders


def leaders(run: RunSequence, undecided: Optional[Iterable[int]] = None, k: int = 1) -> LeaderSet:
    """Undecided processes whose first view holds at most ``k`` undecided ones."""
    undecided = run.participants if undecided is None else frozenset(undecided)
    if not undecided:
        raise ValueError("undecided set is empty")
    first = all_views(run)[0]
    lead = frozenset(i for i in undecided if len(first[i] & undecided) <= k)
    if len(lead) > k:
        raise LeaderViolation(run, undecided, k, f"{len(lead)} leaders")
    smallest, _ = smallest_is2_view(run, undecided)
    visible = sorted(lead & smallest)
    if not visible:
        raise LeaderViolation(run, undecided, k, "no visible leader")
    return LeaderSet(lead, visible[0])


# ------------------------------------------------------------ obstruction

@dataclass
class ObstructionReport:
    pattern: str
    n: int
    rows: list  # (t, facets, components)

    @property
    def all_connected(self) -> bool:
        return all(c == 1 for _, _, c in self.rows)

    def conclusion(self) -> str:
        t_max = self.rows[-1][0]
        if self.all_connected:
            return f"consensus unsolvable through {t_max} iterations"
        bad = [t for t, _, c in self.rows if c > 1]
        return f"complex disconnected at t={bad}; connectivity gives no obstruction"

    def lines(self) -> list:
        out = [f"pattern {self.pattern} n={self.n}"]
        for t, f, c in self.rows:
            out.append(f"t={t} facets={f} components={c} connected={str(c == 1).lower()}")
        out.append(self.conclusion())
        return out


def consensus_obstruction_report(pattern: AffinePattern, t_max: int) -> ObstructionReport:
    rows = []
    for t in range(1, t_max + 1):
        c = iterate_pattern(pattern, t)
        rows.append((t, len(c.top_facets()), len(components(c))))
    return ObstructionReport(pattern.name, pattern.n, rows)


def facet_record(run: RunSequence, facet_id: int, ks: Iterable[int]) -> dict:
    classes = contention_classes(run)
    worst = max(len(c.members) for c in classes)
    ks = list(ks)
    record = {
        "facetId": facet_id,
        "run": run.to_json(),
        "contentionClasses": [sorted(c.members) for c in classes],
        "inRk": {str(k): worst <= k for k in ks},
    }
    k_lead = min((k for k in ks if worst <= k), default=None)
    record["leaders"] = None
    if k_lead is not None:
        try:
            record["leaders"] = sorted(leaders(run, None, k_lead).leaders)
        except LeaderViolation as e:
            record["leaderViolation"] = str(e)
    record["smallestView"] = sorted(smallest_is2_view(run, run.participants)[0])
    return record


def leader_failures(n: int, k: int) -> list:
    """Every (run, undecided set) of ``R_k`` over ``n`` processes where the
    leader rule breaks: more than ``k`` leaders, or none visible. Runs over
    every participating subset are checked, not only the full one."""
    bad = []
    pat = rk_pattern(n, k)
    for parts in nonempty_subsets(n):
        for run in pat.accepted(parts):
            for und in nonempty_subsets(n):
                und = frozenset(und)
                if not und <= run.participants:
                    continue
                try:
                    leaders(run, und, k)
                except LeaderViolation as e:
                    bad.append((run, und, str(e)))
    return bad
