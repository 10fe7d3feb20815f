"""Tasks as input/output relations, output checkers and a decision-map search.

A task on ``n`` processes relates input vectors to output vectors; ``None``
marks a process that does not participate (input) or has not decided
(output). Bounded runs produce partial outputs, so every check reports two
things: whether the decided values can still be completed to a valid output,
and whether the run actually solved the task.
"""

from __future__ import annotations

import itertools
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

from .affine import AffinePattern, iterated_runs
from .complex_core import ChromaticComplex, Vertex
from .subdivision import check_budget, nonempty_subsets, run_facet

Relation = Callable[[tuple, tuple], bool]


@dataclass(frozen=True)
class Task:
    """``relation(inputs, outputs)`` decides complete outputs.

    ``partial`` optionally decides whether a partial output vector can be
    completed; without it completions are enumerated over ``outputs_domain``.
    """

    name: str
    n: int
    inputs: tuple  # admissible input vectors
    outputs_domain: tuple
    relation: Relation = field(compare=False)
    partial: Optional[Relation] = field(default=None, compare=False)


@dataclass(frozen=True)
class Verdict:
    consistent: bool  # some completion of the undecided slots is valid
    solved: bool  # every participant decided and the outputs are valid
    reason: str = ""

    def __bool__(self) -> bool:
        return self.consistent


def _validate(task: Task, inputs: Sequence, outputs: Sequence) -> tuple:
    if len(inputs) != task.n or len(outputs) != task.n:
        raise ValueError(f"{task.name}: vectors must have length {task.n}")
    return tuple(inputs), tuple(outputs)


def check_outputs(task: Task, inputs: Sequence, outputs: Sequence) -> Verdict:
    inputs, outputs = _validate(task, inputs, outputs)
    for i, (x, y) in enumerate(zip(inputs, outputs), start=1):
        if x is None and y is not None:
            return Verdict(False, False, f"process {i} decided without participating")
    undecided = [i for i, (x, y) in enumerate(zip(inputs, outputs)) if x is not None and y is None]
    if not undecided:
        ok = bool(task.relation(inputs, outputs))
        return Verdict(ok, ok, "" if ok else "outputs not related to inputs")
    if task.partial is not None:
        ok = bool(task.partial(inputs, outputs))
    else:
        ok = False
        for fill in itertools.product(task.outputs_domain, repeat=len(undecided)):
            full = list(outputs)
            for i, v in zip(undecided, fill):
                full[i] = v
            if task.relation(inputs, tuple(full)):
                ok = True
                break
    return Verdict(ok, False, "" if ok else "no completion of the decided values is valid")


# ------------------------------------------------------------------ built-ins

def _participating(inputs: tuple, outputs: tuple) -> tuple:
    return tuple(y for x, y in zip(inputs, outputs) if x is not None)


def kset_task(n: int, k: int, values: Iterable = (0, 1)) -> Task:
    """Decide proposed values, at most ``k`` distinct ones."""
    values = tuple(values)

    def relation(inp: tuple, out: tuple) -> bool:
        got = _participating(inp, out)
        proposed = {x for x in inp if x is not None}
        return all(y in proposed for y in got) and len(set(got)) <= k

    def partial(inp: tuple, out: tuple) -> bool:
        got = [y for y in _participating(inp, out) if y is not None]
        proposed = {x for x in inp if x is not None}
        return all(y in proposed for y in got) and len(set(got)) <= k

    name = "consensus" if k == 1 else f"{k}-set-agreement"
    return Task(name, n, _all_inputs(n, values), values, relation, partial)


def consensus_task(n: int, values: Iterable = (0, 1)) -> Task:
    return kset_task(n, 1, values)


def echo_task(n: int, values: Iterable = (0, 1)) -> Task:
    """Every participant outputs its own input."""
    values = tuple(values)

    def relation(inp: tuple, out: tuple) -> bool:
        return all(y == x for x, y in zip(inp, out) if x is not None)

    def partial(inp: tuple, out: tuple) -> bool:
        return all(y is None or y == x for x, y in zip(inp, out) if x is not None)

    return Task("echo", n, _all_inputs(n, values), values, relation, partial)


def _all_inputs(n: int, values: tuple) -> tuple:
    out = []
    for vec in itertools.product((None,) + values, repeat=n):
        if any(v is not None for v in vec):
            out.append(vec)
    return tuple(out)


def simplex_agreement(L: Any, n: Optional[int] = None) -> Task:
    """Outputs are ``Chr^2`` vertices; process ``i`` outputs a vertex of colour
    ``i``. Valid iff the decided vertices span a simplex of ``L`` inside
    ``Chr^2`` of the participating face.

    ``L`` is a two-round :class:`AffinePattern` or a complex of two-round
    vertices. Inputs are participation markers (any non-``None`` value).
    """
    if isinstance(L, AffinePattern):
        if L.m != 2:
            raise ValueError(f"simplex agreement needs a two-round pattern, got m={L.m}")
        n = L.n
        facets = _pattern_facets(L)
    elif isinstance(L, ChromaticComplex):
        if n is None:
            n = max(L.colors)
        depths = {v.depth for v in L.vertices}
        if depths != {2}:
            raise ValueError("simplex agreement needs a complex of two-round vertices")
        facets = list(L.facets)
    else:
        raise TypeError("L must be an AffinePattern or a ChromaticComplex")

    def spans(inp: tuple, out: tuple, complete: bool) -> bool:
        part = frozenset(i for i, x in enumerate(inp, start=1) if x is not None)
        decided = {}
        for i, y in enumerate(out, start=1):
            if y is None:
                continue
            if not isinstance(y, Vertex) or y.color != i or not y.carrier <= part:
                return False
            decided[i] = y
        if complete and set(decided) != part:
            return False
        want = frozenset(decided.values())
        for f in facets:
            inside = frozenset(v for v in f if v.color in part)
            if {v.color for v in inside} != part or any(not v.carrier <= part for v in inside):
                continue
            if want <= inside:
                return True
        return False

    return Task(f"simplex-agreement({getattr(L, 'name', 'L')})", n, _all_inputs(n, (1,)), (),
                lambda i, o: spans(i, o, True), lambda i, o: spans(i, o, False))


def _pattern_facets(L: AffinePattern) -> list:
    facets = []
    for parts in nonempty_subsets(L.n):
        for run in L.accepted(parts):
            facets.append(run_facet(run))
    return facets


BUILTINS = {
    "consensus": lambda n, dom, spec: consensus_task(n, dom),
    "kset": lambda n, dom, spec: kset_task(n, int(spec.get("k", 1)), dom),
    "echo": lambda n, dom, spec: echo_task(n, dom),
}


def task_from_json(data: Any) -> Task:
    """Load ``{n, inputs, outputsDomain, deltaKind, table?, name?, k?}``.

    ``deltaKind`` is ``builtin`` (``name`` one of consensus, kset, echo) or
    ``table``: a list of ``{"input": [...], "outputs": [[...], ...]}`` rows,
    ``null`` standing for a missing value.
    """
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    try:
        n = int(data["n"])
        dom = tuple(data["outputsDomain"])
        kind = data["deltaKind"]
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed task description: {e}") from None
    if kind == "builtin":
        name = data.get("name")
        if name not in BUILTINS:
            raise ValueError(f"unknown builtin task {name!r}; pick one of {sorted(BUILTINS)}")
        task = BUILTINS[name](n, dom, data)
        if "inputs" in data:
            task = Task(task.name, n, tuple(tuple(v) for v in data["inputs"]), dom,
                        task.relation, task.partial)
        return task
    if kind == "table":
        table: dict = {}
        for row in data.get("table") or []:
            inp = tuple(row["input"])
            if len(inp) != n:
                raise ValueError(f"table input {inp} has wrong length")
            table.setdefault(inp, set()).update(tuple(o) for o in row["outputs"])
        inputs = tuple(tuple(v) for v in data.get("inputs", table.keys()))
        missing = [v for v in inputs if v not in table]
        if missing:
            raise ValueError(f"relation is not total: no outputs for {missing[0]}")
        return Task(data.get("name", "table"), n, inputs, dom,
                    lambda i, o: o in table.get(tuple(i), ()))
    raise ValueError(f"deltaKind must be 'builtin' or 'table', got {kind!r}")


# ---------------------------------------------------------- decision maps

@dataclass
class SearchResult:
    found: bool
    rounds: Optional[int]
    decision: Optional[dict]  # (colour, vertex, seen inputs) -> output
    tried: list  # (m, variables, constraints) per attempted m

    def describe(self) -> str:
        if self.found:
            return f"decision map found at m={self.rounds} ({len(self.decision)} vertices)"
        top = self.tried[-1][0] if self.tried else 0
        return f"no bounded solution up to m={top}"


def _protocol_constraints(task: Task, pattern: AffinePattern, m: int) -> tuple:
    """Variables are vertices of the iterated pattern paired with the inputs
    the vertex has seen; one constraint per (input vector, run)."""
    n = task.n
    check_budget(len(pattern.accepted(range(1, n + 1))) ** m * max(1, len(task.inputs)),
                 f"decision-map search over {pattern.name}^{m}")
    runs_by_part = {}
    cons = []
    for inp in task.inputs:
        part = tuple(i for i, x in enumerate(inp, start=1) if x is not None)
        if part not in runs_by_part:
            runs_by_part[part] = iterated_runs(pattern, m, part)
        for run in runs_by_part[part]:
            scope = []
            for v in run_facet(run):
                seen = tuple((j, inp[j - 1]) for j in sorted(v.carrier))
                scope.append((v.color, v, seen))
            scope.sort(key=lambda x: x[0])
            cons.append((inp, tuple(scope)))
    return cons


def solvability_search(task: Task, pattern: AffinePattern, max_rounds: int,
                       domain: Optional[Callable[[tuple], Iterable]] = None) -> SearchResult:
    """Look for a colour-preserving decision map on ``pattern`` iterated
    ``m`` times, ``m = 1..max_rounds``, accepted on every run.

    ``domain(var)`` restricts candidate outputs of a variable (default: the
    task's output domain, or the own input for simplex-free tasks whose
    domain is empty). Backtracking with forward checking and smallest-domain
    variable order; value order is the domain order, so the first map found
    is deterministic.
    """
    if pattern.n != task.n:
        raise ValueError("task and pattern disagree on n")
    tried = []
    for m in range(1, max_rounds + 1):
        cons = _protocol_constraints(task, pattern, m)
        sol = _solve(task, cons, domain)
        nvars = len({x for _, scope in cons for x in scope})
        tried.append((m, nvars, len(cons)))
        if sol is not None:
            return SearchResult(True, m, sol, tried)
    return SearchResult(False, None, None, tried)


def _solve(task: Task, cons: list, domain) -> Optional[dict]:
    by_var: dict = {}
    for idx, (_, scope) in enumerate(cons):
        for x in scope:
            by_var.setdefault(x, []).append(idx)
    order = sorted(by_var, key=lambda x: (x[0], x[1].label_str, x[2]))
    dom0 = {}
    for x in order:
        vals = list(domain(x)) if domain is not None else list(task.outputs_domain)
        dom0[x] = vals
    assign: dict = {}

    def ok(ci: int) -> bool:
        inp, scope = cons[ci]
        out = [None] * task.n
        for x in scope:
            if x in assign:
                out[x[0] - 1] = assign[x]
        return check_outputs(task, inp, out).consistent

    # unary pruning: a variable alone in a constraint's assigned part
    doms = {}
    for x in order:
        keep = []
        for v in dom0[x]:
            assign[x] = v
            if all(ok(ci) for ci in by_var[x]):
                keep.append(v)
            del assign[x]
        if not keep:
            return None
        doms[x] = keep

    def backtrack(doms: dict) -> Optional[dict]:
        free = [x for x in order if x not in assign]
        if not free:
            return dict(assign)
        x = min(free, key=lambda y: len(doms[y]))
        for v in doms[x]:
            assign[x] = v
            if all(ok(ci) for ci in by_var[x]):
                nd = _forward(x, doms)
                if nd is not None:
                    res = backtrack(nd)
                    if res is not None:
                        return res
            del assign[x]
        return None

    def _forward(x, doms: dict) -> Optional[dict]:
        nd = dict(doms)
        for ci in by_var[x]:
            for y in cons[ci][1]:
                if y in assign:
                    continue
                keep = []
                for w in nd[y]:
                    assign[y] = w
                    if ok(ci):
                        keep.append(w)
                    del assign[y]
                if not keep:
                    return None
                nd[y] = keep
        return nd

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(order) + 100))
    try:
        return backtrack(doms)
    finally:
        sys.setrecursionlimit(limit)
