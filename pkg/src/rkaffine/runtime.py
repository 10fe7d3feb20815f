"""A deterministic, explorable model of asynchronous shared memory.

Protocols are state machines over hashable local states. A process either
invokes an operation on a shared object or returns a value. Shared objects are
addressed by tuple keys and created on first use. Every shared-memory
operation is one scheduler event; nondeterministic objects offer several
outcomes and the chosen branch index is part of the event.

Immediate-snapshot objects are special: the scheduler resolves them in
explicit blocks. Any nonempty subset of the processes pending on the same IS
object may be released together, and each member sees every value released up
to and including its block.

A process is active from its first event until the event in which it returns.
A k-concurrent exploration only enables events that keep the active set, plus
the processes taking the event, within ``k``.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence


class Violation(AssertionError):
    """A checked property failed. ``path`` holds the offending events."""

    def __init__(self, prop: str, detail: str, path: Sequence = ()):
        self.prop = prop
        self.detail = detail
        self.path = tuple(path)
        super().__init__(f"{prop}: {detail}")


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class Invoke:
    key: tuple
    method: str
    args: tuple = ()


@dataclass(frozen=True)
class Return:
    value: Any


_NOT_DONE = ("__pending__",)


def canon(x: Any) -> str:
    """Order-independent serialization used for digests and trace files."""
    if x is None or isinstance(x, (bool, int, str)):
        return json.dumps(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (frozenset, set)):
        return "{" + ",".join(sorted(canon(e) for e in x)) + "}"
    if isinstance(x, (tuple, list)):
        return "[" + ",".join(canon(e) for e in x) + "]"
    if isinstance(x, dict):
        return "<" + ",".join(sorted(canon(k) + ":" + canon(v) for k, v in x.items())) + ">"
    if hasattr(x, "__dataclass_fields__"):
        return type(x).__name__ + canon(tuple(getattr(x, f) for f in x.__dataclass_fields__))
    return repr(x)


def jsonable(x: Any) -> Any:
    if x is None or isinstance(x, (bool, int, str, float)):
        return x
    if isinstance(x, (frozenset, set)):
        return sorted((jsonable(e) for e in x), key=canon)
    if isinstance(x, (tuple, list)):
        return [jsonable(e) for e in x]
    if isinstance(x, dict):
        return {canon(k): jsonable(v) for k, v in sorted(x.items(), key=lambda kv: canon(kv[0]))}
    if hasattr(x, "__dataclass_fields__"):
        return {f: jsonable(getattr(x, f)) for f in x.__dataclass_fields__}
    return repr(x)


def digest(x: Any) -> str:
    """Stable 64-bit digest, hex encoded."""
    return hashlib.blake2b(canon(x).encode(), digest_size=8).hexdigest()


# ------------------------------------------------------------ object types

class ObjectType:
    """Semantics of a shared object.

    ``start`` turns an invocation into a progress token; ``step`` performs one
    atomic step and returns the possible ``(new_state, finished, payload)``
    outcomes, where ``payload`` is the response if finished and the next
    progress token otherwise.
    """

    block = False

    def initial(self) -> Any:
        raise NotImplementedError

    def start(self, pid: int, method: str, args: tuple) -> Any:
        return (method, args)

    def step(self, state: Any, pid: int, prog: Any) -> list:
        raise NotImplementedError


class SnapshotMemory(ObjectType):
    """Single-writer atomic snapshot memory with ``n`` cells."""

    def __init__(self, n: int, empty: Any = None):
        self.n = n
        self.empty = empty

    def initial(self) -> tuple:
        return (self.empty,) * self.n

    def step(self, state: tuple, pid: int, prog: Any) -> list:
        method, args = prog
        if method == "update":
            (v,) = args
            return [(snapshot_update(state, pid, v), True, None)]
        if method == "scan":
            return [(state, True, snapshot_scan(state, pid))]
        raise ProtocolError(f"memory has no method {method!r}")


def snapshot_update(mem: tuple, i: int, v: Any) -> tuple:
    if not 1 <= i <= len(mem):
        raise IndexError(f"process {i} has no cell")
    return mem[: i - 1] + (v,) + mem[i:]


def snapshot_scan(mem: tuple, i: int) -> tuple:
    if not 1 <= i <= len(mem):
        raise IndexError(f"process {i} has no cell")
    return mem


class ISObject(ObjectType):
    """One-shot immediate snapshot. State: released ``(pid, value)`` pairs in block order."""

    block = True

    def initial(self) -> tuple:
        return ()

    def release(self, state: tuple, entries: Sequence) -> tuple:
        seen = {p for blk in state for p, _ in blk}
        for pid, _ in entries:
            if pid in seen:
                raise ProtocolError(f"process {pid} invoked a one-shot IS object twice")
        new = state + (tuple(sorted(entries)),)
        view = frozenset(e for blk in new for e in blk)
        return new, {pid: view for pid, _ in entries}


def is_invoke(state: tuple, entries: Sequence) -> tuple:
    """Release one block of ``(pid, value)`` invocations."""
    return ISObject().release(state, entries)


# --------------------------------------------------------------- protocols

class Protocol:
    """Base class. Subclasses define ``n``, ``init``, ``action``, ``resume``
    and ``obj_type``; ``monitors`` are ghost observers checked on every event."""

    n: int = 0
    name: str = "protocol"

    def init(self, pid: int, inp: Any) -> Any:
        raise NotImplementedError

    def action(self, pid: int, local: Any):
        raise NotImplementedError

    def resume(self, pid: int, local: Any, response: Any) -> Any:
        raise NotImplementedError

    def obj_type(self, key: tuple) -> ObjectType:
        raise NotImplementedError

    def monitors(self) -> Sequence["Monitor"]:
        return ()

    def prune(self, config: "Config") -> "Config":
        """Drop state no process can observe any more (merges more states)."""
        return config

    def describe(self) -> dict:
        return {"protocol": self.name, "n": self.n}


class Monitor:
    """Ghost observer. Its state is part of the explored global state."""

    name = "monitor"

    def initial(self, config: "Config") -> Any:
        return None

    def on_event(self, ghost: Any, before: "Config", after: "Config", rec: "EventRecord") -> Any:
        return ghost

    def at_end(self, ghost: Any, config: "Config") -> None:
        pass


@dataclass(frozen=True)
class Config:
    locals: tuple
    pend: tuple  # per process: None or (key, progress)
    done: tuple  # per process: return value or the not-done marker
    started: frozenset
    objs: tuple  # sorted ((key, state), ...)

    def obj(self, key: tuple, default: Any = None) -> Any:
        for k, s in self.objs:
            if k == key:
                return s
        return default

    def is_done(self, pid: int) -> bool:
        return self.done[pid - 1] is not _NOT_DONE

    def output(self, pid: int) -> Any:
        v = self.done[pid - 1]
        return None if v is _NOT_DONE else v

    @property
    def active(self) -> frozenset:
        return frozenset(p for p in self.started if not self.is_done(p))

    def all_done(self) -> bool:
        return all(v is not _NOT_DONE for v in self.done)


def _set_obj(objs: tuple, key: tuple, state: Any) -> tuple:
    out = [kv for kv in objs if kv[0] != key]
    out.append((key, state))
    out.sort(key=lambda kv: canon(kv[0]))
    return tuple(out)


def _set(t: tuple, pid: int, v: Any) -> tuple:
    return t[: pid - 1] + (v,) + t[pid:]


@dataclass(frozen=True)
class Event:
    """A schedule token: the processes taking a step and the chosen branch."""

    pids: tuple
    choice: int = 0

    def to_json(self) -> list:
        return [list(self.pids), self.choice]


@dataclass(frozen=True)
class EventRecord:
    pids: tuple
    kind: str
    key: Optional[tuple]
    args: Any
    response: Any
    returned: tuple  # pids that returned in this event


class Machine:
    """Applies events of one protocol instance."""

    def __init__(self, protocol: Protocol, inputs: Sequence, k: Optional[int] = None):
        self.p = protocol
        self.n = protocol.n
        if len(inputs) != self.n:
            raise ValueError(f"need {self.n} inputs, got {len(inputs)}")
        self.inputs = tuple(inputs)
        self.k = self.n if k is None else k
        self._types: dict = {}
        self.participants = tuple(i for i in range(1, self.n + 1) if inputs[i - 1] is not None)
        self._prunes = type(protocol).prune is not Protocol.prune

    def otype(self, key: tuple) -> ObjectType:
        t = self._types.get(key)
        if t is None:
            t = self.p.obj_type(key)
            self._types[key] = t
        return t

    def initial(self) -> Config:
        locs, done = [], []
        for i in range(1, self.n + 1):
            if self.inputs[i - 1] is None:
                locs.append(None)
                done.append(None)
            else:
                locs.append(self.p.init(i, self.inputs[i - 1]))
                done.append(_NOT_DONE)
        return Config(tuple(locs), (None,) * self.n, tuple(done), frozenset(), ())

    def _obj_state(self, c: Config, key: tuple) -> Any:
        for k, s in c.objs:
            if k == key:
                return s
        return self.otype(key).initial()

    def enabled(self, c: Config) -> list:
        """Enabled events, each with its outcome ``(Event, Config, EventRecord)``."""
        out = []
        active = c.active
        blocks: dict = {}
        for pid in self.participants:
            if c.is_done(pid):
                continue
            if len(active | {pid}) > self.k:
                continue
            pend = c.pend[pid - 1]
            if pend is not None:
                key, prog = pend
                out.extend(self._step_events(c, pid, key, prog, None))
                continue
            act = self.p.action(pid, c.locals[pid - 1])
            if isinstance(act, Return):
                ev = Event((pid,), 0)
                c2 = Config(c.locals, c.pend, _set(c.done, pid, act.value),
                            c.started | {pid}, c.objs)
                out.append((ev, c2, EventRecord((pid,), "ret", None, None, act.value, (pid,))))
                continue
            if not isinstance(act, Invoke):
                raise ProtocolError(f"process {pid} produced {act!r}")
            t = self.otype(act.key)
            if t.block:
                blocks.setdefault(act.key, []).append((pid, act))
            else:
                out.extend(self._step_events(c, pid, act.key, t.start(pid, act.method, act.args), act))
        for key in sorted(blocks, key=canon):
            waiting = blocks[key]
            for size in range(1, len(waiting) + 1):
                for combo in itertools.combinations(waiting, size):
                    pids = tuple(p for p, _ in combo)
                    if len(active | set(pids)) > self.k:
                        continue
                    out.append(self._block_event(c, key, combo))
        if self._prunes:
            out = [(e, self.p.prune(c2), rec) for e, c2, rec in out]
        return out

    def _finish(self, c: Config, pid: int, locs: tuple, pend: tuple, done: tuple, response: Any):
        local = self.p.resume(pid, locs[pid - 1], response)
        locs = _set(locs, pid, local)
        returned = ()
        nxt = self.p.action(pid, local)
        if isinstance(nxt, Return):
            done = _set(done, pid, nxt.value)
            returned = (pid,)
        return locs, pend, done, returned

    def _step_events(self, c: Config, pid: int, key: tuple, prog: Any, act: Optional[Invoke]) -> list:
        t = self.otype(key)
        state = self._obj_state(c, key)
        out = []
        for choice, (new_state, finished, payload) in enumerate(t.step(state, pid, prog)):
            objs = _set_obj(c.objs, key, new_state)
            locs, pend, done = c.locals, c.pend, c.done
            if finished:
                pend = _set(pend, pid, None)
                locs, pend, done, returned = self._finish(c, pid, locs, pend, done, payload)
                resp = payload
            else:
                pend = _set(pend, pid, (key, payload))
                returned = ()
                resp = None
            kind = prog[0] if isinstance(prog, tuple) and prog and isinstance(prog[0], str) else "step"
            args = act.args if act is not None else prog
            c2 = Config(locs, pend, done, c.started | {pid}, objs)
            out.append((Event((pid,), choice), c2, EventRecord((pid,), kind, key, args, resp, returned)))
        return out

    def _block_event(self, c: Config, key: tuple, combo: Sequence):
        t = self.otype(key)
        state = self._obj_state(c, key)
        entries = [(pid, act.args[0] if act.args else None) for pid, act in combo]
        new_state, responses = t.release(state, entries)
        objs = _set_obj(c.objs, key, new_state)
        locs, pend, done = c.locals, c.pend, c.done
        returned: tuple = ()
        for pid, _ in combo:
            locs, pend, done, r = self._finish(c, pid, locs, pend, done, responses[pid])
            returned += r
        pids = tuple(p for p, _ in combo)
        c2 = Config(locs, pend, done, c.started | set(pids), objs)
        rec = EventRecord(pids, "is", key, tuple(entries), responses, returned)
        return Event(pids, 0), c2, rec

    def apply(self, c: Config, ev: Event):
        for e, c2, rec in self.enabled(c):
            if e == ev:
                return c2, rec
        raise ProtocolError(f"event {ev} is not enabled")


# ------------------------------------------------------------------ traces

@dataclass
class Trace:
    header: dict
    events: list = field(default_factory=list)  # Event
    records: list = field(default_factory=list)  # EventRecord
    digests: list = field(default_factory=list)

    def lines(self) -> list:
        out = [json.dumps({"header": self.header}, sort_keys=True)]
        for seq, (ev, rec, dg) in enumerate(zip(self.events, self.records, self.digests)):
            pid = rec.pids[0] if len(rec.pids) == 1 else list(rec.pids)
            out.append(json.dumps({
                "seq": seq,
                "pid": pid,
                "kind": rec.kind,
                "args": {"key": jsonable(rec.key), "args": jsonable(rec.args),
                         "response": jsonable(rec.response), "choice": ev.choice,
                         "returned": list(rec.returned)},
                "stateDigest": dg,
            }, sort_keys=True))
        return out

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    @staticmethod
    def parse(text: str) -> tuple:
        """Return ``(header, [(Event, digest)])`` from JSONL text."""
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or "header" not in rows[0]:
            raise ValueError("trace file lacks a header line")
        header = rows[0]["header"]
        evs = []
        for row in rows[1:]:
            pid = row["pid"]
            pids = tuple(pid) if isinstance(pid, list) else (pid,)
            evs.append((Event(pids, row["args"]["choice"]), row["stateDigest"]))
        return header, evs


def state_digest(c: Config, ghost: Any = None) -> str:
    return digest((c, ghost))


def run_protocol(protocol: Protocol, inputs: Sequence, schedule: "Schedule",
                 header: Optional[dict] = None, strict: bool = True):
    """Drive ``protocol`` along ``schedule``. Returns ``(outputs, Trace)``.

    Outputs are ``None`` for processes that did not return. With ``strict``,
    a token naming a returned or non-enabled process raises ``ProtocolError``.
    Monitor violations are raised.
    """
    outs, trace, violation = record(protocol, inputs, schedule, header, strict)
    if violation is not None:
        raise violation
    return outs, trace


def record(protocol: Protocol, inputs: Sequence, schedule: "Schedule",
           header: Optional[dict] = None, strict: bool = True) -> tuple:
    """Like :func:`run_protocol` but stops at the first violation and returns
    ``(outputs, Trace, Violation or None)``. The violating event is the last
    one in the trace; its digest is ``None``."""
    m = Machine(protocol, inputs, schedule.bound)
    c = m.initial()
    mons = list(protocol.monitors())
    ghost = tuple(mon.initial(c) for mon in mons)
    trace = Trace(header or {**protocol.describe(), "inputs": jsonable(list(inputs)),
                             "bound": schedule.bound})
    path: list = []
    for ev in schedule.events:
        try:
            c2, rec = m.apply(c, ev)
        except ProtocolError:
            if strict:
                raise
            continue
        except Violation as v:
            trace.events.append(ev)
            trace.records.append(EventRecord(ev.pids, "violation", (), (), None, ()))
            trace.digests.append(None)
            return [c.output(i) for i in range(1, m.n + 1)], trace, Violation(v.prop, v.detail, path + [ev])
        path.append(ev)
        trace.events.append(ev)
        trace.records.append(rec)
        try:
            ghost = _observe(mons, ghost, c, c2, rec, path)
        except Violation as v:
            trace.digests.append(None)
            return [c2.output(i) for i in range(1, m.n + 1)], trace, v
        trace.digests.append(state_digest(c2, ghost))
        c = c2
    try:
        for mon, g in zip(mons, ghost):
            mon.at_end(g, c)
    except Violation as v:
        return [c.output(i) for i in range(1, m.n + 1)], trace, v
    return [c.output(i) for i in range(1, m.n + 1)], trace, None


def _observe(mons, ghost, c, c2, rec, path):
    if not mons:
        return ghost
    out = []
    for mon, g in zip(mons, ghost):
        try:
            out.append(mon.on_event(g, c, c2, rec))
        except Violation as v:
            raise Violation(v.prop, v.detail, path) from None
    return tuple(out)


def replay(protocol: Protocol, inputs: Sequence, bound: Optional[int], events: Sequence) -> tuple:
    """Re-run recorded events; returns ``(outputs, Trace)``."""
    return run_protocol(protocol, inputs, Schedule(tuple(events), bound))


def verify_replay(protocol: Protocol, inputs: Sequence, bound: Optional[int],
                  recorded: Sequence) -> Optional[int]:
    """Index of the first digest mismatch, or ``None`` if the replay matches."""
    _, trace = replay(protocol, inputs, bound, [ev for ev, _ in recorded])
    for i, ((_, want), got) in enumerate(zip(recorded, trace.digests)):
        if want != got:
            return i
    if len(trace.digests) != len(recorded):
        return len(trace.digests)
    return None


# --------------------------------------------------------------- schedules

@dataclass(frozen=True)
class Schedule:
    events: tuple
    bound: Optional[int] = None

    def __len__(self) -> int:
        return len(self.events)


def _schedules(n: int, k: int, depth: int, steps: Optional[int]) -> Iterator[tuple]:
    def rec(prefix: tuple, used: tuple, active: frozenset) -> Iterator[tuple]:
        if len(prefix) == depth:
            yield prefix
            return
        progressed = False
        for pid in range(1, n + 1):
            if steps is not None and used[pid - 1] >= steps:
                continue
            if pid not in active and len(active) >= k:
                continue
            u = used[: pid - 1] + (used[pid - 1] + 1,) + used[pid:]
            a = active | {pid}
            if steps is not None and u[pid - 1] == steps:
                a = a - {pid}
            progressed = True
            yield from rec(prefix + (pid,), u, a)
        if not progressed:
            yield prefix
    yield from rec((), (0,) * n, frozenset())


def enumerate_schedules(n: int, k: Optional[int] = None, depth: int = 4,
                        steps_per_process: Optional[int] = None) -> Iterator[Schedule]:
    """All single-process interleavings of ``depth`` events under bound ``k``.

    With ``steps_per_process`` a process returns after that many events,
    freeing its concurrency slot; shorter schedules are produced when every
    process has returned.
    """
    k = n if k is None else k
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    for seq in _schedules(n, k, depth, steps_per_process):
        yield Schedule(tuple(Event((p,)) for p in seq), k)


def seeded_schedule(n: int, k: Optional[int], seed: int, depth: int,
                    steps_per_process: Optional[int] = None) -> Schedule:
    k = n if k is None else k
    rng = random.Random(seed)
    used = [0] * n
    active: set = set()
    seq = []
    for _ in range(depth):
        options = [p for p in range(1, n + 1)
                   if (steps_per_process is None or used[p - 1] < steps_per_process)
                   and (p in active or len(active) < k)]
        if not options:
            break
        p = rng.choice(options)
        used[p - 1] += 1
        active.add(p)
        if steps_per_process is not None and used[p - 1] == steps_per_process:
            active.discard(p)
        seq.append(Event((p,)))
    return Schedule(tuple(seq), k)


def check_bound(schedule: Schedule, steps_per_process: Optional[int] = None) -> bool:
    """Independent prefix scan of the concurrency bound of a pure schedule."""
    used: dict = {}
    active: set = set()
    for ev in schedule.events:
        for p in ev.pids:
            used[p] = used.get(p, 0) + 1
            active.add(p)
        if schedule.bound is not None and len(active) > schedule.bound:
            return False
        for p in ev.pids:
            if steps_per_process is not None and used[p] == steps_per_process:
                active.discard(p)
    return True


# ------------------------------------------------------------- exploration

@dataclass
class Run:
    events: tuple
    records: tuple
    config: Config


def explore_runs(protocol: Protocol, inputs: Sequence, k: Optional[int] = None,
                 max_events: Optional[int] = None) -> Iterator[Run]:
    """Every maximal event sequence (tree enumeration, no state merging).

    A run ends when all participants returned, nothing is enabled, or
    ``max_events`` events happened.
    """
    m = Machine(protocol, inputs, k)
    stack = [((), (), m.initial())]
    while stack:
        evs, recs, c = stack.pop()
        nxt = [] if (max_events is not None and len(evs) >= max_events) else m.enabled(c)
        if not nxt:
            yield Run(evs, recs, c)
            continue
        for ev, c2, rec in reversed(nxt):
            stack.append((evs + (ev,), recs + (rec,), c2))


@dataclass
class CheckResult:
    states: int
    terminals: int
    max_depth: int
    violation: Optional[Violation] = None
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violation is None


def model_check(protocol: Protocol, inputs: Sequence, k: Optional[int] = None,
                max_events: Optional[int] = None,
                at_terminal: Optional[Callable[[Config, tuple], None]] = None,
                state_limit: Optional[int] = None, compact: bool = False) -> CheckResult:
    """Exhaustive DFS over reachable (config, ghost) states.

    Monitors run on every transition; since their state is part of the hashed
    state, merging two paths is only done when the monitors agree, so every
    property a monitor checks holds on every path. ``at_terminal`` is called on
    each distinct terminal (config, ghost) and may raise :class:`Violation`.
    With ``compact`` the visited set keeps 64-bit hashes instead of states
    (hash compaction: far less memory, a negligible chance of pruning a state).
    """
    m = Machine(protocol, inputs, k)
    mons = list(protocol.monitors())
    c0 = m.initial()
    g0 = tuple(mon.initial(c0) for mon in mons)
    seen = {hash((c0, g0)) if compact else (c0, g0)}
    terminals = 0
    max_depth = 0
    # Iterative DFS keeping the event path for counterexamples.
    stack: list = [(c0, g0, 0, None)]
    path: list = []
    while stack:
        c, g, depth, ev = stack.pop()
        del path[max(depth - 1, 0):]
        if ev is not None:
            path.append(ev)
        max_depth = max(max_depth, depth)
        nxt = [] if (max_events is not None and depth >= max_events) else m.enabled(c)
        if not nxt:
            terminals += 1
            try:
                for mon, gg in zip(mons, g):
                    mon.at_end(gg, c)
                if at_terminal is not None:
                    at_terminal(c, g)
            except Violation as v:
                return CheckResult(len(seen), terminals, max_depth, Violation(v.prop, v.detail, path))
            continue
        for e, c2, rec in nxt:
            try:
                g2 = _observe(mons, g, c, c2, rec, path + [e])
            except Violation as v:
                return CheckResult(len(seen), terminals, max_depth, v)
            key = hash((c2, g2)) if compact else (c2, g2)
            if key in seen:
                continue
            seen.add(key)
            if state_limit is not None and len(seen) > state_limit:
                raise RuntimeError(f"state limit {state_limit} exceeded")
            stack.append((c2, g2, depth + 1, e))
    return CheckResult(len(seen), terminals, max_depth)


def random_run(protocol: Protocol, inputs: Sequence, k: Optional[int], seed: int,
               max_events: int, fair: bool = False) -> tuple:
    """One seeded run. With ``fair`` the least recently scheduled enabled
    process goes next (round robin), with seeded tie and block choices."""
    m = Machine(protocol, inputs, k)
    rng = random.Random(seed)
    c = m.initial()
    events = []
    last = {p: -1 for p in range(1, m.n + 1)}
    for t in range(max_events):
        nxt = m.enabled(c)
        if not nxt:
            break
        if fair:
            oldest = min(min(last[p] for p in ev.pids) for ev, _, _ in nxt)
            nxt = [x for x in nxt if min(last[p] for p in x[0].pids) == oldest]
        ev, c, _ = nxt[rng.randrange(len(nxt))]
        for p in ev.pids:
            last[p] = t
        events.append(ev)
    return Schedule(tuple(events), m.k)


# ------------------------------------------------------ reference protocols

class FullInformationIIS(Protocol):
    """``rounds`` iterated immediate snapshots, full information.

    Each process returns its ``Chr^rounds`` vertex.
    """

    name = "iis"

    def __init__(self, n: int, rounds: int):
        from .subdivision import base_vertex
        self.n = n
        self.rounds = rounds
        self._base = base_vertex

    def init(self, pid: int, inp: Any) -> tuple:
        return (0, self._base(pid))

    def action(self, pid: int, local: tuple):
        r, v = local
        if r == self.rounds:
            return Return(v)
        return Invoke(("IS", r + 1), "is", (v,))

    def resume(self, pid: int, local: tuple, response: Any) -> tuple:
        from .subdivision import make_vertex
        r, _ = local
        return (r + 1, make_vertex(pid, frozenset(v for _, v in response)))

    def obj_type(self, key: tuple) -> ObjectType:
        return ISObject()

    def describe(self) -> dict:
        return {"protocol": self.name, "n": self.n, "rounds": self.rounds}


class Echo(Protocol):
    """Write the input, scan, decide the input."""

    name = "echo"

    def __init__(self, n: int):
        self.n = n

    def init(self, pid: int, inp: Any) -> tuple:
        return (0, inp)

    def action(self, pid: int, local: tuple):
        stage, inp = local
        if stage == 0:
            return Invoke(("MEM",), "update", (inp,))
        if stage == 1:
            return Invoke(("MEM",), "scan")
        return Return(inp)

    def resume(self, pid: int, local: tuple, response: Any) -> tuple:
        return (local[0] + 1, local[1])

    def obj_type(self, key: tuple) -> ObjectType:
        return SnapshotMemory(self.n)


def is_profile(run: Run, key: tuple = ("IS", 1)) -> list:
    """The ordered partition released on one IS object in a run."""
    for k, s in run.config.objs:
        if k == key:
            return [frozenset(p for p, _ in blk) for blk in s]
    return []
