"""k-process memory from k-set consensus, and k-concurrency on top of it.

Simulators (the real processes) run rounds. In each round they call a
k-simultaneous consensus object with their per-slot proposals
``(WC[m], View[m])``, run commit-adopt on the winning slot first and then on
the others, and, for every slot they committed, publish the slot's next write
and compute a fresh snapshot proposal from a scan of ``MEM``. ``MEM[i]`` is
simulator ``i``'s row of ``(counter, value)`` pairs.

The k simulated processes are generalized state machines: the value written at
counter ``c`` is a deterministic function of the committed snapshot. For
:func:`solve_k_concurrently` that function is one step of a BG simulator
(:func:`bg_step`), which runs a k-concurrent task protocol for the real
processes.

Claims checked while exploring (ghost state, so they hold on every path):

* write counters never decrease;
* a counter ``c`` is only reached after every ``(slot, c')``, ``c' < c``, was
  validated;
* all validated writes for one ``(slot, counter)`` are equal;
* the first simulator to return from its first commit-adopt in a round
  commits, on a slot no larger than the number of participants;
* every validated snapshot equals the simulated memory at its scan.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, NamedTuple, Optional, Sequence

from .protocols import COMMIT, CommitAdoptOracle, CommitAdoptRW, KSimultaneousConsensus
from .runtime import (
    Config,
    Echo,
    Invoke,
    Machine,
    Monitor,
    ObjectType,
    Protocol,
    ProtocolError,
    Return,
    Schedule,
    SnapshotMemory,
    Trace,
    Violation,
    digest,
    model_check,
    run_protocol,
)

EMPTY = None  # the empty snapshot proposal


class Alg1Local(NamedTuple):
    phase: str
    r: int
    wc: tuple
    view: tuple
    flag: tuple
    order: tuple
    value: Any
    j: int  # position in ``order`` during commit-adopt, slot during commit stage
    row: tuple  # own MEM row
    inp: Any
    pending_row: Any
    out: Any


def cur_writes(mem: Sequence, k: int) -> tuple:
    """Per slot, the value with the largest write counter in a ``MEM`` scan.

    ``mem`` holds one row per simulator; a row is ``k`` ``(counter, value)``
    pairs, or ``None`` for a row never written. Equal counters with different
    values mean two different writes were validated for one counter.
    """
    best_c = [-1] * k
    best_v: list = [None] * k
    for row in mem:
        if row is None:
            continue
        for m in range(k):
            c, v = row[m]
            if c > best_c[m]:
                best_c[m], best_v[m] = c, v
            elif c == best_c[m] and c >= 0 and v != best_v[m]:
                raise Violation("claim3", f"slot {m + 1} counter {c} holds {best_v[m]!r} and {v!r}")
    return tuple(best_v)


def _counters(mem: Sequence, k: int) -> tuple:
    best = [-1] * k
    for row in mem:
        if row is None:
            continue
        for m in range(k):
            best[m] = max(best[m], row[m][0])
    return tuple(best)


def standalone_writeval(m: int, c: int, view: Any) -> str:
    """Write ``c`` of slot ``m``: a compact token naming the snapshot it used."""
    return f"w{m}.{c}.{digest(view)}"


class Alg1(Protocol):
    """The k-process memory simulation, as an explorable protocol.

    ``ca`` picks the read-write commit-adopt (``"rw"``) or the atomic oracle
    (``"oracle"``). ``variant="literal"`` follows the pseudocode exactly: a
    commit flag validates the simulator's current proposal even when the
    committed value was older and therefore not adopted. ``"guarded"`` only
    validates when the committed value was adopted.
    """

    name = "alg1"

    def __init__(self, n: int, k: int, rounds: int, ca: str = "oracle", variant: str = "literal",
                 writeval: Optional[Callable[[int, int, Any], Any]] = None, with_inputs: bool = False,
                 output_of: Optional[Callable[[int, Any], Any]] = None, check_monitors: bool = True):
        if ca not in ("oracle", "rw"):
            raise ValueError("ca must be 'oracle' or 'rw'")
        if variant not in ("literal", "guarded"):
            raise ValueError("variant must be 'literal' or 'guarded'")
        self.n, self.k, self.rounds = n, k, rounds
        self.ca = ca
        self.variant = variant
        self.writeval = writeval or standalone_writeval
        self.with_inputs = with_inputs
        self.output_of = output_of
        self.check_monitors = check_monitors

    def describe(self) -> dict:
        return {"protocol": self.name, "n": self.n, "k": self.k, "rounds": self.rounds,
                "ca": self.ca, "variant": self.variant}

    def obj_type(self, key: tuple) -> ObjectType:
        if key[0] == "MEM":
            return SnapshotMemory(self.n)
        if key[0] == "KSC":
            return KSimultaneousConsensus(self.k)
        if key[0] == "CA":
            return CommitAdoptRW(self.n) if self.ca == "rw" else CommitAdoptOracle()
        raise ProtocolError(f"unknown object {key!r}")

    def monitors(self):
        return (Alg1Monitor(self),) if self.check_monitors else ()

    def prune(self, c: Config) -> Config:
        low = min_round(c)
        objs = tuple((key, st) for key, st in c.objs if key[0] == "MEM" or key[1] >= low)
        locs = c.locals
        if any(s is not None and c.is_done(i + 1) and s.phase != "ret" or
               s is not None and c.is_done(i + 1) and s.view != self._blank for i, s in enumerate(locs)):
            locs = tuple(self._retired(s) if s is not None and c.is_done(i + 1) else s
                         for i, s in enumerate(locs))
        if len(objs) == len(c.objs) and locs is c.locals:
            return c
        return Config(locs, c.pend, c.done, c.started, objs)

    @property
    def _blank(self) -> tuple:
        return (EMPTY,) * self.k

    def _retired(self, s: Alg1Local) -> Alg1Local:
        # a finished simulator keeps only its counters
        return Alg1Local("ret", s.r, s.wc, self._blank, (None,) * self.k, (), None, 0, (),
                         None, None, None)

    # -- state machine

    def init(self, pid: int, inp: Any) -> Alg1Local:
        k = self.k
        row = ((-1, None),) * k
        phase = "input" if self.with_inputs else "ksc"
        return Alg1Local(phase, 1, (0,) * k, (EMPTY,) * k, (None,) * k, (), None, 0, row,
                         inp, None, None)

    def action(self, pid: int, s: Alg1Local):
        ph = s.phase
        if ph == "ret":
            return Return(s.out)
        if ph == "input":
            return Invoke(("MEM",), "update", ((s.inp, s.row),))
        if ph in ("check", "scan"):
            return Invoke(("MEM",), "scan")
        if ph == "ksc":
            return Invoke(("KSC", s.r), "propose", (tuple(zip(s.wc, s.view)),))
        if ph == "ca":
            m = s.order[s.j]
            prop = s.value if s.j == 0 else (s.wc[m - 1], s.view[m - 1])
            return Invoke(("CA", s.r, m), "propose", (prop,))
        if ph == "upd":
            return Invoke(("MEM",), "update", (self._cell(s, s.pending_row),))
        raise ProtocolError(f"bad phase {ph!r}")

    def _cell(self, s: Alg1Local, row: tuple) -> Any:
        return (s.inp, row) if self.with_inputs else row

    def rows(self, mem: Sequence) -> tuple:
        if self.with_inputs:
            return tuple(None if c is None else c[1] for c in mem)
        return tuple(mem)

    def snapshot_view(self, mem: Sequence) -> Any:
        cw = cur_writes(self.rows(mem), self.k)
        if self.with_inputs:
            return (cw, tuple(None if c is None else c[0] for c in mem))
        return cw

    def resume(self, pid: int, s: Alg1Local, resp: Any) -> Alg1Local:
        ph = s.phase
        k = self.k
        if ph == "input":
            return s._replace(phase="check")
        if ph == "check":
            out = self.output_of(pid, self.snapshot_view(resp)) if self.output_of else None
            if out is not None or s.r > self.rounds:
                return s._replace(phase="ret", out=out)
            return s._replace(phase="ksc")
        if ph == "ksc":
            idx, val = resp
            order = (idx,) + tuple(m for m in range(1, k + 1) if m != idx)
            return s._replace(phase="ca", order=order, value=val, j=0)
        if ph == "ca":
            m = s.order[s.j]
            flag, val = resp
            wc, view, flags = list(s.wc), list(s.view), list(s.flag)
            adopted = val[0] >= wc[m - 1]
            if adopted:
                wc[m - 1], view[m - 1] = val
            if self.variant == "guarded" and not adopted:
                flag = "stale"
            flags[m - 1] = flag
            s = s._replace(wc=tuple(wc), view=tuple(view), flag=tuple(flags))
            if s.j + 1 < k:
                return s._replace(j=s.j + 1)
            return self._commit_from(s, 1)
        if ph == "upd":
            m = s.j
            wc = list(s.wc)
            wc[m - 1] += 1
            return s._replace(phase="scan", row=s.pending_row, wc=tuple(wc), pending_row=None)
        if ph == "scan":
            m = s.j
            view = list(s.view)
            view[m - 1] = self.snapshot_view(resp)
            return self._commit_from(s._replace(view=tuple(view)), m + 1)
        raise ProtocolError(f"bad phase {ph!r}")

    def _commit_from(self, s: Alg1Local, start: int) -> Alg1Local:
        s = s._replace(order=(), value=None)
        for m in range(start, self.k + 1):
            if s.flag[m - 1] == COMMIT:
                c = s.wc[m - 1]
                row = list(s.row)
                row[m - 1] = (c, self.writeval(m, c, s.view[m - 1]))
                flags = (None,) * m + s.flag[m:]  # earlier slots are handled
                return s._replace(phase="upd", j=m, pending_row=tuple(row), flag=flags)
        # end of round
        if s.r >= self.rounds:
            if self.output_of is None:
                return s._replace(phase="ret", out=s.wc, flag=(None,) * self.k)
            # one last look for an output
            return s._replace(phase="check", r=s.r + 1, flag=(None,) * self.k, order=(), value=None, j=0)
        nxt = "check" if self.with_inputs else "ksc"
        return s._replace(phase=nxt, r=s.r + 1, flag=(None,) * self.k, order=(), value=None, j=0)


def min_round(c: Config) -> int:
    """Smallest round a running simulator is in; older round objects are dead."""
    rounds = [s.r for i, s in enumerate(c.locals) if s is not None and not c.is_done(i + 1)]
    return min(rounds) if rounds else 1 << 30


class Alg1Ghost(NamedTuple):
    validated: tuple  # sorted ((slot, counter), view digest)
    lin: tuple  # per slot (counter, value) of the first update of the newest counter
    windows: tuple  # sorted ((slot, c), digests of the memories seen while write c was the newest)
    illegal: frozenset  # (slot, counter, view digest) scanned views that were not legal
    firsts: frozenset  # rounds whose first commit-adopt return was seen
    floor: tuple  # per slot: every counter below it was validated and is out of reach


class Alg1Monitor(Monitor):
    name = "alg1"

    def __init__(self, proto: Alg1):
        self.p = proto
        self.participants = None

    def initial(self, config: Config) -> Alg1Ghost:
        self.participants = sum(1 for x in config.locals if x is not None)
        k = self.p.k
        start = digest((None,) * k)
        windows = tuple(((m, -1), frozenset([start])) for m in range(1, k + 1))
        return Alg1Ghost((), ((-1, None),) * k, windows, frozenset(), frozenset(), (0,) * k)

    def on_event(self, g: Alg1Ghost, before: Config, after: Config, rec) -> Alg1Ghost:
        if rec.kind == "ret":
            return g
        (pid,) = rec.pids
        s0: Alg1Local = before.locals[pid - 1]
        s1: Alg1Local = after.locals[pid - 1]
        k = self.p.k
        # Claim 1
        for m in range(k):
            if s1.wc[m] < s0.wc[m]:
                raise Violation("claim1", f"simulator {pid} slot {m + 1} counter {s0.wc[m]} -> {s1.wc[m]}")
        if s0.phase == "ca" and s0.order and rec.response is not None and s0.j == 0:
            g = self._first_return(g, pid, s0, rec.response)
        if s0.phase == "upd" and rec.response is None and s1.phase != "upd":
            g = self._validate(g, pid, s0)
        if s0.phase == "scan" and s1.phase != "scan":
            g = self._scan(g, pid, s0, rec.response)
        # Claim 2
        validated = {key for key, _ in g.validated}
        for m in range(k):
            for c in range(g.floor[m], s1.wc[m]):
                if (m + 1, c) not in validated:
                    raise Violation("claim2", f"simulator {pid} reached counter {s1.wc[m]} on slot "
                                              f"{m + 1} but ({m + 1},{c}) was never validated")
        return self._forget(g, after)

    def _forget(self, g: Alg1Ghost, c: Config) -> Alg1Ghost:
        """Drop history no live simulator can touch again: validations happen
        at a simulator's own counter, and counters never decrease."""
        low = min_round(c)
        if any(r < low for r in g.firsts):
            g = g._replace(firsts=frozenset(r for r in g.firsts if r >= low))
        live = [s for i, s in enumerate(c.locals) if s is not None and not c.is_done(i + 1)]
        if live:
            floor = tuple(min(s.wc[m] for s in live) for m in range(self.p.k))
        else:
            floor = tuple(1 << 30 for _ in range(self.p.k))
        if floor == g.floor:
            return g
        validated = tuple(x for x in g.validated if x[0][1] >= floor[x[0][0] - 1])
        illegal = frozenset(x for x in g.illegal if x[1] >= floor[x[0] - 1])
        windows = tuple(x for x in g.windows if x[0][1] >= floor[x[0][0] - 1] - 1)
        return g._replace(validated=validated, illegal=illegal, windows=windows, floor=floor)

    def _first_return(self, g: Alg1Ghost, pid: int, s0: Alg1Local, resp: Any) -> Alg1Ghost:
        if s0.r in g.firsts:
            return g
        flag, _ = resp
        idx = s0.order[0]
        if flag != COMMIT:
            raise Violation("round-commit", f"round {s0.r}: first commit-adopt return by {pid} is {flag}")
        bound = min(self.participants, self.p.k)
        if idx > bound:
            raise Violation("progress", f"round {s0.r}: first commit on slot {idx} > {bound}")
        return g._replace(firsts=g.firsts | {s0.r})

    def _validate(self, g: Alg1Ghost, pid: int, s0: Alg1Local) -> Alg1Ghost:
        m = s0.j
        c = s0.wc[m - 1]
        vd = digest(s0.view[m - 1])
        table = dict(g.validated)
        old = table.get((m, c))
        if old is not None and old != vd:
            raise Violation("claim3", f"slot {m} counter {c} validated with two different snapshots")
        if (m, c, vd) in g.illegal:
            raise Violation("linearize", f"slot {m} snapshot for counter {c} was not legal at its scan")
        table[(m, c)] = vd
        value = s0.pending_row[m - 1][1]
        lin = list(g.lin)
        lc, lv = lin[m - 1]
        if c > lc:
            if c != lc + 1:
                raise Violation("linearize", f"slot {m} write {c} linearized before write {lc + 1}")
            lin[m - 1] = (c, value)
            g = g._replace(windows=self._extend(g, m, c, tuple(v for _, v in lin)))
        elif c == lc and value != lv:
            raise Violation("claim3", f"slot {m} counter {c} written as {lv!r} and {value!r}")
        return g._replace(validated=tuple(sorted(table.items())), lin=tuple(lin))

    @staticmethod
    def _extend(g: Alg1Ghost, m: int, c: int, memory: tuple) -> tuple:
        # the new memory is seen by the open window of every slot; slot m opens a new one
        d = digest(memory)
        newest: dict = {}
        for (mm, cc), _ in g.windows:
            newest[mm] = max(cc, newest.get(mm, cc))
        out = dict(g.windows)
        for mm, cc in newest.items():
            if mm != m:
                out[(mm, cc)] = out[(mm, cc)] | {d}
        out[(m, c)] = frozenset([d])
        return tuple(sorted(out.items()))

    def _scan(self, g: Alg1Ghost, pid: int, s0: Alg1Local, mem: Any) -> Alg1Ghost:
        m = s0.j
        c = s0.wc[m - 1]  # already incremented
        view = self.p.snapshot_view(mem)
        cw = view[0] if self.p.with_inputs else view
        # legal if the view equals the simulated memory at some moment
        # after the simulator's own write c - 1 and before write c
        legal = digest(cw) in dict(g.windows).get((m, c - 1), ())
        if legal:
            return g
        return g._replace(illegal=g.illegal | {(m, c, digest(view))})


# ------------------------------------------------------- offline linearizer

@dataclass
class LinearizationResult:
    ok: bool
    history: list  # (time, kind, slot, counter, value)
    counterexample: Optional[tuple] = None

    def describe(self) -> str:
        if self.ok:
            return f"legal history of {len(self.history)} operations"
        return f"illegal: {self.counterexample}"


def linearize_alg1(trace: Trace, k: int, with_inputs: bool = False) -> LinearizationResult:
    """Rebuild the simulated history of a run and check it sequentially.

    A simulated write ``(slot, c)`` sits at the first ``MEM`` update carrying
    counter ``c`` for that slot. A validated snapshot for ``(slot, c)`` sits at
    the earliest ``MEM`` scan, after the write ``(slot, c - 1)``, whose
    current-writes vector is the snapshot that write ``c`` was computed from.
    """
    prev_rows: dict = {}
    first_write: dict = {}  # (slot, c) -> (time, value)
    scans: list = []  # (time, cur_writes vector)
    for t, rec in enumerate(trace.records):
        if rec.key != ("MEM",) or rec.kind == "ret":
            continue
        (pid,) = rec.pids
        if rec.kind == "update":
            cell = rec.args[0]
            inp, row = cell if with_inputs else (None, cell)
            old = prev_rows.get(pid, ((-1, None),) * k)
            for m in range(k):
                if row[m] != old[m]:
                    c, v = row[m]
                    if c <= old[m][0]:
                        return LinearizationResult(False, [], ("counter-decrease", pid, m + 1, old[m][0], c))
                    first_write.setdefault((m + 1, c), (t, v))
            prev_rows[pid] = row
        elif rec.kind == "scan":
            rows = [None if x is None else (x[1] if with_inputs else x) for x in rec.response]
            try:
                scans.append((t, cur_writes(rows, k)))
            except Violation as v:
                return LinearizationResult(False, [], ("claim3", t, v.detail))
    history: list = []
    for (m, c), (t, v) in first_write.items():
        history.append((t, 0, "write", m, c, v))
    # snapshots: the write (m, c) was computed from the snapshot it names
    for (m, c), (t, v) in first_write.items():
        if c == 0:
            continue
        vd = v.rsplit(".", 1)[-1] if isinstance(v, str) else None
        prev = first_write.get((m, c - 1))
        if prev is None:
            return LinearizationResult(False, [], ("missing-write", m, c - 1))
        point = None
        for ts, cw in scans:
            if ts > prev[0] and ts < t and (vd is None or digest(cw) == vd):
                point = (ts, cw)
                break
        if point is None:
            return LinearizationResult(False, [], ("no-scan-for-snapshot", m, c))
        history.append((point[0], 1, "snap", m, c, point[1]))
    history.sort(key=lambda h: (h[0], h[1]))
    memory: list = [None] * k
    counters = [-1] * k
    for t, _, kind, m, c, v in history:
        if kind == "write":
            if c != counters[m - 1] + 1:
                return LinearizationResult(False, history, (("write", m, c), ("after", counters[m - 1])))
            counters[m - 1] = c
            memory[m - 1] = v
        else:
            if tuple(memory) != tuple(v):
                return LinearizationResult(False, history, (("snap", m, c, t), ("memory", tuple(memory))))
            if counters[m - 1] != c - 1:
                return LinearizationResult(False, history, (("snap", m, c, t), ("own-write", counters[m - 1])))
    return LinearizationResult(True, [(t, kind, m, c) for t, _, kind, m, c, _ in history])


# ---------------------------------------------------------- BG simulation

class KConcurrentAgreement(Protocol):
    """k-set agreement that is correct under k-concurrency.

    Scan; adopt the first value already written, otherwise write and decide
    the input. Two processes decide their own inputs only if both scanned
    before either wrote, so they were concurrently active.
    """

    name = "kconc-agreement"

    def __init__(self, n: int):
        self.n = n

    def init(self, pid: int, inp: Any) -> tuple:
        return ("scan", inp, None)

    def action(self, pid: int, s: tuple):
        ph, inp, dec = s
        if ph == "scan":
            return Invoke(("MEM",), "scan")
        if ph == "write":
            return Invoke(("MEM",), "update", (inp,))
        return Return(dec)

    def resume(self, pid: int, s: tuple, resp: Any) -> tuple:
        ph, inp, _ = s
        if ph == "scan":
            seen = [v for v in resp if v is not None]
            if seen:
                return ("done", inp, seen[0])
            return ("write", inp, None)
        return ("done", inp, inp)

    def obj_type(self, key: tuple) -> ObjectType:
        return SnapshotMemory(self.n)


class Replay(NamedTuple):
    finished: bool
    output: Any
    cell: Any  # the simulated process's memory cell after its known steps
    pending_scan: bool


def _replay(client: Protocol, j: int, inp: Any, hist: tuple) -> Replay:
    return _replay_cached(client, j, inp, hist)


@lru_cache(maxsize=200_000)
def _replay_cached(client: Protocol, j: int, inp: Any, hist: tuple) -> Replay:
    local = client.init(j, inp)
    cell = None
    used = 0
    for _ in range(10_000):
        act = client.action(j, local)
        if isinstance(act, Return):
            return Replay(True, act.value, cell, False)
        if act.method == "update":
            cell = act.args[0]
            local = client.resume(j, local, None)
        elif act.method == "scan":
            if used == len(hist):
                return Replay(False, None, cell, True)
            local = client.resume(j, local, hist[used])
            used += 1
        else:
            raise ProtocolError(f"client step {act.method!r} is not a memory operation")
    raise ProtocolError("client does not reach a scan")


class BGState(NamedTuple):
    agreed: tuple  # per simulated process: agreed scan results
    inst: Any  # None or (j, t, records); records: ((gen, est, bflag), ...)


def bg_initial(n: int) -> BGState:
    return BGState(((),) * n, None)


def _merge(own: BGState, states: Sequence, n: int) -> tuple:
    merged = list(own.agreed)
    for st in states:
        if st is None:
            continue
        for j in range(n):
            a, b = merged[j], st.agreed[j]
            short, long_ = (a, b) if len(a) <= len(b) else (b, a)
            if long_[: len(short)] != short:
                raise Violation("bg-agreement", f"process {j + 1}: agreed steps diverge {a!r} / {b!r}")
            merged[j] = long_
    return tuple(merged)


def _records_at(states: Sequence, me: int, j: int, t: int) -> list:
    """Other simulators' commit-adopt records on step ``t`` of process ``j``."""
    out = []
    for s_id, st in enumerate(states, start=1):
        if s_id == me or st is None or st.inst is None:
            continue
        jj, tt, recs = st.inst
        if (jj, tt) == (j, t):
            out.append((s_id, recs))
    return out


def bg_step(m: int, prev: Optional[BGState], view: Any, client: Protocol, n: int, k: int) -> BGState:
    """One step of BG simulator ``m`` given a snapshot of all simulators.

    ``view`` is ``(states, inputs)``: the current write of each of the ``k``
    simulators and the announced inputs of the real processes. Each simulated
    scan is agreed through repeated commit-adopt rounds carried in the
    simulators' writes; selection is depth-first (most agreed steps first,
    smallest id on ties). A simulator with an id above the number of active
    processes stops. When every active process is held by another simulator,
    the simulator joins one of those instances (preferring ones held by
    simulators that should stop), which lets it finish without them.
    """
    if view is EMPTY:
        return bg_initial(n)
    states, inputs = view
    own = prev if prev is not None else bg_initial(n)
    agreed = _merge(own, states, n)
    inst = own.inst
    if inst is not None:
        j, t, recs = inst
        if len(agreed[j - 1]) > t:
            inst = None  # somebody decided it
        else:
            inst, decided = _advance(m, inst, states)
            if decided is not None:
                lst = list(agreed)
                lst[j - 1] = lst[j - 1] + (decided,)
                agreed = tuple(lst)
                inst = None
    reps = {j: _replay(client, j, inputs[j - 1], agreed[j - 1])
            for j in range(1, n + 1) if inputs[j - 1] is not None}
    active = sorted(j for j, rp in reps.items() if not rp.finished)
    if m > len(active):
        return BGState(agreed, None)
    if inst is not None:
        return BGState(agreed, inst)
    return BGState(agreed, _select(m, agreed, states, inputs, active, reps, client, n, k))


def _advance(m: int, inst: tuple, states: Sequence) -> tuple:
    j, t, recs = inst
    gen, est, bflag = recs[-1]
    others = _records_at(states, m, j, t)
    same_gen = []
    for _, rs in others:
        for g, e, b in rs:
            if g == gen:
                same_gen.append((e, b))
    if bflag is None:
        # this view is the scan after writing A
        unanimous = all(e == est for e, _ in same_gen)
        return (j, t, recs[:-1] + ((gen, est, unanimous),)), None
    # this view is the scan after writing B
    bs = [(b, e) for e, b in same_gen if b is not None] + [(bflag, est)]
    if all(b is True and e == est for b, e in bs):
        return None, est
    strong = [e for b, e in bs if b is True]
    nxt = strong[0] if strong else est
    return (j, t, recs + ((gen + 1, nxt, None),)), None


def _proposal(j: int, agreed: tuple, inputs: tuple, reps: dict, states: Sequence, client, n: int) -> tuple:
    cells = []
    for jj in range(1, n + 1):
        if inputs[jj - 1] is None:
            cells.append(None)
            continue
        rp = reps[jj]
        started = len(agreed[jj - 1]) > 0 or rp.finished
        cells.append(rp.cell if (started or jj == j) else None)
    return tuple(cells)


def _select(m: int, agreed: tuple, states: Sequence, inputs: tuple, active: list, reps: dict,
            client, n: int, k: int) -> Any:
    held: dict = {}
    for j in active:
        t = len(agreed[j - 1])
        recs = _records_at(states, m, j, t)
        if recs:
            held[j] = recs
    started = [j for j in active if len(agreed[j - 1]) > 0 or j in held]
    free = [j for j in started if j not in held]
    if free:
        j = max(free, key=lambda x: (len(agreed[x - 1]), -x))
    else:
        fresh = [j for j in active if j not in started]
        if fresh:
            j = fresh[0]
        else:
            limit = len(active)
            j = min(held, key=lambda x: (0 if any(s > limit for s, _ in held[x]) else 1,
                                         -len(agreed[x - 1]), x))
    t = len(agreed[j - 1])
    recs = _records_at(states, m, j, t)
    if recs:
        top = max(g for _, rs in recs for g, _, _ in rs)
        est = min((s, e) for s, rs in recs for g, e, _ in rs if g == top)[1]
        return (j, t, ((top, est, None),))
    return (j, t, ((0, _proposal(j, agreed, inputs, reps, states, client, n), None),))


class BGMonitor(Monitor):
    """Agreed simulated steps never diverge and at most ``k`` simulated
    processes are in progress at once."""

    name = "bg"

    def __init__(self, proto: "KConcurrencySolver"):
        self.p = proto

    def initial(self, config: Config) -> int:
        return 0

    def on_event(self, g: int, before: Config, after: Config, rec) -> int:
        if rec.kind != "update" or rec.key != ("MEM",):
            return g
        mem = after.obj(("MEM",))
        view = self.p.alg1.snapshot_view(mem)
        states, inputs = view
        agreed = _merge(bg_initial(self.p.n), states, self.p.n)
        busy = set()
        for j in range(1, self.p.n + 1):
            if inputs[j - 1] is None:
                continue
            rp = _replay(self.p.client, j, inputs[j - 1], agreed[j - 1])
            if rp.finished:
                continue
            t = len(agreed[j - 1])
            if t > 0 or _records_at(states, 0, j, t):
                busy.add(j)
        if len(busy) > self.p.k:
            raise Violation("k-concurrency", f"{len(busy)} simulated processes in progress: {sorted(busy)}")
        return max(g, len(busy))


class KConcurrencySolver(Protocol):
    """Real processes announce inputs, then run the k-process simulation whose
    slots are BG simulators executing ``client`` for them."""

    name = "solve-kconc"

    def __init__(self, client: Protocol, n: int, k: int, rounds: int, ca: str = "oracle"):
        self.client = client
        self.n, self.k = n, k
        self.alg1 = Alg1(n, k, rounds, ca=ca, variant="guarded", writeval=self._writeval,
                         with_inputs=True, output_of=self._output_of, check_monitors=True)
        self.rounds = rounds

    def describe(self) -> dict:
        return {"protocol": self.name, "client": self.client.name, "n": self.n, "k": self.k,
                "rounds": self.rounds, "ca": self.alg1.ca}

    def _writeval(self, m: int, c: int, view: Any) -> BGState:
        prev = None
        if view is not EMPTY:
            prev = view[0][m - 1]
        return bg_step(m, prev, view, self.client, self.n, self.k)

    def _output_of(self, pid: int, view: Any) -> Any:
        states, inputs = view
        agreed = _merge(bg_initial(self.n), states, self.n)
        if inputs[pid - 1] is None:
            return None
        rp = _replay(self.client, pid, inputs[pid - 1], agreed[pid - 1])
        return ("out", rp.output) if rp.finished else None

    def init(self, pid, inp):
        return self.alg1.init(pid, inp)

    def action(self, pid, s):
        return self.alg1.action(pid, s)

    def resume(self, pid, s, resp):
        return self.alg1.resume(pid, s, resp)

    def obj_type(self, key):
        return self.alg1.obj_type(key)

    def monitors(self):
        return self.alg1.monitors() + (BGMonitor(self),)


def solve_k_concurrently(client: Protocol, inputs: Sequence, schedule: Schedule,
                         k: int, rounds: int, ca: str = "oracle") -> tuple:
    """Run ``client`` for the real processes through the k-set-consensus
    simulation along ``schedule``. Returns ``(outputs, Trace)``; an output is
    ``None`` for a process that did not obtain one within the schedule."""
    solver = KConcurrencySolver(client, len(inputs), k, rounds, ca)
    outs, trace = run_protocol(solver, inputs, schedule)
    return [None if o is None else o[1] for o in outs], trace


def kconc_outputs(config: Config) -> list:
    return [None if config.output(i) is None else config.output(i)[1]
            for i in range(1, len(config.done) + 1)]


def alg1_progress_gaps(trace: Trace, k: int, participants: int, with_inputs: bool = False) -> dict:
    """Event gaps between new simulated writes on the first ``min(participants, k)``
    slots, counted from the start of the trace. ``open`` is the trailing gap."""
    ell = min(participants, k)
    newest = [-1] * k
    gaps: list = []
    last = 0
    for t, rec in enumerate(trace.records, start=1):
        if rec.key != ("MEM",) or rec.kind != "update":
            continue
        cell = rec.args[0]
        row = cell[1] if with_inputs else cell
        fresh = False
        for m in range(ell):
            if row[m][0] > newest[m]:
                newest[m] = row[m][0]
                fresh = True
        if fresh:
            gaps.append(t - last)
            last = t
    return {"gaps": gaps, "open": len(trace.records) - last, "slots": ell}
