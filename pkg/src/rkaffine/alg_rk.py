"""Simulating read-write and k-set-agreement algorithms inside iterated R_k.

Every round each process feeds ``(State, (WriteCount, WriteVal), ConsHistory)``
into a fresh two-round immediate snapshot whose outcome is a run of ``R_k``,
then

* adopts, slot by slot, any strictly newer ``(WriteCount, WriteVal)`` it saw;
* takes the agreement estimates of every *leader* it saw (a process whose
  first-round view holds at most ``k`` undecided processes), and remembers
  whether all of them already carry an estimate for its pending agreement;
* when its counters add up to the round number, completes the pending
  write-snapshot with ``WriteVal`` as snapshot, decides its pending agreement
  if every observed leader had an estimate, and installs the next operations.

Runs are driven by a *stream*: one ``R_k`` run per round, chosen exhaustively,
by a seed, or from a file. Decided processes keep showing up in later runs
with a frozen input; ``drop_decided`` removes them instead.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, NamedTuple, Optional, Sequence

from .affine import rk_pattern
from .runtime import Violation, digest, jsonable
from .subdivision import RunSequence, all_views

UNDECIDED = "undecided"
DECIDED = "decided"


# ----------------------------------------------------------------- clients

class OpClient:
    """A deterministic client: per process, a list of operations run in order.

    An operation is ``("write", value)`` (a write-snapshot) or
    ``("agree", object_id, proposal)``. At most one operation is pending.
    ``output`` turns the list of results into the process's task output.
    Client state: ``(pc, results, pending)``.
    """

    name = "ops"

    def ops(self, pid: int, inp: Any) -> tuple:
        raise NotImplementedError

    def output(self, pid: int, inp: Any, results: tuple) -> Any:
        return results

    # callbacks used by the simulation

    def first_write(self, pid: int, inp: Any) -> tuple:
        ops = self.ops(pid, inp)
        if ops and ops[0][0] == "write":
            return (0, (), "write"), ops[0][1]
        return (0, (), None), inp  # placeholder write, nothing pending

    def pending_write(self, cs: tuple) -> bool:
        return cs[2] == "write"

    def terminate_write(self, cs: tuple, snapshot: tuple) -> tuple:
        pc, res, _ = cs
        return (pc + 1, res + (("snap", snapshot),), None)

    def terminate_agreement(self, cs: tuple, value: Any) -> tuple:
        pc, res, _ = cs
        return (pc + 1, res + (("agree", value),), None)

    def terminated(self, pid: int, inp: Any, cs: tuple) -> bool:
        return cs[2] is None and cs[0] >= len(self.ops(pid, inp))

    def next_agreement(self, pid: int, inp: Any, cs: tuple) -> tuple:
        pc, res, pend = cs
        ops = self.ops(pid, inp)
        if pend is None and pc < len(ops) and ops[pc][0] == "agree":
            return (pc, res, "agree"), (ops[pc][1], ops[pc][2])
        return cs, None

    def next_write(self, pid: int, inp: Any, cs: tuple) -> tuple:
        pc, res, pend = cs
        ops = self.ops(pid, inp)
        if pend is None and pc < len(ops) and ops[pc][0] == "write":
            return (pc, res, "write"), ops[pc][1]
        return cs, None


class AgreementClient(OpClient):
    """Propose the input to one agreement object and output what it returns.
    Run with ``k = 1`` this is consensus."""

    def __init__(self, name: str = "kset", obj: str = "A"):
        self.name = name
        self.obj = obj

    def ops(self, pid: int, inp: Any) -> tuple:
        return (("agree", self.obj, inp),)

    def output(self, pid: int, inp: Any, results: tuple) -> Any:
        return results[-1][1]


class EchoClient(OpClient):
    """Write the input, take a snapshot, output the input."""

    name = "echo"

    def ops(self, pid: int, inp: Any) -> tuple:
        return (("write", inp),)

    def output(self, pid: int, inp: Any, results: tuple) -> Any:
        return inp


class FileClient(OpClient):
    """Operations from JSON: ``{"ops": {"<pid>" or "*": [op, ...]}}`` where an
    op is ``["write", v]`` or ``["agree", id, v]``; the string ``"$input"``
    stands for the process input. The output is the list of results."""

    def __init__(self, data: Any, name: str = "file"):
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        self.name = name
        self.table = {}
        for key, ops in dict(data["ops"]).items():
            parsed = []
            for op in ops:
                if op[0] == "write" and len(op) == 2:
                    parsed.append(("write", op[1]))
                elif op[0] == "agree" and len(op) == 3:
                    parsed.append(("agree", op[1], op[2]))
                else:
                    raise ValueError(f"bad client operation {op!r}")
            self.table[str(key)] = tuple(parsed)

    def ops(self, pid: int, inp: Any) -> tuple:
        ops = self.table.get(str(pid), self.table.get("*", ()))
        return tuple(tuple(inp if x == "$input" else x for x in op) for op in ops)

    def output(self, pid: int, inp: Any, results: tuple) -> Any:
        return tuple(v for _, v in results)


def make_client(spec: str) -> OpClient:
    if spec == "kset":
        return AgreementClient("kset")
    if spec == "consensus":
        return AgreementClient("consensus")
    if spec == "echo":
        return EchoClient()
    if spec.startswith("file:"):
        with open(spec[5:], encoding="utf-8") as fh:
            return FileClient(json.load(fh), name=spec)
    raise ValueError(f"unknown client {spec!r}")


# ------------------------------------------------------------------- state

class Alg2State(NamedTuple):
    r: int
    state: str
    wc: tuple
    wv: tuple
    cons_id: Any
    cons_prop: Any
    history: tuple  # ((object id, estimate), ...) in insertion order
    leaders: bool
    client: Any
    out: Any = None

    def rk_input(self) -> tuple:
        return (self.state, (self.wc, self.wv), self.history)


def alg2_init(pid: int, inp: Any, n: int, client: OpClient) -> Alg2State:
    cs, first = client.first_write(pid, inp)
    wc = tuple(1 if m == pid else 0 for m in range(1, n + 1))
    wv = tuple(first if m == pid else None for m in range(1, n + 1))
    return Alg2State(0, UNDECIDED, wc, wv, None, None, (), True, cs)


def _replace_or_add(history: tuple, a_id: Any, val: Any) -> tuple:
    for idx, (x, _) in enumerate(history):
        if x == a_id:
            return history[:idx] + ((a_id, val),) + history[idx + 1:]
    return history + ((a_id, val),)


def alg2_update_stage(st: Alg2State, pid: int, is1: dict, is2_view: Iterable[int],
                      inputs: dict, k: int) -> Alg2State:
    """Update stage for one process.

    ``is1`` maps every participant to its first-round view, ``is2_view`` is
    this process's second-round view and ``inputs`` maps processes to their
    round inputs (``Alg2State.rk_input()``).
    """
    wc, wv = list(st.wc), list(st.wv)
    history = st.history
    leaders = True
    for j in sorted(is2_view):
        state_j, (wc_j, wv_j), hist_j = inputs[j]
        for m in range(len(wc)):
            if wc_j[m] > wc[m]:
                wc[m], wv[m] = wc_j[m], wv_j[m]
        undecided = [x for x in is1[j] if inputs[x][0] == UNDECIDED]
        if len(undecided) <= k:
            if not any(a == st.cons_id for a, _ in hist_j):
                leaders = False
            for a_id, a_val in hist_j:
                history = _replace_or_add(history, a_id, a_val)
    return st._replace(wc=tuple(wc), wv=tuple(wv), history=history, leaders=leaders)


def alg2_validate_stage(st: Alg2State, pid: int, inp: Any, client: OpClient) -> tuple:
    """Validation stage; returns ``(state, events)``.

    Events: ``("snapshot", counter, value, snapshot)``, ``("decide", id, v)``,
    ``("propose", id, v)``, ``("write", counter, value)`` and ``("done", out)``.
    """
    events: list = []
    if sum(st.wc) != st.r:
        return st, events
    cs = st.client
    i = pid - 1
    if client.pending_write(cs):
        cs = client.terminate_write(cs, st.wv)
        events.append(("snapshot", st.wc[i], st.wv[i], tuple(zip(st.wc, st.wv))))
    cons_id, cons_prop = st.cons_id, st.cons_prop
    if st.leaders and cons_id is not None:
        cons_prop = dict(st.history)[cons_id]
        cs = client.terminate_agreement(cs, cons_prop)
        events.append(("decide", cons_id, cons_prop))
        cons_id = None
    if client.terminated(pid, inp, cs):
        out = client.output(pid, inp, cs[1])
        events.append(("done", out))
        return st._replace(state=DECIDED, client=cs, cons_id=cons_id, cons_prop=cons_prop, out=out), events
    wc, wv = list(st.wc), list(st.wv)
    wc[i] += 1
    history = st.history
    cs, agreement = client.next_agreement(pid, inp, cs)
    if agreement is not None:
        cons_id, cons_prop = agreement
        events.append(("propose", cons_id, cons_prop))
        if not any(a == cons_id for a, _ in history):
            history = history + ((cons_id, cons_prop),)
    cs, write = client.next_write(pid, inp, cs)
    if write is not None:
        wv[i] = write
    events.append(("write", wc[i], wv[i]))
    return st._replace(wc=tuple(wc), wv=tuple(wv), history=history, client=cs,
                       cons_id=cons_id, cons_prop=cons_prop), events


# ------------------------------------------------------------ one round

class Alg2Ghost(NamedTuple):
    values: tuple  # sorted ((pid, counter), value) seen so far
    completed: tuple  # per process: counter of its last completed write
    last_snapshot: Any  # counters/values of the previous round's snapshot
    proposals: tuple  # sorted ((object, value), ...)
    decisions: tuple  # sorted ((object, value), ...)


def ghost_initial(n: int) -> Alg2Ghost:
    return Alg2Ghost((), (0,) * n, None, (), ())


@dataclass
class Alg2Config:
    n: int
    k: int
    client: OpClient
    inputs: tuple
    drop_decided: bool = False
    check: bool = True

    @property
    def participants(self) -> tuple:
        return tuple(i for i in range(1, self.n + 1) if self.inputs[i - 1] is not None)


def round_participants(cfg: Alg2Config, states: tuple) -> tuple:
    parts = cfg.participants
    if cfg.drop_decided:
        parts = tuple(i for i in parts if states[i - 1].state == UNDECIDED)
    return parts


def alg2_round(cfg: Alg2Config, states: tuple, run: RunSequence, ghost: Alg2Ghost) -> tuple:
    """Apply one ``R_k`` run to all processes; returns ``(states, ghost, events)``.

    Raises :class:`Violation` when a checked property fails.
    """
    parts = round_participants(cfg, states)
    if run.participants != frozenset(parts):
        raise ValueError(f"run over {sorted(run.participants)} but participants are {list(parts)}")
    if run.m != 2:
        raise ValueError("each round needs a two-round run")
    views = all_views(run)
    is1, is2 = views[0], views[1]
    # a decided process keeps its frozen input and does not run
    started = {j: states[j - 1]._replace(r=states[j - 1].r + 1, leaders=True)
               if states[j - 1].state == UNDECIDED else states[j - 1] for j in parts}
    inputs = {j: started[j].rk_input() for j in parts}
    new = list(states)
    events: list = []
    for i in parts:
        st = started[i]
        if st.state != UNDECIDED:
            continue
        st = alg2_update_stage(st, i, is1, is2[i], inputs, cfg.k)
        pre = st
        st, evs = alg2_validate_stage(st, i, cfg.inputs[i - 1], cfg.client)
        if cfg.check:
            _check_local(cfg, states[i - 1], pre, st, i)
        new[i - 1] = st
        events.extend((i,) + e for e in evs)
    new = tuple(new)
    if cfg.check:
        ghost = _check_round(cfg, new, events, ghost, run)
    return new, ghost, events


def _check_local(cfg: Alg2Config, old: Alg2State, mid: Alg2State, st: Alg2State, i: int) -> None:
    for m in range(cfg.n):
        if mid.wc[m] < old.wc[m] or st.wc[m] < mid.wc[m]:
            raise Violation("claim1", f"process {i} slot {m + 1} counter decreased")
        if mid.wc[m] == old.wc[m] and mid.wv[m] != old.wv[m]:
            raise Violation("claim5", f"process {i} slot {m + 1} value replaced without a newer counter")
    if st.state == UNDECIDED and sum(st.wc) < st.r:
        raise Violation("claim2", f"process {i} round {st.r}: counters sum to {sum(st.wc)}")
    if sum(mid.wc) == mid.r and mid.leaders and mid.cons_id is not None and st.cons_id == mid.cons_id:
        raise Violation("leader-progress", f"process {i} round {st.r} passed the count test with "
                                           f"every leader's estimate but did not decide")


def _check_round(cfg: Alg2Config, states: tuple, events: list, g: Alg2Ghost, run) -> Alg2Ghost:
    values = dict(g.values)
    for st in states:
        if st is None:
            continue
        for m in range(cfg.n):
            c, v = st.wc[m], st.wv[m]
            if c <= 0:
                continue
            old = values.setdefault((m + 1, c), v)
            if old != v:
                raise Violation("claim3", f"process {m + 1} counter {c} has values {old!r} and {v!r}")
    snaps = {e[4] for e in events if e[1] == "snapshot"}
    if len(snaps) > 1:
        raise Violation("claim4", f"{len(snaps)} different snapshots returned in one round")
    completed = list(g.completed)
    last = g.last_snapshot
    if snaps:
        (snap,) = snaps
        for m, (c, v) in enumerate(snap):
            if c < completed[m]:
                raise Violation("linearize", f"snapshot misses completed write {completed[m]} of {m + 1}")
            if last is not None and c < last[m][0]:
                raise Violation("linearize", f"snapshot goes back on process {m + 1}: {last[m][0]} -> {c}")
        for e in events:
            if e[1] == "snapshot":
                completed[e[0] - 1] = e[2]
        last = snap
    props = set(g.proposals) | {(e[2], e[3]) for e in events if e[1] == "propose"}
    decs = set(g.decisions) | {(e[2], e[3]) for e in events if e[1] == "decide"}
    for obj, v in decs:
        if (obj, v) not in props:
            raise Violation("agreement-validity", f"object {obj!r} decided unproposed {v!r}")
    per_obj: dict = {}
    for obj, v in decs:
        per_obj.setdefault(obj, set()).add(v)
    for obj, vs in per_obj.items():
        if len(vs) > cfg.k:
            raise Violation("agreement", f"object {obj!r} decided {len(vs)} > {cfg.k} values {sorted(vs, key=repr)}")
    return Alg2Ghost(tuple(sorted(values.items(), key=repr)), tuple(completed), last,
                     tuple(sorted(props, key=repr)), tuple(sorted(decs, key=repr)))


# ---------------------------------------------------------------- streams

def rk_runs(n: int, k: int, participants: Sequence[int]) -> list:
    pat = rk_pattern(n, k)
    return pat.accepted(participants)


@dataclass
class Alg2Trace:
    header: dict
    rounds: list = field(default_factory=list)  # {"round", "run", "events", "stateDigest"}

    def lines(self) -> list:
        out = [json.dumps(self.header, sort_keys=True, separators=(",", ":"))]
        for rec in self.rounds:
            out.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
        return out

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    @staticmethod
    def parse(text: str) -> "Alg2Trace":
        lines = [json.loads(x) for x in text.splitlines() if x.strip()]
        if not lines:
            raise ValueError("empty trace")
        return Alg2Trace(lines[0], lines[1:])

    def runs(self) -> list:
        return [RunSequence.from_json(r["run"]) for r in self.rounds]


@dataclass
class Alg2Result:
    states: tuple
    trace: Alg2Trace
    violation: Optional[Violation] = None

    def outputs(self) -> list:
        return [None if s is None or s.state != DECIDED else s.out for s in self.states]


def initial_states(cfg: Alg2Config) -> tuple:
    return tuple(None if x is None else alg2_init(i, x, cfg.n, cfg.client)
                 for i, x in enumerate(cfg.inputs, start=1))


def simulate_in_rkstar(cfg: Alg2Config, stream: Iterable, rounds: Optional[int] = None,
                       header: Optional[dict] = None) -> Alg2Result:
    """Drive every process along ``stream``, a sequence of runs, or a
    callable ``(round, states) -> run``. Stops at the first violation."""
    states = initial_states(cfg)
    ghost = ghost_initial(cfg.n)
    trace = Alg2Trace(header or {"protocol": "alg2", "n": cfg.n, "k": cfg.k, "client": cfg.client.name,
                                 "inputs": jsonable(list(cfg.inputs)), "dropDecided": cfg.drop_decided})
    it = iter(stream) if not callable(stream) else None
    r = 0
    while rounds is None or r < rounds:
        if not round_participants(cfg, states) or all(
                s is None or s.state == DECIDED for s in states) and cfg.drop_decided:
            break
        if it is not None:
            try:
                run = next(it)
            except StopIteration:
                break
        else:
            run = stream(r + 1, states)
        r += 1
        try:
            states, ghost, events = alg2_round(cfg, states, run, ghost)
        except Violation as v:
            trace.rounds.append({"round": r, "run": run.to_json(), "events": [], "violation": v.prop})
            return Alg2Result(states, trace, Violation(v.prop, v.detail, [x["run"] for x in trace.rounds]))
        trace.rounds.append({"round": r, "run": run.to_json(), "events": jsonable(events),
                             "stateDigest": digest(states)})
    return Alg2Result(states, trace)


def seeded_stream(cfg: Alg2Config, seed: int):
    """A stream choosing each round's run uniformly with ``random.Random(seed)``."""
    rng = random.Random(seed)

    def choose(r: int, states: tuple) -> RunSequence:
        runs = rk_runs(cfg.n, cfg.k, round_participants(cfg, states))
        return runs[rng.randrange(len(runs))]
    return choose


def replay_alg2(cfg: Alg2Config, trace: Alg2Trace) -> Optional[int]:
    """Re-run the recorded runs; index of the first digest mismatch or ``None``."""
    res = simulate_in_rkstar(cfg, trace.runs(), header=trace.header)
    for idx, (want, got) in enumerate(zip(trace.rounds, res.trace.rounds)):
        if want.get("stateDigest") != got.get("stateDigest"):
            return idx
    if len(res.trace.rounds) != len(trace.rounds):
        return min(len(res.trace.rounds), len(trace.rounds))
    return None


# ------------------------------------------------------ exhaustive streams

@dataclass
class ExhaustiveResult:
    rounds: int
    states_per_round: list
    terminals: int
    violation: Optional[Violation] = None
    stream: Optional[list] = None  # runs leading to the violation
    outputs: set = field(default_factory=set)

    @property
    def ok(self) -> bool:
        return self.violation is None


def exhaustive_streams(cfg: Alg2Config, rounds: int, at_level=None) -> ExhaustiveResult:
    """Breadth-first over every per-round choice of ``R_k`` run, merging equal
    (states, ghost) pairs. ``at_level(r, states, ghost, path)`` may raise
    :class:`Violation` to add checks."""
    start = (initial_states(cfg), ghost_initial(cfg.n))
    level = {start: ()}
    counts = []
    cache: dict = {}
    outputs: set = set()
    for r in range(1, rounds + 1):
        nxt: dict = {}
        for (states, ghost), path in level.items():
            parts = round_participants(cfg, states)
            if not parts or all(s is None or s.state == DECIDED for s in states):
                outputs.add(tuple(None if s is None else s.out for s in states))
                continue
            runs = cache.get(parts)
            if runs is None:
                runs = cache[parts] = rk_runs(cfg.n, cfg.k, parts)
            for run in runs:
                try:
                    st2, g2, _ = alg2_round(cfg, states, run, ghost)
                    if at_level is not None:
                        at_level(r, st2, g2, path + (run,))
                except Violation as v:
                    stream = list(path) + [run]
                    return ExhaustiveResult(r, counts, 0, Violation(v.prop, v.detail, stream), stream, outputs)
                key = (st2, g2)
                if key not in nxt:
                    nxt[key] = path + (run,)
        counts.append(len(nxt))
        level = nxt
        if not level:
            break
    for states, _ in level:
        outputs.add(tuple(None if s is None else s.out for s in states))
    return ExhaustiveResult(rounds, counts, len(level), None, None, outputs)


# ---------------------------------------------------- offline linearization

@dataclass
class Alg2Linearization:
    ok: bool
    history: list
    counterexample: Optional[dict] = None


def alg2_snapshot_linearization(trace: Alg2Trace) -> Alg2Linearization:
    """Check the simulated snapshot memory of a recorded run.

    Per round at most one snapshot value may be returned. Writes are placed
    just before the first round snapshot that contains them; a snapshot sits
    at its round. The sequential history must be a legal single-writer
    snapshot history, and every write must fall between its installation and
    its completion.
    """
    history: list = []
    installed: dict = {}  # (pid, counter) -> round
    completed: dict = {}
    memory: dict = {}  # pid -> (counter, value)
    values: dict = {}
    for rec in trace.rounds:
        r = rec["round"]
        snaps = {}
        for e in rec["events"]:
            pid, kind = e[0], e[1]
            if kind == "write":
                installed[(pid, e[2])] = r
                values.setdefault((pid, e[2]), e[3])
            elif kind == "snapshot":
                snaps[pid] = tuple(tuple(x) if isinstance(x, list) else x for x in e[4])
                completed[(pid, e[2])] = r
        distinct = {json.dumps(jsonable(s), sort_keys=True) for s in snaps.values()}
        if len(distinct) > 1:
            return Alg2Linearization(False, history, {"claim": "claim4", "round": r,
                                                      "processes": sorted(snaps)})
        if not snaps:
            continue
        snap = next(iter(snaps.values()))
        for m, pair in enumerate(snap, start=1):
            c, v = pair
            prev = memory.get(m, (0, None))
            if c < prev[0]:
                return Alg2Linearization(False, history, {"claim": "linearize", "round": r,
                                                          "process": m, "from": prev[0], "to": c})
            if c > prev[0]:
                if values.setdefault((m, c), v) != v:
                    return Alg2Linearization(False, history, {"claim": "claim3", "process": m, "counter": c})
                inst = installed.get((m, c), 0)  # counter 1 is installed at start
                if inst >= r:
                    return Alg2Linearization(False, history, {"claim": "linearize", "round": r,
                                                              "process": m, "early": c})
                history.append(("write", r, m, c))
                memory[m] = (c, v)
            elif memory.get(m) is not None and memory[m][1] != v:
                return Alg2Linearization(False, history, {"claim": "claim3", "process": m, "counter": c})
        for (pid, c), rr in completed.items():
            if rr < r and memory.get(pid, (0,))[0] < c:
                return Alg2Linearization(False, history, {"claim": "linearize", "round": r,
                                                          "missing": [pid, c]})
        history.append(("snapshot", r, tuple(sorted(snaps))))
    return Alg2Linearization(True, history)


# ------------------------------------------------------------ progress

def designated(run: RunSequence, states: tuple) -> Optional[int]:
    """The undecided participant with the smallest second-round view
    (smallest id on ties)."""
    final = all_views(run)[-1]
    cands = [i for i in sorted(run.participants) if states[i - 1].state == UNDECIDED]
    if not cands:
        return None
    return min(cands, key=lambda i: (len(final[i]), i))


def progress_gaps(cfg: Alg2Config, runs: Sequence) -> dict:
    """For a stream, how many rounds each designation waits until the
    designated process completes an operation (``None`` if it never does
    within the stream), and the longest stretch with no completion at all."""
    states = initial_states(cfg)
    ghost = ghost_initial(cfg.n)
    waits: list = []
    open_since: dict = {}
    idle = longest_idle = 0
    for r, run in enumerate(runs, start=1):
        if not round_participants(cfg, states):
            break
        d = designated(run, states)
        if d is not None and d not in open_since:
            open_since[d] = r
        states, ghost, events = alg2_round(cfg, states, run, ghost)
        done = {e[0] for e in events if e[1] in ("snapshot", "decide")}
        for p in list(open_since):
            if p in done:
                waits.append(r - open_since.pop(p) + 1)
        idle = 0 if done else idle + 1
        longest_idle = max(longest_idle, idle)
    return {"waits": waits, "pending": sorted(open_since.items()), "longestIdle": longest_idle}


def exhaustive_progress(cfg: Alg2Config, rounds: int) -> dict:
    """Worst designated-process wait over every stream of ``rounds`` rounds.

    Breadth-first like :func:`exhaustive_streams`, but the open designations
    (process, age) are part of the merged state, so the worst wait is exact.
    A designation still open at the horizon counts with its age so far.
    """
    plain = Alg2Config(cfg.n, cfg.k, cfg.client, cfg.inputs, cfg.drop_decided, check=False)
    level = {(initial_states(plain), ()): None}
    cache: dict = {}
    worst = 0
    witness = None
    for r in range(1, rounds + 1):
        nxt: dict = {}
        for (states, open_), path in level.items():
            parts = round_participants(plain, states)
            if not parts:
                continue
            runs = cache.get(parts)
            if runs is None:
                runs = cache[parts] = rk_runs(plain.n, plain.k, parts)
            for run in runs:
                since = dict(open_)
                d = designated(run, states)
                if d is not None and d not in since:
                    since[d] = r
                st2, _, events = alg2_round(plain, states, run, ghost_initial(plain.n))
                done = {e[0] for e in events if e[1] in ("snapshot", "decide")}
                for p in list(since):
                    if p in done or r == rounds:
                        wait = r - since.pop(p) + 1
                        if wait > worst:
                            worst = wait
                            witness = (path or ()) + (run,)
                key = (st2, tuple(sorted(since.items())))
                if key not in nxt:
                    nxt[key] = (path or ()) + (run,)
        level = nxt
        if not level:
            break
    return {"maxWait": worst, "witness": None if witness is None else [x.to_json() for x in witness]}
