from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from rkaffine.affine import build_rk
from rkaffine.runtime import (
    Echo,
    Event,
    FullInformationIIS,
    Invoke,
    Monitor,
    Protocol,
    ProtocolError,
    Return,
    Schedule,
    SnapshotMemory,
    Trace,
    Violation,
    canon,
    check_bound,
    digest,
    enumerate_schedules,
    explore_runs,
    is_invoke,
    is_profile,
    model_check,
    random_run,
    record,
    run_protocol,
    seeded_schedule,
    verify_replay,
)
from rkaffine.subdivision import enumerate_is_runs, nonempty_subsets


def test_snapshot_update_then_solo_scan():
    p = Echo(3)
    outs, trace = run_protocol(p, (7, None, None), Schedule((Event((1,)), Event((1,)))))
    assert outs == [7, None, None]
    assert trace.records[1].response == (7, None, None)


def test_is_invoke_blocks():
    st1, r1 = is_invoke((), [(2, "b")])
    st2, r2 = is_invoke(st1, [(1, "a"), (3, "c")])
    assert r1[2] == {(2, "b")}
    assert r2[1] == r2[3] == {(1, "a"), (2, "b"), (3, "c")}
    with pytest.raises(ProtocolError):
        is_invoke(st2, [(2, "again")])


@pytest.mark.parametrize("parts", [p for p in nonempty_subsets(3)])
def test_is_profiles_match_enumeration(parts):
    inputs = [i if i in parts else None for i in (1, 2, 3)]
    profiles = []
    for run in explore_runs(FullInformationIIS(3, 1), inputs, None, max_events=8):
        prof = is_profile(run)
        views, seen = {}, set()
        for blk in prof:
            seen |= blk
            for i in blk:
                views[i] = frozenset(seen)
        for i in views:
            for j in views:
                assert i in views[i]
                assert views[i] <= views[j] or views[j] <= views[i]
                if i in views[j]:
                    assert views[i] <= views[j]
        # outputs agree with the released blocks
        for i in views:
            assert {v.color for v in run.config.output(i).label} == views[i]
        profiles.append(tuple(tuple(sorted(b)) for b in prof))
    want = Counter(r.key() for r in enumerate_is_runs(parts))
    assert Counter(profiles) == want


@pytest.mark.parametrize("k", [1, 2, 3])
def test_two_rounds_under_k_concurrency_land_in_rk(k):
    rk = build_rk(3, k)
    for parts in nonempty_subsets(3):
        inputs = [i if i in parts else None for i in (1, 2, 3)]
        reached = set()
        for run in explore_runs(FullInformationIIS(3, 2), inputs, k):
            f = frozenset(run.config.output(i) for i in parts)
            assert f in rk, f
            reached.add(f)
        if len(parts) == 3:
            assert reached == set(rk.top_facets())


@pytest.mark.parametrize("n,k,depth,steps", [(3, 1, 6, 2), (3, 2, 6, 2), (3, 2, 7, None), (2, 1, 5, 3)])
def test_enumerated_schedules_respect_bound(n, k, depth, steps):
    seen = 0
    for s in enumerate_schedules(n, k, depth, steps):
        assert check_bound(s, steps)
        seen += 1
    assert seen > 0


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**64 - 1), st.integers(1, 30),
       st.one_of(st.none(), st.integers(1, 4)))
def test_seeded_schedules_respect_bound(n, k, seed, depth, steps):
    k = min(k, n)
    s = seeded_schedule(n, k, seed, depth, steps)
    assert check_bound(s, steps)
    assert s == seeded_schedule(n, k, seed, depth, steps)


def test_check_bound_detects_excess():
    s = Schedule(tuple(Event((p,)) for p in (1, 2, 1)), 1)
    assert not check_bound(s)
    # a process that finished after one step no longer counts against the bound
    assert check_bound(s, steps_per_process=1)
    assert not check_bound(s, steps_per_process=2)


def test_fair_random_run_gives_everyone_steps():
    p = FullInformationIIS(3, 4)
    sched = random_run(p, (1, 2, 3), None, seed=11, max_events=100, fair=True)
    outs, _ = run_protocol(p, (1, 2, 3), sched)
    assert all(o is not None for o in outs)


def test_digest_is_canonical():
    assert digest({"b": 1, "a": frozenset({2, 1})}) == digest({"a": frozenset({1, 2}), "b": 1})
    assert len(digest(())) == 16
    assert canon(frozenset({3, 1})) == canon(frozenset({1, 3}))


class _Counter(Protocol):
    """Each process writes 1 then 2; a monitor forbids anyone seeing a 2 from 3."""

    name = "toy"

    def __init__(self, n):
        self.n = n

    def init(self, pid, inp):
        return 0

    def action(self, pid, s):
        if s < 2:
            return Invoke(("MEM",), "update", (s + 1,))
        if s == 2:
            return Invoke(("MEM",), "scan")
        return Return(s)

    def resume(self, pid, s, resp):
        return s + 1

    def obj_type(self, key):
        return SnapshotMemory(self.n)

    def monitors(self):
        return (_NoTwoTwos(),)


class _NoTwoTwos(Monitor):
    name = "no-two-twos"

    def initial(self, config):
        return 0

    def on_event(self, g, before, after, rec):
        mem = after.obj(("MEM",))
        if mem is not None and sum(1 for x in mem if x == 2) >= 2:
            raise Violation("two-twos", f"memory {mem}")
        return g


def test_model_check_counterexample_replays():
    res = model_check(_Counter(2), (0, 0))
    assert not res.ok and res.violation.prop == "two-twos"
    path = tuple(res.violation.path)
    _, trace, v = record(_Counter(2), (0, 0), Schedule(path))
    assert v is not None and v.prop == "two-twos"
    assert trace.digests[-1] is None
    with pytest.raises(Violation):
        run_protocol(_Counter(2), (0, 0), Schedule(path))


def test_model_check_compact_agrees():
    full = model_check(FullInformationIIS(3, 2), (1, 2, 3))
    compact = model_check(FullInformationIIS(3, 2), (1, 2, 3), compact=True)
    assert full.ok and compact.ok
    assert full.states == compact.states and full.terminals == compact.terminals


def test_trace_roundtrip_and_replay():
    p = FullInformationIIS(3, 2)
    sched = random_run(p, (1, 2, 3), None, seed=3, max_events=50)
    _, trace = run_protocol(p, (1, 2, 3), sched)
    text = trace.to_jsonl()
    header, recorded = Trace.parse(text)
    assert header["protocol"] == "iis"
    assert verify_replay(p, (1, 2, 3), None, recorded) is None
    tampered = [(ev, "0" * 16) for ev, _ in recorded]
    assert verify_replay(p, (1, 2, 3), None, tampered) == 0


def test_strict_rejects_bad_token():
    with pytest.raises(ProtocolError):
        run_protocol(Echo(2), (1, 2), Schedule((Event((1,)), Event((1,)), Event((1,)))))
    outs, _ = run_protocol(Echo(2), (1, 2), Schedule((Event((1,)),) * 3), strict=False)
    assert outs[0] == 1
