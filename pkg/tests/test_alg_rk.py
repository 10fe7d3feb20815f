import json

import pytest
from hypothesis import given, settings, strategies as st

from rkaffine.alg_rk import (
    DECIDED,
    UNDECIDED,
    Alg2Config,
    Alg2State,
    Alg2Trace,
    AgreementClient,
    EchoClient,
    FileClient,
    alg2_snapshot_linearization,
    alg2_update_stage,
    alg2_validate_stage,
    designated,
    exhaustive_progress,
    exhaustive_streams,
    initial_states,
    make_client,
    progress_gaps,
    replay_alg2,
    rk_runs,
    seeded_stream,
    simulate_in_rkstar,
)
from rkaffine.protocols import check_kset_outputs
from rkaffine.subdivision import RunSequence

SOLO_ORDER = RunSequence.from_json([[[1], [2], [3]], [[1], [2], [3]]])


def cfg(n, k, client="kset", inputs=None, **kw):
    return Alg2Config(n, k, make_client(client), tuple(range(n)) if inputs is None else inputs, **kw)


# frozen from exhaustive runs over every R_k stream, inputs (0, 1, 2)
FROZEN = {
    (3, 1, "kset", 6): ([6, 30, 70, 90, 96, 87], 12),
    (3, 2, "kset", 6): ([18, 79, 202, 220, 294, 270], 42),
    (3, 3, "kset", 4): ([19, 67, 173, 148], 19),
    (3, 2, "echo", 6): ([18, 19, 19, 0], 1),
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_exhaustive_streams(key):
    n, k, client, rounds = key
    res = exhaustive_streams(cfg(n, k, client), rounds)
    assert res.ok, res.violation
    counts, n_outputs = FROZEN[key]
    assert res.states_per_round == counts
    assert len(res.outputs) == n_outputs
    for outs in res.outputs:
        if client == "kset":
            check_kset_outputs(range(n), outs, k)
        else:
            assert outs == (0, 1, 2)


def test_consensus_two_processes_always_decides():
    res = exhaustive_streams(cfg(2, 1, "consensus"), 8)
    assert res.ok and res.terminals == 0
    assert res.outputs == {(0, 0), (1, 1)}


def test_update_stage_adopts_newer_writes_and_leader_estimates():
    me = Alg2State(1, UNDECIDED, (1, 0), ("a", None), "A", 0, (("A", 0),), True, None)
    other_input = (UNDECIDED, ((0, 1), (None, "b")), (("A", 1),))
    inputs = {1: me.rk_input(), 2: other_input}
    # process 2 saw only itself first, so it is a leader for k = 1
    st = alg2_update_stage(me, 1, {1: {1, 2}, 2: {2}}, {1, 2}, inputs, 1)
    assert st.wc == (1, 1) and st.wv == ("a", "b")
    assert st.history == (("A", 1),)
    assert st.leaders
    # seeing only itself, process 1 takes nothing new
    st = alg2_update_stage(me, 1, {1: {1, 2}, 2: {1, 2}}, {1}, inputs, 1)
    assert st.wc == (1, 0) and st.history == (("A", 0),)


def test_validate_stage_waits_for_the_count():
    client = AgreementClient()
    (s1, _) = initial_states(cfg(2, 1))
    st, events = alg2_validate_stage(s1._replace(r=2), 1, 0, client)
    assert events == [] and st == s1._replace(r=2)
    st, events = alg2_validate_stage(s1._replace(r=1), 1, 0, client)
    assert [e[0] for e in events] == ["propose", "write"]
    assert st.wc == (2, 0) and st.cons_id == "A"


def test_echo_single_round_solo_order():
    res = simulate_in_rkstar(cfg(3, 1, "echo"), [SOLO_ORDER] * 4)
    assert res.violation is None
    assert res.outputs() == [0, 1, 2]
    snaps = [e for r in res.trace.rounds for e in r["events"] if e[1] == "snapshot"]
    assert snaps and all(len(e[4]) == 3 for e in snaps)


def test_run_must_cover_participants():
    with pytest.raises(ValueError):
        simulate_in_rkstar(cfg(3, 1, inputs=(0, 1, None)), [SOLO_ORDER])


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(2, 1), (3, 1), (3, 2), (3, 3)]), st.sampled_from(["kset", "echo"]),
       st.integers(0, 10**6))
def test_seeded_streams_replay_and_linearize(size, client, seed):
    n, k = size
    c = cfg(n, k, client)
    res = simulate_in_rkstar(c, seeded_stream(c, seed), rounds=12)
    assert res.violation is None
    text = res.trace.to_jsonl()
    trace = Alg2Trace.parse(text)
    assert replay_alg2(c, trace) is None
    assert alg2_snapshot_linearization(trace).ok
    if client == "kset":
        check_kset_outputs(range(n), res.outputs(), k)


def test_replay_detects_tampering():
    c = cfg(3, 2)
    res = simulate_in_rkstar(c, seeded_stream(c, 4), rounds=6)
    trace = Alg2Trace.parse(res.trace.to_jsonl())
    trace.rounds[2]["stateDigest"] = "0" * 16
    assert replay_alg2(c, trace) == 2


def test_linearization_flags_two_snapshots_in_a_round():
    trace = Alg2Trace({}, [{"round": 1, "run": None, "events": [
        [1, "snapshot", 1, "x", [[1, "x"], [0, None]]],
        [2, "snapshot", 1, "y", [[0, None], [1, "y"]]]]}])
    res = alg2_snapshot_linearization(trace)
    assert not res.ok and res.counterexample["claim"] == "claim4"


def test_designated_is_smallest_second_view():
    states = initial_states(cfg(3, 3))
    run = RunSequence.from_json([[[3], [1, 2]], [[3], [1, 2]]])
    assert designated(run, states) == 3
    decided = (states[0], states[1], states[2]._replace(state=DECIDED))
    assert designated(run, decided) == 1


@pytest.mark.parametrize("n,k,want", [(2, 1, 4), (2, 2, 4), (3, 1, 7)])
def test_exact_worst_wait(n, k, want):
    # six rounds per operation bound; one extra round so a stuck process shows up
    bound = n * 6
    res = exhaustive_progress(cfg(n, k), bound + 1)
    assert res["maxWait"] == want <= bound


def test_progress_gaps_on_a_stream():
    c = cfg(3, 2)
    runs = [SOLO_ORDER] * 10
    gaps = progress_gaps(c, runs)
    assert gaps["waits"] and max(gaps["waits"]) <= 3 * 6
    assert gaps["pending"] == []


def test_rk_runs_counts():
    assert len(rk_runs(3, 1, (1, 2, 3))) == 6
    assert len(rk_runs(3, 2, (1, 2, 3))) == 72
    assert len(rk_runs(3, 3, (1, 2))) == 9


def test_file_client():
    data = {"ops": {"*": [["write", "$input"], ["agree", "B", "$input"]], "2": [["agree", "B", 7]]}}
    client = FileClient(json.dumps(data))
    assert client.ops(1, 5) == (("write", 5), ("agree", "B", 5))
    assert client.ops(2, 5) == (("agree", "B", 7),)
    c = Alg2Config(2, 1, client, (5, 6))
    res = exhaustive_streams(c, 10)
    assert res.ok
    for outs in res.outputs:
        decided = {o[-1] for o in outs if o is not None}
        assert len(decided) <= 1
    with pytest.raises(ValueError):
        FileClient({"ops": {"*": [["read"]]}})
    with pytest.raises(ValueError):
        make_client("nope")
    assert isinstance(make_client("echo"), EchoClient)
