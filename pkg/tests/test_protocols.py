import itertools

import pytest
from hypothesis import given, settings, strategies as st

from rkaffine.protocols import (
    ADOPT,
    COMMIT,
    POLICIES,
    CommitAdoptOracle,
    CommitAdoptRW,
    KSetConsensus,
    KSetFromKSC,
    KSimultaneousConsensus,
    OneShot,
    ca_propose,
    check_ca_outputs,
    check_ksc_outputs,
    check_kset_outputs,
    kset_propose,
    ksc_propose,
)
from rkaffine.runtime import ProtocolError, Violation, explore_runs


def outcomes(protocol, inputs, k=None):
    seen = set()
    for run in explore_runs(protocol, inputs, k):
        seen.add(tuple(run.config.output(i) for i in range(1, len(inputs) + 1)))
    return seen


def input_vectors(n, values=(0, 1)):
    for parts in range(1, n + 1):
        for who in itertools.combinations(range(n), parts):
            for vals in itertools.product(values, repeat=parts):
                vec = [None] * n
                for i, v in zip(who, vals):
                    vec[i] = v
                yield tuple(vec)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("flavour", ["rw", "oracle"])
def test_commit_adopt_contract_everywhere(n, flavour):
    obj = CommitAdoptRW(n) if flavour == "rw" else CommitAdoptOracle()
    any_adopt = False
    for inputs in input_vectors(n):
        for outs in outcomes(OneShot(n, obj), inputs):
            check_ca_outputs(inputs, outs)
            assert all((o is None) == (x is None) for o, x in zip(outs, inputs))
            any_adopt |= any(o is not None and o[0] == ADOPT for o in outs)
    assert any_adopt == (n > 1)


def test_commit_adopt_rw_solo_commits_and_conflict_can_adopt():
    assert outcomes(OneShot(2, CommitAdoptRW(2)), (5, None)) == {((COMMIT, 5), None)}
    flags = {tuple(o[0] for o in outs) for outs in outcomes(OneShot(2, CommitAdoptRW(2)), (0, 1))}
    assert (ADOPT, ADOPT) in flags and (COMMIT, ADOPT) in flags
    assert (COMMIT, COMMIT) not in flags


def test_ca_oracle_states():
    ((resp, st1),) = ca_propose((), 1, "a")
    assert resp == (COMMIT, "a") and st1 == ("a", True)
    assert ca_propose(st1, 2, "a") == [((COMMIT, "a"), st1)]
    assert {r for r, _ in ca_propose(st1, 2, "b")} == {(ADOPT, "a"), (COMMIT, "a")}
    with pytest.raises(ProtocolError):
        OneShot(1, CommitAdoptRW(1)).obj_type(("OBJ",)).start(1, "read", ())


def test_ca_checker_rejects():
    with pytest.raises(Violation, match="validity"):
        check_ca_outputs((1, 2), ((ADOPT, 3), None))
    with pytest.raises(Violation, match="agreement"):
        check_ca_outputs((1, 2), ((COMMIT, 1), (ADOPT, 2)))
    with pytest.raises(Violation, match="unanimity"):
        check_ca_outputs((1, 1), ((COMMIT, 1), (ADOPT, 1)))


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 2), (3, 3)])
def test_ksc_contract(n, k):
    values = [tuple(v) for v in itertools.product("ab", repeat=k)][:3]
    for inputs in input_vectors(n, values):
        for outs in outcomes(OneShot(n, KSimultaneousConsensus(k)), inputs):
            check_ksc_outputs(inputs, outs, k)


def test_ksc_index_range_grows_with_distinct_vectors():
    s0 = ((), (None, None))
    first = ksc_propose(s0, 1, ("x", "y"), 2)
    assert [r for r, _ in first] == [(1, "x")]
    (_, s1), = first
    second = ksc_propose(s1, 2, ("p", "q"), 2)
    assert [r for r, _ in second] == [(1, "x"), (2, "q")]
    with pytest.raises(ProtocolError):
        ksc_propose(s0, 1, ("x",), 2)


def test_ksc_checker_rejects():
    with pytest.raises(Violation, match="ksc-ell"):
        check_ksc_outputs((("a", "b"), ("a", "b")), ((2, "b"), None), 2)
    with pytest.raises(Violation, match="ksc-agreement"):
        check_ksc_outputs((("a", "b"), ("c", "d")), ((1, "a"), (1, "c")), 2)
    with pytest.raises(Violation, match="ksc-index"):
        check_ksc_outputs((("a",),), ((2, "a"),), 1)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (3, 3)])
def test_kset_from_ksc(n, k):
    for inputs in input_vectors(n, (0, 1, 2)):
        for outs in outcomes(KSetFromKSC(n, k), inputs):
            check_kset_outputs(inputs, outs, k)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2)])
def test_kset_policies_are_admissible_choices(n, k):
    for inputs in input_vectors(n, (0, 1, 2)):
        every = outcomes(OneShot(n, KSetConsensus(k, "all")), inputs)
        for outs in every:
            check_kset_outputs(inputs, outs, k)
        for policy in POLICIES:
            if policy == "all":
                continue
            for outs in outcomes(OneShot(n, KSetConsensus(k, policy, seed=3)), inputs):
                check_kset_outputs(inputs, outs, k)
                assert outs in every, (policy, inputs, outs)
        distinct = len({v for v in inputs if v is not None})
        if distinct >= k:
            assert max(len({o for o in outs if o is not None}) for outs in every) == k


def test_minimize_distinct_is_consensus():
    for outs in outcomes(OneShot(3, KSetConsensus(2, "minimize-distinct")), (0, 1, 2)):
        assert len(set(outs)) == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=6), st.integers(1, 3), st.integers(0, 99))
def test_seeded_policy_against_brute_force(props, k, seed):
    state = ((), ())
    decided = []
    for pid, v in enumerate(props, 1):
        ((c, state),) = kset_propose(state, pid, v, k, "seeded", seed, "t")
        decided.append(c)
    # brute-force admissibility: a value already decided, or while fewer
    # than k values were decided, any value proposed so far
    seen_dec = []
    for pid, c in enumerate(decided, 1):
        assert c in seen_dec or (len(seen_dec) < k and c in props[:pid])
        if c not in seen_dec:
            seen_dec.append(c)
    check_kset_outputs(props, decided, k)


def test_unknown_policy():
    with pytest.raises(ValueError):
        KSetConsensus(1, "coin")
