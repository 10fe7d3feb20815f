"""Acceptance criteria 1-10, each at its stated size and tolerance.

Every check records its outcome with the ``gate`` fixture; the terminal
summary then prints one PASS/FAIL line per criterion. Two checks fail at full
strength and are marked strict-xfail (see the notes in each): the suite stays
green while the gate line reads FAIL.
"""

import itertools
import subprocess
import sys
import time
from collections import Counter

import pytest

from rkaffine.affine import (
    build_rk,
    iterate_pattern,
    leader_failures,
    ordered_pattern,
    rk_pattern,
)
from rkaffine.alg_kconc import Alg1, alg1_progress_gaps, linearize_alg1
from rkaffine.alg_rk import Alg2Config, alg2_snapshot_linearization, exhaustive_progress, \
    exhaustive_streams, make_client, seeded_stream, simulate_in_rkstar
from rkaffine.complex_core import boundary_touching_facets, is_connected
from rkaffine.protocols import check_kset_outputs
from rkaffine.runtime import (
    FullInformationIIS,
    Trace,
    explore_runs,
    is_profile,
    model_check,
    random_run,
    record,
)
from rkaffine.subdivision import chr, chr_iter, enumerate_is_runs, nonempty_subsets, simplex_complex
from rkaffine.tasks import consensus_task, solvability_search


def ordered_partitions(k):
    """Brute force: every map of a k-set onto block positions 0..j-1."""
    return sum(1 for f in itertools.product(range(k), repeat=k) if set(f) == set(range(max(f) + 1)))


# ---------------------------------------------------------------- 1

def test_c1_facet_counts(gate):
    t = time.perf_counter()
    oracle = [ordered_partitions(k) for k in range(1, 5)]
    chr1 = len(chr(simplex_complex(3)).facets)
    chr2 = len(chr_iter(3, 2).facets)
    runs = [len(enumerate_is_runs(range(1, k + 1))) for k in range(1, 5)]
    dt = time.perf_counter() - t
    ok = oracle == [1, 3, 13, 75] == runs and chr1 == 13 and chr2 == 169 and dt < 1
    gate(1, "Chr/Chr^2 at n=3 and oracle", ok, f"Chr={chr1} Chr^2={chr2} oracle={oracle} ({dt:.2f}s)")
    assert ok


# ---------------------------------------------------------------- 2

def test_c2_rk_structure(gate):
    t = time.perf_counter()
    chr2 = chr_iter(3, 2)
    r1, r2, r3 = build_rk(3, 1), build_rk(3, 2), build_rk(3, 3)
    six = len(r1.top_facets())
    eq3 = r3 == chr2
    eq2 = r2.top_facets() == boundary_touching_facets(chr2, simplex_complex(3))
    dt = time.perf_counter() - t
    ok = six == 6 and eq3 and eq2 and dt < 5
    gate(2, "R_1, R_2, R_3 at n=3", ok, f"R_1 top facets={six} R_3==Chr^2:{eq3} "
                                        f"R_2==boundary-touching:{eq2} ({dt:.2f}s)")
    assert ok


# ---------------------------------------------------------------- 3

def _is_axioms(prof):
    views, seen = {}, set()
    for blk in prof:
        seen |= blk
        for i in blk:
            views[i] = frozenset(seen)
    for i, j in itertools.product(views, repeat=2):
        if i not in views[i]:
            return False
        if not (views[i] <= views[j] or views[j] <= views[i]):
            return False
        if i in views[j] and not views[i] <= views[j]:
            return False
    return True


@pytest.mark.parametrize("n", [1, 2, 3])
def test_c3_is_axioms_and_profiles(n, gate):
    t = time.perf_counter()
    ok = True
    runs = 0
    for parts in nonempty_subsets(n):
        inputs = [i if i in parts else None for i in range(1, n + 1)]
        profiles = Counter()
        for run in explore_runs(FullInformationIIS(n, 1), inputs, None, max_events=8):
            prof = is_profile(run)
            ok &= _is_axioms(prof)
            profiles[tuple(tuple(sorted(b)) for b in prof)] += 1
            runs += 1
        ok &= profiles == Counter(r.key() for r in enumerate_is_runs(parts))
    dt = time.perf_counter() - t
    ok &= dt < 60
    gate(3, f"n={n}", ok, f"{runs} runs over every participating set, axioms and multiset ({dt:.2f}s)")
    assert ok


# ---------------------------------------------------------------- 4

@pytest.mark.parametrize("k", [1, 2, 3])
def test_c4_two_rounds_land_in_rk(k, gate):
    t = time.perf_counter()
    rk = build_rk(3, k)
    runs = bad = 0
    reached = set()
    for parts in nonempty_subsets(3):
        inputs = [i if i in parts else None for i in (1, 2, 3)]
        for run in explore_runs(FullInformationIIS(3, 2), inputs, k):
            f = frozenset(run.config.output(i) for i in parts)
            runs += 1
            bad += f not in rk
            if len(parts) == 3:
                reached.add(f)
    dt = time.perf_counter() - t
    ok = bad == 0 and dt < 300
    gate(4, f"n=3 k={k}", ok, f"{runs} runs, {len(reached)} distinct full facets, {bad} outside R_k ({dt:.2f}s)")
    assert ok


# ---------------------------------------------------------------- 5

@pytest.mark.parametrize("n", [
    1, 2, 3,
    # leader visibility fails in R_2 at n=4: see the notes ledger
    pytest.param(4, marks=pytest.mark.xfail(strict=True, reason="no visible leader in 144 R_2 cases at n=4")),
])
def test_c5_leaders(n, gate):
    t = time.perf_counter()
    counts = {k: len(leader_failures(n, k)) for k in range(1, n + 1)}
    dt = time.perf_counter() - t
    ok = not any(counts.values()) and dt < 600
    gate(5, f"n={n}", ok, f"failures per k {counts} ({dt:.2f}s)")
    assert ok


# ---------------------------------------------------------------- 6

ALG1_SIZES = [(2, 1), (2, 2), (3, 1), (3, 2)]


@pytest.mark.parametrize("n,k", [
    (2, 1), (2, 2), (3, 1),
    # the literal variant validates an un-agreed write: see the notes ledger
    pytest.param(3, 2, marks=pytest.mark.xfail(strict=True, reason="one (slot, counter) validated with two snapshots")),
])
def test_c6_alg1_claims(n, k, gate):
    t = time.perf_counter()
    proto = Alg1(n, k, 3)
    res = model_check(proto, (0,) * n, compact=(n, k) == (3, 2))
    dt = time.perf_counter() - t
    # the online monitor checks every path; cross-check the offline
    # linearizer on a prefix of the enumerated runs
    offline = 0
    lin_ok = True
    for run in itertools.islice(explore_runs(proto, (0,) * n), 2000):
        lin_ok &= linearize_alg1(Trace({}, run.events, run.records, ()), k).ok
        offline += 1
    ok = res.ok and lin_ok and dt < 1800
    v = res.violation
    gate(6, f"literal n={n} k={k} R=3", ok,
         f"{res.states} states, {res.terminals} terminals, "
         f"{'no violation' if v is None else 'violation ' + v.prop + ' after ' + str(len(v.path)) + ' events'}; "
         f"offline linearizer legal on {offline} runs: {lin_ok} ({dt:.1f}s)")
    assert ok


@pytest.mark.parametrize("n,k,rounds", [(2, 2, 4), (3, 1, 3)])
def test_c6_guarded_variant_reported(n, k, rounds, gate):
    """Informational: the guarded variant at the size where the literal
    one fails for two simulators. Not a substitute for the check above."""
    t = time.perf_counter()
    res = model_check(Alg1(n, k, rounds, variant="guarded"), (0,) * n)
    gate(6, f"(info) guarded n={n} k={k} R={rounds}", res.ok,
         f"{res.states} states, {'no violation' if res.ok else res.violation.prop} "
         f"({time.perf_counter() - t:.1f}s)")
    assert res.ok


# ---------------------------------------------------------------- 7

@pytest.mark.parametrize("k", [1, 2])
def test_c7_alg2_safety(k, gate):
    t = time.perf_counter()
    cfg = Alg2Config(3, k, make_client("kset"), (0, 1, 2))
    res = exhaustive_streams(cfg, 6)
    outs_ok = True
    for outs in res.outputs:
        try:
            check_kset_outputs((0, 1, 2), outs, k)
        except Exception:
            outs_ok = False
    # offline linearization of seeded traces on top of the online check
    lin = all(alg2_snapshot_linearization(simulate_in_rkstar(cfg, seeded_stream(cfg, s), 6).trace).ok
              for s in range(200))
    dt = time.perf_counter() - t
    ok = res.ok and outs_ok and lin and dt < 1800
    gate(7, f"n=3 k={k} 6 rounds", ok,
         f"states per round {res.states_per_round}, {len(res.outputs)} distinct outputs, "
         f"{'no violation' if res.ok else res.violation.prop}; offline linearization on 200 seeded "
         f"streams legal: {lin} ({dt:.1f}s)")
    assert ok


# ---------------------------------------------------------------- 8

@pytest.mark.parametrize("n,k", ALG1_SIZES)
def test_c8_alg1_progress(n, k, gate):
    t = time.perf_counter()
    bound = n * (3 * k + 2)
    worst = 0
    for seed in range(40):
        proto = Alg1(n, k, 3, variant="guarded")
        sched = random_run(proto, (0,) * n, None, seed, max_events=4000, fair=True)
        _, trace, v = record(proto, (0,) * n, sched)
        assert v is None
        worst = max(worst, max(alg1_progress_gaps(trace, k, n)["gaps"] + [0]))
    dt = time.perf_counter() - t
    ok = worst <= bound and dt < 1800
    gate(8, f"Alg1 n={n} k={k} fair seeds 0..39", ok, f"worst gap {worst} events, bound {bound} ({dt:.1f}s)")
    assert ok


@pytest.mark.parametrize("k", [1, 2])
def test_c8_alg2_progress(k, gate):
    t = time.perf_counter()
    n, rounds = 3, 6
    bound = n * rounds
    res = exhaustive_progress(Alg2Config(n, k, make_client("kset"), (0, 1, 2)), bound + 1)
    dt = time.perf_counter() - t
    ok = res["maxWait"] <= bound and dt < 1800
    gate(8, f"Alg2 n=3 k={k} every stream", ok,
         f"worst designated wait {res['maxWait']} rounds, bound {bound} ({dt:.1f}s)")
    assert ok


# ---------------------------------------------------------------- 9

def test_c9_obstruction(gate):
    t = time.perf_counter()
    conn = [is_connected(iterate_pattern(ordered_pattern(3), s)) for s in (1, 2, 3)]
    none = solvability_search(consensus_task(3), ordered_pattern(3), 2)
    some = solvability_search(consensus_task(2), rk_pattern(2, 1), 1)
    dt = time.perf_counter() - t
    ok = all(conn) and not none.found and some.found and some.rounds == 1 and dt < 600
    gate(9, "ordered(3) and R_1", ok, f"connected t=1..3 {conn}; consensus over ordered(3) m<=2: "
                                      f"{none.describe()}; R_1 n=2: {some.describe()} ({dt:.2f}s)")
    assert ok


# --------------------------------------------------------------- 10

CLI_RUNS = [
    (["chr", "--n", "3", "--m", "2"], ()),
    (["rk", "--n", "3", "--k", "2", "--out", "svg"], ()),
    (["contention", "--n", "3"], ()),
    (["alg1", "--n", "3", "--k", "2", "--schedule", "seed:18446744073709551557", "--fair",
      "--variant", "guarded", "--trace", "{dir}/trace.jsonl"], ("trace.jsonl",)),
    (["alg2", "--n", "3", "--k", "2", "--stream", "seed:42", "--rounds", "10",
      "--trace", "{dir}/trace.jsonl"], ("trace.jsonl",)),
    (["solve", "--task", "kset", "--k", "2", "--n", "3", "--pattern", "rk:2"], ()),
]


def _cli(args, workdir):
    workdir.mkdir(parents=True, exist_ok=True)
    argv = [a.replace("{dir}", str(workdir)) for a in args]
    proc = subprocess.run([sys.executable, "-m", "rkaffine", *argv], capture_output=True, cwd=workdir)
    return proc.returncode, proc.stdout


@pytest.mark.parametrize("case", range(len(CLI_RUNS)))
def test_c10_determinism(case, tmp_path, gate):
    args, files = CLI_RUNS[case]
    t = time.perf_counter()
    # separate interpreters, so string hashing differs between the two runs
    a = _cli(args, tmp_path / "a")
    b = _cli(args, tmp_path / "b")
    same = a == b and a[0] == 0 and len(a[1]) > 0
    for f in files:
        same &= (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    dt = time.perf_counter() - t
    ok = same and dt < 60
    gate(10, args[0] + " " + " ".join(args[1:5]), ok, f"{len(a[1])} bytes identical across runs ({dt:.1f}s)")
    assert ok
