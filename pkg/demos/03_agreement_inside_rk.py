"""
Read-write and k-set agreement inside iterated R_k
==================================================

Each round every process feeds its state into a two-round immediate
snapshot whose run lies in R_k.  Writes are adopted by counter, agreement
estimates come from leaders.
"""

from rkaffine.alg_rk import (
    Alg2Config,
    alg2_snapshot_linearization,
    exhaustive_progress,
    exhaustive_streams,
    make_client,
    seeded_stream,
    simulate_in_rkstar,
)

cfg = Alg2Config(3, 2, make_client("kset"), (0, 1, 2))

# One seeded stream of R_2 runs.
res = simulate_in_rkstar(cfg, seeded_stream(cfg, 3), rounds=10)
for rec in res.trace.rounds[:4]:
    print("round", rec["round"], rec["run"], [e[:2] for e in rec["events"]])
print("outputs:", res.outputs())
print("snapshot history legal:", alg2_snapshot_linearization(res.trace).ok)

# Every stream of six rounds, merging equal global states.
for k in (1, 2):
    c = Alg2Config(3, k, make_client("kset"), (0, 1, 2))
    ex = exhaustive_streams(c, 6)
    dec = sorted({len({o for o in outs if o is not None}) for outs in ex.outputs})
    print(f"k={k}: states per round {ex.states_per_round}, distinct decisions seen {dec}")

# The process with the smallest second-round view completes an operation
# soon: the worst wait over all streams, exactly.
print("worst wait, k=1:", exhaustive_progress(Alg2Config(3, 1, make_client("kset"), (0, 1, 2)), 19)["maxWait"])

# The echo client writes its input, takes a snapshot and returns the input.
echo = Alg2Config(3, 3, make_client("echo"), ("a", "b", "c"))
print("echo:", simulate_in_rkstar(echo, seeded_stream(echo, 1), rounds=8).outputs())
