"""
A k-process memory from k-set consensus
=======================================

Simulators agree, round by round, on which of k simulated processes
advances.  The runtime explores every interleaving and watches the
simulated memory with monitors.
"""

from rkaffine.alg_kconc import (
    Alg1,
    KConcurrencySolver,
    KConcurrentAgreement,
    alg1_progress_gaps,
    kconc_outputs,
    linearize_alg1,
)
from rkaffine.runtime import Schedule, model_check, random_run, record

# Two simulators, one simulated process, three rounds: every schedule.
res = model_check(Alg1(2, 1, 3), (0, 0))
print("n=2 k=1:", res.states, "states, violation:", res.violation)

# Two simulated processes and four rounds.  Followed literally, the
# algorithm lets a simulator validate its own write after committing on an
# older value, and two different writes end up validated for one counter.
lit = model_check(Alg1(2, 2, 4), (0, 0))
print("literal n=2 k=2 R=4:", lit.violation.prop, "after", len(lit.violation.path), "events")

# The counterexample is a schedule; recording it again reproduces the violation.
_, trace, v = record(Alg1(2, 2, 4), (0, 0), Schedule(tuple(lit.violation.path)))
print("   ", v.detail, "|", len(trace.lines()), "trace lines")

# Validating only when the committed value was adopted closes the gap.
guarded = model_check(Alg1(2, 2, 3, variant="guarded"), (0, 0))
print("guarded n=2 k=2 R=3:", guarded.states, "states, ok:", guarded.ok)

# A fair random schedule: the offline linearizer rebuilds the simulated
# history, and new writes keep appearing at a steady pace.
proto = Alg1(3, 2, 4, variant="guarded")
sched = random_run(proto, (0, 0, 0), None, seed=7, max_events=3000, fair=True)
_, trace, _ = record(proto, (0, 0, 0), sched)
print("linearizer:", linearize_alg1(trace, 2).describe())
print("largest gap between new writes:", max(alg1_progress_gaps(trace, 2, 3)["gaps"]))

# On top of it, BG simulators run a 1-concurrent consensus protocol for the
# real processes.  Every schedule ends in agreement.
outs = set()
solver = KConcurrencySolver(KConcurrentAgreement(2), 2, 1, 9)
res = model_check(solver, (0, 1), at_terminal=lambda c, g: outs.add(tuple(kconc_outputs(c))))
print("consensus through the simulation:", res.states, "states, outcomes", sorted(outs))
