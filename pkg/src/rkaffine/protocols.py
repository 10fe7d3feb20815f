"""Agreement primitives: commit-adopt, k-simultaneous consensus, k-set consensus.

Each object is a :class:`~rkaffine.runtime.ObjectType`, so it lives inside the
explored shared memory. Commit-adopt comes in two forms: the classic
read-write construction (four memory steps per call) and an atomic oracle
that is cheaper to explore. The consensus-flavoured objects are oracles whose
adversarial freedom is either fixed by a policy or left open as branching.
"""

from __future__ import annotations

import hashlib
from typing import Any, Optional, Sequence

from .runtime import Invoke, ObjectType, Protocol, ProtocolError, Return, Violation

COMMIT = "commit"
ADOPT = "adopt"


# ------------------------------------------------------------ commit-adopt

class CommitAdoptRW(ObjectType):
    """Commit-adopt from two snapshot arrays.

    ``A[i] := v``; scan ``A``; if every value there equals ``v`` write
    ``B[i] := (True, v)``, else ``(False, v)``; scan ``B``. Commit ``v`` if
    every entry is ``(True, v)``; adopt any ``(True, w)`` seen; else adopt
    ``v``.
    """

    def __init__(self, n: int):
        self.n = n

    def initial(self) -> tuple:
        return ((None,) * self.n, (None,) * self.n)

    def start(self, pid: int, method: str, args: tuple) -> tuple:
        if method != "propose":
            raise ProtocolError(f"commit-adopt has no method {method!r}")
        return ("ca.writeA", args[0])

    def step(self, state: tuple, pid: int, prog: tuple) -> list:
        a, b = state
        phase, v = prog
        i = pid - 1
        if phase == "ca.writeA":
            if a[i] is not None:
                raise ProtocolError(f"process {pid} proposed twice")
            return [((a[:i] + (v,) + a[i + 1:], b), False, ("ca.scanA", v))]
        if phase == "ca.scanA":
            unanimous = all(x is None or x == v for x in a)
            return [(state, False, ("ca.writeB", (unanimous, v)))]
        if phase == "ca.writeB":
            return [((a, b[:i] + (v,) + b[i + 1:]), False, ("ca.scanB", v))]
        if phase == "ca.scanB":
            _, mine = v
            entries = [x for x in b if x is not None]
            if all(x == (True, mine) for x in entries):
                return [(state, True, (COMMIT, mine))]
            strong = [x[1] for x in entries if x[0]]
            return [(state, True, (ADOPT, strong[0] if strong else mine))]
        raise ProtocolError(f"unknown commit-adopt phase {phase!r}")


class CommitAdoptOracle(ObjectType):
    """Atomic commit-adopt.

    Every caller gets the first proposal's value. While all proposals so far
    agree the flag is commit; afterwards the adversary picks either flag. The
    state keeps only what later answers depend on: ``(first, unanimous)``.
    """

    def initial(self) -> tuple:
        return ()

    def start(self, pid: int, method: str, args: tuple) -> tuple:
        if method != "propose":
            raise ProtocolError(f"commit-adopt has no method {method!r}")
        return ("ca", args[0])

    def step(self, state: tuple, pid: int, prog: tuple) -> list:
        return [(s, True, r) for r, s in ca_propose(state, pid, prog[1])]


def ca_propose(state: tuple, pid: int, v: Any) -> list:
    """Admissible ``(response, new_state)`` pairs of the atomic oracle."""
    if not state:
        return [((COMMIT, v), (v, True))]
    first, unanimous = state
    if unanimous and v == first:
        return [((COMMIT, first), state)]
    new = (first, False)
    return [((ADOPT, first), new), ((COMMIT, first), new)]


# ----------------------------------------------- k-simultaneous consensus

class KSimultaneousConsensus(ObjectType):
    """Atomic k-simultaneous consensus.

    A caller with vector ``vec`` may win any index up to the number of
    distinct vectors proposed so far (capped at ``k``); the value is whatever
    that index already decided, or ``vec[index]``. Once ``k`` distinct vectors
    were seen the vectors themselves no longer matter and are dropped.
    """

    def __init__(self, k: int):
        self.k = k

    def initial(self) -> tuple:
        return ((), (None,) * self.k)

    def start(self, pid: int, method: str, args: tuple) -> tuple:
        if method != "propose":
            raise ProtocolError(f"KSC has no method {method!r}")
        return ("ksc", args[0])

    def step(self, state: tuple, pid: int, prog: tuple) -> list:
        return [(s, True, r) for r, s in ksc_propose(state, pid, prog[1], self.k)]


def ksc_propose(state: tuple, pid: int, vec: Sequence, k: int) -> list:
    vec = tuple(vec)
    if len(vec) != k:
        raise ProtocolError(f"KSC expects {k} entries, got {len(vec)}")
    vectors, decided = state
    if vectors is not None and vec not in vectors:
        vectors = vectors + (vec,)
    if vectors is not None and len(vectors) >= k:
        vectors = None  # saturated
    out = []
    for idx in range(1, k + 1 if vectors is None else len(vectors) + 1):
        val = decided[idx - 1]
        if val is None:
            val = vec[idx - 1]
            dec = decided[: idx - 1] + (val,) + decided[idx:]
        else:
            dec = decided
        out.append(((idx, val), (vectors, dec)))
    return out


# ------------------------------------------------------ k-set consensus

POLICIES = ("first-k-proposals", "minimize-distinct", "maximize-distinct", "seeded", "all")


class KSetConsensus(ObjectType):
    """Atomic k-set consensus. State: ``(proposals, decisions)``.

    ``policy`` resolves the adversary's freedom; ``all`` leaves every
    admissible answer as a separate branch.
    """

    def __init__(self, k: int, policy: str = "minimize-distinct", seed: int = 0, tag: Any = None):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}; pick one of {POLICIES}")
        self.k = k
        self.policy = policy
        self.seed = seed
        self.tag = tag

    def initial(self) -> tuple:
        return ((), ())

    def start(self, pid: int, method: str, args: tuple) -> tuple:
        if method != "propose":
            raise ProtocolError(f"k-set consensus has no method {method!r}")
        return ("kset", args[0])

    def step(self, state: tuple, pid: int, prog: tuple) -> list:
        return [(s, True, r) for r, s in
                kset_propose(state, pid, prog[1], self.k, self.policy, self.seed, self.tag)]


def _admissible(proposals: tuple, decisions: tuple, k: int) -> list:
    opts = list(decisions)
    if len(decisions) < k:
        for _, v in proposals:
            if v not in opts:
                opts.append(v)
    return opts


def kset_propose(state: tuple, pid: int, v: Any, k: int, policy: str = "minimize-distinct",
                 seed: int = 0, tag: Any = None) -> list:
    proposals, decisions = state
    proposals = proposals + ((pid, v),)
    opts = _admissible(proposals, decisions, k)
    if policy == "all":
        choices = opts
    elif policy == "minimize-distinct":
        choices = [decisions[0] if decisions else v]
    elif policy == "maximize-distinct":
        choices = [v if (v in decisions or len(decisions) < k) else decisions[0]]
    elif policy == "first-k-proposals":
        first: list = []
        for _, x in proposals:
            if x not in first:
                first.append(x)
        first = first[:k]
        choices = [v if v in first else first[0]]
    elif policy == "seeded":
        h = hashlib.blake2b(repr((seed, tag, pid, len(proposals))).encode(), digest_size=8)
        choices = [opts[int.from_bytes(h.digest(), "big") % len(opts)]]
    else:
        raise ValueError(f"unknown policy {policy!r}")
    out = []
    for c in choices:
        dec = decisions if c in decisions else decisions + (c,)
        out.append((c, (proposals, dec)))
    return out


# ---------------------------------------------- small checking protocols

class OneShot(Protocol):
    """Every participant calls one object once and returns the response."""

    name = "oneshot"

    def __init__(self, n: int, otype: ObjectType, method: str = "propose"):
        self.n = n
        self._otype = otype
        self.method = method

    def init(self, pid: int, inp: Any) -> tuple:
        return (False, inp)

    def action(self, pid: int, local: tuple):
        called, v = local
        if called:
            return Return(v)
        return Invoke(("OBJ",), self.method, (v,))

    def resume(self, pid: int, local: tuple, response: Any) -> tuple:
        return (True, response)

    def obj_type(self, key: tuple) -> ObjectType:
        return self._otype


def check_ca_outputs(inputs: Sequence, outputs: Sequence) -> None:
    """Commit-adopt contract on one complete run."""
    proposed = {v for v in inputs if v is not None}
    got = [o for o in outputs if o is not None]
    for flag, val in got:
        if val not in proposed:
            raise Violation("ca-validity", f"returned unproposed {val!r}")
    committed = {val for flag, val in got if flag == COMMIT}
    if committed and (len(committed) > 1 or any(val not in committed for _, val in got)):
        raise Violation("ca-agreement", f"commit with differing values {got}")
    if len(proposed) == 1 and any(flag != COMMIT for flag, _ in got):
        raise Violation("ca-unanimity", f"unanimous proposals but {got}")


def check_ksc_outputs(inputs: Sequence, outputs: Sequence, k: int) -> None:
    vecs = [tuple(v) for v in inputs if v is not None]
    ell = len(set(vecs))
    by_index: dict = {}
    for out in outputs:
        if out is None:
            continue
        idx, val = out
        if not 1 <= idx <= k:
            raise Violation("ksc-index", f"index {idx} outside 1..{k}")
        if idx > ell:
            raise Violation("ksc-ell", f"index {idx} with only {ell} distinct vectors")
        if not any(v[idx - 1] == val for v in vecs):
            raise Violation("ksc-validity", f"value {val!r} not proposed at index {idx}")
        if by_index.setdefault(idx, val) != val:
            raise Violation("ksc-agreement", f"index {idx} returned {by_index[idx]!r} and {val!r}")


def check_kset_outputs(inputs: Sequence, outputs: Sequence, k: int) -> None:
    proposed = {v for v in inputs if v is not None}
    got = {o for o in outputs if o is not None}
    if not got <= proposed:
        raise Violation("kset-validity", f"decided {sorted(got - proposed)} not proposed")
    if len(got) > k:
        raise Violation("kset-agreement", f"{len(got)} distinct decisions > {k}")


class KSetFromKSC(Protocol):
    """k-set agreement from one KSC call: propose ``(v,...,v)``, decide the value."""

    name = "kset-from-ksc"

    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k

    def init(self, pid: int, inp: Any) -> tuple:
        return (False, inp)

    def action(self, pid: int, local: tuple):
        called, v = local
        if called:
            return Return(v)
        return Invoke(("KSC",), "propose", ((v,) * self.k,))

    def resume(self, pid: int, local: tuple, response: Any) -> tuple:
        return (True, response[1])

    def obj_type(self, key: tuple) -> ObjectType:
        return KSimultaneousConsensus(self.k)
