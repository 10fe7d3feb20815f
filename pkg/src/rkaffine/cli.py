"""Command-line entry point.

Exit codes: 0 when the command ran and every checked property holds, 1 when a
property is violated (a counterexample file is written), 2 on usage errors.
All output is deterministic for identical flags; the only randomness is the
64-bit seed in ``--schedule seed:N`` / ``--stream seed:N``, echoed in the output.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Optional, Sequence

from . import __version__
from .affine import (
    consensus_obstruction_report,
    facet_record,
    ktas_pattern,
    leader_failures,
    ordered_pattern,
    rk_pattern,
    build_rk,
)
from .alg_kconc import Alg1, alg1_progress_gaps, linearize_alg1
from .alg_rk import (
    Alg2Config,
    Alg2Trace,
    alg2_snapshot_linearization,
    exhaustive_progress,
    exhaustive_streams,
    make_client,
    progress_gaps,
    replay_alg2,
    seeded_stream,
    simulate_in_rkstar,
)
from .complex_core import to_json_dict
from .runtime import Schedule, Trace, jsonable, model_check, random_run, record
from .subdivision import BudgetExceeded, chr_iter, enumerate_runs, to_svg
from .tasks import BUILTINS, solvability_search, task_from_json

CLAIM_PROPS = {"claim1", "claim2", "claim3"}
LIN_PROPS = {"linearize"}
PROGRESS_PROPS = {"round-commit", "progress"}


class UsageError(ValueError):
    pass


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _write_cex(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"counterexample written to {path}", file=sys.stderr)


def _pattern(spec: str, n: int):
    if spec == "ordered":
        return ordered_pattern(n)
    kind, _, k = spec.partition(":")
    if kind in ("rk", "ktas") and k.isdigit():
        k = int(k)
        if not 1 <= k <= n:
            raise UsageError(f"pattern {spec}: need 1 <= k <= n")
        return rk_pattern(n, k) if kind == "rk" else ktas_pattern(n, k)
    raise UsageError(f"unknown pattern {spec!r} (ordered, rk:K, ktas:K)")


def _seed_of(spec: str, flag: str) -> int:
    try:
        seed = int(spec.split(":", 1)[1])
    except (IndexError, ValueError):
        raise UsageError(f"{flag} expects seed:<u64>") from None
    if not 0 <= seed < 1 << 64:
        raise UsageError("seed must fit in 64 bits")
    return seed


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise UsageError(msg)


# ------------------------------------------------------------- complexes

def cmd_chr(a) -> int:
    _need(1 <= a.n <= 4 and a.m >= 1, "need 1 <= n <= 4 and m >= 1")
    _need(a.out == "json" or a.n == 3, "SVG export is planar and needs n = 3")
    c = chr_iter(a.n, a.m)
    if a.out == "svg":
        _emit(to_svg(c, scale=a.scale), a.output)
    else:
        _emit(_dump({"command": "chr", "m": a.m, **to_json_dict(c, a.n)}), a.output)
    return 0


def cmd_rk(a) -> int:
    _need(1 <= a.n <= 4 and 1 <= a.k <= a.n, "need 1 <= k <= n <= 4")
    _need(a.out == "json" or a.n == 3, "SVG export is planar and needs n = 3")
    rk = build_rk(a.n, a.k)
    if a.out == "svg":
        inside = rk.facets
        _emit(to_svg(chr_iter(3, 2), scale=a.scale, highlight=lambda f: f in inside), a.output)
    else:
        d = to_json_dict(rk, a.n)
        d.update(command="rk", k=a.k, topFacets=len(rk.top_facets()))
        _emit(_dump(d), a.output)
    return 0


def cmd_contention(a) -> int:
    _need(1 <= a.n <= 4, "need 1 <= n <= 4")
    runs = sorted(enumerate_runs(range(1, a.n + 1), 2), key=lambda r: r.key())
    ks = range(1, a.n + 1)
    records = [facet_record(r, i, ks) for i, r in enumerate(runs)]
    if a.k is not None:
        records = [r for r in records if r["inRk"][str(a.k)]]
    _emit(_dump({"command": "contention", "n": a.n, "k": a.k, "facets": records}), a.output)
    return 0


def cmd_leaders(a) -> int:
    _need(1 <= a.n <= 4, "need 1 <= n <= 4")
    ks = [a.k] if a.k is not None else list(range(1, a.n + 1))
    _need(all(1 <= k <= a.n for k in ks), "need 1 <= k <= n")
    out = []
    failures = []
    for k in ks:
        bad = leader_failures(a.n, k)
        out.append({"k": k, "holds": not bad, "failures": len(bad)})
        failures += [{"k": k, "run": r.to_json(), "undecided": sorted(u), "detail": d} for r, u, d in bad]
    _emit(_dump({"command": "leaders", "n": a.n, "results": out}), a.output)
    if failures:
        _write_cex(a.cex, _dump({"command": "leaders", "n": a.n, "failures": failures}))
        return 1
    return 0


def cmd_connectivity(a) -> int:
    _need(1 <= a.n <= 4 and a.t >= 1, "need 1 <= n <= 4 and t >= 1")
    rep = consensus_obstruction_report(_pattern(a.pattern, a.n), a.t)
    _emit(_dump({"command": "connectivity", "pattern": rep.pattern, "n": rep.n,
                 "rows": [{"t": t, "facets": f, "components": c, "connected": c == 1}
                          for t, f, c in rep.rows],
                 "conclusion": rep.conclusion()}), a.output)
    return 0


def cmd_solve(a) -> int:
    _need(1 <= a.n <= 4 and a.rounds >= 1, "need 1 <= n <= 4 and rounds >= 1")
    if a.task in BUILTINS:
        data = {"n": a.n, "deltaKind": "builtin", "name": a.task, "k": a.k, "outputsDomain": [0, 1]}
    else:
        try:
            with open(a.task, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as e:
            raise UsageError(f"cannot read task file: {e}") from None
    try:
        task = task_from_json(data)
    except ValueError as e:
        raise UsageError(str(e)) from None
    pat = _pattern(a.pattern, task.n)
    res = solvability_search(task, pat, a.rounds)
    decision = None
    if res.decision is not None:
        decision = sorted(([jsonable(k), jsonable(v)] for k, v in res.decision.items()),
                          key=lambda kv: json.dumps(kv, sort_keys=True))
    _emit(_dump({"command": "solve", "task": task.name, "pattern": pat.name, "n": task.n,
                 "maxRounds": a.rounds, "found": res.found, "rounds": res.rounds,
                 "tried": res.tried, "decision": decision}), a.output)
    return 0


# ---------------------------------------------------- k-process simulation

def _verdicts(checks: Sequence[str], prop: Optional[str]) -> dict:
    groups = {"claims": CLAIM_PROPS, "linearize": LIN_PROPS, "progress": PROGRESS_PROPS}
    out = {}
    for name in checks:
        if prop is None:
            out[name] = "holds"
        elif prop in groups[name]:
            out[name] = "violated"
        else:
            out[name] = "not reached"  # exploration stopped at another violation
    return out


def cmd_alg1(a) -> int:
    _need(1 <= a.k <= a.n <= 4 and a.depth >= 1, "need 1 <= k <= n <= 4 and depth >= 1")
    checks = a.check or ["claims", "linearize", "progress"]
    proto = Alg1(a.n, a.k, a.depth, ca=a.ca, variant=a.variant)
    inputs = tuple([0] * a.n)
    head = {"command": "alg1", "n": a.n, "k": a.k, "depth": a.depth, "ca": a.ca,
            "variant": a.variant, "schedule": a.schedule}
    if a.schedule == "exhaustive":
        res = model_check(proto, inputs, compact=a.compact, state_limit=a.state_limit)
        v = res.violation
        report = {**head, "states": res.states, "terminals": res.terminals,
                  "verdicts": _verdicts(checks, v and v.prop)}
        events = tuple(v.path) if v is not None else ()
    else:
        seed = _seed_of(a.schedule, "--schedule")
        head["seed"] = seed
        sched = random_run(Alg1(a.n, a.k, a.depth, ca=a.ca, variant=a.variant, check_monitors=False),
                           inputs, None, seed, a.max_events, fair=a.fair)
        _, trace, v = record(proto, inputs, sched, {**proto.describe(), "inputs": list(inputs),
                                                    "bound": None, "seed": seed})
        report = {**head, "events": len(trace.events), "verdicts": _verdicts(checks, v and v.prop)}
        if v is None and "linearize" in checks:
            lin = linearize_alg1(trace, a.k)
            report["offlineLinearization"] = lin.describe()
            if not lin.ok:
                report["verdicts"]["linearize"] = "violated"
        if "progress" in checks:
            gaps = alg1_progress_gaps(trace, a.k, a.n)
            bound = a.n * (3 * a.k + 2)
            worst = max(gaps["gaps"] + [0])
            report["progress"] = {"maxGap": worst, "bound": bound}
            if a.fair and worst > bound:
                report["verdicts"]["progress"] = "violated"
        if a.trace:
            _emit(trace.to_jsonl(), a.trace)
        events = trace.events
    if v is not None:
        report["violation"] = {"property": v.prop, "detail": v.detail, "events": len(events)}
    _emit(_dump(report), a.output)
    failed = any(x == "violated" for x in report["verdicts"].values())
    if v is not None:
        _, trace, _ = record(proto, inputs, Schedule(tuple(events), None),
                             {**proto.describe(), "inputs": list(inputs), "bound": None,
                              "violation": v.prop})
        _write_cex(a.cex, trace.to_jsonl())
        return 1
    return 1 if failed else 0


# ---------------------------------------------------- simulation inside R_k

def _alg2_config(n: int, k: int, client: str, inputs: Sequence) -> Alg2Config:
    try:
        cl = make_client(client)
    except (OSError, ValueError) as e:
        raise UsageError(f"client: {e}") from None
    return Alg2Config(n, k, cl, tuple(inputs))


def _parse_inputs(spec: Optional[str], n: int) -> tuple:
    if spec is None:
        return tuple(range(1, n + 1))
    vals = [None if x in ("", "-") else int(x) for x in spec.split(",")]
    _need(len(vals) == n, f"--inputs needs {n} comma-separated values ('-' for absent)")
    _need(any(v is not None for v in vals), "at least one process must participate")
    return tuple(vals)


def cmd_alg2(a) -> int:
    _need(1 <= a.k <= a.n <= 4 and a.rounds >= 1, "need 1 <= k <= n <= 4 and rounds >= 1")
    checks = a.check or ["claims", "agreement", "linearize", "progress"]
    if a.stream.startswith("replay:"):
        return _replay_alg2_file(a.stream[7:], a.output)
    cfg = _alg2_config(a.n, a.k, a.client, _parse_inputs(a.inputs, a.n))
    head = {"command": "alg2", "n": a.n, "k": a.k, "client": cfg.client.name,
            "inputs": list(cfg.inputs), "rounds": a.rounds, "stream": a.stream}
    bound = a.n * a.rounds
    if a.stream == "exhaustive":
        worst = [0]
        if "progress" in checks:
            # explore one round past the bound so a process blocked forever shows
            worst[0] = exhaustive_progress(cfg, bound + 1)["maxWait"]
        res = exhaustive_streams(cfg, a.rounds)
        v = res.violation
        report = {**head, "statesPerRound": res.states_per_round, "terminals": res.terminals,
                  "distinctOutputs": len(res.outputs)}
        stream = res.stream
    else:
        seed = _seed_of(a.stream, "--stream")
        head["seed"] = seed
        out = simulate_in_rkstar(cfg, seeded_stream(cfg, seed), a.rounds,
                                 header={"protocol": "alg2", "n": cfg.n, "k": cfg.k,
                                         "client": cfg.client.name, "inputs": jsonable(list(cfg.inputs)),
                                         "dropDecided": cfg.drop_decided, "seed": seed})
        v = out.violation
        report = {**head, "outputs": jsonable(out.outputs())}
        if a.trace:
            _emit(out.trace.to_jsonl(), a.trace)
        stream = out.trace.runs()
        if v is None and "linearize" in checks:
            lin = alg2_snapshot_linearization(out.trace)
            report["offlineLinearization"] = "legal" if lin.ok else jsonable(lin.counterexample)
            if not lin.ok:
                v = _Bad("linearize", str(lin.counterexample))
        worst = [0]
        if "progress" in checks:
            g = progress_gaps(Alg2Config(cfg.n, cfg.k, cfg.client, cfg.inputs, check=False), stream)
            worst[0] = max(g["waits"] + [0])
    verdicts = {}
    groups = {"claims": {"claim1", "claim2", "claim3", "claim4", "claim5", "leader-progress"},
              "agreement": {"agreement", "validity", "agreement-validity"},
              "linearize": {"linearize"}}
    for name in checks:
        if name == "progress":
            verdicts[name] = "holds" if worst[0] <= bound else "violated"
            report["progress"] = {"maxWait": worst[0], "bound": bound}
        elif v is None:
            verdicts[name] = "holds"
        else:
            verdicts[name] = "violated" if v.prop in groups[name] or v.prop.startswith(name) else "not reached"
    report["verdicts"] = verdicts
    if v is not None:
        report["violation"] = {"property": v.prop, "detail": v.detail}
    _emit(_dump(report), a.output)
    if v is not None:
        res = simulate_in_rkstar(cfg, stream or [], None,
                                 header={"protocol": "alg2", "n": cfg.n, "k": cfg.k,
                                         "client": cfg.client.name, "inputs": jsonable(list(cfg.inputs)),
                                         "dropDecided": cfg.drop_decided, "violation": v.prop})
        _write_cex(a.cex, res.trace.to_jsonl())
        return 1
    return 1 if "violated" in verdicts.values() else 0


class _Bad:
    def __init__(self, prop: str, detail: str):
        self.prop, self.detail = prop, detail


def _replay_alg2_file(path: str, output: Optional[str]) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            trace = Alg2Trace.parse(fh.read())
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot read trace: {e}") from None
    h = trace.header
    cfg = Alg2Config(h["n"], h["k"], make_client(h["client"]), tuple(h["inputs"]),
                     drop_decided=h.get("dropDecided", False))
    res = simulate_in_rkstar(cfg, trace.runs(), header=h)
    mismatch = replay_alg2(cfg, trace)
    v = res.violation
    report = {"command": "replay", "protocol": "alg2", "rounds": len(trace.rounds),
              "digestsMatch": mismatch is None, "firstMismatch": mismatch,
              "recordedViolation": h.get("violation"),
              "violation": None if v is None else {"property": v.prop, "detail": v.detail}}
    report["reproduced"] = v is not None and v.prop == h.get("violation")
    _emit(_dump(report), output)
    return 0 if v is None and mismatch is None and not h.get("violation") else 1


def cmd_replay(a) -> int:
    try:
        with open(a.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {a.file}: {e}") from None
    first = text.split("\n", 1)[0]
    try:
        head = json.loads(first)
    except ValueError:
        raise UsageError("not a trace file") from None
    if "header" not in head:
        return _replay_alg2_file(a.file, a.output)
    header, recorded = Trace.parse(text)
    if header.get("protocol") != "alg1":
        raise UsageError(f"replay supports alg1 and alg2 traces, not {header.get('protocol')!r}")
    proto = Alg1(header["n"], header["k"], header["rounds"], ca=header["ca"], variant=header["variant"])
    events = [ev for ev, _ in recorded]
    _, trace, v = record(proto, tuple(header["inputs"]), Schedule(tuple(events), header.get("bound")),
                         header)
    mismatch = None
    for i, ((_, want), got) in enumerate(zip(recorded, trace.digests)):
        if want != got:
            mismatch = i
            break
    if mismatch is None and len(trace.digests) != len(recorded):
        mismatch = min(len(trace.digests), len(recorded))
    report = {"command": "replay", "protocol": "alg1", "events": len(recorded),
              "digestsMatch": mismatch is None, "firstMismatch": mismatch,
              "recordedViolation": header.get("violation"),
              "violation": None if v is None else {"property": v.prop, "detail": v.detail},
              "reproduced": v is not None and v.prop == header.get("violation")}
    _emit(_dump(report), a.output)
    return 0 if v is None and mismatch is None and not header.get("violation") else 1


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rkaffine", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, cex: bool = False):
        sp.add_argument("--output", "-o", help="write the result here instead of stdout")
        if cex:
            sp.add_argument("--cex", default="counterexample.jsonl",
                            help="counterexample file written on a violation")

    s = sub.add_parser("chr", help="iterated chromatic subdivision")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--out", choices=("json", "svg"), default="json")
    s.add_argument("--scale", type=int, default=400)
    common(s)

    s = sub.add_parser("rk", help="the R_k complex")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", choices=("json", "svg"), default="json")
    s.add_argument("--scale", type=int, default=400)
    common(s)

    s = sub.add_parser("contention", help="per-facet contention records of Chr^2")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, help="only facets of R_k")
    common(s)

    s = sub.add_parser("leaders", help="check the leader rule on every R_k facet")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int)
    common(s, cex=True)

    s = sub.add_parser("connectivity", help="connectivity of an iterated affine pattern")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--pattern", default="ordered", help="ordered | rk:K | ktas:K")
    s.add_argument("--t", type=int, default=3)
    common(s)

    s = sub.add_parser("solve", help="search for a decision map over an iterated pattern")
    s.add_argument("--task", required=True, help=f"JSON task file or one of {sorted(BUILTINS)}")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--k", type=int, default=1, help="k for the builtin kset task")
    s.add_argument("--pattern", default="ordered", help="ordered | rk:K | ktas:K")
    s.add_argument("--rounds", type=int, default=1, help="largest number of iterations to try")
    common(s)

    s = sub.add_parser("alg1", help="check the k-process simulation")
    s.add_argument("--n", type=int, required=True, help="simulators")
    s.add_argument("--k", type=int, required=True, help="simulated slots")
    s.add_argument("--depth", type=int, default=3, help="simulation rounds")
    s.add_argument("--schedule", default="exhaustive", help="exhaustive | seed:<u64>")
    s.add_argument("--check", action="append", choices=("claims", "linearize", "progress"))
    s.add_argument("--ca", choices=("oracle", "rw"), default="oracle")
    s.add_argument("--variant", choices=("literal", "guarded"), default="literal")
    s.add_argument("--fair", action="store_true", help="round-robin seeded schedule")
    s.add_argument("--max-events", type=int, default=5000)
    s.add_argument("--compact", action="store_true", help="hash-compacted visited set")
    s.add_argument("--state-limit", type=int)
    s.add_argument("--trace", help="write the run's trace (seeded schedules)")
    common(s, cex=True)

    s = sub.add_parser("alg2", help="check the R_k* simulation")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--client", default="kset", help="kset | consensus | echo | file:<path>")
    s.add_argument("--stream", default="exhaustive", help="exhaustive | seed:<u64> | replay:<path>")
    s.add_argument("--rounds", type=int, default=6)
    s.add_argument("--inputs", help="comma-separated inputs, '-' for a non-participant")
    s.add_argument("--check", action="append", choices=("claims", "agreement", "linearize", "progress"))
    s.add_argument("--trace", help="write the run's trace (seeded streams)")
    common(s, cex=True)

    s = sub.add_parser("replay", help="replay a trace or counterexample file")
    s.add_argument("file")
    common(s)
    return p


COMMANDS = {"chr": cmd_chr, "rk": cmd_rk, "contention": cmd_contention, "leaders": cmd_leaders,
            "connectivity": cmd_connectivity, "solve": cmd_solve, "alg1": cmd_alg1,
            "alg2": cmd_alg2, "replay": cmd_replay}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[a.command](a)
    except (UsageError, BudgetExceeded) as e:
        print(f"rkaffine {a.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
