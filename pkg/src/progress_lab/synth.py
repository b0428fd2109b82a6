"""Bounded exhaustive enumeration of progress litmus tests.

A candidate assigns every thread a program within the instruction
budget; the budget is the total across threads and every composition
with at least one instruction per thread is explored.  A candidate is
kept when termination is reachable from every state, at least one
nontermination cycle exists, every branch can go both ways, and some
branch decision depends on a value written by another thread.
Comparisons guarded to fall through either way are fixed to compare
against 0, which prunes the space syntactically before any state
exploration happens.

The checker works on integer-packed states (memory digits plus one
program counter per thread), so the full default spaces (a few million
candidates) enumerate in minutes on one core.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .axb import AxbInstruction, LitmusTest, enabled_threads, step
from .litmus_io import parse_litmus, serialize_body
from .lts import Lts, build_plain_lts

# Rejection counters, in the order the checks run.
REJECT_REASONS = (
    "no_nontermination_cycle",
    "no_cross_thread_influence",
    "end_unreachable",
    "branch_outcome_missing",
    "end_not_reachable_everywhere",
    "lts_bounds_exceeded",
)


@dataclass(frozen=True, slots=True)
class SynthConfig:
    num_threads: int
    total_instructions: int
    num_locations: int = 2
    value_domain: int = 2
    max_states: int | None = None
    max_actions: int | None = None
    symmetry_reduction: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.num_threads < 2:
            raise ValueError("need at least 2 threads")
        if self.total_instructions < self.num_threads:
            raise ValueError("need at least one instruction per thread")
        if self.num_locations < 1 or self.value_domain < 1:
            raise ValueError("need at least one location and one value")
        for cap in (self.max_states, self.max_actions):
            if cap is not None and cap < 1:
                raise ValueError("pruning bounds must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")


@dataclass(frozen=True, slots=True)
class SynthStats:
    candidates: int
    rejected: dict[str, int]
    duplicates: int
    unique: int
    elapsed_seconds: float

    def to_json_dict(self) -> dict:
        return {
            "candidates": self.candidates,
            "rejected": {k: self.rejected.get(k, 0) for k in REJECT_REASONS},
            "duplicates": self.duplicates,
            "unique": self.unique,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }


@dataclass(frozen=True, slots=True)
class SynthResult:
    tests: tuple[LitmusTest, ...]
    lts_sizes: tuple[tuple[int, int], ...]  # (states, actions) per test
    stats: SynthStats


def compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All ordered splits of `total` into `parts` positive summands."""
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def _instruction_options(
    thread_len: int, idx: int, num_locations: int, value_domain: int
) -> tuple[tuple[int, int, int, int], ...]:
    # exch -1 encodes "no exchange"; fall-through jumps force cmp 0.
    opts = []
    for loc in range(num_locations):
        for jump in range(thread_len + 1):
            cmps = (0,) if jump == idx + 1 else tuple(range(value_domain))
            for cmp_ in cmps:
                for exch in range(-1, value_domain):
                    opts.append((loc, cmp_, jump, exch))
    return tuple(opts)


def _thread_programs(thread_len: int, num_locations: int, value_domain: int):
    per_idx = [
        _instruction_options(thread_len, i, num_locations, value_domain)
        for i in range(thread_len)
    ]
    return [tuple(p) for p in itertools.product(*per_idx)]


def _program_props(program) -> tuple[bool, int, int]:
    """(can ever revisit a pc, branch-location mask, write-location mask)."""
    has_back = False
    branch_locs = 0
    write_locs = 0
    for i, (loc, _cmp, jump, exch) in enumerate(program):
        if jump <= i:
            has_back = True
        if jump != i + 1:
            branch_locs |= 1 << loc
        if exch >= 0:
            write_locs |= 1 << loc
    return has_back, branch_locs, write_locs


def _check_candidate(
    progs,
    num_locations: int,
    value_domain: int,
    max_states: int | None,
    max_actions: int | None,
) -> tuple[str | None, int, int]:
    """Full semantic check of one candidate.

    Returns (rejection reason or None, plain-LTS states, plain-LTS actions).
    """
    n = len(progs)
    lens = [len(p) for p in progs]
    v = value_domain
    vl = v**num_locations
    pow_loc = [v**l for l in range(num_locations)]
    mult = []
    acc = 1
    for t in range(n):
        mult.append(acc)
        acc *= lens[t] + 1

    real_branch: dict[tuple[int, int], int] = {}
    for t in range(n):
        for i, ins in enumerate(progs[t]):
            if ins[2] != i + 1:
                real_branch[(t, i)] = 0

    seen = {0}
    stack = [0]
    edges: list[tuple[int, int]] = []
    ends = []
    while stack:
        s = stack.pop()
        mem = s % vl
        code = s // vl
        done = True
        for t in range(n):
            pc = (code // mult[t]) % (lens[t] + 1)
            if pc >= lens[t]:
                continue
            done = False
            loc, cmp_, jump, exch = progs[t][pc]
            pw = pow_loc[loc]
            cur = (mem // pw) % v
            taken = cur == cmp_
            npc = jump if taken else pc + 1
            nmem = mem if exch < 0 or exch == cur else mem + (exch - cur) * pw
            ns = nmem + vl * (code + (npc - pc) * mult[t])
            edges.append((s, ns))
            if ns not in seen:
                seen.add(ns)
                stack.append(ns)
            key = (t, pc)
            if key in real_branch:
                real_branch[key] |= 1 if taken else 2
        if done:
            ends.append(s)
    n_states = len(seen)
    n_actions = len(edges)

    if not ends:
        return "end_unreachable", n_states, n_actions
    for bits in real_branch.values():
        if bits != 3:
            return "branch_outcome_missing", n_states, n_actions

    rev: dict[int, list[int]] = {}
    for src, dst in edges:
        rev.setdefault(dst, []).append(src)
    reach = set(ends)
    bq = list(ends)
    while bq:
        x = bq.pop()
        for p in rev.get(x, ()):
            if p not in reach:
                reach.add(p)
                bq.append(p)
    if len(reach) != n_states:
        return "end_not_reachable_everywhere", n_states, n_actions

    # Acyclic iff the whole graph peels off at indegree zero.
    indeg = dict.fromkeys(seen, 0)
    out: dict[int, list[int]] = {}
    for src, dst in edges:
        indeg[dst] += 1
        out.setdefault(src, []).append(dst)
    peel = [x for x, d in indeg.items() if d == 0]
    removed = 0
    while peel:
        x = peel.pop()
        removed += 1
        for y in out.get(x, ()):
            indeg[y] -= 1
            if indeg[y] == 0:
                peel.append(y)
    if removed == n_states:
        return "no_nontermination_cycle", n_states, n_actions

    if max_states is not None and n_states > max_states:
        return "lts_bounds_exceeded", n_states, n_actions
    if max_actions is not None and n_actions > max_actions:
        return "lts_bounds_exceeded", n_states, n_actions

    # Influence: track the last writer of every location (-1 = initial
    # value) and look for a branch whose input another thread wrote.
    tb = n + 1
    tpow = [tb**l for l in range(num_locations)]
    needed = set(real_branch)
    aseen = {(0, 0)}
    astack = [(0, 0)]
    while astack:
        s, tc = astack.pop()
        mem = s % vl
        code = s // vl
        for t in range(n):
            pc = (code // mult[t]) % (lens[t] + 1)
            if pc >= lens[t]:
                continue
            loc, cmp_, jump, exch = progs[t][pc]
            pw = pow_loc[loc]
            cur = (mem // pw) % v
            if (t, pc) in needed:
                tag = (tc // tpow[loc]) % tb - 1
                if tag >= 0 and tag != t:
                    return None, n_states, n_actions
            taken = cur == cmp_
            npc = jump if taken else pc + 1
            nmem = mem if exch < 0 or exch == cur else mem + (exch - cur) * pw
            if exch < 0:
                ntc = tc
            else:
                ntc = tc + (t + 1 - (tc // tpow[loc]) % tb) * tpow[loc]
            a = (nmem + vl * (code + (npc - pc) * mult[t]), ntc)
            if a not in aseen:
                aseen.add(a)
                astack.append(a)
    return "no_cross_thread_influence", n_states, n_actions


def _relabel_locations(threads, perm) -> tuple[tuple[AxbInstruction, ...], ...]:
    return tuple(
        tuple(
            AxbInstruction(perm[ins.loc], ins.cmp, ins.jump, ins.exch)
            for ins in thread
        )
        for thread in threads
    )


def canonicalize(test: LitmusTest, symmetry_reduction: bool = False) -> str:
    """Canonical body text; the name never participates.

    With symmetry reduction the minimum over all location relabelings is
    taken, so location-swapped twins collapse.
    """
    best = serialize_body(test.threads, test.num_locations, test.value_domain)
    if symmetry_reduction:
        for perm in itertools.permutations(range(test.num_locations)):
            body = serialize_body(
                _relabel_locations(test.threads, perm),
                test.num_locations,
                test.value_domain,
            )
            if body < best:
                best = body
    return best


def influence_holds(test: LitmusTest, plain_lts: Lts | None = None) -> bool:
    """Does some branch read a value last written by a different thread?

    Branch outcomes are collected from the plain LTS (built on demand);
    last-writer tags need their own exploration since they are not a
    function of machine states.
    """
    if plain_lts is None:
        plain_lts = build_plain_lts(test)
    cover: dict[tuple[int, int], int] = {}
    for t, thread in enumerate(test.threads):
        for i, ins in enumerate(thread):
            if ins.jump != i + 1:
                cover[(t, i)] = 0
    if not cover:
        return False
    for tr in plain_lts.transitions:
        src = plain_lts.machine(tr.src)
        key = (tr.tid, src.pcs[tr.tid])
        if key in cover:
            taken = src.memory[tr.instr.loc] == tr.instr.cmp
            cover[key] |= 1 if taken else 2
    candidates = {k for k, bits in cover.items() if bits == 3}
    if not candidates:
        return False

    init_tags = (-1,) * test.num_locations
    start = (test.initial_state(), init_tags)
    aseen = {start}
    astack = [start]
    while astack:
        machine, tags = astack.pop()
        for tid in enabled_threads(test, machine):
            pc = machine.pcs[tid]
            ins = test.threads[tid][pc]
            if (tid, pc) in candidates:
                writer = tags[ins.loc]
                if writer >= 0 and writer != tid:
                    return True
            nxt = step(test, machine, tid)
            ntags = tags
            if ins.exch is not None:
                ntags = tags[: ins.loc] + (tid,) + tags[ins.loc + 1 :]
            a = (nxt, ntags)
            if a not in aseen:
                aseen.add(a)
                astack.append(a)
    return False


def _span_worker(args):
    """Check every candidate whose first-thread program falls in a slice.

    Returns (candidate count, rejection counters, {canonical body:
    (states, actions)}, local duplicate count).
    """
    config, comp, lo, hi = args
    nl, vd = config.num_locations, config.value_domain
    programs = {p: _thread_programs(p, nl, vd) for p in set(comp)}
    props = {p: [_program_props(prog) for prog in programs[p]] for p in set(comp)}
    perms = (
        tuple(itertools.permutations(range(nl)))
        if config.symmetry_reduction
        else (tuple(range(nl)),)
    )

    rejected = dict.fromkeys(REJECT_REASONS, 0)
    accepted: dict[str, tuple[int, int]] = {}
    dup = 0
    candidates = 0
    rest_pairs = [list(zip(programs[p], props[p])) for p in comp[1:]]
    first_pairs = list(zip(programs[comp[0]], props[comp[0]]))[lo:hi]
    n = len(comp)

    for prog0, p0 in first_pairs:
        for rest in itertools.product(*rest_pairs):
            candidates += 1
            progs = (prog0,) + tuple(r[0] for r in rest)
            prop = (p0,) + tuple(r[1] for r in rest)
            if not any(pr[0] for pr in prop):
                rejected["no_nontermination_cycle"] += 1
                continue
            influence_possible = False
            for j in range(n):
                others = 0
                for k in range(n):
                    if k != j:
                        others |= prop[k][2]
                if prop[j][1] & others:
                    influence_possible = True
                    break
            if not influence_possible:
                rejected["no_cross_thread_influence"] += 1
                continue
            reason, n_states, n_actions = _check_candidate(
                progs, nl, vd, config.max_states, config.max_actions
            )
            if reason is not None:
                rejected[reason] += 1
                continue
            threads = tuple(
                tuple(
                    AxbInstruction(loc, cmp_, jump, None if exch < 0 else exch)
                    for (loc, cmp_, jump, exch) in prog
                )
                for prog in progs
            )
            body = min(
                serialize_body(_relabel_locations(threads, perm), nl, vd)
                for perm in perms
            )
            if body in accepted:
                dup += 1
            else:
                accepted[body] = (n_states, n_actions)
    return candidates, rejected, accepted, dup


def synthesize(config: SynthConfig) -> SynthResult:
    """Enumerate, filter, and deduplicate the whole bounded space."""
    t0 = time.perf_counter()
    comps = compositions(config.total_instructions, config.num_threads)

    tasks = []
    for comp in comps:
        total_first = len(
            _thread_programs(comp[0], config.num_locations, config.value_domain)
        )
        if config.jobs == 1:
            tasks.append((config, comp, 0, total_first))
        else:
            span = max(1, -(-total_first // (config.jobs * 4)))
            for lo in range(0, total_first, span):
                tasks.append((config, comp, lo, min(lo + span, total_first)))

    if config.jobs == 1:
        outcomes = [_span_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_span_worker, tasks))

    candidates = 0
    rejected = dict.fromkeys(REJECT_REASONS, 0)
    merged: dict[str, tuple[int, int]] = {}
    duplicates = 0
    for cand, rej, accepted, dup in outcomes:
        candidates += cand
        duplicates += dup
        for k, c in rej.items():
            rejected[k] += c
        for body, size in accepted.items():
            if body in merged:
                duplicates += 1
            else:
                merged[body] = size

    bodies = sorted(merged)
    width = max(3, len(str(max(len(bodies) - 1, 0))))
    tests = []
    sizes = []
    for i, body in enumerate(bodies):
        tests.append(parse_litmus(f"test t{i:0{width}d}\n{body}"))
        sizes.append(merged[body])
    stats = SynthStats(
        candidates=candidates,
        rejected=rejected,
        duplicates=duplicates,
        unique=len(tests),
        elapsed_seconds=time.perf_counter() - t0,
    )
    return SynthResult(tuple(tests), tuple(sizes), stats)
