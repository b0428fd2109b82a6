"""Termination verdicts for litmus tests under progress models.

The weak check asks whether a scheduler obeying the model's guarantees
can still run forever: it fails exactly when some reachable nontrivial
SCC of the monitored LTS has a stepping-thread set covering the fair
set in force there.  Fair sets are constant within an SCC (facts only
grow along transitions), and any covering edge multiset inside one SCC
can be arranged into a single closed walk, so the SCC condition is
equivalent to the existence of a cycle in which every guaranteed
thread steps.  An empty fair set is treated as vacuously covered.

The strong check asks whether from every reachable state the
guaranteed threads alone can finish the test: a state is good when it
is an end state, when its fair set is empty (some thread will still be
scheduled, but none is owed fairness, so the obligation discharges),
or when a fair step leads to a good state.  It passes when every
reachable state is good.  A weak pass implies a strong pass.

The unfair model has a single collapsed verdict: with no guarantees at
all, only an acyclic state space terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .axb import AxbInstruction, LitmusTest, MachineState
from .lts import DEFAULT_MAX_STATES, Lts, Scc, build_monitored_lts, build_plain_lts, scc_decompose
from .models import (
    Fairness,
    ModelVariant,
    ProgressModel,
    all_model_variants,
    variant_token,
)


class WitnessKind(str, Enum):
    CYCLE = "starvation-or-livelock-cycle"
    STUCK = "stuck-state"


@dataclass(frozen=True, slots=True)
class WitnessStep:
    """One replayable transition: thread `tid` ran the instruction at `pc`."""

    tid: int
    pc: int
    instr: AxbInstruction
    fair_before: frozenset[int]


@dataclass(frozen=True, slots=True)
class Witness:
    """Counterexample evidence for a failed verdict.

    For CYCLE: `path` leads from the initial state to the cycle's entry
    and `cycle` is a closed walk from there in which every thread of the
    violated fair set steps.  For STUCK: `path` leads to a state from
    which no fair path reaches termination; `cycle` is empty.
    """

    kind: WitnessKind
    path: tuple[WitnessStep, ...]
    cycle: tuple[WitnessStep, ...] = ()
    stuck_machine: MachineState | None = None
    stuck_fair: frozenset[int] | None = None


@dataclass(frozen=True, slots=True)
class Verdict:
    passed: bool
    witness: Witness | None = None

    def __post_init__(self) -> None:
        if not self.passed and self.witness is None:
            raise ValueError("a fail verdict must carry a witness")

    @property
    def token(self) -> str:
        return "pass" if self.passed else "fail"


def _fair_or_empty(fair: frozenset[int] | None) -> frozenset[int]:
    return frozenset() if fair is None else fair


def _witness_steps(lts: Lts, transition_ids: list[int]) -> tuple[WitnessStep, ...]:
    steps = []
    for idx in transition_ids:
        tr = lts.transitions[idx]
        pc = lts.machine(tr.src).pcs[tr.tid]
        steps.append(WitnessStep(tr.tid, pc, tr.instr, _fair_or_empty(tr.fair_before)))
    return tuple(steps)


def _shortest_path(
    lts: Lts, start: int, targets: frozenset[int] | set[int]
) -> list[int]:
    """Transition-id path from `start` to the nearest target (BFS)."""
    if start in targets:
        return []
    back: dict[int, int] = {start: -1}
    queue = [start]
    qi = 0
    while qi < len(queue):
        node = queue[qi]
        qi += 1
        for tidx in lts.out[node]:
            dst = lts.transitions[tidx].dst
            if dst in back:
                continue
            back[dst] = tidx
            if dst in targets:
                path: list[int] = []
                cur = dst
                while cur != start:
                    tidx = back[cur]
                    path.append(tidx)
                    cur = lts.transitions[tidx].src
                path.reverse()
                return path
            queue.append(dst)
    raise ValueError("target states are unreachable")


def _path_to_edge_by_tid(
    lts: Lts, start: int, tid: int, internal_out: dict[int, list[int]]
) -> tuple[list[int], int]:
    """BFS within an SCC to the nearest internal edge stepped by `tid`.

    Returns the transition path including that edge, plus its endpoint.
    """
    back: dict[int, int] = {start: -1}
    queue = [start]
    qi = 0
    while qi < len(queue):
        node = queue[qi]
        qi += 1
        for tidx in internal_out.get(node, ()):
            tr = lts.transitions[tidx]
            if tr.tid == tid:
                path: list[int] = []
                cur = node
                while cur != start:
                    prev = back[cur]
                    path.append(prev)
                    cur = lts.transitions[prev].src
                path.reverse()
                path.append(tidx)
                return path, tr.dst
        for tidx in internal_out.get(node, ()):
            dst = lts.transitions[tidx].dst
            if dst not in back:
                back[dst] = tidx
                queue.append(dst)
    raise ValueError(f"thread {tid} never steps inside the component")


def _path_within(
    lts: Lts, start: int, goal: int, internal_out: dict[int, list[int]]
) -> list[int]:
    if start == goal:
        return []
    back: dict[int, int] = {start: -1}
    queue = [start]
    qi = 0
    while qi < len(queue):
        node = queue[qi]
        qi += 1
        for tidx in internal_out.get(node, ()):
            dst = lts.transitions[tidx].dst
            if dst in back:
                continue
            back[dst] = tidx
            if dst == goal:
                path: list[int] = []
                cur = goal
                while cur != start:
                    tidx = back[cur]
                    path.append(tidx)
                    cur = lts.transitions[tidx].src
                path.reverse()
                return path
            queue.append(dst)
    raise ValueError("component is not strongly connected")


def _cycle_witness(lts: Lts, scc: Scc, fair: frozenset[int]) -> Witness:
    """Shortest path to the SCC, then a closed walk stepping every F-thread."""
    internal_out: dict[int, list[int]] = {}
    for tidx in scc.internal:
        internal_out.setdefault(lts.transitions[tidx].src, []).append(tidx)
    members = set(scc.members)
    path_ids = _shortest_path(lts, lts.initial, members)
    entry = lts.transitions[path_ids[-1]].dst if path_ids else lts.initial

    cycle_ids: list[int] = []
    cur = entry
    for tid in sorted(fair):
        segment, cur = _path_to_edge_by_tid(lts, cur, tid, internal_out)
        cycle_ids.extend(segment)
    if not cycle_ids:
        # Empty fair set: any nonempty closed walk witnesses the loop.
        first = internal_out[entry][0]
        cycle_ids.append(first)
        cur = lts.transitions[first].dst
    cycle_ids.extend(_path_within(lts, cur, entry, internal_out))
    return Witness(WitnessKind.CYCLE, _witness_steps(lts, path_ids), _witness_steps(lts, cycle_ids))


def _weak_from_lts(lts: Lts) -> Verdict:
    for scc in scc_decompose(lts):
        if not scc.nontrivial:
            continue
        fair = _fair_or_empty(lts.fair_at(scc.members[0]))
        if scc.stepping >= fair:
            return Verdict(False, _cycle_witness(lts, scc, fair))
    return Verdict(True)


def _strong_from_lts(lts: Lts) -> Verdict:
    n = len(lts.states)
    good = [False] * n
    worklist: list[int] = []
    for end in lts.end_states:
        good[end] = True
        worklist.append(end)
    for tr in lts.transitions:
        # A state about to take a step owed to nobody discharges the
        # obligation outright, even though the run continues.
        if tr.fair_before == frozenset() and not good[tr.src]:
            good[tr.src] = True
            worklist.append(tr.src)
    fair_rev: dict[int, list[int]] = {}
    for tr in lts.transitions:
        if tr.fair_before is not None and tr.tid in tr.fair_before:
            fair_rev.setdefault(tr.dst, []).append(tr.src)
    wi = 0
    while wi < len(worklist):
        node = worklist[wi]
        wi += 1
        for pred in fair_rev.get(node, ()):
            if not good[pred]:
                good[pred] = True
                worklist.append(pred)
    if all(good):
        return Verdict(True)
    stuck = good.index(False)
    path_ids = _shortest_path(lts, lts.initial, {stuck})
    witness = Witness(
        WitnessKind.STUCK,
        _witness_steps(lts, path_ids),
        (),
        lts.machine(stuck),
        _fair_or_empty(lts.fair_at(stuck)),
    )
    return Verdict(False, witness)


def check_unfair(test: LitmusTest, max_states: int = DEFAULT_MAX_STATES) -> Verdict:
    """Pass iff the plain LTS is acyclic: no guarantees, so any loop may spin."""
    lts = build_plain_lts(test, max_states)
    for scc in scc_decompose(lts):
        if scc.nontrivial:
            return Verdict(False, _cycle_witness(lts, scc, frozenset()))
    return Verdict(True)


def _require_monitored_model(model: ProgressModel) -> None:
    if model is ProgressModel.UNFAIR:
        raise ValueError("the unfair model has a single verdict; use check_unfair")


def check_weak(
    test: LitmusTest, model: ProgressModel, max_states: int = DEFAULT_MAX_STATES
) -> Verdict:
    _require_monitored_model(model)
    return _weak_from_lts(build_monitored_lts(test, model, max_states))


def check_strong(
    test: LitmusTest, model: ProgressModel, max_states: int = DEFAULT_MAX_STATES
) -> Verdict:
    _require_monitored_model(model)
    return _strong_from_lts(build_monitored_lts(test, model, max_states))


def check_variant(
    test: LitmusTest, variant: ModelVariant, max_states: int = DEFAULT_MAX_STATES
) -> Verdict:
    model, flavor = variant
    if model is ProgressModel.UNFAIR:
        return check_unfair(test, max_states)
    if flavor is Fairness.WEAK:
        return check_weak(test, model, max_states)
    return check_strong(test, model, max_states)


def check_matrix(
    test: LitmusTest,
    include_hsa_obe: bool = True,
    max_states: int = DEFAULT_MAX_STATES,
) -> dict[str, Verdict]:
    """All verdict-producing models at once.

    The monitored LTS of each model is built once and shared by its weak
    and strong checks.
    """
    verdicts: dict[str, Verdict] = {variant_token((ProgressModel.UNFAIR, None)): check_unfair(test, max_states)}
    models = [v[0] for v in all_model_variants(include_hsa_obe) if v[1] is Fairness.WEAK]
    for model in models:
        lts = build_monitored_lts(test, model, max_states)
        verdicts[variant_token((model, Fairness.WEAK))] = _weak_from_lts(lts)
        verdicts[variant_token((model, Fairness.STRONG))] = _strong_from_lts(lts)
    return {variant_token(v): verdicts[variant_token(v)] for v in all_model_variants(include_hsa_obe)}


def format_witness(witness: Witness) -> str:
    """Render a witness one transition per line: `T<tid> pc=<i> F={...}`."""

    def fmt(step: WitnessStep) -> str:
        fair = ",".join(map(str, sorted(step.fair_before)))
        return f"T{step.tid} pc={step.pc} F={{{fair}}}"

    lines = ["# path"]
    lines.extend(fmt(s) for s in witness.path)
    if witness.kind is WitnessKind.CYCLE:
        lines.append("# cycle")
        lines.extend(fmt(s) for s in witness.cycle)
    else:
        m = witness.stuck_machine
        fair = ",".join(map(str, sorted(witness.stuck_fair or frozenset())))
        lines.append(
            f"# stuck state: mem={','.join(map(str, m.memory))} "
            f"pc={','.join(map(str, m.pcs))} F={{{fair}}}"
        )
    return "\n".join(lines) + "\n"
