"""Labeled transition systems over litmus tests.

Two constructions share one representation.  The plain LTS explores
machine states only.  The monitored LTS pairs each machine state with
scheduler facts and labels every transition with the fair set computed
from the *source* state's facts, i.e. the guarantee in force before the
step.  Termination is folded into the completing step (the target
state's facts already record it), so there are no separate termination
transitions; cycles therefore never contain one, and the oracle treats
terminations as freely available along escape paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .axb import (
    LitmusTest,
    MachineState,
    enabled_threads,
    is_end_state,
    step,
)
from .axb import AxbInstruction
from .models import ProgressModel, SchedulerFacts, fair_set

DEFAULT_MAX_STATES = 10**6


class ExplorationLimitError(RuntimeError):
    """Raised when exploration exceeds the configured state budget."""


@dataclass(frozen=True, slots=True)
class MonitoredState:
    machine: MachineState
    facts: SchedulerFacts


@dataclass(frozen=True, slots=True)
class Transition:
    """One step: thread `tid` runs `instr`, moving state `src` to `dst`.

    `fair_before` is the fair set of the source state under the LTS's
    model; None on plain LTSs, which carry no fairness information.
    """

    src: int
    dst: int
    tid: int
    instr: AxbInstruction
    fair_before: frozenset[int] | None


class Lts:
    """Reachable states (index 0 = initial) plus labeled transitions.

    States are `MachineState` for plain LTSs and `MonitoredState` for
    monitored ones.  State numbering is breadth-first discovery order
    with threads explored in ascending id, so it is deterministic.
    """

    def __init__(
        self,
        test: LitmusTest,
        model: ProgressModel | None,
        states: list,
        transitions: list[Transition],
        end_states: list[int],
    ):
        self.test = test
        self.model = model
        self.states = states
        self.transitions = transitions
        self.end_states = end_states
        self.initial = 0
        self.out: list[list[int]] = [[] for _ in states]
        for idx, tr in enumerate(transitions):
            self.out[tr.src].append(idx)

    @property
    def is_monitored(self) -> bool:
        return self.model is not None

    def machine(self, state_id: int) -> MachineState:
        s = self.states[state_id]
        return s.machine if isinstance(s, MonitoredState) else s

    def facts(self, state_id: int) -> SchedulerFacts | None:
        s = self.states[state_id]
        return s.facts if isinstance(s, MonitoredState) else None

    def fair_at(self, state_id: int) -> frozenset[int] | None:
        facts = self.facts(state_id)
        return None if facts is None else fair_set(self.model, facts)

    def __len__(self) -> int:
        return len(self.states)

    def to_dot(self) -> str:
        lines = ["digraph lts {", "  rankdir=LR;"]
        ends = set(self.end_states)
        for idx in range(len(self.states)):
            m = self.machine(idx)
            label = f"s{idx}\\nmem={','.join(map(str, m.memory))}\\npc={','.join(map(str, m.pcs))}"
            facts = self.facts(idx)
            if facts is not None:
                label += f"\\nstepped={{{','.join(map(str, sorted(facts.stepped)))}}}"
            shape = "doublecircle" if idx in ends else "circle"
            lines.append(f'  s{idx} [shape={shape}, label="{label}"];')
        for tr in self.transitions:
            if tr.fair_before is None:
                label = f"T{tr.tid}"
            else:
                label = f"T{tr.tid}:{{{','.join(map(str, sorted(tr.fair_before)))}}}"
            lines.append(f'  s{tr.src} -> s{tr.dst} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        states = []
        for idx in range(len(self.states)):
            m = self.machine(idx)
            entry: dict = {"memory": list(m.memory), "pcs": list(m.pcs)}
            facts = self.facts(idx)
            if facts is not None:
                entry["stepped"] = sorted(facts.stepped)
                entry["terminated"] = sorted(facts.terminated)
            states.append(entry)
        transitions = []
        for tr in self.transitions:
            ins = tr.instr
            transitions.append(
                {
                    "src": tr.src,
                    "dst": tr.dst,
                    "tid": tr.tid,
                    "instr": {
                        "loc": ins.loc,
                        "cmp": ins.cmp,
                        "jump": ins.jump,
                        "exch": ins.exch,
                    },
                    "fair": None if tr.fair_before is None else sorted(tr.fair_before),
                }
            )
        return {
            "test": self.test.name,
            "model": None if self.model is None else self.model.value,
            "initial": self.initial,
            "states": states,
            "transitions": transitions,
            "end_states": list(self.end_states),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def build_plain_lts(test: LitmusTest, max_states: int = DEFAULT_MAX_STATES) -> Lts:
    """Breadth-first closure of `step` over all enabled threads."""
    initial = test.initial_state()
    index: dict[MachineState, int] = {initial: 0}
    states: list[MachineState] = [initial]
    transitions: list[Transition] = []
    end_states: list[int] = []
    frontier = 0
    while frontier < len(states):
        src = frontier
        frontier += 1
        state = states[src]
        enabled = enabled_threads(test, state)
        if not enabled:
            # Always-enabled semantics: only full termination disables a test.
            assert is_end_state(test, state)
            end_states.append(src)
            continue
        for tid in enabled:
            succ = step(test, state, tid)
            dst = index.get(succ)
            if dst is None:
                if len(states) >= max_states:
                    raise ExplorationLimitError(
                        f"plain LTS of {test.name!r} exceeds {max_states} states"
                    )
                dst = len(states)
                index[succ] = dst
                states.append(succ)
            transitions.append(
                Transition(src, dst, tid, test.threads[tid][state.pcs[tid]], None)
            )
    return Lts(test, None, states, transitions, end_states)


def build_monitored_lts(
    test: LitmusTest, model: ProgressModel, max_states: int = DEFAULT_MAX_STATES
) -> Lts:
    """Plain exploration augmented with scheduler facts and F labels.

    The dedup key includes the stepped set: the fair set must be a
    function of the state, and two histories reaching the same machine
    state with different stepped sets carry different guarantees.
    """
    n = test.num_threads
    lengths = tuple(len(p) for p in test.threads)
    initial = MonitoredState(
        test.initial_state(), SchedulerFacts(frozenset(), frozenset(), n)
    )
    index: dict[tuple[MachineState, frozenset[int]], int] = {
        (initial.machine, initial.facts.stepped): 0
    }
    states: list[MonitoredState] = [initial]
    transitions: list[Transition] = []
    end_states: list[int] = []
    frontier = 0
    while frontier < len(states):
        src = frontier
        frontier += 1
        mon = states[src]
        enabled = enabled_threads(test, mon.machine)
        if not enabled:
            end_states.append(src)
            continue
        fair_before = fair_set(model, mon.facts)
        for tid in enabled:
            machine = step(test, mon.machine, tid)
            stepped = mon.facts.stepped | {tid}
            # Only tid's pc moved, so only tid can newly terminate.
            if machine.pcs[tid] >= lengths[tid]:
                terminated = mon.facts.terminated | {tid}
            else:
                terminated = mon.facts.terminated
            key = (machine, stepped)
            dst = index.get(key)
            if dst is None:
                if len(states) >= max_states:
                    raise ExplorationLimitError(
                        f"monitored LTS of {test.name!r} exceeds {max_states} states"
                    )
                dst = len(states)
                index[key] = dst
                states.append(
                    MonitoredState(machine, SchedulerFacts(stepped, terminated, n))
                )
            transitions.append(
                Transition(
                    src, dst, tid, test.threads[tid][mon.machine.pcs[tid]], fair_before
                )
            )
    return Lts(test, model, states, transitions, end_states)


@dataclass(frozen=True, slots=True)
class Scc:
    """One strongly connected component of an LTS.

    `internal` lists indices of transitions with both endpoints in the
    component; `stepping` is the set of thread ids on those transitions.
    A component is nontrivial when it can be looped in: two or more
    states, or a single state with a self-loop.
    """

    members: tuple[int, ...]
    internal: tuple[int, ...]
    stepping: frozenset[int]
    nontrivial: bool


def scc_decompose(lts: Lts) -> list[Scc]:
    """Tarjan's algorithm, iterative to cope with deep spin chains.

    Components are returned sorted by smallest member id, so the order
    is deterministic and independent of traversal details.
    """
    n = len(lts.states)
    index_of = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp_of = [-1] * n
    comp_count = 0
    counter = 0
    for root in range(n):
        if index_of[root] != -1:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            node, edge_pos = work[-1]
            if edge_pos == 0:
                index_of[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            out = lts.out[node]
            while edge_pos < len(out):
                succ = lts.transitions[out[edge_pos]].dst
                edge_pos += 1
                if index_of[succ] == -1:
                    work[-1] = (node, edge_pos)
                    work.append((succ, 0))
                    advanced = True
                    break
                if on_stack[succ]:
                    low[node] = min(low[node], index_of[succ])
            if advanced:
                continue
            work.pop()
            if low[node] == index_of[node]:
                while True:
                    member = stack.pop()
                    on_stack[member] = False
                    comp_of[member] = comp_count
                    if member == node:
                        break
                comp_count += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    members: list[list[int]] = [[] for _ in range(comp_count)]
    for node in range(n):
        members[comp_of[node]].append(node)
    internal: list[list[int]] = [[] for _ in range(comp_count)]
    for idx, tr in enumerate(lts.transitions):
        if comp_of[tr.src] == comp_of[tr.dst]:
            internal[comp_of[tr.src]].append(idx)
    sccs = [
        Scc(
            tuple(sorted(members[c])),
            tuple(internal[c]),
            frozenset(lts.transitions[i].tid for i in internal[c]),
            len(members[c]) > 1 or bool(internal[c]),
        )
        for c in range(comp_count)
    ]
    sccs.sort(key=lambda s: s.members[0])
    return sccs
