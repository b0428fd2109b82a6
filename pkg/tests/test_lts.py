"""State-space construction and component decomposition."""

import json

import pytest

from progress_lab.axb import AxbInstruction, LitmusTest
from progress_lab.lts import (
    ExplorationLimitError,
    build_monitored_lts,
    build_plain_lts,
    scc_decompose,
)
from progress_lab.models import ProgressModel, fair_set

I = AxbInstruction

SPIN_FOREVER = LitmusTest("spin", 1, 1, ((I(0, 0, 0),),))


def test_mutex_plain_shape(idioms):
    lts = build_plain_lts(idioms["mutex"])
    assert len(lts.states) == 8
    assert len(lts.transitions) == 10
    assert len(lts.end_states) == 1
    self_loop_states = {tr.src for tr in lts.transitions if tr.src == tr.dst}
    assert len(self_loop_states) == 2


def test_idiom_sizes(idioms):
    from conftest import IDIOM_LTS_SIZES

    for name, (states, actions) in IDIOM_LTS_SIZES.items():
        lts = build_plain_lts(idioms[name])
        assert (len(lts.states), len(lts.transitions)) == (states, actions), name


def test_initial_state_is_index_zero(idioms):
    lts = build_plain_lts(idioms["mutex"])
    assert lts.initial == 0
    assert lts.states[0] == idioms["mutex"].initial_state()


def test_out_edges_index_transitions(idioms):
    lts = build_plain_lts(idioms["dining"])
    for si, edges in enumerate(lts.out):
        for ti in edges:
            assert lts.transitions[ti].src == si


def test_transition_labels_replay(idioms):
    from progress_lab.axb import step

    lts = build_plain_lts(idioms["bidirectional"])
    for tr in lts.transitions:
        assert step(idioms["bidirectional"], lts.states[tr.src], tr.tid) == lts.states[tr.dst]
        assert tr.instr == idioms["bidirectional"].threads[tr.tid][lts.states[tr.src].pcs[tr.tid]]


def test_plain_has_no_fairness_info(idioms):
    lts = build_plain_lts(idioms["mutex"])
    assert not lts.is_monitored
    assert all(tr.fair_before is None for tr in lts.transitions)


def test_monitored_tracks_stepped_and_fair(idioms):
    lts = build_monitored_lts(idioms["mutex"], ProgressModel.OBE)
    assert lts.is_monitored
    assert lts.facts(lts.initial).stepped == frozenset()
    for tr in lts.transitions:
        facts = lts.facts(tr.src)
        assert tr.fair_before == fair_set(ProgressModel.OBE, facts)
        assert lts.facts(tr.dst).stepped == facts.stepped | {tr.tid}


def test_monitored_merges_on_machine_and_stepped(idioms):
    # prodcons-increasing: after both threads stepped once each in either
    # order, machine and stepped coincide, so the states merge
    lts = build_monitored_lts(idioms["prodcons-increasing"], ProgressModel.FAIR)
    keys = {(lts.machine(i), lts.facts(i).stepped) for i in range(len(lts.states))}
    assert len(keys) == len(lts.states)


def test_monitored_is_larger_than_plain(idioms):
    t = idioms["dining"]
    assert len(build_monitored_lts(t, ProgressModel.FAIR).states) > len(
        build_plain_lts(t).states
    )


def test_exploration_limit():
    toggle = LitmusTest("toggle", 1, 2, ((I(0, 0, 0, exch=1),), (I(0, 1, 0, exch=0),)))
    with pytest.raises(ExplorationLimitError):
        build_plain_lts(toggle, max_states=1)
    # a space that fits the cap exactly is fine; the limit counts states,
    # not transitions
    lts = build_plain_lts(SPIN_FOREVER, max_states=1)
    assert len(lts.states) == 1
    assert len(lts.transitions) == 1


def test_fair_set_constant_within_scc(idioms):
    for t in idioms.values():
        for model in (ProgressModel.HSA, ProgressModel.OBE, ProgressModel.LOBE,
                      ProgressModel.FAIR):
            lts = build_monitored_lts(t, model)
            for scc in scc_decompose(lts):
                fairs = {lts.fair_at(i) for i in scc.members}
                assert len(fairs) == 1


def test_scc_partition_and_labels(idioms):
    lts = build_monitored_lts(idioms["mutex"], ProgressModel.LOBE)
    sccs = scc_decompose(lts)
    seen = sorted(i for c in sccs for i in c.members)
    assert seen == list(range(len(lts.states)))
    for c in sccs:
        members = set(c.members)
        for ti in c.internal:
            tr = lts.transitions[ti]
            assert tr.src in members and tr.dst in members
        assert c.stepping == {lts.transitions[ti].tid for ti in c.internal}
        assert c.nontrivial == bool(c.internal)
    # deterministic presentation: ascending by smallest member
    assert [min(c.members) for c in sccs] == sorted(min(c.members) for c in sccs)


def test_self_loop_scc_is_nontrivial():
    lts = build_plain_lts(SPIN_FOREVER)
    sccs = scc_decompose(lts)
    assert len(sccs) == 1 and sccs[0].nontrivial


def test_two_state_cycle_is_one_scc():
    toggle = LitmusTest("toggle", 1, 2, ((I(0, 0, 0, exch=1), ), (I(0, 1, 0, exch=0),)))
    lts = build_plain_lts(toggle)
    nontrivial = [c for c in scc_decompose(lts) if c.nontrivial]
    assert len(nontrivial) == 1
    assert len(nontrivial[0].members) >= 2


def test_build_is_deterministic(idioms):
    a = build_monitored_lts(idioms["dining"], ProgressModel.LOBE)
    b = build_monitored_lts(idioms["dining"], ProgressModel.LOBE)
    assert a.states == b.states
    assert a.transitions == b.transitions
    assert a.end_states == b.end_states


def test_dot_and_json_renderings(idioms):
    plain = build_plain_lts(idioms["mutex"])
    dot = plain.to_dot()
    assert dot.startswith("digraph") and "s0" in dot and dot.count("->") == 10

    mon = build_monitored_lts(idioms["mutex"], ProgressModel.HSA)
    data = json.loads(mon.to_json())
    assert data == mon.to_json_dict()
    assert data["model"] == "hsa"
    assert len(data["states"]) == len(mon.states)
    assert len(data["transitions"]) == len(mon.transitions)
    assert data["initial"] == 0
    assert set(data["end_states"]) == set(mon.end_states)
