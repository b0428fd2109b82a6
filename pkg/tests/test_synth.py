"""Bounded enumeration: constraints, dedup, determinism, and counts."""

import pytest

import naive
from conftest import SUITE_CANDIDATES, SUITE_UNIQUE
from progress_lab.axb import AxbInstruction, LitmusTest
from progress_lab.litmus_io import serialize_body
from progress_lab.lts import build_plain_lts
from progress_lab.oracle import check_strong, check_unfair
from progress_lab.models import ProgressModel
from progress_lab.synth import (
    SynthConfig,
    canonicalize,
    compositions,
    influence_holds,
    synthesize,
)

I = AxbInstruction


def test_compositions():
    assert compositions(2, 2) == [(1, 1)]
    assert compositions(4, 2) == [(1, 3), (2, 2), (3, 1)]
    assert compositions(3, 3) == [(1, 1, 1)]
    assert compositions(3, 1) == [(3,)]


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(num_threads=0, total_instructions=2)
    with pytest.raises(ValueError):
        SynthConfig(num_threads=3, total_instructions=2)  # someone gets nothing
    with pytest.raises(ValueError):
        SynthConfig(num_threads=2, total_instructions=2, num_locations=0)
    with pytest.raises(ValueError):
        SynthConfig(num_threads=2, total_instructions=2, jobs=0)


@pytest.fixture(scope="module")
def small(suites):
    return suites(2, 2)


def test_candidate_count_and_accounting(small):
    stats = small.stats
    assert stats.candidates == SUITE_CANDIDATES[(2, 2)]
    assert stats.unique == SUITE_UNIQUE[(2, 2)] == len(small.tests)
    assert stats.candidates == sum(stats.rejected.values()) + stats.unique + stats.duplicates
    assert stats.elapsed_seconds >= 0


def test_known_unique_counts(suites):
    assert suites(2, 3).stats.unique == SUITE_UNIQUE[(2, 3)]
    assert suites(3, 3).stats.unique == SUITE_UNIQUE[(3, 3)]


def test_lts_sizes_accompany_tests(small):
    assert len(small.lts_sizes) == len(small.tests)
    for t, (states, actions) in zip(small.tests, small.lts_sizes):
        lts = build_plain_lts(t)
        assert (len(lts.states), len(lts.transitions)) == (states, actions)


def test_names_follow_sorted_bodies(small):
    names = [t.name for t in small.tests]
    assert names == sorted(names)
    assert names[0] == "t000"
    bodies = [serialize_body(t.threads, t.num_locations, t.value_domain) for t in small.tests]
    assert bodies == sorted(bodies)


def test_every_output_satisfies_naive_constraints(small):
    for t in small.tests:
        assert naive.naive_constraints_ok(t), t.name


def test_outputs_are_progress_tests(suites):
    # the defining property: would terminate under strong fairness, might
    # not without any guarantee
    for t in suites(2, 3).tests:
        assert check_strong(t, ProgressModel.FAIR).passed
        assert not check_unfair(t).passed


def test_syntactic_fallthrough_restriction(suites):
    for t in suites(2, 3).tests:
        for prog in t.threads:
            for idx, ins in enumerate(prog):
                if ins.jump == idx + 1:
                    assert ins.cmp == 0


def test_recall_of_known_idioms(small, idioms):
    bodies = {serialize_body(t.threads, 2, 2) for t in small.tests}
    for name in ("prodcons-increasing", "prodcons-decreasing", "dining"):
        assert serialize_body(idioms[name].threads, 2, 2) in bodies, name


def test_determinism(small):
    again = synthesize(SynthConfig(num_threads=2, total_instructions=2))
    assert [t.threads for t in again.tests] == [t.threads for t in small.tests]
    assert again.lts_sizes == small.lts_sizes


def test_parallel_equals_serial(small):
    par = synthesize(SynthConfig(num_threads=2, total_instructions=2, jobs=2))
    assert [t.threads for t in par.tests] == [t.threads for t in small.tests]
    assert par.stats.candidates == small.stats.candidates
    assert par.stats.unique == small.stats.unique


def test_size_caps_reject_and_match_filtering(small):
    capped = synthesize(
        SynthConfig(num_threads=2, total_instructions=2, max_states=3, max_actions=3)
    )
    assert capped.stats.rejected["lts_bounds_exceeded"] > 0
    expected = {
        t.threads
        for t, (s, a) in zip(small.tests, small.lts_sizes)
        if s <= 3 and a <= 3
    }
    assert {t.threads for t in capped.tests} == expected


def test_symmetry_reduction_halves_single_location_suite(small):
    reduced = synthesize(
        SynthConfig(num_threads=2, total_instructions=2, symmetry_reduction=True)
    )
    # every (2,2) survivor lives on one location, so its twin collapses
    assert len(reduced.tests) == len(small.tests) // 2
    canon = {canonicalize(t, symmetry_reduction=True) for t in small.tests}
    assert {canonicalize(t) for t in reduced.tests} == canon


def test_canonicalize_maps_twins_together():
    a = LitmusTest("a", 2, 2, ((I(0, 0, 1, 1),), (I(0, 0, 0, None),)))
    b = LitmusTest("b", 2, 2, ((I(1, 0, 1, 1),), (I(1, 0, 0, None),)))
    assert canonicalize(a) != canonicalize(b)
    assert canonicalize(a, symmetry_reduction=True) == canonicalize(
        b, symmetry_reduction=True
    )
    # names never matter
    assert canonicalize(a) == canonicalize(
        LitmusTest("other", 2, 2, a.threads)
    )


def test_influence_examples(idioms):
    assert influence_holds(idioms["mutex"])
    assert influence_holds(idioms["prodcons-increasing"])
    disjoint = LitmusTest(
        "apart", 2, 2,
        ((I(0, 0, 0, 1), I(0, 1, 0, 0)), (I(1, 0, 0, 1), I(1, 1, 0, 0))),
    )
    assert not influence_holds(disjoint)


def test_influence_accepts_precomputed_lts(idioms):
    t = idioms["mutex"]
    assert influence_holds(t, build_plain_lts(t))


def test_influence_agrees_with_naive():
    # the whole syntactically valid (2,2) candidate space, not just survivors
    programs = naive.all_programs(1, 2, 2, True, AxbInstruction)
    for p0 in programs:
        for p1 in programs:
            t = LitmusTest("x", 2, 2, (p0, p1))
            assert influence_holds(t) == naive.naive_influence(t), (p0, p1)


def test_brute_force_equivalence_3_3(suites):
    got = {t.threads for t in suites(3, 3).tests}
    want, candidates = naive.naive_synthesize(
        3, 3, lambda combo, L, V: LitmusTest("x", L, V, tuple(combo)), AxbInstruction
    )
    assert candidates == SUITE_CANDIDATES[(3, 3)]
    assert got == want
