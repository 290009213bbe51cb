import cmath
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from circuits import random_circuit
from ifmsim.elements import apply_adjoint, apply_element, bs_matrix, is_unitary
from ifmsim.engine import OutcomeDistribution, TerminalEvent, evolve, outcome_distribution, validate
from ifmsim.protocols import ev_circuit
from ifmsim.sampling import sample
from ifmsim.scenario import ScenarioSpec, parse_scenario, serialize_scenario
from ifmsim.state import BasisLabel, PureState, inner_product, superpose
from ifmsim.tsvf import segment_weights, two_state_vector, weak_value

SEEDS = st.integers(0, 2**32 - 1)
FAST = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def _events(dist):
    return [e for e, p in dist.items() if p > 1e-6]


@FAST
@given(SEEDS)
def test_random_circuits_are_valid(seed):
    assert validate(random_circuit(seed)) == []


@FAST
@given(SEEDS)
def test_norm_conservation(seed):
    assert evolve(random_circuit(seed)).norm_squared() == pytest.approx(1.0, abs=1e-9)


@FAST
@given(SEEDS)
def test_distribution_completeness(seed):
    dist = outcome_distribution(random_circuit(seed))
    assert dist.total() == pytest.approx(1.0, abs=1e-9)
    assert all(0 <= p <= 1 + 1e-12 for p in dist.values())


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.sampled_from(["real", "swapped", "symmetric"]))
def test_beam_splitter_unitarity(t, conv):
    assert is_unitary(bs_matrix(t, conv), 1e-12)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.floats(0.001, 1.0), min_size=1, max_size=6),
    st.integers(1, 10_000),
    st.integers(0, 2**64 - 1),
)
def test_sampling_reproducible(weights, shots, seed):
    total = math.fsum(weights)
    dist = OutcomeDistribution({f"D{i}": w / total for i, w in enumerate(weights)})
    a = sample(dist, shots, seed)
    assert a == sample(dist, shots, seed)
    assert sum(a.values()) == shots and set(a) == {str(k) for k in dist}


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_overlap_invariance(seed):
    c = random_circuit(seed)
    events = _events(outcome_distribution(c))
    tsv = two_state_vector(c, events[seed % len(events)])
    for cut in tsv.cuts:
        assert cmath.isclose(tsv.overlap_at(cut), tsv.overlap, abs_tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_weak_value_sum_rule(seed):
    c = random_circuit(seed)
    dist = outcome_distribution(c)
    events = _events(dist)
    post = events[seed % len(events)]
    tsv = two_state_vector(c, post)
    cut = seed % len(tsv.cuts)
    family = [{"photon": {m}} for m in c.modes] + [{"photon": {"ABSORBED"}}]
    total = sum(weak_value(c, None, post, p, cut=cut, tsv=tsv) for p in family)
    assert cmath.isclose(total, 1.0, abs_tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_trace_free_implies_zero_weak_value(seed):
    c = random_circuit(seed)
    events = _events(outcome_distribution(c))
    post = events[seed % len(events)]
    tsv = two_state_vector(c, post)
    for cut in tsv.cuts:
        for m in c.modes:
            f, b = segment_weights(tsv, cut, m)
            if f * b <= 1e-9 and max(f, b) > 0:
                assert abs(weak_value(c, None, post, m, cut=cut, tsv=tsv)) <= 1e-6 / abs(tsv.overlap)


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_unitarity_until_absorption(seed):
    c = random_circuit(seed, linear_only=True)
    x = c.initial_state(c.modes[seed % len(c.modes)])
    y = c.initial_state(c.modes[(seed // 7) % len(c.modes)])
    before = inner_product(x, y)
    after = inner_product(evolve(c, x), evolve(c, y))
    assert cmath.isclose(before, after, abs_tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_adjoint_of_each_stage(seed):
    c = random_circuit(seed)
    x = c.initial_state()
    rng = np.random.default_rng(seed)
    for stage in c.stages:
        for el in stage:
            y = apply_element(x, el)
            z = superpose([(lab, complex(*rng.normal(size=2))) for lab in y.labels])
            assert cmath.isclose(inner_product(z, y), inner_product(apply_adjoint(z, el), x), abs_tol=1e-9)
            x = y


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcde"), st.complex_numbers(max_magnitude=10)), max_size=12), st.randoms())
def test_state_term_order_independent(terms, rnd):
    labelled = [(BasisLabel.make(m), a) for m, a in terms]
    shuffled = labelled[:]
    rnd.shuffle(shuffled)
    assert PureState(labelled).approx_equal(PureState(shuffled), 1e-12)


@settings(max_examples=100, deadline=None)
@given(SEEDS)
def test_scenario_round_trip(seed):
    c = random_circuit(seed)
    spec = ScenarioSpec(f"rand{seed}", c)
    assert parse_scenario(serialize_scenario(spec)) == spec


@settings(max_examples=60, deadline=None)
@given(st.floats(0.001, 0.999))
def test_dark_port_any_t(t):
    assert outcome_distribution(ev_circuit(t, "absent"))[TerminalEvent(clicked=("D2",))] == pytest.approx(0, abs=1e-9)
