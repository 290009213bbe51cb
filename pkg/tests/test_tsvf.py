import pytest

from ifmsim.elements import BeamSplitter, Detector, Mirror, PhaseShift
from ifmsim.engine import Circuit, outcome_distribution
from ifmsim.errors import ImpossiblePostselectionError, ZeroOverlapError
from ifmsim.protocols import EV_LOWER_ARM, EV_UPPER_ARM, ev_circuit, hardy_circuit, HARDY_BOTH_D2, HARDY_W_CUT
from ifmsim.scenario import load_scenario
from ifmsim.state import BasisLabel, PureState, superpose
from ifmsim.tsvf import (
    Projector,
    abl_probability,
    backward_states,
    forward_states,
    live_modes,
    trace_free,
    two_state_vector,
    weak_value,
)

EV = ev_circuit(0.5, "bomb")


def test_forward_after_bs1_is_equal_split():
    f = forward_states(EV)[1]
    amps = sorted(abs(a) for _, a in f.items())
    assert amps == pytest.approx([2**-0.5, 2**-0.5])


def test_forward_identity():
    c = Circuit(("a",), [[PhaseShift("a", 0.0)]])
    f = forward_states(c)
    assert f[0] == f[1] == c.initial_state()


def test_forward_drops_absorbed_branch():
    f = forward_states(ev_circuit(0.5, "opaque"))[2]
    (lab, amp), = f.items()
    assert lab.photon == "free" and abs(amp) == pytest.approx(2**-0.5)
    raw = forward_states(ev_circuit(0.5, "opaque"), drop_terminal=False)[2]
    assert raw.norm_squared() == pytest.approx(1.0)


def test_wheeler_backward_single_upper_label():
    spec = load_scenario("wheeler_open")
    back = backward_states(spec.circuit, "D2")[1]
    (lab, amp), = back.items()
    assert lab.photon == "up" and abs(amp) == pytest.approx(1.0)


def test_identity_full_probability_backward():
    c = Circuit(("a",), [[PhaseShift("a", 0.0)]])
    back = backward_states(c, "photon:a")
    assert back[0] == back[1] == PureState.basis(BasisLabel.make("a"))


def test_ev_backward_vanishes_on_lower_arm_before_object():
    back = backward_states(EV, "D2")
    assert back[1].restrict(lambda lab: lab.photon == "int").norm() == 0


def test_impossible_postselection():
    with pytest.raises(ImpossiblePostselectionError):
        backward_states(ev_circuit(0.5, "absent"), "D2")


def test_overlap_constant_and_abl():
    tsv = two_state_vector(EV, "D2")
    for cut in tsv.cuts:
        assert tsv.overlap_at(cut) == pytest.approx(0.5, abs=1e-12)
    assert abs(tsv.overlap) ** 2 == pytest.approx(outcome_distribution(EV)["D2"])


@pytest.mark.parametrize("seg", EV_LOWER_ARM)
def test_trace_free_lower_arm(seg):
    assert trace_free(EV, None, "D2", seg)


@pytest.mark.parametrize("seg", EV_UPPER_ARM)
def test_not_trace_free_upper_arm(seg):
    assert not trace_free(EV, None, "D2", seg)


def test_weak_value_completeness_and_lower_arm():
    tsv = two_state_vector(EV, "D2")
    assert weak_value(EV, None, "D2", (2, "int"), tsv=tsv) == pytest.approx(0, abs=1e-12)
    total = weak_value(EV, None, "D2", (2, set(EV.modes) | {"ABSORBED"}), tsv=tsv)
    assert total == pytest.approx(1, abs=1e-12)


def test_wheeler_lower_arm_weak_value():
    c = load_scenario("wheeler_open").circuit
    assert weak_value(c, None, "D2", (1, "low")) == pytest.approx(0, abs=1e-12)


def test_hardy_weak_values_and_no_pair():
    c = hardy_circuit()
    tsv = two_state_vector(c, HARDY_BOTH_D2)
    get = lambda spec: weak_value(c, None, HARDY_BOTH_D2, spec, cut=HARDY_W_CUT, tsv=tsv)
    assert get({"photon": {"p_w"}}) == pytest.approx(1, abs=1e-9)
    assert get({"object": {"o_w"}}) == pytest.approx(1, abs=1e-9)
    assert get({"photon": {"p_w"}, "object": {"o_w"}}) == pytest.approx(0, abs=1e-9)
    both = Projector({"photon": {"p_w"}, "object": {"o_w"}})
    assert tsv.backward[HARDY_W_CUT].restrict(both).norm() < 1e-9


def test_zero_overlap_error():
    # post-selected on D1 of the open interferometer, the upper arm backward
    # state is orthogonal to a forward state that was sent down the lower arm
    c = Circuit(
        ("src", "vac", "up", "low"),
        [[BeamSplitter("src", "vac", "up", "low", 0.5)], [Detector("up", "DU"), Detector("low", "DL")]],
    )
    tsv = two_state_vector(c, "DU")
    other = superpose([(BasisLabel.make("low"), 1)])
    fake = type(tsv)(tsv.cuts, (tsv.forward[0], other, tsv.forward[2]), tsv.backward, tsv.postselection, 0.5)
    with pytest.raises(ZeroOverlapError):
        weak_value(c, None, "DU", (1, "up"), tsv=fake)


def test_abl_and_live_modes():
    tsv = two_state_vector(EV, "D2")
    assert abl_probability(tsv, 1, "free") == pytest.approx(1.0)
    assert (1, "int") in live_modes(tsv)


def test_projector_forms():
    p = Projector(["p_w", "object:o_w"])
    assert p(BasisLabel.make("p_w", {"object": "o_w"}))
    assert not p(BasisLabel.make("p_w", {"object": "o_free"}))
