import math

import numpy as np
import pytest

import oracles
from ifmsim.elements import Absorber, BeamSplitter, Detector, Mirror, PhaseShift
from ifmsim.engine import (
    Circuit,
    ObjectSpec,
    OutcomeDistribution,
    TerminalEvent,
    conditional_state,
    distribution_of,
    evolve,
    negative_result_update,
    outcome_distribution,
    validate,
)
from ifmsim.errors import CertainDetectionError, CircuitValidationError
from ifmsim.protocols import ev_circuit
from ifmsim.state import BasisLabel, PureState, superpose


def codes(circuit):
    return {v.code for v in validate(circuit)}


def test_ev_circuit_valid():
    assert validate(ev_circuit(0.5, "bomb")) == []


def test_mode_clash():
    c = Circuit(("a", "b", "c", "d"), [[BeamSplitter("a", "b", "c", "d"), BeamSplitter("a", "b", "c", "d", 0.3)]])
    assert "MODE_CLASH" in codes(c)


def test_empty_circuit_and_stage():
    assert "EMPTY_CIRCUIT" in codes(Circuit(("a",), []))
    assert "EMPTY_STAGE" in codes(Circuit(("a",), [[]]))


def test_undeclared_mode_and_object():
    c = Circuit(("a",), [[Mirror("a", "b")], [Absorber("a", "ghost")]])
    assert {"UNDECLARED_MODE", "UNDECLARED_OBJECT"} <= codes(c)
    with pytest.raises(CircuitValidationError):
        evolve(c)


def test_duplicate_sink():
    c = Circuit(("a",), [[Detector("a", "D")], [Detector("a", "D")]])
    assert "DUPLICATE_SINK" in codes(c)


def test_bad_object_specs():
    c = Circuit(("a",), [[PhaseShift("a", 0)]], [ObjectSpec("photon", ("x",), {"y": 0.0})])
    assert {"RESERVED_ID", "UNDECLARED_STATE", "ALL_ZERO"} <= codes(c)


def test_ev_bomb_absent_terminal_state():
    final = evolve(ev_circuit(0.5, "absent"))
    (lab, amp), = final.items()
    assert lab.clicked == ("D1",) and abs(amp) == pytest.approx(1)


def test_ev_bomb_present_terminal_state():
    final = evolve(ev_circuit(0.5, "bomb"))
    weights = sorted(abs(a) for _, a in final.items())
    assert weights == pytest.approx([0.5, 0.5, 1 / math.sqrt(2)])


def test_identity_circuit():
    c = Circuit(("a", "b"), [[PhaseShift("a", 0.0)]])
    s = c.initial_state()
    assert evolve(c) == s


@pytest.mark.parametrize("t", [0.5, 0.8])
def test_ev_distribution_matches_oracle(t):
    d = outcome_distribution(ev_circuit(t, "bomb"))
    o = oracles.ev(t)
    assert d["click:D1"] == pytest.approx(o["D1"], abs=1e-12)
    assert d["D2"] == pytest.approx(o["D2"], abs=1e-12)
    assert d["explode:bomb"] == pytest.approx(o["explosion"], abs=1e-12)
    assert d.total() == pytest.approx(1.0, abs=1e-12)


def test_ev_t08_values():
    d = outcome_distribution(ev_circuit(0.8, "bomb"))
    assert d.as_dict() == pytest.approx({"explode:bomb": 0.2, "click:D1": 0.64, "click:D2": 0.16})


def test_dark_port_theorem():
    for t in np.linspace(0.01, 0.99, 25):
        assert outcome_distribution(ev_circuit(t, "absent"))["D2"] == pytest.approx(0, abs=1e-9)


def test_conditional_localizes_object():
    c = ev_circuit(0.5, "bomb", object_initial={"in": 2**-0.5, "out": 2**-0.5})
    prob, state = conditional_state(c, None, "D2")
    assert prob == pytest.approx(1 / 8)
    assert {lab.object_state("bomb") for lab in state.labels} == {"in"}


def test_conditional_impossible_is_none():
    prob, state = conditional_state(ev_circuit(0.5, "absent"), None, "D2")
    assert state is None and prob < 1e-20


def test_conditional_d1_absent_keeps_object():
    c = ev_circuit(0.5, "absent", object_initial={"out": 0.6, "elsewhere": 0.8})
    prob, state = conditional_state(c, None, "D1")
    assert prob == pytest.approx(1)
    amps = {lab.object_state("bomb"): a for lab, a in state.items()}
    assert amps["out"] == pytest.approx(0.6) and amps["elsewhere"] == pytest.approx(0.8)


def test_conditional_consistency():
    c = ev_circuit(0.7, "semi-transparent", 0.4)
    dist = outcome_distribution(c)
    for ev, p in dist.items():
        prob, _ = conditional_state(c, None, ev)
        assert prob == pytest.approx(p, abs=1e-12)


A, B = BasisLabel.make("A"), BasisLabel.make("B")


def test_negative_result_two_outcome():
    s = superpose([(A, math.sqrt(0.3)), (B, math.sqrt(0.7))])
    out = negative_result_update(s, lambda lab: lab.photon == "A")
    assert out.labels == (B,) and abs(out.amplitude(B)) == pytest.approx(1)


def test_negative_result_zero_weight_unchanged():
    s = superpose([(B, 1)])
    assert negative_result_update(s, lambda lab: lab.photon == "A").approx_equal(s)


def test_negative_result_certain_detection():
    with pytest.raises(CertainDetectionError):
        negative_result_update(superpose([(A, 1)]), lambda lab: lab.photon == "A")


def test_renninger_four_sectors():
    sectors = [BasisLabel.make(f"s{i}") for i in range(1, 5)]
    s = superpose([(lab, 0.5) for lab in sectors])
    out = negative_result_update(s, lambda lab: lab.photon == "s1")
    weights = sorted(abs(a) ** 2 for _, a in out.items())
    assert weights == pytest.approx([1 / 3] * 3, abs=1e-12)


def test_linear_optics_matches_dense_oracle():
    rng = np.random.default_rng(0)
    modes = ("m0", "m1", "m2", "m3")
    stages, ops = [], []
    for _ in range(6):
        i, j = rng.choice(4, 2, replace=False)
        t = float(rng.uniform(0.05, 0.95))
        stages.append([BeamSplitter(modes[i], modes[j], modes[i], modes[j], t)])
        ops.append((i, j, oracles.bs(t)))
    u = oracles.dense_unitary(4, ops)
    c = Circuit(modes, stages)
    for k in range(4):
        final = evolve(c, PureState.basis(BasisLabel.make(modes[k])))
        got = np.array([final.amplitude(BasisLabel.make(m)) for m in modes])
        assert np.allclose(got, u[:, k], atol=1e-12)


def test_terminal_event_text():
    ev = TerminalEvent.parse("click:PD2 & explode:x & D1")
    assert ev.clicked == ("D1", "PD2") and ev.exploded == ("x",)
    assert TerminalEvent.parse(str(ev)) == ev
    assert str(TerminalEvent()) == "absorbed"


def test_distribution_mapping():
    d = OutcomeDistribution({"D1": 0.25, "click:D2": 0.75})
    assert d["click:D1"] == 0.25 and d["nothing"] == 0.0
    assert "D2" in d and len(d) == 2


def test_distribution_of_groups_labels():
    lab1 = BasisLabel.make("x", {"o": "a"})
    lab2 = BasisLabel.make("x", {"o": "b"})
    d = distribution_of(superpose([(lab1, 1), (lab2, 1)]))
    assert d["photon:x"] == pytest.approx(1.0)
