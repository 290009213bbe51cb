"""Named interaction-free measurement protocols built on the circuit engine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .elements import Absorber, BeamSplitter, Coupler, Detector, Mirror, Probe
from .engine import (
    Circuit,
    ObjectSpec,
    OutcomeDistribution,
    TerminalEvent,
    conditional_state,
    distribution_of,
    evolve,
    negative_result_update,
    outcome_distribution,
)
from .errors import BadParamError
from .state import PHOTON, carrier_factor, project
from .tsvf import two_state_vector, weak_value

OBJECT_KINDS = ("absent", "bomb", "opaque", "semi-transparent")

EXPLOSION = TerminalEvent(exploded=("bomb",))
CLICK_D1 = TerminalEvent(clicked=("D1",))
CLICK_D2 = TerminalEvent(clicked=("D2",))
ABSORBED_BY_OBJECT = TerminalEvent()

# EV interferometer layout: lower ("int") arm passes the interaction region.
EV_MODES = ("src", "vac", "free", "int", "free_m", "int_m", "d1", "d2")
EV_LOWER_ARM = ((1, "int"), (2, "int"), (3, "int_m"))
EV_UPPER_ARM = ((1, "free"), (2, "free"), (3, "free_m"))


def _check_open_unit(name, value):
    if not (0.0 < value < 1.0):
        raise BadParamError(f"{name}={value!r} outside (0, 1)")


def ev_circuit(transmittance=0.5, obj="bomb", alpha=0.0, object_initial=None):
    """Mach-Zehnder bomb tester.

    The first splitter sends amplitude ``sqrt(T)`` into the free arm. The
    second splitter uses the same parameter on the ``(free, int)`` input
    order, which keeps ``D2`` dark for every ``T`` when the interaction
    region is empty.

    ``object_initial`` overrides the object's initial superposition
    (``{location: amplitude}``); the interaction region is location ``in``.
    """
    _check_open_unit("T", transmittance)
    if obj not in OBJECT_KINDS:
        raise BadParamError(f"unknown object kind {obj!r}; expected one of {OBJECT_KINDS}")
    if not 0.0 <= alpha <= 1.0:
        raise BadParamError(f"alpha={alpha!r} outside [0, 1]")
    explosive = obj == "bomb"
    if obj in ("bomb", "opaque"):
        alpha = 0.0
    if object_initial is None:
        object_initial = {"out": 1.0} if obj == "absent" else {"in": 1.0}
    states = tuple(dict.fromkeys(("in", "out", *object_initial)))
    stages = (
        (BeamSplitter("src", "vac", "free", "int", transmittance),),
        (Absorber("int", "bomb", alpha, explosive),),
        (Mirror("free", "free_m"), Mirror("int", "int_m")),
        (BeamSplitter("free_m", "int_m", "d1", "d2", transmittance),),
        (Detector("d1", "D1"), Detector("d2", "D2")),
    )
    return Circuit(
        modes=EV_MODES,
        stages=stages,
        objects=(ObjectSpec("bomb", states, object_initial),),
        source="src",
    )


def ev_single_shot(transmittance=0.5, obj="bomb", alpha=0.0):
    """Outcome distribution of one photon through the bomb tester."""
    return outcome_distribution(ev_circuit(transmittance, obj, alpha))


def efficiency(dist, detect=CLICK_D2, explode=EXPLOSION):
    """P(detect) / (P(detect) + P(explode)); 0 when both vanish."""
    d, e = dist[detect], dist[explode]
    return d / (d + e) if d + e > 0 else 0.0


@dataclass(frozen=True)
class RoundRecord:
    round: int
    found: float
    exploded: float
    undecided: float


@dataclass(frozen=True)
class ProtocolReport:
    single_shot: OutcomeDistribution
    efficiency: float
    found_fraction: float
    exploded_fraction: float
    undecided_fraction: float
    rounds: tuple = field(default=())
    mode: str = "analytic"

    def check(self, atol=1e-9):
        total = self.found_fraction + self.exploded_fraction + self.undecided_fraction
        return abs(total - 1.0) <= atol and 0.0 <= self.efficiency <= 1.0


def ev_repeated(transmittance=0.5, max_rounds=None, mode="analytic"):
    """Repeat the bomb test while ``D1`` clicks.

    ``max_rounds=None`` gives the infinite-repetition limit (analytic mode
    only). In ``simulated`` mode each round runs the circuit again on the
    intact bomb and the per-round weights are accumulated.
    """
    _check_open_unit("T", transmittance)
    if max_rounds is not None and (int(max_rounds) != max_rounds or max_rounds < 1):
        raise BadParamError(f"max_rounds={max_rounds!r} must be a positive integer")
    single = ev_single_shot(transmittance, "bomb")
    p_found, p_boom, p_again = single[CLICK_D2], single[EXPLOSION], single[CLICK_D1]
    eta = efficiency(single)

    if mode == "analytic":
        if max_rounds is None:
            found = p_found / (1.0 - p_again)
            boom = p_boom / (1.0 - p_again)
            return ProtocolReport(single, eta, found, boom, 0.0, (), mode)
        rounds = []
        for k in range(1, max_rounds + 1):
            series = (1.0 - p_again**k) / (1.0 - p_again)
            rounds.append(RoundRecord(k, p_found * series, p_boom * series, p_again**k))
        last = rounds[-1]
        return ProtocolReport(single, eta, last.found, last.exploded, last.undecided, tuple(rounds), mode)

    if mode != "simulated":
        raise BadParamError(f"unknown mode {mode!r}")
    if max_rounds is None:
        raise BadParamError("simulated mode needs a finite max_rounds")
    circuit = ev_circuit(transmittance, "bomb")
    state = circuit.initial_state()
    weight = 1.0
    found = boom = 0.0
    rounds = []
    for k in range(1, max_rounds + 1):
        final = evolve(circuit, state)
        dist = distribution_of(final)
        found += weight * dist[CLICK_D2]
        boom += weight * dist[EXPLOSION]
        # D1 leaves the bomb intact: reset the photon and go again
        p_again, cond = project(final, CLICK_D1.matches)
        weight *= p_again
        rounds.append(RoundRecord(k, found, boom, weight))
        if cond is None:
            break
        state = circuit.initial_state()
    return ProtocolReport(single, eta, found, boom, weight, tuple(rounds), mode)


def efficiency_frontier(grid):
    """``[(T, efficiency), ...]`` from brute-force circuit evaluation."""
    out = []
    for t in grid:
        _check_open_unit("T", t)
        out.append((float(t), efficiency(ev_single_shot(t, "bomb"))))
    return out


EFFICIENCY_SUPREMUM = 0.5  # approached as T -> 1, never attained


def transmittance_for_efficiency(target):
    """Smallest ``T`` whose repeat-on-D1 efficiency reaches ``target``."""
    if not 0.0 < target < EFFICIENCY_SUPREMUM:
        raise BadParamError(f"efficiency {target!r} is not attainable; supremum is 0.5")

    def gap(t):
        return efficiency(ev_single_shot(t, "bomb")) - target

    return brentq(gap, 1e-9, 1.0 - 1e-12, xtol=1e-14)


# --- quantum Zeno two-cavity scheme ---------------------------------------

ZENO_LEFT = TerminalEvent(photon="left")
ZENO_RIGHT = TerminalEvent(photon="right")


def zeno_circuit(n_cycles, obj="bomb"):
    """``N`` round trips through a coupling mirror of angle ``pi / (2N)``,
    with the object (if any) checked in the right cavity after each."""
    if int(n_cycles) != n_cycles or n_cycles < 1:
        raise BadParamError(f"N={n_cycles!r} must be a positive integer")
    if obj not in ("absent", "bomb"):
        raise BadParamError(f"zeno object must be 'absent' or 'bomb', got {obj!r}")
    theta = math.pi / (2 * n_cycles)
    stages = []
    for k in range(1, int(n_cycles) + 1):
        stages.append((Coupler("left", "right", theta),))
        stages.append((Absorber("right", "bomb", 0.0, True, site=f"cycle{k}"),))
    initial = {"in": 1.0} if obj == "bomb" else {"out": 1.0}
    return Circuit(
        modes=("left", "right"),
        stages=tuple(stages),
        objects=(ObjectSpec("bomb", ("in", "out"), initial),),
        source="left",
    )


def zeno_run(n_cycles, obj="bomb"):
    return outcome_distribution(zeno_circuit(n_cycles, obj))


def zeno_left_probability(n_cycles):
    """Closed form ``cos(pi / 2N) ** 2N`` for the bomb case."""
    return math.cos(math.pi / (2 * n_cycles)) ** (2 * n_cycles)


# --- nested interferometers (Hardy) ----------------------------------------

HARDY_PHOTON_MODES = ("p_src", "p_vac", "p_free", "p_w", "p_d1", "p_d2", "p_away")
HARDY_OBJECT_STATES = ("o_src", "o_vac", "o_free", "o_w", "o_d1", "o_d2", "o_away")
HARDY_BOTH_D2 = TerminalEvent(clicked=("OD2", "PD2"))
HARDY_ANNIHILATION = TerminalEvent(exploded=("object",))
HARDY_W_CUT = 1
HARDY_QUERIES = ("object_at_w", "photon_at_w", "both_at_w")


def _hardy_second_photon(photon_t):
    return (
        (BeamSplitter("p_free", "p_w", "p_d1", "p_d2", photon_t),),
        (Detector("p_d1", "PD1"), Detector("p_d2", "PD2")),
    )


def _hardy_second_object(object_t):
    return (
        (BeamSplitter("o_free", "o_w", "o_d1", "o_d2", object_t, carrier="object"),),
        (Detector("o_d1", "OD1", "object"), Detector("o_d2", "OD2", "object")),
    )


def _hardy(photon_t, object_t, middle, photon_tail, object_tail, with_photon=True, with_object=True):
    for name, t in (("photon T", photon_t), ("object T", object_t)):
        _check_open_unit(name, t)
    first = (
        BeamSplitter("p_src", "p_vac", "p_free", "p_w", photon_t),
        BeamSplitter("o_src", "o_vac", "o_free", "o_w", object_t, carrier="object"),
    )
    n = max(len(photon_tail), len(object_tail))
    tail = tuple(
        (photon_tail[i] if i < len(photon_tail) else ())
        + (object_tail[i] if i < len(object_tail) else ())
        for i in range(n)
    )
    initial = {"o_src": 1.0} if with_object else {"o_away": 1.0}
    return Circuit(
        modes=HARDY_PHOTON_MODES,
        stages=(first,) + middle + tail,
        objects=(ObjectSpec("object", HARDY_OBJECT_STATES, initial),),
        source="p_src" if with_photon else "p_away",
    )


def _annihilation():
    # photon and object cannot both pass W
    return ((Absorber("p_w", "object", 0.0, True, present_state="o_w"),),)


def hardy_circuit(photon_t=0.5, object_t=0.5, with_photon=True, with_object=True):
    """Overlapping photon and object interferometers meeting at ``W``.

    Each interferometer alone is dark at its ``D2``. Passing
    ``with_photon=False`` or ``with_object=False`` parks that particle in
    an ``away`` mode no element touches. The cut after stage 1
    (:data:`HARDY_W_CUT`) is the meeting time.
    """
    return _hardy(
        photon_t, object_t, _annihilation(),
        _hardy_second_photon(photon_t), _hardy_second_object(object_t),
        with_photon, with_object,
    )


def hardy_run(photon_t=0.5, object_t=0.5):
    """Exact joint distribution over detector pairs and annihilation."""
    return outcome_distribution(hardy_circuit(photon_t, object_t))


def hardy_variant(query, photon_t=0.5, object_t=0.5):
    """Circuit that tests one claim on its own.

    ``object_at_w``: the object's second splitter is replaced by position
    detectors ``OW``/``OF`` on its arms. ``photon_at_w``: same for the
    photon (``PW``/``PF``). ``both_at_w``: a non-demolition coincidence
    probe ``PAIR`` checks the pair at ``W`` just before they meet.
    """
    if query == "object_at_w":
        tail = ((Detector("o_w", "OW", "object"), Detector("o_free", "OF", "object")),)
        return _hardy(photon_t, object_t, _annihilation(), _hardy_second_photon(photon_t), tail)
    if query == "photon_at_w":
        tail = ((Detector("p_w", "PW"), Detector("p_free", "PF")),)
        return _hardy(photon_t, object_t, _annihilation(), tail, _hardy_second_object(object_t))
    if query == "both_at_w":
        probe = ((Probe("PAIR", ((PHOTON, "p_w"), ("object", "o_w"))),),)
        return _hardy(
            photon_t, object_t, probe + _annihilation(),
            _hardy_second_photon(photon_t), _hardy_second_object(object_t),
        )
    raise BadParamError(f"unknown query {query!r}; expected one of {HARDY_QUERIES}")


def hardy_conditional(query, photon_t=0.5, object_t=0.5):
    """Conditional certainty for one of :data:`HARDY_QUERIES`.

    ``object_at_w``: P(object found at W | photon D2).
    ``photon_at_w``: P(photon found at W | object D2).
    ``both_at_w``: P(pair found at W | both D2).
    """
    circuit = hardy_variant(query, photon_t, object_t)
    dist = outcome_distribution(circuit)
    if query == "object_at_w":
        given = dist.marginal(lambda e: "PD2" in e.clicked)
        hit = dist.marginal(lambda e: "PD2" in e.clicked and "OW" in e.clicked)
    elif query == "photon_at_w":
        given = dist.marginal(lambda e: "OD2" in e.clicked)
        hit = dist.marginal(lambda e: "OD2" in e.clicked and "PW" in e.clicked)
    else:
        given = dist.marginal(lambda e: {"PD2", "OD2"} <= set(e.clicked))
        hit = dist.marginal(lambda e: {"PD2", "OD2", "PAIR"} <= set(e.clicked))
    if given <= 0:
        raise BadParamError(f"conditioning event for {query!r} is impossible")
    return hit / given


def hardy_weak_values(photon_t=0.5, object_t=0.5):
    """Weak values at the meeting cut, post-selected on both ``D2``."""
    circuit = hardy_circuit(photon_t, object_t)
    tsv = two_state_vector(circuit, HARDY_BOTH_D2)
    projectors = {
        "photon_at_w": {PHOTON: {"p_w"}},
        "object_at_w": {"object": {"o_w"}},
        "both_at_w": {PHOTON: {"p_w"}, "object": {"o_w"}},
        "photon_free": {PHOTON: {"p_free"}},
        "object_free": {"object": {"o_free"}},
        "both_free": {PHOTON: {"p_free"}, "object": {"o_free"}},
    }
    return {
        name: weak_value(circuit, None, HARDY_BOTH_D2, proj, cut=HARDY_W_CUT, tsv=tsv)
        for name, proj in projectors.items()
    }


# --- object localisation by a successful test -------------------------------

def dicke_localization(object_superposition, transmittance=0.5):
    """Run the bomb tester on an object spread over several locations.

    ``object_superposition`` is a mapping or list of ``(location,
    amplitude)``; the
    interaction region is location ``"in"``. Returns ``(P(D2), state)``
    where ``state`` maps location to amplitude for the object given ``D2``
    (``None`` if ``D2`` is impossible).
    """
    items = object_superposition
    terms = list(items.items() if isinstance(items, dict) else items)
    weight = math.fsum(abs(complex(a)) ** 2 for _, a in terms)
    if abs(weight - 1.0) > 1e-9:
        raise BadParamError(f"object amplitudes have total weight {weight:.12g}, expected 1")
    merged = {}
    for loc, a in terms:
        merged[str(loc)] = merged.get(str(loc), 0j) + complex(a)
    circuit = ev_circuit(transmittance, "bomb", object_initial=merged)
    prob, cond = conditional_state(circuit, None, CLICK_D2)
    if cond is None:
        return prob, None
    return prob, carrier_factor(cond, "bomb")


# --- registry used by scenario files ----------------------------------------

def _rows_of_distribution(dist):
    return [{"event": str(e), "probability": p} for e, p in dist.items()]


def _proto_ev_single_shot(T=0.5, obj="bomb", alpha=0.0):
    dist = ev_single_shot(T, obj, alpha)
    rows = _rows_of_distribution(dist)
    rows.append({"quantity": "efficiency", "value": efficiency(dist)})
    return rows


def _proto_ev_repeated(T=0.5, max_rounds=None, mode="analytic"):
    rep = ev_repeated(T, max_rounds, mode)
    rows = [
        {"round": r.round, "found": r.found, "exploded": r.exploded, "undecided": r.undecided}
        for r in rep.rounds
    ]
    rows.append({
        "quantity": "totals", "found": rep.found_fraction, "exploded": rep.exploded_fraction,
        "undecided": rep.undecided_fraction, "efficiency": rep.efficiency,
    })
    return rows


def _proto_efficiency_frontier(grid=(0.1, 0.3, 0.5, 0.7, 0.9)):
    return [{"T": t, "efficiency": eta, "closed_form": t / (1 + t)} for t, eta in efficiency_frontier(grid)]


def _proto_zeno(N=10, obj="bomb"):
    dist = zeno_run(N, obj)
    rows = _rows_of_distribution(dist)
    if obj == "bomb":
        rows.append({"quantity": "closed_form_left", "value": zeno_left_probability(N)})
    return rows


def _proto_hardy(photon_t=0.5, object_t=0.5):
    rows = _rows_of_distribution(hardy_run(photon_t, object_t))
    rows += [
        {"query": q, "conditional": hardy_conditional(q, photon_t, object_t)} for q in HARDY_QUERIES
    ]
    rows += [
        {"weak_value": k, "re": v.real, "im": v.imag}
        for k, v in hardy_weak_values(photon_t, object_t).items()
    ]
    return rows


def _proto_dicke(object_superposition=None, T=0.5):
    sup = object_superposition or {"in": 2**-0.5, "out": 2**-0.5}
    prob, state = dicke_localization(sup, T)
    rows = [{"event": str(CLICK_D2), "probability": prob}]
    for loc, amp in (state or {}).items():
        rows.append({"location": loc, "re": amp.real, "im": amp.imag})
    return rows


PROTOCOLS = {
    "ev_single_shot": _proto_ev_single_shot,
    "ev_repeated": _proto_ev_repeated,
    "efficiency_frontier": _proto_efficiency_frontier,
    "zeno": _proto_zeno,
    "hardy": _proto_hardy,
    "dicke_localization": _proto_dicke,
    "negative_result": None,  # acts on the scenario's own circuit
}


def negative_result_rows(circuit, detector):
    """Photon weights per mode after ``detector`` stays silent.

    Detectors in the circuit are not run to completion here: the live part
    of the final state (photon still in flight) is updated by the null
    result of ``detector``.
    """
    final = evolve(circuit)
    after = negative_result_update(final, lambda lab: detector in lab.clicked)
    weights = {}
    for label, amp in after.items():
        weights[label.photon] = weights.get(label.photon, 0.0) + abs(amp) ** 2
    return [{"mode": m, "weight": w} for m, w in sorted(weights.items())]


def run_protocol(name, params=None, circuit=None):
    """Evaluate a registered protocol and return flat result rows."""
    if name not in PROTOCOLS:
        raise BadParamError(f"unknown protocol {name!r}; expected one of {sorted(PROTOCOLS)}")
    params = dict(params or {})
    if name == "negative_result":
        if circuit is None:
            raise BadParamError("negative_result needs a circuit")
        if set(params) != {"detector"}:
            raise BadParamError("negative_result takes exactly one parameter: detector")
        return negative_result_rows(circuit, params["detector"])
    if name == "dicke_localization" and "object_superposition" not in params and circuit is not None:
        # take the superposition from the scenario's bomb
        obj = next((o for o in circuit.objects if o.object_id == "bomb"), None)
        if obj is not None:
            params["object_superposition"] = dict(obj.initial)
    if name == "efficiency_frontier" and "grid" in params:
        params["grid"] = tuple(params["grid"])
    try:
        return PROTOCOLS[name](**params)
    except TypeError as exc:
        raise BadParamError(f"bad parameters for {name!r}: {exc}") from None
