"""Staged circuits: validation, exact evolution and outcome statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .elements import Absorber, Detector, Element, Probe, apply_element
from .errors import (
    BadParamError,
    CertainDetectionError,
    CircuitValidationError,
)
from .state import (
    ABSORBED,
    DEFAULT_TOLERANCE,
    EXPLODED,
    NORM_TOLERANCE,
    PHOTON,
    BasisLabel,
    PureState,
    project,
    superpose,
)

# Reserved object states; every object may take them without declaring.
RESERVED_OBJECT_STATES = (EXPLODED, ABSORBED)


@dataclass(frozen=True)
class ObjectSpec:
    """A discrete-state object and its initial superposition."""

    object_id: str
    states: tuple
    initial: tuple  # ((state, amplitude), ...)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        init = self.initial.items() if isinstance(self.initial, Mapping) else self.initial
        object.__setattr__(self, "initial", tuple((str(s), complex(a)) for s, a in init))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    stage: int | None = None

    def __str__(self):
        where = f" (stage {self.stage})" if self.stage is not None else ""
        return f"{self.code}: {self.message}{where}"


@dataclass(frozen=True)
class Circuit:
    """Photon modes, objects and an ordered list of stages.

    Elements in one stage must touch disjoint ``(carrier, mode)`` pairs, so
    their order within the stage does not matter.
    """

    modes: tuple
    stages: tuple
    objects: tuple = ()
    source: str | None = None
    postselection: object = None  # TerminalEvent or None
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "stages", tuple(tuple(s) for s in self.stages))
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.source is None and self.modes:
            object.__setattr__(self, "source", self.modes[0])
        if self.postselection is not None:
            object.__setattr__(self, "postselection", TerminalEvent.parse(self.postselection))

    @property
    def carrier_modes(self):
        """Map carrier id to the set of states its elements may reference."""
        out = {PHOTON: frozenset(self.modes)}
        for obj in self.objects:
            out[obj.object_id] = frozenset(obj.states) | frozenset(RESERVED_OBJECT_STATES)
        return out

    @property
    def n_cuts(self):
        return len(self.stages) + 1

    def initial_state(self, photon_mode=None):
        """Photon in ``photon_mode`` (default: source) times every object's
        initial superposition."""
        terms = [({}, 1.0 + 0j)]
        for obj in self.objects:
            terms = [
                ({**objs, obj.object_id: s}, amp * a)
                for objs, amp in terms
                for s, a in obj.initial
            ]
        mode = photon_mode or self.source
        return superpose(
            [(BasisLabel.make(mode, objs), amp) for objs, amp in terms], self.tolerance
        )


def validate(circuit: Circuit):
    """Return a list of :class:`Violation` (empty when the circuit is valid)."""
    errors = []
    if not circuit.stages:
        errors.append(Violation("EMPTY_CIRCUIT", "circuit has no stages"))
    if len(set(circuit.modes)) != len(circuit.modes):
        errors.append(Violation("DUPLICATE_MODE", "mode list has duplicates"))
    if circuit.source is not None and circuit.source not in circuit.modes:
        errors.append(Violation("UNDECLARED_MODE", f"source {circuit.source!r} is not a declared mode"))
    ids = [o.object_id for o in circuit.objects]
    if len(set(ids)) != len(ids):
        errors.append(Violation("DUPLICATE_OBJECT", "object ids must be unique"))
    if PHOTON in ids:
        errors.append(Violation("RESERVED_ID", f"{PHOTON!r} cannot be an object id"))
    for obj in circuit.objects:
        bad = [s for s, _ in obj.initial if s not in obj.states]
        if bad:
            errors.append(Violation("UNDECLARED_STATE", f"object {obj.object_id!r} initial states {bad} not declared"))
        weight = math.fsum(abs(a) ** 2 for _, a in obj.initial)
        if weight <= circuit.tolerance**2:
            errors.append(Violation("ALL_ZERO", f"object {obj.object_id!r} has zero initial amplitude"))
    known = circuit.carrier_modes
    sinks = {}
    for i, stage in enumerate(circuit.stages):
        for el in stage:
            name = sink_of(el)
            if name is None:
                continue
            if name in sinks:
                errors.append(Violation(
                    "DUPLICATE_SINK",
                    f"{el.kind} {name!r} already used in stage {sinks[name]}; absorptions would interfere",
                    i,
                ))
            sinks.setdefault(name, i)
    for i, stage in enumerate(circuit.stages):
        if not stage:
            errors.append(Violation("EMPTY_STAGE", "stage has no elements", i))
        seen = {}
        for el in stage:
            if not isinstance(el, Element):
                errors.append(Violation("BAD_ELEMENT", f"{el!r} is not an element", i))
                continue
            for carrier, mode in el.refs():
                if carrier not in known:
                    errors.append(Violation("UNDECLARED_OBJECT", f"{el.kind} references unknown object {carrier!r}", i))
                elif mode not in known[carrier]:
                    errors.append(Violation("UNDECLARED_MODE", f"{el.kind} references undeclared mode {carrier}:{mode}", i))
                key = (carrier, mode)
                if key in seen and seen[key] is not el:
                    errors.append(Violation("MODE_CLASH", f"{el.kind} and {seen[key].kind} share {carrier}:{mode}", i))
                seen.setdefault(key, el)
    return errors


def sink_of(el):
    """Name an element records in labels (absorber sink or detector id)."""
    if isinstance(el, Absorber):
        return el.sink_name
    if isinstance(el, (Detector, Probe)):
        return el.detector_id
    return None


def check(circuit):
    errors = validate(circuit)
    if errors:
        raise CircuitValidationError(errors)


def apply_stage(state, stage, modes=None):
    for el in stage:
        state = apply_element(state, el, modes)
    return state


def evolve(circuit: Circuit, input_state: PureState | None = None) -> PureState:
    """Push ``input_state`` through every stage; absorbed branches are kept
    as terminal labels, so the result has unit norm."""
    check(circuit)
    state = circuit.initial_state() if input_state is None else input_state
    modes = circuit.carrier_modes
    for stage in circuit.stages:
        state = apply_stage(state, stage, modes)
    return state


def evolve_cuts(circuit: Circuit, input_state: PureState | None = None):
    """States at every cut: before stage 1, between stages, after the last."""
    check(circuit)
    state = circuit.initial_state() if input_state is None else input_state
    modes = circuit.carrier_modes
    out = [state]
    for stage in circuit.stages:
        state = apply_stage(state, stage, modes)
        out.append(state)
    return out


@dataclass(frozen=True, order=True)
class TerminalEvent:
    """What an observer sees at the end: exploded objects, clicked
    detectors, and where the photon is if it was not absorbed.

    The canonical text form joins tokens with ``&``: ``explode:<id>``,
    ``click:<id>``, ``photon:<mode>``, or ``absorbed`` when nothing else
    applies. A bare token such as ``D2`` is shorthand for ``click:D2``.
    """

    exploded: tuple = ()
    clicked: tuple = ()
    photon: str = ABSORBED

    def __post_init__(self):
        object.__setattr__(self, "exploded", tuple(sorted(set(self.exploded))))
        object.__setattr__(self, "clicked", tuple(sorted(set(self.clicked))))

    @classmethod
    def of_label(cls, label: BasisLabel):
        return cls(label.exploded, label.clicked, label.photon)

    def matches(self, label: BasisLabel):
        return (
            label.photon == self.photon
            and label.clicked == self.clicked
            and label.exploded == self.exploded
        )

    __call__ = matches

    def __str__(self):
        tokens = [f"explode:{o}" for o in self.exploded]
        tokens += [f"click:{d}" for d in self.clicked]
        if self.photon != ABSORBED:
            tokens.append(f"photon:{self.photon}")
        return " & ".join(tokens) if tokens else "absorbed"

    @classmethod
    def parse(cls, text):
        if isinstance(text, TerminalEvent):
            return text
        exploded, clicked, photon = [], [], ABSORBED
        for raw in str(text).split("&"):
            tok = raw.strip()
            if not tok:
                raise BadParamError(f"empty token in event {text!r}")
            if tok == "absorbed":
                continue
            if ":" in tok:
                key, _, val = tok.partition(":")
                key, val = key.strip(), val.strip()
                if key == "explode":
                    exploded.append(val)
                elif key == "click":
                    clicked.append(val)
                elif key == "photon":
                    photon = val
                else:
                    raise BadParamError(f"unknown event token {tok!r}")
            else:
                clicked.append(tok)
        return cls(tuple(exploded), tuple(clicked), photon)


class OutcomeDistribution(Mapping):
    """Probabilities of terminal events, keyed by :class:`TerminalEvent`.

    Lookups also accept the event's text form, e.g. ``dist["click:D2"]``.
    Events never observed read as probability 0.
    """

    def __init__(self, entries):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._p = dict(sorted((TerminalEvent.parse(k), float(v)) for k, v in items))

    def __getitem__(self, key):
        return self._p.get(TerminalEvent.parse(key), 0.0)

    def __iter__(self):
        return iter(self._p)

    def __len__(self):
        return len(self._p)

    def __contains__(self, key):
        return TerminalEvent.parse(key) in self._p

    def __repr__(self):
        body = ", ".join(f"{k}: {v:.6g}" for k, v in self._p.items())
        return f"OutcomeDistribution({{{body}}})"

    def total(self):
        return math.fsum(self._p.values())

    def as_dict(self):
        return {str(k): v for k, v in self._p.items()}

    def marginal(self, predicate):
        """Total probability of events satisfying ``predicate(event)``."""
        return math.fsum(p for e, p in self._p.items() if predicate(e))


def distribution_of(state: PureState, cutoff=0.0):
    weights = {}
    for label, amp in state.items():
        ev = TerminalEvent.of_label(label)
        weights.setdefault(ev, []).append(abs(amp) ** 2)
    return OutcomeDistribution({ev: math.fsum(w) for ev, w in weights.items() if math.fsum(w) > cutoff})


def outcome_distribution(circuit: Circuit, input_state: PureState | None = None):
    """Squared branch amplitudes grouped by terminal event."""
    return distribution_of(evolve(circuit, input_state))


def conditional_state(circuit, input_state, event):
    """Probability of ``event`` and the renormalized joint state given it.

    The state is ``None`` when the event is impossible.
    """
    event = TerminalEvent.parse(event)
    final = evolve(circuit, input_state)
    return project(final, event.matches)


def negative_result_update(state: PureState, null_predicate):
    """Collapse caused by a detector that did *not* fire.

    Terms matching ``null_predicate`` (the region the silent detector
    covers) are removed and the rest is renormalized.
    """
    prob, cond = project(state, lambda lab: not null_predicate(lab))
    if cond is None:
        raise CertainDetectionError(
            f"no-detection branch has probability {prob:.3g}; the detector fires with certainty"
        )
    return cond


def is_normalized(state, atol=NORM_TOLERANCE):
    return abs(state.norm_squared() - 1.0) <= atol
