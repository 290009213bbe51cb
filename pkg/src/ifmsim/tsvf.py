"""Forward and backward evolving states, no-trace tests and weak values.

Cut ``k`` sits after stage ``k``; cut 0 is the input. The backward state at
the last cut is the post-selected part of the final forward state
(normalized), and earlier backward states follow by applying each stage's
adjoint in reverse. Since forward and backward evolutions are adjoint to
each other, ``<backward|forward>`` is the same at every cut and its square
is the post-selection probability.

The exact adjoint of an absorber or detector can put weight on labels that
record an absorption or click which, at that cut, has not happened yet.
No forward state reaches those labels, so they are dropped from the
reported backward states; overlaps and weak values are unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .elements import apply_adjoint
from .engine import Circuit, TerminalEvent, evolve_cuts, sink_of
from .errors import BadParamError, ImpossiblePostselectionError, ZeroOverlapError
from .state import PHOTON, PureState, inner_product

TRACE_TOLERANCE = 1e-9
OVERLAP_TOLERANCE = 1e-12


def _carrier(label, carrier):
    try:
        return label.carrier_state(carrier)
    except KeyError:
        return None


class Projector:
    """Diagonal projector: every listed carrier must sit in one of its modes.

    ``Projector({"photon": {"p_w"}, "object": {"o_w"}})`` projects on the
    photon and the object both being at ``W``. A plain string names a
    single photon mode; ``"object:o_w"`` names a mode of another carrier.
    """

    def __init__(self, spec):
        if isinstance(spec, Projector):
            spec = spec.spec
        if isinstance(spec, str):
            spec = [spec]
        if not isinstance(spec, dict):
            parsed = {}
            for item in spec:
                carrier, _, mode = item.rpartition(":") if ":" in item else (PHOTON, "", item)
                parsed.setdefault(carrier or PHOTON, set()).add(mode)
            spec = parsed
        if not spec:
            raise BadParamError("empty projector")
        self.spec = {c: frozenset([m] if isinstance(m, str) else m) for c, m in spec.items()}

    def __call__(self, label):
        return all(_carrier(label, c) in modes for c, modes in self.spec.items())

    def __repr__(self):
        body = " & ".join(f"{c}:{'|'.join(sorted(m))}" for c, m in sorted(self.spec.items()))
        return f"Projector({body})"


@dataclass(frozen=True)
class TwoStateVector:
    cuts: tuple
    forward: tuple
    backward: tuple
    postselection: TerminalEvent
    probability: float

    @property
    def overlap(self):
        return inner_product(self.backward[-1], self.forward[-1])

    def overlap_at(self, cut):
        return inner_product(self.backward[cut], self.forward[cut])


def forward_states(circuit: Circuit, input_state: PureState | None = None, drop_terminal=True):
    """Forward-evolving state at every cut.

    By default branches that already ended (absorbed photon) are removed,
    leaving the unnormalized live part. ``drop_terminal=False`` keeps them.
    """
    states = evolve_cuts(circuit, input_state)
    if drop_terminal:
        states = [s.restrict(lambda lab: not lab.is_terminal) for s in states]
    return states


def backward_states(circuit: Circuit, postselection, input_state: PureState | None = None):
    """Backward-evolving state at every cut, for the given post-selection."""
    event = TerminalEvent.parse(postselection)
    final = evolve_cuts(circuit, input_state)[-1]
    return _backward_from(circuit, final, event)[0]


def _backward_from(circuit, final, event):
    part = final.restrict(event.matches)
    prob = part.norm_squared()
    if prob <= final.tolerance**2 or not part:
        raise ImpossiblePostselectionError(f"post-selection {event} has probability {prob:.3g}")
    state = part.normalized()
    out = [state]
    for stage in reversed(circuit.stages):
        for el in reversed(stage):
            state = apply_adjoint(state, el)
        out.append(state)
    out.reverse()
    return [_reachable(s, circuit, k) for k, s in enumerate(out)], prob


def _reachable(state, circuit, cut):
    # records that stages up to ``cut`` can have produced
    done = {sink_of(el) for stage in circuit.stages[:cut] for el in stage} - {None}
    return state.restrict(
        lambda lab: (not lab.sink or lab.sink in done) and all(d in done for d in lab.clicked)
    )


def two_state_vector(circuit, postselection, input_state=None):
    event = TerminalEvent.parse(postselection)
    fwd = evolve_cuts(circuit, input_state)
    back, prob = _backward_from(circuit, fwd[-1], event)
    return TwoStateVector(tuple(range(len(fwd))), tuple(fwd), tuple(back), event, prob)


def _weight(state, projector):
    return math.sqrt(state.restrict(projector).norm_squared())


def segment_weights(tsv: TwoStateVector, cut, projector):
    """Norms of the forward and backward states inside ``projector`` at ``cut``."""
    proj = Projector(projector)
    return _weight(tsv.forward[cut], proj), _weight(tsv.backward[cut], proj)


def trace_free(circuit, input_state, postselection, segment, tsv=None):
    """True when forward or backward state vanishes on ``segment = (cut, mode)``.

    A vanishing factor means a photon post-selected on ``postselection``
    cannot leave a trace there.
    """
    cut, mode = segment
    tsv = tsv or two_state_vector(circuit, postselection, input_state)
    f, b = segment_weights(tsv, cut, mode)
    return f * b <= TRACE_TOLERANCE


def weak_value(circuit, input_state, postselection, projector, cut=None, tsv=None):
    """<back|P|fwd> / <back|fwd> at ``cut``.

    ``projector`` may be given as ``(cut, modes)``, in which case ``cut``
    is taken from it.
    """
    if cut is None:
        cut, projector = projector
    tsv = tsv or two_state_vector(circuit, postselection, input_state)
    proj = Projector(projector)
    back, fwd = tsv.backward[cut], tsv.forward[cut]
    denom = inner_product(back, fwd)
    if abs(denom) < OVERLAP_TOLERANCE:
        raise ZeroOverlapError(f"<backward|forward> = {denom:.3g} at cut {cut}")
    return inner_product(back, fwd.restrict(proj)) / denom


def abl_probability(tsv: TwoStateVector, cut, projector):
    """Probability that a projective test of ``projector`` at ``cut`` would
    succeed, for the pre- and post-selected ensemble."""
    proj = Projector(projector)
    back, fwd = tsv.backward[cut], tsv.forward[cut]
    yes = abs(inner_product(back, fwd.restrict(proj))) ** 2
    no = abs(inner_product(back, fwd.restrict(lambda lab: not proj(lab)))) ** 2
    if yes + no < OVERLAP_TOLERANCE**2:
        raise ZeroOverlapError(f"post-selection impossible at cut {cut}")
    return yes / (yes + no)


def live_modes(tsv: TwoStateVector, carrier=PHOTON):
    """``(cut, mode)`` pairs where the forward or backward state has weight."""
    out = []
    for cut in tsv.cuts:
        modes = set()
        for state in (tsv.forward[cut], tsv.backward[cut]):
            for label, _ in state.items():
                m = _carrier(label, carrier)
                if m is not None and not label.is_terminal:
                    modes.add(m)
        out.extend((cut, m) for m in sorted(modes))
    return out
