"""Sparse complex-amplitude states over labelled classical configurations.

A configuration (:class:`BasisLabel`) records where the single photon is,
the discrete state of every object, and which detectors have clicked.
A :class:`PureState` is an immutable sparse map from labels to amplitudes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

from .errors import AllZeroError

PHOTON = "photon"
ABSORBED = "ABSORBED"
NONE = "NONE"
EXPLODED = "exploded"

DEFAULT_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-9


@dataclass(frozen=True, order=True)
class BasisLabel:
    """One classical configuration of photon, objects and detectors.

    ``objects`` is a sorted tuple of ``(object_id, state)`` pairs and
    ``clicked`` a sorted tuple of detector ids; detectors not listed are
    ready. ``sink`` names the element that absorbed the photon, so that
    absorptions at different places or times stay orthogonal. Use
    :meth:`make` to build from unsorted mappings.
    """

    photon: str
    objects: tuple = ()
    clicked: tuple = ()
    sink: str = ""

    def __post_init__(self):
        objects = tuple(sorted(self.objects))
        clicked = tuple(sorted(set(self.clicked)))
        ids = [oid for oid, _ in objects]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate object id in {objects}")
        if self.photon != ABSORBED and any(s == EXPLODED for _, s in objects):
            raise ValueError("an exploded object requires an absorbed photon")
        if self.sink and self.photon != ABSORBED:
            raise ValueError("only an absorbed photon has a sink")
        object.__setattr__(self, "objects", objects)
        object.__setattr__(self, "clicked", clicked)

    @classmethod
    def make(cls, photon, objects: Mapping[str, str] | None = None, clicked=(), sink=""):
        return cls(photon, tuple((objects or {}).items()), tuple(clicked), sink)

    def object_state(self, object_id):
        for oid, s in self.objects:
            if oid == object_id:
                return s
        raise KeyError(object_id)

    def has_object(self, object_id):
        return any(oid == object_id for oid, _ in self.objects)

    def carrier_state(self, carrier):
        """State of a carrier: the photon's mode, or an object's state."""
        if carrier == PHOTON:
            return self.photon
        return self.object_state(carrier)

    def with_carrier(self, carrier, state):
        if carrier == PHOTON:
            sink = self.sink if state == ABSORBED else ""
            return BasisLabel(state, self.objects, self.clicked, sink)
        objects = tuple((oid, state if oid == carrier else s) for oid, s in self.objects)
        if carrier not in {oid for oid, _ in self.objects}:
            objects += ((carrier, state),)
        return BasisLabel(self.photon, objects, self.clicked, self.sink)

    def with_sink(self, sink):
        return BasisLabel(self.photon, self.objects, self.clicked, sink)

    def is_clicked(self, detector_id):
        return detector_id in self.clicked

    def with_click(self, detector_id):
        return BasisLabel(self.photon, self.objects, self.clicked + (detector_id,), self.sink)

    def without_click(self, detector_id):
        return BasisLabel(
            self.photon, self.objects, tuple(d for d in self.clicked if d != detector_id), self.sink
        )

    @property
    def exploded(self):
        return tuple(oid for oid, s in self.objects if s == EXPLODED)

    @property
    def is_terminal(self):
        return self.photon == ABSORBED

    def __str__(self):
        parts = [f"photon={self.photon}"]
        parts += [f"{oid}={s}" for oid, s in self.objects]
        if self.clicked:
            parts.append("clicked=" + ",".join(self.clicked))
        if self.sink:
            parts.append(f"sink={self.sink}")
        return "|" + " ".join(parts) + ">"


class PureState:
    """Immutable sparse superposition of :class:`BasisLabel` terms.

    The constructor stores amplitudes as given (after merging and pruning
    terms below ``tolerance``); it does not normalize. Use :func:`superpose`
    for a normalized state.
    """

    __slots__ = ("_terms", "_index", "tolerance")

    def __init__(self, terms=(), tolerance=DEFAULT_TOLERANCE):
        groups = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for label, amp in items:
            if not isinstance(label, BasisLabel):
                raise TypeError(f"expected BasisLabel, got {type(label).__name__}")
            groups.setdefault(label, []).append(complex(amp))
        # fsum makes duplicate merging independent of term order
        acc = {
            lab: (amps[0] if len(amps) == 1 else complex(
                math.fsum(a.real for a in amps), math.fsum(a.imag for a in amps)))
            for lab, amps in groups.items()
        }
        for amp in acc.values():
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ValueError("non-finite amplitude")
        kept = sorted((lab, amp) for lab, amp in acc.items() if abs(amp) >= tolerance)
        self._terms = tuple(kept)
        self._index = dict(kept)
        self.tolerance = tolerance

    @classmethod
    def basis(cls, label, tolerance=DEFAULT_TOLERANCE):
        return cls([(label, 1.0)], tolerance)

    def __iter__(self) -> Iterator[tuple[BasisLabel, complex]]:
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __contains__(self, label):
        return label in self._index

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        body = " + ".join(f"({amp:.6g}){lab}" for lab, amp in self._terms)
        return f"PureState({body or '0'})"

    @property
    def labels(self):
        return tuple(lab for lab, _ in self._terms)

    def items(self):
        return self._terms

    def amplitude(self, label):
        return self._index.get(label, 0j)

    def norm_squared(self):
        return math.fsum(abs(a) ** 2 for _, a in self._terms)

    def norm(self):
        return math.sqrt(self.norm_squared())

    def normalized(self):
        n = self.norm()
        if n < self.tolerance:
            raise AllZeroError("cannot normalize a zero state")
        return PureState([(lab, a / n) for lab, a in self._terms], self.tolerance)

    def scaled(self, factor):
        return PureState([(lab, a * factor) for lab, a in self._terms], self.tolerance)

    def restrict(self, predicate):
        """Unnormalized restriction to labels satisfying ``predicate``."""
        return PureState([(lab, a) for lab, a in self._terms if predicate(lab)], self.tolerance)

    def approx_equal(self, other, atol=1e-9):
        keys = set(self._index) | set(other._index)
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= atol for k in keys)


def superpose(terms: Iterable, tolerance=DEFAULT_TOLERANCE) -> PureState:
    """Merge duplicate labels, drop negligible terms and normalize."""
    state = PureState(list(terms), tolerance)
    if not state:
        raise AllZeroError("every amplitude is below tolerance")
    return state.normalized()


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for label, amp in small.items():
        other = large.amplitude(label)
        if other:
            total += amp.conjugate() * other if small is a else other.conjugate() * amp
    return total


def project(state: PureState, predicate: Callable[[BasisLabel], bool]):
    """Projective measurement onto the labels matching ``predicate``.

    Returns ``(probability, conditional_state)``; the conditional state is
    ``None`` when the probability does not exceed ``tolerance**2``.
    """
    part = state.restrict(predicate)
    prob = part.norm_squared()
    if prob <= state.tolerance**2 or not part:
        return prob, None
    return prob, part.normalized()


def equal_up_to_global_phase(a: PureState, b: PureState, atol=1e-9):
    if set(a.labels) != set(b.labels):
        return False
    if not a:
        return True
    ref = a.labels[0]
    ratio = b.amplitude(ref) / a.amplitude(ref)
    if abs(abs(ratio) - 1) > atol:
        return False
    phase = cmath.exp(1j * cmath.phase(ratio))
    return all(abs(a.amplitude(k) * phase - b.amplitude(k)) <= atol for k in a.labels)


def carrier_factor(state: PureState, carrier):
    """Amplitudes of ``carrier`` alone, if it is unentangled with the rest.

    Returns ``{carrier_state: amplitude}`` normalized, with the global phase
    fixed so the largest amplitude is real and positive. Raises
    ``ValueError`` when the state does not factorize.
    """
    groups: dict = {}
    for label, amp in state.items():
        if carrier == PHOTON:
            rest = (label.objects, label.clicked)
        else:
            rest = (label.photon, tuple(o for o in label.objects if o[0] != carrier), label.clicked)
        groups.setdefault(rest, {})[label.carrier_state(carrier)] = amp
    if not groups:
        raise AllZeroError("empty state")
    # reference remainder: the one with the largest weight
    ref_rest = max(groups, key=lambda r: sum(abs(a) ** 2 for a in groups[r].values()))
    ref = groups[ref_rest]
    norm = math.sqrt(sum(abs(a) ** 2 for a in ref.values()))
    factor = {s: a / norm for s, a in ref.items()}
    pivot = max(factor, key=lambda s: abs(factor[s]))
    for rest, comp in groups.items():
        if set(comp) - set(factor):
            raise ValueError(f"carrier {carrier!r} is entangled with the rest of the state")
        coeff = comp.get(pivot, 0j) / factor[pivot]
        for s, f in factor.items():
            if abs(comp.get(s, 0j) - coeff * f) > 1e-9:
                raise ValueError(f"carrier {carrier!r} is entangled with the rest of the state")
    phase = abs(factor[pivot]) / factor[pivot]
    return {s: f * phase for s, f in sorted(factor.items())}
