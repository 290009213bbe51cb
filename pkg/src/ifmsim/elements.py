"""Circuit components acting on single basis labels.

Every element is a unitary map on the label space. It splits the labels it
touches into small blocks (the two input and two output ports of a beam
splitter, a photon before and after a detector, ...) and acts inside each
block; labels outside all blocks pass unchanged. :meth:`Element.branch`
gives the image of one label and :meth:`Element.sources` lists every label
with a component on a given one, which is all forward and adjoint
evolution need.

Where a block contains states a well-formed circuit never feeds in (a
photon already in an output port, a detector that already clicked), the
element maps them back so that the whole map stays unitary. Absorption and
detection are therefore recorded in the label rather than thrown away.

Elements act on a *carrier*: the photon by default, or an object whose
discrete states play the role of modes (the second particle of the nested
interferometer is such an object).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParamError, UnknownModeError
from .state import ABSORBED, EXPLODED, PHOTON, BasisLabel, PureState

REAL = "real"
SWAPPED = "swapped"
SYMMETRIC = "symmetric"
CONVENTIONS = (REAL, SWAPPED, SYMMETRIC)

UNITARY_TOLERANCE = 1e-12


def _check_unit_interval(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise BadParamError(f"{name}={value!r} outside [0, 1]")


def bs_matrix(transmittance, convention=REAL):
    """2x2 beam-splitter matrix, ``M[out, in]``.

    ``real``: ``[[sqrt(T), sqrt(R)], [sqrt(R), -sqrt(T)]]``, the real form
    in which input port ``b`` picks up the minus sign. ``swapped`` moves the
    sign onto input ``a``; ``symmetric`` is the ``i``-phase splitter.
    """
    _check_unit_interval("T", transmittance)
    t = math.sqrt(transmittance)
    r = math.sqrt(1.0 - transmittance)
    if convention == REAL:
        m = np.array([[t, r], [r, -t]], dtype=complex)
    elif convention == SWAPPED:
        m = np.array([[-t, r], [r, t]], dtype=complex)
    elif convention == SYMMETRIC:
        m = np.array([[t, 1j * r], [1j * r, t]], dtype=complex)
    else:
        raise BadParamError(f"unknown beam splitter convention {convention!r}")
    return m


def coupler_matrix(theta):
    """Rotation between two cavity modes per round trip."""
    if not (0.0 <= theta <= math.pi / 2) or math.isnan(theta):
        raise BadParamError(f"theta={theta!r} outside [0, pi/2]")
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def is_unitary(matrix, atol=UNITARY_TOLERANCE):
    m = np.asarray(matrix)
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol, rtol=0))


def _as_tuple_matrix(m):
    return tuple(tuple(complex(x) for x in row) for row in np.asarray(m))


def _maybe(make):
    # candidates that would violate label invariants are never populated
    try:
        return make()
    except ValueError:
        return None


def _carrier_state(label, carrier):
    try:
        return label.carrier_state(carrier)
    except KeyError:
        return None


class Element:
    """Base class. Subclasses are frozen dataclasses."""

    kind = "element"
    #: False for elements that absorb or record (absorbers, detectors, probes)
    linear_optics = True

    def refs(self):
        """``(carrier, mode)`` pairs this element touches."""
        raise NotImplementedError

    def branch(self, label):
        raise NotImplementedError

    def sources(self, label):
        """Labels that may have a component on ``label`` after this element."""
        return (label,)

    def inverse(self):
        raise TypeError(f"{self.kind} has no element inverse")


# --- two-port linear optics ---------------------------------------------

def _two_port_branch(label, carrier, ins, outs, matrix):
    s = _carrier_state(label, carrier)
    if s in ins:
        col = ins.index(s)
        return tuple(
            (label.with_carrier(carrier, outs[row]), matrix[row][col])
            for row in (0, 1)
            if matrix[row][col] != 0
        )
    if s in outs:
        # completion: output-port occupancy is sent back through M^dagger
        col = outs.index(s)
        return tuple(
            (label.with_carrier(carrier, ins[row]), matrix[col][row].conjugate())
            for row in (0, 1)
            if matrix[col][row] != 0
        )
    return ((label, 1.0),)


def _two_port_sources(label, carrier, ins, outs):
    s = _carrier_state(label, carrier)
    if s in outs:
        return tuple(label.with_carrier(carrier, m) for m in ins)
    if s in ins:
        return tuple(label.with_carrier(carrier, m) for m in outs)
    return (label,)


def _check_ports(ins, outs):
    if len(set(ins)) != 2 or len(set(outs)) != 2:
        raise BadParamError(f"ports must be distinct: in={ins} out={outs}")
    if set(ins) & set(outs) and set(ins) != set(outs):
        raise BadParamError(f"inputs {ins} and outputs {outs} must coincide or be disjoint")


@dataclass(frozen=True)
class TwoModeUnitary(Element):
    """General 2x2 unitary from ports ``ins`` to ports ``outs``."""

    ins: tuple
    outs: tuple
    matrix: tuple  # M[out, in]
    carrier: str = PHOTON
    kind = "unitary2"

    def __post_init__(self):
        object.__setattr__(self, "ins", tuple(self.ins))
        object.__setattr__(self, "outs", tuple(self.outs))
        object.__setattr__(self, "matrix", _as_tuple_matrix(self.matrix))
        _check_ports(self.ins, self.outs)
        if not is_unitary(self.matrix, 1e-10):
            raise BadParamError("matrix is not unitary")

    def refs(self):
        return tuple((self.carrier, m) for m in dict.fromkeys(self.ins + self.outs))

    def branch(self, label):
        return _two_port_branch(label, self.carrier, self.ins, self.outs, self.matrix)

    def sources(self, label):
        return _two_port_sources(label, self.carrier, self.ins, self.outs)

    def inverse(self):
        m = np.asarray(self.matrix).conj().T
        return TwoModeUnitary(self.outs, self.ins, m, self.carrier)


@dataclass(frozen=True)
class BeamSplitter(Element):
    """Beam splitter from ``(in_a, in_b)`` to ``(out_a, out_b)``.

    Input ``a`` reaches ``out_a`` with amplitude ``sqrt(T)``.
    """

    in_a: str
    in_b: str
    out_a: str
    out_b: str
    transmittance: float = 0.5
    convention: str = REAL
    carrier: str = PHOTON
    kind = "beam_splitter"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise BadParamError(f"unknown beam splitter convention {self.convention!r}")
        _check_ports((self.in_a, self.in_b), (self.out_a, self.out_b))
        m = bs_matrix(self.transmittance, self.convention)
        object.__setattr__(self, "_m", _as_tuple_matrix(m))

    @property
    def matrix(self):
        return bs_matrix(self.transmittance, self.convention)

    @property
    def ins(self):
        return (self.in_a, self.in_b)

    @property
    def outs(self):
        return (self.out_a, self.out_b)

    def refs(self):
        return tuple((self.carrier, m) for m in dict.fromkeys(self.ins + self.outs))

    def branch(self, label):
        return _two_port_branch(label, self.carrier, self.ins, self.outs, self._m)

    def sources(self, label):
        return _two_port_sources(label, self.carrier, self.ins, self.outs)

    def inverse(self):
        m = np.asarray(self._m).conj().T
        return TwoModeUnitary(self.outs, self.ins, m, self.carrier)


@dataclass(frozen=True)
class Coupler(Element):
    """Partially reflecting mirror between two cavity modes, acting in place."""

    left: str
    right: str
    theta: float
    carrier: str = PHOTON
    kind = "coupler"

    def __post_init__(self):
        if self.left == self.right:
            raise BadParamError("coupler needs two distinct modes")
        object.__setattr__(self, "_m", _as_tuple_matrix(coupler_matrix(self.theta)))

    @property
    def matrix(self):
        return coupler_matrix(self.theta)

    def refs(self):
        return ((self.carrier, self.left), (self.carrier, self.right))

    def branch(self, label):
        ports = (self.left, self.right)
        return _two_port_branch(label, self.carrier, ports, ports, self._m)

    def sources(self, label):
        ports = (self.left, self.right)
        return _two_port_sources(label, self.carrier, ports, ports)

    def inverse(self):
        ports = (self.left, self.right)
        return TwoModeUnitary(ports, ports, np.asarray(self._m).conj().T, self.carrier)


@dataclass(frozen=True)
class Mirror(Element):
    """Routes ``in_mode`` to ``out_mode`` with unit amplitude."""

    in_mode: str
    out_mode: str
    carrier: str = PHOTON
    kind = "mirror"

    def refs(self):
        return tuple((self.carrier, m) for m in dict.fromkeys((self.in_mode, self.out_mode)))

    def branch(self, label):
        s = _carrier_state(label, self.carrier)
        if s == self.in_mode:
            return ((label.with_carrier(self.carrier, self.out_mode), 1.0),)
        if s == self.out_mode:
            return ((label.with_carrier(self.carrier, self.in_mode), 1.0),)
        return ((label, 1.0),)

    def sources(self, label):
        # a swap is its own inverse
        return tuple(new for new, _ in self.branch(label))

    def inverse(self):
        return Mirror(self.out_mode, self.in_mode, self.carrier)


@dataclass(frozen=True)
class PhaseShift(Element):
    mode: str
    phi: float
    carrier: str = PHOTON
    kind = "phase"

    def refs(self):
        return ((self.carrier, self.mode),)

    def branch(self, label):
        if _carrier_state(label, self.carrier) == self.mode:
            return ((label, cmath.exp(1j * self.phi)),)
        return ((label, 1.0),)

    def inverse(self):
        return PhaseShift(self.mode, -self.phi, self.carrier)


# --- absorbing and recording elements ------------------------------------

@dataclass(frozen=True)
class Absorber(Element):
    """Object that may sit in photon mode ``mode``.

    The object is in the interaction region when its state equals
    ``present_state``. A photon there is transmitted with amplitude
    ``sqrt(transmittance) * exp(i * transmission_phase)`` and absorbed with
    amplitude ``sqrt(1 - transmittance)``. Absorption by an explosive object
    sets the object state to ``exploded``; a non-explosive object keeps its
    state. Either way the photon becomes ``ABSORBED`` with its sink set to
    :attr:`sink_name`. Repeated absorbers need distinct ``site`` names so
    their absorption events stay distinguishable.
    """

    mode: str
    object_id: str
    transmittance: float = 0.0
    explosive: bool = True
    present_state: str = "in"
    transmission_phase: float = 0.0
    site: str = ""
    kind = "absorber"
    linear_optics = False

    def __post_init__(self):
        _check_unit_interval("alpha", self.transmittance)
        a = math.sqrt(self.transmittance) * cmath.exp(1j * self.transmission_phase)
        object.__setattr__(self, "_a", a)
        object.__setattr__(self, "_b", math.sqrt(1.0 - self.transmittance))

    @property
    def sink_name(self):
        return self.site or f"{self.object_id}@{self.mode}"

    @property
    def _after(self):
        return EXPLODED if self.explosive else self.present_state

    def refs(self):
        return ((PHOTON, self.mode), (self.object_id, self.present_state))

    def _is_present(self, label):
        return label.photon == self.mode and _carrier_state(label, self.object_id) == self.present_state

    def _is_absorbed(self, label):
        return (
            label.photon == ABSORBED
            and label.sink == self.sink_name
            and _carrier_state(label, self.object_id) == self._after
        )

    def _absorbed(self, label):
        objects = tuple((o, self._after if o == self.object_id else s) for o, s in label.objects)
        return _maybe(lambda: BasisLabel(ABSORBED, objects, label.clicked, self.sink_name))

    def _present(self, label):
        objects = tuple((o, self.present_state if o == self.object_id else s) for o, s in label.objects)
        return _maybe(lambda: BasisLabel(self.mode, objects, label.clicked))

    def branch(self, label):
        a, b = self._a, self._b
        if self._is_present(label):
            other = self._absorbed(label)
            out = [(label, a), (other, b)]
        elif self._is_absorbed(label):
            # completion of [[a, -b], [b, conj(a)]]; unreachable in forward use
            other = self._present(label)
            out = [(other, -b), (label, a.conjugate())]
        else:
            return ((label, 1.0),)
        if other is None:
            return ((label, 1.0),)
        return tuple((lab, amp) for lab, amp in out if amp != 0)

    def sources(self, label):
        if self._is_present(label):
            other = self._absorbed(label)
        elif self._is_absorbed(label):
            other = self._present(label)
        else:
            return (label,)
        return (label,) if other is None else (label, other)


class _Swap(Element):
    """Elements that exchange a 'before' label with an 'after' label."""

    linear_optics = False

    def _forward(self, label):
        raise NotImplementedError

    def _backward(self, label):
        raise NotImplementedError

    def branch(self, label):
        other = self._forward(label) or self._backward(label)
        return ((other or label, 1.0),)

    def sources(self, label):
        return (self._forward(label) or self._backward(label) or label,)


@dataclass(frozen=True)
class Detector(_Swap):
    """Absorbs the carrier at ``mode`` and records a click."""

    mode: str
    detector_id: str
    carrier: str = PHOTON
    kind = "detector"

    def refs(self):
        return ((self.carrier, self.mode),)

    def _forward(self, label):
        if _carrier_state(label, self.carrier) != self.mode or label.is_clicked(self.detector_id):
            return None
        new = label.with_carrier(self.carrier, ABSORBED).with_click(self.detector_id)
        return new.with_sink(self.detector_id) if self.carrier == PHOTON else new

    def _backward(self, label):
        if not label.is_clicked(self.detector_id) or _carrier_state(label, self.carrier) != ABSORBED:
            return None
        if self.carrier == PHOTON and label.sink != self.detector_id:
            return None
        return _maybe(lambda: label.without_click(self.detector_id).with_carrier(self.carrier, self.mode))


@dataclass(frozen=True)
class Probe(_Swap):
    """Non-demolition coincidence marker.

    Records a click on ``detector_id`` for every label in which each
    ``(carrier, mode)`` condition holds; carriers are left in place.
    """

    detector_id: str
    conditions: tuple = field(default_factory=tuple)
    kind = "probe"

    def __post_init__(self):
        conds = tuple((str(c), str(m)) for c, m in self.conditions)
        if not conds:
            raise BadParamError("probe needs at least one condition")
        object.__setattr__(self, "conditions", conds)

    def refs(self):
        return self.conditions

    def _fires(self, label):
        return all(_carrier_state(label, c) == m for c, m in self.conditions)

    def _forward(self, label):
        if self._fires(label) and not label.is_clicked(self.detector_id):
            return label.with_click(self.detector_id)
        return None

    def _backward(self, label):
        if self._fires(label) and label.is_clicked(self.detector_id):
            return label.without_click(self.detector_id)
        return None


ELEMENT_TYPES = {
    cls.kind: cls
    for cls in (BeamSplitter, Coupler, Mirror, PhaseShift, Absorber, Detector, Probe, TwoModeUnitary)
}


def check_modes(element, modes):
    """Raise :class:`UnknownModeError` if ``element`` references an unknown mode.

    ``modes`` maps carrier id to the collection of its allowed states.
    """
    for carrier, mode in element.refs():
        known = modes.get(carrier)
        if known is None:
            raise UnknownModeError(f"{element.kind} references unknown carrier {carrier!r}")
        if mode not in known:
            raise UnknownModeError(f"{element.kind} references unknown mode {carrier}:{mode}")


def apply_element(state: PureState, element: Element, modes=None, normalize=False) -> PureState:
    """Apply ``element`` term by term.

    Absorbed branches stay in the result as terminal labels, so the norm is
    preserved and branch probabilities keep their meaning. Pass ``modes``
    (carrier -> allowed states) to check the element against a circuit.
    """
    if modes is not None:
        check_modes(element, modes)
    out = []
    for label, amp in state.items():
        for new, a in element.branch(label):
            out.append((new, amp * a))
    result = PureState(out, state.tolerance)
    return result.normalized() if normalize else result


def apply_adjoint(state: PureState, element: Element) -> PureState:
    """Apply the adjoint (here: inverse) of ``element``."""
    candidates = dict.fromkeys(src for label, _ in state.items() for src in element.sources(label))
    out = []
    for src in candidates:
        total = 0j
        for new, a in element.branch(src):
            y = state.amplitude(new)
            if y:
                total += complex(a).conjugate() * y
        if total:
            out.append((src, total))
    return PureState(out, state.tolerance)
