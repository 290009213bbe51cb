"""Scenario files: YAML documents describing a circuit, a protocol and sampling.

Layout::

    name: ev_bomb
    description: free text            # optional
    circuit:
      modes: [src, vac, free, int]
      source: src                     # optional, defaults to the first mode
      objects:                        # optional
        - id: bomb
          states: [in, out]
          initial: {in: 1.0}          # amplitude: number or [re, im]
      stages:
        - - {kind: beam_splitter, in: [src, vac], out: [free, int], T: 0.5}
        - - {kind: absorber, mode: int, object: bomb}
      postselection: "click:D2"       # optional terminal event
    protocol:                         # optional
      name: ev_single_shot
      params: {T: 0.5, obj: bomb}
    sampling:                         # optional
      shots: 10000
      seed: 7

Element records by ``kind`` (optional keys with their defaults):

=============== ==========================================================
beam_splitter   ``in: [a, b]``, ``out: [a, b]``, ``T: 0.5``,
                ``convention: real``, ``carrier: photon``
coupler         ``modes: [left, right]``, ``theta``, ``carrier: photon``
mirror          ``from``, ``to``, ``carrier: photon``
phase           ``mode``, ``phi``, ``carrier: photon``
absorber        ``mode``, ``object``, ``alpha: 0.0``, ``explosive: true``,
                ``present: in``, ``phase: 0.0``, ``site: ""``
detector        ``mode``, ``id``, ``carrier: photon``
probe           ``id``, ``when: {carrier: mode, ...}``
unitary2        ``in``, ``out``, ``matrix`` (2x2, entries number or
                ``[re, im]``), ``carrier: photon``
=============== ==========================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import yaml

from .elements import (
    Absorber,
    BeamSplitter,
    Coupler,
    Detector,
    Mirror,
    PhaseShift,
    Probe,
    TwoModeUnitary,
)
from .engine import Circuit, ObjectSpec, TerminalEvent, validate
from .errors import BadParamError, IFMError, ScenarioError, ScenarioIOError
from .protocols import PROTOCOLS
from .state import PHOTON

SCHEMA_VERSION = 1
MAX_SEED = 2**64 - 1
BUNDLED = (
    "ev_bomb", "ev_empty", "ev_asymmetric", "penrose", "wheeler_open",
    "renninger_sectors", "dicke_ev", "hardy", "zeno",
)

_TOP_KEYS = {"name", "description", "circuit", "protocol", "sampling"}
_CIRCUIT_KEYS = {"modes", "source", "objects", "stages", "postselection"}


@dataclass(frozen=True)
class Protocol:
    name: str
    params: tuple = ()  # sorted ((key, value), ...)

    def __post_init__(self):
        items = self.params.items() if isinstance(self.params, dict) else self.params
        object.__setattr__(self, "params", tuple(sorted((str(k), _freeze(v)) for k, v in items)))

    def kwargs(self):
        return {k: _thaw(v) for k, v in self.params}


@dataclass(frozen=True)
class Sampling:
    shots: int
    seed: int = 0


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    circuit: Circuit
    protocol: Protocol | None = None
    sampling: Sampling | None = None
    description: str = field(default="", compare=True)


def _freeze(v):
    if isinstance(v, dict):
        return tuple(sorted((str(k), _freeze(x)) for k, x in v.items()))
    if isinstance(v, list):
        return tuple(_freeze(x) for x in v)
    return v


def _thaw(v):
    # tuples of pairs came from mappings
    if isinstance(v, tuple):
        if v and all(isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], str) for x in v):
            return {k: _thaw(x) for k, x in v}
        return [_thaw(x) for x in v]
    return v


# --- YAML loading with line numbers --------------------------------------

class _Node:
    """Plain value plus the line it came from (1-based)."""

    __slots__ = ("value", "line")

    def __init__(self, value, line):
        self.value, self.line = value, line


def _compose(text):
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark else None
        raise ScenarioError(f"malformed YAML: {getattr(exc, 'problem', exc)}", line=line) from None
    if root is None:
        raise ScenarioError("empty scenario")
    return _wrap(root)


def _wrap(node):
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = _scalar(k)
            if key in out:
                raise ScenarioError(f"duplicate key {key!r}", line=k.start_mark.line + 1)
            out[key] = _wrap(v)
        return _Node(out, line)
    if isinstance(node, yaml.SequenceNode):
        return _Node([_wrap(v) for v in node.value], line)
    return _Node(_scalar(node), line)


def _scalar(node):
    if not isinstance(node, yaml.ScalarNode):
        raise ScenarioError("mapping keys must be scalars", line=node.start_mark.line + 1)
    loader = yaml.SafeLoader("")
    try:
        return loader.construct_object(node)
    finally:
        loader.dispose()


def _plain(node):
    if isinstance(node.value, dict):
        return {k: _plain(v) for k, v in node.value.items()}
    if isinstance(node.value, list):
        return [_plain(v) for v in node.value]
    return node.value


class _Reader:
    """Typed field access that reports the field path and line on failure."""

    def __init__(self, node, path):
        self.node, self.path = node, path

    def fail(self, msg, node=None, code=None, key=None):
        where = (f"{self.path}.{key}" if self.path else key) if key else self.path
        n = node or self.node
        raise ScenarioError(msg, code=code, field=where, line=n.line)

    def mapping(self, allowed=None):
        if not isinstance(self.node.value, dict):
            self.fail("expected a mapping")
        if allowed is not None:
            extra = sorted(set(self.node.value) - set(allowed))
            if extra:
                self.fail(f"unknown key(s) {extra}", self.node.value[extra[0]], key=extra[0])
        return self

    def has(self, key):
        return key in self.node.value

    def child(self, key):
        if key not in self.node.value:
            self.fail(f"missing required key {key!r}")
        return _Reader(self.node.value[key], f"{self.path}.{key}" if self.path else key)

    def get(self, key, kind, default=None, required=False):
        if key not in self.node.value:
            if required:
                self.fail(f"missing required key {key!r}")
            return default
        return self.child(key).as_(kind)

    def as_(self, kind):
        v = self.node.value
        if kind is str:
            if isinstance(v, (dict, list)) or v is None:
                self.fail("expected a string")
            return str(v)
        if kind is float:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                self.fail("expected a number")
            return float(v)
        if kind is int:
            if isinstance(v, bool) or not isinstance(v, int):
                self.fail("expected an integer")
            return v
        if kind is bool:
            if not isinstance(v, bool):
                self.fail("expected true or false")
            return v
        if kind is complex:
            if isinstance(v, list):
                parts = [r.as_(float) for r in self.items()]
                if len(parts) != 2:
                    self.fail("complex amplitude must be [re, im]")
                return complex(*parts)
            return complex(self.as_(float))
        if kind is list:
            if not isinstance(v, list):
                self.fail("expected a list")
            return self.items()
        raise TypeError(kind)

    def items(self):
        if not isinstance(self.node.value, list):
            self.fail("expected a list")
        return [_Reader(n, f"{self.path}[{i}]") for i, n in enumerate(self.node.value)]

    def strings(self, key, n=None):
        vals = [r.as_(str) for r in self.child(key).as_(list)]
        if n is not None and len(vals) != n:
            self.child(key).fail(f"expected {n} entries, got {len(vals)}")
        return vals

    def entries(self):
        return [(k, _Reader(v, f"{self.path}.{k}")) for k, v in self.mapping().node.value.items()]


# --- elements ---------------------------------------------------------------

def _bs(r):
    a, b = r.strings("in", 2)
    c, d = r.strings("out", 2)
    return BeamSplitter(a, b, c, d, r.get("T", float, 0.5), r.get("convention", str, "real"),
                        r.get("carrier", str, PHOTON))


def _coupler(r):
    left, right = r.strings("modes", 2)
    return Coupler(left, right, r.get("theta", float, required=True), r.get("carrier", str, PHOTON))


def _mirror(r):
    return Mirror(r.get("from", str, required=True), r.get("to", str, required=True),
                  r.get("carrier", str, PHOTON))


def _phase(r):
    return PhaseShift(r.get("mode", str, required=True), r.get("phi", float, required=True),
                      r.get("carrier", str, PHOTON))


def _absorber(r):
    return Absorber(
        r.get("mode", str, required=True), r.get("object", str, required=True),
        r.get("alpha", float, 0.0), r.get("explosive", bool, True), r.get("present", str, "in"),
        r.get("phase", float, 0.0), r.get("site", str, ""),
    )


def _detector(r):
    return Detector(r.get("mode", str, required=True), r.get("id", str, required=True),
                    r.get("carrier", str, PHOTON))


def _probe(r):
    when = [(c, v.as_(str)) for c, v in r.child("when").entries()]
    return Probe(r.get("id", str, required=True), tuple(when))


def _unitary(r):
    rows = r.child("matrix").as_(list)
    matrix = [[x.as_(complex) for x in row.as_(list)] for row in rows]
    if len(matrix) != 2 or any(len(row) != 2 for row in matrix):
        r.child("matrix").fail("matrix must be 2x2")
    return TwoModeUnitary(tuple(r.strings("in", 2)), tuple(r.strings("out", 2)), matrix,
                          r.get("carrier", str, PHOTON))


_ELEMENT_KEYS = {
    "beam_splitter": ({"in", "out", "T", "convention", "carrier"}, _bs),
    "coupler": ({"modes", "theta", "carrier"}, _coupler),
    "mirror": ({"from", "to", "carrier"}, _mirror),
    "phase": ({"mode", "phi", "carrier"}, _phase),
    "absorber": ({"mode", "object", "alpha", "explosive", "present", "phase", "site"}, _absorber),
    "detector": ({"mode", "id", "carrier"}, _detector),
    "probe": ({"id", "when"}, _probe),
    "unitary2": ({"in", "out", "matrix", "carrier"}, _unitary),
}


def _element(r):
    r.mapping()
    kind = r.get("kind", str, required=True)
    if kind not in _ELEMENT_KEYS:
        r.fail(f"unknown element kind {kind!r}; expected one of {sorted(_ELEMENT_KEYS)}",
               r.node.value["kind"], code="UNKNOWN_ELEMENT_KIND", key="kind")
    keys, build = _ELEMENT_KEYS[kind]
    r.mapping(keys | {"kind"})
    try:
        return build(r)
    except BadParamError as exc:
        r.fail(f"bad {kind}: {exc.args[0]}")


def _object(r):
    r.mapping({"id", "states", "initial"})
    oid = r.get("id", str, required=True)
    states = r.strings("states")
    initial = [(s, v.as_(complex)) for s, v in r.child("initial").entries()]
    return ObjectSpec(oid, tuple(states), tuple(initial))


def _circuit(r):
    r.mapping(_CIRCUIT_KEYS)
    modes = r.strings("modes")
    objects = [_object(o) for o in r.child("objects").as_(list)] if r.has("objects") else []
    stages = []
    for s in r.child("stages").as_(list):
        stages.append(tuple(_element(e) for e in s.as_(list)))
    post = None
    if r.has("postselection"):
        try:
            post = TerminalEvent.parse(r.get("postselection", str))
        except BadParamError as exc:
            r.child("postselection").fail(exc.args[0])
    circuit = Circuit(tuple(modes), tuple(stages), tuple(objects), r.get("source", str), post)
    violations = validate(circuit)
    if violations:
        detail = "; ".join(str(v) for v in violations)
        raise ScenarioError(
            f"circuit is invalid: {detail}", code="VALIDATION_ERROR",
            field=r.path, line=r.node.line, violations=tuple(violations),
        )
    return circuit


def _protocol(r):
    r.mapping({"name", "params"})
    name = r.get("name", str, required=True)
    if name not in PROTOCOLS:
        r.child("name").fail(f"unknown protocol {name!r}; expected one of {sorted(PROTOCOLS)}")
    params = {}
    if r.has("params"):
        params = _plain(r.child("params").mapping().node)
    return Protocol(name, params)


def _sampling(r):
    r.mapping({"shots", "seed"})
    shots = r.get("shots", int, required=True)
    seed = r.get("seed", int, 0)
    if shots < 1:
        r.child("shots").fail("shots must be at least 1")
    if not 0 <= seed <= MAX_SEED:
        r.child("seed").fail("seed must be an unsigned 64-bit integer")
    return Sampling(shots, seed)


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse and validate scenario text.

    Raises :class:`ScenarioError` with code ``PARSE_ERROR``,
    ``UNKNOWN_ELEMENT_KIND`` or ``VALIDATION_ERROR``; the error carries the
    dotted field path and line number.
    """
    root = _Reader(_compose(text), "")
    root.mapping(_TOP_KEYS)
    name = root.get("name", str, required=True)
    circuit = _circuit(root.child("circuit"))
    protocol = _protocol(root.child("protocol")) if root.has("protocol") else None
    sampling = _sampling(root.child("sampling")) if root.has("sampling") else None
    return ScenarioSpec(name, circuit, protocol, sampling, root.get("description", str, ""))


def load_scenario(path) -> ScenarioSpec:
    """Read a scenario from a file path, or a bundled one by bare name."""
    text = None
    name = str(path)
    stem = name[: -len(".scenario")] if name.endswith(".scenario") else name
    if "/" not in name and stem in BUNDLED:
        try:
            with open(name, encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError:
            text = bundled_text(stem)
    if text is None:
        try:
            with open(name, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ScenarioIOError(f"cannot read {name}: {exc.strerror}") from None
    return parse_scenario(text)


def bundled_text(name):
    if name not in BUNDLED:
        raise ScenarioIOError(f"no bundled scenario {name!r}")
    return resources.files("ifmsim").joinpath("scenarios", f"{name}.scenario").read_text("utf-8")


# --- serialization ----------------------------------------------------------

def _num(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _element_record(el):
    carrier = {} if getattr(el, "carrier", PHOTON) == PHOTON else {"carrier": el.carrier}
    if isinstance(el, BeamSplitter):
        rec = {"kind": el.kind, "in": [el.in_a, el.in_b], "out": [el.out_a, el.out_b], "T": el.transmittance}
        if el.convention != "real":
            rec["convention"] = el.convention
        return {**rec, **carrier}
    if isinstance(el, Coupler):
        return {"kind": el.kind, "modes": [el.left, el.right], "theta": el.theta, **carrier}
    if isinstance(el, Mirror):
        return {"kind": el.kind, "from": el.in_mode, "to": el.out_mode, **carrier}
    if isinstance(el, PhaseShift):
        return {"kind": el.kind, "mode": el.mode, "phi": el.phi, **carrier}
    if isinstance(el, Absorber):
        rec = {"kind": el.kind, "mode": el.mode, "object": el.object_id}
        if el.transmittance:
            rec["alpha"] = el.transmittance
        if not el.explosive:
            rec["explosive"] = False
        if el.present_state != "in":
            rec["present"] = el.present_state
        if el.transmission_phase:
            rec["phase"] = el.transmission_phase
        if el.site:
            rec["site"] = el.site
        return rec
    if isinstance(el, Detector):
        return {"kind": el.kind, "mode": el.mode, "id": el.detector_id, **carrier}
    if isinstance(el, Probe):
        return {"kind": el.kind, "id": el.detector_id, "when": dict(el.conditions)}
    if isinstance(el, TwoModeUnitary):
        return {"kind": el.kind, "in": list(el.ins), "out": list(el.outs),
                "matrix": [[_num(x) for x in row] for row in el.matrix], **carrier}
    raise TypeError(f"cannot serialize {el!r}")


def scenario_dict(spec: ScenarioSpec):
    c = spec.circuit
    circuit = {"modes": list(c.modes)}
    if c.source != (c.modes[0] if c.modes else None):
        circuit["source"] = c.source
    if c.objects:
        circuit["objects"] = [
            {"id": o.object_id, "states": list(o.states), "initial": {s: _num(a) for s, a in o.initial}}
            for o in c.objects
        ]
    circuit["stages"] = [[_element_record(el) for el in stage] for stage in c.stages]
    if c.postselection is not None:
        circuit["postselection"] = str(c.postselection)
    out = {"name": spec.name}
    if spec.description:
        out["description"] = spec.description
    out["circuit"] = circuit
    if spec.protocol is not None:
        out["protocol"] = {"name": spec.protocol.name}
        if spec.protocol.params:
            out["protocol"]["params"] = spec.protocol.kwargs()
    if spec.sampling is not None:
        out["sampling"] = {"shots": spec.sampling.shots, "seed": spec.sampling.seed}
    return out


class _Dumper(yaml.SafeDumper):
    pass


def _flow_small(dumper, data):
    # element records read best on one line
    flow = "kind" in data or all(not isinstance(v, (dict, list)) for v in data.values())
    return dumper.represent_mapping("tag:yaml.org,2002:map", data, flow_style=flow)


def _flow_list(dumper, data):
    flow = all(not isinstance(v, (dict, list)) for v in data) or all(
        isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v) for v in data
    )
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow and bool(data))


_Dumper.add_representer(dict, _flow_small)
_Dumper.add_representer(list, _flow_list)


def serialize_scenario(spec: ScenarioSpec) -> str:
    """YAML text that :func:`parse_scenario` reads back to an equal spec."""
    return yaml.dump(scenario_dict(spec), Dumper=_Dumper, sort_keys=False, width=100)


def check_spec(spec):
    """Re-validate a spec built in code (not needed after parsing)."""
    violations = validate(spec.circuit)
    if violations:
        raise ScenarioError("circuit is invalid", code="VALIDATION_ERROR", violations=tuple(violations))
    if spec.protocol is not None and spec.protocol.name not in PROTOCOLS:
        raise ScenarioError(f"unknown protocol {spec.protocol.name!r}", field="protocol.name")
    return spec


__all__ = [
    "IFMError", "Protocol", "Sampling", "ScenarioSpec", "SCHEMA_VERSION", "BUNDLED",
    "parse_scenario", "load_scenario", "bundled_text", "serialize_scenario", "scenario_dict", "check_spec",
]
