"""Run reports: exact results, optional samples, and their text/CSV/JSONL forms.

A report is a list of named sections, each a list of flat rows. The text
stream aligns every section as a table; the record stream writes one JSON
object per row (plus a leading metadata record) with sorted keys and no
timestamps, so equal inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .engine import TerminalEvent, outcome_distribution
from .protocols import (
    CLICK_D1,
    CLICK_D2,
    EXPLOSION,
    HARDY_QUERIES,
    ZENO_LEFT,
    ZENO_RIGHT,
    efficiency,
    ev_repeated,
    ev_single_shot,
    hardy_conditional,
    hardy_run,
    hardy_weak_values,
    run_protocol,
    zeno_left_probability,
    zeno_run,
)
from .sampling import GENERATOR, empirical
from .scenario import SCHEMA_VERSION, ScenarioSpec
from .tsvf import TRACE_TOLERANCE, segment_weights, two_state_vector, weak_value


@dataclass
class Section:
    title: str
    rows: list
    columns: list = field(default_factory=list)

    def __post_init__(self):
        if not self.columns:
            cols = {}
            for row in self.rows:
                cols.update(dict.fromkeys(row))
            self.columns = list(cols)


@dataclass
class RunReport:
    command: str
    name: str
    sections: list
    metadata: dict = field(default_factory=dict)

    def section(self, title):
        for s in self.sections:
            if s.title == title:
                return s
        raise KeyError(title)

    def to_text(self):
        return render_text(self)

    def to_jsonl(self):
        return render_jsonl(self)


def _meta(**extra):
    out = {"schema_version": SCHEMA_VERSION, "version": __version__, "tolerance": 1e-12}
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


# --- builders -------------------------------------------------------------

def _distribution_rows(dist):
    return [{"event": str(e), "probability": p} for e, p in dist.items()]


def run_report(spec: ScenarioSpec, shots=None, seed=None):
    """Exact distribution of the scenario circuit, its protocol (if any), and
    a seeded sample when ``shots`` (or the scenario's sampling block) is set."""
    dist = outcome_distribution(spec.circuit)
    sections = [Section("distribution", _distribution_rows(dist), ["event", "probability"])]
    post = spec.circuit.postselection
    if post is not None:
        sections.append(Section("postselection", [{"event": str(post), "probability": dist[post]}]))
    if spec.protocol is not None:
        rows = run_protocol(spec.protocol.name, spec.protocol.kwargs(), spec.circuit)
        sections.append(Section(f"protocol:{spec.protocol.name}", rows))
    if shots is None and spec.sampling is not None:
        shots = spec.sampling.shots
        seed = spec.sampling.seed if seed is None else seed
    meta = _meta(scenario=spec.name)
    if shots is not None:
        seed = 0 if seed is None else seed
        emp = empirical(dist, shots, seed)
        rows = [
            {
                "event": k,
                "exact": dist[k],
                "count": emp.counts[k],
                "frequency": emp.frequencies[k],
                "std_error": emp.std_errors[k],
            }
            for k in emp.counts
        ]
        sections.append(Section("sample", rows))
        meta.update(shots=int(shots), seed=int(seed), generator=GENERATOR)
    return RunReport("run", spec.name, sections, meta)


def linspace(start, stop, steps):
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if steps == 1:
        return [float(start)]
    return [float(x) for x in np.linspace(start, stop, steps)]


def sweep_report(values):
    """Single-shot bomb-test split and efficiency over splitter transmittances."""
    rows = []
    for t in values:
        dist = ev_single_shot(t, "bomb")
        rows.append({
            "T": t,
            "p_d1": dist[CLICK_D1],
            "p_d2": dist[CLICK_D2],
            "p_explosion": dist[EXPLOSION],
            "efficiency": efficiency(dist),
            "closed_form": t / (1.0 + t),
        })
    return RunReport("sweep", "efficiency_frontier", [Section("frontier", rows)], _meta(param="T"))


def zeno_grid(max_n):
    """``1..max_n`` up to 100; beyond that a log-spaced grid ending at ``max_n``."""
    if max_n < 1:
        raise ValueError("max-n must be at least 1")
    if max_n <= 100:
        return list(range(1, max_n + 1))
    grid = {int(round(x)) for x in np.geomspace(1, max_n, 60)}
    return sorted(grid | {max_n})


def zeno_report(ns):
    rows = []
    for n in ns:
        bomb = zeno_run(n, "bomb")
        empty = zeno_run(n, "absent")
        rows.append({
            "N": n,
            "p_left_bomb": bomb[ZENO_LEFT],
            "closed_form": zeno_left_probability(n),
            "p_explosion": bomb[EXPLOSION],
            "p_right_absent": empty[ZENO_RIGHT],
            "bound": math.pi**2 / (4 * n),
        })
    return RunReport("zeno", "zeno", [Section("efficiency", rows)], _meta())


def hardy_report(photon_t=0.5, object_t=0.5):
    sections = [
        Section("distribution", _distribution_rows(hardy_run(photon_t, object_t))),
        Section("conditionals", [
            {"query": q, "probability": hardy_conditional(q, photon_t, object_t)} for q in HARDY_QUERIES
        ]),
        Section("weak_values", [
            {"projector": k, "re": v.real, "im": v.imag}
            for k, v in hardy_weak_values(photon_t, object_t).items()
        ]),
    ]
    return RunReport("hardy", "hardy", sections, _meta(photon_t=photon_t, object_t=object_t))


def repeat_report(transmittance, max_rounds=None, mode="analytic"):
    rep = ev_repeated(transmittance, max_rounds, mode)
    rounds = [
        {"round": r.round, "found": r.found, "exploded": r.exploded, "undecided": r.undecided}
        for r in rep.rounds
    ]
    totals = [{
        "found": rep.found_fraction,
        "exploded": rep.exploded_fraction,
        "undecided": rep.undecided_fraction,
        "efficiency": rep.efficiency,
    }]
    sections = [Section("totals", totals)]
    if rounds:
        sections.append(Section("rounds", rounds))
    meta = _meta(T=transmittance, max_rounds=max_rounds, mode=mode)
    return RunReport("repeat", "ev_repeated", sections, meta)


def _carrier_modes(circuit):
    out = [("photon", m) for m in circuit.modes]
    for obj in circuit.objects:
        out += [(obj.object_id, s) for s in obj.states]
    return out


def tsvf_report(spec: ScenarioSpec, postselection=None):
    """Forward/backward amplitudes per cut, the trace-free map and single-mode
    weak values, for the given (or the scenario's) post-selection."""
    post = postselection if postselection is not None else spec.circuit.postselection
    if post is None:
        raise ValueError("no post-selection given and the scenario has none")
    event = TerminalEvent.parse(post)
    circuit = spec.circuit
    tsv = two_state_vector(circuit, event)
    amp_rows, trace_rows, weak_rows = [], [], []
    for cut in tsv.cuts:
        fwd, back = tsv.forward[cut], tsv.backward[cut]
        for label in sorted(set(fwd.labels) | set(back.labels)):
            f, b = fwd.amplitude(label), back.amplitude(label)
            amp_rows.append({
                "cut": cut, "label": str(label),
                "forward_re": f.real, "forward_im": f.imag,
                "backward_re": b.real, "backward_im": b.imag,
            })
        for carrier, mode in _carrier_modes(circuit):
            proj = {carrier: {mode}}
            f, b = segment_weights(tsv, cut, proj)
            if f == 0 and b == 0:
                continue
            wv = weak_value(circuit, None, event, proj, cut=cut, tsv=tsv)
            trace_rows.append({
                "cut": cut, "carrier": carrier, "mode": mode,
                "forward_weight": f, "backward_weight": b,
                "trace_free": f * b <= TRACE_TOLERANCE,
            })
            weak_rows.append({"cut": cut, "carrier": carrier, "mode": mode, "re": wv.real, "im": wv.imag})
    overlap = tsv.overlap
    summary = [{
        "postselection": str(event),
        "probability": tsv.probability,
        "overlap_re": overlap.real,
        "overlap_im": overlap.imag,
    }]
    sections = [
        Section("summary", summary),
        Section("amplitudes", amp_rows),
        Section("trace", trace_rows),
        Section("weak_values", weak_rows),
    ]
    return RunReport("tsvf", spec.name, sections, _meta(scenario=spec.name, postselection=str(event)))


# --- rendering ------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if v == 0:
            return "0"
        return f"{v:.6g}" if 1e-4 <= abs(v) < 1e6 else f"{v:.4e}"
    if v is None:
        return ""
    return str(v)


def render_text(report: RunReport):
    out = io.StringIO()
    meta = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(report.metadata.items()))
    out.write(f"# {report.command}: {report.name}\n# {meta}\n")
    for sec in report.sections:
        cols = sec.columns
        cells = [[_fmt(row.get(c)) for c in cols] for row in sec.rows]
        widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(cols)]
        out.write(f"\n[{sec.title}]\n")
        out.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
        out.write("  ".join("-" * w for w in widths) + "\n")
        for r in cells:
            out.write("  ".join(x.ljust(w) for x, w in zip(r, widths)).rstrip() + "\n")
    return out.getvalue()


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def records(report: RunReport):
    yield {"record": "meta", "command": report.command, "name": report.name, **report.metadata}
    for sec in report.sections:
        for i, row in enumerate(sec.rows):
            yield {
                "record": "row",
                "schema_version": SCHEMA_VERSION,
                "section": sec.title,
                "index": i,
                **{k: _json_safe(v) for k, v in row.items()},
            }


def render_jsonl(report: RunReport):
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records(report))


def render_csv(section: Section):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=section.columns, lineterminator="\n")
    writer.writeheader()
    for row in section.rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
