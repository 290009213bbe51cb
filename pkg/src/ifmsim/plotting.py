"""PNG figures for reports. Uses the non-interactive Agg backend."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps the files byte-stable between runs
_SAVE = {"dpi": 100, "metadata": {"Software": None}}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def _bars(section, label_key, value_key, title, path, extra=None):
    labels = [str(r[label_key]) for r in section.rows]
    values = [r[value_key] for r in section.rows]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(labels) + 2), 3.2))
    x = range(len(labels))
    if extra is None:
        ax.bar(x, values, color="tab:blue")
    else:
        w = 0.4
        ax.bar([i - w / 2 for i in x], values, w, label=value_key, color="tab:blue")
        ax.bar([i + w / 2 for i in x], [r[extra] for r in section.rows], w, label=extra, color="tab:orange")
        ax.legend()
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("probability")
    ax.set_title(title)
    return _save(fig, path)


def _frontier(section, path):
    t = [r["T"] for r in section.rows]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(t, [r["efficiency"] for r in section.rows], "o-", label="simulated")
    ax.plot(t, [r["closed_form"] for r in section.rows], "--", label="T/(1+T)")
    ax.axhline(0.5, color="gray", lw=0.8)
    ax.set_xlabel("T")
    ax.set_ylabel("efficiency")
    ax.legend()
    return _save(fig, path)


def _zeno(section, path):
    n = [r["N"] for r in section.rows]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(n, [r["p_left_bomb"] for r in section.rows], "o-", ms=3, label="P(left | bomb)")
    ax.plot(n, [r["p_explosion"] for r in section.rows], "s-", ms=3, label="P(explosion)")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.legend()
    return _save(fig, path)


def _rounds(section, path):
    k = [r["round"] for r in section.rows]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for key in ("found", "exploded", "undecided"):
        ax.plot(k, [r[key] for r in section.rows], "o-", ms=3, label=key)
    ax.set_xlabel("round")
    ax.set_ylabel("fraction of bombs")
    ax.legend()
    return _save(fig, path)


def _trace_map(section, path):
    keys = sorted({(r["carrier"], r["mode"]) for r in section.rows})
    cuts = sorted({r["cut"] for r in section.rows})
    grid = [[float("nan")] * len(cuts) for _ in keys]
    for r in section.rows:
        grid[keys.index((r["carrier"], r["mode"]))][cuts.index(r["cut"])] = (
            r["forward_weight"] * r["backward_weight"]
        )
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(cuts) + 2), max(3.0, 0.3 * len(keys) + 1)))
    im = ax.imshow(grid, aspect="auto", cmap="viridis", interpolation="nearest")
    ax.set_xticks(range(len(cuts)))
    ax.set_xticklabels(cuts)
    ax.set_yticks(range(len(keys)))
    ax.set_yticklabels([m if c == "photon" else f"{c}:{m}" for c, m in keys], fontsize=8)
    ax.set_xlabel("cut")
    ax.set_title("|forward| x |backward| (0 = no trace)")
    fig.colorbar(im, ax=ax)
    return _save(fig, path)


def render_figures(report, out_dir):
    """Write the figures that fit ``report`` into ``out_dir``; return paths."""
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, f"{report.command}_{report.name}")
    titles = {s.title: s for s in report.sections}
    paths = []
    if "sample" in titles:
        paths.append(_bars(titles["sample"], "event", "exact", report.name, f"{stem}_distribution.png",
                           extra="frequency"))
    elif "distribution" in titles:
        paths.append(_bars(titles["distribution"], "event", "probability", report.name,
                           f"{stem}_distribution.png"))
    if "frontier" in titles:
        paths.append(_frontier(titles["frontier"], f"{stem}_frontier.png"))
    if "efficiency" in titles:
        paths.append(_zeno(titles["efficiency"], f"{stem}_efficiency.png"))
    if "rounds" in titles:
        paths.append(_rounds(titles["rounds"], f"{stem}_rounds.png"))
    if "trace" in titles and titles["trace"].rows:
        paths.append(_trace_map(titles["trace"], f"{stem}_trace.png"))
    return paths
