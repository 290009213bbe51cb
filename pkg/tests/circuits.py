"""Random valid circuits for property tests (at most 4 modes, 6 stages)."""

import math

import numpy as np

from ifmsim.elements import Absorber, BeamSplitter, Coupler, Detector, Mirror, PhaseShift
from ifmsim.engine import Circuit, ObjectSpec

KINDS = ("bs", "coupler", "phase", "mirror", "absorber", "detector", "object_bs")


def random_circuit(seed, max_modes=4, max_stages=6, linear_only=False):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_modes + 1))
    modes = tuple(f"m{i}" for i in range(n))
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    obj = ObjectSpec("o", ("in", "out"), {"in": complex(a), "out": complex(b)})
    kinds = KINDS[:4] if linear_only else KINDS
    stages = []
    for s in range(int(rng.integers(1, max_stages + 1))):
        used, stage = set(), []
        for _ in range(int(rng.integers(1, 4))):
            kind = kinds[int(rng.integers(len(kinds)))]
            free = [m for m in modes if ("photon", m) not in used]
            el = None
            if kind in ("bs", "coupler", "mirror") and len(free) >= 2:
                i, j = rng.choice(len(free), 2, replace=False)
                x, y = free[i], free[j]
                if kind == "bs":
                    conv = ("real", "swapped", "symmetric")[int(rng.integers(3))]
                    el = BeamSplitter(x, y, x, y, float(rng.uniform(0, 1)), conv)
                elif kind == "coupler":
                    el = Coupler(x, y, float(rng.uniform(0, math.pi / 2)))
                else:
                    el = Mirror(x, y)
            elif kind == "phase" and free:
                el = PhaseShift(free[int(rng.integers(len(free)))], float(rng.uniform(-math.pi, math.pi)))
            elif kind == "absorber" and free and ("o", "in") not in used:
                el = Absorber(
                    free[int(rng.integers(len(free)))], "o", float(rng.uniform(0, 1)),
                    bool(rng.integers(2)), transmission_phase=float(rng.uniform(0, 1)), site=f"s{s}",
                )
            elif kind == "detector" and free:
                m = free[int(rng.integers(len(free)))]
                el = Detector(m, f"D{s}{m}")
            elif kind == "object_bs" and not used & {("o", "in"), ("o", "out")}:
                el = BeamSplitter("in", "out", "in", "out", float(rng.uniform(0, 1)), carrier="o")
            if el is not None:
                used.update(el.refs())
                stage.append(el)
        if not stage:
            stage.append(PhaseShift(modes[0], 0.0))
        stages.append(tuple(stage))
    source = modes[int(rng.integers(n))]
    return Circuit(modes, tuple(stages), (obj,), source)
