"""Regenerate the bundled scenario files from the protocol builders.

    python3 scripts/make_scenarios.py
"""

import dataclasses
import math
import pathlib

from ifmsim.elements import BeamSplitter, Detector, Mirror, Absorber
from ifmsim.engine import Circuit, ObjectSpec
from ifmsim.protocols import ev_circuit, hardy_circuit, zeno_circuit
from ifmsim.scenario import Protocol, Sampling, ScenarioSpec, serialize_scenario

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "ifmsim" / "scenarios"
H = 1 / math.sqrt(2)


def with_post(circuit, event):
    return dataclasses.replace(circuit, postselection=event)


def penrose():
    # the bomb's fuse is the lower-arm mirror: a photon bouncing off it sets it off
    stages = (
        (BeamSplitter("src", "vac", "free", "int", 0.5),),
        (Mirror("free", "free_m"), Mirror("int", "int_m")),
        (Absorber("int_m", "bomb", 0.0, True, site="fuse_mirror"),),
        (BeamSplitter("free_m", "int_m", "d1", "d2", 0.5),),
        (Detector("d1", "D1"), Detector("d2", "D2")),
    )
    return Circuit(
        ("src", "vac", "free", "int", "free_m", "int_m", "d1", "d2"), stages,
        (ObjectSpec("bomb", ("in", "out"), {"in": 1.0}),), "src", "click:D2",
    )


def wheeler_open():
    # no second splitter: each arm runs straight into its own detector
    stages = (
        (BeamSplitter("src", "vac", "up", "low", 0.5),),
        (Mirror("up", "up_m"), Mirror("low", "low_m")),
        (Detector("up_m", "D2"), Detector("low_m", "D1")),
    )
    return Circuit(("src", "vac", "up", "low", "up_m", "low_m"), stages, (), "src", "click:D2")


def renninger():
    # isotropic emission cut into four equal sectors; detector DA covers s1
    stages = (
        (BeamSplitter("src", "vac0", "h1", "h2", 0.5),),
        (BeamSplitter("h1", "vac1", "s1", "s2", 0.5), BeamSplitter("h2", "vac2", "s3", "s4", 0.5)),
        (Detector("s1", "DA"),),
    )
    modes = ("src", "vac0", "vac1", "vac2", "h1", "h2", "s1", "s2", "s3", "s4")
    return Circuit(modes, stages, (), "src")


SCENARIOS = {
    "ev_bomb": (
        "Bomb tester with 50/50 splitters and a live bomb in the lower arm.",
        with_post(ev_circuit(0.5, "bomb"), "click:D2"),
        Protocol("ev_single_shot", {"T": 0.5, "obj": "bomb"}),
        Sampling(10000, 1),
    ),
    "ev_empty": (
        "Bomb tester with nothing in the lower arm; D2 is dark.",
        ev_circuit(0.5, "absent"),
        Protocol("ev_single_shot", {"T": 0.5, "obj": "absent"}),
        None,
    ),
    "ev_asymmetric": (
        "Weakly reflecting splitters (T = 0.9); repeated on D1 the yield approaches one half.",
        ev_circuit(0.9, "bomb"),
        Protocol("ev_repeated", {"T": 0.9}),
        None,
    ),
    "penrose": (
        "Bomb whose fuse is a mirror of the interferometer; same statistics as the bomb tester.",
        penrose(),
        None,
        Sampling(10000, 2),
    ),
    "wheeler_open": (
        "Open interferometer without the second splitter, post-selected on D2 (upper arm).",
        wheeler_open(),
        None,
        None,
    ),
    "renninger_sectors": (
        "Photon emitted into four equal sectors; a silent detector on s1 reshapes the state.",
        renninger(),
        Protocol("negative_result", {"detector": "DA"}),
        None,
    ),
    "dicke_ev": (
        "Bomb tester with the object spread over two locations; a D2 click localizes it.",
        with_post(ev_circuit(0.5, "bomb", object_initial={"in": H, "out": H}), "click:D2"),
        Protocol("dicke_localization", {"T": 0.5}),
        None,
    ),
    "hardy": (
        "Photon and object interferometers overlapping at W, where the pair annihilates.",
        with_post(hardy_circuit(), "click:OD2 & click:PD2"),
        Protocol("hardy", {}),
        Sampling(16000, 3),
    ),
    "zeno": (
        "Two cavities coupled by a mirror rotating pi/20 per round trip, bomb in the right cavity.",
        zeno_circuit(10),
        Protocol("zeno", {"N": 10}),
        None,
    ),
}


def main():
    OUT.mkdir(exist_ok=True)
    for name, (desc, circuit, protocol, sampling) in SCENARIOS.items():
        spec = ScenarioSpec(name, circuit, protocol, sampling, desc)
        text = "# generated by scripts/make_scenarios.py\n" + serialize_scenario(spec)
        (OUT / f"{name}.scenario").write_text(text, encoding="utf-8")
        print(OUT / f"{name}.scenario")


if __name__ == "__main__":
    main()
