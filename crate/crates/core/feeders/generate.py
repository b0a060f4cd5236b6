#!/usr/bin/env python3
"""Regenerates the bundled synthetic feeders (twobus, synth10, synth55).

Line data are representative LV cable parameters (Ohm/km, Kron-reduced
four-wire, so mutual terms carry a resistive part). Output is deterministic.
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).parent
V_PH_KV = 0.23  # line-to-neutral


def phase_matrix(self_ohm_km, mutual_ohm_km, length_m):
    km = length_m / 1000.0
    s = [round(self_ohm_km[0] * km, 9), round(self_ohm_km[1] * km, 9)]
    m = [round(mutual_ohm_km[0] * km, 9), round(mutual_ohm_km[1] * km, 9)]
    return [[s if i == j else m for j in range(3)] for i in range(3)]


def slack(v_pu):
    import cmath
    import math
    out = []
    for deg in (0.0, -120.0, 120.0):
        z = cmath.rect(v_pu, math.radians(deg))
        out.append([round(z.real, 12), round(z.imag, 12)])
    return out


MAIN = ((0.284, 0.083), (0.096, 0.021))      # 185 mm2 Al main
LATERAL = ((0.443, 0.085), (0.128, 0.024))   # 95 mm2 Al lateral
SERVICE = ((0.868, 0.092), (0.262, 0.029))   # 35 mm2 Cu service


def load(i, bus, phase):
    return {"id": i, "bus": bus, "phase": phase, "p_kw": 0.3, "pf": 0.95, "lagging": True}


def twobus():
    z = [0.529, 0.529]  # 0.01 + 0.01j pu on 230 V / 1 kVA
    zero = [0.0, 0.0]
    return {
        "name": "twobus",
        "base_power_kva": 1.0,
        "v_plus_pu": 1.05,
        "slack": {"bus": "src", "v_pu": slack(1.0)},
        "buses": [{"id": "src", "base_kv": V_PH_KV}, {"id": "b1", "base_kv": V_PH_KV}],
        "branches": [{"from": "src", "to": "b1",
                      "z_ohm": [[z if i == j else zero for j in range(3)] for i in range(3)]}],
        "loads": [load(0, "b1", "a")],
    }


def synth10():
    # src - b1 - b2 - b3 - b4 - b5 main; b2 - b6 - b7 and b4 - b8 - b9 laterals
    buses = ["src"] + [f"b{i}" for i in range(1, 10)]
    edges = [
        ("src", "b1", MAIN, 60), ("b1", "b2", MAIN, 45), ("b2", "b3", MAIN, 50),
        ("b3", "b4", MAIN, 40), ("b4", "b5", MAIN, 55), ("b2", "b6", LATERAL, 35),
        ("b6", "b7", LATERAL, 40), ("b4", "b8", LATERAL, 30), ("b8", "b9", LATERAL, 45),
    ]
    branches = []
    for f, t, (s, m), length in edges:
        br = {"from": f, "to": t, "z_ohm": phase_matrix(s, m, length)}
        if (f, t) == ("src", "b1"):
            b = [0.0, round(2.0e-7 * length, 12)]
            zero = [0.0, 0.0]
            br["y_shunt_s"] = [[b if i == j else zero for j in range(3)] for i in range(3)]
        branches.append(br)
    phases = ["a", "b", "a", "c", "a", "b", "a", "c", "b"]  # a:4, b:3, c:2
    loads = [load(i, f"b{i + 1}", ph) for i, ph in enumerate(phases)]
    return {
        "name": "synth10",
        "base_power_kva": 1.0,
        "v_plus_pu": 1.10,
        "slack": {"bus": "src", "v_pu": slack(1.05)},
        "buses": [{"id": b, "base_kv": V_PH_KV} for b in buses],
        "branches": branches,
        "loads": loads,
    }


def synth55():
    rng = random.Random(55)
    buses = ["src"]
    branches = []

    def add(f, t, cable, length):
        buses.append(t)
        branches.append({"from": f, "to": t, "z_ohm": phase_matrix(cable[0], cable[1], length)})

    # trunk of 18 sections, two laterals of 7 sections each
    trunk = []
    prev = "src"
    for k in range(18):
        name = f"t{k:02d}"
        add(prev, name, MAIN, rng.uniform(18.0, 32.0))
        trunk.append(name)
        prev = name
    laterals = []
    for tag, root in (("la", "t05"), ("lb", "t11")):
        prev = root
        for k in range(7):
            name = f"{tag}{k:02d}"
            add(prev, name, LATERAL, rng.uniform(15.0, 30.0))
            laterals.append(name)
            prev = name
    poles = trunk + laterals  # 32 connection points
    # 55 houses, each on its own service drop; phases deliberately uneven
    phase_pool = ["a"] * 22 + ["b"] * 19 + ["c"] * 14
    rng.shuffle(phase_pool)
    loads = []
    for i in range(55):
        pole = poles[i % len(poles)] if i < len(poles) else poles[rng.randrange(len(poles))]
        house = f"h{i:02d}"
        add(pole, house, SERVICE, rng.uniform(8.0, 28.0))
        loads.append(load(i, house, phase_pool[i]))
    return {
        "name": "synth55",
        "base_power_kva": 1.0,
        "v_plus_pu": 1.10,
        "slack": {"bus": "src", "v_pu": slack(1.05)},
        "buses": [{"id": b, "base_kv": V_PH_KV} for b in buses],
        "branches": branches,
        "loads": loads,
    }


def dump(feeder):
    lines = ["{"]
    keys = list(feeder)
    for n, key in enumerate(keys):
        value = feeder[key]
        tail = "," if n + 1 < len(keys) else ""
        if isinstance(value, list):
            lines.append(f'  "{key}": [')
            for k, item in enumerate(value):
                sep = "," if k + 1 < len(value) else ""
                lines.append("    " + json.dumps(item) + sep)
            lines.append("  ]" + tail)
        else:
            lines.append(f'  "{key}": ' + json.dumps(value) + tail)
    lines.append("}")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    for build in (twobus, synth10, synth55):
        feeder = build()
        (HERE / f"{feeder['name']}.json").write_text(dump(feeder))
        print(feeder["name"], len(feeder["buses"]), "buses", len(feeder["loads"]), "loads")
