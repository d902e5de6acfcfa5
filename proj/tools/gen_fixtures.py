#!/usr/bin/env python3
"""Regenerate the machine-model fixtures under models/.

Parameter values are not physical data: each default is a positive number
drawn once from a fixed seed. Structural results do not depend on them and
the Lie rank only needs generic values.
"""

import argparse
import pathlib
import random

SEED = 20240917

MACHINE_STATES = ["Eq", "Ed", "delta", "omega", "Efd", "Rf", "VR"]


def draw(rng, lo=0.5, hi=2.0):
    return f"{rng.uniform(lo, hi):.4f}"


def machine_equations(i, Id, Iq, ctag, vt):
    """Derivative right-hand sides of one machine; Id/Iq already substituted."""
    c = [None] + [f"c{k}{ctag}" for k in range(1, 16)]
    return {
        f"Eq{i}": f"{c[1]} * (-Eq{i} - {c[2]} * {Id} + Efd{i})",
        f"Ed{i}": f"{c[3]} * (-Ed{i} + {c[4]} * {Iq})",
        f"delta{i}": f"omega{i} - {c[5]}",
        f"omega{i}": (f"{c[6]} * (TM{i} - Ed{i} * {Id} - Eq{i} * {Iq} - {c[7]} * {Id} * {Iq}"
                      f" - {c[8]} * (omega{i} - {c[5]}))"),
        f"Efd{i}": f"{c[9]} * (-({c[10]} + SEa{ctag} * exp(SEb{ctag} * Efd{i})) * Efd{i} + VR{i})",
        f"Rf{i}": f"{c[11]} * (-Rf{i} + {c[12]} * Efd{i})",
        f"VR{i}": f"{c[13]} * (-VR{i} + {c[14]} * Rf{i} - {c[15]} * Efd{i} + {c[14]} * (Vref{i} - {vt}))",
    }


def machine_params(rng, ctag):
    names = [f"c{k}{ctag}" for k in range(1, 16)] + [f"SEa{ctag}", f"SEb{ctag}"]
    return [(n, draw(rng)) for n in names]


def params_line(params):
    return "params " + ", ".join(f"{n} = {v}" for n, v in params)


def decentralized(rng):
    # Stator currents through the inverse of Zdq; terminal voltage enters
    # through its network-frame components VD1, VQ1 (inputs).
    a = "(Ed1 - (VD1 * sin(delta1) - VQ1 * cos(delta1)))"
    b = "(Eq1 - (VD1 * cos(delta1) + VQ1 * sin(delta1)))"
    det = "(Rs^2 + Xqp * Xdp)"
    Id = f"((Rs * {a} + Xqp * {b}) / {det})"
    Iq = f"((Rs * {b} - Xdp * {a}) / {det})"
    params = machine_params(rng, "") + [("Rs", draw(rng, 0.05, 0.2)), ("Xdp", draw(rng)), ("Xqp", draw(rng))]
    eqs = machine_equations(1, Id, Iq, "", "Vt1")
    lines = [
        "# Single machine with IEEE type-1 exciter; stator currents substituted",
        "# through the dq impedance inverse. Measured: network-frame currents.",
        "# Generated by tools/gen_fixtures.py; do not edit by hand.",
        "system wscc_decentralized",
        "states " + " ".join(f"{s}1" for s in MACHINE_STATES),
        "inputs TM1 Vref1 VD1 VQ1 Vt1",
        params_line(params),
    ]
    lines += [f"deriv {s}1 = {eqs[f'{s}1']}" for s in MACHINE_STATES]
    lines.append(f"output ID = {Id} * sin(delta1) + {Iq} * cos(delta1)")
    lines.append(f"output IQ = {Iq} * sin(delta1) - {Id} * cos(delta1)")
    return "\n".join(lines) + "\n"


def table_order(m):
    order = ["Ed", "Eq", "delta", "omega", "Efd", "Rf", "VR"]
    return [f"{s}{i}" for s in order for i in range(1, m + 1)]


def centralized_structural(m=3):
    states = table_order(m)
    network = ", ".join(f"Eq{j}, Ed{j}, delta{j}" for j in range(1, m + 1))
    lines = [
        "# Kron-reduced three-machine system, dependency structure only.",
        "# State order follows the published adjacency table.",
        "# Generated by tools/gen_fixtures.py; do not edit by hand.",
        "system wscc_centralized_structural",
        "states " + " ".join(states),
        "inputs " + " ".join(f"TM{i}" for i in range(1, m + 1)) + " " + " ".join(f"Vref{i}" for i in range(1, m + 1)),
    ]
    deps = {}
    for i in range(1, m + 1):
        deps[f"Eq{i}"] = f"{network}, Efd{i}"
        deps[f"Ed{i}"] = network
        deps[f"delta{i}"] = f"omega{i}"
        deps[f"omega{i}"] = f"{network}, omega{i}, TM{i}"
        deps[f"Efd{i}"] = f"Efd{i}, VR{i}"
        deps[f"Rf{i}"] = f"Efd{i}, Rf{i}"
        deps[f"VR{i}"] = f"Efd{i}, Rf{i}, VR{i}, Vref{i}"
    lines += [f"deriv {s} depends {deps[s]}" for s in states]
    for i in range(1, m + 1):
        lines.append(f"output VD{i} depends Eq{i}, Ed{i}, delta{i}")
        lines.append(f"output VQ{i} depends Eq{i}, Ed{i}, delta{i}")
    return "\n".join(lines) + "\n"


def centralized_synthetic(rng, m=3):
    params = []
    for i in range(1, m + 1):
        params += machine_params(rng, f"_{i}")
        params.append((f"Vt_{i}", draw(rng, 0.9, 1.1)))
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            params.append((f"G{i}{j}", draw(rng, 0.1, 1.0)))
            params.append((f"B{i}{j}", draw(rng, 0.5, 2.0)))

    ED = {j: f"(Ed{j} * sin(delta{j}) + Eq{j} * cos(delta{j}))" for j in range(1, m + 1)}
    EQ = {j: f"(Eq{j} * sin(delta{j}) - Ed{j} * cos(delta{j}))" for j in range(1, m + 1)}
    eqs = {}
    for i in range(1, m + 1):
        ID = "(" + " + ".join(f"(G{i}{j} * {ED[j]} - B{i}{j} * {EQ[j]})" for j in range(1, m + 1)) + ")"
        IQ = "(" + " + ".join(f"(G{i}{j} * {EQ[j]} + B{i}{j} * {ED[j]})" for j in range(1, m + 1)) + ")"
        Id = f"({ID} * sin(delta{i}) - {IQ} * cos(delta{i}))"
        Iq = f"({ID} * cos(delta{i}) + {IQ} * sin(delta{i}))"
        eqs.update(machine_equations(i, Id, Iq, f"_{i}", f"Vt_{i}"))

    states = table_order(m)
    lines = [
        "# Three machines coupled through a randomly drawn reduced admittance",
        "# matrix (G + jB). Symbolic stand-in for the Kron-reduced network.",
        "# Generated by tools/gen_fixtures.py; do not edit by hand.",
        "system wscc_centralized_synthetic",
        "states " + " ".join(states),
        "inputs " + " ".join(f"TM{i}" for i in range(1, m + 1)) + " " + " ".join(f"Vref{i}" for i in range(1, m + 1)),
        params_line(params),
    ]
    lines += [f"deriv {s} = {eqs[s]}" for s in states]
    for i in range(1, m + 1):
        lines.append(f"output VD{i} = {ED[i]}")
        lines.append(f"output VQ{i} = {EQ[i]}")
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "models"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    rng = random.Random(SEED)
    files = {
        "wscc_decentralized.dyn": decentralized(rng),
        "wscc_centralized_structural.dyn": centralized_structural(),
        "wscc_centralized_synthetic.dyn": centralized_synthetic(rng),
    }
    for name, text in files.items():
        (out / name).write_text(text)


if __name__ == "__main__":
    main()
