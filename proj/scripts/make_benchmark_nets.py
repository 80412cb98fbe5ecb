#!/usr/bin/env python3
"""Regenerates the bundled benchmark networks under data/.

asia.bif carries the standard published parameters. sachs.bif and
child.bif use the published structures (11 nodes / 17 arcs and
20 nodes / 25 arcs) with synthetic conditional probability tables drawn
from a seeded Dirichlet, since freely redistributable parameter sets are
not bundled with this repository. Regenerating with the same seed
reproduces the files byte for byte.
"""

import numpy as np

OUT_DIR = "data"


def emit_bif(path, comment, variables, cpds):
    """variables: list of (name, [states]); cpds: dict name -> (parents, rows).

    rows is a dict mapping parent-state tuples to probability lists, or a
    flat list for parentless nodes. Parents are listed in declaration
    order; configurations enumerate with the first parent most
    significant.
    """
    idx = {name: i for i, (name, _) in enumerate(variables)}
    states = {name: sts for name, sts in variables}
    lines = [f"// {comment}", "network unknown {", "}"]
    for name, sts in variables:
        lines.append(f"variable {name} {{")
        lines.append(f"  type discrete [ {len(sts)} ] {{ {', '.join(sts)} }};")
        lines.append("}")
    for name, _ in variables:
        parents, rows = cpds[name]
        if not parents:
            lines.append(f"probability ( {name} ) {{")
            lines.append("  table " + ", ".join(fmt(p) for p in rows) + ";")
            lines.append("}")
            continue
        lines.append(f"probability ( {name} | {', '.join(parents)} ) {{")
        configs = [()]
        for par in parents:
            configs = [c + (s,) for c in configs for s in states[par]]
        for cfg in configs:
            row = rows[cfg]
            lines.append(f"  ({', '.join(cfg)}) " + ", ".join(fmt(p) for p in row) + ";")
        lines.append("}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    del idx


def fmt(p):
    return format(float(p), ".12g")


def random_cpds(variables, structure, rng, alpha):
    states = {name: sts for name, sts in variables}
    cpds = {}
    for name, _ in variables:
        parents = structure.get(name, [])
        k = len(states[name])
        if not parents:
            cpds[name] = ([], list(rng.dirichlet([alpha] * k)))
            continue
        configs = [()]
        for par in parents:
            configs = [c + (s,) for c in configs for s in states[par]]
        rows = {cfg: list(rng.dirichlet([alpha] * k)) for cfg in configs}
        cpds[name] = (parents, rows)
    return cpds


def make_asia():
    yn = ["yes", "no"]
    variables = [(n, yn) for n in
                 ["asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"]]
    cpds = {
        "asia": ([], [0.01, 0.99]),
        "tub": (["asia"], {("yes",): [0.05, 0.95], ("no",): [0.01, 0.99]}),
        "smoke": ([], [0.5, 0.5]),
        "lung": (["smoke"], {("yes",): [0.1, 0.9], ("no",): [0.01, 0.99]}),
        "bronc": (["smoke"], {("yes",): [0.6, 0.4], ("no",): [0.3, 0.7]}),
        "either": (["tub", "lung"], {
            ("yes", "yes"): [1.0, 0.0],
            ("yes", "no"): [1.0, 0.0],
            ("no", "yes"): [1.0, 0.0],
            ("no", "no"): [0.0, 1.0],
        }),
        "xray": (["either"], {("yes",): [0.98, 0.02], ("no",): [0.05, 0.95]}),
        "dysp": (["bronc", "either"], {
            ("yes", "yes"): [0.9, 0.1],
            ("yes", "no"): [0.8, 0.2],
            ("no", "yes"): [0.7, 0.3],
            ("no", "no"): [0.1, 0.9],
        }),
    }
    emit_bif(f"{OUT_DIR}/asia.bif",
             "asia: 8 nodes, 8 arcs, standard published parameters",
             variables, cpds)


SACHS_STRUCTURE = {
    "PKA": ["PKC"],
    "Raf": ["PKC", "PKA"],
    "Mek": ["PKC", "PKA", "Raf"],
    "Erk": ["Mek", "PKA"],
    "Akt": ["Erk", "PKA"],
    "P38": ["PKC", "PKA"],
    "Jnk": ["PKC", "PKA"],
    "PIP3": ["Plcg"],
    "PIP2": ["Plcg", "PIP3"],
}


def make_sachs(seed, alpha):
    lvl = ["LOW", "AVG", "HIGH"]
    names = ["Akt", "Erk", "Jnk", "Mek", "P38", "PIP2", "PIP3", "PKA", "PKC", "Plcg", "Raf"]
    variables = [(n, lvl) for n in names]
    rng = np.random.default_rng(seed)
    cpds = random_cpds(variables, SACHS_STRUCTURE, rng, alpha)
    emit_bif(f"{OUT_DIR}/sachs.bif",
             f"sachs: 11 nodes, 17 arcs, published structure, synthetic parameters "
             f"(dirichlet alpha={alpha}, seed={seed})",
             variables, cpds)


CHILD_VARIABLES = [
    ("BirthAsphyxia", ["yes", "no"]),
    ("Disease", ["PFC", "TGA", "Fallot", "PAIVS", "TAPVD", "Lung"]),
    ("Age", ["0_3_days", "4_10_days", "11_30_days"]),
    ("LVH", ["yes", "no"]),
    ("DuctFlow", ["Lt_to_Rt", "None", "Rt_to_Lt"]),
    ("CardiacMixing", ["None", "Mild", "Complete", "Transp"]),
    ("LungParench", ["Normal", "Congested", "Abnormal"]),
    ("LungFlow", ["Normal", "Low", "High"]),
    ("Sick", ["yes", "no"]),
    ("HypDistrib", ["Equal", "Unequal"]),
    ("HypoxiaInO2", ["Mild", "Moderate", "Severe"]),
    ("CO2", ["Normal", "Low", "High"]),
    ("ChestXray", ["Normal", "Oligaemic", "Plethoric", "Grd_Glass", "Asy_Patchy"]),
    ("Grunting", ["yes", "no"]),
    ("LVHreport", ["yes", "no"]),
    ("LowerBodyO2", ["under_5", "5_to_12", "over_12"]),
    ("RUQO2", ["under_5", "5_to_12", "over_12"]),
    ("CO2Report", ["under_7_5", "over_7_5"]),
    ("XrayReport", ["Normal", "Oligaemic", "Plethoric", "Grd_Glass", "Asy_Patchy"]),
    ("GruntingReport", ["yes", "no"]),
]

CHILD_STRUCTURE = {
    "Disease": ["BirthAsphyxia"],
    "Age": ["Disease", "Sick"],
    "LVH": ["Disease"],
    "DuctFlow": ["Disease"],
    "CardiacMixing": ["Disease"],
    "LungParench": ["Disease"],
    "LungFlow": ["Disease"],
    "Sick": ["Disease"],
    "HypDistrib": ["DuctFlow", "CardiacMixing"],
    "HypoxiaInO2": ["CardiacMixing", "LungParench"],
    "CO2": ["LungParench"],
    "ChestXray": ["LungParench", "LungFlow"],
    "Grunting": ["LungParench", "Sick"],
    "LVHreport": ["LVH"],
    "LowerBodyO2": ["HypDistrib", "HypoxiaInO2"],
    "RUQO2": ["HypoxiaInO2"],
    "CO2Report": ["CO2"],
    "XrayReport": ["ChestXray"],
    "GruntingReport": ["Grunting"],
}


def make_child(seed, alpha):
    rng = np.random.default_rng(seed)
    cpds = random_cpds(CHILD_VARIABLES, CHILD_STRUCTURE, rng, alpha)
    emit_bif(f"{OUT_DIR}/child.bif",
             f"child: 20 nodes, 25 arcs, published structure, synthetic parameters "
             f"(dirichlet alpha={alpha}, seed={seed})",
             CHILD_VARIABLES, cpds)


if __name__ == "__main__":
    import os
    os.makedirs(OUT_DIR, exist_ok=True)
    make_asia()
    make_sachs(seed=20240711, alpha=0.5)
    make_child(seed=20240712, alpha=0.5)
    print("wrote data/asia.bif data/sachs.bif data/child.bif")
