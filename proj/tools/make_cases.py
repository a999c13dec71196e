#!/usr/bin/env python3
"""Regenerate the bundled case files in data/.

Deterministic: the same script always writes byte-identical files.
"""

import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

# Hourly shape of system load, peak 1.0.
DAILY_SHAPE = [
    0.62, 0.58, 0.56, 0.55, 0.56, 0.60, 0.68, 0.78, 0.86, 0.90, 0.93, 0.95,
    0.96, 0.97, 0.98, 0.99, 1.00, 0.99, 0.96, 0.92, 0.86, 0.78, 0.70, 0.65,
]


def gen(gid, bus, pmin, pmax, cost, noload, startup, shutdown, ramp, r10, up, down):
    return {
        "id": gid, "bus": bus, "p_min": pmin, "p_max": pmax,
        "cost_energy": cost, "cost_noload": noload, "cost_startup": startup, "cost_shutdown": shutdown,
        "ramp_hourly": ramp, "ramp_10min": r10, "ramp_startup": max(ramp, pmin), "ramp_shutdown": max(ramp, pmin),
        "min_up": up, "min_down": down,
    }


def line(lid, f, t, x, rating, emergency=None):
    row = {"id": lid, "from": f, "to": t, "reactance_pu": x, "rating_mw": rating}
    if emergency is not None:
        row["emergency_rating_mw"] = emergency
    return row


def case6():
    buses = [{"id": i, "name": f"B{i}"} for i in range(1, 7)]
    lines = [
        line(1, 1, 2, 0.10, 160),
        line(2, 1, 4, 0.20, 120),
        line(3, 2, 3, 0.15, 90),
        line(4, 2, 4, 0.10, 110),
        line(5, 3, 6, 0.12, 70),
        line(6, 4, 5, 0.10, 100),
        line(7, 5, 6, 0.15, 70),
        line(8, 2, 5, 0.25, 90),
    ]
    gens = [
        gen(1, 1, 40, 220, 16.0, 420, 1200, 60, 70, 24, 4, 3),
        gen(2, 2, 20, 130, 22.0, 260, 600, 40, 55, 30, 3, 2),
        gen(3, 3, 10, 90, 29.0, 150, 240, 20, 45, 28, 2, 2),
        gen(4, 4, 15, 110, 26.0, 190, 360, 25, 50, 32, 2, 2),
        gen(5, 5, 5, 70, 38.0, 90, 120, 10, 60, 35, 1, 1),
        gen(6, 6, 0, 60, 52.0, 45, 60, 5, 60, 45, 1, 1),
    ]
    share = {2: 0.15, 3: 0.25, 4: 0.15, 5: 0.20, 6: 0.25}
    peak = 340.0
    loads = [
        {"bus": b, "mw": [round(peak * s * h, 3) for h in DAILY_SHAPE]} for b, s in share.items()
    ]
    return {
        "meta": {"name": "case6", "base_mva": 100.0, "reference_bus": 1, "horizon": 24},
        "buses": buses, "lines": lines, "generators": gens, "loads": loads,
    }


def toy3():
    return {
        "meta": {"name": "toy3", "base_mva": 100.0, "reference_bus": 1, "horizon": 2},
        "buses": [{"id": 1, "name": "A"}, {"id": 2, "name": "B"}, {"id": 3, "name": "C"}],
        "lines": [line(1, 1, 2, 0.1, 60, 80), line(2, 2, 3, 0.1, 60, 80), line(3, 1, 3, 0.1, 60, 80)],
        "generators": [
            gen(1, 1, 10, 100, 20.0, 100, 200, 10, 60, 35, 1, 1),
            gen(2, 2, 10, 80, 30.0, 80, 150, 10, 50, 40, 1, 1),
            gen(3, 3, 5, 60, 45.0, 50, 100, 5, 40, 30, 1, 1),
        ],
        "loads": [{"bus": 2, "mw": [40.0, 60.0]}, {"bus": 3, "mw": [50.0, 70.0]}],
    }


def case118():
    rng = random.Random(118)
    ring = 109
    buses = [{"id": i, "name": f"Bus{i}"} for i in range(1, 119)]
    lines = []
    lid = 1
    for i in range(1, ring + 1):
        j = i % ring + 1
        lines.append(line(lid, i, j, round(rng.uniform(0.02, 0.12), 4), 400.0))
        lid += 1
    chords = set()
    while len(chords) < 68:
        a, b = sorted(rng.sample(range(1, ring + 1), 2))
        gap = min(b - a, ring - (b - a))
        if gap < 2 or (a, b) in chords:
            continue
        chords.add((a, b))
    for a, b in sorted(chords):
        lines.append(line(lid, a, b, round(rng.uniform(0.04, 0.20), 4), 300.0))
        lid += 1
    for leaf in range(ring + 1, 119):
        anchor = rng.randrange(1, ring + 1)
        lines.append(line(lid, anchor, leaf, round(rng.uniform(0.03, 0.10), 4), 200.0))
        lid += 1

    gen_buses = sorted(rng.sample(range(1, 119), 54))
    gens = []
    for g, bus in enumerate(gen_buses, start=1):
        size = rng.choice([50, 80, 100, 150, 200, 300])
        cost = round(rng.uniform(12.0, 60.0), 2)
        gens.append(gen(g, bus, round(0.2 * size, 1), float(size), cost, round(size * 1.5, 1),
                        round(size * 4.0, 1), round(size * 0.2, 1), round(size * 0.5, 1),
                        round(size * 0.2, 1), rng.choice([1, 2, 3, 4]), rng.choice([1, 2, 3])))
    capacity = sum(g["p_max"] for g in gens)
    loaded = sorted(rng.sample(range(1, 119), 91))
    weights = [rng.uniform(0.5, 1.5) for _ in loaded]
    total_w = sum(weights)
    peak = 0.55 * capacity
    loads = [
        {"bus": b, "mw": [round(peak * w / total_w * h, 3) for h in DAILY_SHAPE]}
        for b, w in zip(loaded, weights)
    ]
    return {
        "meta": {"name": "case118", "base_mva": 100.0, "reference_bus": 1, "horizon": 24},
        "buses": buses, "lines": lines, "generators": gens, "loads": loads,
    }


def write(name, doc):
    DATA.mkdir(exist_ok=True)
    (DATA / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    write("case6", case6())
    write("toy3", toy3())
    write("case118", case118())
