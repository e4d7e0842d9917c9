"""Regenerates the bundled JSON fixtures. Output is deterministic."""

import json
import math
from pathlib import Path

HERE = Path(__file__).parent
T = 24
SHAPE = [0.62, 0.58, 0.56, 0.55, 0.56, 0.60, 0.68, 0.78, 0.86, 0.90, 0.92, 0.93,
         0.92, 0.91, 0.90, 0.90, 0.92, 0.97, 1.00, 0.98, 0.93, 0.85, 0.75, 0.67]
WIND_MEAN = [0.55, 0.57, 0.58, 0.60, 0.58, 0.54, 0.48, 0.42, 0.38, 0.35, 0.33, 0.32,
             0.32, 0.33, 0.35, 0.37, 0.40, 0.44, 0.48, 0.50, 0.52, 0.53, 0.54, 0.55]


def r(x, d=2):
    return round(x, d)


def bus(i, peak, voll=1000.0):
    return {"id": i, "load_profile": [r(peak * s) for s in SHAPE], "voll": voll}


def wind(i, b, cap, var=0.02):
    return {"id": i, "bus": b, "capacity": cap,
            "mean_fraction": WIND_MEAN,
            "variance_fraction": [var] * T}


def unit(i, b, pmin, pmax, ramp, curve, gfu=False, gas_node=None, on=True, hours=8,
         t_on=3, t_off=3, su=0.0, sd=0.0):
    u = {"id": i, "bus": b, "is_gfu": gfu, "p_min": pmin, "p_max": pmax, "ramp": ramp,
         "t_on": t_on, "t_off": t_off, "startup_cost": su, "shutdown_cost": sd,
         "initial_state": {"on": on, "hours": hours}}
    if gfu:
        u["heat_curve"] = {"breakpoints": curve}
        u["gas_node"] = gas_node
    else:
        u["cost_curve"] = {"breakpoints": curve}
    return u


def curve(pmin, pmax, c0, slopes):
    pts = [[pmin, c0]]
    n = len(slopes)
    for k, s in enumerate(slopes):
        x0, y0 = pts[-1]
        x1 = pmin + (pmax - pmin) * (k + 1) / n
        pts.append([r(x1, 4), r(y0 + s * (x1 - x0), 4)])
    return pts


def gas_load(i, node, peak, prio, cost):
    return {"id": i, "node": node, "profile": [r(peak * s) for s in SHAPE],
            "priority": prio, "curtail_cost": cost}


def line(i, a, b, x, cap):
    return {"id": i, "from_bus": a, "to_bus": b, "reactance": x, "capacity": cap}


def pipe(i, a, b, c):
    return {"id": i, "from_node": a, "to_node": b, "weymouth_const": c}


def toy(congested):
    buses = [bus("b1", 120.0), bus("b2", 150.0), bus("b3", 150.0)]
    lines = [line("l12", "b1", "b2", 0.1, 500.0), line("l23", "b2", "b3", 0.1, 500.0),
             line("l13", "b1", "b3", 0.1, 500.0)]
    units = [
        unit("G1", "b1", 50.0, 300.0, 120.0, curve(50.0, 300.0, 1500.0, [25.0, 30.0]),
             t_on=4, t_off=4, su=800.0, sd=100.0, hours=10),
        unit("G2", "b2", 20.0, 200.0, 100.0, curve(20.0, 200.0, 200.0, [8.5, 9.0]),
             gfu=True, gas_node="g3", t_on=2, t_off=2, su=300.0, sd=50.0, hours=10),
    ]
    c_feed = 12.0
    econ = {"da_weight": 0.05, "dev_penalty_pos": 0.0, "dev_penalty_neg": 0.0,
            "pressure_bounds": {"g1": [200.0, 600.0], "g2": [300.0, 600.0],
                                "g3": [200.0, 600.0]}}
    if congested:
        units[0] = unit("G1", "b1", 50.0, 200.0, 100.0,
                        curve(50.0, 200.0, 1500.0, [25.0, 28.0]),
                        t_on=4, t_off=4, su=800.0, sd=100.0, hours=10)
        units[1]["p_max"] = 250.0
        units[1]["heat_curve"]["breakpoints"] = curve(20.0, 250.0, 200.0, [8.5, 9.0])
        units.append(unit("G3", "b3", 20.0, 150.0, 150.0,
                          curve(20.0, 150.0, 1000.0, [40.0, 45.0]),
                          on=False, hours=6, t_on=3, t_off=2, su=1500.0, sd=100.0))
        c_feed = 2.3
        econ["dev_penalty_pos"] = 0.5
        econ["dev_penalty_neg"] = 0.2
    return {
        "horizon": T,
        "slack_bus": "b1",
        "buses": buses,
        "lines": lines,
        "units": units,
        "windfarms": [wind("W1", "b3", 100.0)],
        "gas_nodes": [{"id": "g1"}, {"id": "g2"}, {"id": "g3"}],
        "pipelines": [pipe("p21", "g2", "g1", 12.0), pipe("p23", "g2", "g3", c_feed)],
        "compressors": [],
        "suppliers": [{"id": "s1", "node": "g2", "capacity": 20000.0, "unit_cost": 2.0}],
        "gas_loads": [gas_load("d1", "g1", 1000.0, "high", 100.0),
                      gas_load("d2", "g3", 300.0, "low", 2.5)],
        "economics": econ,
    }


def gas4():
    """Meshed 4-node network with a compressor; one GFU for the power side."""
    sys = toy(False)
    sys["units"] = [unit("G2", "b1", 20.0, 200.0, 100.0,
                         curve(20.0, 200.0, 200.0, [8.5, 9.0]), gfu=True,
                         gas_node="n4", hours=10)]
    sys["buses"] = [bus("b1", 150.0), bus("b2", 0.0)]
    sys["lines"] = [line("l12", "b1", "b2", 0.1, 500.0)]
    sys["windfarms"] = [wind("W1", "b2", 50.0)]
    sys["gas_nodes"] = [{"id": f"n{i}"} for i in range(1, 5)]
    sys["pipelines"] = [pipe("p12", "n1", "n2", 6.0), pipe("p23", "n2", "n3", 5.0),
                        pipe("p34", "n3", "n4", 5.0), pipe("p24", "n2", "n4", 3.0)]
    sys["compressors"] = [{"id": "c1", "from_node": "n1", "to_node": "n3",
                           "h_min": 0.0, "h_max": 2000.0, "k1": 0.1, "k2": 1.0,
                           "alpha": 1.0, "gas_coeffs": [0.0, 0.01, 0.0]}]
    sys["suppliers"] = [{"id": "s1", "node": "n1", "capacity": 8000.0, "unit_cost": 2.0}]
    sys["gas_loads"] = [gas_load("d1", "n3", 900.0, "high", 100.0),
                        gas_load("d2", "n4", 400.0, "low", 2.5)]
    sys["economics"]["pressure_bounds"] = {"n1": [400.0, 700.0], "n2": [250.0, 700.0],
                                           "n3": [200.0, 700.0], "n4": [200.0, 700.0]}
    return sys


def medium():
    """12 units, 8 buses, 8 gas nodes."""
    peaks = [90.0, 120.0, 60.0, 140.0, 80.0, 130.0, 100.0, 110.0]
    buses = [bus(f"b{i + 1}", p) for i, p in enumerate(peaks)]
    edges = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 1), (2, 6), (3, 7)]
    lines = [line(f"l{a}{b}", f"b{a}", f"b{b}", 0.08 + 0.01 * (k % 4), 220.0)
             for k, (a, b) in enumerate(edges)]
    units = []
    specs = [
        # id, bus, pmin, pmax, slopes, c0, gfu node, t_on, t_off, su, on
        ("U1", 1, 60.0, 180.0, [18.0, 20.0], 1200.0, None, 6, 6, 2000.0, True),
        ("U2", 4, 60.0, 180.0, [19.0, 21.0], 1250.0, None, 6, 6, 2000.0, True),
        ("U3", 6, 40.0, 120.0, [24.0, 27.0], 900.0, None, 4, 4, 900.0, True),
        ("U4", 8, 30.0, 100.0, [26.0, 29.0], 800.0, None, 4, 4, 800.0, False),
        ("U5", 3, 20.0, 80.0, [38.0, 42.0], 600.0, None, 2, 2, 400.0, False),
        ("U6", 5, 20.0, 80.0, [40.0, 44.0], 620.0, None, 2, 2, 400.0, False),
        ("U7", 7, 15.0, 60.0, [48.0, 55.0], 500.0, None, 1, 1, 200.0, False),
        ("U8", 2, 15.0, 60.0, [50.0, 58.0], 520.0, None, 1, 1, 200.0, False),
        ("U9", 2, 30.0, 150.0, [8.2, 8.8], 280.0, "n5", 3, 3, 500.0, True),
        ("U10", 6, 30.0, 150.0, [8.4, 9.0], 290.0, "n7", 3, 3, 500.0, True),
        ("U11", 8, 20.0, 100.0, [9.0, 9.8], 200.0, "n8", 2, 2, 300.0, False),
        ("U12", 5, 20.0, 100.0, [9.2, 10.0], 210.0, "n6", 2, 2, 300.0, False),
    ]
    for (i, b, lo, hi, sl, c0, node, ton, toff, su, on) in specs:
        units.append(unit(i, f"b{b}", lo, hi, r(0.6 * hi), curve(lo, hi, c0, sl),
                          gfu=node is not None, gas_node=node, on=on, hours=8,
                          t_on=ton, t_off=toff, su=su, sd=0.1 * su))
    nodes = [{"id": f"n{i}"} for i in range(1, 9)]
    pipes = [pipe("p12", "n1", "n2", 9.0), pipe("p23", "n2", "n3", 8.0),
             pipe("p34", "n3", "n4", 8.0), pipe("p45", "n4", "n5", 6.0),
             pipe("p26", "n2", "n6", 5.0), pipe("p67", "n6", "n7", 4.0),
             pipe("p48", "n4", "n8", 4.5), pipe("p78", "n7", "n8", 3.0)]
    comps = [{"id": "c13", "from_node": "n1", "to_node": "n3", "h_min": 0.0,
              "h_max": 3000.0, "k1": 0.08, "k2": 1.0, "alpha": 1.0,
              "gas_coeffs": [0.0, 0.01, 0.0]}]
    suppliers = [{"id": "s1", "node": "n1", "capacity": 6000.0, "unit_cost": 2.0},
                 {"id": "s2", "node": "n4", "capacity": 3000.0, "unit_cost": 2.0},
                 {"id": "s3", "node": "n6", "capacity": 1500.0, "unit_cost": 2.0}]
    loads = [gas_load("d1", "n2", 900.0, "high", 80.0),
             gas_load("d2", "n3", 700.0, "high", 80.0),
             gas_load("d3", "n5", 300.0, "low", 2.6),
             gas_load("d4", "n7", 350.0, "low", 2.4),
             gas_load("d5", "n8", 500.0, "high", 80.0)]
    pb = {f"n{i}": [200.0, 650.0] for i in range(1, 9)}
    pb["n1"] = [350.0, 650.0]
    return {
        "horizon": T,
        "slack_bus": "b1",
        "buses": buses,
        "lines": lines,
        "units": units,
        "windfarms": [wind("W1", "b3", 120.0), wind("W2", "b7", 100.0, 0.025)],
        "gas_nodes": nodes,
        "pipelines": pipes,
        "compressors": comps,
        "suppliers": suppliers,
        "gas_loads": loads,
        "economics": {"da_weight": 0.05, "dev_penalty_pos": 0.4, "dev_penalty_neg": 0.2,
                      "pressure_bounds": pb},
    }


def dump(name, obj):
    (HERE / name).write_text(json.dumps(obj, indent=1) + "\n")


if __name__ == "__main__":
    dump("toy-3bus.json", toy(False))
    dump("toy-congested.json", toy(True))
    dump("gas-4node.json", gas4())
    dump("medium.json", medium())
