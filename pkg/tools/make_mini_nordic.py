"""Generate the bundled mini-Nordic dataset (data/mini_nordic).

Deterministic synthetic 24-hour, 11-zone system: cheap hydro in the north,
thermal in the south, one large HVDC export corridor plus several small
loss-modeled ties. Run from the repository root:

    python3 tools/make_mini_nordic.py
"""

import math
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "mini_nordic"

ZONES = ["N1", "N2", "N3", "N4", "S1", "S2", "S3", "S4", "E1", "E2", "D1"]

GENERATORS = [
    # id, zone, cost, p_min, p_max
    ("hydro_n1", "N1", 8.0, 0.0, 1500.0),
    ("hydro_n2", "N2", 10.0, 0.0, 1200.0),
    ("hydro_n3", "N3", 12.0, 0.0, 900.0),
    ("wind_n4", "N4", 5.0, 0.0, 400.0),
    ("gas_n4", "N4", 55.0, 0.0, 300.0),
    ("nuke_s1", "S1", 20.0, 0.0, 1000.0),
    ("chp_s2", "S2", 45.0, 0.0, 800.0),
    ("gas_s3", "S3", 60.0, 0.0, 700.0),
    ("oil_s4", "S4", 75.0, 0.0, 600.0),
    ("nuke_e1", "E1", 22.0, 0.0, 800.0),
    ("gas_e2", "E2", 65.0, 0.0, 500.0),
    ("coal_d1", "D1", 90.0, 0.0, 900.0),
]

LINES = [
    # id, kind, from, to, rated, quad_a, quad_b, quad_c  (blank a -> no loss model)
    ("N1-N2", "AC", "N1", "N2", 1000.0, None, None, None),
    ("N2-N3", "AC", "N2", "N3", 800.0, None, None, None),
    ("N4-N1", "AC", "N4", "N1", 500.0, None, None, None),
    ("N3-S1", "AC", "N3", "S1", 700.0, None, None, None),
    ("S1-S2", "AC", "S1", "S2", 900.0, None, None, None),
    ("S2-S3", "AC", "S2", "S3", 700.0, None, None, None),
    ("S3-S4", "AC", "S3", "S4", 500.0, None, None, None),
    ("E1-E2", "AC", "E1", "E2", 600.0, None, None, None),
    ("AL1", "AC", "S1", "E1", 60.0, 1.5e-4, 0.0, 0.5),
    ("AL2", "AC", "N3", "N4", 48.0, 2.5e-4, 0.0, 0.3),
    ("HV1", "HVDC", "N2", "D1", 601.0, 3.5e-5, 0.0, 2.0),
    ("HV2", "HVDC", "S4", "D1", 55.0, 4.0e-4, 0.0, 0.8),
    ("HV3", "HVDC", "E2", "S3", 40.0, 5.0e-4, 0.0, 0.5),
]

BASE_DEMAND = {
    "N1": 250.0, "N2": 300.0, "N3": 280.0, "N4": 220.0,
    "S1": 600.0, "S2": 650.0, "S3": 550.0, "S4": 450.0,
    "E1": 500.0, "E2": 380.0, "D1": 950.0,
}
# per-zone amplitude of the daily demand swing
SWING = {
    "N1": 40.0, "N2": 50.0, "N3": 45.0, "N4": 35.0,
    "S1": 120.0, "S2": 130.0, "S3": 110.0, "S4": 90.0,
    "E1": 100.0, "E2": 70.0, "D1": 180.0,
}

HOURS = 24


def demand(zone: str, h: int) -> float:
    # evening peak around hour 18, morning shoulder at 8
    daily = math.sin((h - 6) * math.pi / 12.0)
    return round(BASE_DEMAND[zone] + SWING[zone] * daily, 1)


def atc(line_id: str, rated: float, h: int) -> tuple[float, float]:
    if line_id == "S1-S2" and 10 <= h <= 14:
        return rated * 0.7, rated  # midday maintenance derating southbound
    if line_id == "HV2" and h in (3, 4):
        return 30.0, 30.0
    return rated, rated


def history(line_id: str, rated: float) -> list[float]:
    """Synthetic signed flow samples: a week of typical usage."""
    out = []
    for h in range(7 * 24):
        daily = math.sin((h - 6) * math.pi / 12.0)
        if line_id == "HV1":
            f = 380.0 + 180.0 * daily
        elif line_id == "HV2":
            f = 35.0 + 15.0 * daily
        elif line_id == "HV3":
            f = -10.0 + 25.0 * daily
        elif line_id == "AL1":
            f = 20.0 + 30.0 * daily
        else:  # AL2
            f = -15.0 + 25.0 * daily
        out.append(round(max(-rated, min(rated, f)), 1))
    return out


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "zones.csv").write_text(
        "zone\n" + "".join(f"{z}\n" for z in ZONES))
    (OUT / "generators.csv").write_text(
        "id,zone,cost,p_min,p_max\n" + "".join(
            f"{gid},{z},{c},{lo},{hi}\n" for gid, z, c, lo, hi in GENERATORS))
    rows = []
    for lid, kind, zf, zt, rated, a, b, c in LINES:
        qa = "" if a is None else repr(a)
        qb = "" if a is None else repr(b)
        qc = "" if a is None else repr(c)
        rows.append(f"{lid},{kind},{zf},{zt},{rated!r},{qa},{qb},{qc}\n")
    (OUT / "interconnectors.csv").write_text(
        "id,kind,from_zone,to_zone,rated_mw,quad_a,quad_b,quad_c\n" + "".join(rows))
    with open(OUT / "atc.csv", "w") as fh:
        fh.write("hour,line,fwd_mw,rev_mw\n")
        for h in range(HOURS):
            for lid, _, _, _, rated, *_ in LINES:
                fwd, rev = atc(lid, rated, h)
                fh.write(f"{h},{lid},{fwd!r},{rev!r}\n")
    with open(OUT / "demand.csv", "w") as fh:
        fh.write("hour,zone,mw\n")
        for h in range(HOURS):
            for z in ZONES:
                fh.write(f"{h},{z},{demand(z, h)!r}\n")
    with open(OUT / "injections.csv", "w") as fh:
        fh.write("hour,zone,mw\n")
        for h in range(HOURS):
            for z in ZONES:
                inj = 30.0 if z == "N4" else 0.0  # small must-run river hydro
                fh.write(f"{h},{z},{inj!r}\n")
    with open(OUT / "flows.csv", "w") as fh:
        fh.write("hour,line,mw\n")
        for lid, _, _, _, rated, a, *_ in LINES:
            if a is None:
                continue
            for h, f in enumerate(history(lid, rated)):
                fh.write(f"{h},{lid},{f!r}\n")
    (OUT / "manifest.json").write_text(
        '{\n'
        '  "zones": "zones.csv",\n'
        '  "generators": "generators.csv",\n'
        '  "interconnectors": "interconnectors.csv",\n'
        '  "atc": "atc.csv",\n'
        '  "demand": "demand.csv",\n'
        '  "injections": "injections.csv",\n'
        '  "flows": "flows.csv"\n'
        '}\n')
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
