import pathlib

import numpy as np
import pytest

from zoneclear import dataio, study
from zoneclear.model import (AC, HVDC, Generator, Interconnector, LossModel,
                             MarketInstance, Zone)

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"


# Published quadratic coefficients and factors for the ten-line HVDC fleet
# used as calibration reference data. Columns: a, b, c, alpha, beta, and a
# nominal rating for RMSE evaluation.
FLEET = {
    "Storebaelt": (2.5e-5, 0.0, 1.7590, 0.0142, 1.7590, 600.0),
    "Skagerrak": (1.7e-5, 0.0, 8.2405, 0.0159, 8.2405, 1700.0),
    "KontiSkan": (3.5e-5, 0.0, 2.1616, 0.0156, 2.1616, 740.0),
    "BalticCable": (4.1e-5, 0.0, 1.6633, 0.0184, 1.6633, 600.0),
    "SwePol": (4.5e-5, 0.0, 1.5907, 0.0266, 1.5907, 600.0),
    "Kontek": (3.1e-5, 0.0, 1.9659, 0.0184, 1.9659, 600.0),
    "FennoSkan": (2.6e-5, 0.0, 4.6490, 0.0124, 4.6490, 1200.0),
    "EstLink": (3.3e-5, 0.0, 4.4000, 0.0090, 4.4000, 350.0),
    "NordBalt": (2.2e-5, 0.0, 2.6478, 0.0132, 2.6478, 700.0),
    "NorNed": (4.3e-5, 0.0062, 1.4971, 0.0373, 1.4971, 700.0),
}


@pytest.fixture(scope="session")
def fleet_lines():
    """The reference HVDC fleet as interconnectors (between dummy zones)."""
    lines = []
    for name, (a, b, c, _alpha, _beta, rated) in FLEET.items():
        lines.append(Interconnector(name, HVDC, "X", "Y", rated, rated, rated,
                                    LossModel(quad_a=a, quad_b=b, quad_c=c)))
    return lines


@pytest.fixture(scope="session")
def mini_nordic():
    """The bundled 24-hour dataset, loaded once per session."""
    return dataio.load_dataset(DATA_DIR / "mini_nordic" / "manifest.json")


@pytest.fixture(scope="session")
def mini_nordic_60(mini_nordic):
    """Mini-Nordic calibrated at the default 60 MW segment width."""
    return study.calibrate_series(mini_nordic.series, mini_nordic.histories, 60.0)


def two_zone_instance(*, demand_b: float = 400.0, cost_a: float = 10.0,
                      cost_b: float = 50.0, atc: float = 450.0,
                      rated: float = 450.0, quad_a: float = 3.5e-5,
                      quad_c: float = 2.0) -> MarketInstance:
    """Exporter zone A, importer zone B, one loss-modeled HVDC line."""
    return MarketInstance(
        0,
        (Zone("A", 100.0), Zone("B", demand_b)),
        (Generator("gA", "A", cost_a, 0.0, 2000.0),
         Generator("gB", "B", cost_b, 0.0, 1000.0)),
        (Interconnector("L", HVDC, "A", "B", atc, atc, rated,
                        LossModel(quad_a=quad_a, quad_b=0.0, quad_c=quad_c)),),
    )


def random_instance(rng: np.random.Generator, *, n_zones: int = 3,
                    positive_costs: bool = True) -> MarketInstance:
    """Random connected instance; all lines carry loss models."""
    zone_ids = [f"Z{i}" for i in range(n_zones)]
    zones = tuple(Zone(z, float(rng.uniform(50, 400))) for z in zone_ids)
    gens = []
    for i, z in enumerate(zone_ids):
        lo_cost = 1.0 if positive_costs else -50.0
        gens.append(Generator(f"g{i}", z, float(rng.uniform(lo_cost, 100)),
                              0.0, float(rng.uniform(500, 1500))))
    lines = []
    for i in range(n_zones - 1):
        atc = float(rng.uniform(100, 400))
        model = LossModel(quad_a=float(rng.uniform(1e-5, 8e-5)), quad_b=0.0,
                          quad_c=float(rng.uniform(0.0, 5.0)))
        lines.append(Interconnector(f"l{i}", HVDC, zone_ids[i], zone_ids[i + 1],
                                    atc, atc, atc, model))
    return MarketInstance(0, zones, tuple(gens), tuple(lines))
