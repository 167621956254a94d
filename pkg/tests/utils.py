from pathlib import Path

import numpy as np
import pandas as pd

from src.wpdiff.domain.model import GridSpec, PacketSpec1D
from src.wpdiff.physics.stationary1d import free_packet


def read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def grid_from_dx(xmin: float, xmax: float, dx: float, **kwargs) -> GridSpec:
    return GridSpec(xmin=xmin, xmax=xmax, nx=int(round((xmax - xmin) / dx)) + 1, **kwargs)


def free_gaussian(packet: PacketSpec1D, x: np.ndarray, t: float) -> np.ndarray:
    """Unit-norm free Schrödinger packet in closed form."""
    return free_packet(packet, x, t, normalized=True)


def write_yaml(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


SMALL_SCHRODINGER_CONFIG = """
run:
  mode: schrodinger1d
  label: snap
packet:
  sigma: 1.0
  q0: 0.5
  x0: 0.0
  mass: 1.0
grid:
  xmin: -15.0
  xmax: 15.0
  nx: 601
  dt: 0.01
  t_final: 1.0
  snapshot_times: [0.5]
"""

SMALL_ANALYTIC_CONFIG = """
run:
  mode: analytic1d
packet:
  sigma: 0.5
  q0: 0.4
  x0: -60.0
  mass: 40.0
potential:
  kind: square
  v0: -1.0
  w: 1.0
grid:
  xmin: -120000.0
  xmax: -2.0
  nx: 61
  t_final: 12000000.0
"""
