"""Scene builders shared by the unit and acceptance tests."""

from __future__ import annotations

import math

from nrems.ems import (
    AnchorScheme,
    build_modular_ems,
    elements_per_module,
    select_anchor_points,
)
from nrems.geometry import SPEED_OF_LIGHT, Point2, SourceTrajectory
from nrems.imaging import GridSpec
from nrems.synth import NoiseModel, RadarConfig, TargetSet, thermal_noise_power
from nrems.waveform import make_pulse, range_resolution

F0 = 77e9
LAM = SPEED_OF_LIGHT / F0
SPEED = 10.0
TX_POWER = 1e-4  # -10 dBm

# smallest complete scenario document, quick enough for CLI round trips
TINY = {
    "name": "tiny",
    "radar": {
        "f0": 77e9,
        "bandwidth": 1e9,
        "pointing_deg": 60.0,
        "beamwidth_deg": 1.0,
        "tx_power_dbm": -10.0,
        "trajectory": {"d_i": 10.0, "speed": 10.0},
    },
    "ems": {"clusters": 1, "modules_per_cluster": 3, "decimation": 2, "anchor_points": [[0.0, 15.0]]},
    "targets": [{"position": [0.0, 15.0], "rcs": 0.5}],
    "noise": {"seed": 3},
    "grid": {"area": [-0.3, 0.3, 14.7, 15.3], "pitch": 0.02},
    "snr": {"area": [-1.0, 1.0, 14.0, 16.0], "pitch": 0.5},
}


def sweep(layout, psi, height, n_snapshots=None, start_x=None, dtau=None):
    """Trajectory whose boresight walks the skin at lambda/4 per snapshot."""
    dtau = LAM / 4.0 / SPEED if dtau is None else dtau
    lead = height / math.tan(psi) if psi < math.pi / 2 else 0.0
    x_first = layout.element_x[0] if start_x is None else start_x
    if n_snapshots is None:
        duration = float(layout.element_x[-1] - layout.element_x[0]) / SPEED
    else:
        duration = max(n_snapshots - 1, 0.5) * dtau
    return SourceTrajectory(Point2(x_first - lead, height), SPEED, duration, dtau)


def inset_scene(bandwidth=1e9, dpsi_deg=1.0, decimation=2, mirror=False, single=False):
    """Target at 20 m in front of one 5-module cluster, radar 10 m from the skin, psi = 90 deg."""
    psi = math.pi / 2
    pitch = decimation * LAM / 4.0
    anchor = Point2(0.0, 20.0)
    layout = build_modular_ems(1, 5, elements_per_module(0.1, pitch), pitch, LAM, psi, [anchor], source_height=10.0)
    if mirror:
        layout = layout.as_mirror()
    if single:
        traj = SourceTrajectory(Point2(0.0, 10.0), SPEED, 0.5 * LAM / 4 / SPEED, LAM / 4 / SPEED)
    else:
        traj = sweep(layout, psi, 10.0)
    radar = RadarConfig(F0, bandwidth, psi, traj, dpsi=math.radians(dpsi_deg), tx_power=TX_POWER)
    return radar, layout, TargetSet.single(anchor, 0.1), make_pulse(F0, bandwidth)


def consistency_scene(bandwidth):
    """psi = 30 deg, D_i = 50 m, 64 lit elements, anchor and target at (0, 150)."""
    psi = math.radians(30.0)
    d_i = 50.0
    height = d_i * math.sin(psi)
    pitch = LAM / 2.0
    dpsi = 64 * pitch * math.sin(psi) / d_i
    anchor = Point2(0.0, 150.0)
    layout = build_modular_ems(1, 4, 32, pitch, LAM, psi, [anchor], source_height=height)
    m = 32
    dtau = LAM / 4 / SPEED
    start = -0.5 * m * LAM / 4
    traj = SourceTrajectory(Point2(start - d_i * math.cos(psi), height), SPEED, (m - 1) * dtau, dtau)
    radar = RadarConfig(F0, bandwidth, psi, traj, dpsi=dpsi, tx_power=TX_POWER)
    return radar, layout, TargetSet.single(anchor, 0.1), make_pulse(F0, bandwidth)


def desk_scene():
    """Six clusters focused on 15/25 m arcs over a 10 x 20 m area, psi = 60 deg."""
    psi = math.radians(60.0)
    height = 10.0 * math.sin(psi)
    pitch = LAM / 2.0
    area = (-5.0, 5.0, 10.0, 30.0)
    anchors = select_anchor_points(AnchorScheme((15.0, 25.0), 3, area))
    layout = build_modular_ems(6, 5, elements_per_module(0.1, pitch), pitch, LAM, psi, anchors, source_height=height)
    radar = RadarConfig(F0, 1e9, psi, sweep(layout, psi, height), dpsi=math.radians(1.0), tx_power=TX_POWER)
    noise = NoiseModel(thermal_noise_power(1e9, 10.0), 0)
    probes = GridSpec.from_bounds(*area, 0.5)
    return radar, layout, anchors, noise, probes, make_pulse(F0, 1e9)


def ghost_scene(single: bool):
    """Two clusters anchored on a common 20 m arc; target on the first anchor."""
    psi = math.radians(60.0)
    height = 10.0 * math.sin(psi)
    pitch = LAM / 2.0
    anchors = select_anchor_points(AnchorScheme((20.0,), 2, (-6.0, 6.0, 10.0, 30.0)))
    layout = build_modular_ems(2, 5, elements_per_module(0.1, pitch), pitch, LAM, psi, anchors, source_height=height)
    if single:
        # boresight on the boundary between the two clusters
        traj = sweep(layout, psi, height, n_snapshots=1, start_x=0.0)
    else:
        traj = sweep(layout, psi, height)
    radar = RadarConfig(F0, 1e9, psi, traj, dpsi=math.radians(1.0), tx_power=TX_POWER)
    return radar, layout, anchors, TargetSet.single(anchors[0], 0.5), make_pulse(F0, 1e9)


def random_scene(rng, spread=None):
    """One focused cluster with a target placed near its anchor, random geometry.

    By default the target falls inside the skin's illuminated footprint: up to
    one cross-range cell ``lambda D_o / (2 A')`` off the anchor in x and half a
    range cell in y.  ``spread`` instead draws both offsets from ``U(-spread, spread)``.
    """
    psi = math.radians(rng.uniform(50.0, 90.0))
    height = rng.uniform(6.0, 12.0) * math.sin(psi)
    pitch = LAM / 2.0
    anchor = Point2(rng.uniform(-3.0, 3.0), rng.uniform(12.0, 25.0))
    layout = build_modular_ems(1, 3, 51, pitch, LAM, psi, [anchor], source_height=height)
    if spread is None:
        aperture = layout.extent[1] - layout.extent[0]
        half_x = LAM * math.hypot(anchor.x - layout.center_x, anchor.y) / (2 * aperture)
        half_y = range_resolution(1e9) / 2
    else:
        half_x = half_y = spread
    target = Point2(anchor.x + rng.uniform(-half_x, half_x), anchor.y + rng.uniform(-half_y, half_y))
    radar = RadarConfig(F0, 1e9, psi, sweep(layout, psi, height), dpsi=math.radians(1.0), tx_power=TX_POWER)
    return radar, layout, TargetSet.single(target, 0.5), make_pulse(F0, 1e9)
