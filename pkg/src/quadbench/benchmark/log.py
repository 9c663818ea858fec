"""Episode logs: uniformly sampled controller runs with a fixed CSV schema.

Column order is part of the file contract:

    time, base pose (pos xyz + quat wxyz), base velocity (lin xyz + ang xyz),
    joint angles (12), joint velocities (12), targets (12), torques (12),
    foot normal forces (4), event code

Event codes are bit flags: 1 = perturbation active, 2 = non-foot ground
contact (failure), 4 = episode reset. Floats are written with shortest
round-trip repr so a persisted log reloads bit-identically.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import SchemaError

LOG_FORMAT_VERSION = 1

EVENT_PERTURBATION = 1
EVENT_FAILURE = 2
EVENT_RESET = 4

_COLUMNS = (
    ["time"]
    + [f"pos_{c}" for c in "xyz"]
    + [f"quat_{c}" for c in "wxyz"]
    + [f"vel_{c}" for c in "xyz"]
    + [f"angvel_{c}" for c in "xyz"]
    + [f"q_{j}" for j in range(12)]
    + [f"qd_{j}" for j in range(12)]
    + [f"target_{j}" for j in range(12)]
    + [f"torque_{j}" for j in range(12)]
    + [f"contact_fn_{leg}" for leg in range(4)]
    + ["event"]
)


@dataclass
class Event:
    time: float
    kind: str          # "perturbation_start" | "perturbation_end" | "failure" | "reset"


@dataclass
class EpisodeLog:
    times: np.ndarray              # (N,)
    positions: np.ndarray          # (N, 3)
    orientations: np.ndarray       # (N, 4) wxyz
    joint_angles: np.ndarray       # (N, 12)
    linear_velocities: np.ndarray  # (N, 3)
    angular_velocities: np.ndarray  # (N, 3)
    joint_velocities: np.ndarray   # (N, 12)
    targets: np.ndarray            # (N, 12)
    torques: np.ndarray            # (N, 12)
    foot_normals: np.ndarray       # (N, 4)
    event_codes: np.ndarray        # (N,) int
    events: list[Event] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    plan_costs: np.ndarray | None = None   # MPC only; not persisted in the CSV

    def __len__(self) -> int:
        return len(self.times)

    @property
    def log_period(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def validate(self) -> None:
        n = len(self.times)
        if n >= 2:
            periods = np.diff(self.times)
            if not np.allclose(periods, periods[0], atol=1e-9):
                raise SchemaError("log timestamps are not uniform")
        for evs in zip(self.events, self.events[1:]):
            if evs[0].time > evs[1].time + 1e-12:
                raise SchemaError("events are not time-ordered")

    def rows(self) -> np.ndarray:
        return np.column_stack(
            [
                self.times,
                self.positions,
                self.orientations,
                self.linear_velocities,
                self.angular_velocities,
                self.joint_angles,
                self.joint_velocities,
                self.targets,
                self.torques,
                self.foot_normals,
                self.event_codes.astype(float),
            ]
        )


def _fmt(x: float) -> str:
    return repr(float(x))


def save_episode_csv(log: EpisodeLog, path) -> None:
    path = Path(path)
    config_hash = log.metadata.get("config_hash", "unset")
    lines = [f"# config_hash={config_hash}", f"# log_format={LOG_FORMAT_VERSION}"]
    lines.append(",".join(_COLUMNS))
    for row in log.rows():
        cells = [_fmt(v) for v in row[:-1]] + [str(int(row[-1]))]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    meta_path = path.with_suffix(path.suffix + ".meta")
    meta_lines = [f"{k} = {log.metadata[k]}" for k in sorted(log.metadata)]
    for event in log.events:
        meta_lines.append(f"event.{event.kind} = {_fmt(event.time)}")
    meta_path.write_text("\n".join(meta_lines) + "\n")


def load_episode_csv(path) -> EpisodeLog:
    path = Path(path)
    lines = path.read_text().splitlines()
    header_idx = 0
    version = None
    for i, line in enumerate(lines):
        if line.startswith("#"):
            if "log_format=" in line:
                version = int(line.split("log_format=")[1])
            continue
        header_idx = i
        break
    if version != LOG_FORMAT_VERSION:
        raise SchemaError(f"unsupported log format version {version!r}")
    header = lines[header_idx].split(",")
    if header != _COLUMNS:
        raise SchemaError("log columns do not match the fixed schema")
    data = np.array(
        [[float(c) for c in line.split(",")] for line in lines[header_idx + 1:]]
    )
    metadata = {}
    events = []
    meta_path = path.with_suffix(path.suffix + ".meta")
    if meta_path.exists():
        for line in meta_path.read_text().splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition(" = ")
            if key.startswith("event."):
                events.append(Event(time=float(value), kind=key[len("event."):]))
            else:
                metadata[key] = value
    events.sort(key=lambda e: e.time)
    return EpisodeLog(
        times=data[:, 0],
        positions=data[:, 1:4],
        orientations=data[:, 4:8],
        linear_velocities=data[:, 8:11],
        angular_velocities=data[:, 11:14],
        joint_angles=data[:, 14:26],
        joint_velocities=data[:, 26:38],
        targets=data[:, 38:50],
        torques=data[:, 50:62],
        foot_normals=data[:, 62:66],
        event_codes=data[:, 66].astype(int),
        events=events,
        metadata=metadata,
    )


class LogBuilder:
    """Accumulates uniformly-sampled rows and events into an EpisodeLog."""

    def __init__(self, metadata: dict | None = None):
        self.rows = []
        self.events: list[Event] = []
        self.plan_costs = []
        self.metadata = dict(metadata or {})

    def add_row(self, state, targets, torques, foot_normals, event_code,
                plan_cost=np.nan):
        self.rows.append(
            (
                state.time,
                state.position.copy(),
                state.orientation.copy(),
                state.joint_angles.copy(),
                state.linear_velocity.copy(),
                state.angular_velocity.copy(),
                state.joint_velocities.copy(),
                np.asarray(targets, dtype=float).copy(),
                np.asarray(torques, dtype=float).copy(),
                np.asarray(foot_normals, dtype=float).copy(),
                int(event_code),
            )
        )
        self.plan_costs.append(plan_cost)

    def add_event(self, time: float, kind: str):
        self.events.append(Event(time=float(time), kind=kind))

    def build(self) -> EpisodeLog:
        self.events.sort(key=lambda e: e.time)
        cols = list(zip(*self.rows))
        log = EpisodeLog(
            times=np.array(cols[0]),
            positions=np.array(cols[1]),
            orientations=np.array(cols[2]),
            joint_angles=np.array(cols[3]),
            linear_velocities=np.array(cols[4]),
            angular_velocities=np.array(cols[5]),
            joint_velocities=np.array(cols[6]),
            targets=np.array(cols[7]),
            torques=np.array(cols[8]),
            foot_normals=np.array(cols[9]),
            event_codes=np.array(cols[10], dtype=int),
            events=self.events,
            metadata=self.metadata,
            plan_costs=np.array(self.plan_costs),
        )
        log.validate()
        return log


def terrain_hash(terrain) -> str:
    parts = [
        terrain.mode,
        repr(float(terrain.friction)),
        repr(float(terrain.contact_stiffness)),
        repr(float(terrain.contact_damping)),
        repr(float(terrain.resolution)),
        repr(tuple(np.asarray(terrain.origin, dtype=float))),
    ]
    digest = hashlib.sha256("|".join(parts).encode())
    if terrain.heights is not None:
        digest.update(np.ascontiguousarray(terrain.heights, dtype=np.float64).tobytes())
    return digest.hexdigest()[:16]
