"""Line-delimited JSON records with full-precision floats.

trajectory: {"t": float, "x": [float, ...]}
history:    {"theta": float, "x": [...]}
zero:       {"point": [...], "sign": int, "residual": float}
pair:       {"index": int, "lambda": float, "arclength": float, "sup_norm": float,
             "residual": float, "loop": [[t, x1, ..., xk], ...]}
"""
from __future__ import annotations

import json
from typing import IO, Iterable

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17e")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_fmt(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot encode {type(value).__name__}")


def dumps(record: dict) -> str:
    """One record per line; floats in .17e so values round-trip exactly."""
    return _fmt(record)


def write_records(records: Iterable[dict], stream: IO[str]):
    for rec in records:
        stream.write(dumps(rec) + "\n")


def read_records(stream: IO[str]) -> list[dict]:
    return [json.loads(line) for line in stream if line.strip()]


def trajectory_records(traj, t0: float | None = None):
    for t, x in zip(traj.times, traj.states):
        if t0 is None or t >= t0:
            yield {"t": t, "x": x}


def history_records(phi):
    for th, x in zip(phi.grid, phi.values):
        yield {"theta": th, "x": x}


def zero_records(zeros):
    for z in zeros:
        yield {"point": z.point, "sign": int(z.local_sign), "residual": z.residual}


def pair_record(index: int, pair, arclength: float = 0.0) -> dict:
    loop = np.column_stack([pair.loop_times(), pair.loop_states()])
    return {"index": index, "lambda": pair.lam, "arclength": arclength, "sup_norm": pair.sup_norm,
            "residual": pair.residual, "loop": loop}


def branch_records(branch):
    for i, (pair, s) in enumerate(zip(branch.pairs, branch.arclength)):
        yield pair_record(i, pair, s)
