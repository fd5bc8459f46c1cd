"""Orbit/branch persistence (JSON) and CSV export.

Floats are written with ``repr``, the shortest decimal string that reads back
to the identical double, so a write/read cycle is exact.  The collision
velocity ``-inf`` is stored as ``-Infinity``.
"""

from __future__ import annotations

import csv
import json
import time
from pathlib import Path

import numpy as np

from .continuation import Branch
from .errors import SchemaError
from .integrate import Trajectory
from .model import MeanPair
from .solve import SolvedOrbit, UnknownVector, extend_symmetric

SCHEMA_VERSION = 1
_ARRAYS = ("t", "q1", "q2", "v1", "v2", "energy", "iq1", "iq2")
_REQUIRED = ("t", "q1", "q2", "v1", "v2")
TRAJECTORY_HEADER = ("t", "q1", "q2", "v1", "v2", "E")
SUMMARY_HEADER = ("r", "a1", "a2", "m1", "m2", "delta", "q1_end", "energy", "min_gap")


def _floats(a) -> list:
    return [float(v) for v in a]


def orbit_payload(orb: SolvedOrbit, timestamp: str | None = None) -> dict:
    tr = orb.traj
    meta = dict(orb.metadata)
    meta["iterations"] = orb.iterations
    meta["timestamp"] = timestamp if timestamp is not None else time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "orbit",
        "r": float(orb.r),
        "unknowns": dict(zip(UnknownVector._fields, _floats(orb.unknowns))),
        "meanfield": dict(zip(MeanPair._fields, _floats(tr.meanfield))),
        "residual_norm": float(orb.residual_norm),
        "energy": float(orb.energy),
        "T": tr.T,
        "samples": {name: _floats(getattr(tr, name)) for name in _ARRAYS},
        "metadata": meta,
    }


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def orbit_from_payload(data: dict) -> SolvedOrbit:
    try:
        _require(isinstance(data, dict), "orbit payload must be an object")
        _require(data.get("schema_version") == SCHEMA_VERSION,
                 f"schema_version must be {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
        samples = data["samples"]
        arrays = {k: np.array(samples[k], dtype=float) for k in _REQUIRED}
        n = len(arrays["t"])
        for k in _ARRAYS[len(_REQUIRED):]:
            arrays[k] = np.array(samples[k], dtype=float) if k in samples else np.full(n, np.nan)
        r = float(data["r"])
        unknowns = UnknownVector(*(float(data["unknowns"][k]) for k in UnknownVector._fields))
        meanfield = MeanPair(*(float(data["meanfield"][k]) for k in MeanPair._fields)) \
            if "meanfield" in data else MeanPair(unknowns.m1, unknowns.m2)
        residual_norm = float(data["residual_norm"])
        energy = float(data["energy"])
        stored_T = float(data["T"])
        metadata = dict(data.get("metadata", {}))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed orbit payload: {exc!r}") from exc

    _require(all(len(a) == n for a in arrays.values()), "invariant 'equal array lengths' violated")
    _require(n >= 2, "invariant 'at least two samples' violated")
    _require(arrays["t"][0] == 0.0, "invariant 't[0] = 0' violated")
    _require(stored_T == arrays["t"][-1], "invariant 'T equals the last sample time' violated")
    _require(bool(np.all(np.diff(arrays["t"]) > 0)), "invariant 't strictly increasing' violated")
    _require(bool(np.all(np.diff(arrays["q2"]) < 0)), "invariant 'q2 strictly decreasing' violated")
    _require(bool(np.all(arrays["q1"] > arrays["q2"])), "invariant 'q1 > q2' violated")
    _require(0.0 <= r <= 1.0, "invariant '0 <= r <= 1' violated")

    iterations = metadata.pop("iterations", 0)
    traj = Trajectory(**arrays, r=r, meanfield=meanfield, n_steps=int(metadata.get("steps", 0)))
    return SolvedOrbit(r, unknowns, traj, residual_norm, energy, iterations, metadata)


def _dump(payload: dict, path) -> None:
    text = json.dumps(payload, indent=1, sort_keys=True, allow_nan=True)
    Path(path).write_text(text + "\n")


def _load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not a valid orbit/branch file ({exc})") from exc


def write_orbit(orb: SolvedOrbit, path, timestamp: str | None = None) -> None:
    _dump(orbit_payload(orb, timestamp), path)


def read_orbit(path) -> SolvedOrbit:
    data = _load(path)
    if isinstance(data, dict) and data.get("kind") == "branch":
        raise SchemaError(f"{path} holds a branch, not a single orbit")
    return orbit_from_payload(data)


def write_branch(branch: Branch, path, timestamp: str | None = None) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "branch",
        "config": branch.config,
        "predictors": list(branch.predictors),
        "failures": list(branch.failures),
        "stall": branch.stall,
        "orbits": [orbit_payload(o, timestamp) for o in branch.orbits],
    }
    _dump(payload, path)


def branch_from_payload(data: dict) -> Branch:
    _require(isinstance(data, dict) and data.get("kind") == "branch", "not a branch payload")
    _require(data.get("schema_version") == SCHEMA_VERSION,
             f"schema_version must be {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
    try:
        orbits = [orbit_from_payload(o) for o in data["orbits"]]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed branch payload: {exc!r}") from exc
    rs = np.array([o.r for o in orbits])
    if len(rs) > 1:
        steps = np.diff(rs)
        _require(bool(np.all(steps > 0) or np.all(steps < 0)), "invariant 'r strictly monotone' violated")
    return Branch(orbits, list(data.get("predictors", [])), list(data.get("failures", [])),
                  dict(data.get("config", {})), data.get("stall"))


def read_branch(path) -> Branch:
    return branch_from_payload(_load(path))


def read_any(path):
    """Load an orbit or a branch file; returns ``SolvedOrbit`` or ``Branch``."""
    data = _load(path)
    if isinstance(data, dict) and data.get("kind") == "branch":
        return branch_from_payload(data)
    return orbit_from_payload(data)


# ---------------------------------------------------------------------------
# CSV


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _trajectory_rows(tr: Trajectory):
    return zip(tr.t, tr.q1, tr.q2, tr.v1, tr.v2, tr.energy)


def summary_row(orb: SolvedOrbit) -> tuple:
    tr = orb.traj
    u = orb.unknowns
    gap = tr.q1 - tr.q2
    return (orb.r, u.a1, u.a2, u.m1, u.m2, tr.q1[0] - tr.q2[0], tr.q1[-1], orb.energy, float(np.min(gap)))


def export_csv(obj, path, what: str = "trajectory") -> None:
    """Write ``trajectory``, ``symmetric`` (mirrored over [0, 2T]) or ``branch-summary`` CSV."""
    if what == "branch-summary":
        orbits = obj.orbits if isinstance(obj, Branch) else [obj]
        _write_rows(path, SUMMARY_HEADER, (summary_row(o) for o in orbits))
        return
    if isinstance(obj, Branch):
        if not obj.orbits:
            raise ValueError("empty branch")
        obj = obj.orbits[-1]
    if what == "trajectory":
        tr = obj.traj
    elif what == "symmetric":
        tr = extend_symmetric(obj)
    else:
        raise ValueError(f"unknown export kind {what!r}")
    _write_rows(path, TRAJECTORY_HEADER, _trajectory_rows(tr))
