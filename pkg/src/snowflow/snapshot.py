"""Save and restore the full model state as delimited text.

Format: a version header, counts, then one tab-separated row per value.
Floats are written with ``repr`` so a round-trip restores them bit-exactly.

    snowflow-snapshot 1
    n_hru <n>
    [states]
    <hru>\t<field>\t<value>
    [parameters]
    <name>\t<index>\t<value>
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from .basin import STATE_FIELDS, HruState
from .parameters import ParameterSet, build_registry

FORMAT_NAME = "snowflow-snapshot"
FORMAT_VERSION = 1


class SnapshotError(ValueError):
    """Malformed snapshot file; message carries line number and field."""


def snapshot_save(path, states: List[HruState], params: ParameterSet) -> None:
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}", f"n_hru {len(states)}", "[states]"]
    for h, state in enumerate(states):
        for name in STATE_FIELDS:
            lines.append(f"{h}\t{name}\t{getattr(state, name)!r}")
    lines.append("[parameters]")
    for name, arr in sorted(params.items()):
        for i, v in enumerate(arr):
            lines.append(f"{name}\t{i}\t{float(v)!r}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise SnapshotError(f"line {lineno}: bad {what} value {token!r}") from None


def snapshot_load(path, tmax_allrain_cadence: str = "constant") -> Tuple[List[HruState], ParameterSet]:
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise SnapshotError("line 1: empty snapshot file")
    head = raw[0].split()
    if len(head) != 2 or head[0] != FORMAT_NAME:
        raise SnapshotError(f"line 1: expected {FORMAT_NAME!r} header, got {raw[0]!r}")
    if int(head[1]) != FORMAT_VERSION:
        raise SnapshotError(f"line 1: unsupported snapshot version {head[1]}")
    if len(raw) < 3 or not raw[1].startswith("n_hru "):
        raise SnapshotError("line 2: missing n_hru line")
    n_hru = int(raw[1].split()[1])
    if raw[2] != "[states]":
        raise SnapshotError("line 3: expected [states] section")

    states = [HruState() for _ in range(n_hru)]
    seen_state: Dict[Tuple[int, str], bool] = {}
    param_rows: Dict[str, List[Tuple[int, float]]] = {}
    section = "states"
    for lineno, line in enumerate(raw[3:], start=4):
        if not line.strip():
            continue
        if line == "[parameters]":
            section = "parameters"
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise SnapshotError(f"line {lineno}: expected 3 tab-separated fields")
        if section == "states":
            try:
                h = int(cols[0])
            except ValueError:
                raise SnapshotError(f"line {lineno}: bad hru index {cols[0]!r}") from None
            name = cols[1]
            if name not in STATE_FIELDS:
                raise SnapshotError(f"line {lineno}: unknown state field {name!r}")
            if not 0 <= h < n_hru:
                raise SnapshotError(f"line {lineno}: hru index {h} out of range")
            setattr(states[h], name, _parse_float(cols[2], lineno, name))
            seen_state[(h, name)] = True
        else:
            name, idx = cols[0], int(cols[1])
            param_rows.setdefault(name, []).append(
                (idx, _parse_float(cols[2], lineno, name))
            )

    missing = [
        f"hru {h} field {name}"
        for h in range(n_hru)
        for name in STATE_FIELDS
        if (h, name) not in seen_state
    ]
    if missing:
        raise SnapshotError(f"truncated snapshot: missing {missing[0]} "
                            f"(+{len(missing) - 1} more)" if len(missing) > 1
                            else f"truncated snapshot: missing {missing[0]}")

    if len(param_rows.get("tmax_allrain", [])) == 12:
        tmax_allrain_cadence = "monthly"
    registry = build_registry(tmax_allrain_cadence)
    params = ParameterSet(n_hru=n_hru, registry=registry)
    for name, rows in param_rows.items():
        if name not in registry:
            raise SnapshotError(f"unknown parameter field {name!r} in snapshot")
        rows.sort()
        params.set(name, np.array([v for _, v in rows]))
    return states, params
