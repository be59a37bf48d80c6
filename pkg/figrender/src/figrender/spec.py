"""Figure specifications and input readers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

SUPPORTED_SCHEMA = {1}


class SchemaMismatch(Exception):
    pass


class EmptyInput(Exception):
    pass


@dataclass
class FigureSpec:
    """One figure: input file(s), style, labels, options."""

    inputs: list
    style: str  # trajectory | grid | border
    output: str
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    sqrt_rescale: bool = False  # plot points at sqrt-radius from the origin
    dpi: int = 120

    @classmethod
    def from_file(cls, path) -> "FigureSpec":
        d = json.loads(Path(path).read_text())
        unknown = set(d) - {"inputs", "style", "output", "xlabel", "ylabel",
                            "title", "sqrt_rescale", "dpi"}
        if unknown:
            raise SchemaMismatch(f"unknown spec fields: {sorted(unknown)}")
        if d.get("style") not in ("trajectory", "grid", "border"):
            raise SchemaMismatch(f"style must be trajectory|grid|border, "
                                 f"got {d.get('style')!r}")
        return cls(**d)


@dataclass
class Trajectories:
    header: dict
    branches: dict  # branch_id -> list of rows (re_z, im_z, re_root, im_root, k)


def read_trajectory_csv(path) -> Trajectories:
    """Parse a trace CSV: '# key=value' preamble, column header, data rows."""
    header = {}
    rows = []
    columns = None
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                header[k.strip()] = v.strip()
            continue
        if columns is None:
            columns = line.split(",")
            want = ["branch_id", "re_z", "im_z", "re_root", "im_root", "step_index"]
            if columns != want:
                raise SchemaMismatch(f"unexpected columns {columns}")
            continue
        rows.append(line.split(","))
    sv = header.get("schema_version")
    if sv is None or int(sv) not in SUPPORTED_SCHEMA:
        raise SchemaMismatch(f"unsupported schema_version {sv!r}")
    if not rows:
        raise EmptyInput(f"no trajectory rows in {path}")
    branches: dict = {}
    for r in rows:
        bid = int(r[0])
        branches.setdefault(bid, []).append(
            (float(r[1]), float(r[2]), float(r[3]), float(r[4]), int(r[5])))
    return Trajectories(header=header, branches=branches)


def read_grid_json(path) -> dict:
    d = json.loads(Path(path).read_text())
    if d.get("schema_version") not in SUPPORTED_SCHEMA:
        raise SchemaMismatch(f"unsupported schema_version "
                             f"{d.get('schema_version')!r}")
    for key in ("re_axis", "im_axis", "values"):
        if key not in d:
            raise SchemaMismatch(f"grid json missing {key!r}")
    if not d["values"] or not d["re_axis"]:
        raise EmptyInput(f"empty grid in {path}")
    return d


def read_border_json(path) -> list:
    """Border points from a thresholds report: list of
    {re_z, im_border, predicted} dicts."""
    d = json.loads(Path(path).read_text())
    if d.get("schema_version") not in SUPPORTED_SCHEMA:
        raise SchemaMismatch(f"unsupported schema_version "
                             f"{d.get('schema_version')!r}")
    for check in d.get("checks", []):
        if "points" in check:
            if not check["points"]:
                raise EmptyInput(f"no border points in {path}")
            return check["points"]
    raise SchemaMismatch(f"no border point list in {path}")
