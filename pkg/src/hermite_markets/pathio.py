"""Flat-file exchange formats: path ensembles as CSV plus a JSON sidecar.

The CSV layout is one time column ``t`` followed by one column per path
(``p0``, ``p1``, ...), every number rendered with %.17g so a written file
round-trips bit for bit.  The sidecar at ``<name>.json`` carries whatever
metadata is needed to regenerate the file, and readers merge it back into
the path's ``meta``.
"""

import json
import os

import numpy as np

from .processes import SamplePath

__all__ = [
    "PathFormatError",
    "write_path_csv",
    "write_sidecar",
    "read_sidecar",
    "read_path_csv",
    "write_surface_csv",
]


class PathFormatError(ValueError):
    """A path CSV failed validation; the message carries the line number."""


def _fmt(value):
    return f"{value:.17g}"


def write_path_csv(path, filename):
    """Write a SamplePath ensemble as ``t,p0,p1,...`` rows."""
    values = path.values
    times = path.times
    with open(filename, "w") as fh:
        fh.write("t," + ",".join(f"p{i}" for i in range(path.n_paths)) + "\n")
        for k in range(path.steps + 1):
            fh.write(_fmt(times[k]) + ","
                     + ",".join(_fmt(values[i, k]) for i in range(path.n_paths))
                     + "\n")


def write_sidecar(filename, payload):
    """Write the JSON sidecar next to ``filename`` and return its name."""
    sidecar = f"{filename}.json"
    with open(sidecar, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def read_sidecar(filename):
    """Load the JSON sidecar for ``filename``; None when absent."""
    sidecar = f"{filename}.json"
    if not os.path.exists(sidecar):
        return None
    with open(sidecar) as fh:
        return json.load(fh)


def read_path_csv(filename):
    """Read a path ensemble back, validating the grid as it goes.

    The header must start with ``t``, every row must parse as floats of
    consistent width, and the time column must be a uniform grid starting
    at zero.  Violations raise PathFormatError naming the offending line.
    """
    with open(filename) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise PathFormatError("line 1: empty file")
    header = lines[0].split(",")
    if header[0] != "t" or len(header) < 2:
        raise PathFormatError("line 1: header must be t,p0,p1,...")
    n_cols = len(header)
    times = []
    columns = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != n_cols:
            raise PathFormatError(
                f"line {lineno}: expected {n_cols} columns, found {len(cells)}")
        try:
            row = [float(c) for c in cells]
        except ValueError as exc:
            raise PathFormatError(f"line {lineno}: {exc}") from None
        times.append(row[0])
        columns.append(row[1:])
    if len(times) < 2:
        raise PathFormatError("line 2: need at least two time rows")
    times = np.asarray(times)
    values = np.asarray(columns).T
    if abs(times[0]) > 1e-12:
        raise PathFormatError("line 2: time grid must start at 0")
    dt = times[1] - times[0]
    if dt <= 0:
        raise PathFormatError("line 3: time grid must increase")
    expected = times[0] + dt * np.arange(len(times))
    bad = np.abs(times - expected) > 1e-9 * max(1.0, abs(times[-1]))
    if bad.any():
        raise PathFormatError(f"line {int(np.argmax(bad)) + 2}: time grid not uniform")
    meta = read_sidecar(filename) or {}
    seed = int(meta.get("seed", 0))
    kind = meta.get("kind", "driver")
    if kind not in ("driver", "price"):
        kind = "driver"
    return SamplePath(horizon=float(times[-1]), steps=len(times) - 1,
                      values=values, seed=seed, kind=kind, meta=meta)


def write_surface_csv(surface, filename):
    """Write a PdeSurface as rows of time against the price nodes.

    Columns are named x0, x1, ...; the actual node prices go into the
    sidecar (written separately by the caller) since column labels have
    no room for them.
    """
    with open(filename, "w") as fh:
        fh.write("t," + ",".join(f"x{i}" for i in range(len(surface.prices))) + "\n")
        for k, t in enumerate(surface.times):
            fh.write(_fmt(t) + ","
                     + ",".join(_fmt(v) for v in surface.values[k]) + "\n")
