"""CSV matrices with NA for missing entries, and JSON run manifests.

Numbers are written with 17 significant digits so a write/read round trip
reproduces every float64 bit-exactly. Binary blocks therefore serialize as
plain 0/1. The header row carries column names; readers only check the
column count.
"""

import csv
import hashlib
import json
import time

import numpy as np


class DataFileError(Exception):
    """A file exists but its content is not a valid matrix."""


def write_matrix(path, M, mask=None, prefix="c"):
    """Write a matrix as CSV; entries where mask == 0 become NA."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("write_matrix: need a 2-d array")
    if mask is None:
        mask = ~np.isnan(M)
    else:
        mask = np.asarray(mask) != 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["%s%d" % (prefix, j) for j in range(M.shape[1])])
        for i in range(M.shape[0]):
            writer.writerow(["%.17g" % M[i, j] if mask[i, j] else "NA"
                             for j in range(M.shape[1])])


def read_matrix(path):
    """Read a CSV matrix; returns floats with NaN at NA cells."""
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataFileError("%s: empty file" % path)
            width = len(header)
            for lineno, cells in enumerate(reader, start=2):
                if len(cells) != width:
                    raise DataFileError("%s:%d: expected %d cells, got %d"
                                        % (path, lineno, width, len(cells)))
                row = []
                for cell in cells:
                    cell = cell.strip()
                    if cell == "NA":
                        row.append(np.nan)
                    else:
                        try:
                            row.append(float(cell))
                        except ValueError:
                            raise DataFileError("%s:%d: bad cell %r"
                                                % (path, lineno, cell)) from None
                rows.append(row)
    except OSError as exc:
        raise DataFileError("cannot read %s: %s" % (path, exc)) from exc
    if not rows:
        raise DataFileError("%s: no data rows" % path)
    return np.array(rows, dtype=float)


def write_vector(path, v, name="value"):
    write_matrix(path, np.asarray(v, dtype=float).reshape(-1, 1), prefix=name)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


class ManifestTimer:
    """Collects what a CLI run needs to record, then writes manifest.json."""

    def __init__(self, command, parameters):
        self.command = command
        self.parameters = parameters
        self.input_digests = {}
        self._t0 = time.time()

    def add_input(self, label, path):
        self.input_digests[label] = file_digest(path)

    def write(self, path, version):
        write_json(path, {
            "command": self.command,
            "parameters": self.parameters,
            "version": version,
            "input_digests": self.input_digests,
            "wall_seconds": round(time.time() - self._t0, 3),
        })
