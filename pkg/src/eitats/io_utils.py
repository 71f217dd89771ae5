"""Deterministic file I/O: atomic writes, provenance headers, CSV schemas.

Every output file embeds a provenance header (config hash, seed, tool
version).  Floats are written with 17 significant digits so emitted files are
byte-stable across reruns and values survive a read/write cycle losslessly.
CSV spectra use the schema ``detuning_mhz,tprime`` with ``#`` comment lines.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .spectra import Spectrum

__all__ = [
    "SCHEMA_VERSION",
    "fmt",
    "atomic_write_text",
    "write_spectrum_csv",
    "read_spectrum_csv",
    "write_table_csv",
    "write_json_report",
]

SCHEMA_VERSION = 1
TWO_PI_MHZ = 2.0 * math.pi * 1e6


def fmt(value: float) -> str:
    """17-significant-digit decimal form (exact round trip for doubles)."""
    return f"{float(value):.17g}"


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    handle, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as tmp:
            tmp.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _provenance_lines(provenance: dict) -> list[str]:
    return [f"# {key}={provenance[key]}" for key in sorted(provenance)]


def write_spectrum_csv(path, spectrum: Spectrum, provenance: dict) -> None:
    lines = _provenance_lines(provenance)
    lines.append("detuning_mhz,tprime")
    for det, val in zip(spectrum.detunings, spectrum.values):
        lines.append(f"{fmt(det / TWO_PI_MHZ)},{fmt(val)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_spectrum_csv(path) -> Spectrum:
    detunings, values = [], []
    metadata = {}
    with open(path, encoding="utf-8") as handle:
        header_seen = False
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != "detuning_mhz,tprime":
                    raise ValueError(f"unexpected spectrum CSV header: '{line}'")
                header_seen = True
                continue
            left, _, right = line.partition(",")
            detunings.append(float(left) * TWO_PI_MHZ)
            values.append(float(right))
    if not header_seen:
        raise ValueError("not a spectrum CSV (missing header)")
    return Spectrum(detunings=np.array(detunings), values=np.array(values),
                    metadata=metadata)


def write_table_csv(path, header: list[str], columns: list[np.ndarray],
                    provenance: dict) -> None:
    if len(header) != len(columns):
        raise ValueError("header and column count mismatch")
    lines = _provenance_lines(provenance)
    lines.append(",".join(header))
    n_rows = len(columns[0])
    for row in range(n_rows):
        lines.append(",".join(fmt(col[row]) for col in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(val) for val in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(val) for val in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, float) and math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return value


def write_json_report(path, payload: dict, provenance: dict) -> None:
    document = {"schema_version": SCHEMA_VERSION, "provenance": dict(provenance)}
    document.update(payload)
    atomic_write_text(path, json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n")
