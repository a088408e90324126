"""Flat key=value config parsing and deterministic CSV/JSON output.

Configs are plain text: one `key = value` per line, `#` starts a comment,
keys are namespaced with dots (scheme.omega1_hz). Frequencies given in keys
ending `_hz` are converted to angular rad/s at the parse boundary; times
are in seconds throughout. Output CSVs are RFC 4180 (CRLF line endings)
with floats at full precision, so reruns are byte-identical.
"""
from __future__ import annotations

import csv
import json
import math


class ConfigError(ValueError):
    pass


def parse_config(path: str) -> dict:
    """Read a flat config file into a {key: raw-string} dict."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, val = body.split("=", 1)
            key = key.strip()
            val = val.strip()
            if not key:
                raise ConfigError(f"line {lineno}: empty key")
            if key in out:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            out[key] = val
    return out


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def write_csv(path: str, header, rows) -> int:
    """RFC 4180 CSV with full-precision floats; returns the row count."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else fmt_float(cell)
                             for cell in row])
            n += 1
    return n


def write_json_meta(path: str, meta: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2, allow_nan=True)
        fh.write("\n")
