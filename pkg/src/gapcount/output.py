"""CSV/JSON writers with a '#'-prefixed header echoing the resolved config.

Numbers print with 17 significant digits so outputs round-trip and can seed
further runs.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone


def format_value(val):
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return format(val, ".17g")
    if isinstance(val, (list, tuple)):
        return "[" + ", ".join(format_value(v) for v in val) + "]"
    return str(val)


def header_lines(resolved, version, timestamp=True, extra=None):
    lines = [f"# gapcount v{version}"]
    if timestamp:
        lines.append(
            "# generated = "
            + datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        )
    for key in sorted(resolved):
        lines.append(f"# {key} = {format_value(resolved[key])}")
    for line in extra or ():
        lines.append(f"# {line}")
    return lines


def write_csv(path, headers, columns, rows):
    with open(path, "w", newline="") as fh:
        for line in headers:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def write_json(path, headers, payload):
    doc = {"header": list(headers), "result": payload}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")
