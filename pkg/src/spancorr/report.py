"""JSON/CSV/text rendering with a provenance header.

Floats are written with 17 significant digits, rationals as "p/q" strings,
so identical runs give byte-identical output apart from the timestamp.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__

SEED_ENV = "SPANCORR_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def plain(obj: Any) -> Any:
    """Convert to JSON-ready builtins (Fractions become strings; floats stay floats)."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [plain(v) for v in items]
    if hasattr(obj, "as_dict"):
        return plain(obj.as_dict())
    if dataclasses.is_dataclass(obj):
        return plain({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj) if f.repr})
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with 17-significant-digit floats and sorted keys."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            body = ",\n".join(f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in sorted(o.items()))
            return "{\n" + body + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, float):
            return fmt_float(o)
        return json.dumps(o)

    return enc(plain(obj), 0) + "\n"


def config_hash(config: dict) -> str:
    text = json.dumps(plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def provenance(command: list[str], config: dict, seed: int | None) -> dict:
    return {
        "tool": "spancorr",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config_hash": config_hash(config),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def csv_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    rows = [plain(r) for r in rows]
    fields = list(rows[0])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: fmt_float(v) if isinstance(v, float) else
                    (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
    return buf.getvalue()


def text_lines(obj: Any, prefix: str = "") -> list[str]:
    """Flat ``key: value`` lines for terminal reading."""
    obj = plain(obj)
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not (isinstance(v, list) and len(v) <= 8
                                                        and all(not isinstance(x, (dict, list)) for x in v)):
                out.append(f"{prefix}{k}:")
                out += text_lines(v, prefix + "  ")
            else:
                out.append(f"{prefix}{k}: {_short(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if isinstance(v, (dict, list)):
                out.append(f"{prefix}[{i}]")
                out += text_lines(v, prefix + "  ")
            else:
                out.append(f"{prefix}- {_short(v)}")
    else:
        out.append(prefix + _short(obj))
    return out


def _short(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    if isinstance(v, list):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)
